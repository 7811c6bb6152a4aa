#pragma once

// Randomized law checks shared by the property tests and the acceptance runner.
// Oracles are computed here from first principles (brute-force partial sums,
// quadrature, log-magnitudes), never from the engine under test.

#include <array>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <hyperreal/engine.hpp>

namespace props
{

using namespace hyperreal;

struct Family
{
    std::string name;
    int cases = 0;
    std::vector<std::string> failures;

    void check(bool ok, const std::string &what)
    {
        ++cases;
        if (!ok && failures.size() < 20) {
            failures.push_back(what);
        }
    }
};

using Rng = std::mt19937_64;

inline long pick(Rng &rng, long lo, long hi)
{
    return std::uniform_int_distribution<long>(lo, hi)(rng);
}

inline Rational rand_rational(Rng &rng, long span = 9, long den = 6)
{
    return make_rational(pick(rng, -span, span), pick(rng, 1, den));
}

inline Rational rand_nonzero(Rng &rng)
{
    Rational q;
    do {
        q = rand_rational(rng);
    } while (q == 0);
    return q;
}

// Polynomial in w with rational coefficients and 2^(+-w) factors; elements are exact.
inline Symbolic rand_exact_value(Rng &rng, int max_terms = 3)
{
    Symbolic s;
    const int k = static_cast<int>(pick(rng, 1, max_terms));
    for (int t = 0; t < k; ++t) {
        const long p = pick(rng, -2, 3);
        const long c = pick(rng, 0, 5) == 0 ? pick(rng, -1, 1) : 0;
        GrowthMonomial g{c == 0 ? ExactScalar() : ExactScalar(Rational(c)) * ExactScalar::log(Rational(2)),
                         ExactScalar(Rational(p)), ExactScalar()};
        s += Symbolic::monomial(ExactScalar(rand_nonzero(rng)), g);
    }
    return s;
}

// Exact element of an atom-free value built by rand_exact_value.
inline Rational oracle_element(const Symbolic &s, long n)
{
    Rational acc = 0;
    for (const auto &t : s.terms()) {
        Rational v = t.coeff.as_rational();
        const long p = t.scale.p.as_rational().get_num().get_si();
        v *= rational_pow(Rational(n), p);
        if (!t.scale.c.is_zero()) {
            // c = +-log 2
            const int sign = scalar_sign(t.scale.c);
            v *= rational_pow(Rational(2), sign * n);
        }
        acc += v;
    }
    return acc;
}

inline Family field_laws(Rng &rng, int count)
{
    Family f{"field laws"};
    for (int i = 0; i < count; ++i) {
        const Symbolic a = rand_exact_value(rng);
        const Symbolic b = rand_exact_value(rng);
        const Symbolic c = rand_exact_value(rng);
        const bool assoc = (a + b) + c == a + (b + c) && (a * b) * c == a * (b * c);
        const bool comm = a + b == b + a && a * b == b * a;
        const bool dist = a * (b + c) == a * b + a * c;
        const bool inv = (a - a).is_zero() && (a + (-a)).is_zero();
        bool recip = true;
        if (a.is_single_term()) {
            recip = a * sym_reciprocal(a) == Symbolic(1);
        }
        // elements follow the operations pointwise
        const Hyperreal H = Hyperreal(a) * Hyperreal(b) + Hyperreal(c);
        const long n = pick(rng, 1, 40);
        const Element e = H.element(BigInt(n));
        const bool pointwise = element_exact(e) && std::get<Rational>(e) == oracle_element(a, n) * oracle_element(b, n) +
                                                                          oracle_element(c, n);
        f.check(assoc && comm && dist && inv && recip && pointwise,
                "a=" + a.to_string() + " b=" + b.to_string() + " c=" + c.to_string());
    }
    return f;
}

struct SummandSpec
{
    SeriesPtr series;
    std::function<Rational(long)> at;
};

inline SummandSpec rand_summand(Rng &rng)
{
    switch (pick(rng, 0, 3)) {
        case 0: {
            const Rational c = rand_nonzero(rng);
            return {series::constant(ExactScalar(c)), [c](long) { return c; }};
        }
        case 1: {
            const long k = pick(rng, 1, 4);
            return {series::power(static_cast<unsigned long>(k)), [k](long i) { return rational_pow(Rational(i), k); }};
        }
        case 2: {
            const std::array<Rational, 6> ratios{make_rational(1, 2), Rational(2), Rational(3), Rational(-1),
                                                 make_rational(1, 3), make_rational(-1, 2)};
            const Rational r = ratios[pick(rng, 0, 5)];
            return {series::geometric(r), [r](long i) { return rational_pow(r, i); }};
        }
        default: {
            const long k = pick(rng, 0, 2);
            const std::array<Rational, 3> ratios{make_rational(1, 2), Rational(2), Rational(-1)};
            const Rational r = ratios[pick(rng, 0, 2)];
            SeriesPtr s = series::product(k == 0 ? series::constant(ExactScalar(1)) : series::power(static_cast<unsigned long>(k)),
                                          series::geometric(r));
            return {s, [k, r](long i) -> Rational { return rational_pow(Rational(i), k) * rational_pow(r, i); }};
        }
    }
}

inline bool zero_in_every_branch(const Hyperreal &h)
{
    if (h.is_sequence_only()) {
        return false;
    }
    for (const auto &b : h.form().branches) {
        if (!b.is_zero()) {
            return false;
        }
    }
    return true;
}

inline Family sum_linearity(Rng &rng, int count)
{
    Family f{"linearity of sum"};
    for (int i = 0; i < count; ++i) {
        const auto F = rand_summand(rng);
        const auto G = rand_summand(rng);
        const Rational alpha = rand_nonzero(rng);
        const Rational beta = rand_nonzero(rng);
        const long lo = pick(rng, 0, 3);
        const Hyperreal lhs =
            sum_to_omega(series::add(series::scale(ExactScalar(alpha), F.series), series::scale(ExactScalar(beta), G.series)), lo);
        const Hyperreal rhs = Hyperreal(alpha) * sum_to_omega(F.series, lo) + Hyperreal(beta) * sum_to_omega(G.series, lo);
        bool ok = zero_in_every_branch(lhs - rhs) && !lhs.is_sequence_only();
        // brute-force partial sums
        Rational acc = 0;
        for (long n = lo; n <= 30 && ok; ++n) {
            acc += alpha * F.at(n) + beta * G.at(n);
            if (n >= 1) {
                const Element e = lhs.element(BigInt(n));
                ok = element_exact(e) && std::get<Rational>(e) == acc;
            }
        }
        f.check(ok, "sum from " + std::to_string(lo) + " of " + std::to_string(alpha.get_d()) + "*" +
                        F.series->to_string() + " + " + std::to_string(beta.get_d()) + "*" + G.series->to_string() +
                        " = " + lhs.to_string());
    }
    return f;
}

inline double oracle_quadrature(const std::function<double(double)> &g, double a, double b)
{
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 20, 1e-13, &err);
}

struct IntegrandSpec
{
    FuncPtr f;
    std::function<double(double)> at;
};

inline IntegrandSpec rand_integrand(Rng &rng)
{
    switch (pick(rng, 0, 7)) {
        case 0: return {fn::constant(ExactScalar(1)), [](double) { return 1.0; }};
        case 1: return {fn::x(), [](double x) { return x; }};
        case 2: return {fn::power(2), [](double x) { return x * x; }};
        case 3: return {fn::exp(-1), [](double x) { return std::exp(-x); }};
        case 4: return {fn::exp(-2), [](double x) { return std::exp(-2 * x); }};
        case 5: return {fn::sin(), [](double x) { return std::sin(x); }};
        case 6: return {fn::cos(2), [](double x) { return std::cos(2 * x); }};
        default: return {fn::inv_quad(), [](double x) { return 1.0 / (1.0 + x * x); }};
    }
}

inline Family integral_linearity(Rng &rng, int count)
{
    Family f{"linearity of integral"};
    for (int i = 0; i < count; ++i) {
        const auto F = rand_integrand(rng);
        const auto G = rand_integrand(rng);
        const Rational alpha = rand_nonzero(rng);
        const Rational beta = rand_nonzero(rng);
        const long kind = pick(rng, 0, 2);
        const IntegralBound a = kind == 2 ? IntegralBound::minus_inf() : IntegralBound::at(Rational(pick(rng, 0, 2)));
        const IntegralBound b = kind == 0 ? IntegralBound::at(Rational(pick(rng, 3, 5))) : IntegralBound::plus_inf();
        const FuncPtr sumf = fn::add(fn::scale(ExactScalar(alpha), F.f), fn::scale(ExactScalar(beta), G.f));
        const Hyperreal lhs = integral(sumf, a, b);
        const Hyperreal rhs = Hyperreal(alpha) * integral(F.f, a, b) + Hyperreal(beta) * integral(G.f, a, b);
        bool ok = zero_in_every_branch(lhs - rhs) && lhs.is_symbolic();
        const long n = pick(rng, 2, 6);
        const double lo = a.finite() ? a.value.get_d() : -static_cast<double>(n);
        const double hi = b.finite() ? b.value.get_d() : static_cast<double>(n);
        const double q = oracle_quadrature(
            [&](double x) { return alpha.get_d() * F.at(x) + beta.get_d() * G.at(x); }, lo, hi);
        const double v = lhs.element_double_at(static_cast<std::uint64_t>(n));
        ok = ok && std::abs(v - q) <= 1e-8 * std::max(1.0, std::abs(q));
        f.check(ok, "int " + sumf->to_string() + " on [" + a.to_string() + ", " + b.to_string() + "] = " + lhs.to_string());
    }
    return f;
}

inline Family monomial_order(Rng &rng, int count)
{
    Family f{"monomial order vs asymptotics"};
    const double N = 1e8;
    for (int i = 0; i < count; ++i) {
        struct M
        {
            long c2; // exponential rate in units of log(2)/2
            Rational p;
            long q;
            Rational k;
        } m[2];
        for (auto &x : m) {
            x.c2 = pick(rng, 0, 3) == 0 ? pick(rng, -2, 2) : 0;
            x.p = make_rational(pick(rng, -6, 6), pick(rng, 1, 2));
            x.q = pick(rng, -1, 1);
            x.k = make_rational(pick(rng, 1, 9), pick(rng, 1, 6));
        }
        if (pick(rng, 0, 4) == 0) {
            m[1].c2 = m[0].c2;
            m[1].p = m[0].p;
            m[1].q = m[0].q;
        }
        auto make = [](const M &x) {
            GrowthMonomial g{ExactScalar(make_rational(x.c2, 2)) * ExactScalar::log(Rational(2)), ExactScalar(x.p),
                             ExactScalar(Rational(x.q))};
            return Symbolic::monomial(ExactScalar(x.k), g);
        };
        // log-magnitude at N
        auto L = [&](const M &x) {
            return x.c2 * 0.5 * std::log(2.0) * N + x.p.get_d() * std::log(N) + x.q * std::log(std::log(N)) +
                   std::log(x.k.get_d());
        };
        const OrderVerdict v = compare_symbolic(make(m[0]), make(m[1]));
        int expect = 0;
        const bool same = m[0].c2 == m[1].c2 && m[0].p == m[1].p && m[0].q == m[1].q;
        if (same) {
            expect = m[0].k < m[1].k ? -1 : (m[0].k > m[1].k ? 1 : 0);
        } else {
            const double d = L(m[0]) - L(m[1]);
            expect = d < 0 ? -1 : 1;
        }
        const int got = !v.is_determinate() ? 99 : (v.lt ? -1 : (v.eq ? 0 : 1));
        f.check(got == expect, make(m[0]).to_string() + " vs " + make(m[1]).to_string() + ": " + v.word());
    }
    return f;
}

inline Family shadow_idempotence(Rng &rng, int count)
{
    Family f{"shadow idempotence"};
    for (int i = 0; i < count; ++i) {
        const Rational c0 = rand_rational(rng);
        Symbolic x(c0);
        const int extra = static_cast<int>(pick(rng, 0, 3));
        for (int t = 0; t < extra; ++t) {
            switch (pick(rng, 0, 3)) {
                case 0: x += Symbolic(rand_nonzero(rng)) / Symbolic::omega(); break;
                case 1: x += Symbolic::monomial(ExactScalar(rand_nonzero(rng)), GrowthMonomial::power(ExactScalar(-2))); break;
                case 2: x += sym_exp(-Symbolic::omega() * Symbolic(ExactScalar::log(Rational(2)))) * Symbolic(rand_nonzero(rng)); break;
                default: x += sym_cos(Symbolic::omega()) / Symbolic::omega(); break;
            }
        }
        const bool infinite = pick(rng, 0, 3) == 0;
        if (infinite) {
            x += Symbolic(rand_nonzero(rng)) * Symbolic::omega();
        }
        const Symbolic s = shadow(x);
        bool ok = shadow(s) == s;
        if (!infinite) {
            // the standard part of a finite value is its constant
            ok = ok && s == Symbolic(c0);
            // x - shadow(x) is infinitesimal (or zero)
            const Symbolic d = x - s;
            ok = ok && (d.is_zero() || classify(d) == Classification::infinitesimal);
        }
        f.check(ok, "shadow(" + x.to_string() + ") = " + s.to_string());
    }
    return f;
}

// Determinate verdicts must hold at every index from the witness on; case
// splits must show each possible relation somewhere and no other.
inline Family certificate_audit(Rng &rng, int count)
{
    Family f{"certificate audit"};
    for (int i = 0; i < count; ++i) {
        if (pick(rng, 0, 3) == 0) {
            const long k = pick(rng, 2, 7);
            const Rational off = make_rational(pick(rng, -3, 3), pick(rng, 1, 3));
            const Symbolic a = sym_floor(Symbolic::omega() / Symbolic(Rational(k))) + Symbolic(off);
            const Symbolic b = Symbolic::omega() / Symbolic(Rational(k)) + Symbolic(off);
            const OrderVerdict v = compare_symbolic(a, b);
            bool seen_lt = false, seen_eq = false, seen_gt = false;
            for (long n = 1; n <= 200; ++n) {
                const Rational x = Rational(floor_of(make_rational(n, k))) + off;
                const Rational y = make_rational(n, k) + off;
                seen_lt = seen_lt || x < y;
                seen_eq = seen_eq || x == y;
                seen_gt = seen_gt || x > y;
            }
            f.check(v.known && v.lt == seen_lt && v.eq == seen_eq && v.gt == seen_gt,
                    a.to_string() + " vs " + b.to_string() + ": " + v.word());
            continue;
        }
        const Symbolic a = rand_exact_value(rng);
        const Symbolic b = rand_exact_value(rng);
        const OrderVerdict v = compare_symbolic(a, b);
        bool ok = v.is_determinate();
        if (ok) {
            const long from = v.cert.witness ? std::max(1l, v.cert.witness->get_si()) : 1;
            for (long n = from; n < from + 120 && ok; ++n) {
                const Rational x = oracle_element(a, n);
                const Rational y = oracle_element(b, n);
                ok = v.lt ? x < y : (v.eq ? x == y : x > y);
            }
            ok = ok && v.cert.kind != CertificateKind::horizon_scan;
        }
        const TruthValue t = holds(v, Relation::le);
        ok = ok && (t.is_true() == (v.lt || v.eq)) && (t.is_false() == v.gt);
        f.check(ok, a.to_string() + " vs " + b.to_string() + ": " + v.word());
    }
    return f;
}

inline std::vector<Family> run_suite(std::uint64_t seed, int per_family)
{
    Rng rng(seed);
    std::vector<Family> out;
    out.push_back(field_laws(rng, per_family));
    out.push_back(sum_linearity(rng, per_family));
    out.push_back(integral_linearity(rng, per_family));
    out.push_back(monomial_order(rng, per_family));
    out.push_back(shadow_idempotence(rng, per_family));
    out.push_back(certificate_audit(rng, per_family));
    return out;
}

} // namespace props
