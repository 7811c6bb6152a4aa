#pragma once

// Growth monomials e^(c*w) * w^p * log(w)^q, ordered lexicographically by (c, p, q).

#include <optional>
#include <string>

#include <hyperreal/scalar.hpp>

namespace hyperreal
{

struct GrowthMonomial
{
    ExactScalar c; // exponential rate
    ExactScalar p; // power of w
    ExactScalar q; // power of log w

    static GrowthMonomial unit() { return {}; }
    static GrowthMonomial omega() { return {ExactScalar(), ExactScalar(1), ExactScalar()}; }
    static GrowthMonomial power(const ExactScalar &p) { return {ExactScalar(), p, ExactScalar()}; }

    bool is_unit() const { return c.is_zero() && p.is_zero() && q.is_zero(); }

    // True when every exponent is rational and there is no exponential factor.
    bool is_power_of_omega() const { return c.is_zero() && q.is_zero() && p.is_rational(); }

    GrowthMonomial operator*(const GrowthMonomial &o) const { return {c + o.c, p + o.p, q + o.q}; }
    GrowthMonomial inverse() const { return {-c, -p, -q}; }
    GrowthMonomial operator/(const GrowthMonomial &o) const { return *this * o.inverse(); }
    GrowthMonomial pow(const Rational &r) const
    {
        return {c * ExactScalar(r), p * ExactScalar(r), q * ExactScalar(r)};
    }

    friend bool operator==(const GrowthMonomial &a, const GrowthMonomial &b)
    {
        return a.c == b.c && a.p == b.p && a.q == b.q;
    }
    friend bool operator!=(const GrowthMonomial &a, const GrowthMonomial &b) { return !(a == b); }

    // Value at index n as an interval. Undefined at n = 1 when q < 0.
    detail::Interval interval_at(const BigInt &n, mpfr_prec_t prec) const
    {
        using detail::Interval;
        const auto N = Interval::point(Rational(n), prec);
        Interval expo = Interval::point(Rational(0), prec);
        if (!c.is_zero()) {
            expo = expo + c.interval(prec) * N;
        }
        if (!p.is_zero() && n != 1) {
            expo = expo + p.interval(prec) * log(N);
        }
        if (!q.is_zero()) {
            if (n == 1) {
                if (scalar_sign(q) < 0) {
                    fail(ErrorCode::domain_error, "log(w)^q with q < 0 at index 1");
                }
                return Interval::point(Rational(0), prec);
            }
            expo = expo + q.interval(prec) * log(log(N));
        }
        return exp(expo);
    }

    // Exact value at n when it stays inside the constant vocabulary.
    std::optional<ExactScalar> exact_at(const BigInt &n) const
    {
        try {
            ExactScalar v(1);
            if (!c.is_zero()) {
                v *= exp(c * ExactScalar(Rational(n)));
            }
            if (!p.is_zero()) {
                if (!p.is_rational()) {
                    return std::nullopt;
                }
                v *= ExactScalar::radical(Rational(n), p.rational_part());
            }
            if (!q.is_zero()) {
                if (!q.is_rational()) {
                    return std::nullopt;
                }
                const Rational qq = q.rational_part();
                if (n == 1) {
                    if (qq < 0) {
                        return std::nullopt;
                    }
                    return ExactScalar();
                }
                const auto L = ExactScalar::log(Rational(n));
                if (!is_integer(qq) || (qq < 0 && !L.is_single_term())) {
                    return std::nullopt;
                }
                v *= L.pow(qq);
            }
            return v;
        } catch (const Error &) {
            return std::nullopt;
        }
    }
};

// -1, 0, 1 in the lexicographic (c, p, q) order.
inline int compare_growth(const GrowthMonomial &a, const GrowthMonomial &b)
{
    if (int s = compare_scalars(a.c, b.c)) {
        return s;
    }
    if (int s = compare_scalars(a.p, b.p)) {
        return s;
    }
    return compare_scalars(a.q, b.q);
}

namespace detail
{

inline std::string paren_if_compound(const std::string &s)
{
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char ch = s[i];
        if (ch == ' ' || ch == '+' || ch == '*' || ch == '/' || (ch == '-' && i > 0)) {
            return "(" + s + ")";
        }
    }
    return s;
}

// Exponent text for k*w: "w", "-w", "(w/2)", "(-3*w/2)", "(2*w)".
inline std::string rate_exponent(const Rational &k, const std::string &w)
{
    if (k == 1) {
        return w;
    }
    if (k == -1) {
        return "-" + w;
    }
    std::string s;
    const BigInt n = k.get_num();
    const BigInt d = k.get_den();
    if (n == 1) {
        s = w;
    } else if (n == -1) {
        s = "-" + w;
    } else {
        s = n.get_str() + "*" + w;
    }
    if (d != 1) {
        s += "/" + d.get_str();
    }
    return "(" + s + ")";
}

inline BigInt rational_gcd(const std::vector<Rational> &xs, BigInt &den_lcm)
{
    BigInt g = 0;
    den_lcm = 1;
    for (const auto &x : xs) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_num_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), x.get_den_mpz_t());
    }
    return g;
}

// Render e^(c*w). Rates that are rational multiples of logs of primes are
// shown with an integer base, e.g. "2^-w" or "6^(w/2)".
inline std::string exp_factor(const ExactScalar &c, const std::string &w)
{
    if (c.is_rational()) {
        return "e^" + rate_exponent(c.rational_part(), w);
    }
    bool logs = true;
    std::vector<Rational> ks;
    std::vector<unsigned long> ps;
    for (const auto &t : c.terms()) {
        if (t.monomial.factors.size() != 1 || t.monomial.factors[0].constant.kind != ConstantKind::log_prime ||
            t.monomial.factors[0].exponent != 1) {
            logs = false;
            break;
        }
        ks.push_back(t.coeff);
        ps.push_back(t.monomial.factors[0].constant.prime);
    }
    if (logs) {
        bool pos = true, neg = true;
        for (const auto &k : ks) {
            pos = pos && k > 0;
            neg = neg && k < 0;
        }
        if (pos || neg) {
            BigInt den_lcm;
            BigInt g = rational_gcd(ks, den_lcm);
            Rational t = make_rational(g, den_lcm);
            BigInt base = 1;
            for (std::size_t i = 0; i < ks.size(); ++i) {
                Rational e = abs(ks[i]) / t;
                BigInt pk;
                mpz_pow_ui(pk.get_mpz_t(), BigInt(ps[i]).get_mpz_t(), e.get_num().get_ui());
                base *= pk;
            }
            return base.get_str() + "^" + rate_exponent(neg ? Rational(-t) : t, w);
        }
    }
    return "e^(" + paren_if_compound(c.to_string()) + "*" + w + ")";
}

inline std::string power_factor(const std::string &base, const ExactScalar &e)
{
    if (e.is_rational()) {
        const Rational r = e.rational_part();
        if (r == 1) {
            return base;
        }
        if (r == Rational(1, 2) && base.find('(') == std::string::npos) {
            return "sqrt(" + base + ")";
        }
        if (is_integer(r)) {
            return base + "^" + r.get_str();
        }
        return base + "^(" + r.get_str() + ")";
    }
    return base + "^(" + e.to_string() + ")";
}

} // namespace detail

// Factors of a monomial split into numerator and denominator text.
struct GrowthParts
{
    std::string exp;
    std::vector<std::string> up;
    std::vector<std::string> down;
};

inline GrowthParts growth_parts(const GrowthMonomial &g, const std::string &w)
{
    GrowthParts out;
    if (!g.c.is_zero()) {
        out.exp = detail::exp_factor(g.c, w);
    }
    auto place = [&](const std::string &base, const ExactScalar &e) {
        if (e.is_zero()) {
            return;
        }
        if (scalar_sign(e) > 0) {
            out.up.push_back(detail::power_factor(base, e));
        } else {
            out.down.push_back(detail::power_factor(base, -e));
        }
    };
    place(w, g.p);
    place("log(" + w + ")", g.q);
    return out;
}

} // namespace hyperreal
