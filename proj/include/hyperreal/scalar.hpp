#pragma once

// Exact coefficients: rationals extended by a fixed vocabulary of named
// constants (pi, e, Euler's gamma, log p for primes p, and radicals p^(a/b)).
// A value is a finite sum of rational multiples of constant monomials.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include <hyperreal/detail/interval.hpp>
#include <hyperreal/error.hpp>

namespace hyperreal
{

using BigInt = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const BigInt &num, const BigInt &den = 1)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational make_rational(long num, long den = 1)
{
    return make_rational(BigInt(num), BigInt(den));
}

inline bool is_integer(const Rational &q)
{
    return q.get_den() == 1;
}

inline BigInt floor_of(const Rational &q)
{
    BigInt r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline BigInt ceil_of(const Rational &q)
{
    BigInt r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline std::string rational_string(const Rational &q)
{
    return q.get_str();
}

inline Rational rational_pow(const Rational &q, long k)
{
    if (k < 0) {
        if (q == 0) {
            fail(ErrorCode::division_by_possibly_zero, "zero to a negative power");
        }
        return rational_pow(1 / q, -k);
    }
    BigInt n, d;
    mpz_pow_ui(n.get_mpz_t(), q.get_num_mpz_t(), static_cast<unsigned long>(k));
    mpz_pow_ui(d.get_mpz_t(), q.get_den_mpz_t(), static_cast<unsigned long>(k));
    return make_rational(n, d);
}

namespace detail
{

// Prime factorisation by trial division, finishing with a primality test on
// the cofactor. Enough for the magnitudes a user types or an index reaches.
inline std::vector<std::pair<unsigned long, long>> factor_integer(BigInt n)
{
    std::vector<std::pair<unsigned long, long>> out;
    if (n < 0) {
        n = -n;
    }
    if (n <= 1) {
        return out;
    }
    auto strip = [&](unsigned long p) {
        long e = 0;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
            ++e;
        }
        if (e > 0) {
            out.emplace_back(p, e);
        }
    };
    strip(2);
    for (unsigned long d = 3; d <= 1000000UL; d += 2) {
        if (n == 1) {
            break;
        }
        if (BigInt(d) * d > n) {
            break;
        }
        strip(d);
    }
    if (n > 1) {
        if (!n.fits_ulong_p() || (n > BigInt(1000000) * 1000000 && mpz_probab_prime_p(n.get_mpz_t(), 30) == 0)) {
            fail(ErrorCode::unsupported, "integer too large to factor: " + n.get_str());
        }
        out.emplace_back(n.get_ui(), 1);
    }
    return out;
}

inline Rational rational_mod1(const Rational &q)
{
    return q - Rational(floor_of(q));
}

} // namespace detail

enum class ConstantKind { pi, e, euler_gamma, log_prime, prime_root };

struct Constant
{
    ConstantKind kind;
    unsigned long prime = 0;

    friend bool operator==(const Constant &a, const Constant &b) { return a.kind == b.kind && a.prime == b.prime; }
    friend bool operator<(const Constant &a, const Constant &b)
    {
        return a.kind != b.kind ? a.kind < b.kind : a.prime < b.prime;
    }
};

struct ConstFactor
{
    Constant constant;
    Rational exponent;

    friend bool operator==(const ConstFactor &a, const ConstFactor &b)
    {
        return a.constant == b.constant && a.exponent == b.exponent;
    }
};

// Sorted product of constants raised to rational powers. Empty means 1.
struct ConstMonomial
{
    std::vector<ConstFactor> factors;

    bool empty() const { return factors.empty(); }

    friend bool operator==(const ConstMonomial &a, const ConstMonomial &b) { return a.factors == b.factors; }

    friend int compare(const ConstMonomial &a, const ConstMonomial &b)
    {
        const auto n = std::min(a.factors.size(), b.factors.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto &x = a.factors[i];
            const auto &y = b.factors[i];
            if (x.constant < y.constant) {
                return -1;
            }
            if (y.constant < x.constant) {
                return 1;
            }
            if (x.exponent != y.exponent) {
                return x.exponent < y.exponent ? -1 : 1;
            }
        }
        if (a.factors.size() == b.factors.size()) {
            return 0;
        }
        return a.factors.size() < b.factors.size() ? -1 : 1;
    }
};

namespace detail
{

// Keeps radical exponents in (0, 1); the integral part becomes a rational factor.
inline void push_factor(std::vector<ConstFactor> &out, Rational &multiplier, const Constant &c, Rational e)
{
    if (c.kind == ConstantKind::prime_root) {
        const BigInt k = floor_of(e);
        if (k != 0) {
            multiplier *= rational_pow(Rational(c.prime), k.get_si());
            e -= Rational(k);
        }
    }
    if (e != 0) {
        out.push_back({c, e});
    }
}

inline std::pair<Rational, ConstMonomial> multiply(const ConstMonomial &a, const ConstMonomial &b)
{
    Rational mult = 1;
    ConstMonomial r;
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() || (i < a.factors.size() && a.factors[i].constant < b.factors[j].constant)) {
            push_factor(r.factors, mult, a.factors[i].constant, a.factors[i].exponent);
            ++i;
        } else if (i == a.factors.size() || b.factors[j].constant < a.factors[i].constant) {
            push_factor(r.factors, mult, b.factors[j].constant, b.factors[j].exponent);
            ++j;
        } else {
            push_factor(r.factors, mult, a.factors[i].constant, a.factors[i].exponent + b.factors[j].exponent);
            ++i;
            ++j;
        }
    }
    return {mult, r};
}

inline Interval constant_interval(const Constant &c, mpfr_prec_t prec)
{
    switch (c.kind) {
        case ConstantKind::pi: return Interval::pi(prec);
        case ConstantKind::e: return Interval::e(prec);
        case ConstantKind::euler_gamma: return Interval::euler_gamma(prec);
        case ConstantKind::log_prime: return Interval::log_of(c.prime, prec);
        case ConstantKind::prime_root: return Interval::point(Rational(c.prime), prec);
    }
    return Interval(prec);
}

inline Interval factor_interval(const ConstFactor &f, mpfr_prec_t prec)
{
    if (f.constant.kind == ConstantKind::e) {
        return exp(Interval::point(f.exponent, prec));
    }
    const auto base = constant_interval(f.constant, prec);
    if (f.exponent == 1) {
        return base;
    }
    if (is_integer(f.exponent) && f.exponent > 0 && f.exponent < 8) {
        auto r = base;
        for (long k = 1; k < f.exponent.get_num().get_si(); ++k) {
            r = r * base;
        }
        return r;
    }
    return pow(base, Interval::point(f.exponent, prec));
}

inline std::string exponent_suffix(const Rational &e)
{
    if (e == 1) {
        return "";
    }
    if (is_integer(e)) {
        return "^" + e.get_str();
    }
    return "^(" + e.get_str() + ")";
}

inline std::string factor_string(const Constant &c, const Rational &e)
{
    switch (c.kind) {
        case ConstantKind::pi: return "pi" + exponent_suffix(e);
        case ConstantKind::e: return "e" + exponent_suffix(e);
        case ConstantKind::euler_gamma: return "gamma" + exponent_suffix(e);
        case ConstantKind::log_prime: return "log(" + std::to_string(c.prime) + ")" + exponent_suffix(e);
        case ConstantKind::prime_root:
            if (e == Rational(1, 2)) {
                return "sqrt(" + std::to_string(c.prime) + ")";
            }
            return std::to_string(c.prime) + exponent_suffix(e);
    }
    return "?";
}

} // namespace detail

struct ScalarTerm
{
    ConstMonomial monomial;
    Rational coeff;
};

// Pieces of a single-term scalar, for renderers that interleave other factors.
struct ScalarParts
{
    int sign = 1;
    BigInt num = 1;
    BigInt den = 1;
    std::vector<std::string> up;
    std::vector<std::string> down;
};

class ExactScalar
{
public:
    ExactScalar() = default;
    ExactScalar(long v) : ExactScalar(Rational(v)) {}
    ExactScalar(int v) : ExactScalar(Rational(v)) {}
    ExactScalar(const Rational &q)
    {
        if (q != 0) {
            terms_.push_back({ConstMonomial{}, q});
        }
    }

    static ExactScalar constant(ConstantKind kind, unsigned long prime = 0, const Rational &exponent = 1)
    {
        ExactScalar r;
        Rational mult = 1;
        ConstMonomial m;
        detail::push_factor(m.factors, mult, Constant{kind, prime}, exponent);
        r.terms_.push_back({m, mult});
        r.normalize();
        return r;
    }

    static ExactScalar pi() { return constant(ConstantKind::pi); }
    static ExactScalar e() { return constant(ConstantKind::e); }
    static ExactScalar euler_gamma() { return constant(ConstantKind::euler_gamma); }

    // e^q for rational q.
    static ExactScalar exp_rational(const Rational &q)
    {
        if (q == 0) {
            return ExactScalar(1);
        }
        return constant(ConstantKind::e, 0, q);
    }

    // log r for rational r > 0, expanded over primes.
    static ExactScalar log(const Rational &r)
    {
        if (r <= 0) {
            fail(ErrorCode::domain_error, "log of a non-positive rational");
        }
        ExactScalar out;
        for (auto [p, k] : detail::factor_integer(r.get_num())) {
            out += ExactScalar(Rational(k)) * constant(ConstantKind::log_prime, p);
        }
        for (auto [p, k] : detail::factor_integer(r.get_den())) {
            out -= ExactScalar(Rational(k)) * constant(ConstantKind::log_prime, p);
        }
        return out;
    }

    // base^e for rational base > 0 (or negative base with odd denominator).
    static ExactScalar radical(const Rational &base, const Rational &e)
    {
        if (base == 0) {
            if (e <= 0) {
                fail(ErrorCode::division_by_possibly_zero, "zero to a non-positive power");
            }
            return ExactScalar();
        }
        if (is_integer(e)) {
            return ExactScalar(rational_pow(base, e.get_num().get_si()));
        }
        Rational sign = 1;
        Rational b = base;
        if (b < 0) {
            if (e.get_den() % 2 == 0) {
                fail(ErrorCode::domain_error, "even root of a negative number");
            }
            b = -b;
            if (e.get_num() % 2 != 0) {
                sign = -1;
            }
        }
        ExactScalar out(sign);
        for (auto [p, k] : detail::factor_integer(b.get_num())) {
            out *= constant(ConstantKind::prime_root, p, e * k);
        }
        for (auto [p, k] : detail::factor_integer(b.get_den())) {
            out *= constant(ConstantKind::prime_root, p, -e * k);
        }
        return out;
    }

    const std::vector<ScalarTerm> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].monomial.empty()); }
    bool is_single_term() const { return terms_.size() == 1; }

    Rational rational_part() const
    {
        if (!terms_.empty() && terms_[0].monomial.empty()) {
            return terms_[0].coeff;
        }
        return 0;
    }

    Rational as_rational() const
    {
        if (!is_rational()) {
            fail(ErrorCode::invalid_argument, "scalar is not rational: " + to_string());
        }
        return rational_part();
    }

    friend bool operator==(const ExactScalar &a, const ExactScalar &b)
    {
        if (a.terms_.size() != b.terms_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < a.terms_.size(); ++i) {
            if (a.terms_[i].coeff != b.terms_[i].coeff || !(a.terms_[i].monomial == b.terms_[i].monomial)) {
                return false;
            }
        }
        return true;
    }
    friend bool operator!=(const ExactScalar &a, const ExactScalar &b) { return !(a == b); }

    ExactScalar operator-() const
    {
        ExactScalar r = *this;
        for (auto &t : r.terms_) {
            t.coeff = -t.coeff;
        }
        return r;
    }

    ExactScalar &operator+=(const ExactScalar &o)
    {
        std::vector<ScalarTerm> out;
        out.reserve(terms_.size() + o.terms_.size());
        std::size_t i = 0, j = 0;
        while (i < terms_.size() || j < o.terms_.size()) {
            int c = 0;
            if (i == terms_.size()) {
                c = 1;
            } else if (j == o.terms_.size()) {
                c = -1;
            } else {
                c = compare(terms_[i].monomial, o.terms_[j].monomial);
            }
            if (c < 0) {
                out.push_back(terms_[i++]);
            } else if (c > 0) {
                out.push_back(o.terms_[j++]);
            } else {
                Rational s = terms_[i].coeff + o.terms_[j].coeff;
                if (s != 0) {
                    out.push_back({terms_[i].monomial, s});
                }
                ++i;
                ++j;
            }
        }
        terms_ = std::move(out);
        return *this;
    }

    ExactScalar &operator-=(const ExactScalar &o) { return *this += -o; }

    ExactScalar &operator*=(const ExactScalar &o)
    {
        ExactScalar acc;
        for (const auto &a : terms_) {
            for (const auto &b : o.terms_) {
                auto [mult, m] = detail::multiply(a.monomial, b.monomial);
                ExactScalar t;
                t.terms_.push_back({m, a.coeff * b.coeff * mult});
                acc += t;
            }
        }
        *this = std::move(acc);
        return *this;
    }

    ExactScalar &operator/=(const ExactScalar &o)
    {
        *this *= o.reciprocal();
        return *this;
    }

    friend ExactScalar operator+(ExactScalar a, const ExactScalar &b) { return a += b; }
    friend ExactScalar operator-(ExactScalar a, const ExactScalar &b) { return a -= b; }
    friend ExactScalar operator*(ExactScalar a, const ExactScalar &b) { return a *= b; }
    friend ExactScalar operator/(ExactScalar a, const ExactScalar &b) { return a /= b; }

    ExactScalar reciprocal() const
    {
        if (is_zero()) {
            fail(ErrorCode::division_by_possibly_zero, "division by an exact zero");
        }
        if (!is_single_term()) {
            fail(ErrorCode::unsupported, "reciprocal of a multi-term constant: " + to_string());
        }
        return pow(-1);
    }

    ExactScalar pow(const Rational &r) const
    {
        if (r == 0) {
            return ExactScalar(1);
        }
        if (is_zero()) {
            if (r < 0) {
                fail(ErrorCode::division_by_possibly_zero, "zero to a negative power");
            }
            return ExactScalar();
        }
        if (!is_single_term()) {
            if (!is_integer(r) || r < 0) {
                fail(ErrorCode::unsupported, "non-integer power of a multi-term constant: " + to_string());
            }
            ExactScalar acc(1);
            for (long k = 0; k < r.get_num().get_si(); ++k) {
                acc *= *this;
            }
            return acc;
        }
        const auto &t = terms_[0];
        ExactScalar out = radical(t.coeff, r);
        for (const auto &f : t.monomial.factors) {
            out *= constant(f.constant.kind, f.constant.prime, f.exponent * r);
        }
        return out;
    }

    // exp(q + sum k_p log p) = e^q * prod p^k_p. Nothing else is representable.
    friend ExactScalar exp(const ExactScalar &x)
    {
        ExactScalar out(1);
        for (const auto &t : x.terms_) {
            if (t.monomial.empty()) {
                out *= exp_rational(t.coeff);
            } else if (t.monomial.factors.size() == 1 && t.monomial.factors[0].constant.kind == ConstantKind::log_prime &&
                       t.monomial.factors[0].exponent == 1) {
                out *= radical(Rational(t.monomial.factors[0].constant.prime), t.coeff);
            } else {
                fail(ErrorCode::unsupported, "exp of " + x.to_string() + " leaves the constant vocabulary");
            }
        }
        return out;
    }

    friend ExactScalar log(const ExactScalar &x)
    {
        if (!x.is_single_term() || x.terms_[0].coeff <= 0) {
            fail(ErrorCode::unsupported, "log of " + x.to_string() + " leaves the constant vocabulary");
        }
        const auto &t = x.terms_[0];
        ExactScalar out = log(t.coeff);
        for (const auto &f : t.monomial.factors) {
            switch (f.constant.kind) {
                case ConstantKind::e: out += ExactScalar(f.exponent); break;
                case ConstantKind::prime_root: out += ExactScalar(f.exponent) * log(Rational(f.constant.prime)); break;
                default: fail(ErrorCode::unsupported, "log of " + x.to_string() + " leaves the constant vocabulary");
            }
        }
        return out;
    }

    detail::Interval interval(mpfr_prec_t prec) const
    {
        detail::Interval acc = detail::Interval::point(Rational(0), prec);
        for (const auto &t : terms_) {
            auto v = detail::Interval::point(t.coeff, prec);
            for (const auto &f : t.monomial.factors) {
                v = v * detail::factor_interval(f, prec);
            }
            acc = acc + v;
        }
        return acc;
    }

    double to_double() const
    {
        if (is_rational()) {
            return rational_part().get_d();
        }
        return interval(96).midpoint();
    }

    ScalarParts parts() const
    {
        if (!is_single_term()) {
            fail(ErrorCode::invalid_argument, "parts of a multi-term scalar");
        }
        ScalarParts p;
        const auto &t = terms_[0];
        p.sign = t.coeff < 0 ? -1 : 1;
        p.num = abs(t.coeff.get_num());
        p.den = t.coeff.get_den();
        for (const auto &f : t.monomial.factors) {
            if (f.exponent > 0) {
                p.up.push_back(detail::factor_string(f.constant, f.exponent));
            } else {
                p.down.push_back(detail::factor_string(f.constant, -f.exponent));
            }
        }
        return p;
    }

    // "4/3*pi", "2/pi", "1 + log(2)".
    std::string to_string() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::string out;
        bool first = true;
        for (const auto &t : terms_) {
            ExactScalar single;
            single.terms_.push_back(t);
            auto p = single.parts();
            std::string body;
            const Rational mag = abs(t.coeff);
            if (p.up.empty()) {
                body = p.down.empty() ? mag.get_str() : p.num.get_str();
                if (!p.down.empty() && p.den != 1) {
                    p.down.insert(p.down.begin(), p.den.get_str());
                }
            } else {
                if (mag != 1) {
                    body = mag.get_str() + "*";
                }
                for (std::size_t i = 0; i < p.up.size(); ++i) {
                    body += (i ? "*" : "") + p.up[i];
                }
            }
            for (const auto &d : p.down) {
                body += "/" + d;
            }
            if (first) {
                out += (t.coeff < 0 ? "-" : "") + body;
            } else {
                out += (t.coeff < 0 ? " - " : " + ") + body;
            }
            first = false;
        }
        return out;
    }

private:
    void normalize()
    {
        std::vector<ScalarTerm> in = std::move(terms_);
        terms_.clear();
        for (auto &t : in) {
            ExactScalar s;
            if (t.coeff != 0) {
                s.terms_.push_back(t);
            }
            *this += s;
        }
    }

    std::vector<ScalarTerm> terms_;
};

inline std::ostream &operator<<(std::ostream &os, const ExactScalar &s)
{
    return os << s.to_string();
}

namespace detail
{

inline const std::vector<unsigned> &precision_schedule()
{
    static const std::vector<unsigned> digits{20, 40, 80, 160, 256};
    return digits;
}

} // namespace detail

// Sign of an exact scalar: exact when rational, otherwise interval evaluation
// at increasing precision. Throws precision_cap_exceeded if 256 digits do not
// separate the value from zero.
inline int scalar_sign(const ExactScalar &x)
{
    if (x.is_rational()) {
        return sgn(x.rational_part());
    }
    for (unsigned d : detail::precision_schedule()) {
        auto iv = x.interval(detail::digits_to_bits(d));
        if (iv.positive()) {
            return 1;
        }
        if (iv.negative()) {
            return -1;
        }
    }
    fail(ErrorCode::precision_cap_exceeded, "cannot decide the sign of " + x.to_string() + " within 256 digits");
}

// -1, 0 or 1.
inline int compare_scalars(const ExactScalar &a, const ExactScalar &b)
{
    return scalar_sign(a - b);
}

// Floor of an exact scalar. Irrational values are never integers, so interval
// refinement terminates unless the value is astronomically close to one.
inline BigInt scalar_floor(const ExactScalar &x)
{
    if (x.is_rational()) {
        return floor_of(x.rational_part());
    }
    for (unsigned d : detail::precision_schedule()) {
        auto [lo, hi] = x.interval(detail::digits_to_bits(d)).floors();
        if (lo == hi) {
            return lo;
        }
    }
    fail(ErrorCode::precision_cap_exceeded, "cannot decide the floor of " + x.to_string());
}

} // namespace hyperreal
