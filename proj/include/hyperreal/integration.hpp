#pragma once

// Integrals over hyperreal ranges. Infinite endpoints become -w and w and a
// declared singular endpoint s becomes s +- 1/w. Integrands in the elementary
// table are integrated exactly by antiderivative; anything else is an opaque
// sequence of Gauss-Kronrod values.

#include <algorithm>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <hyperreal/hyperreal.hpp>

namespace hyperreal
{

struct FuncExpr;
using FuncPtr = std::shared_ptr<const FuncExpr>;

enum class FuncKind { constant, power, exp, log, sin, cos, inv_quad, atan, sum, product, scale, custom };

struct FuncExpr
{
    FuncKind kind = FuncKind::constant;
    ExactScalar c;  // constant, scale
    Rational p = 1; // power, exp rate, trig frequency
    FuncPtr a, b;
    std::function<double(double)> eval; // custom
    std::string label;                  // custom

    double at(double x) const
    {
        switch (kind) {
            case FuncKind::constant: return c.to_double();
            case FuncKind::power: return std::pow(x, p.get_d());
            case FuncKind::exp: return std::exp(p.get_d() * x);
            case FuncKind::log: return std::log(x);
            case FuncKind::sin: return std::sin(p.get_d() * x);
            case FuncKind::cos: return std::cos(p.get_d() * x);
            case FuncKind::inv_quad: return 1.0 / (1.0 + x * x);
            case FuncKind::atan: return std::atan(x);
            case FuncKind::sum: return a->at(x) + b->at(x);
            case FuncKind::product: return a->at(x) * b->at(x);
            case FuncKind::scale: return c.to_double() * a->at(x);
            case FuncKind::custom: return eval(x);
        }
        return 0;
    }

    std::string to_string() const
    {
        auto mult = [](const Rational &q) {
            return q == 1 ? std::string("x") : detail::paren_if_compound(q.get_str()) + "*x";
        };
        switch (kind) {
            case FuncKind::constant: return c.to_string();
            case FuncKind::power:
                return p == 1 ? "x" : "x^" + (is_integer(p) && p > 0 ? p.get_str() : "(" + p.get_str() + ")");
            case FuncKind::exp: return "exp(" + mult(p) + ")";
            case FuncKind::log: return "log(x)";
            case FuncKind::sin: return "sin(" + mult(p) + ")";
            case FuncKind::cos: return "cos(" + mult(p) + ")";
            case FuncKind::inv_quad: return "1/(1 + x^2)";
            case FuncKind::atan: return "atan(x)";
            case FuncKind::sum: return "(" + a->to_string() + " + " + b->to_string() + ")";
            case FuncKind::product: return a->to_string() + "*" + b->to_string();
            case FuncKind::scale: return detail::paren_if_compound(c.to_string()) + "*" + a->to_string();
            case FuncKind::custom: return label;
        }
        return "?";
    }
};

namespace fn
{

inline FuncPtr make(FuncExpr e)
{
    return std::make_shared<const FuncExpr>(std::move(e));
}

inline FuncPtr constant(const ExactScalar &c)
{
    FuncExpr e;
    e.kind = FuncKind::constant;
    e.c = c;
    return make(std::move(e));
}

inline FuncPtr power(const Rational &p)
{
    if (p == 0) {
        return constant(ExactScalar(1));
    }
    FuncExpr e;
    e.kind = FuncKind::power;
    e.p = p;
    return make(std::move(e));
}

inline FuncPtr x()
{
    return power(1);
}

inline FuncPtr unary(FuncKind k, const Rational &p = 1)
{
    FuncExpr e;
    e.kind = k;
    e.p = p;
    return make(std::move(e));
}

inline FuncPtr exp(const Rational &c) { return unary(FuncKind::exp, c); }
inline FuncPtr log() { return unary(FuncKind::log); }
inline FuncPtr sin(const Rational &a = 1) { return unary(FuncKind::sin, a); }
inline FuncPtr cos(const Rational &a = 1) { return unary(FuncKind::cos, a); }
inline FuncPtr inv_quad() { return unary(FuncKind::inv_quad); }
inline FuncPtr atan() { return unary(FuncKind::atan); }

inline FuncPtr binary(FuncKind k, FuncPtr a, FuncPtr b)
{
    FuncExpr e;
    e.kind = k;
    e.a = std::move(a);
    e.b = std::move(b);
    return make(std::move(e));
}

inline FuncPtr add(FuncPtr a, FuncPtr b) { return binary(FuncKind::sum, std::move(a), std::move(b)); }
inline FuncPtr mul(FuncPtr a, FuncPtr b) { return binary(FuncKind::product, std::move(a), std::move(b)); }

inline FuncPtr scale(const ExactScalar &c, FuncPtr a)
{
    FuncExpr e;
    e.kind = FuncKind::scale;
    e.c = c;
    e.a = std::move(a);
    return make(std::move(e));
}

// Integrated numerically only.
inline FuncPtr custom(const std::string &label, std::function<double(double)> f)
{
    FuncExpr e;
    e.kind = FuncKind::custom;
    e.label = label;
    e.eval = std::move(f);
    return make(std::move(e));
}

} // namespace fn

// ---------------------------------------------------------------------------
// elementary basis: x^p, x^k e^(cx), x^k log|x|, x^k sin(ax), x^k cos(ax),
// x^k/(1+x^2), x^k atan(x), log(1+x^2)

enum class BasisKind { pow, xexp, xlog, xsin, xcos, xr, xatan, logq };

struct Basis
{
    BasisKind kind = BasisKind::pow;
    Rational k = 0; // power of x
    Rational c = 0; // exp rate or trig frequency

    friend bool operator<(const Basis &x, const Basis &y)
    {
        if (x.kind != y.kind) {
            return x.kind < y.kind;
        }
        if (x.k != y.k) {
            return x.k < y.k;
        }
        return x.c < y.c;
    }

    double at(double x) const
    {
        const double xk = std::pow(x, k.get_d());
        switch (kind) {
            case BasisKind::pow: return xk;
            case BasisKind::xexp: return xk * std::exp(c.get_d() * x);
            case BasisKind::xlog: return xk * std::log(std::abs(x));
            case BasisKind::xsin: return xk * std::sin(c.get_d() * x);
            case BasisKind::xcos: return xk * std::cos(c.get_d() * x);
            case BasisKind::xr: return xk / (1 + x * x);
            case BasisKind::xatan: return xk * std::atan(x);
            case BasisKind::logq: return std::log1p(x * x);
        }
        return 0;
    }

    // Analytic derivative, used to check antiderivatives.
    double derivative(double x) const
    {
        const double kd = k.get_d();
        const double xk = std::pow(x, kd);
        const double dxk = kd == 0 ? 0 : kd * std::pow(x, kd - 1);
        const double cd = c.get_d();
        switch (kind) {
            case BasisKind::pow: return dxk;
            case BasisKind::xexp: return (dxk + cd * xk) * std::exp(cd * x);
            case BasisKind::xlog: return dxk * std::log(std::abs(x)) + xk / x;
            case BasisKind::xsin: return dxk * std::sin(cd * x) + cd * xk * std::cos(cd * x);
            case BasisKind::xcos: return dxk * std::cos(cd * x) - cd * xk * std::sin(cd * x);
            case BasisKind::xr: return dxk / (1 + x * x) - 2 * x * xk / ((1 + x * x) * (1 + x * x));
            case BasisKind::xatan: return dxk * std::atan(x) + xk / (1 + x * x);
            case BasisKind::logq: return 2 * x / (1 + x * x);
        }
        return 0;
    }

    // Parity under x -> -x: 1 even, -1 odd, 0 neither.
    int parity() const
    {
        if (!is_integer(k)) {
            return 0;
        }
        const int pk = mpz_odd_p(k.get_num_mpz_t()) ? -1 : 1;
        switch (kind) {
            case BasisKind::pow: return pk;
            case BasisKind::xexp: return c == 0 ? pk : 0;
            case BasisKind::xlog: return pk;
            case BasisKind::xsin: return -pk;
            case BasisKind::xcos: return pk;
            case BasisKind::xr: return pk;
            case BasisKind::xatan: return -pk;
            case BasisKind::logq: return 1;
        }
        return 0;
    }

    bool singular_at_zero() const
    {
        switch (kind) {
            case BasisKind::pow:
            case BasisKind::xexp:
            case BasisKind::xsin:
            case BasisKind::xcos:
            case BasisKind::xr:
            case BasisKind::xatan: return k < 0;
            case BasisKind::xlog: return true;
            case BasisKind::logq: return false;
        }
        return false;
    }

    bool needs_positive() const { return !is_integer(k); }
};

using Combination = std::map<Basis, ExactScalar>;

namespace detail
{

inline void accumulate(Combination &acc, const Basis &b, const ExactScalar &c)
{
    if (c.is_zero()) {
        return;
    }
    Basis key = b;
    if (key.kind == BasisKind::xexp && key.c == 0) {
        key.kind = BasisKind::pow;
    }
    auto &slot = acc[key];
    slot += c;
    if (slot.is_zero()) {
        acc.erase(key);
    }
}

inline Basis pow_basis(const Rational &k)
{
    return Basis{BasisKind::pow, k, 0};
}

// x^m/(1+x^2) with m >= 2 reduces by x^m R = x^(m-2) - x^(m-2) R.
inline void add_xr(Combination &acc, const Rational &m, const ExactScalar &c)
{
    if (m >= 2 && is_integer(m)) {
        accumulate(acc, pow_basis(m - 2), c);
        add_xr(acc, m - 2, -c);
        return;
    }
    accumulate(acc, Basis{BasisKind::xr, m, 0}, c);
}

inline std::optional<Combination> multiply_basis(const Basis &x, const Basis &y, const ExactScalar &c)
{
    Combination out;
    if (x.kind == BasisKind::pow || y.kind == BasisKind::pow) {
        const Basis &p = x.kind == BasisKind::pow ? x : y;
        const Basis &o = x.kind == BasisKind::pow ? y : x;
        Basis r = o;
        r.k = o.k + p.k;
        if (o.kind == BasisKind::pow) {
            accumulate(out, r, c);
            return out;
        }
        if (!is_integer(p.k)) {
            return std::nullopt;
        }
        if (o.kind == BasisKind::xr) {
            add_xr(out, r.k, c);
            return out;
        }
        if (o.kind == BasisKind::xatan && r.k > 1) {
            return std::nullopt;
        }
        if (o.kind == BasisKind::logq) {
            return std::nullopt;
        }
        accumulate(out, r, c);
        return out;
    }
    if (x.kind == BasisKind::xexp && y.kind == BasisKind::xexp) {
        accumulate(out, Basis{BasisKind::xexp, x.k + y.k, x.c + y.c}, c);
        return out;
    }
    auto trig = [](const Basis &b) { return b.kind == BasisKind::xsin || b.kind == BasisKind::xcos; };
    if (trig(x) && trig(y)) {
        const Rational k = x.k + y.k;
        const ExactScalar h = c * ExactScalar(make_rational(1, 2));
        const Rational a = x.c, b = y.c;
        auto put = [&](BasisKind kind, const Rational &freq, const ExactScalar &coef) {
            if (freq == 0) {
                if (kind == BasisKind::xcos) {
                    accumulate(out, pow_basis(k), coef);
                }
                return;
            }
            if (freq < 0) {
                // sin(-t) = -sin t, cos(-t) = cos t
                accumulate(out, Basis{kind, k, -freq}, kind == BasisKind::xsin ? -coef : coef);
                return;
            }
            accumulate(out, Basis{kind, k, freq}, coef);
        };
        if (x.kind == BasisKind::xsin && y.kind == BasisKind::xsin) {
            put(BasisKind::xcos, a - b, h);
            put(BasisKind::xcos, a + b, -h);
        } else if (x.kind == BasisKind::xcos && y.kind == BasisKind::xcos) {
            put(BasisKind::xcos, a - b, h);
            put(BasisKind::xcos, a + b, h);
        } else {
            const Rational s = x.kind == BasisKind::xsin ? a : b;
            const Rational t = x.kind == BasisKind::xsin ? b : a;
            put(BasisKind::xsin, s + t, h);
            put(BasisKind::xsin, s - t, h);
        }
        return out;
    }
    return std::nullopt;
}

} // namespace detail

inline std::optional<Combination> combination(const FuncExpr &f)
{
    Combination out;
    switch (f.kind) {
        case FuncKind::constant: detail::accumulate(out, detail::pow_basis(0), f.c); return out;
        case FuncKind::power: detail::accumulate(out, detail::pow_basis(f.p), ExactScalar(1)); return out;
        case FuncKind::exp: detail::accumulate(out, Basis{BasisKind::xexp, 0, f.p}, ExactScalar(1)); return out;
        case FuncKind::log: detail::accumulate(out, Basis{BasisKind::xlog, 0, 0}, ExactScalar(1)); return out;
        case FuncKind::sin:
            if (f.p < 0) {
                detail::accumulate(out, Basis{BasisKind::xsin, 0, -f.p}, ExactScalar(-1));
            } else if (f.p != 0) {
                detail::accumulate(out, Basis{BasisKind::xsin, 0, f.p}, ExactScalar(1));
            }
            return out;
        case FuncKind::cos:
            detail::accumulate(out, f.p == 0 ? detail::pow_basis(0) : Basis{BasisKind::xcos, 0, abs(f.p)},
                               ExactScalar(1));
            return out;
        case FuncKind::inv_quad: detail::accumulate(out, Basis{BasisKind::xr, 0, 0}, ExactScalar(1)); return out;
        case FuncKind::atan: detail::accumulate(out, Basis{BasisKind::xatan, 0, 0}, ExactScalar(1)); return out;
        case FuncKind::sum: {
            auto x = combination(*f.a);
            auto y = combination(*f.b);
            if (!x || !y) {
                return std::nullopt;
            }
            for (const auto &[b, c] : *y) {
                detail::accumulate(*x, b, c);
            }
            return x;
        }
        case FuncKind::scale: {
            auto x = combination(*f.a);
            if (!x) {
                return std::nullopt;
            }
            for (const auto &[b, c] : *x) {
                detail::accumulate(out, b, c * f.c);
            }
            return out;
        }
        case FuncKind::custom: return std::nullopt;
        case FuncKind::product: {
            auto x = combination(*f.a);
            auto y = combination(*f.b);
            if (!x || !y) {
                return std::nullopt;
            }
            for (const auto &[bx, cx] : *x) {
                for (const auto &[by, cy] : *y) {
                    auto m = detail::multiply_basis(bx, by, cx * cy);
                    if (!m) {
                        return std::nullopt;
                    }
                    for (const auto &[b, c] : *m) {
                        detail::accumulate(out, b, c);
                    }
                }
            }
            return out;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// antiderivatives

namespace detail
{

inline void antiderivative_of(const Basis &b, const ExactScalar &c, Combination &out)
{
    const Rational k = b.k;
    switch (b.kind) {
        case BasisKind::pow:
            if (k == -1) {
                accumulate(out, Basis{BasisKind::xlog, 0, 0}, c);
            } else {
                accumulate(out, pow_basis(k + 1), c * ExactScalar(Rational(1 / (k + 1))));
            }
            return;
        case BasisKind::xexp: {
            if (!is_integer(k) || k < 0) {
                fail(ErrorCode::unsupported, "no elementary antiderivative for x^k e^(cx) with k = " + k.get_str());
            }
            // e^(cx) sum_j (-1)^j k!/(k-j)! x^(k-j) / c^(j+1)
            const long kk = k.get_num().get_si();
            Rational fall = 1;
            for (long j = 0; j <= kk; ++j) {
                const Rational coef = (j % 2 ? -fall : fall) / rational_pow(b.c, j + 1);
                accumulate(out, Basis{BasisKind::xexp, Rational(kk - j), b.c}, c * ExactScalar(coef));
                fall *= Rational(kk - j);
            }
            return;
        }
        case BasisKind::xlog:
            if (k == -1) {
                fail(ErrorCode::unsupported, "log(x)/x has no antiderivative in the table");
            }
            accumulate(out, Basis{BasisKind::xlog, k + 1, 0}, c * ExactScalar(Rational(1 / (k + 1))));
            accumulate(out, pow_basis(k + 1), -c * ExactScalar(Rational(1 / ((k + 1) * (k + 1)))));
            return;
        case BasisKind::xsin:
        case BasisKind::xcos: {
            if (!is_integer(k) || k < 0) {
                fail(ErrorCode::unsupported, "no elementary antiderivative for x^k sin/cos with k = " + k.get_str());
            }
            const Rational a = b.c;
            const bool is_sin = b.kind == BasisKind::xsin;
            // int x^k sin = -x^k cos/a + (k/a) int x^(k-1) cos
            // int x^k cos =  x^k sin/a - (k/a) int x^(k-1) sin
            accumulate(out, Basis{is_sin ? BasisKind::xcos : BasisKind::xsin, k, a},
                       c * ExactScalar(Rational((is_sin ? -1 : 1) / a)));
            if (k > 0) {
                antiderivative_of(Basis{is_sin ? BasisKind::xcos : BasisKind::xsin, k - 1, a},
                                  c * ExactScalar(Rational((is_sin ? 1 : -1) * k / a)), out);
            }
            return;
        }
        case BasisKind::xr:
            if (k == 0) {
                accumulate(out, Basis{BasisKind::xatan, 0, 0}, c);
            } else if (k == 1) {
                accumulate(out, Basis{BasisKind::logq, 0, 0}, c * ExactScalar(make_rational(1, 2)));
            } else {
                fail(ErrorCode::unsupported, "x^k/(1+x^2) with k = " + k.get_str());
            }
            return;
        case BasisKind::xatan:
            if (k != 0) {
                fail(ErrorCode::unsupported, "x^k atan(x) with k = " + k.get_str());
            }
            accumulate(out, Basis{BasisKind::xatan, 1, 0}, c);
            accumulate(out, Basis{BasisKind::logq, 0, 0}, -c * ExactScalar(make_rational(1, 2)));
            return;
        case BasisKind::logq:
            // x log(1+x^2) - 2x + 2 atan x
            fail(ErrorCode::unsupported, "log(1+x^2) integrands are not in the table");
    }
}

} // namespace detail

inline Combination antiderivative(const Combination &f)
{
    Combination out;
    for (const auto &[b, c] : f) {
        detail::antiderivative_of(b, c, out);
    }
    return out;
}

inline double evaluate(const Combination &f, double x)
{
    double s = 0;
    for (const auto &[b, c] : f) {
        s += c.to_double() * b.at(x);
    }
    return s;
}

inline double evaluate_derivative(const Combination &f, double x)
{
    double s = 0;
    for (const auto &[b, c] : f) {
        s += c.to_double() * b.derivative(x);
    }
    return s;
}

// F' = f at sample points of the integration range.
inline bool check_antiderivative(const Combination &F, const Combination &f, double lo, double hi)
{
    for (int i = 1; i <= 7; ++i) {
        const double x = lo + (hi - lo) * i / 8.0;
        if (x == 0) {
            continue;
        }
        const double want = evaluate(f, x);
        const double got = evaluate_derivative(F, x);
        if (std::abs(want - got) > 1e-9 * std::max(1.0, std::abs(want))) {
            return false;
        }
    }
    return true;
}

namespace detail
{

inline Symbolic basis_at(const Basis &b, const Symbolic &X)
{
    Symbolic xk(1);
    if (b.k != 0) {
        if (X.is_zero()) {
            if (b.k < 0) {
                fail(ErrorCode::undeclared_singularity, "basis singular at 0");
            }
            if (b.kind != BasisKind::xlog) {
                return Symbolic();
            }
            return Symbolic(); // x^k log|x| -> 0
        }
        xk = sym_pow(X, b.k);
    }
    switch (b.kind) {
        case BasisKind::pow: return xk;
        case BasisKind::xexp: return xk * sym_exp(Symbolic(b.c) * X);
        case BasisKind::xlog: {
            auto s = sign_verdict(X, default_horizon);
            return xk * sym_log(s.lt ? -X : X);
        }
        case BasisKind::xsin: return xk * sym_sin(Symbolic(b.c) * X);
        case BasisKind::xcos: return xk * sym_cos(Symbolic(b.c) * X);
        case BasisKind::xr: return xk / (Symbolic(1) + X * X);
        case BasisKind::xatan: return xk * sym_atan(X);
        case BasisKind::logq: {
            Symbolic q = Symbolic(1) + X * X;
            if (q.is_rational_constant()) {
                return Symbolic(ExactScalar::log(q.constant_value().rational_part()));
            }
            return sym_log(q);
        }
    }
    return Symbolic();
}

inline Symbolic combination_at(const Combination &F, const Symbolic &X)
{
    Symbolic acc;
    for (const auto &[b, c] : F) {
        acc += Symbolic(c) * basis_at(b, X);
    }
    return acc;
}

} // namespace detail

// ---------------------------------------------------------------------------
// bounds and integrals

struct IntegralBound
{
    enum class Kind { finite, plus_infinity, minus_infinity } kind = Kind::finite;
    Rational value = 0;

    static IntegralBound at(const Rational &v) { return {Kind::finite, v}; }
    static IntegralBound plus_inf() { return {Kind::plus_infinity, 0}; }
    static IntegralBound minus_inf() { return {Kind::minus_infinity, 0}; }

    bool finite() const { return kind == Kind::finite; }

    std::string to_string() const
    {
        switch (kind) {
            case Kind::finite: return value.get_str();
            case Kind::plus_infinity: return "inf";
            case Kind::minus_infinity: return "-inf";
        }
        return "?";
    }

    // Value at index n; singular endpoints move inward by 1/n.
    double at(std::uint64_t n, int inward, bool singular) const
    {
        switch (kind) {
            case Kind::finite: return value.get_d() + (singular ? inward / double(n) : 0.0);
            case Kind::plus_infinity: return double(n);
            case Kind::minus_infinity: return -double(n);
        }
        return 0;
    }

    Symbolic symbolic(int inward, bool singular) const
    {
        switch (kind) {
            case Kind::finite: {
                Symbolic v(value);
                if (singular) {
                    v += Symbolic::monomial(ExactScalar(inward), GrowthMonomial::power(ExactScalar(-1)));
                }
                return v;
            }
            case Kind::plus_infinity: return Symbolic::omega();
            case Kind::minus_infinity: return -Symbolic::omega();
        }
        return Symbolic();
    }
};

struct IntegralReport
{
    Hyperreal value;
    bool closed = false;
    bool odd_symmetry = false;
    std::string antiderivative;
};

namespace detail
{

inline std::string combination_string(const Combination &F)
{
    std::string s;
    for (const auto &[b, c] : F) {
        std::string t;
        const std::string xk = b.k == 0 ? "" : (b.k == 1 ? "x" : "x^" + detail::paren_if_compound(b.k.get_str()));
        auto with = [&](const std::string &f) { return xk.empty() ? f : (f.empty() ? xk : xk + "*" + f); };
        switch (b.kind) {
            case BasisKind::pow: t = xk.empty() ? "1" : xk; break;
            case BasisKind::xexp: t = with("exp(" + (b.c == 1 ? std::string("x") : b.c.get_str() + "*x") + ")"); break;
            case BasisKind::xlog: t = with("log|x|"); break;
            case BasisKind::xsin: t = with("sin(" + (b.c == 1 ? std::string("x") : b.c.get_str() + "*x") + ")"); break;
            case BasisKind::xcos: t = with("cos(" + (b.c == 1 ? std::string("x") : b.c.get_str() + "*x") + ")"); break;
            case BasisKind::xr: t = with("1/(1 + x^2)"); break;
            case BasisKind::xatan: t = with("atan(x)"); break;
            case BasisKind::logq: t = "log(1 + x^2)"; break;
        }
        const bool neg = scalar_sign(c) < 0;
        const ExactScalar m = neg ? -c : c;
        const std::string body = m == ExactScalar(1) ? t : detail::paren_if_compound(m.to_string()) + "*" + t;
        s += s.empty() ? (neg ? "-" + body : body) : (neg ? " - " : " + ") + body;
    }
    return s.empty() ? "0" : s;
}

inline double quadrature(const FuncExpr &f, double a, double b)
{
    if (a == b) {
        return 0;
    }
    auto g = [&f](double x) { return f.at(x); };
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 15, 1e-12, &err);
}

} // namespace detail

// int_a^b f(x) dx. singular lists the points where the integrand blows up;
// they must include every singular endpoint and interior point.
inline IntegralReport integral_report(const FuncPtr &f, const IntegralBound &a, const IntegralBound &b,
                                      const std::vector<Rational> &singular = {})
{
    auto is_declared = [&](const Rational &s) {
        return std::find(singular.begin(), singular.end(), s) != singular.end();
    };
    const bool sa = a.finite() && is_declared(a.value);
    const bool sb = b.finite() && is_declared(b.value);
    const std::string label = "int(x=" + a.to_string() + ".." + b.to_string() + ", " + f->to_string() + ")";

    auto comb = combination(*f);
    bool zero_singular = false;
    bool positive_only = false;
    if (comb) {
        for (const auto &[bs, c] : *comb) {
            zero_singular = zero_singular || bs.singular_at_zero();
            positive_only = positive_only || bs.needs_positive() || bs.kind == BasisKind::xlog;
        }
    }
    // domain and singularity audit
    const bool contains_zero = (a.kind == IntegralBound::Kind::minus_infinity || (a.finite() && a.value <= 0)) &&
                               (b.kind == IntegralBound::Kind::plus_infinity || (b.finite() && b.value >= 0));
    if (positive_only && (a.kind == IntegralBound::Kind::minus_infinity || (a.finite() && a.value < 0))) {
        fail(ErrorCode::domain_error, f->to_string() + " is only defined for x > 0");
    }
    if (zero_singular && contains_zero && !is_declared(0)) {
        fail(ErrorCode::undeclared_singularity, f->to_string() + " is singular at 0; declare singular=0");
    }
    for (const auto &s : singular) {
        if (comb && (s != 0 || !zero_singular)) {
            fail(ErrorCode::invalid_argument, "declared singularity " + s.get_str() + " is not a singular point of " +
                                                  f->to_string());
        }
    }

    // split at a declared interior point
    if (zero_singular && contains_zero && !(a.finite() && a.value == 0) && !(b.finite() && b.value == 0)) {
        auto left = integral_report(f, a, IntegralBound::at(0), singular);
        auto right = integral_report(f, IntegralBound::at(0), b, singular);
        IntegralReport r;
        r.value = left.value + right.value;
        r.closed = left.closed && right.closed;
        r.antiderivative = left.antiderivative;
        return r;
    }

    const Symbolic lo = a.symbolic(1, sa);
    const Symbolic hi = b.symbolic(-1, sb);
    auto numeric = [f, a, b, sa, sb](const BigInt &n) -> Element {
        const auto k = n.get_ui();
        return detail::quadrature(*f, a.at(k, 1, sa), b.at(k, -1, sb));
    };

    IntegralReport r;
    // odd integrand over a symmetric range
    if (comb && !comb->empty() && lo == -hi) {
        bool odd = true;
        for (const auto &[bs, c] : *comb) {
            odd = odd && bs.parity() == -1;
        }
        if (odd) {
            r.value = Hyperreal(0);
            r.closed = true;
            r.odd_symmetry = true;
            r.antiderivative = "odd integrand";
            return r;
        }
    }
    if (comb) {
        try {
            Combination F = antiderivative(*comb);
            const double x0 = a.finite() ? a.value.get_d() : -8.0;
            const double x1 = b.finite() ? b.value.get_d() : 8.0;
            const double c0 = (x0 == 0 && sa) ? 0.5 : x0;
            if (!check_antiderivative(F, *comb, c0, x1 == 0 ? -0.5 : x1)) {
                fail(ErrorCode::invalid_argument, "antiderivative check failed for " + f->to_string());
            }
            Symbolic value = detail::combination_at(F, hi) - detail::combination_at(F, lo);
            r.value = Hyperreal(value);
            r.closed = true;
            r.antiderivative = detail::combination_string(F);
            return r;
        } catch (const Error &e) {
            if (e.code() != ErrorCode::unsupported) {
                throw;
            }
        }
    }
    r.value = Hyperreal::from_sequence(label, numeric);
    return r;
}

inline Hyperreal integral(const FuncPtr &f, const IntegralBound &a, const IntegralBound &b,
                          const std::vector<Rational> &singular = {})
{
    return integral_report(f, a, b, singular).value;
}

struct FtcAudit
{
    std::uint64_t checked = 0;
    double worst_relative = 0;
    std::uint64_t worst_index = 0;
    bool passed = true;
};

// Compares the closed form's elements with adaptive quadrature on [a(n), b(n)].
inline FtcAudit ftc_audit(const FuncPtr &f, const IntegralBound &a, const IntegralBound &b,
                          const std::vector<Rational> &singular, std::uint64_t up_to, double tolerance = 1e-6)
{
    auto rep = integral_report(f, a, b, singular);
    const bool sa = a.finite() && std::find(singular.begin(), singular.end(), a.value) != singular.end();
    const bool sb = b.finite() && std::find(singular.begin(), singular.end(), b.value) != singular.end();
    FtcAudit out;
    for (std::uint64_t n = 1; n <= up_to; ++n) {
        const double lo = a.at(n, 1, sa);
        const double hi = b.at(n, -1, sb);
        double q = 0;
        if (lo < 0 && hi > 0 && !singular.empty()) {
            q = detail::quadrature(*f, lo, -1.0 / n) + detail::quadrature(*f, 1.0 / n, hi);
        } else {
            q = detail::quadrature(*f, lo, hi);
        }
        const double v = rep.value.element_double_at(n);
        const double rel = std::abs(v - q) / std::max(1.0, std::abs(q));
        if (rel > out.worst_relative) {
            out.worst_relative = rel;
            out.worst_index = n;
        }
        out.passed = out.passed && rel <= tolerance;
        ++out.checked;
    }
    return out;
}

} // namespace hyperreal
