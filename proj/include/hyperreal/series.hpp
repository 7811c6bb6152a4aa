#pragma once

// Summands f(i) over the integers, and their normal form sum c * i^k * r^i.

#include <map>

#include <hyperreal/hyperreal.hpp>
#include <hyperreal/integer_set.hpp>

namespace hyperreal
{

struct SeriesExpr;
using SeriesPtr = std::shared_ptr<const SeriesExpr>;

enum class SeriesKind { constant, power, geometric, exp_power, product, sum, scale, indicator, generator, overlay, shift };

struct SeriesExpr
{
    SeriesKind kind = SeriesKind::constant;
    ExactScalar c;          // constant, scale factor, exp_power rate
    unsigned long k = 0;    // power
    Rational r = 1;         // geometric ratio
    long offset = 0;        // shift
    SeriesPtr a, b;         // operands
    SetPtr set;             // indicator
    Generator gen;          // opaque summand
    std::string label;      // generator text
    std::map<BigInt, Element> overrides; // overlay: f(i) replaced at finitely many i

    Element at(const BigInt &i) const
    {
        switch (kind) {
            case SeriesKind::constant:
                if (c.is_rational()) {
                    return c.rational_part();
                }
                return c.to_double();
            case SeriesKind::power: {
                BigInt v;
                mpz_pow_ui(v.get_mpz_t(), i.get_mpz_t(), k);
                return Rational(v);
            }
            case SeriesKind::geometric: {
                if (!i.fits_slong_p()) {
                    fail(ErrorCode::unsupported, "geometric term index too large");
                }
                return rational_pow(r, i.get_si());
            }
            case SeriesKind::exp_power: return std::exp(c.to_double() * i.get_d());
            case SeriesKind::product: return a->at(i) * b->at(i);
            case SeriesKind::sum: return a->at(i) + b->at(i);
            case SeriesKind::scale: {
                Element f = c.is_rational() ? Element(c.rational_part()) : Element(c.to_double());
                return f * a->at(i);
            }
            case SeriesKind::indicator: return set->contains(i) ? a->at(i) : Element(Rational(0));
            case SeriesKind::generator: return gen(i);
            case SeriesKind::overlay: {
                auto it = overrides.find(i);
                return it != overrides.end() ? it->second : a->at(i);
            }
            case SeriesKind::shift: return a->at(i + offset);
        }
        return Rational(0);
    }

    std::string to_string() const
    {
        switch (kind) {
            case SeriesKind::constant: return c.to_string();
            case SeriesKind::power: return k == 1 ? "i" : "i^" + std::to_string(k);
            case SeriesKind::geometric:
                if (r.get_num() == 1 && r > 0) {
                    return r.get_den().get_str() + "^-i";
                }
                return (r < 0 || !is_integer(r) ? "(" + r.get_str() + ")" : r.get_str()) + "^i";
            case SeriesKind::exp_power:
                return c == ExactScalar(1) ? "e^i" : "e^(" + detail::paren_if_compound(c.to_string()) + "*i)";
            case SeriesKind::product: return a->to_string() + "*" + b->to_string();
            case SeriesKind::sum: return "(" + a->to_string() + " + " + b->to_string() + ")";
            case SeriesKind::scale: return detail::paren_if_compound(c.to_string()) + "*" + a->to_string();
            case SeriesKind::indicator: return "ind(" + set->to_string() + ")*" + a->to_string();
            case SeriesKind::generator: return label;
            case SeriesKind::overlay: {
                std::string s = a->to_string() + " with {";
                bool first = true;
                for (const auto &[i, v] : overrides) {
                    s += (first ? "" : ", ") + i.get_str() + ":" + element_string(v);
                    first = false;
                }
                return s + "}";
            }
            case SeriesKind::shift: return "shift(" + a->to_string() + ", " + std::to_string(offset) + ")";
        }
        return "?";
    }
};

namespace series
{

inline SeriesPtr make(SeriesExpr e)
{
    return std::make_shared<const SeriesExpr>(std::move(e));
}

inline SeriesPtr constant(const ExactScalar &c)
{
    SeriesExpr e;
    e.kind = SeriesKind::constant;
    e.c = c;
    return make(std::move(e));
}

inline SeriesPtr power(unsigned long k)
{
    if (k == 0) {
        return constant(ExactScalar(1));
    }
    SeriesExpr e;
    e.kind = SeriesKind::power;
    e.k = k;
    return make(std::move(e));
}

inline SeriesPtr geometric(const Rational &r)
{
    if (r == 0) {
        fail(ErrorCode::invalid_argument, "geometric ratio must be non-zero");
    }
    SeriesExpr e;
    e.kind = SeriesKind::geometric;
    e.r = r;
    return make(std::move(e));
}

inline SeriesPtr exp_power(const ExactScalar &c)
{
    SeriesExpr e;
    e.kind = SeriesKind::exp_power;
    e.c = c;
    return make(std::move(e));
}

inline SeriesPtr product(SeriesPtr a, SeriesPtr b)
{
    SeriesExpr e;
    e.kind = SeriesKind::product;
    e.a = std::move(a);
    e.b = std::move(b);
    return make(std::move(e));
}

inline SeriesPtr add(SeriesPtr a, SeriesPtr b)
{
    SeriesExpr e;
    e.kind = SeriesKind::sum;
    e.a = std::move(a);
    e.b = std::move(b);
    return make(std::move(e));
}

inline SeriesPtr scale(const ExactScalar &c, SeriesPtr a)
{
    SeriesExpr e;
    e.kind = SeriesKind::scale;
    e.c = c;
    e.a = std::move(a);
    return make(std::move(e));
}

inline SeriesPtr indicator(SetPtr s, SeriesPtr a = constant(ExactScalar(1)))
{
    SeriesExpr e;
    e.kind = SeriesKind::indicator;
    e.set = std::move(s);
    e.a = std::move(a);
    return make(std::move(e));
}

inline SeriesPtr generator(const std::string &label, Generator g)
{
    SeriesExpr e;
    e.kind = SeriesKind::generator;
    e.label = label;
    e.gen = std::move(g);
    return make(std::move(e));
}

inline SeriesPtr overlay(SeriesPtr a, std::map<BigInt, Element> overrides)
{
    SeriesExpr e;
    e.kind = SeriesKind::overlay;
    e.a = std::move(a);
    e.overrides = std::move(overrides);
    return make(std::move(e));
}

inline SeriesPtr shift(SeriesPtr a, long k)
{
    SeriesExpr e;
    e.kind = SeriesKind::shift;
    e.a = std::move(a);
    e.offset = k;
    return make(std::move(e));
}

} // namespace series

// sum over terms c * i^k * r^i
struct NormalForm
{
    struct Key
    {
        Rational r;
        unsigned long k;
        friend bool operator<(const Key &x, const Key &y) { return x.r != y.r ? x.r < y.r : x.k < y.k; }
    };
    std::map<Key, ExactScalar> terms;

    void add(const Rational &r, unsigned long k, const ExactScalar &c)
    {
        auto &slot = terms[{r, k}];
        slot += c;
        if (slot.is_zero()) {
            terms.erase({r, k});
        }
    }

    NormalForm &operator+=(const NormalForm &o)
    {
        for (const auto &[key, c] : o.terms) {
            add(key.r, key.k, c);
        }
        return *this;
    }

    NormalForm scaled(const ExactScalar &s) const
    {
        NormalForm out;
        for (const auto &[key, c] : terms) {
            out.add(key.r, key.k, c * s);
        }
        return out;
    }

    NormalForm operator*(const NormalForm &o) const
    {
        NormalForm out;
        for (const auto &[x, c] : terms) {
            for (const auto &[y, d] : o.terms) {
                out.add(x.r * y.r, x.k + y.k, c * d);
            }
        }
        return out;
    }

    // f(s + L j) as a normal form in j.
    NormalForm substitute(const BigInt &s, const BigInt &L) const
    {
        NormalForm out;
        for (const auto &[key, c] : terms) {
            const ExactScalar rs(rational_pow(key.r, s.get_si()));
            const Rational rL = rational_pow(key.r, L.get_si());
            for (unsigned long j = 0; j <= key.k; ++j) {
                BigInt binom, sp, Lp;
                mpz_bin_uiui(binom.get_mpz_t(), key.k, j);
                mpz_pow_ui(Lp.get_mpz_t(), L.get_mpz_t(), j);
                BigInt sabs = s;
                mpz_pow_ui(sp.get_mpz_t(), sabs.get_mpz_t(), key.k - j);
                const Rational coef = Rational(binom * Lp * sp);
                if (coef != 0) {
                    out.add(rL, j, c * rs * ExactScalar(coef));
                }
            }
        }
        return out;
    }

    std::string to_string() const
    {
        std::string s;
        for (const auto &[key, c] : terms) {
            s += (s.empty() ? "" : " + ") + c.to_string() + "*i^" + std::to_string(key.k) + "*(" + key.r.get_str() +
                 ")^i";
        }
        return s.empty() ? "0" : s;
    }
};

inline std::optional<NormalForm> normal_form(const SeriesExpr &e)
{
    NormalForm out;
    switch (e.kind) {
        case SeriesKind::constant: out.add(1, 0, e.c); return out;
        case SeriesKind::power: out.add(1, e.k, ExactScalar(1)); return out;
        case SeriesKind::geometric: out.add(e.r, 0, ExactScalar(1)); return out;
        case SeriesKind::product: {
            auto x = normal_form(*e.a);
            auto y = normal_form(*e.b);
            if (!x || !y) {
                return std::nullopt;
            }
            return *x * *y;
        }
        case SeriesKind::sum: {
            auto x = normal_form(*e.a);
            auto y = normal_form(*e.b);
            if (!x || !y) {
                return std::nullopt;
            }
            *x += *y;
            return x;
        }
        case SeriesKind::scale: {
            auto x = normal_form(*e.a);
            if (!x) {
                return std::nullopt;
            }
            return x->scaled(e.c);
        }
        case SeriesKind::shift: {
            auto x = normal_form(*e.a);
            if (!x) {
                return std::nullopt;
            }
            return x->substitute(BigInt(e.offset), 1);
        }
        default: return std::nullopt;
    }
}

} // namespace hyperreal
