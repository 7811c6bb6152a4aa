#pragma once

// Symbolic hyperreals: finite sums of coeff * growth monomial * atom, where an
// atom is an indeterminate factor such as floor(w/2) or cos(w) that carries an
// enclosure by atom-free bounds.

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <hyperreal/growth.hpp>
#include <hyperreal/truth.hpp>

namespace hyperreal
{

struct Atom;
using AtomPtr = std::shared_ptr<const Atom>;

struct Term
{
    ExactScalar coeff;
    GrowthMonomial scale;
    AtomPtr atom;
};

enum class Classification { infinitesimal, finite, infinite, lesser_infinite, unknown };

inline std::string classification_name(Classification c)
{
    switch (c) {
        case Classification::infinitesimal: return "infinitesimal";
        case Classification::finite: return "finite";
        case Classification::infinite: return "infinite";
        case Classification::lesser_infinite: return "lesser-infinite";
        case Classification::unknown: return "unknown";
    }
    return "unknown";
}

class Symbolic;
struct Bounds;
struct PeriodicExpansion;

OrderVerdict sign_verdict(const Symbolic &x, std::uint64_t horizon = default_horizon);

class Symbolic
{
public:
    Symbolic() = default;
    Symbolic(long v) : Symbolic(ExactScalar(v)) {}
    Symbolic(int v) : Symbolic(ExactScalar(v)) {}
    Symbolic(const Rational &q) : Symbolic(ExactScalar(q)) {}
    Symbolic(const ExactScalar &s)
    {
        if (!s.is_zero()) {
            terms_.push_back({s, GrowthMonomial::unit(), nullptr});
        }
    }

    static Symbolic omega() { return monomial(ExactScalar(1), GrowthMonomial::omega()); }

    static Symbolic monomial(const ExactScalar &coeff, const GrowthMonomial &g)
    {
        Symbolic r;
        if (!coeff.is_zero()) {
            r.terms_.push_back({coeff, g, nullptr});
        }
        return r;
    }

    static Symbolic of_atom(AtomPtr a, const ExactScalar &coeff = ExactScalar(1), const GrowthMonomial &g = {})
    {
        Symbolic r;
        if (!coeff.is_zero()) {
            r.terms_.push_back({coeff, g, std::move(a)});
        }
        return r;
    }

    const std::vector<Term> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool has_atoms() const
    {
        return std::any_of(terms_.begin(), terms_.end(), [](const Term &t) { return t.atom != nullptr; });
    }

    bool is_single_term() const { return terms_.size() == 1; }

    // A real constant: atom-free and unit scale only.
    bool is_constant() const
    {
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const Term &t) { return !t.atom && t.scale.is_unit(); });
    }

    ExactScalar constant_value() const
    {
        if (!is_constant()) {
            fail(ErrorCode::invalid_argument, "not a real constant: " + to_string());
        }
        return terms_.empty() ? ExactScalar() : terms_[0].coeff;
    }

    bool is_rational_constant() const { return is_constant() && constant_value().is_rational(); }

    // Coefficient of an atom-free monomial (zero when absent).
    ExactScalar coefficient(const GrowthMonomial &g) const
    {
        for (const auto &t : terms_) {
            if (!t.atom && t.scale == g) {
                return t.coeff;
            }
        }
        return ExactScalar();
    }

    Symbolic atom_free_part() const
    {
        Symbolic r;
        for (const auto &t : terms_) {
            if (!t.atom) {
                r.terms_.push_back(t);
            }
        }
        return r;
    }

    Symbolic leading() const
    {
        Symbolic r;
        if (!terms_.empty()) {
            r.terms_.push_back(terms_[0]);
        }
        return r;
    }

    Symbolic operator-() const
    {
        Symbolic r = *this;
        for (auto &t : r.terms_) {
            t.coeff = -t.coeff;
        }
        return r;
    }

    Symbolic &operator+=(const Symbolic &o);
    Symbolic &operator-=(const Symbolic &o) { return *this += -o; }
    Symbolic &operator*=(const Symbolic &o);
    Symbolic &operator/=(const Symbolic &o);

    friend Symbolic operator+(Symbolic a, const Symbolic &b) { return a += b; }
    friend Symbolic operator-(Symbolic a, const Symbolic &b) { return a -= b; }
    friend Symbolic operator*(Symbolic a, const Symbolic &b) { return a *= b; }
    friend Symbolic operator/(Symbolic a, const Symbolic &b) { return a /= b; }

    friend bool operator==(const Symbolic &a, const Symbolic &b);
    friend bool operator!=(const Symbolic &a, const Symbolic &b) { return !(a == b); }

    std::optional<ExactScalar> exact_at(const BigInt &n) const;
    detail::Interval interval_at(const BigInt &n, mpfr_prec_t prec) const;
    double double_at(const BigInt &n) const;

    std::string to_string(const std::string &w = "w") const;
    std::string compact(const std::string &w = "w") const;
    std::string key() const { return to_string("w"); }

    // Inserts a term keeping the decreasing order; equal keys combine.
    void add_term(const Term &t);

private:
    std::vector<Term> terms_;
};

struct Bounds
{
    Symbolic lo;
    Symbolic hi;
    bool lo_open = false;
    bool hi_open = false;
    BigInt valid_from = 1; // bounds hold at every index n >= valid_from
};

enum class AtomKind { floor, ceil, cos, sin, atan, pow_floor, reciprocal, product, constant, opaque };

inline std::string atom_kind_name(AtomKind k)
{
    switch (k) {
        case AtomKind::floor: return "floor";
        case AtomKind::ceil: return "ceil";
        case AtomKind::cos: return "cos";
        case AtomKind::sin: return "sin";
        case AtomKind::atan: return "atan";
        case AtomKind::pow_floor: return "pow-floor";
        case AtomKind::reciprocal: return "reciprocal";
        case AtomKind::product: return "product";
        case AtomKind::constant: return "constant";
        case AtomKind::opaque: return "opaque";
    }
    return "?";
}

struct Atom
{
    AtomKind kind = AtomKind::opaque;
    Symbolic arg;
    Rational base = 1;
    std::vector<AtomPtr> factors;
    std::string name;
    std::function<detail::Interval(mpfr_prec_t)> value;
    std::function<Rational(const BigInt &)> eval;
    std::optional<Bounds> declared;
    std::string key;
};

struct PeriodicExpansion
{
    unsigned long modulus = 1;
    std::vector<Symbolic> branches;
};

// ---------------------------------------------------------------------------
// term ordering

namespace detail
{

inline const std::string &atom_key(const AtomPtr &a)
{
    static const std::string none;
    return a ? a->key : none;
}

// Negative when a sorts before b (larger scale first, atom-free before atoms).
inline int term_order(const Term &a, const Term &b)
{
    if (int s = compare_growth(a.scale, b.scale)) {
        return -s;
    }
    const auto &ka = atom_key(a.atom);
    const auto &kb = atom_key(b.atom);
    if (ka == kb) {
        return 0;
    }
    return ka < kb ? -1 : 1;
}

inline bool same_slot(const Term &a, const Term &b)
{
    return a.scale == b.scale && atom_key(a.atom) == atom_key(b.atom);
}

} // namespace detail

inline void Symbolic::add_term(const Term &t)
{
    if (t.coeff.is_zero()) {
        return;
    }
    auto it = terms_.begin();
    for (; it != terms_.end(); ++it) {
        if (detail::same_slot(*it, t)) {
            it->coeff += t.coeff;
            if (it->coeff.is_zero()) {
                terms_.erase(it);
            }
            return;
        }
        if (detail::term_order(t, *it) < 0) {
            break;
        }
    }
    terms_.insert(it, t);
}

inline bool operator==(const Symbolic &a, const Symbolic &b)
{
    if (a.terms_.size() != b.terms_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
        if (!detail::same_slot(a.terms_[i], b.terms_[i]) || a.terms_[i].coeff != b.terms_[i].coeff) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// atom constructors (declarations)

Symbolic sym_floor(const Symbolic &x);
Symbolic sym_ceil(const Symbolic &x);
Symbolic sym_cos(const Symbolic &x);
Symbolic sym_sin(const Symbolic &x);
Symbolic sym_atan(const Symbolic &x);
Symbolic sym_pow_floor(const Rational &q, const Symbolic &x);
Symbolic sym_reciprocal(const Symbolic &x);
Symbolic sym_exp(const Symbolic &x);
Symbolic sym_log(const Symbolic &x);
Symbolic sym_pow(const Symbolic &x, const Rational &r);
Symbolic sym_opaque(const std::string &name, std::function<Rational(const BigInt &)> eval, Bounds bounds);
Bounds atom_bounds(const Atom &a);
Bounds value_bounds(const Symbolic &x);
std::optional<PeriodicExpansion> expand_floors(const Symbolic &x);

namespace detail
{

inline AtomPtr make_product_atom(std::vector<AtomPtr> fs)
{
    std::vector<AtomPtr> flat;
    for (auto &f : fs) {
        if (f->kind == AtomKind::product) {
            flat.insert(flat.end(), f->factors.begin(), f->factors.end());
        } else {
            flat.push_back(f);
        }
    }
    std::sort(flat.begin(), flat.end(), [](const AtomPtr &a, const AtomPtr &b) { return a->key < b->key; });
    auto a = std::make_shared<Atom>();
    a->kind = AtomKind::product;
    a->factors = flat;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        a->key += (i ? "*" : "") + flat[i]->key;
    }
    return a;
}

// Collapses sums of floor-type atoms whose periodic expansion is branch-free,
// e.g. floor(w/2) + ceil(w/2) = w.
inline void collapse(Symbolic &x)
{
    if (!x.has_atoms()) {
        return;
    }
    auto e = expand_floors(x);
    if (!e || e->branches.empty()) {
        return;
    }
    for (const auto &b : e->branches) {
        if (b != e->branches[0]) {
            return;
        }
    }
    x = e->branches[0];
}

} // namespace detail

inline Symbolic &Symbolic::operator+=(const Symbolic &o)
{
    for (const auto &t : o.terms_) {
        add_term(t);
    }
    detail::collapse(*this);
    return *this;
}

inline Symbolic &Symbolic::operator*=(const Symbolic &o)
{
    Symbolic acc;
    for (const auto &a : terms_) {
        for (const auto &b : o.terms_) {
            Term t{a.coeff * b.coeff, a.scale * b.scale, nullptr};
            if (a.atom && b.atom) {
                t.atom = detail::make_product_atom({a.atom, b.atom});
            } else {
                t.atom = a.atom ? a.atom : b.atom;
            }
            acc.add_term(t);
        }
    }
    detail::collapse(acc);
    *this = std::move(acc);
    return *this;
}

inline Symbolic &Symbolic::operator/=(const Symbolic &o)
{
    if (o.is_zero()) {
        fail(ErrorCode::division_by_possibly_zero, "division by zero");
    }
    if (o.is_single_term() && !o.terms_[0].atom && o.terms_[0].coeff.is_single_term()) {
        Symbolic inv = monomial(o.terms_[0].coeff.reciprocal(), o.terms_[0].scale.inverse());
        return *this *= inv;
    }
    return *this *= sym_reciprocal(o);
}

// ---------------------------------------------------------------------------
// evaluation at an index

namespace detail
{

inline std::optional<ExactScalar> atom_exact(const Atom &a, const BigInt &n);
inline Interval atom_interval(const Atom &a, const BigInt &n, mpfr_prec_t prec);

inline std::optional<BigInt> floor_at(const Symbolic &arg, const BigInt &n)
{
    if (auto v = arg.exact_at(n)) {
        return scalar_floor(*v);
    }
    for (unsigned d : precision_schedule()) {
        auto [lo, hi] = arg.interval_at(n, digits_to_bits(d)).floors();
        if (lo == hi) {
            return lo;
        }
    }
    return std::nullopt;
}

inline std::optional<ExactScalar> atom_exact(const Atom &a, const BigInt &n)
{
    switch (a.kind) {
        case AtomKind::floor: {
            auto f = floor_at(a.arg, n);
            return f ? std::optional<ExactScalar>(ExactScalar(Rational(*f))) : std::nullopt;
        }
        case AtomKind::ceil: {
            auto f = floor_at(-a.arg, n);
            return f ? std::optional<ExactScalar>(ExactScalar(Rational(-*f))) : std::nullopt;
        }
        case AtomKind::pow_floor: {
            auto f = floor_at(a.arg, n);
            if (!f || !f->fits_slong_p()) {
                return std::nullopt;
            }
            return ExactScalar(rational_pow(a.base, f->get_si()));
        }
        case AtomKind::cos:
        case AtomKind::sin:
        case AtomKind::atan: {
            auto v = a.arg.exact_at(n);
            if (v && v->is_zero()) {
                return ExactScalar(a.kind == AtomKind::cos ? 1 : 0);
            }
            return std::nullopt;
        }
        case AtomKind::reciprocal: {
            auto v = a.arg.exact_at(n);
            if (!v || v->is_zero() || !v->is_single_term()) {
                return std::nullopt;
            }
            return v->reciprocal();
        }
        case AtomKind::product: {
            ExactScalar acc(1);
            for (const auto &f : a.factors) {
                auto v = atom_exact(*f, n);
                if (!v) {
                    return std::nullopt;
                }
                acc *= *v;
            }
            return acc;
        }
        case AtomKind::constant: return std::nullopt;
        case AtomKind::opaque: return ExactScalar(a.eval(n));
    }
    return std::nullopt;
}

inline Interval atom_interval(const Atom &a, const BigInt &n, mpfr_prec_t prec)
{
    switch (a.kind) {
        case AtomKind::floor:
        case AtomKind::ceil:
        case AtomKind::pow_floor:
        case AtomKind::opaque: {
            auto v = atom_exact(a, n);
            if (v) {
                return v->interval(prec);
            }
            auto arg = a.kind == AtomKind::ceil ? -(-a.arg.interval_at(n, prec)).floor_range()
                                                : a.arg.interval_at(n, prec).floor_range();
            if (a.kind == AtomKind::pow_floor) {
                return pow(Interval::point(a.base, prec), arg);
            }
            return arg;
        }
        case AtomKind::cos: return cos(a.arg.interval_at(n, prec));
        case AtomKind::sin: return sin(a.arg.interval_at(n, prec));
        case AtomKind::atan: return atan(a.arg.interval_at(n, prec));
        case AtomKind::reciprocal: return a.arg.interval_at(n, prec).reciprocal();
        case AtomKind::product: {
            auto acc = Interval::point(Rational(1), prec);
            for (const auto &f : a.factors) {
                acc = acc * atom_interval(*f, n, prec);
            }
            return acc;
        }
        case AtomKind::constant: return a.value(prec);
    }
    return Interval(prec);
}

} // namespace detail

inline std::optional<ExactScalar> Symbolic::exact_at(const BigInt &n) const
{
    ExactScalar acc;
    try {
        for (const auto &t : terms_) {
            auto g = t.scale.exact_at(n);
            if (!g) {
                return std::nullopt;
            }
            ExactScalar v = t.coeff * *g;
            if (t.atom) {
                auto a = detail::atom_exact(*t.atom, n);
                if (!a) {
                    return std::nullopt;
                }
                v *= *a;
            }
            acc += v;
        }
    } catch (const Error &e) {
        if (e.code() == ErrorCode::precision_cap_exceeded) {
            throw;
        }
        return std::nullopt;
    }
    return acc;
}

inline detail::Interval Symbolic::interval_at(const BigInt &n, mpfr_prec_t prec) const
{
    auto acc = detail::Interval::point(Rational(0), prec);
    for (const auto &t : terms_) {
        auto v = t.coeff.interval(prec) * t.scale.interval_at(n, prec);
        if (t.atom) {
            v = v * detail::atom_interval(*t.atom, n, prec);
        }
        acc = acc + v;
    }
    return acc;
}

inline double Symbolic::double_at(const BigInt &n) const
{
    if (auto v = exact_at(n)) {
        return v->to_double();
    }
    return interval_at(n, 128).midpoint();
}

// ---------------------------------------------------------------------------
// rendering

namespace detail
{

inline std::string join(const std::vector<std::string> &xs, const std::string &sep)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? sep : "") + xs[i];
    }
    return out;
}

inline std::string atom_text(const Atom &a, const std::string &w);

// Adds an atom's factors to numerator / denominator lists.
inline void place_atom(const Atom &a, const std::string &w, std::vector<std::string> &up, std::vector<std::string> &down)
{
    if (a.kind == AtomKind::reciprocal) {
        auto s = a.arg.to_string(w);
        down.push_back(a.arg.is_single_term() && !a.arg.terms()[0].atom ? paren_if_compound(s)
                                                                          : (a.arg.is_single_term() ? s : "(" + s + ")"));
        return;
    }
    if (a.kind == AtomKind::product) {
        std::size_t i = 0;
        while (i < a.factors.size()) {
            std::size_t j = i;
            while (j < a.factors.size() && a.factors[j]->key == a.factors[i]->key) {
                ++j;
            }
            const auto count = j - i;
            if (a.factors[i]->kind == AtomKind::reciprocal) {
                std::vector<std::string> d;
                place_atom(*a.factors[i], w, up, d);
                for (auto &s : d) {
                    down.push_back(count > 1 ? s + "^" + std::to_string(count) : s);
                }
            } else {
                auto s = atom_text(*a.factors[i], w);
                up.push_back(count > 1 ? s + "^" + std::to_string(count) : s);
            }
            i = j;
        }
        return;
    }
    up.push_back(atom_text(a, w));
}

inline std::string atom_text(const Atom &a, const std::string &w)
{
    switch (a.kind) {
        case AtomKind::floor: return "floor(" + a.arg.to_string(w) + ")";
        case AtomKind::ceil: return "ceil(" + a.arg.to_string(w) + ")";
        case AtomKind::cos: return "cos(" + a.arg.to_string(w) + ")";
        case AtomKind::sin: return "sin(" + a.arg.to_string(w) + ")";
        case AtomKind::atan: return "atan(" + a.arg.to_string(w) + ")";
        case AtomKind::pow_floor: {
            const auto e = "floor(" + a.arg.to_string(w) + ")";
            if (a.base < 1 && a.base.get_num() == 1) {
                return a.base.get_den().get_str() + "^-" + e;
            }
            if (is_integer(a.base)) {
                return a.base.get_str() + "^" + e;
            }
            return "(" + a.base.get_str() + ")^" + e;
        }
        case AtomKind::reciprocal: return "1/(" + a.arg.to_string(w) + ")";
        case AtomKind::product: {
            std::vector<std::string> up, down;
            place_atom(a, w, up, down);
            auto s = join(up, "*");
            if (s.empty()) {
                s = "1";
            }
            for (auto &d : down) {
                s += "/" + d;
            }
            return s;
        }
        case AtomKind::constant:
        case AtomKind::opaque: return a.name;
    }
    return "?";
}

// Magnitude text of a term and its sign.
inline std::string term_text(const Term &t, const std::string &w, bool &negative)
{
    ScalarParts sp;
    if (t.coeff.is_single_term()) {
        sp = t.coeff.parts();
    } else {
        sp.up.push_back("(" + t.coeff.to_string() + ")");
    }
    negative = sp.sign < 0;
    auto g = growth_parts(t.scale, w);
    // log(w)/log(p) reads as logp(w)
    if (t.scale.q == ExactScalar(1)) {
        for (auto it = sp.down.begin(); it != sp.down.end(); ++it) {
            if (it->rfind("log(", 0) == 0 && it->find('^') == std::string::npos) {
                const auto p = it->substr(4, it->size() - 5);
                auto lw = std::find(g.up.begin(), g.up.end(), "log(" + w + ")");
                if (lw != g.up.end()) {
                    *lw = "log" + p + "(" + w + ")";
                    sp.down.erase(it);
                }
                break;
            }
        }
    }
    std::vector<std::string> up, down;
    if (sp.num != 1) {
        up.push_back(sp.num.get_str());
    }
    up.insert(up.end(), sp.up.begin(), sp.up.end());
    up.insert(up.end(), g.up.begin(), g.up.end());
    if (!g.exp.empty()) {
        up.push_back(g.exp);
    }
    if (sp.den != 1) {
        down.push_back(sp.den.get_str());
    }
    down.insert(down.end(), sp.down.begin(), sp.down.end());
    down.insert(down.end(), g.down.begin(), g.down.end());
    if (t.atom) {
        place_atom(*t.atom, w, up, down);
    }
    std::string s = up.empty() ? "1" : join(up, "*");
    if (!down.empty()) {
        s += "/" + (down.size() == 1 ? down[0] : "(" + join(down, "*") + ")");
    }
    return s;
}

inline std::string join_terms(const std::vector<Term> &terms, const std::string &w, bool spaced)
{
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        bool neg = false;
        auto s = term_text(terms[i], w, neg);
        if (i == 0) {
            out += (neg ? "-" : "") + s;
        } else if (spaced) {
            out += (neg ? " - " : " + ") + s;
        } else {
            out += (neg ? "-" : "+") + s;
        }
    }
    return out;
}

// w^k*(P)/D for rational polynomials in w with a common denominator.
inline std::optional<std::string> factored_polynomial(const std::vector<Term> &terms, const std::string &w)
{
    if (terms.size() < 2) {
        return std::nullopt;
    }
    BigInt D = 1;
    Rational minp = -1;
    for (const auto &t : terms) {
        if (t.atom || !t.coeff.is_rational() || !t.scale.is_power_of_omega()) {
            return std::nullopt;
        }
        const Rational p = t.scale.p.rational_part();
        if (!is_integer(p) || p < 1) {
            return std::nullopt;
        }
        mpz_lcm(D.get_mpz_t(), D.get_mpz_t(), t.coeff.rational_part().get_den_mpz_t());
        minp = p;
    }
    if (D == 1) {
        return std::nullopt;
    }
    const bool neg = terms[0].coeff.rational_part() < 0;
    std::vector<Term> inner;
    for (const auto &t : terms) {
        Rational c = t.coeff.rational_part() * Rational(D) * (neg ? -1 : 1);
        inner.push_back({ExactScalar(c), GrowthMonomial::power(t.scale.p - ExactScalar(minp)), nullptr});
    }
    std::string lead;
    if (minp == 1) {
        lead = w + "*";
    } else {
        lead = w + "^" + minp.get_str() + "*";
    }
    return std::string(neg ? "-" : "") + lead + "(" + join_terms(inner, w, false) + ")/" + D.get_str();
}

} // namespace detail

inline std::string Symbolic::compact(const std::string &w) const
{
    if (terms_.empty()) {
        return "0";
    }
    return detail::join_terms(terms_, w, false);
}

inline std::string Symbolic::to_string(const std::string &w) const
{
    if (terms_.empty()) {
        return "0";
    }
    if (auto f = detail::factored_polynomial(terms_, w)) {
        return *f;
    }
    // Group runs sharing a non-zero exponential rate: "(w+2)*2^-w".
    std::string out;
    std::size_t i = 0;
    bool first = true;
    while (i < terms_.size()) {
        std::size_t j = i + 1;
        const auto &c = terms_[i].scale.c;
        if (!c.is_zero() && !terms_[i].atom) {
            while (j < terms_.size() && !terms_[j].atom && terms_[j].scale.c == c && terms_[j].scale.q.is_zero()) {
                ++j;
            }
            if (!terms_[i].scale.q.is_zero()) {
                j = i + 1;
            }
        }
        std::string piece;
        bool neg = false;
        if (j - i >= 2) {
            neg = scalar_sign(terms_[i].coeff) < 0;
            std::vector<Term> inner;
            for (std::size_t k = i; k < j; ++k) {
                inner.push_back({neg ? -terms_[k].coeff : terms_[k].coeff,
                                 GrowthMonomial{ExactScalar(), terms_[k].scale.p, ExactScalar()}, nullptr});
            }
            piece = "(" + detail::join_terms(inner, w, false) + ")*" + detail::exp_factor(c, w);
        } else {
            piece = detail::term_text(terms_[i], w, neg);
        }
        if (first) {
            out += (neg ? "-" : "") + piece;
        } else {
            out += (neg ? " - " : " + ") + piece;
        }
        first = false;
        i = j;
    }
    return out;
}

inline std::ostream &operator<<(std::ostream &os, const Symbolic &s)
{
    return os << s.to_string();
}

// ---------------------------------------------------------------------------
// atom constructors

namespace detail
{

inline AtomPtr make_atom(AtomKind kind, const Symbolic &arg, const std::string &key)
{
    auto a = std::make_shared<Atom>();
    a->kind = kind;
    a->arg = arg;
    a->key = key;
    return a;
}

// x = I + R where I collects the integer-valued part: integer multiples of
// natural powers of w plus an integer constant.
inline std::pair<Symbolic, Symbolic> integer_split(const Symbolic &x, bool ceiling)
{
    Symbolic I, R;
    for (const auto &t : x.terms()) {
        const bool poly = !t.atom && t.coeff.is_rational() && t.scale.is_power_of_omega() &&
                          is_integer(t.scale.p.rational_part()) && t.scale.p.rational_part() >= 0;
        if (!poly) {
            R.add_term(t);
            continue;
        }
        const Rational c = t.coeff.rational_part();
        const bool constant = t.scale.is_unit();
        const BigInt k = (constant && ceiling) ? ceil_of(c) : floor_of(c);
        if (k != 0) {
            I.add_term({ExactScalar(Rational(k)), t.scale, nullptr});
        }
        if (c != Rational(k)) {
            R.add_term({ExactScalar(c - Rational(k)), t.scale, nullptr});
        }
    }
    return {I, R};
}

} // namespace detail

inline Symbolic sym_floor(const Symbolic &x)
{
    auto [I, R] = detail::integer_split(x, false);
    if (R.is_zero()) {
        return I;
    }
    if (R.is_constant()) {
        return I + Symbolic(Rational(scalar_floor(R.constant_value())));
    }
    return I + Symbolic::of_atom(detail::make_atom(AtomKind::floor, R, "floor(" + R.key() + ")"));
}

inline Symbolic sym_ceil(const Symbolic &x)
{
    auto [I, R] = detail::integer_split(x, true);
    if (R.is_zero()) {
        return I;
    }
    if (R.is_constant()) {
        return I + Symbolic(Rational(-scalar_floor(-R.constant_value())));
    }
    return I + Symbolic::of_atom(detail::make_atom(AtomKind::ceil, R, "ceil(" + R.key() + ")"));
}

namespace detail
{

inline Symbolic constant_atom(const std::string &name, std::function<Interval(mpfr_prec_t)> value)
{
    auto a = std::make_shared<Atom>();
    a->kind = AtomKind::constant;
    a->name = name;
    a->key = name;
    a->value = std::move(value);
    auto iv = a->value(96);
    Bounds b;
    b.lo = Symbolic(iv.lower_rational());
    b.hi = Symbolic(iv.upper_rational());
    a->declared = b;
    return Symbolic::of_atom(a);
}

inline Symbolic trig(AtomKind kind, const Symbolic &x)
{
    if (x.has_atoms()) {
        fail(ErrorCode::unsupported, "trigonometric function of an indeterminate value");
    }
    const std::string name = kind == AtomKind::cos ? "cos" : "sin";
    if (x.is_zero()) {
        return Symbolic(kind == AtomKind::cos ? 1 : 0);
    }
    if (x.is_constant()) {
        const ExactScalar v = x.constant_value();
        return constant_atom(name + "(" + v.to_string() + ")", [v, kind](mpfr_prec_t prec) {
            auto iv = v.interval(prec);
            return kind == AtomKind::cos ? cos(iv) : sin(iv);
        });
    }
    // odd/even symmetry keeps keys canonical
    if (scalar_sign(x.terms()[0].coeff) < 0) {
        auto inner = make_atom(kind, -x, name + "(" + (-x).key() + ")");
        return Symbolic::of_atom(inner, ExactScalar(kind == AtomKind::sin ? -1 : 1));
    }
    return Symbolic::of_atom(make_atom(kind, x, name + "(" + x.key() + ")"));
}

} // namespace detail

inline Symbolic sym_cos(const Symbolic &x)
{
    return detail::trig(AtomKind::cos, x);
}

inline Symbolic sym_sin(const Symbolic &x)
{
    return detail::trig(AtomKind::sin, x);
}

inline Symbolic sym_atan(const Symbolic &x)
{
    if (x.has_atoms()) {
        fail(ErrorCode::unsupported, "arctangent of an indeterminate value");
    }
    if (x.is_zero()) {
        return Symbolic();
    }
    if (x.is_constant()) {
        const ExactScalar v = x.constant_value();
        if (v == ExactScalar(1) || v == ExactScalar(-1)) {
            return Symbolic(ExactScalar::pi() * ExactScalar(make_rational(v.rational_part().get_num().get_si(), 4)));
        }
        return detail::constant_atom("atan(" + v.to_string() + ")",
                                     [v](mpfr_prec_t prec) { return atan(v.interval(prec)); });
    }
    if (scalar_sign(x.terms()[0].coeff) < 0) {
        return -sym_atan(-x);
    }
    return Symbolic::of_atom(detail::make_atom(AtomKind::atan, x, "atan(" + x.key() + ")"));
}

inline Symbolic sym_exp(const Symbolic &x)
{
    if (x.has_atoms()) {
        fail(ErrorCode::unsupported, "exp of an indeterminate value");
    }
    ExactScalar k;
    ExactScalar rate;
    ExactScalar power;
    const auto logw = GrowthMonomial{ExactScalar(), ExactScalar(), ExactScalar(1)};
    for (const auto &t : x.terms()) {
        if (t.scale.is_unit()) {
            k += t.coeff;
        } else if (t.scale == GrowthMonomial::omega()) {
            rate += t.coeff;
        } else if (t.scale == logw) {
            power += t.coeff;
        } else {
            fail(ErrorCode::unsupported, "exp(" + x.to_string() + ") leaves the growth scale");
        }
    }
    return Symbolic::monomial(exp(k), GrowthMonomial{rate, power, ExactScalar()});
}

inline Symbolic sym_log(const Symbolic &x)
{
    if (x.has_atoms() || !x.is_single_term()) {
        fail(ErrorCode::unsupported, "log(" + x.to_string() + ") has no finite expansion");
    }
    const auto &t = x.terms()[0];
    if (scalar_sign(t.coeff) <= 0) {
        fail(ErrorCode::domain_error, "log of a non-positive value");
    }
    if (!t.scale.q.is_zero()) {
        fail(ErrorCode::unsupported, "nested logarithms are not supported");
    }
    Symbolic out(log(t.coeff));
    out += Symbolic::monomial(t.scale.c, GrowthMonomial::omega());
    out += Symbolic::monomial(t.scale.p, GrowthMonomial{ExactScalar(), ExactScalar(), ExactScalar(1)});
    return out;
}

inline Symbolic sym_pow(const Symbolic &x, const Rational &r)
{
    if (r == 0) {
        return Symbolic(1);
    }
    if (is_integer(r) && r > 0 && r < 64) {
        Symbolic acc(1);
        for (long k = 0; k < r.get_num().get_si(); ++k) {
            acc *= x;
        }
        return acc;
    }
    if (x.is_single_term() && !x.terms()[0].atom) {
        const auto &t = x.terms()[0];
        return Symbolic::monomial(t.coeff.pow(r), t.scale.pow(r));
    }
    if (is_integer(r) && r < 0) {
        return sym_reciprocal(sym_pow(x, -r));
    }
    fail(ErrorCode::unsupported, "non-integer power of a compound value: " + x.to_string());
}

inline Symbolic sym_pow_floor(const Rational &q, const Symbolic &x)
{
    if (q <= 0) {
        fail(ErrorCode::domain_error, "pow-floor base must be positive");
    }
    if (q == 1) {
        return Symbolic(1);
    }
    auto [I, R] = detail::integer_split(x, false);
    const ExactScalar lq = ExactScalar::log(q);
    Symbolic whole = sym_exp(I * Symbolic(lq));
    if (R.is_zero()) {
        return whole;
    }
    if (R.is_constant()) {
        return whole * Symbolic(rational_pow(q, scalar_floor(R.constant_value()).get_si()));
    }
    if (R.has_atoms()) {
        fail(ErrorCode::unsupported, "pow-floor of an indeterminate exponent");
    }
    sym_exp(R * Symbolic(lq)); // bounds must be expressible
    auto a = detail::make_atom(AtomKind::pow_floor, R, q.get_str() + "^floor(" + R.key() + ")");
    std::const_pointer_cast<Atom>(a)->base = q;
    return whole * Symbolic::of_atom(a);
}

inline Symbolic sym_reciprocal(const Symbolic &x)
{
    if (x.is_zero()) {
        fail(ErrorCode::division_by_possibly_zero, "reciprocal of zero");
    }
    if (x.is_single_term()) {
        const auto &t = x.terms()[0];
        if (!t.atom && t.coeff.is_single_term()) {
            return Symbolic::monomial(t.coeff.reciprocal(), t.scale.inverse());
        }
        if (t.atom && t.coeff.is_single_term()) {
            Symbolic rest = Symbolic::monomial(t.coeff.reciprocal(), t.scale.inverse());
            if (t.atom->kind == AtomKind::reciprocal) {
                return rest * t.atom->arg;
            }
            Symbolic inner = Symbolic::of_atom(t.atom);
            return rest * Symbolic::of_atom(detail::make_atom(AtomKind::reciprocal, inner, "1/(" + inner.key() + ")"));
        }
    }
    auto v = sign_verdict(x);
    if (!v.is_determinate() || v.eq) {
        fail(ErrorCode::division_by_possibly_zero, "reciprocal of a value whose sign is " + v.word());
    }
    if (v.lt) {
        return -sym_reciprocal(-x);
    }
    // also validates that bounds exist
    auto a = detail::make_atom(AtomKind::reciprocal, x, "1/(" + x.key() + ")");
    atom_bounds(*a);
    return Symbolic::of_atom(a);
}

inline Symbolic sym_opaque(const std::string &name, std::function<Rational(const BigInt &)> eval, Bounds bounds)
{
    auto a = std::make_shared<Atom>();
    a->kind = AtomKind::opaque;
    a->name = name;
    a->key = name;
    a->eval = std::move(eval);
    a->declared = std::move(bounds);
    return Symbolic::of_atom(a);
}

// ---------------------------------------------------------------------------
// sign of atom-free values and certified witnesses

namespace detail
{

// Smallest N (as found) such that sign(f(n)) = s for all n >= N. The bound is
// certified: every lower-order ratio is monotone past N and their weighted sum
// stays below the leading coefficient.
inline std::optional<BigInt> sign_witness(const Symbolic &f, int s)
{
    const auto &ts = f.terms();
    if (ts.empty()) {
        return std::nullopt;
    }
    const mpfr_prec_t prec = 128;
    BigInt N = 3;
    const auto &lead = ts[0];
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const auto h = ts[i].scale / lead.scale;
        const double c = h.c.to_double();
        const double p = h.p.to_double();
        const double q = h.q.to_double();
        const int cs = scalar_sign(h.c);
        double need = 3;
        if (cs < 0) {
            need = (std::max(p, 0.0) + std::max(q, 0.0)) / (-c) + 3;
        } else if (scalar_sign(h.p) < 0 && q > 0) {
            need = std::exp(std::min(q / (-p), 600.0)) + 3;
        }
        if (need > 1e30) {
            return std::nullopt;
        }
        BigInt nb(std::ceil(need));
        if (nb > N) {
            N = nb;
        }
    }
    const auto a0 = lead.coeff.interval(prec).magnitude();
    auto a0lo = Interval::point(lead.coeff.interval(prec).positive() ? lead.coeff.interval(prec).lower_rational()
                                                                      : -lead.coeff.interval(prec).upper_rational(),
                                prec);
    (void)a0;
    bool ok = false;
    for (int iter = 0; iter < 400; ++iter) {
        auto sum = Interval::point(Rational(0), prec);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const auto h = ts[i].scale / lead.scale;
            sum = sum + ts[i].coeff.interval(prec).magnitude() * h.interval_at(N, prec).magnitude();
        }
        if (sum.below(a0lo)) {
            ok = true;
            break;
        }
        N *= 2;
    }
    if (!ok) {
        return std::nullopt;
    }
    // refine downwards so witnesses are tight for small indices
    BigInt n = N - 1;
    const BigInt floor_limit = N > 8192 ? N - 8192 : BigInt(1);
    while (n >= floor_limit && n >= 1) {
        int sg = 0;
        try {
            auto iv = f.interval_at(n, prec);
            if (iv.positive()) {
                sg = 1;
            } else if (iv.negative()) {
                sg = -1;
            } else if (auto e = f.exact_at(n)) {
                sg = scalar_sign(*e);
            }
        } catch (const Error &) {
            sg = 0;
        }
        if (sg != s) {
            break;
        }
        N = n;
        n -= 1;
    }
    return N;
}

} // namespace detail

// ---------------------------------------------------------------------------
// enclosures

namespace detail
{

inline int eventual_sign(const Symbolic &x)
{
    if (x.is_zero()) {
        return 0;
    }
    if (x.has_atoms()) {
        auto v = sign_verdict(x);
        if (!v.is_determinate()) {
            fail(ErrorCode::division_by_possibly_zero, "sign of " + x.to_string() + " is " + v.word());
        }
        return v.gt ? 1 : (v.lt ? -1 : 0);
    }
    return scalar_sign(x.terms()[0].coeff);
}

inline Bounds scale_bounds(const Bounds &b, const Symbolic &m)
{
    Bounds r;
    r.valid_from = b.valid_from;
    if (eventual_sign(m) >= 0) {
        r.lo = b.lo * m;
        r.hi = b.hi * m;
        r.lo_open = b.lo_open;
        r.hi_open = b.hi_open;
    } else {
        r.lo = b.hi * m;
        r.hi = b.lo * m;
        r.lo_open = b.hi_open;
        r.hi_open = b.lo_open;
    }
    return r;
}

inline Bounds multiply_bounds(const Bounds &a, const Bounds &b)
{
    struct Corner
    {
        Symbolic v;
        bool open;
    };
    std::vector<Corner> cs{{a.lo * b.lo, a.lo_open || b.lo_open},
                           {a.lo * b.hi, a.lo_open || b.hi_open},
                           {a.hi * b.lo, a.hi_open || b.lo_open},
                           {a.hi * b.hi, a.hi_open || b.hi_open}};
    Bounds r;
    r.valid_from = std::max(a.valid_from, b.valid_from);
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < cs.size(); ++i) {
        if (eventual_sign(cs[i].v - cs[lo].v) < 0) {
            lo = i;
        }
        if (eventual_sign(cs[i].v - cs[hi].v) > 0) {
            hi = i;
        }
    }
    r.lo = cs[lo].v;
    r.hi = cs[hi].v;
    r.lo_open = cs[lo].open;
    r.hi_open = cs[hi].open;
    return r;
}

// 1/x for atom-free x > 0 written as L(1 + eps): [L^-1 (1 - eps), L^-1 (1 - eps + 2 eps^2)].
inline Bounds reciprocal_bounds_positive(const Symbolic &x)
{
    Bounds r;
    Symbolic L = x.leading();
    Symbolic Linv = sym_reciprocal(L);
    Symbolic eps = (x - L) * Linv;
    r.lo = Linv * (Symbolic(1) - eps);
    r.hi = Linv * (Symbolic(1) - eps + Symbolic(2) * eps * eps);
    // needs x > 0 and eps >= -1/2
    BigInt from = 1;
    if (auto w1 = sign_witness(x, 1)) {
        from = std::max(from, *w1);
    }
    if (!eps.is_zero()) {
        Symbolic half = x - L * Symbolic(make_rational(1, 2));
        if (auto w2 = sign_witness(half, 1)) {
            from = std::max(from, *w2);
        }
    }
    r.valid_from = from;
    return r;
}

} // namespace detail

inline Bounds atom_bounds(const Atom &a)
{
    Bounds b;
    switch (a.kind) {
        case AtomKind::floor:
        case AtomKind::ceil: {
            Bounds x = a.arg.has_atoms() ? value_bounds(a.arg) : Bounds{a.arg, a.arg, false, false, 1};
            if (a.kind == AtomKind::floor) {
                b.lo = x.lo - Symbolic(1);
                b.lo_open = true;
                b.hi = x.hi;
                b.hi_open = x.hi_open;
            } else {
                b.lo = x.lo;
                b.lo_open = x.lo_open;
                b.hi = x.hi + Symbolic(1);
                b.hi_open = true;
            }
            b.valid_from = x.valid_from;
            return b;
        }
        case AtomKind::cos:
        case AtomKind::sin:
            b.lo = Symbolic(-1);
            b.hi = Symbolic(1);
            return b;
        case AtomKind::atan: {
            const auto &x = a.arg;
            const auto half_pi = Symbolic(ExactScalar::pi() * ExactScalar(make_rational(1, 2)));
            const int cls = x.is_single_term() ? compare_growth(x.terms()[0].scale, GrowthMonomial::unit()) : 0;
            if (x.is_single_term() && cls > 0) {
                Symbolic inv = sym_reciprocal(x);
                b.lo = half_pi - inv;
                b.hi = half_pi - inv + Symbolic(make_rational(1, 3)) * inv * inv * inv;
                b.lo_open = b.hi_open = true;
            } else if (x.is_single_term() && cls < 0) {
                b.lo = x - Symbolic(make_rational(1, 3)) * x * x * x;
                b.hi = x;
                b.lo_open = b.hi_open = true;
            } else {
                b.lo = -half_pi;
                b.hi = half_pi;
                b.lo_open = b.hi_open = true;
            }
            return b;
        }
        case AtomKind::pow_floor: {
            const Symbolic lq(ExactScalar::log(a.base));
            Symbolic at = sym_exp(a.arg * lq);
            Symbolic below = sym_exp((a.arg - Symbolic(1)) * lq);
            if (a.base < 1) {
                b.lo = at;
                b.hi = below;
                b.hi_open = true;
            } else {
                b.lo = below;
                b.lo_open = true;
                b.hi = at;
            }
            return b;
        }
        case AtomKind::reciprocal: {
            const auto &x = a.arg;
            if (!x.has_atoms()) {
                if (detail::eventual_sign(x) > 0) {
                    return detail::reciprocal_bounds_positive(x);
                }
                auto p = detail::reciprocal_bounds_positive(-x);
                return Bounds{-p.hi, -p.lo, p.hi_open, p.lo_open, p.valid_from};
            }
            Bounds xb = value_bounds(x);
            const int slo = detail::eventual_sign(xb.lo);
            const int shi = detail::eventual_sign(xb.hi);
            if (slo > 0) {
                auto top = detail::reciprocal_bounds_positive(xb.lo);
                auto bottom = detail::reciprocal_bounds_positive(xb.hi);
                return Bounds{bottom.lo, top.hi, false, false,
                              std::max({xb.valid_from, top.valid_from, bottom.valid_from})};
            }
            if (shi < 0) {
                auto top = detail::reciprocal_bounds_positive(-xb.hi);
                auto bottom = detail::reciprocal_bounds_positive(-xb.lo);
                return Bounds{-top.hi, -bottom.lo, false, false,
                              std::max({xb.valid_from, top.valid_from, bottom.valid_from})};
            }
            fail(ErrorCode::division_by_possibly_zero, "reciprocal of a value whose enclosure contains zero");
        }
        case AtomKind::product: {
            Bounds acc{Symbolic(1), Symbolic(1), false, false, 1};
            for (const auto &f : a.factors) {
                acc = detail::multiply_bounds(acc, atom_bounds(*f));
            }
            return acc;
        }
        case AtomKind::constant:
        case AtomKind::opaque: return *a.declared;
    }
    return b;
}

inline Bounds value_bounds(const Symbolic &x)
{
    Bounds acc{x.atom_free_part(), x.atom_free_part(), false, false, 1};
    for (const auto &t : x.terms()) {
        if (!t.atom) {
            continue;
        }
        Bounds tb = detail::scale_bounds(atom_bounds(*t.atom), Symbolic::monomial(t.coeff, t.scale));
        acc.lo += tb.lo;
        acc.hi += tb.hi;
        acc.lo_open = acc.lo_open || tb.lo_open;
        acc.hi_open = acc.hi_open || tb.hi_open;
        acc.valid_from = std::max(acc.valid_from, tb.valid_from);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// periodic expansion of floor-type atoms with arguments a*w + b

namespace detail
{

inline std::optional<std::pair<Rational, Rational>> rational_linear(const Symbolic &x)
{
    Rational a = 0, b = 0;
    for (const auto &t : x.terms()) {
        if (t.atom || !t.coeff.is_rational()) {
            return std::nullopt;
        }
        if (t.scale.is_unit()) {
            b = t.coeff.rational_part();
        } else if (t.scale == GrowthMonomial::omega()) {
            a = t.coeff.rational_part();
        } else {
            return std::nullopt;
        }
    }
    return std::make_pair(a, b);
}

inline bool expandable(const Atom &a)
{
    if (a.kind == AtomKind::floor || a.kind == AtomKind::ceil || a.kind == AtomKind::pow_floor) {
        return rational_linear(a.arg).has_value();
    }
    if (a.kind == AtomKind::product) {
        return std::any_of(a.factors.begin(), a.factors.end(), [](const AtomPtr &f) { return expandable(*f); });
    }
    return false;
}

inline void collect_moduli(const Atom &a, BigInt &L)
{
    if (a.kind == AtomKind::product) {
        for (const auto &f : a.factors) {
            collect_moduli(*f, L);
        }
        return;
    }
    if (auto ab = rational_linear(a.arg); ab && (a.kind == AtomKind::floor || a.kind == AtomKind::ceil ||
                                                 a.kind == AtomKind::pow_floor)) {
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), ab->first.get_den_mpz_t());
    }
}

inline Symbolic branch_of(const AtomPtr &a, const Rational &rho)
{
    if (a->kind == AtomKind::product) {
        Symbolic acc(1);
        for (const auto &f : a->factors) {
            acc *= branch_of(f, rho);
        }
        return acc;
    }
    auto ab = rational_linear(a->arg);
    if (!ab || !(a->kind == AtomKind::floor || a->kind == AtomKind::ceil || a->kind == AtomKind::pow_floor)) {
        return Symbolic::of_atom(a);
    }
    const auto [A, B] = *ab;
    const Rational at = A * rho + B;
    const BigInt k = a->kind == AtomKind::ceil ? ceil_of(at) : floor_of(at);
    // floor(A n + B) = A (n - rho) + k on n = rho (mod L)
    Symbolic lin = Symbolic::monomial(ExactScalar(A), GrowthMonomial::omega()) + Symbolic(Rational(Rational(k) - A * rho));
    if (a->kind == AtomKind::pow_floor) {
        return sym_exp(lin * Symbolic(ExactScalar::log(a->base)));
    }
    return lin;
}

} // namespace detail

inline std::optional<PeriodicExpansion> expand_floors(const Symbolic &x)
{
    BigInt L = 1;
    bool any = false;
    for (const auto &t : x.terms()) {
        if (t.atom && detail::expandable(*t.atom)) {
            any = true;
            detail::collect_moduli(*t.atom, L);
        }
    }
    if (!any || L > 720) {
        return std::nullopt;
    }
    PeriodicExpansion out;
    out.modulus = L.get_ui();
    for (unsigned long rho = 0; rho < out.modulus; ++rho) {
        Symbolic b;
        for (const auto &t : x.terms()) {
            Symbolic m = Symbolic::monomial(t.coeff, t.scale);
            if (t.atom && detail::expandable(*t.atom)) {
                b += m * detail::branch_of(t.atom, Rational(rho));
            } else if (t.atom) {
                b += m * Symbolic::of_atom(t.atom);
            } else {
                b += m;
            }
        }
        out.branches.push_back(b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// sign verdicts

namespace detail
{

inline OrderVerdict atom_free_sign(const Symbolic &x)
{
    if (x.is_zero()) {
        Certificate c{CertificateKind::exact_identity, BigInt(1), 1, "identically zero"};
        return OrderVerdict::determinate(Order::equal, c);
    }
    int s = 0;
    try {
        s = scalar_sign(x.terms()[0].coeff);
    } catch (const Error &) {
        return OrderVerdict::unknown(0, "leading coefficient undecided at the precision cap");
    }
    Certificate c;
    c.kind = CertificateKind::leading_term;
    c.witness = sign_witness(x, s);
    c.detail = "leading term " + x.leading().to_string();
    return OrderVerdict::determinate(s > 0 ? Order::greater : Order::less, c);
}

inline std::optional<OrderVerdict> enclosure_sign(const Symbolic &x)
{
    Bounds b;
    try {
        b = value_bounds(x);
    } catch (const Error &) {
        return std::nullopt;
    }
    auto decide = [&](const Symbolic &v, bool open, int want) -> std::optional<OrderVerdict> {
        auto s = atom_free_sign(v);
        if (!s.is_determinate()) {
            return std::nullopt;
        }
        const bool ok = want > 0 ? (s.gt || (s.eq && open)) : (s.lt || (s.eq && open));
        if (!ok) {
            return std::nullopt;
        }
        Certificate c;
        c.kind = CertificateKind::enclosure;
        BigInt w = b.valid_from;
        if (s.cert.witness) {
            w = std::max(w, *s.cert.witness);
        }
        c.witness = s.eq ? b.valid_from : (s.cert.witness ? std::optional<BigInt>(w) : std::nullopt);
        c.detail = "enclosure [" + b.lo.to_string() + ", " + b.hi.to_string() + "]";
        return OrderVerdict::determinate(want > 0 ? Order::greater : Order::less, c);
    };
    if (auto v = decide(b.lo, b.lo_open, 1)) {
        return v;
    }
    if (auto v = decide(b.hi, b.hi_open, -1)) {
        return v;
    }
    return std::nullopt;
}

// R + A*cos(a w + b) with A a single atom-free term.
inline std::optional<OrderVerdict> oscillation_sign(const Symbolic &x)
{
    const Term *osc = nullptr;
    Symbolic R;
    for (const auto &t : x.terms()) {
        if (t.atom) {
            if (osc || (t.atom->kind != AtomKind::cos && t.atom->kind != AtomKind::sin)) {
                return std::nullopt;
            }
            osc = &t;
        } else {
            R.add_term(t);
        }
    }
    if (!osc || !rational_linear(osc->atom->arg) || !osc->coeff.is_single_term()) {
        return std::nullopt;
    }
    const auto [a, b0] = *rational_linear(osc->atom->arg);
    if (a == 0) {
        return std::nullopt;
    }
    Symbolic A = Symbolic::monomial(osc->coeff, osc->scale);
    Symbolic s = R / A;
    for (const auto &t : s.terms()) {
        if (compare_growth(t.scale, GrowthMonomial::unit()) > 0) {
            return std::nullopt;
        }
    }
    const ExactScalar s0 = s.coefficient(GrowthMonomial::unit());
    const Symbolic eps = s - Symbolic(s0);
    int cmp = 0;
    try {
        cmp = compare_scalars(scalar_sign(s0) < 0 ? -s0 : s0, ExactScalar(1));
    } catch (const Error &) {
        return std::nullopt;
    }
    const int sa = scalar_sign(osc->coeff);
    Certificate c;
    c.kind = CertificateKind::oscillation;
    c.detail = osc->atom->key + " is dense in [-1, 1] at integer arguments";
    if (cmp < 0) {
        // equality needs cos(a n + b) = -s(n); excluded when s(n) is algebraic
        bool algebraic = true;
        for (const auto &t : s.terms()) {
            algebraic = algebraic && t.coeff.is_rational() && t.scale.q.is_zero() && t.scale.p.is_rational();
            for (const auto &ct : t.scale.c.terms()) {
                algebraic = algebraic && !ct.monomial.empty() && ct.monomial.factors.size() == 1 &&
                            ct.monomial.factors[0].constant.kind == ConstantKind::log_prime;
            }
        }
        if (!algebraic) {
            return std::nullopt;
        }
        return OrderVerdict::possible(true, false, true, c);
    }
    if (cmp == 0 && eps.is_zero()) {
        // s0 = 1: A (1 + cos) has the sign of A except where cos = -1, which never happens at
        // rational arguments; s0 = -1: A (cos - 1) vanishes only where the argument is zero.
        const bool plus = scalar_sign(s0) > 0;
        int sign = plus ? sa : -sa;
        c.detail += "; touches its bound only at a zero argument";
        BigInt w = 2;
        if (!plus && osc->atom->kind == AtomKind::cos) {
            const Rational n0 = -b0 / a;
            if (is_integer(n0) && n0 >= 1) {
                w = n0.get_num() + 1;
            }
        }
        c.witness = w;
        return OrderVerdict::determinate(sign > 0 ? Order::greater : Order::less, c);
    }
    return std::nullopt;
}

} // namespace detail

inline OrderVerdict sign_verdict(const Symbolic &x, std::uint64_t horizon)
{
    if (!x.has_atoms()) {
        return detail::atom_free_sign(x);
    }
    if (auto v = detail::enclosure_sign(x)) {
        return *v;
    }
    if (auto e = expand_floors(x)) {
        std::optional<OrderVerdict> acc;
        for (std::size_t r = 0; r < e->branches.size(); ++r) {
            auto v = sign_verdict(e->branches[r], horizon);
            acc = acc ? join_verdicts(*acc, v) : v;
        }
        acc->cert.kind = CertificateKind::case_split;
        acc->cert.modulus = e->modulus;
        acc->cert.detail = "residues mod " + std::to_string(e->modulus);
        return *acc;
    }
    if (auto v = detail::oscillation_sign(x)) {
        return *v;
    }
    return OrderVerdict::unknown(horizon, "no certification tactic applies to " + x.to_string());
}

inline OrderVerdict compare_symbolic(const Symbolic &a, const Symbolic &b, std::uint64_t horizon = default_horizon)
{
    return sign_verdict(a - b, horizon);
}

// ---------------------------------------------------------------------------
// shadow and classification

inline Classification classify_atom_free(const Symbolic &x)
{
    if (x.is_zero()) {
        return Classification::finite;
    }
    const auto &g = x.terms()[0].scale;
    if (compare_growth(g, GrowthMonomial::unit()) < 0) {
        return Classification::infinitesimal;
    }
    if (compare_growth(g, GrowthMonomial::unit()) == 0) {
        return Classification::finite;
    }
    if (compare_growth(g, GrowthMonomial::omega()) < 0) {
        return Classification::lesser_infinite;
    }
    return Classification::infinite;
}

inline Classification classify(const Symbolic &x)
{
    if (!x.has_atoms()) {
        return classify_atom_free(x);
    }
    Bounds b;
    try {
        b = value_bounds(x);
    } catch (const Error &) {
        return Classification::unknown;
    }
    auto lo = classify_atom_free(b.lo);
    auto hi = classify_atom_free(b.hi);
    if (lo == hi) {
        return lo;
    }
    // bounds on either side of zero with the same magnitude class
    if (b.lo.is_zero() && hi == Classification::infinitesimal) {
        return Classification::infinitesimal;
    }
    return Classification::unknown;
}

inline Symbolic truncate_infinitesimal(const Symbolic &x)
{
    Symbolic r;
    for (const auto &t : x.terms()) {
        if (t.atom || compare_growth(t.scale, GrowthMonomial::unit()) >= 0) {
            r.add_term(t);
        }
    }
    return r;
}

// Drops infinitesimal terms; an atom whose scaled enclosure has infinitesimal
// width is replaced by the shadow of its lower bound.
inline Symbolic shadow(const Symbolic &x)
{
    Symbolic r;
    for (const auto &t : x.terms()) {
        if (!t.atom) {
            if (compare_growth(t.scale, GrowthMonomial::unit()) >= 0) {
                r.add_term(t);
            }
            continue;
        }
        Symbolic single = Symbolic::of_atom(t.atom, t.coeff, t.scale);
        Bounds b;
        try {
            b = value_bounds(single);
        } catch (const Error &) {
            r.add_term(t);
            continue;
        }
        const Symbolic width = b.hi - b.lo;
        const auto cls = classify_atom_free(width);
        if (width.is_zero() || cls == Classification::infinitesimal) {
            r += truncate_infinitesimal(b.lo);
        } else {
            r.add_term(t);
        }
    }
    return truncate_infinitesimal(r);
}

} // namespace hyperreal
