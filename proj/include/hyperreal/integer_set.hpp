#pragma once

// Structured sets of integers: finite sets, residue classes, arithmetic
// progressions, images c*k^m, prime-power towers b^k, and their boolean
// combinations. Periodic sets reduce to a residue pattern plus finitely many
// exceptions on each side of zero.

#include <map>
#include <memory>
#include <optional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <hyperreal/truth.hpp>

namespace hyperreal
{

struct IntegerSetExpr;
using SetPtr = std::shared_ptr<const IntegerSetExpr>;

enum class SetKind { finite, residue, progression, image, powers, integers, unite, intersect, difference, complement };

struct IntegerSetExpr
{
    SetKind kind = SetKind::finite;
    std::vector<BigInt> elements; // finite
    BigInt a = 0;                 // residue a mod d, progression a + k d
    BigInt d = 1;
    Rational c = 1; // image c k^m, k >= 1
    long m = 1;
    long base = 2; // powers base^k, k >= k0
    long k0 = 0;
    SetPtr x, y;

    bool contains(const BigInt &n) const
    {
        switch (kind) {
            case SetKind::finite: return std::find(elements.begin(), elements.end(), n) != elements.end();
            case SetKind::residue: {
                BigInt r = n - a;
                return mpz_divisible_p(r.get_mpz_t(), d.get_mpz_t()) != 0;
            }
            case SetKind::progression: {
                if (n < a) {
                    return false;
                }
                BigInt r = n - a;
                return mpz_divisible_p(r.get_mpz_t(), d.get_mpz_t()) != 0;
            }
            case SetKind::image: {
                // n = c k^m with k >= 1
                Rational q = Rational(n) / c;
                if (!is_integer(q) || q < 1) {
                    return false;
                }
                BigInt root;
                const BigInt qi = q.get_num();
                if (mpz_root(root.get_mpz_t(), qi.get_mpz_t(), static_cast<unsigned long>(m)) == 0) {
                    return false;
                }
                return root >= 1;
            }
            case SetKind::powers: {
                if (n < 1) {
                    return false;
                }
                BigInt v = 1;
                long k = 0;
                while (v < n) {
                    v *= base;
                    ++k;
                }
                return v == n && k >= k0;
            }
            case SetKind::integers: return true;
            case SetKind::unite: return x->contains(n) || y->contains(n);
            case SetKind::intersect: return x->contains(n) && y->contains(n);
            case SetKind::difference: return x->contains(n) && !y->contains(n);
            case SetKind::complement: return !x->contains(n);
        }
        return false;
    }

    std::string to_string() const
    {
        switch (kind) {
            case SetKind::finite: {
                std::string s = "{";
                for (std::size_t i = 0; i < elements.size(); ++i) {
                    s += (i ? "," : "") + elements[i].get_str();
                }
                return s + "}";
            }
            case SetKind::residue: return "mod(" + a.get_str() + "," + d.get_str() + ")";
            case SetKind::progression: return "ap(" + a.get_str() + "," + d.get_str() + ")";
            case SetKind::image: return "image(" + c.get_str() + "," + std::to_string(m) + ")";
            case SetKind::powers: return "powers(" + std::to_string(base) + "," + std::to_string(k0) + ")";
            case SetKind::integers: return "integers";
            case SetKind::unite: return "(" + x->to_string() + " | " + y->to_string() + ")";
            case SetKind::intersect: return "(" + x->to_string() + " & " + y->to_string() + ")";
            case SetKind::difference: return "(" + x->to_string() + " \\ " + y->to_string() + ")";
            case SetKind::complement: return "~" + x->to_string();
        }
        return "?";
    }

    bool is_leaf() const
    {
        return kind != SetKind::unite && kind != SetKind::intersect && kind != SetKind::difference &&
               kind != SetKind::complement;
    }

    bool periodic_leaf() const { return is_leaf() && kind != SetKind::image && kind != SetKind::powers; }
};

namespace sets
{

inline SetPtr finite(std::vector<BigInt> xs)
{
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::finite;
    s->elements = std::move(xs);
    return s;
}

inline SetPtr residue(const BigInt &a, const BigInt &d)
{
    if (d <= 0) {
        fail(ErrorCode::invalid_argument, "residue modulus must be positive");
    }
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::residue;
    mpz_fdiv_r(s->a.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t());
    s->d = d;
    return s;
}

inline SetPtr progression(const BigInt &a, const BigInt &d)
{
    if (d <= 0) {
        fail(ErrorCode::invalid_argument, "progression step must be positive");
    }
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::progression;
    s->a = a;
    s->d = d;
    return s;
}

inline SetPtr image(const Rational &c, long m)
{
    if (c <= 0 || m < 1) {
        fail(ErrorCode::invalid_argument, "image sets need c > 0 and m >= 1");
    }
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::image;
    s->c = c;
    s->m = m;
    return s;
}

inline SetPtr powers(long base, long k0 = 0)
{
    if (base < 2 || k0 < 0) {
        fail(ErrorCode::invalid_argument, "powers need base >= 2 and k0 >= 0");
    }
    auto f = detail::factor_integer(BigInt(base));
    if (f.size() != 1) {
        fail(ErrorCode::invalid_argument, "powers sets need a prime-power base");
    }
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::powers;
    s->base = base;
    s->k0 = k0;
    return s;
}

inline SetPtr integers()
{
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::integers;
    return s;
}

inline SetPtr positives()
{
    return progression(1, 1);
}

inline SetPtr binary(SetKind k, SetPtr a, SetPtr b)
{
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = k;
    s->x = std::move(a);
    s->y = std::move(b);
    return s;
}

inline SetPtr unite(SetPtr a, SetPtr b)
{
    return binary(SetKind::unite, std::move(a), std::move(b));
}

inline SetPtr intersect(SetPtr a, SetPtr b)
{
    return binary(SetKind::intersect, std::move(a), std::move(b));
}

inline SetPtr difference(SetPtr a, SetPtr b)
{
    return binary(SetKind::difference, std::move(a), std::move(b));
}

inline SetPtr complement(SetPtr a)
{
    auto s = std::make_shared<IntegerSetExpr>();
    s->kind = SetKind::complement;
    s->x = std::move(a);
    return s;
}

} // namespace sets

// True when some leaf is the set of all integers; such sets are measured on
// [-w, w] instead of [1, w].
inline bool spans_integers(const IntegerSetExpr &s)
{
    if (s.kind == SetKind::integers) {
        return true;
    }
    if (s.is_leaf()) {
        return false;
    }
    return spans_integers(*s.x) || (s.y && spans_integers(*s.y));
}

// Membership on one side of zero (n >= 1, or n <= -1 read as |n|): residues mod
// L decide membership except at finitely many listed points.
struct SideDescription
{
    unsigned long modulus = 1;
    std::set<unsigned long> residues;
    std::map<BigInt, bool> exceptions; // |n| -> membership where it differs from the residue rule

    bool rule(const BigInt &n) const
    {
        BigInt r;
        mpz_fdiv_r_ui(r.get_mpz_t(), n.get_mpz_t(), modulus);
        return residues.count(r.get_ui()) != 0;
    }

    bool contains(const BigInt &n) const
    {
        auto it = exceptions.find(n);
        return it != exceptions.end() ? it->second : rule(n);
    }

    BigInt last_exception() const { return exceptions.empty() ? BigInt(0) : exceptions.rbegin()->first; }
};

namespace detail
{

inline SideDescription rebase(const SideDescription &s, unsigned long L)
{
    SideDescription r;
    r.modulus = L;
    for (unsigned long k = 0; k < L; ++k) {
        if (s.residues.count(k % s.modulus)) {
            r.residues.insert(k);
        }
    }
    r.exceptions = s.exceptions;
    return r;
}

template <class Op>
SideDescription combine_sides(const SideDescription &a, const SideDescription &b, Op op)
{
    const unsigned long L = std::lcm(a.modulus, b.modulus);
    SideDescription r;
    r.modulus = L;
    for (unsigned long k = 0; k < L; ++k) {
        if (op(a.residues.count(k % a.modulus) != 0, b.residues.count(k % b.modulus) != 0)) {
            r.residues.insert(k);
        }
    }
    std::set<BigInt> points;
    for (const auto &[n, _] : a.exceptions) {
        points.insert(n);
    }
    for (const auto &[n, _] : b.exceptions) {
        points.insert(n);
    }
    for (const auto &n : points) {
        const bool v = op(a.contains(n), b.contains(n));
        if (v != r.rule(n)) {
            r.exceptions[n] = v;
        }
    }
    return r;
}

// sign = +1 describes n >= 1, sign = -1 describes n <= -1 through |n|.
inline std::optional<SideDescription> side(const IntegerSetExpr &s, int sign)
{
    SideDescription out;
    switch (s.kind) {
        case SetKind::finite:
            for (const auto &e : s.elements) {
                if (sign * e >= 1) {
                    out.exceptions[sign * e] = true;
                }
            }
            return out;
        case SetKind::residue: {
            out.modulus = s.d.get_ui();
            BigInt r = sign * s.a;
            mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), s.d.get_mpz_t());
            out.residues.insert(r.get_ui());
            return out;
        }
        case SetKind::progression: {
            if (sign > 0) {
                out.modulus = s.d.get_ui();
                BigInt r;
                mpz_fdiv_r(r.get_mpz_t(), s.a.get_mpz_t(), s.d.get_mpz_t());
                out.residues.insert(r.get_ui());
                for (BigInt n = r == 0 ? s.d : r; n < s.a; n += s.d) {
                    if (n >= 1) {
                        out.exceptions[n] = false;
                    }
                }
            } else {
                for (BigInt n = s.a; n <= -1; n += s.d) {
                    out.exceptions[-n] = true;
                }
            }
            return out;
        }
        case SetKind::integers: out.residues.insert(0); return out;
        case SetKind::image:
        case SetKind::powers:
            if (sign < 0) {
                return out; // no negative members
            }
            return std::nullopt;
        case SetKind::unite:
        case SetKind::intersect:
        case SetKind::difference: {
            auto a = side(*s.x, sign);
            auto b = side(*s.y, sign);
            if (!a || !b) {
                return std::nullopt;
            }
            if (s.kind == SetKind::unite) {
                return combine_sides(*a, *b, [](bool p, bool q) { return p || q; });
            }
            if (s.kind == SetKind::intersect) {
                return combine_sides(*a, *b, [](bool p, bool q) { return p && q; });
            }
            return combine_sides(*a, *b, [](bool p, bool q) { return p && !q; });
        }
        case SetKind::complement: {
            auto a = side(*s.x, sign);
            if (!a) {
                return std::nullopt;
            }
            SideDescription all;
            all.residues.insert(0);
            return combine_sides(all, *a, [](bool p, bool q) { return p && !q; });
        }
    }
    return std::nullopt;
}

} // namespace detail

inline std::optional<SideDescription> positive_side(const IntegerSetExpr &s)
{
    return detail::side(s, 1);
}

inline std::optional<SideDescription> negative_side(const IntegerSetExpr &s)
{
    return detail::side(s, -1);
}

// ---------------------------------------------------------------------------
// membership identities

namespace detail
{

struct LeafTable
{
    std::vector<const IntegerSetExpr *> free; // non-periodic leaves, one variable per structure
    unsigned long modulus = 1;
    BigInt reach = 0; // every exception and progression start lies within [-reach, reach]
};

inline void collect_leaves(const IntegerSetExpr &s, LeafTable &t)
{
    if (!s.is_leaf()) {
        collect_leaves(*s.x, t);
        if (s.y) {
            collect_leaves(*s.y, t);
        }
        return;
    }
    if (!s.periodic_leaf()) {
        for (auto *f : t.free) {
            if (f->to_string() == s.to_string()) {
                return;
            }
        }
        t.free.push_back(&s);
        return;
    }
    if (s.kind == SetKind::residue || s.kind == SetKind::progression) {
        t.modulus = std::lcm(t.modulus, s.d.get_ui());
    }
    if (s.kind == SetKind::progression) {
        t.reach = std::max(t.reach, BigInt(BigInt(abs(s.a)) + s.d));
    }
    for (const auto &e : s.elements) {
        t.reach = std::max(t.reach, BigInt(abs(e)));
    }
}

// Eventual membership (|n| beyond reach) on one side, with free leaves
// assigned by mask.
inline bool eventual_member(const IntegerSetExpr &s, const LeafTable &t, int sign, unsigned long residue,
                            unsigned long mask)
{
    switch (s.kind) {
        case SetKind::finite: return false;
        case SetKind::residue: {
            BigInt r = BigInt(sign) * BigInt(residue) - s.a;
            return mpz_divisible_p(r.get_mpz_t(), s.d.get_mpz_t()) != 0;
        }
        case SetKind::progression: {
            if (sign < 0) {
                return false;
            }
            BigInt r = BigInt(residue) - s.a;
            return mpz_divisible_p(r.get_mpz_t(), s.d.get_mpz_t()) != 0;
        }
        case SetKind::integers: return true;
        case SetKind::image:
        case SetKind::powers: {
            if (sign < 0) {
                return false;
            }
            for (std::size_t i = 0; i < t.free.size(); ++i) {
                if (t.free[i]->to_string() == s.to_string()) {
                    return (mask >> i) & 1u;
                }
            }
            return false;
        }
        case SetKind::unite:
            return eventual_member(*s.x, t, sign, residue, mask) || eventual_member(*s.y, t, sign, residue, mask);
        case SetKind::intersect:
            return eventual_member(*s.x, t, sign, residue, mask) && eventual_member(*s.y, t, sign, residue, mask);
        case SetKind::difference:
            return eventual_member(*s.x, t, sign, residue, mask) && !eventual_member(*s.y, t, sign, residue, mask);
        case SetKind::complement: return !eventual_member(*s.x, t, sign, residue, mask);
    }
    return false;
}

} // namespace detail

struct EmptinessReport
{
    TruthValue empty;
    std::optional<BigInt> counterexample;
};

// Decides whether a set is empty. Periodic leaves are evaluated by residue,
// other leaves are free booleans; [-T, T] is then scanned exhaustively.
inline EmptinessReport prove_empty(const IntegerSetExpr &s, std::uint64_t scan = 4096)
{
    detail::LeafTable t;
    detail::collect_leaves(s, t);
    if (t.free.size() > 12 || t.modulus > 100000) {
        return {TruthValue::unknown(scan, "too many free leaves"), std::nullopt};
    }
    const BigInt T = t.reach + BigInt(static_cast<unsigned long>(scan));
    for (BigInt n = -T; n <= T; ++n) {
        if (s.contains(n)) {
            Certificate c{CertificateKind::structural, n, t.modulus, "member " + n.get_str()};
            return {TruthValue::no(c), n};
        }
    }
    bool possible = false;
    for (int sign : {1, -1}) {
        for (unsigned long r = 0; r < t.modulus; ++r) {
            for (unsigned long mask = 0; mask < (1ul << t.free.size()); ++mask) {
                if (detail::eventual_member(s, t, sign, r, mask)) {
                    possible = true;
                }
            }
        }
    }
    if (possible) {
        return {TruthValue::unknown(scan, "no member within [-" + T.get_str() + ", " + T.get_str() +
                                              "] but the residue analysis cannot exclude one"),
                std::nullopt};
    }
    Certificate c{CertificateKind::structural, T + 1, t.modulus,
                  "residues mod " + std::to_string(t.modulus) + " with " + std::to_string(t.free.size()) +
                      " free leaves, exhaustive to " + T.get_str()};
    return {TruthValue::yes(c), std::nullopt};
}

inline TruthValue sets_equal(const SetPtr &a, const SetPtr &b)
{
    auto sym = sets::unite(sets::difference(a, b), sets::difference(b, a));
    return prove_empty(*sym).empty;
}

inline TruthValue subset_of(const SetPtr &a, const SetPtr &b)
{
    return prove_empty(*sets::difference(a, b)).empty;
}

inline TruthValue disjoint(const SetPtr &a, const SetPtr &b)
{
    return prove_empty(*sets::intersect(a, b)).empty;
}

} // namespace hyperreal
