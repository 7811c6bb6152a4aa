#pragma once

// Numerosity of an integer set: its indicator summed over [1, w], or over
// [-w, w] when the set is built from all integers.

#include <hyperreal/integer_set.hpp>
#include <hyperreal/hyperreal.hpp>

namespace hyperreal
{

namespace numerosity_detail
{

using detail::make_atom;

// Members of [1, n] (sign +1) or [-n, -1] (sign -1) with n = w, in closed form.
inline std::optional<Symbolic> side_count(const SideDescription &d)
{
    const Symbolic w = Symbolic::omega();
    const Rational L(d.modulus);
    Symbolic acc;
    for (unsigned long r : d.residues) {
        if (r == 0) {
            acc += sym_floor(w / Symbolic(L));
        } else {
            acc += sym_ceil((w - Symbolic(Rational(r - 1))) / Symbolic(L));
        }
    }
    for (const auto &[e, member] : d.exceptions) {
        const bool by_rule = d.rule(e);
        if (member != by_rule) {
            acc += Symbolic(member ? 1 : -1);
        }
    }
    return acc;
}

inline Symbolic image_count(const Rational &c, long m)
{
    return sym_floor(sym_pow(Symbolic::omega() / Symbolic(c), make_rational(1, m)));
}

inline Symbolic powers_count(long base, long k0)
{
    const Symbolic lg = sym_log(Symbolic::omega()) / Symbolic(ExactScalar::log(Rational(base)));
    return sym_floor(lg) + Symbolic(Rational(1 - k0));
}

// ceil(w - (w/c)^(1/m)), the positives outside an image set; equal to
// w - floor((w/c)^(1/m)) at every index.
inline Symbolic image_complement_count(const Rational &c, long m)
{
    const Symbolic arg = Symbolic::omega() - sym_pow(Symbolic::omega() / Symbolic(c), make_rational(1, m));
    return Symbolic::of_atom(make_atom(AtomKind::ceil, arg, "ceil(" + arg.key() + ")"));
}

inline bool is_positives(const IntegerSetExpr &s)
{
    return s.kind == SetKind::progression && s.a == 1 && s.d == 1;
}

// Closed form of the count on [1, w]; nullopt when the structure does not allow one.
inline std::optional<Symbolic> positive_count(const SetPtr &s)
{
    if (auto d = positive_side(*s)) {
        return side_count(*d);
    }
    switch (s->kind) {
        case SetKind::image: return image_count(s->c, s->m);
        case SetKind::powers: return powers_count(s->base, s->k0);
        case SetKind::difference:
            if (is_positives(*s->x) && s->y->kind == SetKind::image) {
                return image_complement_count(s->y->c, s->y->m);
            }
            [[fallthrough]];
        case SetKind::unite:
        case SetKind::intersect: {
            if (s->kind == SetKind::intersect) {
                if (s->x->kind == SetKind::complement) {
                    return positive_count(sets::difference(s->y, s->x->x));
                }
                if (s->y->kind == SetKind::complement) {
                    return positive_count(sets::difference(s->x, s->y->x));
                }
                if (subset_of(s->x, s->y).is_true()) {
                    return positive_count(s->x);
                }
                if (subset_of(s->y, s->x).is_true()) {
                    return positive_count(s->y);
                }
                if (disjoint(s->x, s->y).is_true()) {
                    return Symbolic();
                }
                return std::nullopt;
            }
            auto x = positive_count(s->x);
            if (!x) {
                return std::nullopt;
            }
            auto both = positive_count(sets::intersect(s->x, s->y));
            if (!both) {
                return std::nullopt;
            }
            if (s->kind == SetKind::difference) {
                return *x - *both;
            }
            auto y = positive_count(s->y);
            if (!y) {
                return std::nullopt;
            }
            return *x + *y - *both;
        }
        case SetKind::complement: {
            if (s->x->kind == SetKind::image) {
                return image_complement_count(s->x->c, s->x->m);
            }
            auto x = positive_count(s->x);
            if (!x) {
                return std::nullopt;
            }
            return Symbolic::omega() - *x;
        }
        default: return std::nullopt;
    }
}

inline BigInt form_valid_from(const SetPtr &s)
{
    BigInt v = 1;
    for (int sign : {1, -1}) {
        if (auto d = detail::side(*s, sign)) {
            v = std::max(v, d->last_exception());
        }
    }
    return v;
}

// Running member count on [1, n] or [-n, n].
inline Generator counter(const SetPtr &s, bool symmetric)
{
    struct State
    {
        std::mutex mutex;
        std::vector<BigInt> totals{BigInt(0)};
    };
    auto st = std::make_shared<State>();
    if (symmetric) {
        st->totals[0] = s->contains(0) ? 1 : 0;
    }
    return [s, symmetric, st](const BigInt &n) -> Element {
        if (n < 0) {
            fail(ErrorCode::invalid_argument, "negative index");
        }
        if (!n.fits_ulong_p() || n.get_ui() > (1ul << 22)) {
            fail(ErrorCode::unsupported, "counting index too large: " + n.get_str());
        }
        const unsigned long k = n.get_ui();
        std::lock_guard<std::mutex> lock(st->mutex);
        while (st->totals.size() <= k) {
            const BigInt i(static_cast<unsigned long>(st->totals.size()));
            BigInt t = st->totals.back();
            t += s->contains(i) ? 1 : 0;
            if (symmetric && s->contains(-i)) {
                t += 1;
            }
            st->totals.push_back(t);
        }
        return Rational(st->totals[k]);
    };
}

} // namespace numerosity_detail

inline Hyperreal numerosity(const SetPtr &s)
{
    const bool symmetric = spans_integers(*s);
    std::optional<Symbolic> form;
    if (symmetric) {
        auto pos = positive_side(*s);
        auto neg = negative_side(*s);
        if (pos && neg) {
            form = *numerosity_detail::side_count(*pos) + *numerosity_detail::side_count(*neg) + Symbolic(s->contains(0) ? 1 : 0);
        }
    } else {
        form = numerosity_detail::positive_count(s);
    }
    auto gen = numerosity_detail::counter(s, symmetric);
    const std::string label = "num(" + s->to_string() + ")";
    if (!form) {
        return Hyperreal::from_sequence(label, gen);
    }
    const BigInt from = numerosity_detail::form_valid_from(s);
    return Hyperreal::linked(*form, gen, from > 1 ? ProofTag::eventually_equal : ProofTag::exact_for_all_n, from);
}

inline Hyperreal proportion(const SetPtr &x, const SetPtr &y)
{
    if (prove_empty(*y).empty.is_true()) {
        fail(ErrorCode::division_by_possibly_zero, "proportion within the empty set " + y->to_string());
    }
    return numerosity(sets::intersect(x, y)) / numerosity(y);
}

namespace numerosity_detail
{

// An integer-valued difference strictly inside (-1, 1) is zero.
inline bool integer_valued(const Symbolic &d)
{
    for (const auto &t : d.terms()) {
        if (!t.coeff.is_rational() || !is_integer(t.coeff.rational_part())) {
            return false;
        }
        if (t.atom) {
            if (!t.scale.is_unit() || (t.atom->kind != AtomKind::floor && t.atom->kind != AtomKind::ceil)) {
                return false;
            }
            continue;
        }
        if (!t.scale.is_power_of_omega() || !t.scale.p.is_rational() || !is_integer(t.scale.p.rational_part()) ||
            t.scale.p.rational_part() < 0) {
            return false;
        }
    }
    return true;
}

inline bool above_minus_one(const Bounds &b)
{
    auto v = sign_verdict(b.lo + Symbolic(1));
    return v.is_determinate() && (v.gt || (v.eq && b.lo_open));
}

inline bool below_one(const Bounds &b)
{
    auto v = sign_verdict(Symbolic(1) - b.hi);
    return v.is_determinate() && (v.gt || (v.eq && b.hi_open));
}

} // namespace numerosity_detail

// Sum of the parts' numerosities against the whole's, index by index.
inline TruthValue verify_partition_additivity(const std::vector<SetPtr> &parts, const SetPtr &whole)
{
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            auto r = prove_empty(*sets::intersect(parts[i], parts[j]));
            if (r.counterexample) {
                fail(ErrorCode::overlap_detected, parts[i]->to_string() + " and " + parts[j]->to_string() +
                                                      " share " + r.counterexample->get_str());
            }
            if (!r.empty.is_true()) {
                return r.empty;
            }
        }
    }
    Hyperreal total;
    for (const auto &p : parts) {
        total += numerosity(p);
    }
    const Hyperreal w = numerosity(whole);
    const bool exact = total.is_symbolic() && w.is_symbolic() && !total.is_periodic() && !w.is_periodic() &&
                       total.proof_tag() == ProofTag::exact_for_all_n && w.proof_tag() == ProofTag::exact_for_all_n;
    if (exact) {
        const Symbolic d = total.symbolic() - w.symbolic();
        if (d.is_zero()) {
            return TruthValue::yes({CertificateKind::exact_identity, std::nullopt, 1, "identical closed forms"});
        }
        if (numerosity_detail::integer_valued(d)) {
            const Bounds b = value_bounds(d);
            if (numerosity_detail::above_minus_one(b) && numerosity_detail::below_one(b)) {
                return TruthValue::yes({CertificateKind::enclosure, std::nullopt, 1,
                                        "integer-valued difference " + d.to_string() + " lies in (-1, 1)"});
            }
        }
    }
    // structural: disjoint parts whose union is the whole count the same members
    SetPtr u = parts.empty() ? sets::finite({}) : parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) {
        u = sets::unite(u, parts[i]);
    }
    auto eq = sets_equal(u, whole);
    if (eq.is_true()) {
        return TruthValue::yes({CertificateKind::structural, std::nullopt, eq.cert.modulus,
                                "disjoint parts with union equal to the whole; " + eq.cert.detail});
    }
    return holds(compare(total, w), Relation::eq);
}

// X strictly inside Y: the count difference never decreases and is >= 1 from
// the first missing element on.
inline OrderVerdict compare_by_inclusion(const SetPtr &x, const SetPtr &y)
{
    if (spans_integers(*x) != spans_integers(*y)) {
        return compare(numerosity(x), numerosity(y));
    }
    auto sub = subset_of(x, y);
    if (!sub.is_true()) {
        return compare(numerosity(x), numerosity(y));
    }
    auto missing = prove_empty(*sets::difference(y, x));
    if (missing.counterexample) {
        const BigInt m = abs(*missing.counterexample);
        return OrderVerdict::determinate(
            Order::less, {CertificateKind::structural, std::max(m, BigInt(1)), 1,
                          "subset with missing element " + missing.counterexample->get_str() +
                              "; the count difference is nondecreasing and at least 1 from there"});
    }
    if (missing.empty.is_true()) {
        return OrderVerdict::determinate(Order::equal, {CertificateKind::structural, std::nullopt, 1, "equal sets"});
    }
    return compare(numerosity(x), numerosity(y));
}

} // namespace hyperreal
