#pragma once

// Infinite utility streams <u_1, u_2, ...>: value as the sum to w, average as
// value / w, and the overtaking order on partial sums.

#include <hyperreal/numerosity.hpp>
#include <hyperreal/summation.hpp>

namespace hyperreal
{

struct UtilityStream
{
    SeriesPtr terms;                     // u_i for i >= 1
    std::optional<Hyperreal> value_form; // closed value when the summation cannot find one

    Element at(const BigInt &i) const { return terms->at(i); }
    std::string to_string() const { return terms->to_string(); }
};

namespace stream
{

inline UtilityStream of(SeriesPtr s)
{
    return {std::move(s), std::nullopt};
}

inline UtilityStream constant(const Rational &c)
{
    return of(series::constant(ExactScalar(c)));
}

// a * r^(i-1)
inline UtilityStream geometric(const Rational &a, const Rational &r)
{
    return of(series::scale(ExactScalar(a / r), series::geometric(r)));
}

// a + d (i-1)
inline UtilityStream arithmetic(const Rational &a, const Rational &d)
{
    return of(series::add(series::constant(ExactScalar(a - d)), series::scale(ExactScalar(d), series::power(1))));
}

inline UtilityStream indicator(const SetPtr &s)
{
    return of(series::indicator(s));
}

inline UtilityStream generator(const std::string &label, Generator g)
{
    return of(series::generator(label, std::move(g)));
}

inline UtilityStream overlay(const UtilityStream &s, std::map<BigInt, Element> overrides)
{
    for (const auto &[i, _] : overrides) {
        if (i < 1) {
            fail(ErrorCode::invalid_argument, "stream indices start at 1");
        }
    }
    return of(series::overlay(s.terms, std::move(overrides)));
}

// <0, u_1, u_2, ...>
inline UtilityStream delay(const UtilityStream &s)
{
    return of(series::overlay(series::shift(s.terms, -1), {{BigInt(1), Rational(0)}}));
}

inline UtilityStream scale(const Rational &m, const UtilityStream &s)
{
    return of(series::scale(ExactScalar(m), s.terms));
}

inline UtilityStream add(const UtilityStream &a, const UtilityStream &b)
{
    return of(series::add(a.terms, b.terms));
}

inline UtilityStream subtract(const UtilityStream &a, const UtilityStream &b)
{
    return of(series::add(a.terms, series::scale(ExactScalar(-1), b.terms)));
}

// u_i replaced by u_(pi(i)) where pi moves finitely many indices.
inline UtilityStream permute(const UtilityStream &s, const std::map<BigInt, BigInt> &pi)
{
    std::set<BigInt> from, to;
    for (const auto &[i, j] : pi) {
        if (i < 1 || j < 1) {
            fail(ErrorCode::invalid_argument, "stream indices start at 1");
        }
        from.insert(i);
        to.insert(j);
    }
    if (from != to) {
        fail(ErrorCode::invalid_argument, "not a permutation of finitely many indices");
    }
    std::map<BigInt, Element> over;
    for (const auto &[i, j] : pi) {
        if (i != j) {
            over[i] = s.at(j);
        }
    }
    return of(series::overlay(s.terms, over));
}

} // namespace stream

inline Hyperreal value_of(const UtilityStream &s)
{
    if (s.value_form) {
        return *s.value_form;
    }
    return sum_to_omega(s.terms);
}

inline Hyperreal average_of(const UtilityStream &s)
{
    return value_of(s) / Hyperreal::omega();
}

namespace stream_detail
{

// u_w as a symbolic value valid from an index on: the term itself evaluated at
// i = w, so that the sign of the terms can be certified like any other value.
struct TermForm
{
    Symbolic form;
    BigInt from = 1;
};

inline Symbolic geometric_power(const Rational &r)
{
    const Symbolic w = Symbolic::omega();
    if (r > 0) {
        return sym_exp(Symbolic(ExactScalar::log(r)) * w);
    }
    // (-1)^w = 1 - 2 (w - 2 floor(w/2))
    const Symbolic parity = Symbolic(1) - Symbolic(2) * (w - Symbolic(2) * sym_floor(w / Symbolic(2)));
    const Rational a = -r;
    return parity * (a == 1 ? Symbolic(1) : sym_exp(Symbolic(ExactScalar::log(a)) * w));
}

inline Symbolic normal_form_at_omega(const NormalForm &nf)
{
    Symbolic acc;
    for (const auto &[key, c] : nf.terms) {
        acc += Symbolic(c) * sym_pow(Symbolic::omega(), Rational(key.k)) * geometric_power(key.r);
    }
    return acc;
}

inline std::optional<TermForm> term_form(const SeriesExpr &e)
{
    if (auto nf = normal_form(e)) {
        return TermForm{normal_form_at_omega(*nf), 1};
    }
    switch (e.kind) {
        case SeriesKind::sum:
        case SeriesKind::product: {
            auto a = term_form(*e.a);
            auto b = term_form(*e.b);
            if (!a || !b) {
                return std::nullopt;
            }
            return TermForm{e.kind == SeriesKind::sum ? a->form + b->form : a->form * b->form, std::max(a->from, b->from)};
        }
        case SeriesKind::scale: {
            auto a = term_form(*e.a);
            if (!a) {
                return std::nullopt;
            }
            return TermForm{Symbolic(e.c) * a->form, a->from};
        }
        case SeriesKind::overlay: {
            auto a = term_form(*e.a);
            if (!a) {
                return std::nullopt;
            }
            if (!e.overrides.empty()) {
                a->from = std::max(a->from, BigInt(e.overrides.rbegin()->first + 1));
            }
            return a;
        }
        case SeriesKind::indicator: {
            auto side = positive_side(*e.set);
            auto a = term_form(*e.a);
            if (!side || !a) {
                return std::nullopt;
            }
            // [w = r mod L] = floor((w - r)/L) - floor((w - r - 1)/L)
            const Symbolic w = Symbolic::omega();
            const Symbolic L(Rational(side->modulus));
            Symbolic ind;
            for (unsigned long r : side->residues) {
                const Symbolic x = w - Symbolic(Rational(r));
                ind += sym_floor(x / L) - sym_floor((x - Symbolic(1)) / L);
            }
            return TermForm{ind * a->form, std::max(a->from, BigInt(side->last_exception() + 1))};
        }
        default: return std::nullopt;
    }
}

inline Rational exact_term(const SeriesExpr &e, const BigInt &i)
{
    Element v = e.at(i);
    if (!element_exact(v)) {
        fail(ErrorCode::unsupported, "stream term " + i.get_str() + " is not exact");
    }
    return std::get<Rational>(v);
}

} // namespace stream_detail

// Certified sign of every term u_i, i >= 1: +1 when all u_i >= 0, -1 when all
// u_i <= 0, and the verdict that settles it. Unknown when no closed form exists.
struct PointwiseReport
{
    TruthValue all_nonnegative;
    std::optional<BigInt> strict_index; // some i with u_i > 0
};

inline PointwiseReport pointwise_nonnegative(const UtilityStream &d, std::uint64_t scan = 4096)
{
    PointwiseReport rep;
    auto tf = stream_detail::term_form(*d.terms);
    if (!tf) {
        rep.all_nonnegative = TruthValue::unknown(scan, "no closed form for the terms of " + d.to_string());
        return rep;
    }
    const Symbolic neg_part = tf->form;
    auto v = sign_verdict(neg_part);
    BigInt from = tf->from;
    bool tail_ok = false;
    if (v.is_determinate() && !v.lt) {
        tail_ok = true;
        if (v.cert.witness) {
            from = std::max(from, *v.cert.witness);
        }
    }
    if (!tail_ok) {
        // a negative tail, or terms of both signs
        if (v.is_determinate() && v.lt) {
            rep.all_nonnegative = TruthValue::no({CertificateKind::leading_term, v.cert.witness, 1,
                                                  "terms are eventually negative: " + tf->form.to_string()});
        } else if (v.is_indeterminate()) {
            rep.all_nonnegative = TruthValue::no({v.cert.kind, std::nullopt, v.cert.modulus,
                                                  "terms change sign infinitely often: " + tf->form.to_string()});
        } else {
            rep.all_nonnegative = TruthValue::unknown(v.horizon, "sign of " + tf->form.to_string() + " not settled");
        }
        return rep;
    }
    for (BigInt i = 1; i < from + 1; ++i) {
        const Rational t = stream_detail::exact_term(*d.terms, i);
        if (t < 0) {
            rep.all_nonnegative = TruthValue::no({CertificateKind::structural, i, 1, "negative term at " + i.get_str()});
            return rep;
        }
        if (t > 0 && !rep.strict_index) {
            rep.strict_index = i;
        }
    }
    for (BigInt i = from + 1; !rep.strict_index && i <= from + scan; ++i) {
        if (stream_detail::exact_term(*d.terms, i) > 0) {
            rep.strict_index = i;
        }
    }
    rep.all_nonnegative = TruthValue::yes({CertificateKind::leading_term, from, 1,
                                           "terms checked to " + from.get_str() + ", sign of " +
                                               tf->form.to_string() + " settled beyond"});
    return rep;
}

struct OvertakingVerdict
{
    OrderVerdict verdict;
    std::optional<BigInt> T; // x's partial sums exceed y's for all t > T
};

// x over y iff sum_{i<=t} x_i > sum_{i<=t} y_i for all t past some T.
inline OvertakingVerdict overtaking_compare(const UtilityStream &x, const UtilityStream &y,
                                            std::uint64_t horizon = default_horizon)
{
    const UtilityStream d = stream::subtract(x, y);
    const Hyperreal D = value_of(d);
    OvertakingVerdict out;
    if (!D.is_symbolic()) {
        out.verdict = compare(D, Hyperreal(0), horizon);
        return out;
    }
    out.verdict = compare(D, Hyperreal(0), horizon);
    if (!out.verdict.is_determinate() || out.verdict.eq) {
        return out;
    }
    // lower the certified index to the last partial sum that fails
    BigInt W = std::max(out.verdict.cert.witness.value_or(BigInt(1)), D.valid_from());
    const int s = out.verdict.gt ? 1 : -1;
    BigInt T = 0;
    for (BigInt t = W - 1; t >= 1; --t) {
        Element e = D.element(t);
        const double v = element_double(e);
        const bool exact = element_exact(e);
        const bool good = exact ? (s * std::get<Rational>(e) > 0) : s * v > 0;
        if (!good) {
            T = t;
            break;
        }
    }
    out.T = T;
    out.verdict.cert.witness = T + 1;
    return out;
}

struct ParetoAudit
{
    TruthValue premise;   // x_i >= y_i for all i, with strict inequality somewhere
    OrderVerdict values;  // valueOf(x) against valueOf(y)
    TruthValue better;    // x better than y by value
    Hyperreal gain;       // valueOf(x) - valueOf(y)
};

inline ParetoAudit audit_strong_pareto(const UtilityStream &x, const UtilityStream &y,
                                       std::uint64_t horizon = default_horizon)
{
    ParetoAudit a;
    auto pw = pointwise_nonnegative(stream::subtract(x, y), horizon);
    a.premise = pw.all_nonnegative;
    if (a.premise.is_true() && !pw.strict_index) {
        a.premise = TruthValue::no({CertificateKind::structural, std::nullopt, 1, "no strictly larger term found"});
    }
    a.gain = value_of(x) - value_of(y);
    a.values = compare(value_of(x), value_of(y), horizon);
    a.better = holds(a.values, Relation::gt);
    if (a.premise.is_true() && !a.better.is_true()) {
        fail(ErrorCode::invalid_argument, "Strong Pareto premise holds but the values are not ordered: " +
                                              a.gain.to_string());
    }
    return a;
}

struct AnonymityAudit
{
    TruthValue equal;
    BigInt zero_from = 1; // u_i - u_pi(i) = 0 for i >= zero_from
    Hyperreal difference;
};

inline AnonymityAudit audit_finite_anonymity(const UtilityStream &s, const std::map<BigInt, BigInt> &pi)
{
    const UtilityStream p = stream::permute(s, pi);
    AnonymityAudit a;
    for (const auto &[i, j] : pi) {
        if (i != j) {
            a.zero_from = std::max(a.zero_from, BigInt(std::max(i, j) + 1));
        }
    }
    // partial sums agree from the last moved index on
    Rational acc = 0;
    for (BigInt i = 1; i < a.zero_from; ++i) {
        acc += stream_detail::exact_term(*s.terms, i) - stream_detail::exact_term(*p.terms, i);
    }
    if (acc != 0) {
        fail(ErrorCode::invalid_argument, "partial sums differ after the permuted block");
    }
    a.difference = value_of(s) - value_of(p);
    a.equal = TruthValue::yes({CertificateKind::eventual_offset, a.zero_from, 1,
                               "term difference zero from index " + a.zero_from.get_str()});
    return a;
}

namespace stream_detail
{

// Active times of the Dyson stream: [2^k, 2^k + L - 1] for k >= 0.
inline bool dyson_active(const BigInt &t, unsigned long L)
{
    if (t < 1) {
        return false;
    }
    const std::size_t K = mpz_sizeinbase(t.get_mpz_t(), 2) - 1; // floor(log2 t)
    for (std::size_t k = 0; k <= K; ++k) {
        BigInt start;
        mpz_ui_pow_ui(start.get_mpz_t(), 2, k);
        if (t >= start && t < start + L) {
            return true;
        }
    }
    return false;
}

} // namespace stream_detail

// One unit of utility on each active block of length L starting at 2^k.
inline UtilityStream dyson_stream(unsigned long L)
{
    if (L == 0) {
        fail(ErrorCode::invalid_argument, "active length must be positive");
    }
    if (L == 1) {
        return stream::indicator(sets::powers(2, 0));
    }
    auto g = [L](const BigInt &t) -> Element { return Rational(stream_detail::dyson_active(t, L) ? 1 : 0); };
    UtilityStream s = stream::generator("dyson(" + std::to_string(L) + ")", g);
    // count(n) = L (floor(log2 n) + 1) + R(n) with -(L k_L + L - 1) <= R(n) <= 0,
    // k_L the number of overlapping blocks (2^k < L)
    auto count = std::make_shared<Generator>(detail::partial_sums(s.terms, Symbolic(1), Symbolic::omega()));
    auto residual = [count, L](const BigInt &n) -> Rational {
        const long K = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - 1;
        return std::get<Rational>((*count)(n)) - Rational(static_cast<long>(L) * (K + 1));
    };
    long kL = 0;
    while ((1ul << kL) < L) {
        ++kL;
    }
    Bounds b{Symbolic(Rational(-(static_cast<long>(L) * kL + static_cast<long>(L) - 1))), Symbolic(0), false, false, 1};
    const Symbolic lg = sym_log(Symbolic::omega()) / Symbolic(ExactScalar::log(Rational(2)));
    const Symbolic form = Symbolic(Rational(L)) * (sym_floor(lg) + Symbolic(1)) +
                          sym_opaque("R_dyson" + std::to_string(L), residual, b);
    s.value_form = Hyperreal::linked(form, *count, ProofTag::exact_for_all_n);
    return s;
}

} // namespace hyperreal
