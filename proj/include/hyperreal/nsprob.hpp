#pragma once

// Infinitesimal probabilities: the survival function S(t) of a hazard process
// evaluated at t = w.

#include <hyperreal/summation.hpp>

namespace hyperreal
{

enum class HazardKind { flips, decay, harmonic };

inline std::string hazard_kind_name(HazardKind k)
{
    switch (k) {
        case HazardKind::flips: return "flips";
        case HazardKind::decay: return "decay";
        case HazardKind::harmonic: return "harmonic";
    }
    return "?";
}

struct HazardProcess
{
    HazardKind kind = HazardKind::flips;
    Rational survive = make_rational(1, 2); // flips: chance of surviving one flip
    ExactScalar rate = ExactScalar(1);
    ExactScalar start = ExactScalar(0);

    void validate() const
    {
        if (scalar_sign(rate) <= 0) {
            fail(ErrorCode::invalid_argument, "rate must be positive");
        }
        if (scalar_sign(start) < 0) {
            fail(ErrorCode::invalid_argument, "start time must be non-negative");
        }
        if (kind == HazardKind::flips && (survive <= 0 || survive >= 1)) {
            fail(ErrorCode::invalid_argument, "per-flip survival must lie in (0, 1)");
        }
    }

    std::string to_string() const
    {
        std::string s = "proc(" + hazard_kind_name(kind);
        if (kind == HazardKind::flips) {
            s += " base=" + Rational(Rational(1) / survive).get_str();
        }
        return s + " rate=" + rate.to_string() + " start=" + start.to_string() + ")";
    }
};

namespace proc
{

inline HazardProcess flips(const Rational &base, const ExactScalar &rate = ExactScalar(1),
                           const ExactScalar &start = ExactScalar(0))
{
    HazardProcess p{HazardKind::flips, Rational(1) / base, rate, start};
    p.validate();
    return p;
}

inline HazardProcess decay(const ExactScalar &rate, const ExactScalar &start = ExactScalar(0))
{
    HazardProcess p{HazardKind::decay, make_rational(1, 2), rate, start};
    p.validate();
    return p;
}

inline HazardProcess harmonic(const ExactScalar &rate = ExactScalar(1), const ExactScalar &start = ExactScalar(0))
{
    HazardProcess p{HazardKind::harmonic, make_rational(1, 2), rate, start};
    p.validate();
    return p;
}

} // namespace proc

inline ExactScalar survival_function(const HazardProcess &p, const ExactScalar &t)
{
    p.validate();
    if (compare_scalars(t, p.start) < 0) {
        return ExactScalar(1);
    }
    const ExactScalar x = p.rate * (t - p.start);
    switch (p.kind) {
        case HazardKind::flips: {
            const BigInt N = scalar_floor(x + ExactScalar(1));
            if (!N.fits_slong_p()) {
                fail(ErrorCode::unsupported, "too many flips");
            }
            return ExactScalar(rational_pow(p.survive, N.get_si()));
        }
        case HazardKind::decay: return exp(-x);
        case HazardKind::harmonic: return ExactScalar(Rational(1) / Rational(scalar_floor(x + ExactScalar(1))));
    }
    return ExactScalar(1);
}

namespace nsprob_detail
{

inline Symbolic elapsed(const HazardProcess &p)
{
    return Symbolic(p.rate) * (Symbolic::omega() - Symbolic(p.start));
}

// Number of flips by time w: floor(rate (w - start) + 1).
inline Symbolic flips_by_omega(const HazardProcess &p)
{
    return sym_floor(elapsed(p) + Symbolic(1));
}

inline Symbolic power_of(const Rational &q, const Symbolic &e)
{
    return sym_exp(e * Symbolic(ExactScalar::log(q)));
}

} // namespace nsprob_detail

inline Hyperreal survival_at_omega(const HazardProcess &p)
{
    p.validate();
    const Symbolic x = nsprob_detail::elapsed(p);
    Symbolic form(1);
    switch (p.kind) {
        case HazardKind::flips: form = sym_pow_floor(p.survive, x + Symbolic(1)); break;
        case HazardKind::decay: form = sym_exp(-x); break;
        case HazardKind::harmonic: form = sym_reciprocal(sym_floor(x + Symbolic(1))); break;
    }
    // elements are S(n): 1 before the start, the formula from then on
    const BigInt from = std::max(BigInt(1), BigInt(-scalar_floor(-p.start)));
    Generator g = [form, from](const BigInt &n) -> Element {
        if (n < from) {
            return Rational(1);
        }
        if (auto v = form.exact_at(n); v && v->is_rational()) {
            return v->rational_part();
        }
        return form.double_at(n);
    };
    return Hyperreal::linked(form, std::move(g), from > 1 ? ProofTag::eventually_equal : ProofTag::exact_for_all_n, from);
}

// The floor-free surrogate q^(rate (w - start) + 1) of a flip process.
inline Hyperreal smooth_survival_at_omega(const HazardProcess &p)
{
    p.validate();
    if (p.kind != HazardKind::flips) {
        return survival_at_omega(p);
    }
    return Hyperreal(nsprob_detail::power_of(p.survive, nsprob_detail::elapsed(p) + Symbolic(1)));
}

struct IdentityCheck
{
    std::string name;
    TruthValue smooth;      // identity on the floor-free surrogate
    TruthValue floor_exact; // identity on the floor form
    std::optional<ExactScalar> smooth_factor; // lhs / rhs on the surrogate
    Bounds floor_factor_exponent; // lhs / rhs = q^E on the floor form, E within these bounds
    std::string detail;
};

namespace nsprob_detail
{

inline TruthValue exactly_equal(const Symbolic &a, const Symbolic &b)
{
    return holds(compare_symbolic(a, b), Relation::eq);
}

// lhs / rhs = q^E with E an exponent difference; constant E gives an exact factor.
inline void exponent_report(IdentityCheck &c, const Rational &q, const Symbolic &E, bool smooth)
{
    if (smooth) {
        if (E.is_constant()) {
            c.smooth_factor = power_of(q, E).constant_value();
        }
        return;
    }
    Bounds b = E.has_atoms() ? value_bounds(E) : Bounds{E, E, false, false, 1};
    // E counts flips, so its bounds round inward to integers
    if (b.lo.is_rational_constant() && b.hi.is_rational_constant()) {
        const Rational lo = b.lo.constant_value().rational_part();
        const Rational hi = b.hi.constant_value().rational_part();
        const BigInt l = (b.lo_open && is_integer(lo)) ? floor_of(lo) + 1 : ceil_of(lo);
        const BigInt h = (b.hi_open && is_integer(hi)) ? ceil_of(hi) - 1 : floor_of(hi);
        b = Bounds{Symbolic(Rational(l)), Symbolic(Rational(h)), false, false, b.valid_from};
    }
    c.floor_factor_exponent = b;
}

} // namespace nsprob_detail

// The survival identities for flip processes, checked on both forms.
inline std::vector<IdentityCheck> verify_identities(const HazardProcess &p)
{
    using namespace nsprob_detail;
    if (p.kind != HazardKind::flips) {
        fail(ErrorCode::invalid_argument, "identities are stated for flip processes");
    }
    p.validate();
    const Rational q = p.survive;
    const Symbolic x = elapsed(p);
    const Symbolic N = flips_by_omega(p);
    const Symbolic S = survival_at_omega(p).symbolic();
    const Symbolic Ssmooth = smooth_survival_at_omega(p).symbolic();
    const Symbolic inv(Rational(1) / q);
    std::vector<IdentityCheck> out;

    {
        // one flip later: start + 1/rate
        HazardProcess later = p;
        later.start = p.start + p.rate.reciprocal();
        IdentityCheck c;
        c.name = "later-start";
        c.smooth = exactly_equal(smooth_survival_at_omega(later).symbolic(), inv * Ssmooth);
        c.floor_exact = exactly_equal(survival_at_omega(later).symbolic(), inv * S);
        c.smooth_factor = ExactScalar(Rational(1) / q);
        c.floor_factor_exponent = Bounds{Symbolic(-1), Symbolic(-1), false, false, 1};
        c.detail = "starting one flip later multiplies S(w) by " + inv.to_string();
        out.push_back(c);
    }
    {
        HazardProcess fast = p;
        fast.rate = p.rate * ExactScalar(2);
        IdentityCheck c;
        c.name = "rate-doubling";
        const Symbolic lhs_s = smooth_survival_at_omega(fast).symbolic();
        c.smooth = exactly_equal(lhs_s, Ssmooth * Ssmooth);
        // exponents: (2x + 1) - 2(x + 1) on the surrogate, floor(2x+1) - 2 floor(x+1) on the floor form
        exponent_report(c, q, (Symbolic(2) * x + Symbolic(1)) - Symbolic(2) * (x + Symbolic(1)), true);
        const Symbolic E = flips_by_omega(fast) - Symbolic(2) * N;
        exponent_report(c, q, E, false);
        c.floor_exact = exactly_equal(survival_at_omega(fast).symbolic(), S * S);
        c.detail = "S_2rate(w) / S_rate(w)^2 = " + (c.smooth_factor ? c.smooth_factor->to_string() : "?") +
                   " on the surrogate; q^E with E in [" + c.floor_factor_exponent.lo.to_string() + ", " +
                   c.floor_factor_exponent.hi.to_string() + "] on the floor form";
        out.push_back(c);
    }
    {
        // heads on every odd flip: ceil(N/2) of the N flips
        IdentityCheck c;
        c.name = "odd-flips-square-root";
        const Symbolic half_smooth = power_of(q, (x + Symbolic(1)) / Symbolic(2));
        c.smooth = exactly_equal(half_smooth * half_smooth, Ssmooth);
        c.smooth_factor = ExactScalar(1);
        // P(odd flips survive)^2 = q^(2 ceil(N/2)) against S(w) = q^N
        const Symbolic odd_flips = sym_ceil(N / Symbolic(2));
        exponent_report(c, q, Symbolic(2) * odd_flips - N, false);
        c.floor_exact = exactly_equal(Symbolic(2) * odd_flips, N);
        c.detail = "P(odd flips survive)^2 against S(w)";
        out.push_back(c);
    }
    {
        IdentityCheck c;
        c.name = "heads-or-tails-doubling";
        if (q * 2 > 1) {
            c.smooth = TruthValue::no({CertificateKind::structural, std::nullopt, 1, "two outcomes of chance q exceed 1"});
            c.floor_exact = c.smooth;
        } else {
            // two disjoint constant runs, each of chance q per flip
            const Symbolic both = S + S;
            c.floor_exact = exactly_equal(both, Symbolic(2) * S);
            c.smooth = exactly_equal(Ssmooth + Ssmooth, Symbolic(2) * Ssmooth);
            c.smooth_factor = ExactScalar(2);
        }
        c.floor_factor_exponent = Bounds{Symbolic(), Symbolic(), false, false, 1};
        c.detail = "all of one outcome or all of the other is twice either";
        out.push_back(c);
    }
    return out;
}

// S(n) = 1 - sum_{k=1}^{N(n)} q^(k-1) (1 - q) with N(n) the flips by time n,
// checked at every index up to n.
inline TruthValue verify_discrepancy(const HazardProcess &p, std::uint64_t up_to = 1024)
{
    if (p.kind != HazardKind::flips) {
        fail(ErrorCode::invalid_argument, "discrepancy check is stated for flip processes");
    }
    const Hyperreal S = survival_at_omega(p);
    const auto first = series::scale(ExactScalar((Rational(1) - p.survive) / p.survive), series::geometric(p.survive));
    const Symbolic N = nsprob_detail::flips_by_omega(p);
    std::optional<Hyperreal> total;
    try {
        total = sum(first, Symbolic(1), N);
    } catch (const Error &) {
    }
    for (std::uint64_t n = 1; n <= up_to; ++n) {
        const ExactScalar s = survival_function(p, ExactScalar(Rational(static_cast<long>(n))));
        const BigInt flips = scalar_floor(p.rate * (ExactScalar(Rational(static_cast<long>(n))) - p.start) + ExactScalar(1));
        Rational acc = 0;
        for (BigInt k = 1; k <= flips; ++k) {
            acc += rational_pow(p.survive, k.get_si() - 1) * (Rational(1) - p.survive);
        }
        if (!s.is_rational() || s.rational_part() != Rational(1) - acc) {
            return TruthValue::no({CertificateKind::structural, BigInt(static_cast<unsigned long>(n)), 1,
                                   "S(n) differs from 1 - P(event by n) at n=" + std::to_string(n)});
        }
        if (!elements_agree(S.element(n), s.rational_part())) {
            return TruthValue::no({CertificateKind::structural, BigInt(static_cast<unsigned long>(n)), 1,
                                   "S(w) element differs at n=" + std::to_string(n)});
        }
    }
    if (total && total->is_symbolic() && !total->is_periodic()) {
        if (nsprob_detail::exactly_equal(Symbolic(1) - total->symbolic(), S.symbolic()).is_true()) {
            return TruthValue::yes({CertificateKind::exact_identity, std::nullopt, 1,
                                    "1 - sum to N(w) equals S(w) symbolically; elements checked to " +
                                        std::to_string(up_to)});
        }
    }
    return TruthValue::unknown(up_to, "elements agree to " + std::to_string(up_to));
}

} // namespace hyperreal
