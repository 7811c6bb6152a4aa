#pragma once

// Expected values that diverge in the standard sense: sums over utility
// levels in increasing order, quantile integrals, and Cauchy moments.

#include <hyperreal/integration.hpp>
#include <hyperreal/summation.hpp>

namespace hyperreal
{

struct DiscreteDistribution
{
    std::string name;
    SetPtr support;          // utility levels
    SeriesPtr mass;          // P(u) on the support
    SeriesPtr weighted;      // u * P(u) on the support
    std::map<BigInt, Rational> table; // finite distributions only
    std::optional<Hyperreal> total;   // total probability to w, when known in closed form

    bool finite() const { return !table.empty(); }

    Rational probability(const BigInt &u) const
    {
        if (finite()) {
            auto it = table.find(u);
            return it == table.end() ? Rational(0) : it->second;
        }
        if (!support->contains(u)) {
            return 0;
        }
        Element e = mass->at(u);
        if (!element_exact(e)) {
            fail(ErrorCode::unsupported, name + ": probabilities must be exact rationals");
        }
        return std::get<Rational>(e);
    }
};

namespace dist
{

inline DiscreteDistribution table(const std::map<BigInt, Rational> &t, const std::string &name = "")
{
    if (t.empty()) {
        fail(ErrorCode::invalid_argument, "empty probability table");
    }
    Rational total = 0;
    std::map<BigInt, Element> weights, masses;
    std::vector<BigInt> levels;
    for (const auto &[u, p] : t) {
        if (u < 0) {
            fail(ErrorCode::invalid_argument, "utility levels must be non-negative");
        }
        if (p < 0) {
            fail(ErrorCode::invalid_argument, "negative probability at " + u.get_str());
        }
        total += p;
        weights[u] = Rational(u) * p;
        masses[u] = p;
        levels.push_back(u);
    }
    if (total != 1) {
        fail(ErrorCode::invalid_argument, "probabilities sum to " + total.get_str());
    }
    DiscreteDistribution d;
    std::string label;
    for (const auto &[u, p] : t) {
        label += (label.empty() ? "" : ",") + u.get_str() + ":" + p.get_str();
    }
    d.name = name.empty() ? "table(" + label + ")" : name;
    d.support = sets::finite(levels);
    d.mass = series::overlay(series::constant(ExactScalar(0)), masses);
    d.weighted = series::overlay(series::constant(ExactScalar(0)), weights);
    d.table = t;
    d.total = Hyperreal(1);
    return d;
}

// Utility 2^k with probability 2^-k, k >= 1.
inline DiscreteDistribution st_petersburg()
{
    DiscreteDistribution d;
    d.name = "stpetersburg";
    d.support = sets::powers(2, 1);
    d.mass = series::generator("1/u", [](const BigInt &u) -> Element { return Rational(1) / Rational(u); });
    d.weighted = series::constant(ExactScalar(1));
    const Symbolic lg = sym_log(Symbolic::omega()) / Symbolic(ExactScalar::log(Rational(2)));
    d.total = Hyperreal(Symbolic(1) - sym_pow_floor(make_rational(1, 2), lg));
    return d;
}

// Utility k with probability 2^-k, k >= 1.
inline DiscreteDistribution geometric_levels()
{
    DiscreteDistribution d;
    d.name = "levels(k:2^-k)";
    d.support = sets::positives();
    d.mass = series::geometric(make_rational(1, 2));
    d.weighted = series::product(series::power(1), series::geometric(make_rational(1, 2)));
    d.total = Hyperreal(Symbolic(1) - sym_exp(Symbolic(ExactScalar::log(Rational(2))) * -Symbolic::omega()));
    return d;
}

} // namespace dist

// Sum of u * P(u) over the levels u = 1..w in increasing order.
inline Hyperreal expected_value_by_levels(const DiscreteDistribution &d)
{
    if (d.finite()) {
        return sum_to_omega(d.weighted, 0);
    }
    return sum_to_omega(series::indicator(d.support, d.weighted));
}

inline Hyperreal scale_by_probability(const Rational &p, const Hyperreal &v)
{
    if (p <= 0 || p > 1) {
        fail(ErrorCode::invalid_argument, "probability must lie in (0, 1]");
    }
    return Hyperreal(p) * v;
}

inline Hyperreal pascal_value(const ExactScalar &k, const Rational &p)
{
    if (scalar_sign(k) <= 0) {
        fail(ErrorCode::invalid_argument, "payoff multiple must be positive");
    }
    if (p <= 0 || p > 1) {
        fail(ErrorCode::invalid_argument, "probability must lie in (0, 1]");
    }
    return Hyperreal(Symbolic(k * ExactScalar(p)) * Symbolic::omega());
}

inline Hyperreal hierarchy_value(const Rational &k)
{
    if (k <= 0 || k >= 1) {
        fail(ErrorCode::invalid_argument, "exponent must lie in (0, 1)");
    }
    return Hyperreal(Symbolic::monomial(ExactScalar(1), GrowthMonomial::power(ExactScalar(k))));
}

namespace expectation_detail
{

// int_0^(1 - 1/n) Q(t) dt for the step quantile of d, walking levels upward.
inline Generator quantile_partial(const DiscreteDistribution &d)
{
    return [d](const BigInt &n) -> Element {
        if (n < 1) {
            fail(ErrorCode::invalid_argument, "index must be positive");
        }
        const Rational top = Rational(1) - Rational(1) / Rational(n);
        Rational cum = 0;
        Rational acc = 0;
        auto visit = [&](const BigInt &u, const Rational &p) {
            const Rational take = std::min(p, Rational(top - cum));
            if (take > 0) {
                acc += Rational(u) * take;
            }
            cum += p;
            return cum >= top;
        };
        if (d.finite()) {
            for (const auto &[u, p] : d.table) {
                if (visit(u, p)) {
                    break;
                }
            }
            return acc;
        }
        // infinite support: members of powers sets are reached by doubling
        if (d.support->kind == SetKind::powers) {
            BigInt u;
            mpz_ui_pow_ui(u.get_mpz_t(), d.support->base, d.support->k0);
            for (int guard = 0; guard < 100000; ++guard, u *= d.support->base) {
                if (visit(u, d.probability(u))) {
                    return acc;
                }
            }
            fail(ErrorCode::unsupported, "quantile walk did not reach 1 - 1/" + n.get_str());
        }
        for (BigInt u = 0; u < BigInt(1ul << 22); ++u) {
            if (d.support->contains(u) && visit(u, d.probability(u))) {
                return acc;
            }
        }
        fail(ErrorCode::unsupported, "quantile walk did not reach 1 - 1/" + n.get_str());
    };
}

} // namespace expectation_detail

// Integral of the quantile function over [0, 1 - 1/w].
inline Hyperreal expected_value_by_quantile(const DiscreteDistribution &d)
{
    auto gen = expectation_detail::quantile_partial(d);
    const Symbolic w = Symbolic::omega();
    if (d.finite()) {
        // past 1 - p_max the top level M is cut short by 1/w: EV - M/w
        const auto &[M, pM] = *d.table.rbegin();
        Rational ev = 0;
        for (const auto &[u, p] : d.table) {
            ev += Rational(u) * p;
        }
        const Symbolic form = Symbolic(ev) - Symbolic(Rational(M)) / w;
        BigInt from;
        const Rational inv = Rational(1) / pM;
        from = ceil_of(inv);
        return Hyperreal::linked(form, gen, from > 1 ? ProofTag::eventually_equal : ProofTag::exact_for_all_n,
                                 std::max(from, BigInt(1)));
    }
    if (d.name == "stpetersburg") {
        // K full levels plus the cut level 2^(K+1): K + 2 - 2^(K+1)/w, K = floor(log2 w)
        const Symbolic lg = sym_log(w) / Symbolic(ExactScalar::log(Rational(2)));
        const Symbolic form = sym_floor(lg) + Symbolic(2) - Symbolic(2) * sym_pow_floor(2, lg) / w;
        return Hyperreal::linked(form, gen, ProofTag::exact_for_all_n);
    }
    return Hyperreal::from_sequence("quantile-ev(" + d.name + ")", gen);
}

struct ContinuousDistribution
{
    std::string name;
    FuncPtr density;
    IntegralBound lo = IntegralBound::minus_inf();
    IntegralBound hi = IntegralBound::plus_inf();
};

namespace dist
{

inline ContinuousDistribution cauchy()
{
    return {"cauchy", fn::scale(ExactScalar::pi().reciprocal(), fn::inv_quad()), IntegralBound::minus_inf(),
            IntegralBound::plus_inf()};
}

} // namespace dist

inline Hyperreal moment(const ContinuousDistribution &d, unsigned k)
{
    return integral(fn::mul(fn::power(k), d.density), d.lo, d.hi);
}

struct CauchyMoments
{
    Hyperreal mean;
    Hyperreal variance;
    Symbolic finite_part_shadow; // shadow(variance - 2w/pi)
    Bounds enclosure;            // of the variance
};

inline CauchyMoments moments_of_cauchy()
{
    const auto d = dist::cauchy();
    CauchyMoments m;
    m.mean = moment(d, 1);
    m.variance = moment(d, 2) - m.mean * m.mean;
    const Symbolic v = m.variance.symbolic();
    const Symbolic lead = Symbolic(ExactScalar(2) / ExactScalar::pi()) * Symbolic::omega();
    m.finite_part_shadow = shadow(v - lead);
    m.enclosure = value_bounds(v);
    return m;
}

} // namespace hyperreal
