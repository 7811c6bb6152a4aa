#pragma once

// Utility spread through space, measured by shells swept out from an origin.

#include <hyperreal/integration.hpp>

namespace hyperreal
{

enum class Geometry { cube, sphere };

inline std::string geometry_name(Geometry g)
{
    return g == Geometry::cube ? "cube" : "sphere";
}

// Shell area at radius r is factor * r^2 and the unit ball has volume factor / 3.
inline ExactScalar surface_factor(Geometry g)
{
    return g == Geometry::cube ? ExactScalar(24) : ExactScalar(4) * ExactScalar::pi();
}

inline ExactScalar unit_volume(Geometry g)
{
    return surface_factor(g) * ExactScalar(make_rational(1, 3));
}

struct SpatialDensity
{
    Geometry geometry = Geometry::cube;
    FuncPtr rho = fn::constant(ExactScalar(0)); // radial average density
    std::vector<std::pair<Rational, Rational>> deltas; // (radius, amount)

    std::string to_string() const
    {
        std::string s = "world(" + geometry_name(geometry) + ", rho=" + rho->to_string();
        if (!deltas.empty()) {
            s += ", deltas=[";
            for (std::size_t i = 0; i < deltas.size(); ++i) {
                s += (i ? ", " : "") + deltas[i].first.get_str() + ":" + deltas[i].second.get_str();
            }
            s += "]";
        }
        return s + ")";
    }
};

inline Rational delta_total(const SpatialDensity &d)
{
    Rational t = 0;
    for (const auto &[r, c] : d.deltas) {
        if (r < 0) {
            fail(ErrorCode::invalid_argument, "delta radius must be non-negative");
        }
        t += c;
    }
    return t;
}

inline Hyperreal shell_integral_value(const SpatialDensity &d)
{
    const FuncPtr shell = fn::mul(d.rho, fn::scale(surface_factor(d.geometry), fn::power(2)));
    return integral(shell, IntegralBound::at(0), IntegralBound::plus_inf()) + Hyperreal(delta_total(d));
}

inline Hyperreal normalized_value(const SpatialDensity &d)
{
    return shell_integral_value(d) / Hyperreal(unit_volume(d.geometry));
}

// Density part averages over the world's volume; each point delta nudges the
// average by its amount over w^3.
inline Hyperreal spatial_average(const SpatialDensity &d)
{
    const Hyperreal w3(sym_pow(Symbolic::omega(), 3));
    const Hyperreal spread = (shell_integral_value(d) - Hyperreal(delta_total(d))) / Hyperreal(unit_volume(d.geometry));
    return (spread + Hyperreal(delta_total(d))) / w3;
}

// The value [v(R_1), v(R_2), ...] of utility within radius n. A claimed closed
// form is audited against v and then carried along.
inline Hyperreal region_sequence_value(const std::string &label, Generator v,
                                       const std::optional<Symbolic> &claimed = std::nullopt)
{
    if (claimed) {
        return Hyperreal::linked(*claimed, std::move(v), ProofTag::exact_for_all_n);
    }
    return Hyperreal::from_sequence(label, std::move(v));
}

// Exact utility inside the cube of half-width n for constant density rho.
inline Generator cube_region_counts(const Rational &rho)
{
    return [rho](const BigInt &n) -> Element {
        const Rational side = Rational(2 * n);
        return rho * side * side * side;
    };
}

} // namespace hyperreal
