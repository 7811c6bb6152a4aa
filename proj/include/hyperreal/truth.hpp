#pragma once

// Order verdicts and four-valued truth. A verdict records which of <, =, >
// hold on an infinite set of indices; a relation is determinately true when
// it holds cofinitely, false when it holds finitely often, indeterminate when
// both it and its negation hold infinitely often.

#include <cstdint>
#include <optional>
#include <string>

#include <hyperreal/scalar.hpp>

namespace hyperreal
{

inline constexpr std::uint64_t default_horizon = 10000;

enum class Order { less, equal, greater };

enum class CertificateKind {
    none,
    exact_identity,  // difference is identically zero
    leading_term,    // sign of the leading coefficient, valid from the witness index
    enclosure,       // atom enclosures separate the values
    case_split,      // residue classes each settled separately
    oscillation,     // dense oscillation of cos/sin at integer arguments
    eventual_offset, // difference is a constant from the witness index on
    structural,      // membership or permutation argument
    horizon_scan,    // evidence only, never a proof
};

inline std::string certificate_kind_name(CertificateKind k)
{
    switch (k) {
        case CertificateKind::none: return "none";
        case CertificateKind::exact_identity: return "exact-identity";
        case CertificateKind::leading_term: return "leading-term";
        case CertificateKind::enclosure: return "enclosure";
        case CertificateKind::case_split: return "case-split";
        case CertificateKind::oscillation: return "oscillation";
        case CertificateKind::eventual_offset: return "eventual-offset";
        case CertificateKind::structural: return "structural";
        case CertificateKind::horizon_scan: return "horizon-scan";
    }
    return "none";
}

struct Certificate
{
    CertificateKind kind = CertificateKind::none;
    // Index from which the stated relation holds at every n (absent when not tracked).
    std::optional<BigInt> witness;
    unsigned long modulus = 1;
    std::string detail;
};

struct OrderVerdict
{
    bool known = false;
    bool lt = false;
    bool eq = false;
    bool gt = false;
    std::uint64_t horizon = default_horizon;
    Certificate cert;

    static OrderVerdict determinate(Order o, Certificate c)
    {
        OrderVerdict v;
        v.known = true;
        v.lt = o == Order::less;
        v.eq = o == Order::equal;
        v.gt = o == Order::greater;
        v.cert = std::move(c);
        return v;
    }

    static OrderVerdict possible(bool lt, bool eq, bool gt, Certificate c)
    {
        OrderVerdict v;
        v.known = true;
        v.lt = lt;
        v.eq = eq;
        v.gt = gt;
        v.cert = std::move(c);
        return v;
    }

    static OrderVerdict unknown(std::uint64_t horizon, std::string detail)
    {
        OrderVerdict v;
        v.horizon = horizon;
        v.cert.kind = CertificateKind::horizon_scan;
        v.cert.detail = std::move(detail);
        return v;
    }

    int count() const { return int(lt) + int(eq) + int(gt); }
    bool is_determinate() const { return known && count() == 1; }
    bool is_indeterminate() const { return known && count() > 1; }

    std::optional<Order> order() const
    {
        if (!is_determinate()) {
            return std::nullopt;
        }
        return lt ? Order::less : (eq ? Order::equal : Order::greater);
    }

    OrderVerdict flipped() const
    {
        OrderVerdict v = *this;
        std::swap(v.lt, v.gt);
        return v;
    }

    std::string word() const
    {
        if (!known) {
            return "unknown";
        }
        if (count() > 1) {
            return "indeterminate";
        }
        return lt ? "less" : (eq ? "equal" : "greater");
    }
};

enum class Relation { lt, le, eq, ne, ge, gt };

enum class Truth { determinately_true, determinately_false, indeterminate, unknown };

inline std::string truth_name(Truth t)
{
    switch (t) {
        case Truth::determinately_true: return "determinately-true";
        case Truth::determinately_false: return "determinately-false";
        case Truth::indeterminate: return "indeterminate";
        case Truth::unknown: return "unknown";
    }
    return "unknown";
}

struct TruthValue
{
    Truth truth = Truth::unknown;
    std::uint64_t horizon = default_horizon;
    Certificate cert;

    static TruthValue yes(Certificate c) { return {Truth::determinately_true, default_horizon, std::move(c)}; }
    static TruthValue no(Certificate c) { return {Truth::determinately_false, default_horizon, std::move(c)}; }
    static TruthValue mixed(Certificate c) { return {Truth::indeterminate, default_horizon, std::move(c)}; }
    static TruthValue unknown(std::uint64_t h, std::string detail)
    {
        Certificate c;
        c.kind = CertificateKind::horizon_scan;
        c.detail = std::move(detail);
        return {Truth::unknown, h, std::move(c)};
    }

    bool is_true() const { return truth == Truth::determinately_true; }
    bool is_false() const { return truth == Truth::determinately_false; }

    std::string to_string() const
    {
        if (truth == Truth::unknown) {
            return "unknown(" + std::to_string(horizon) + ")";
        }
        return truth_name(truth);
    }
};

// Truth of "x R y" given the verdict for (x, y).
inline TruthValue holds(const OrderVerdict &v, Relation r)
{
    if (!v.known) {
        return {Truth::unknown, v.horizon, v.cert};
    }
    auto in = [&](bool l, bool e, bool g) { return (v.lt && l) || (v.eq && e) || (v.gt && g); };
    auto out = [&](bool l, bool e, bool g) { return (v.lt && !l) || (v.eq && !e) || (v.gt && !g); };
    bool l = false, e = false, g = false;
    switch (r) {
        case Relation::lt: l = true; break;
        case Relation::le: l = e = true; break;
        case Relation::eq: e = true; break;
        case Relation::ne: l = g = true; break;
        case Relation::ge: e = g = true; break;
        case Relation::gt: g = true; break;
    }
    const bool some_in = in(l, e, g);
    const bool some_out = out(l, e, g);
    Truth t = some_in && some_out ? Truth::indeterminate : (some_in ? Truth::determinately_true : Truth::determinately_false);
    return {t, v.horizon, v.cert};
}

// Verdict over the union of two infinite index classes.
inline OrderVerdict join_verdicts(const OrderVerdict &a, const OrderVerdict &b)
{
    if (!a.known) {
        return a;
    }
    if (!b.known) {
        return b;
    }
    OrderVerdict v = a;
    v.lt = a.lt || b.lt;
    v.eq = a.eq || b.eq;
    v.gt = a.gt || b.gt;
    if (a.cert.witness && b.cert.witness) {
        v.cert.witness = std::max(*a.cert.witness, *b.cert.witness);
    } else {
        v.cert.witness.reset();
    }
    return v;
}

} // namespace hyperreal
