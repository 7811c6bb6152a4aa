#pragma once

// Hyperreal values. A value is an optional opaque sequence (known only by its
// elements) plus a symbolic part that may split by residue class of w. Every
// value also exposes its element sequence <x_1, x_2, ...>.

#include <atomic>
#include <cmath>
#include <mutex>
#include <variant>

#include <hyperreal/symbolic.hpp>

namespace hyperreal
{

using Element = std::variant<Rational, double>;

inline double element_double(const Element &e)
{
    if (auto q = std::get_if<Rational>(&e)) {
        return q->get_d();
    }
    return std::get<double>(e);
}

inline bool element_exact(const Element &e)
{
    return std::holds_alternative<Rational>(e);
}

inline std::string element_string(const Element &e)
{
    if (auto q = std::get_if<Rational>(&e)) {
        return q->get_str();
    }
    std::ostringstream os;
    os.precision(17);
    os << std::get<double>(e);
    return os.str();
}

namespace detail
{

template <class RF, class DF>
Element element_op(const Element &a, const Element &b, RF rf, DF df)
{
    if (element_exact(a) && element_exact(b)) {
        return rf(std::get<Rational>(a), std::get<Rational>(b));
    }
    return df(element_double(a), element_double(b));
}

} // namespace detail

inline Element operator+(const Element &a, const Element &b)
{
    return detail::element_op(a, b, [](const Rational &x, const Rational &y) { return Element(Rational(x + y)); },
                              [](double x, double y) { return Element(x + y); });
}

inline Element operator-(const Element &a, const Element &b)
{
    return detail::element_op(a, b, [](const Rational &x, const Rational &y) { return Element(Rational(x - y)); },
                              [](double x, double y) { return Element(x - y); });
}

inline Element operator*(const Element &a, const Element &b)
{
    return detail::element_op(a, b, [](const Rational &x, const Rational &y) { return Element(Rational(x * y)); },
                              [](double x, double y) { return Element(x * y); });
}

inline Element operator/(const Element &a, const Element &b)
{
    return detail::element_op(
        a, b,
        [](const Rational &x, const Rational &y) {
            if (y == 0) {
                fail(ErrorCode::division_by_possibly_zero, "element division by zero");
            }
            return Element(Rational(x / y));
        },
        [](double x, double y) { return Element(x / y); });
}

// Doubles never certify equality; they agree when within 1e-9 relative.
inline bool elements_agree(const Element &a, const Element &b, double rel = 1e-9)
{
    if (element_exact(a) && element_exact(b)) {
        return std::get<Rational>(a) == std::get<Rational>(b);
    }
    const double x = element_double(a);
    const double y = element_double(b);
    return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
}

using Generator = std::function<Element(const BigInt &)>;

// Lazily evaluated element sequence with a cache for small indices.
class Sequence
{
public:
    static constexpr std::uint64_t cache_limit = 1u << 16;

    Sequence() = default;
    explicit Sequence(Generator g) : state_(std::make_shared<State>()) { state_->gen = std::move(g); }

    bool valid() const { return state_ != nullptr; }

    Element at(const BigInt &n) const
    {
        if (n < 1) {
            fail(ErrorCode::invalid_argument, "sequence index must be positive");
        }
        if (n.fits_ulong_p() && n.get_ui() <= cache_limit) {
            const auto k = n.get_ui();
            {
                std::lock_guard lock(state_->mutex);
                if (state_->cache.size() > k && state_->cache[k]) {
                    return *state_->cache[k];
                }
            }
            Element v = state_->gen(n);
            std::lock_guard lock(state_->mutex);
            if (state_->cache.size() <= k) {
                state_->cache.resize(k + 1);
            }
            state_->cache[k] = v;
            return v;
        }
        return state_->gen(n);
    }

    Element at(std::uint64_t n) const { return at(BigInt(static_cast<unsigned long>(n))); }

private:
    struct State
    {
        Generator gen;
        std::mutex mutex;
        std::vector<std::optional<Element>> cache;
    };
    std::shared_ptr<State> state_;
};

struct PeriodicForm
{
    unsigned long modulus = 1;
    std::vector<Symbolic> branches{Symbolic()};

    const Symbolic &branch(const BigInt &n) const
    {
        BigInt r;
        mpz_fdiv_r_ui(r.get_mpz_t(), n.get_mpz_t(), modulus);
        return branches[r.get_ui()];
    }

    const Symbolic &residue(unsigned long r) const { return branches[r % modulus]; }

    // Merges equal branches and reduces the modulus to the true period.
    void normalize()
    {
        for (unsigned long d = 1; d < modulus; ++d) {
            if (modulus % d != 0) {
                continue;
            }
            bool ok = true;
            for (unsigned long r = 0; r < modulus && ok; ++r) {
                ok = branches[r] == branches[r % d];
            }
            if (ok) {
                branches.resize(d);
                modulus = d;
                return;
            }
        }
    }
};

enum class ProofTag { exact_for_all_n, eventually_equal, enclosure };

inline std::string proof_tag_name(ProofTag t)
{
    switch (t) {
        case ProofTag::exact_for_all_n: return "exact-for-all-n";
        case ProofTag::eventually_equal: return "eventually-equal";
        case ProofTag::enclosure: return "enclosure";
    }
    return "?";
}

struct OpaqueBase
{
    std::uint64_t id = 0;
    Sequence seq;
    std::string label;
};

inline std::uint64_t next_opaque_id()
{
    static std::atomic<std::uint64_t> counter{1};
    return counter++;
}

inline unsigned long lcm_ul(unsigned long a, unsigned long b)
{
    return std::lcm(a, b);
}

class Hyperreal
{
public:
    Hyperreal() : Hyperreal(Symbolic()) {}
    Hyperreal(long v) : Hyperreal(Symbolic(v)) {}
    Hyperreal(int v) : Hyperreal(Symbolic(v)) {}
    Hyperreal(const Rational &q) : Hyperreal(Symbolic(q)) {}
    Hyperreal(const ExactScalar &s) : Hyperreal(Symbolic(s)) {}
    Hyperreal(const Symbolic &s)
    {
        form_.branches = {s};
        build_sequence();
    }
    explicit Hyperreal(PeriodicForm f)
    {
        form_ = std::move(f);
        form_.normalize();
        build_sequence();
    }

    static Hyperreal omega() { return Hyperreal(Symbolic::omega()); }

    static Hyperreal from_real(const ExactScalar &s) { return Hyperreal(s); }

    // A value known only through its elements.
    static Hyperreal from_sequence(const std::string &label, Generator g)
    {
        Hyperreal h;
        h.base_ = OpaqueBase{next_opaque_id(), Sequence(std::move(g)), label};
        h.build_sequence();
        return h;
    }

    // A symbolic form whose elements come from an independent generator; the
    // two are audited against each other on a prefix.
    static Hyperreal linked(PeriodicForm f, Generator g, ProofTag tag, const BigInt &valid_from = 1,
                            std::uint64_t audit = 64)
    {
        Hyperreal h(std::move(f));
        h.tag_ = tag;
        h.valid_from_ = valid_from;
        h.seq_ = Sequence(std::move(g));
        const BigInt start = tag == ProofTag::exact_for_all_n ? BigInt(1) : valid_from;
        for (BigInt n = start; n < start + audit; ++n) {
            Element want = h.form_element(n);
            Element got = h.seq_.at(n);
            if (!elements_agree(want, got)) {
                fail(ErrorCode::invalid_argument, "generator disagrees with the closed form " + h.to_string() +
                                                      " at n=" + n.get_str() + ": " + element_string(got) +
                                                      " vs " + element_string(want));
            }
        }
        return h;
    }

    static Hyperreal linked(const Symbolic &s, Generator g, ProofTag tag, const BigInt &valid_from = 1)
    {
        PeriodicForm f;
        f.branches = {s};
        return linked(f, std::move(g), tag, valid_from);
    }

    bool is_symbolic() const { return !base_.has_value(); }
    bool is_sequence_only() const { return base_.has_value(); }
    bool is_periodic() const { return form_.modulus > 1; }
    const PeriodicForm &form() const { return form_; }
    const std::optional<OpaqueBase> &base() const { return base_; }
    ProofTag proof_tag() const { return tag_; }
    const BigInt &valid_from() const { return valid_from_; }

    const Symbolic &symbolic() const
    {
        if (base_ || form_.modulus != 1) {
            fail(ErrorCode::invalid_argument, "value has no single closed form: " + to_string());
        }
        return form_.branches[0];
    }

    Element element(const BigInt &n) const { return seq_.at(n); }
    Element element(std::uint64_t n) const { return seq_.at(n); }
    double element_double_at(std::uint64_t n) const { return element_double(seq_.at(n)); }
    const Sequence &sequence() const { return seq_; }

    std::vector<Element> prefix(std::uint64_t k) const
    {
        std::vector<Element> out;
        for (std::uint64_t n = 1; n <= k; ++n) {
            out.push_back(seq_.at(n));
        }
        return out;
    }

    std::string to_string(bool unicode = false) const
    {
        const std::string w = unicode ? "ω" : "w";
        std::string s;
        if (form_.modulus == 1) {
            s = form_.branches[0].to_string(w);
        } else {
            s = "{";
            for (unsigned long r = 0; r < form_.modulus; ++r) {
                s += (r ? "; " : "") + form_.branches[r].to_string(w) + " | ";
                if (form_.modulus == 2) {
                    s += w + (r == 0 ? " even" : " odd");
                } else {
                    s += w + " = " + std::to_string(r) + " mod " + std::to_string(form_.modulus);
                }
            }
            s += "}";
        }
        if (base_) {
            const bool zero = form_.modulus == 1 && form_.branches[0].is_zero();
            if (zero) {
                return base_->label;
            }
            return base_->label + " + " + s;
        }
        return s;
    }

    Hyperreal operator-() const { return map_branches([](const Symbolic &s) { return -s; }, negate_element, "-"); }

    friend Hyperreal operator+(const Hyperreal &a, const Hyperreal &b)
    {
        return combine(a, b, [](const Symbolic &x, const Symbolic &y) { return x + y; },
                       [](const Element &x, const Element &y) { return x + y; }, 1);
    }

    friend Hyperreal operator-(const Hyperreal &a, const Hyperreal &b)
    {
        return combine(a, b, [](const Symbolic &x, const Symbolic &y) { return x - y; },
                       [](const Element &x, const Element &y) { return x - y; }, -1);
    }

    friend Hyperreal operator*(const Hyperreal &a, const Hyperreal &b)
    {
        return combine(a, b, [](const Symbolic &x, const Symbolic &y) { return x * y; },
                       [](const Element &x, const Element &y) { return x * y; }, 0);
    }

    friend Hyperreal operator/(const Hyperreal &a, const Hyperreal &b)
    {
        return combine(a, b, [](const Symbolic &x, const Symbolic &y) { return x / y; },
                       [](const Element &x, const Element &y) { return x / y; }, 0);
    }

    Hyperreal &operator+=(const Hyperreal &o) { return *this = *this + o; }
    Hyperreal &operator-=(const Hyperreal &o) { return *this = *this - o; }
    Hyperreal &operator*=(const Hyperreal &o) { return *this = *this * o; }
    Hyperreal &operator/=(const Hyperreal &o) { return *this = *this / o; }

    // Applies a symbolic map branch by branch; opaque values fall back to elements.
    template <class SF>
    Hyperreal map_branches(SF sf, std::function<Element(const Element &)> ef, const std::string &name = "f") const
    {
        if (base_) {
            auto self = *this;
            return from_sequence(name + "(" + to_string() + ")",
                                 [self, ef](const BigInt &n) { return ef(self.element(n)); });
        }
        PeriodicForm f;
        f.modulus = form_.modulus;
        f.branches.clear();
        for (const auto &b : form_.branches) {
            f.branches.push_back(sf(b));
        }
        return Hyperreal(f);
    }

private:
    static Element negate_element(const Element &e) { return Element(Rational(0)) - e; }

    template <class SF, class EF>
    static Hyperreal combine(const Hyperreal &a, const Hyperreal &b, SF sf, EF ef, int additive)
    {
        // B + s (+/-) B' + s' keeps the opaque part when it cancels or is shared once
        if (a.base_ || b.base_) {
            if (additive != 0) {
                const bool same = a.base_ && b.base_ && a.base_->id == b.base_->id;
                if (same && additive < 0) {
                    return Hyperreal(combine_forms(a.form_, b.form_, sf));
                }
                if (!(a.base_ && b.base_) && (additive > 0 || a.base_)) {
                    Hyperreal r(combine_forms(a.form_, b.form_, sf));
                    r.base_ = a.base_ ? a.base_ : b.base_;
                    r.build_sequence();
                    return r;
                }
            }
            auto x = a;
            auto y = b;
            std::string op = additive > 0 ? " + " : (additive < 0 ? " - " : " * ");
            return from_sequence("(" + x.to_string() + op + y.to_string() + ")",
                                 [x, y, ef](const BigInt &n) { return ef(x.element(n), y.element(n)); });
        }
        return Hyperreal(combine_forms(a.form_, b.form_, sf));
    }

    template <class SF>
    static PeriodicForm combine_forms(const PeriodicForm &a, const PeriodicForm &b, SF sf)
    {
        PeriodicForm f;
        f.modulus = lcm_ul(a.modulus, b.modulus);
        f.branches.clear();
        for (unsigned long r = 0; r < f.modulus; ++r) {
            f.branches.push_back(sf(a.residue(r), b.residue(r)));
        }
        return f;
    }

    Element form_element(const BigInt &n) const
    {
        const Symbolic &b = form_.branch(n);
        if (auto v = b.exact_at(n); v && v->is_rational()) {
            return v->rational_part();
        }
        return b.double_at(n);
    }

    void build_sequence()
    {
        auto form = form_;
        auto base = base_;
        seq_ = Sequence([form, base](const BigInt &n) -> Element {
            const Symbolic &b = form.branch(n);
            Element v;
            if (auto e = b.exact_at(n); e && e->is_rational()) {
                v = e->rational_part();
            } else {
                v = b.double_at(n);
            }
            if (base) {
                v = base->seq.at(n) + v;
            }
            return v;
        });
    }

    PeriodicForm form_;
    std::optional<OpaqueBase> base_;
    Sequence seq_;
    ProofTag tag_ = ProofTag::exact_for_all_n;
    BigInt valid_from_ = 1;
};

inline std::ostream &operator<<(std::ostream &os, const Hyperreal &h)
{
    return os << h.to_string();
}

// ---------------------------------------------------------------------------
// comparison

namespace detail
{

inline OrderVerdict scan_verdict(const Hyperreal &a, const Hyperreal &b, std::uint64_t horizon)
{
    std::uint64_t less = 0, equal = 0, greater = 0;
    const std::uint64_t limit = std::min<std::uint64_t>(horizon, Sequence::cache_limit);
    for (std::uint64_t n = 1; n <= limit; ++n) {
        const Element x = a.element(n);
        const Element y = b.element(n);
        if (elements_agree(x, y, 0.0) && element_exact(x) && element_exact(y)) {
            ++equal;
        } else if (element_double(x) < element_double(y)) {
            ++less;
        } else if (element_double(x) > element_double(y)) {
            ++greater;
        } else {
            ++equal;
        }
    }
    return OrderVerdict::unknown(horizon, "scan to " + std::to_string(limit) + ": less " + std::to_string(less) +
                                              ", equal " + std::to_string(equal) + ", greater " +
                                              std::to_string(greater));
}

} // namespace detail

inline OrderVerdict compare(const Hyperreal &a, const Hyperreal &b, std::uint64_t horizon = default_horizon)
{
    const bool shared = a.base() && b.base() && a.base()->id == b.base()->id;
    if ((a.base() || b.base()) && !shared) {
        return detail::scan_verdict(a, b, horizon);
    }
    const unsigned long L = lcm_ul(a.form().modulus, b.form().modulus);
    std::optional<OrderVerdict> acc;
    for (unsigned long r = 0; r < L; ++r) {
        auto v = sign_verdict(a.form().residue(r) - b.form().residue(r), horizon);
        v.horizon = horizon;
        if (!v.known) {
            return v;
        }
        acc = acc ? join_verdicts(*acc, v) : v;
    }
    if (L > 1) {
        acc->cert.kind = CertificateKind::case_split;
        acc->cert.modulus = L;
        acc->cert.detail = "residues mod " + std::to_string(L);
    }
    if (shared) {
        acc->cert.kind = CertificateKind::eventual_offset;
        acc->cert.detail = "shared sequence, offset " + (a - b).to_string();
    }
    acc->horizon = horizon;
    return *acc;
}

inline TruthValue relation(const Hyperreal &a, Relation r, const Hyperreal &b, std::uint64_t horizon = default_horizon)
{
    return holds(compare(a, b, horizon), r);
}

// Truth of x in {c_1, ..., c_k}, settled per residue class.
inline TruthValue member_of(const Hyperreal &x, const std::vector<Hyperreal> &set,
                            std::uint64_t horizon = default_horizon)
{
    bool some_in = false, some_out = false;
    for (const auto &c : set) {
        if (c.base() || x.base()) {
            return TruthValue::unknown(horizon, "membership of an opaque sequence");
        }
    }
    unsigned long L = x.form().modulus;
    for (const auto &c : set) {
        L = lcm_ul(L, c.form().modulus);
    }
    for (unsigned long r = 0; r < L; ++r) {
        bool in = false, all_out = true;
        for (const auto &c : set) {
            auto v = sign_verdict(x.form().residue(r) - c.form().residue(r), horizon);
            if (v.is_determinate() && v.eq) {
                in = true;
            }
            if (!v.known || v.eq) {
                all_out = false;
            }
        }
        if (in) {
            some_in = true;
        } else if (all_out) {
            some_out = true;
        } else {
            return TruthValue::unknown(horizon, "membership undecided on residue " + std::to_string(r));
        }
    }
    Certificate cert{CertificateKind::case_split, std::nullopt, L, "residues mod " + std::to_string(L)};
    if (some_in && some_out) {
        return TruthValue::mixed(cert);
    }
    return some_in ? TruthValue::yes(cert) : TruthValue::no(cert);
}

// ---------------------------------------------------------------------------
// functions

namespace detail
{

inline Element apply_double(const Element &e, double (*f)(double))
{
    return f(element_double(e));
}

} // namespace detail

inline Hyperreal hr_floor(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_floor(s); },
                          [](const Element &e) -> Element {
                              if (element_exact(e)) {
                                  return Rational(floor_of(std::get<Rational>(e)));
                              }
                              return std::floor(element_double(e));
                          });
}

inline Hyperreal hr_ceil(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_ceil(s); },
                          [](const Element &e) -> Element {
                              if (element_exact(e)) {
                                  return Rational(ceil_of(std::get<Rational>(e)));
                              }
                              return std::ceil(element_double(e));
                          });
}

inline Hyperreal hr_exp(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_exp(s); },
                          [](const Element &e) { return detail::apply_double(e, &std::exp); });
}

inline Hyperreal hr_log(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_log(s); },
                          [](const Element &e) { return detail::apply_double(e, &std::log); });
}

inline Hyperreal hr_pow(const Hyperreal &x, const Rational &r)
{
    return x.map_branches([r](const Symbolic &s) { return sym_pow(s, r); },
                          [r](const Element &e) -> Element { return std::pow(element_double(e), r.get_d()); });
}

inline Hyperreal hr_sqrt(const Hyperreal &x)
{
    return hr_pow(x, make_rational(1, 2));
}

inline Hyperreal hr_cos(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_cos(s); },
                          [](const Element &e) { return detail::apply_double(e, &std::cos); });
}

inline Hyperreal hr_sin(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_sin(s); },
                          [](const Element &e) { return detail::apply_double(e, &std::sin); });
}

inline Hyperreal hr_atan(const Hyperreal &x)
{
    return x.map_branches([](const Symbolic &s) { return sym_atan(s); },
                          [](const Element &e) { return detail::apply_double(e, &std::atan); });
}

inline Hyperreal hr_abs(const Hyperreal &x)
{
    return x.map_branches(
        [](const Symbolic &s) {
            auto v = sign_verdict(s);
            if (!v.is_determinate()) {
                fail(ErrorCode::unsupported, "abs of a value whose sign is " + v.word());
            }
            return v.lt ? -s : s;
        },
        [](const Element &e) -> Element {
            if (element_exact(e)) {
                return Rational(abs(std::get<Rational>(e)));
            }
            return std::abs(element_double(e));
        });
}

inline Hyperreal hr_shadow(const Hyperreal &x)
{
    if (x.base()) {
        fail(ErrorCode::unsupported, "shadow of an opaque sequence");
    }
    PeriodicForm f;
    f.modulus = x.form().modulus;
    f.branches.clear();
    for (const auto &b : x.form().branches) {
        f.branches.push_back(shadow(b));
    }
    return Hyperreal(f);
}

inline Classification hr_classify(const Hyperreal &x)
{
    if (x.base()) {
        return Classification::unknown;
    }
    std::optional<Classification> c;
    for (const auto &b : x.form().branches) {
        auto k = classify(b);
        if (c && *c != k) {
            return Classification::unknown;
        }
        c = k;
    }
    return *c;
}

// Splits floor-type atoms of a single closed form into residue classes.
inline Hyperreal case_split(const Hyperreal &x)
{
    if (x.base() || x.form().modulus != 1) {
        return x;
    }
    auto e = expand_floors(x.symbolic());
    if (!e) {
        return x;
    }
    PeriodicForm f;
    f.modulus = e->modulus;
    f.branches = e->branches;
    return Hyperreal(f);
}

} // namespace hyperreal
