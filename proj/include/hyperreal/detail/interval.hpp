#pragma once

// Closed real intervals with MPFR endpoints. Every operation rounds the lower
// endpoint down and the upper endpoint up, so the true value always lies
// inside the result.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <gmpxx.h>
#include <mpfr.h>

#include <hyperreal/error.hpp>

namespace hyperreal::detail
{

class Interval
{
public:
    explicit Interval(mpfr_prec_t prec = 128)
    {
        mpfr_init2(lo_, prec);
        mpfr_init2(hi_, prec);
        mpfr_set_zero(lo_, 1);
        mpfr_set_zero(hi_, 1);
    }

    Interval(const Interval &other)
    {
        mpfr_init2(lo_, mpfr_get_prec(other.lo_));
        mpfr_init2(hi_, mpfr_get_prec(other.hi_));
        mpfr_set(lo_, other.lo_, MPFR_RNDD);
        mpfr_set(hi_, other.hi_, MPFR_RNDU);
    }

    Interval(Interval &&other) noexcept : Interval(mpfr_get_prec(other.lo_))
    {
        mpfr_swap(lo_, other.lo_);
        mpfr_swap(hi_, other.hi_);
    }

    Interval &operator=(Interval other) noexcept
    {
        mpfr_swap(lo_, other.lo_);
        mpfr_swap(hi_, other.hi_);
        return *this;
    }

    ~Interval()
    {
        mpfr_clear(lo_);
        mpfr_clear(hi_);
    }

    mpfr_prec_t precision() const { return mpfr_get_prec(lo_); }

    static Interval point(const mpq_class &q, mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_set_q(r.lo_, q.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(r.hi_, q.get_mpq_t(), MPFR_RNDU);
        return r;
    }

    static Interval point(double v, mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_set_d(r.lo_, v, MPFR_RNDD);
        mpfr_set_d(r.hi_, v, MPFR_RNDU);
        return r;
    }

    static Interval between(double lo, double hi, mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_set_d(r.lo_, lo, MPFR_RNDD);
        mpfr_set_d(r.hi_, hi, MPFR_RNDU);
        return r;
    }

    static Interval pi(mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_const_pi(r.lo_, MPFR_RNDD);
        mpfr_const_pi(r.hi_, MPFR_RNDU);
        return r;
    }

    static Interval euler_gamma(mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_const_euler(r.lo_, MPFR_RNDD);
        mpfr_const_euler(r.hi_, MPFR_RNDU);
        return r;
    }

    static Interval e(mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_set_ui(r.lo_, 1, MPFR_RNDN);
        mpfr_set_ui(r.hi_, 1, MPFR_RNDN);
        mpfr_exp(r.lo_, r.lo_, MPFR_RNDD);
        mpfr_exp(r.hi_, r.hi_, MPFR_RNDU);
        return r;
    }

    static Interval log_of(unsigned long n, mpfr_prec_t prec)
    {
        Interval r(prec);
        mpfr_log_ui(r.lo_, n, MPFR_RNDD);
        mpfr_log_ui(r.hi_, n, MPFR_RNDU);
        return r;
    }

    bool positive() const { return mpfr_sgn(lo_) > 0; }
    bool negative() const { return mpfr_sgn(hi_) < 0; }
    bool contains_zero() const { return !positive() && !negative(); }
    bool finite() const { return mpfr_number_p(lo_) && mpfr_number_p(hi_); }

    double lower() const { return mpfr_get_d(lo_, MPFR_RNDD); }
    double upper() const { return mpfr_get_d(hi_, MPFR_RNDU); }
    double midpoint() const { return 0.5 * (lower() + upper()); }

    mpq_class lower_rational() const
    {
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), lo_);
        return q;
    }

    mpq_class upper_rational() const
    {
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), hi_);
        return q;
    }

    // Largest absolute value in the range.
    Interval magnitude() const
    {
        Interval r(precision());
        mpfr_set_zero(r.lo_, 1);
        if (mpfr_cmpabs(lo_, hi_) > 0) {
            mpfr_abs(r.hi_, lo_, MPFR_RNDU);
        } else {
            mpfr_abs(r.hi_, hi_, MPFR_RNDU);
        }
        return r;
    }

    bool below(const Interval &o) const { return mpfr_less_p(hi_, o.lo_); }

    // Floor of the endpoints; equal values mean the floor of every contained real is known.
    std::pair<mpz_class, mpz_class> floors() const
    {
        mpz_class a, b;
        mpfr_t t;
        mpfr_init2(t, precision());
        mpfr_floor(t, lo_);
        mpfr_get_z(a.get_mpz_t(), t, MPFR_RNDD);
        mpfr_floor(t, hi_);
        mpfr_get_z(b.get_mpz_t(), t, MPFR_RNDD);
        mpfr_clear(t);
        return {a, b};
    }

    friend Interval operator+(const Interval &a, const Interval &b)
    {
        Interval r(std::max(a.precision(), b.precision()));
        mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
        mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
        return r;
    }

    friend Interval operator-(const Interval &a)
    {
        Interval r(a.precision());
        mpfr_neg(r.lo_, a.hi_, MPFR_RNDD);
        mpfr_neg(r.hi_, a.lo_, MPFR_RNDU);
        return r;
    }

    friend Interval operator-(const Interval &a, const Interval &b) { return a + (-b); }

    friend Interval operator*(const Interval &a, const Interval &b)
    {
        const auto prec = std::max(a.precision(), b.precision());
        Interval r(prec);
        mpfr_t t;
        mpfr_init2(t, prec);
        mpfr_srcptr xs[2] = {a.lo_, a.hi_};
        mpfr_srcptr ys[2] = {b.lo_, b.hi_};
        bool first = true;
        for (auto x : xs) {
            for (auto y : ys) {
                mpfr_mul(t, x, y, MPFR_RNDD);
                if (first || mpfr_less_p(t, r.lo_)) {
                    mpfr_set(r.lo_, t, MPFR_RNDD);
                }
                mpfr_mul(t, x, y, MPFR_RNDU);
                if (first || mpfr_greater_p(t, r.hi_)) {
                    mpfr_set(r.hi_, t, MPFR_RNDU);
                }
                first = false;
            }
        }
        mpfr_clear(t);
        return r;
    }

    Interval reciprocal() const
    {
        if (contains_zero()) {
            fail(ErrorCode::division_by_possibly_zero, "interval reciprocal of a range containing zero");
        }
        Interval r(precision());
        mpfr_ui_div(r.lo_, 1, hi_, MPFR_RNDD);
        mpfr_ui_div(r.hi_, 1, lo_, MPFR_RNDU);
        return r;
    }

    friend Interval operator/(const Interval &a, const Interval &b) { return a * b.reciprocal(); }

    friend Interval exp(const Interval &a)
    {
        Interval r(a.precision());
        mpfr_exp(r.lo_, a.lo_, MPFR_RNDD);
        mpfr_exp(r.hi_, a.hi_, MPFR_RNDU);
        return r;
    }

    friend Interval log(const Interval &a)
    {
        if (!a.positive()) {
            fail(ErrorCode::domain_error, "interval logarithm of a non-positive range");
        }
        Interval r(a.precision());
        mpfr_log(r.lo_, a.lo_, MPFR_RNDD);
        mpfr_log(r.hi_, a.hi_, MPFR_RNDU);
        return r;
    }

    friend Interval atan(const Interval &a)
    {
        Interval r(a.precision());
        mpfr_atan(r.lo_, a.lo_, MPFR_RNDD);
        mpfr_atan(r.hi_, a.hi_, MPFR_RNDU);
        return r;
    }

    // sin and cos are 1-Lipschitz: f([lo,hi]) lies within f(lo) +- (hi - lo).
    friend Interval sin(const Interval &a) { return a.lipschitz_trig(&mpfr_sin); }
    friend Interval cos(const Interval &a) { return a.lipschitz_trig(&mpfr_cos); }

    // base^power for a positive base.
    friend Interval pow(const Interval &base, const Interval &power) { return exp(power * log(base)); }

    Interval floor_range() const
    {
        Interval r(precision());
        mpfr_floor(r.lo_, lo_);
        mpfr_floor(r.hi_, hi_);
        return r;
    }

private:
    Interval lipschitz_trig(int (*fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)) const
    {
        Interval r(precision());
        mpfr_t width;
        mpfr_init2(width, precision());
        mpfr_sub(width, hi_, lo_, MPFR_RNDU);
        fn(r.lo_, lo_, MPFR_RNDD);
        fn(r.hi_, lo_, MPFR_RNDU);
        mpfr_sub(r.lo_, r.lo_, width, MPFR_RNDD);
        mpfr_add(r.hi_, r.hi_, width, MPFR_RNDU);
        mpfr_clear(width);
        if (mpfr_cmp_si(r.lo_, -1) < 0) {
            mpfr_set_si(r.lo_, -1, MPFR_RNDD);
        }
        if (mpfr_cmp_si(r.hi_, 1) > 0) {
            mpfr_set_si(r.hi_, 1, MPFR_RNDU);
        }
        return r;
    }

    mpfr_t lo_;
    mpfr_t hi_;
};

// Decimal digits to binary precision, with a few guard bits.
inline mpfr_prec_t digits_to_bits(unsigned digits)
{
    return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 16;
}

} // namespace hyperreal::detail
