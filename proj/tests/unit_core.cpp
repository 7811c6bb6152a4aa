#include <cmath>

#include <gtest/gtest.h>

#include <hyperreal/engine.hpp>

using namespace hyperreal;

namespace
{

Symbolic w()
{
    return Symbolic::omega();
}

Rational at(const Hyperreal &h, long n)
{
    const Element e = h.element(BigInt(n));
    EXPECT_TRUE(element_exact(e)) << h.to_string() << " at " << n;
    return element_exact(e) ? std::get<Rational>(e) : Rational(0);
}

} // namespace

// scalars

TEST(Scalar, LogarithmsCombine)
{
    EXPECT_EQ(ExactScalar::log(Rational(8)).to_string(), "3*log(2)");
    EXPECT_EQ((ExactScalar::log(Rational(8)) / ExactScalar::log(Rational(2))).to_string(), "3");
}

TEST(Scalar, RadicalsSquareBack)
{
    const ExactScalar r = ExactScalar::radical(Rational(2), make_rational(1, 2));
    EXPECT_EQ(r.to_string(), "sqrt(2)");
    EXPECT_EQ((r * r).to_string(), "2");
    EXPECT_NEAR(r.to_double(), std::sqrt(2.0), 1e-15);
}

TEST(Scalar, ConstantsOrderAndFloor)
{
    EXPECT_EQ(scalar_floor(ExactScalar::pi()), 3);
    EXPECT_LT(compare_scalars(ExactScalar::pi(), ExactScalar(make_rational(22, 7))), 0);
    EXPECT_GT(compare_scalars(ExactScalar::pi(), ExactScalar(make_rational(333, 106))), 0);
    EXPECT_EQ(ExactScalar::exp_rational(Rational(1)).to_string(), "e");
}

TEST(Scalar, RationalPower)
{
    EXPECT_EQ(rational_pow(make_rational(2, 3), 3), make_rational(8, 27));
    EXPECT_EQ(rational_pow(make_rational(2, 3), -2), make_rational(9, 4));
    EXPECT_THROW(rational_pow(Rational(0), -1), Error);
}

// symbolic algebra

TEST(Symbolic, PolynomialArithmetic)
{
    EXPECT_EQ((w() * w() - w()).to_string(), "w^2 - w");
    EXPECT_EQ(((w() + Symbolic(1)) * (w() - Symbolic(1))).to_string(), "w^2 - 1");
    EXPECT_TRUE((w() - w()).is_zero());
}

TEST(Symbolic, LogExpPow)
{
    EXPECT_EQ(sym_log(w() * w()).to_string(), "2*log(w)");
    EXPECT_EQ(sym_exp(sym_log(w())).to_string(), "w");
    EXPECT_EQ(sym_pow(w(), make_rational(1, 2)).to_string(), "sqrt(w)");
    EXPECT_EQ(sym_reciprocal(w()).to_string(), "1/w");
}

TEST(Symbolic, FloorOfHyperintegerPlusHalf)
{
    EXPECT_EQ(sym_floor(w() + Symbolic(make_rational(1, 2))).to_string(), "w");
    EXPECT_EQ(sym_floor(w() / Symbolic(3)).to_string(), "floor(w/3)");
}

TEST(Symbolic, Classification)
{
    EXPECT_EQ(classify(sym_reciprocal(w())), Classification::infinitesimal);
    EXPECT_EQ(classify(sym_log(w())), Classification::lesser_infinite);
    EXPECT_EQ(classify(Symbolic(5)), Classification::finite);
    EXPECT_EQ(classify(sym_cos(w())), Classification::finite);
    EXPECT_EQ(classify(w()), Classification::infinite);
}

TEST(Symbolic, Shadow)
{
    EXPECT_EQ(shadow(Symbolic(3) + sym_reciprocal(w())).to_string(), "3");
    EXPECT_EQ(shadow(w() + Symbolic(3)).to_string(), "w + 3");
    EXPECT_EQ(shadow(sym_cos(w()) / w()).to_string(), "0");
}

TEST(Symbolic, Enclosures)
{
    const Bounds b = value_bounds(sym_sin(w()) + w());
    EXPECT_EQ(b.lo.to_string(), "w - 1");
    EXPECT_EQ(b.hi.to_string(), "w + 1");
    EXPECT_FALSE(b.lo_open);
    EXPECT_FALSE(b.hi_open);
}

// ordering

TEST(Order, GrowthScale)
{
    EXPECT_EQ(compare_symbolic(sym_log(w()), sym_pow(w(), make_rational(1, 100))).word(), "less");
    EXPECT_EQ(compare_symbolic(w() * w(), sym_exp(w())).word(), "less");
    EXPECT_EQ(compare_symbolic(sym_exp(w()), sym_exp(w()) + w()).word(), "less");
    EXPECT_EQ(compare_symbolic(w() + Symbolic(1), w() + Symbolic(1)).word(), "equal");
}

TEST(Order, OscillationIsIndeterminate)
{
    EXPECT_EQ(compare_symbolic(sym_cos(w()), Symbolic(2)).word(), "less");
    const OrderVerdict v = compare_symbolic(sym_cos(w()), Symbolic(0));
    EXPECT_TRUE(v.is_indeterminate());
    EXPECT_EQ(holds(v, Relation::gt).to_string(), "indeterminate");
}

TEST(Order, FloorHalfCaseSplit)
{
    const OrderVerdict v = compare_symbolic(sym_floor(w() / Symbolic(2)), w() / Symbolic(2));
    EXPECT_TRUE(v.lt);
    EXPECT_TRUE(v.eq);
    EXPECT_FALSE(v.gt);
    EXPECT_EQ(holds(v, Relation::le).to_string(), "determinately-true");
}

TEST(Order, WitnessHoldsFromThereOn)
{
    const Symbolic a = w() * w();
    const Symbolic b = Symbolic(100) * w();
    const OrderVerdict v = compare_symbolic(a, b);
    ASSERT_TRUE(v.is_determinate());
    EXPECT_TRUE(v.gt);
    ASSERT_TRUE(v.cert.witness.has_value());
    for (long n = v.cert.witness->get_si(); n < v.cert.witness->get_si() + 50; ++n) {
        EXPECT_GT(n * n, 100 * n);
    }
}

// hyperreal values

TEST(Hyperreal, PeriodicBranches)
{
    const Hyperreal h = sum_to_omega(series::geometric(-1));
    EXPECT_EQ(h.to_string(), "{0 | w even; -1 | w odd}");
    EXPECT_EQ(h.to_string(true), "{0 | ω even; -1 | ω odd}");
    EXPECT_TRUE(h.is_periodic());
    EXPECT_EQ(h.form().modulus, 2u);
    EXPECT_EQ(compare(h, Hyperreal(0)).cert.detail, "residues mod 2");
    for (long n = 1; n <= 10; ++n) {
        EXPECT_EQ(at(h, n), n % 2 ? -1 : 0);
    }
}

TEST(Hyperreal, Functions)
{
    EXPECT_EQ(hr_floor(Hyperreal::omega() / Hyperreal(2)).to_string(), "floor(w/2)");
    EXPECT_EQ(hr_sqrt(Hyperreal(w() * w())).to_string(), "w");
    EXPECT_EQ(hr_abs(Hyperreal(-w())).to_string(), "w");
    EXPECT_EQ(hr_shadow(Hyperreal(Symbolic(2) + sym_reciprocal(w()))).to_string(), "2");
}

TEST(Hyperreal, DivisionByZeroFails)
{
    try {
        (void)(Hyperreal(1) / Hyperreal(0));
        FAIL() << "expected an error";
    } catch (const Error &e) {
        EXPECT_EQ(std::string(e.what()), "division by zero");
    }
}

TEST(Hyperreal, ElementsArePointwise)
{
    const Hyperreal a(w() * w() + Symbolic(3));
    const Hyperreal b(w() - Symbolic(1));
    const Hyperreal p = a * b;
    for (long n = 1; n <= 20; ++n) {
        EXPECT_EQ(at(p, n), Rational((n * n + 3) * (n - 1)));
    }
}

TEST(Hyperreal, MemberOfBranches)
{
    const Hyperreal h = sum_to_omega(series::geometric(-1));
    EXPECT_TRUE(member_of(h, {Hyperreal(0), Hyperreal(-1)}).is_true());
    EXPECT_EQ(member_of(h, {Hyperreal(0)}).to_string(), "indeterminate");
    EXPECT_TRUE(member_of(h, {Hyperreal(5)}).is_false());
}

// summation

TEST(Summation, Faulhaber)
{
    EXPECT_EQ(sum_to_omega(series::power(2)).to_string(), "w*(2*w^2+3*w+1)/6");
    EXPECT_EQ(sum_to_omega(series::power(3)).to_string(), "w^2*(w^2+2*w+1)/4");
    const Hyperreal s = sum_to_omega(series::power(3));
    for (long n = 1; n <= 30; ++n) {
        long acc = 0;
        for (long i = 1; i <= n; ++i) {
            acc += i * i * i;
        }
        EXPECT_EQ(at(s, n), acc);
    }
}

TEST(Summation, GeometricAndBounds)
{
    EXPECT_EQ(sum_to_omega(series::geometric(2)).to_string(), "2*2^w - 2");
    EXPECT_EQ(sum(series::power(1), Symbolic(1), w() * w()).to_string(), "w^2*(w^2+1)/2");
    EXPECT_EQ(sum(series::constant(ExactScalar(1)), -w(), w()).to_string(), "2*w + 1");
}

TEST(Summation, ModifiedTermsShiftByTheDelta)
{
    const Hyperreal base = sum_to_omega(series::power(1));
    const Hyperreal mod = sum_delta(series::power(1), {{BigInt(3), Rational(10)}, {BigInt(7), Rational(-4)}});
    const OrderVerdict v = compare(mod - base, Hyperreal(6));
    EXPECT_TRUE(v.is_determinate() && v.eq);
}

// integration

TEST(Integration, ClosedForms)
{
    const auto inf = IntegralBound::plus_inf();
    EXPECT_EQ(integral(fn::exp(-1), IntegralBound::at(0), inf).to_string(), "1 - e^-w");
    EXPECT_EQ(integral(fn::inv_quad(), IntegralBound::minus_inf(), inf).to_string(), "2*atan(w)");
    EXPECT_EQ(integral(fn::power(2), IntegralBound::at(0), IntegralBound::at(3)).to_string(), "9");
    EXPECT_EQ(integral(fn::log(), IntegralBound::at(1), inf).to_string(), "w*log(w) - w + 1");
    EXPECT_EQ(integral(fn::cos(), IntegralBound::at(0), inf).to_string(), "sin(w)");
    EXPECT_EQ(integral(fn::mul(fn::x(), fn::exp(-1)), IntegralBound::at(0), inf).to_string(), "1 - (w+1)*e^-w");
}

TEST(Integration, UndeclaredSingularity)
{
    try {
        integral(fn::power(-1), IntegralBound::at(0), IntegralBound::at(1));
        FAIL() << "expected an error";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::undeclared_singularity);
        EXPECT_EQ(error_code_name(e.code()), "undeclared-singularity");
    }
}

TEST(Integration, AuditAgainstQuadrature)
{
    const auto a = ftc_audit(fn::mul(fn::power(2), fn::exp(-1)), IntegralBound::at(0), IntegralBound::plus_inf(), {}, 30);
    EXPECT_TRUE(a.passed);
    EXPECT_EQ(a.checked, 30u);
    EXPECT_LT(a.worst_relative, 1e-9);
}

TEST(Integration, SymmetricSingularTailsCancelInOddIntegrand)
{
    const Hyperreal v =
        integral(fn::power(-1), IntegralBound::minus_inf(), IntegralBound::plus_inf(), {Rational(0)});
    EXPECT_EQ(v.to_string(), "0");
}
