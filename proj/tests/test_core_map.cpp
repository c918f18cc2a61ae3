#include <gtest/gtest.h>

#include <psiw/core_map.hpp>

#include "oracles.hpp"

using namespace psiw;
using oracle::cplx;

namespace
{

const Parameter half = Parameter::rational(1, 2);
const Parameter third = Parameter::rational(1, 3);
const Parameter quarter = Parameter::rational(1, 4);

} // namespace

TEST(Parameter, Categories)
{
    EXPECT_EQ(half.category(), Category::IntegerRatio);
    EXPECT_EQ(third.category(), Category::IntegerRatio);
    EXPECT_EQ(Parameter::rational(3, 5).category(), Category::IntegerRatio);
    EXPECT_EQ(quarter.category(), Category::RationalGeneric);
    EXPECT_EQ(Parameter::rational(2, 5).category(), Category::RationalGeneric);
    EXPECT_EQ(Parameter::real(0.5).category(), Category::Irrational);
    EXPECT_EQ(Parameter::rational(2, 4).exact()->q, 2);
    EXPECT_EQ(Parameter::rational(2, 4).value(), 0.5);
}

TEST(Parameter, Parse)
{
    EXPECT_EQ(Parameter::parse("1/4").category(), Category::RationalGeneric);
    EXPECT_EQ(Parameter::parse("0.7314").category(), Category::Irrational);
    EXPECT_THROW(Parameter::parse("1/x"), std::invalid_argument);
    EXPECT_THROW(Parameter::parse("abc"), std::invalid_argument);
    EXPECT_THROW(Parameter::parse("3/2"), domain_error);
    EXPECT_THROW(Parameter::parse("1.5"), domain_error);
}

TEST(Parameter, Period)
{
    EXPECT_DOUBLE_EQ(*half.period(), 4.0 * oracle::pi);
    EXPECT_DOUBLE_EQ(*third.period(), 3.0 * oracle::pi);
    EXPECT_DOUBLE_EQ(*quarter.period(), 8.0 * oracle::pi);
    EXPECT_EQ(*quarter.principal_sheets_per_period(), 2);
    EXPECT_FALSE(Parameter::real(0.3).period());
}

TEST(EvalF, ClosedFormValues)
{
    EXPECT_EQ(eval_f(half, 0.0), cplx(0.0));
    const cplx v = eval_f(half, std::log(1.0 / 3.0));
    EXPECT_NEAR(v.real(), -std::sqrt(3.0) / 9.0, 1e-15);
    EXPECT_EQ(v.imag(), 0.0);
}

TEST(EvalF, MatchesExponentialForm)
{
    for (double a : {0.1, 0.25, 0.5, 0.61803398874989485, 0.9}) {
        const auto p = Parameter::real(a);
        for (int i = 0; i < 200; ++i) {
            const cplx w{-6.0 + 12.0 * oracle::halton(i + 1, 2), -20.0 + 40.0 * oracle::halton(i + 1, 3)};
            const cplx ref = oracle::forward(a, w);
            EXPECT_LE(std::abs(eval_f(p, w) - ref), 1e-13 * std::max(1.0, std::abs(ref)));
            const double mod2 = 0.5 * std::exp(2.0 * w.real()) * (std::cosh(2.0 * w.real() * a) - std::cos(2.0 * w.imag() * a));
            EXPECT_NEAR(std::norm(eval_f(p, w)), mod2, 1e-12 * std::max(1.0, mod2));
        }
    }
}

TEST(EvalF, PeriodAndPhase)
{
    const cplx w{1.0, 1.0};
    EXPECT_LE(std::abs(eval_f(half, w) - eval_f(half, w + cplx(0, 4 * oracle::pi))), 1e-12 * std::abs(eval_f(half, w)));
    for (int i = 0; i < 50; ++i) {
        const cplx w0{-3.0 + 6.0 * oracle::halton(i + 1, 2), -5.0 + 10.0 * oracle::halton(i + 1, 3)};
        EXPECT_LE(std::abs(eval_f(quarter, w0 + cplx(0, 4 * oracle::pi)) + eval_f(quarter, w0)),
                  1e-10 * std::abs(eval_f(quarter, w0)));
        for (const auto *p : {&half, &third, &quarter}) {
            for (int k = -3; k <= 3; ++k) {
                const cplx shifted = eval_f(*p, w0 + cplx(0, k * p->omega_spacing()));
                const cplx expect = eval_f(*p, w0) * rotation(*p, k);
                EXPECT_LE(std::abs(shifted - expect), 1e-10 * std::max(1e-300, std::abs(expect)));
            }
            const cplx per = eval_f(*p, w0 + cplx(0, *p->period()));
            EXPECT_LE(std::abs(per - eval_f(*p, w0)), 1e-10 * std::abs(per));
        }
    }
}

TEST(EvalF, ConjugateSymmetryIsExact)
{
    for (const auto *p : {&half, &third, &quarter}) {
        for (int i = 0; i < 100; ++i) {
            const cplx w{-4.0 + 8.0 * oracle::halton(i + 1, 2), -30.0 + 60.0 * oracle::halton(i + 1, 5)};
            EXPECT_EQ(eval_f(*p, std::conj(w)), std::conj(eval_f(*p, w)));
        }
    }
}

TEST(EvalF, RangeGuard)
{
    EXPECT_THROW(eval_f(half, cplx(480.0, 0.0)), range_error);
    EXPECT_THROW(eval_f(half, cplx(-480.0, 0.0)), range_error);
    EXPECT_THROW(jacobian(half, cplx(480.0, 0.0)), range_error);
    EXPECT_THROW(f_prime(half, cplx(480.0, 0.0)), range_error);
    EXPECT_NO_THROW(eval_f(half, cplx(400.0, 0.0)));
    EXPECT_TRUE(std::isfinite(eval_f(half, cplx(400.0, 1.0)).real()));
}

TEST(Jacobian, Values)
{
    for (double a : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(jacobian(Parameter::real(a), 0.0), a * a, 1e-15);
    }
    EXPECT_DOUBLE_EQ(jacobian(half, 0.0), 0.25);
    for (int k = -3; k <= 3; ++k) {
        EXPECT_LE(jacobian(half, cplx(std::log(1.0 / 3.0), 2.0 * oracle::pi * k)), 1e-15);
    }
}

TEST(Jacobian, MatchesDerivativeModulus)
{
    for (const auto *p : {&half, &third, &quarter}) {
        for (int i = 0; i < 400; ++i) {
            const cplx w{-5.0 + 10.0 * oracle::halton(i + 1, 2), -25.0 + 50.0 * oracle::halton(i + 1, 3)};
            const double j = jacobian(*p, w);
            EXPECT_GE(j, 0.0);
            EXPECT_NEAR(std::norm(f_prime(*p, w)), j, 1e-12 * (1.0 + j));
        }
    }
}

TEST(FPrime, Values)
{
    for (double a : {0.2, 0.7}) {
        EXPECT_EQ(f_prime(Parameter::real(a), 0.0), cplx(a));
    }
    EXPECT_LE(std::abs(f_prime(half, std::log(1.0 / 3.0))), 1e-15);
    const double h = 1e-6;
    const cplx fd = (eval_f(third, 1.0 + h) - eval_f(third, 1.0 - h)) / (2.0 * h);
    EXPECT_LE(std::abs(fd - f_prime(third, 1.0)) / std::abs(fd), 1e-8);
    const cplx w{0.3, -0.7};
    const cplx fd2 = (f_prime(third, w + h) - f_prime(third, w - h)) / (2.0 * h);
    EXPECT_LE(std::abs(fd2 - f_second(third, w)) / std::abs(fd2), 1e-8);
}

TEST(CriticalPoints, ClosedForms)
{
    EXPECT_NEAR(x_a(half), -std::sqrt(3.0) / 9.0, 1e-15);
    EXPECT_NEAR(x_a(quarter), -3.0 * std::sqrt(15.0) / 125.0, 1e-15);
    EXPECT_NEAR(x_a(third), -0.125, 1e-15);
    EXPECT_NEAR(xi_a(half), -std::log(3.0), 1e-15);

    auto cps = critical_points(half, 0, 1);
    EXPECT_NEAR(cps[0].z.real(), -std::sqrt(3.0) / 9.0, 1e-14);
    EXPECT_NEAR(cps[1].z.real(), std::sqrt(3.0) / 9.0, 1e-14);
    EXPECT_EQ(cps[1].z.imag(), 0.0);

    cps = critical_points(quarter, 0, 1);
    EXPECT_NEAR(cps[0].z.real(), -3.0 * std::sqrt(15.0) / 125.0, 1e-14);
    EXPECT_NEAR(cps[1].z.real(), 3.0 * std::sqrt(15.0) / 125.0, 1e-14);

    for (const auto &cp : critical_points(third, 0, 5)) {
        EXPECT_NEAR(cp.z.real(), -0.125, 1e-14);
        EXPECT_EQ(cp.z.imag(), 0.0);
    }
    EXPECT_THROW(critical_points(half, 2, 1), domain_error);
}

TEST(CriticalPoints, ImagesAndJacobian)
{
    const auto two_fifths = Parameter::rational(2, 5);
    for (const auto *p : {&half, &third, &quarter, &two_fifths}) {
        for (const auto &cp : critical_points(*p, -6, 6)) {
            EXPECT_LE(std::abs(eval_f(*p, cp.w) - cp.z), 1e-12);
            EXPECT_LE(jacobian(*p, cp.w), 1e-12);
            EXPECT_NEAR(std::abs(cp.z), std::abs(x_a(*p)), 1e-15);
        }
    }
}

TEST(CriticalPoints, IntegerRatioCount)
{
    // (1+a)/(1-a) = n gives n-1 distinct critical values.
    EXPECT_EQ(critical_values(half).size(), 2u);
    EXPECT_EQ(critical_values(third).size(), 1u);
    EXPECT_EQ(critical_values(Parameter::rational(3, 5)).size(), 3u);
    EXPECT_EQ(critical_values(Parameter::rational(2, 3)).size(), 4u);
}

TEST(BranchPoints, Sets)
{
    auto bp = branch_points(half);
    ASSERT_EQ(bp.size(), 3u);
    EXPECT_EQ(bp[0], cplx(0.0));
    EXPECT_NEAR(bp[1].real(), std::sqrt(3.0) / 9.0, 1e-14);
    EXPECT_NEAR(bp[2].real(), -std::sqrt(3.0) / 9.0, 1e-14);

    bp = branch_points(third);
    ASSERT_EQ(bp.size(), 2u);
    EXPECT_NEAR(bp[1].real(), -0.125, 1e-15);
    EXPECT_EQ(bp[1].imag(), 0.0);

    bp = branch_points(quarter);
    ASSERT_EQ(bp.size(), 3u);
    EXPECT_NEAR(bp[2].real(), -3.0 * std::sqrt(15.0) / 125.0, 1e-14);

    bp = branch_points(Parameter::real(0.61803398874989485));
    ASSERT_EQ(bp.size(), 2u);
}

TEST(PsiPrime, Values)
{
    for (double a : {0.2, 0.5}) {
        EXPECT_EQ(psi_prime(Parameter::real(a), 0.0, 0.0), cplx(1.0 / a));
    }
    EXPECT_THROW(psi_prime(half, -std::sqrt(3.0) / 9.0, std::log(1.0 / 3.0)), singularity_error);
    EXPECT_THROW(psi_prime(half, 5.0, 0.0), domain_error);

    auto plain = [](double z) { return 1.5 * std::log(0.5 + std::sqrt(2.0 * z + 0.25)); };
    const double h = 1e-6;
    const double fd = (plain(1.0 + h) - plain(1.0 - h)) / (2.0 * h);
    const cplx d = psi_prime(third, 1.0, 1.5 * std::log(2.0));
    EXPECT_LE(std::abs(d - fd) / fd, 1e-8);
}
