#include <gtest/gtest.h>

#include <psiw/branch_solver.hpp>

#include "oracles.hpp"

using namespace psiw;
using oracle::cplx;

namespace
{

const Parameter half = Parameter::rational(1, 2);
const Parameter third = Parameter::rational(1, 3);
const Parameter quarter = Parameter::rational(1, 4);

cplx sample(int i)
{
    const double scale = std::pow(10.0, -2.0 + 3.0 * oracle::halton(i + 1, 5));
    return scale * cplx(-2.9 + 6 * oracle::halton(i + 1, 2), -2.9 + 6 * oracle::halton(i + 1, 3));
}

std::vector<BranchId> branches_over_period(const Parameter &a)
{
    const Geometry g(a);
    std::vector<BranchId> out;
    const int sheets = *a.principal_sheets_per_period();
    for (int k = 0; k < sheets; ++k) {
        out.push_back({Family::Principal, k});
    }
    const std::int64_t n = static_cast<std::int64_t>(sheets) * g.regions_per_strip();
    for (std::int64_t i = -n; i < n; ++i) {
        const auto idx = Geometry::d_index(i);
        out.push_back({d_family(g, idx), idx});
    }
    return out;
}

} // namespace

TEST(BranchId, ParseAndPrint)
{
    EXPECT_EQ(parse_branch("tilde:-1"), (BranchId{Family::Tilde, -1}));
    EXPECT_EQ(parse_branch("hat+:3"), (BranchId{Family::HatPlus, 3}));
    EXPECT_EQ(to_string(BranchId{Family::HatMinus, 2}), "hat-:2");
    EXPECT_THROW(parse_branch("tilde"), std::invalid_argument);
    EXPECT_THROW(parse_branch("wide:1"), std::invalid_argument);
    EXPECT_THROW(parse_branch("tilde:x"), std::invalid_argument);
}

TEST(Labels, HalfPlanesOfTildeBranches)
{
    // For a = 1/2 and a = 1/4: even positive and odd negative indices map to the
    // upper half-plane, the others to the lower half-plane.
    for (const auto *p : {&half, &quarter}) {
        const Geometry g(*p);
        for (int k : {2, 4, 6, -1, -3, -5}) {
            EXPECT_EQ(d_family(g, k), Family::Tilde);
            EXPECT_TRUE(g.d_sector(k).contains(cplx(0.1, 0.3)));
            EXPECT_FALSE(g.d_sector(k).contains(cplx(0.1, -0.3)));
        }
        for (int k : {1, 3, 5, -2, -4}) {
            EXPECT_TRUE(g.d_sector(k).contains(cplx(0.1, -0.3)));
        }
    }
    const Geometry g(third);
    EXPECT_NEAR(g.d_sector(1).width, 2 * pi, 1e-14);
}

TEST(Labels, HatsForGenericRationals)
{
    const auto a = Parameter::rational(2, 5);
    const Geometry g(a);
    int hats = 0, tildes = 0;
    for (int k = 1; k <= 8; ++k) {
        const auto f = d_family(g, k);
        (f == Family::Tilde ? tildes : hats)++;
        EXPECT_EQ(branch_domain(g, {f, k}).codomain, (RegionId{RegionKind::D, k}));
    }
    EXPECT_GT(hats, 0);
    EXPECT_GT(tildes, 0);
    EXPECT_THROW(branch_domain(half, {Family::HatPlus, 1}), unsupported_error);
    EXPECT_THROW(branch_domain(Parameter::real(0.7314), {Family::Tilde, 1}), unsupported_error);
    EXPECT_THROW(branch_domain(Parameter::real(0.7314), {Family::Principal, 1}), unsupported_error);
}

TEST(RealBranches, Values)
{
    for (const auto *p : {&half, &third, &quarter}) {
        EXPECT_EQ(psi0_real(*p, 0.0), 0.0);
        EXPECT_EQ(psi0_real(*p, x_a(*p)), xi_a(*p));
        EXPECT_EQ(psi_minus1_real(*p, x_a(*p)), xi_a(*p));
        EXPECT_THROW(psi0_real(*p, x_a(*p) - 1e-3), domain_error);
        EXPECT_THROW(psi_minus1_real(*p, 0.0), domain_error);
        EXPECT_THROW(psi_minus1_real(*p, x_a(*p) - 1e-3), domain_error);
        EXPECT_LT(psi_minus1_real(*p, -1e-200), -300.0);
    }
    EXPECT_NEAR(psi0_real(third, 1.0), 1.5 * std::log(2.0), 1e-15);
    EXPECT_NEAR(psi0_real(half, 1.0), oracle::psi0_half_at_1, 1e-15);
    EXPECT_NEAR(psi_minus1_real(third, -0.101554), oracle::psim1_third_at_minus_0101554, 1e-12);
}

TEST(RealBranches, ResidualAndShape)
{
    for (const auto *p : {&half, &third, &quarter}) {
        const double xa = x_a(*p);
        double prev = -1e300, prev_d = 1e300;
        for (int i = 0; i < 1000; ++i) {
            const double x = xa + 1e-6 + 10.0 * i / 999.0;
            const double w = psi0_real(*p, x);
            EXPECT_LE(std::abs(eval_f(*p, w).real() - x), 1e-12 * std::max(1.0, std::abs(x)));
            EXPECT_GT(w, prev);
            if (i > 0) {
                EXPECT_LE(w - prev - prev_d, 1e-9);
                prev_d = w - prev;
            }
            prev = w;
        }
        prev = 1e300;
        for (int i = 0; i < 1000; ++i) {
            const double x = xa + 1e-6 + (-1e-6 - xa - 1e-6) * i / 999.0;
            const double w = psi_minus1_real(*p, x);
            EXPECT_LE(std::abs(eval_f(*p, w).real() - x), 1e-12 * std::max(1.0, std::abs(x)));
            EXPECT_LT(w, prev);
            prev = w;
        }
    }
}

TEST(Transition, Values)
{
    for (const auto *p : {&half, &third}) {
        EXPECT_EQ(omega_transition(*p, xi_a(*p)), xi_a(*p));
        EXPECT_THROW(omega_transition(*p, 0.0), domain_error);
    }
    EXPECT_NEAR(eval_f(third, -0.5).real(), oracle::f_third_at_minus_half, 1e-16);
    const double w = omega_transition(third, -0.5);
    EXPECT_NEAR(w, 1.5 * std::log(0.5 - std::sqrt(2 * oracle::f_third_at_minus_half + 0.25)), 1e-12);
    // Square-root behaviour next to the double point.
    const double e1 = xi_a(half) - omega_transition(half, xi_a(half) + 1e-4);
    const double e2 = xi_a(half) - omega_transition(half, xi_a(half) + 4e-4);
    EXPECT_NEAR(e2 / e1, 4.0, 0.05);
}

TEST(PsiBranch, Examples)
{
    EXPECT_NEAR(psi_branch(half, 1.0, {Family::Principal, 0}).real(), oracle::psi0_half_at_1, 1e-15);
    EXPECT_EQ(psi_branch(half, 1.0, {Family::Principal, 0}).imag(), 0.0);
    EXPECT_NEAR(std::abs(psi_branch(half, -0.1, {Family::Tilde, -1}, true) - psi_minus1_real(half, -0.1)), 0.0, 1e-14);
    EXPECT_THROW(psi_branch(half, -0.1, {Family::Tilde, -1}), domain_error);
    EXPECT_EQ(psi_branch(half, x_a(half), {Family::Principal, 0}), cplx(xi_a(half)));
    EXPECT_THROW(psi_branch(half, -1.0, {Family::Principal, 0}), domain_error);
    EXPECT_THROW(psi_branch(half, -1.0, {Family::Tilde, 0}), domain_error);
    EXPECT_THROW(psi_branch(Parameter::real(0.7314), cplx(1, 1), {Family::Tilde, 1}), unsupported_error);

    const cplx w = psi_branch(quarter, cplx(0.2, 0.2), {Family::Tilde, 2});
    EXPECT_EQ(region_of(quarter, w), (RegionId{RegionKind::D, 2}));
    EXPECT_LE(std::abs(eval_f(quarter, w) - cplx(0.2, 0.2)), 1e-12);
    const auto pre = oracle::preimages(1, 4, cplx(0.2, 0.2), -50, 50);
    EXPECT_LE(std::abs(oracle::nearest(pre, w) - w), 1e-10);
}

TEST(PsiBranch, NearBranchPointFlag)
{
    const BranchSolver s(half);
    EXPECT_TRUE(s.solve(x_a(half), {Family::Principal, 0}).near_branch_point);
    EXPECT_TRUE(s.solve(cplx(x_a(half) + 1e-9, 1e-10), {Family::Principal, 0}).near_branch_point);
    EXPECT_FALSE(s.solve(cplx(0.5, 0.5), {Family::Principal, 0}).near_branch_point);
}

TEST(PsiBranch, ExtendedPrincipalUsesUpperArch)
{
    const cplx w = psi_branch(half, -1.0, {Family::Principal, 0}, true);
    EXPECT_GT(w.imag(), 0.0);
    EXPECT_LE(std::abs(eval_f(half, w) - cplx(-1.0)), 1e-12);
    EXPECT_NEAR(w.real(), xi(half, w.imag()), 1e-9);
    EXPECT_EQ(region_of(half, w), (RegionId{RegionKind::Omega, 0}));
}

TEST(PsiBranch, RoundTripAndCodomainAgainstPolynomialRoots)
{
    for (auto [p, q] : {std::pair{1, 2}, {1, 3}, {1, 4}, {2, 5}, {3, 5}, {3, 4}, {1, 6}}) {
        const auto a = Parameter::rational(p, q);
        const BranchSolver solver(a);
        const auto &g = solver.geometry();
        for (const auto &b : branches_over_period(a)) {
            const auto dom = branch_domain(g, b);
            int used = 0;
            for (int i = 0; used < 40 && i < 400; ++i) {
                const cplx z = sample(i);
                if (!dom.contains(z)) {
                    continue;
                }
                ++used;
                const auto v = solver.solve(z, b);
                EXPECT_LE(v.residual, 1e-10 * std::max(1.0, std::abs(z))) << to_string(b) << " z=" << z;
                EXPECT_EQ(g.region_of(v.w), dom.codomain) << p << "/" << q << " " << to_string(b) << " z=" << z;
                const double eta = v.w.imag();
                const auto pre = oracle::preimages(p, q, z, eta - 1, eta + 1);
                ASSERT_FALSE(pre.empty());
                EXPECT_LE(std::abs(oracle::nearest(pre, v.w) - v.w), 1e-8 * std::max(1.0, std::abs(v.w)));
            }
            EXPECT_GT(used, 0) << to_string(b);
        }
    }
}

TEST(PsiBranch, ConjugateSymmetryAndRealAxis)
{
    for (const auto *p : {&half, &third, &quarter}) {
        for (int i = 0; i < 100; ++i) {
            const cplx z = sample(i);
            const cplx w = psi_branch(*p, z, {Family::Principal, 0});
            const cplx wc = psi_branch(*p, std::conj(z), {Family::Principal, 0});
            EXPECT_LE(std::abs(wc - std::conj(w)), 1e-12);
        }
        for (double x : {x_a(*p) + 1e-6, -0.01, 0.3, 5.0}) {
            EXPECT_LE(std::abs(psi_branch(*p, x, {Family::Principal, 0}).imag()), 1e-12);
        }
    }
}

TEST(PsiBranch, DerivativeMatchesFiniteDifference)
{
    const double h = 1e-6;
    for (const auto *p : {&half, &third, &quarter}) {
        const BranchSolver solver(*p);
        for (const auto &b : branches_over_period(*p)) {
            const auto dom = branch_domain(solver.geometry(), b);
            int used = 0;
            for (int i = 0; used < 20 && i < 300; ++i) {
                const cplx z = sample(i) + cplx(0.05, 0.03);
                if (!dom.contains(z) || !dom.contains(z + h) || !dom.contains(z - h) || std::abs(z) < 0.05) {
                    continue;
                }
                bool far = true;
                for (const auto &bp : solver.points()) {
                    far &= std::abs(z - bp) > 0.05;
                }
                if (!far) {
                    continue;
                }
                ++used;
                const cplx w = solver.solve(z, b).w;
                const cplx fd = (solver.solve(z + h, b).w - solver.solve(z - h, b).w) / (2 * h);
                const cplx d = psi_prime(*p, z, w);
                EXPECT_LE(std::abs(fd - d), 1e-6 * std::abs(d)) << to_string(b) << " z=" << z;
            }
        }
    }
}

TEST(OneThird, ClosedForms)
{
    EXPECT_EQ(psi_one_third(0.0, ThirdBranch::Plain), cplx(0.0));
    EXPECT_NEAR(psi_one_third(-0.125, ThirdBranch::Plain).real(), xi_a(third), 1e-15);
    EXPECT_NEAR(psi_one_third(1.0, ThirdBranch::Plain).real(), 1.5 * std::log(2.0), 1e-15);
    EXPECT_THROW(psi_one_third(-0.2, ThirdBranch::Plain), domain_error);
    EXPECT_THROW(psi_one_third(-0.2, ThirdBranch::Tilde), domain_error);

    const BranchSolver solver(third);
    for (int i = 0; i < 100; ++i) {
        cplx z = sample(i);
        if (z.imag() == 0.0) {
            z += cplx(0, 1e-3);
        }
        EXPECT_LE(std::abs(psi_one_third(z, ThirdBranch::Plain) - solver.solve(z, {Family::Principal, 0}).w), 1e-10);
        const BranchId b{Family::Tilde, z.imag() < 0 ? 1 : -1};
        EXPECT_LE(std::abs(psi_one_third(z, ThirdBranch::Tilde) - solver.solve(z, b).w), 1e-10) << z;
    }
}

TEST(LambertW, Values)
{
    EXPECT_EQ(lambert_w(0, 0.0), 0.0);
    EXPECT_NEAR(lambert_w(0, std::exp(1.0)), 1.0, 1e-15);
    EXPECT_NEAR(lambert_w(-1, -std::exp(-1.0)), -1.0, 1e-7);
    EXPECT_NEAR(lambert_w(0, 1.0), oracle::w0_at_1, 1e-15);
    EXPECT_THROW(lambert_w(0, -1.0), domain_error);
    EXPECT_THROW(lambert_w(-1, 0.0), domain_error);
    EXPECT_THROW(lambert_w(1, 1.0), domain_error);
    for (double x : {-0.3, -0.01, 0.5, 3.0, 100.0}) {
        const double w = lambert_w(0, x);
        EXPECT_NEAR(w * std::exp(w), x, 1e-12 * std::abs(x));
    }
    for (double x : {-0.3, -0.01, -1e-5}) {
        const double w = lambert_w(-1, x);
        EXPECT_NEAR(w * std::exp(w), x, 1e-12 * std::abs(x));
    }
}

TEST(Limits, SmallAndNearOne)
{
    EXPECT_NEAR(psi_small_a(Parameter::real(1e-3), 1e-3, 0).real(), oracle::w0_at_1, 1e-15);
    EXPECT_EQ(psi_small_a(Parameter::real(1e-2), 0.0, 0), cplx(0.0));
    EXPECT_NEAR(psi_small_a(Parameter::real(1e-4), -1e-4 / std::exp(1.0), -1).real(), -1.0, 1e-6);
    const auto small = Parameter::rational(1, 1000);
    EXPECT_LE(std::abs(psi_branch(small, 1e-3, {Family::Principal, 0}) - oracle::w0_at_1), 1e-2);

    EXPECT_EQ(psi_near_one(Parameter::real(0.9), 0.0), cplx(0.0));
    EXPECT_NEAR(psi_near_one(Parameter::real(0.999), 1.0).real(), 0.5 * std::log(3.0), 1e-15);
    EXPECT_THROW(psi_near_one(Parameter::real(0.9), -0.5), domain_error);

    double prev = 1e300;
    for (double a : {0.9, 0.99, 0.999}) {
        const double e = std::abs(psi_branch(Parameter::real(a), 1.0, {Family::Principal, 0}) - psi_near_one(Parameter::real(a), 1.0));
        EXPECT_LT(e, prev);
        prev = e;
    }
}
