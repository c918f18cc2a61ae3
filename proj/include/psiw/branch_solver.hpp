#ifndef PSIW_BRANCH_SOLVER_HPP
#define PSIW_BRANCH_SOLVER_HPP

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <charconv>
#include <functional>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domain_geometry.hpp"

namespace psiw
{

enum class Family { Principal, Tilde, HatPlus, HatMinus };

struct BranchId {
    Family family;
    std::int64_t k;
    friend bool operator==(const BranchId &, const BranchId &) = default;
};

inline std::string to_string(Family f)
{
    switch (f) {
        case Family::Principal:
            return "principal";
        case Family::Tilde:
            return "tilde";
        case Family::HatPlus:
            return "hat+";
        case Family::HatMinus:
            return "hat-";
    }
    return "?";
}

inline std::string to_string(const BranchId &b)
{
    return to_string(b.family) + ":" + std::to_string(b.k);
}

/// Parses "family:k" with family one of principal, tilde, hat+, hat-.
inline BranchId parse_branch(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("branch must look like family:k");
    }
    const auto name = text.substr(0, colon);
    const auto num = text.substr(colon + 1);
    std::int64_t k = 0;
    const auto r = std::from_chars(num.data(), num.data() + num.size(), k);
    if (r.ec != std::errc{} || r.ptr != num.data() + num.size()) {
        throw std::invalid_argument("malformed branch index '" + std::string(num) + "'");
    }
    for (auto f : {Family::Principal, Family::Tilde, Family::HatPlus, Family::HatMinus}) {
        if (name == to_string(f)) {
            return {f, k};
        }
    }
    throw std::invalid_argument("unknown branch family '" + std::string(name) + "'");
}

/// Domain of one branch in the z-plane.
///
/// Principal(k) is the plane slit along {t z_k : t >= 1}; the other families
/// live on an angular sector with vertex 0. The extended domain adds the slit
/// (principal) or the upper edge of the sector, with values continued from
/// the counter-clockwise side.
struct BranchDomain {
    BranchId branch;
    RegionId codomain;
    complex slit_end; // z_k for principal branches
    Sector sector;    // for the other families

    bool is_slit() const noexcept { return branch.family == Family::Principal; }

    bool on_slit(complex z) const
    {
        const complex u = z / (slit_end / std::abs(slit_end));
        return std::abs(u.imag()) <= 1e-12 * std::max(1.0, std::abs(u)) && u.real() >= std::abs(slit_end);
    }

    bool contains(complex z, bool extended = false) const
    {
        if (is_slit()) {
            return extended || !on_slit(z);
        }
        return sector.contains(z, extended);
    }

    std::string cut() const
    {
        if (is_slit()) {
            return "ray from z_k outward";
        }
        if (sector.width >= 2.0 * pi - 1e-12) {
            return "ray from 0";
        }
        return "sector complement";
    }
};

/// Family label of a D region: hat regions are the half-planes of the generic
/// rational case, every other D region carries a tilde branch.
inline Family d_family(const Geometry &g, std::int64_t index)
{
    const auto &a = g.parameter();
    if (a.category() != Category::RationalGeneric || a.is_unit_fraction()) {
        return Family::Tilde;
    }
    const auto sec = g.d_sector(index);
    if (std::abs(sec.width - pi) > 1e-12) {
        return Family::Tilde;
    }
    double lo = std::fmod(sec.lo, 2.0 * pi);
    if (lo < 0.0) {
        lo += 2.0 * pi;
    }
    return lo < pi - 1e-12 || lo > 2.0 * pi - 1e-12 ? Family::HatPlus : Family::HatMinus;
}

inline BranchId branch_of_region(const Geometry &g, const RegionId &r)
{
    switch (r.kind) {
        case RegionKind::Omega:
            return {Family::Principal, r.k};
        case RegionKind::D:
            return {d_family(g, r.k), r.k};
        case RegionKind::Unresolved:
            break;
    }
    throw unsupported_error("region has no branch label for an irrational parameter");
}

inline BranchDomain branch_domain(const Geometry &g, const BranchId &b)
{
    const auto &a = g.parameter();
    if (b.family == Family::Principal) {
        if (!a.is_rational() && b.k != 0) {
            throw unsupported_error("irrational parameter: only principal:0 is available");
        }
        return {b, {RegionKind::Omega, b.k}, critical_point(a, b.k).z, {}};
    }
    if (!a.is_rational()) {
        throw unsupported_error("irrational parameter: only principal:0 is available");
    }
    if (b.k == 0) {
        throw domain_error("branch index 0 exists only for the principal family");
    }
    const bool hat = b.family == Family::HatPlus || b.family == Family::HatMinus;
    if (hat && a.category() != Category::RationalGeneric) {
        throw unsupported_error("hat branches need a generic rational parameter");
    }
    if (d_family(g, b.k) != b.family) {
        throw unsupported_error("no " + to_string(b) + " branch for a = " + a.to_string());
    }
    return {b, {RegionKind::D, b.k}, {}, g.d_sector(b.k)};
}

inline BranchDomain branch_domain(const Parameter &a, const BranchId &b)
{
    return branch_domain(Geometry(a), b);
}

/// Branches of one period: Principal(0..P-1) and the D branches above them.
/// Irrational parameters expose Principal(0) only.
inline std::vector<BranchId> period_branches(const Geometry &g)
{
    const auto &a = g.parameter();
    if (!a.is_rational()) {
        return {{Family::Principal, 0}};
    }
    const int per = *a.principal_sheets_per_period();
    std::vector<BranchId> out;
    for (int k = 0; k < per; ++k) {
        out.push_back({Family::Principal, k});
    }
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(per) * g.regions_per_strip(); ++n) {
        const auto idx = Geometry::d_index(n);
        out.push_back({d_family(g, idx), idx});
    }
    return out;
}

/// psi_0: the increasing real branch on [x_a, inf), values in [xi_a, inf).
inline double psi0_real(const Parameter &a, double x)
{
    const double xa = x_a(a), lo0 = xi_a(a);
    if (!(x >= xa) || !std::isfinite(x)) {
        throw domain_error("psi0_real: x must be at least x_a");
    }
    if (x == xa) {
        return lo0;
    }
    if (x == 0.0) {
        return 0.0;
    }
    auto g = [&](double t) { return eval_f(a, {t, 0.0}).real() - x; };
    double lo = x < 0.0 ? lo0 : 0.0;
    double hi = x < 0.0 ? 0.0 : std::log(2.0 * x + 1.0) / (1.0 + a.value()) + 1.0;
    while (g(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

/// psi_-1: the decreasing real branch on [x_a, 0), values in (-inf, xi_a].
inline double psi_minus1_real(const Parameter &a, double x)
{
    const double xa = x_a(a), hi = xi_a(a);
    if (!(x >= xa && x < 0.0)) {
        throw domain_error("psi_minus1_real: x must lie in [x_a, 0)");
    }
    if (x == xa) {
        return hi;
    }
    // Log form of -f on (-inf, xi_a], so tiny |x| never overflows the exponent range.
    const double s = a.value(), target = std::log(-x);
    auto g = [&](double t) { return (1.0 - s) * t + std::log(-0.5 * std::expm1(2.0 * s * t)) - target; };
    double lo = std::log(-2.0 * x) / (1.0 - s) - 1.0;
    while (g(lo) > 0.0) {
        lo -= 1.0;
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

/// Transition between the real branches: psi_-1(f(xi)) for xi in [xi_a, 0).
inline double omega_transition(const Parameter &a, double xi_value)
{
    if (!(xi_value >= xi_a(a) && xi_value < 0.0)) {
        throw domain_error("omega_transition: xi must lie in [xi_a, 0)");
    }
    if (xi_value == xi_a(a)) {
        return xi_value;
    }
    return psi_minus1_real(a, eval_f(a, {xi_value, 0.0}).real());
}

struct BranchValue {
    complex w;
    double residual;
    int iterations;
    bool near_branch_point;
};

/// Seeded damped Newton solver for the branches of psi at a fixed parameter.
class BranchSolver
{
public:
    explicit BranchSolver(const Parameter &a) : m_geo(a), m_bp(branch_points(a)) {}

    const Geometry &geometry() const noexcept { return m_geo; }
    const Parameter &parameter() const noexcept { return m_geo.parameter(); }
    const std::vector<complex> &points() const noexcept { return m_bp; }

    BranchValue solve(complex z, const BranchId &b, bool extended = false) const
    {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw domain_error("z must be finite");
        }
        const auto dom = branch_domain(m_geo, b);
        const auto &a = parameter();
        if (b.family == Family::Principal) {
            const auto cp = critical_point(a, b.k);
            if (std::abs(z - cp.z) <= 1e-15) {
                return {cp.w, std::abs(eval_f(a, cp.w) - z), 0, true};
            }
            if (!dom.contains(z, extended)) {
                throw domain_error("z lies on the cut of " + to_string(b));
            }
            const complex rot = rotation(a, b.k);
            const complex shift{0.0, static_cast<double>(b.k) * m_geo.spacing()};
            auto v = principal0(z * std::conj(rot), dom.on_slit(z));
            v.w += shift;
            return finish(z, v);
        }
        if (!dom.contains(z, extended)) {
            throw domain_error("z lies outside the domain of " + to_string(b));
        }
        const auto [s, j] = m_geo.d_position(b.k);
        if (b.k == -1 && z.imag() == 0.0 && z.real() < 0.0 && z.real() >= x_a(a)) {
            return finish(z, {{psi_minus1_real(a, z.real()), 0.0}, 0.0, 0, false});
        }
        const complex rot = rotation(a, s - 1);
        const complex shift{0.0, static_cast<double>(s - 1) * m_geo.spacing()};
        auto v = d_strip1(j, z * std::conj(rot), extended);
        v.w += shift;
        return finish(z, v);
    }

private:
    using Pred = std::function<bool(complex)>;

    BranchValue finish(complex z, BranchValue v) const
    {
        v.residual = std::abs(eval_f(parameter(), v.w) - z);
        v.near_branch_point = false;
        for (const auto &p : m_bp) {
            v.near_branch_point |= std::abs(z - p) < 1e-8;
        }
        return v;
    }

    bool near_critical(complex z) const
    {
        for (const auto &p : m_bp) {
            if (p != complex{} && std::abs(z - p) < 1e-4) {
                return true;
            }
        }
        return false;
    }

    static double tolerance(complex z) { return 1e-12 * std::max(1.0, std::abs(z)); }

    // Damped Newton (Halley near a critical value) restricted to a region.
    std::optional<BranchValue> newton(complex z, complex w, const Pred &inside, int budget = 200) const
    {
        const auto &a = parameter();
        const bool halley = near_critical(z);
        if (!inside(w)) {
            return std::nullopt;
        }
        complex r = eval_f(a, w) - z;
        for (int it = 0; it < budget; ++it) {
            if (std::abs(r) <= 1e-15 * std::max(1.0, std::abs(z))) {
                return BranchValue{w, std::abs(r), it, false};
            }
            const complex d = f_prime(a, w);
            if (std::abs(d) == 0.0) {
                return std::nullopt;
            }
            complex step = r / d;
            if (halley) {
                const complex dd = f_second(a, w);
                const complex den = d - r * dd / (2.0 * d);
                if (std::abs(den) > 0.0) {
                    step = r / den;
                }
            }
            bool accepted = false;
            double lambda = 1.0;
            for (int h = 0; h <= 20; ++h, lambda *= 0.5) {
                const complex wn = w - lambda * step;
                if (!std::isfinite(wn.real()) || !std::isfinite(wn.imag())
                    || std::abs(wn.real()) * (1.0 + a.value()) > detail::range_limit() || !inside(wn)) {
                    continue;
                }
                const complex rn = eval_f(a, wn) - z;
                if (std::abs(rn) < std::abs(r) || std::abs(step) * lambda <= 1e-15 * std::max(1.0, std::abs(w))) {
                    accepted = true;
                    w = wn;
                    r = rn;
                    break;
                }
            }
            if (!accepted) {
                break;
            }
            if (std::abs(lambda * step) <= 4e-16 * std::max(1.0, std::abs(w))) {
                break;
            }
        }
        if (std::abs(r) <= tolerance(z) && inside(w)) {
            return BranchValue{w, std::abs(r), budget, false};
        }
        return std::nullopt;
    }

    // Follow the branch along the ray through z, from modulus t0 to |z|.
    std::optional<BranchValue> radial(complex z, double t0, complex w, const Pred &inside) const
    {
        const auto &a = parameter();
        const complex dir = z / std::abs(z);
        double u = std::log(t0);
        const double u_end = std::log(std::abs(z));
        double du = std::copysign(0.05, u_end - u);
        auto start = newton(dir * t0, w, inside);
        if (!start) {
            return std::nullopt;
        }
        w = start->w;
        int steps = 0;
        while (u != u_end && steps++ < 100000) {
            const double un = std::abs(u_end - u) <= std::abs(du) ? u_end : u + du;
            const complex zc = dir * std::exp(u), zn = dir * std::exp(un);
            const complex pred = w + (zn - zc) / f_prime(a, w);
            auto got = newton(zn, pred, inside, 12);
            if (got && std::abs(got->w - pred) < 0.5) {
                w = got->w;
                u = un;
                du = std::min(std::abs(du) * 1.5, 0.2) * (du < 0 ? -1.0 : 1.0);
            } else {
                du *= 0.5;
                if (std::abs(du) < 1e-9) {
                    return std::nullopt;
                }
            }
        }
        return newton(z, w, inside);
    }

    BranchValue principal0(complex z, bool on_cut) const
    {
        const auto &a = parameter();
        const double s = a.value();
        if (z.imag() == 0.0 && z.real() >= x_a(a)) {
            return {{psi0_real(a, z.real()), 0.0}, 0.0, 0, false};
        }
        if (std::signbit(z.imag()) && !on_cut) {
            auto v = principal0(std::conj(z), false);
            v.w = std::conj(v.w);
            return v;
        }
        const Pred inside = [this](complex w) { return m_geo.in_omega(0, w); };
        if (on_cut) {
            // Continue from just above the slit, then land on the upper arch.
            const complex inner = z * std::polar(1.0, -1e-3);
            const auto v = principal0(inner, false);
            if (auto got = newton(z, v.w, inside)) {
                return *got;
            }
            throw convergence_error("no convergence on the slit of the principal branch");
        }
        std::vector<complex> seeds;
        if (std::abs(z) > 1.0) {
            seeds.push_back(std::log(2.0 * z) / (1.0 + s));
        }
        seeds.push_back(z / s);
        for (const auto &seed : seeds) {
            if (auto got = newton(z, seed, inside)) {
                return *got;
            }
        }
        const double t0 = 1e-3 * std::min(std::abs(z), std::abs(x_a(a)));
        if (auto got = radial(z, t0, z / std::abs(z) * t0 / s, inside)) {
            return *got;
        }
        throw convergence_error("principal branch did not converge");
    }

    BranchValue d_strip1(int j, complex z, bool extended) const
    {
        const auto &a = parameter();
        const double s = a.value();
        const auto index = Geometry::d_index(j - 1);
        const auto [lo, hi] = m_geo.d_channels(index);
        const Pred inside = [this, index](complex w) {
            const auto r = m_geo.region_of(w);
            return r.kind == RegionKind::D && r.k == index;
        };
        const auto sec = m_geo.d_sector(index);
        if (extended && std::abs(sec.offset(z) - sec.width) <= 1e-12) {
            const complex inner = z * std::polar(1.0, -1e-3);
            const auto v = d_strip1(j, inner, false);
            if (auto got = newton(z, v.w, inside)) {
                return *got;
            }
            throw convergence_error("no convergence on the edge of the sector");
        }
        // Channel seed: f(w) ~ -e^{(1-a)w}/2 as Re w -> -inf.
        auto channel_seed = [&](complex zz) {
            double eta = (sec.lo + sec.offset(zz) - pi) / (1.0 - s);
            eta = std::clamp(eta, lo, hi);
            return complex{std::log(2.0 * std::abs(zz)) / (1.0 - s), eta};
        };
        if (auto got = newton(z, channel_seed(z), inside)) {
            return *got;
        }
        const double t0 = 1e-6 * std::min(std::abs(z), 1.0);
        const complex z0 = z / std::abs(z) * t0;
        if (auto got = radial(z, t0, channel_seed(z0), inside)) {
            return *got;
        }
        throw convergence_error("branch " + std::to_string(index) + " did not converge");
    }

    Geometry m_geo;
    std::vector<complex> m_bp;
};

/// Value of the branch b of psi at z.
inline complex psi_branch(const Parameter &a, complex z, const BranchId &b, bool extended = false)
{
    return BranchSolver(a).solve(z, b, extended).w;
}

enum class ThirdBranch { Plain, Tilde };

/// Closed forms at a = 1/3: (3/2) log(1/2 +- sqrt(2z + 1/4)).
inline complex psi_one_third(complex z, ThirdBranch which)
{
    if (which == ThirdBranch::Plain) {
        if (z.imag() == 0.0 && z.real() < -0.125) {
            throw domain_error("psi_one_third: z on the cut (-inf, -1/8)");
        }
        return 1.5 * std::log(0.5 + std::sqrt(2.0 * z + 0.25));
    }
    if (z.imag() == 0.0 && z.real() <= 0.0) {
        throw domain_error("psi_one_third: z on the cut (-inf, 0]");
    }
    return 1.5 * std::log(0.5 - std::sqrt(2.0 * z + 0.25));
}

/// Real Lambert W on branch 0 or -1.
inline double lambert_w(int branch, double x)
{
    const double edge = -std::exp(-1.0);
    if (branch == 0) {
        if (!(x >= edge) || !std::isfinite(x)) {
            throw domain_error("lambert_w: branch 0 needs x >= -1/e");
        }
        return boost::math::lambert_w0(x);
    }
    if (branch == -1) {
        if (!(x >= edge && x < 0.0)) {
            throw domain_error("lambert_w: branch -1 needs x in [-1/e, 0)");
        }
        return boost::math::lambert_wm1(x);
    }
    throw domain_error("lambert_w: branch must be 0 or -1");
}

/// Small-parameter reference: psi(z) ~ W(z/a).
inline complex psi_small_a(const Parameter &a, complex z, int branch)
{
    if (z.imag() == 0.0) {
        return lambert_w(branch, z.real() / a.value());
    }
    if (branch == 0) {
        return psi_branch(a, z, {Family::Principal, 0});
    }
    if (branch == -1) {
        const Geometry g(a);
        return psi_branch(a, z, {d_family(g, -1), -1});
    }
    throw domain_error("psi_small_a: branch must be 0 or -1");
}

/// Reference as a -> 1: psi(z) ~ log(2z + 1) / 2.
inline complex psi_near_one(const Parameter &, complex z)
{
    const complex u = 2.0 * z + 1.0;
    if (u.imag() == 0.0 && u.real() <= 0.0) {
        throw domain_error("psi_near_one: 2z + 1 on (-inf, 0]");
    }
    return 0.5 * std::log(u);
}

} // namespace psiw

#endif
