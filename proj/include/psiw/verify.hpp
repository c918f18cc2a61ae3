#ifndef PSIW_VERIFY_HPP
#define PSIW_VERIFY_HPP

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "branch_solver.hpp"
#include "continuation.hpp"
#include "core_map.hpp"
#include "domain_geometry.hpp"
#include "parameter.hpp"
#include "records.hpp"

namespace psiw
{

struct Check {
    std::string name;
    std::string a;
    bool passed;
    double error;
    double tolerance;
    std::int64_t samples = 0;

    OutputRecord record() const
    {
        OutputRecord r{"check", {}};
        r.set("name", name).set("a", a).set("passed", passed).set("error", error).set("tolerance", tolerance);
        r.set("samples", samples);
        return r;
    }
};

enum class Suite { Core, Branches, Limits, Monodromy, All };

inline Suite parse_suite(const std::string &s)
{
    if (s == "core") {
        return Suite::Core;
    }
    if (s == "branches") {
        return Suite::Branches;
    }
    if (s == "limits") {
        return Suite::Limits;
    }
    if (s == "monodromy") {
        return Suite::Monodromy;
    }
    if (s == "all") {
        return Suite::All;
    }
    throw std::invalid_argument("unknown suite '" + s + "'");
}

namespace detail
{

// Error below tolerance; non-finite measurements fail and are reported as DBL_MAX.
inline Check check_le(std::string name, const Parameter &a, double error, double tol, std::int64_t n = 0)
{
    const bool finite = std::isfinite(error);
    return {std::move(name), a.to_string(), finite && error <= tol,
            finite ? error : std::numeric_limits<double>::max(), tol, n};
}

/// Quasi-random points in [0,1)^D from a Sobol sequence skipped ahead by the seed.
template <std::size_t D>
class QuasiRandom
{
public:
    explicit QuasiRandom(std::uint64_t seed) : m_gen(D) { m_gen.seed(seed + 1); }

    std::array<double, D> next()
    {
        std::array<double, D> out;
        const double span = static_cast<double>(m_gen.max() - m_gen.min()) + 1.0;
        for (auto &x : out) {
            x = static_cast<double>(m_gen() - m_gen.min()) / span;
        }
        return out;
    }

private:
    boost::random::sobol m_gen;
};

// Log-uniform modulus in [1e-2, 10], uniform argument.
inline complex sample_z(const std::array<double, 3> &u)
{
    const double r = std::pow(10.0, -2.0 + 3.0 * u[0]);
    const double th = -pi + 2.0 * pi * u[1] + 1e-3 * u[2];
    return std::polar(r, th);
}

inline std::optional<std::vector<complex>> closed_form_bp(const Parameter &a)
{
    const auto &ex = a.exact();
    if (!ex) {
        return std::nullopt;
    }
    if (ex->p == 1 && ex->q == 2) {
        const double x = std::sqrt(3.0) / 9.0;
        return std::vector<complex>{-x, x, 0.0};
    }
    if (ex->p == 1 && ex->q == 4) {
        const double x = 3.0 * std::sqrt(15.0) / 125.0;
        return std::vector<complex>{-x, x, 0.0};
    }
    if (ex->p == 1 && ex->q == 3) {
        return std::vector<complex>{-0.125, 0.0};
    }
    return std::nullopt;
}

} // namespace detail

inline std::vector<Check> core_checks(const Parameter &a)
{
    std::vector<Check> out;
    const double s = a.value();

    if (const auto bp = detail::closed_form_bp(a)) {
        out.push_back(detail::check_le("core.x_a.closed_form", a, std::abs(x_a(a) - bp->front().real()), 1e-14));
        const auto got = branch_points(a);
        double err = got.size() == bp->size() ? 0.0 : std::numeric_limits<double>::infinity();
        for (const auto &z : *bp) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto &g : got) {
                best = std::min(best, std::abs(g - z));
            }
            err = std::max(err, best);
        }
        out.push_back(detail::check_le("core.branch_points.closed_form", a, err, 1e-14,
                                       static_cast<std::int64_t>(got.size())));
    }

    const int per = a.principal_sheets_per_period().value_or(1);
    double stat = 0.0, img = 0.0, jac = 0.0;
    for (const auto &cp : critical_points(a, 0, per - 1)) {
        stat = std::max(stat, std::abs(f_prime(a, cp.w)));
        img = std::max(img, std::abs(eval_f(a, cp.w) - cp.z));
        jac = std::max(jac, jacobian(a, cp.w));
    }
    out.push_back(detail::check_le("core.critical_points.stationary", a, stat, 1e-12, per));
    out.push_back(detail::check_le("core.critical_points.image", a, img, 1e-14, per));
    out.push_back(detail::check_le("core.jacobian.at_critical", a, jac, 1e-12, per));

    double neg = 0.0, law = 0.0;
    const double c = pi / s;
    constexpr int n = 200;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const complex w{-6.0 + 8.0 * i / (n - 1), -c + 2.0 * c * j / (n - 1)};
            const double J = jacobian(a, w);
            neg = std::max(neg, -J);
            law = std::max(law, std::abs(std::norm(f_prime(a, w)) - J) / (1.0 + J));
        }
    }
    out.push_back(detail::check_le("core.jacobian.nonnegative", a, neg, 1e-15, n * n));
    out.push_back(detail::check_le("core.jacobian.modulus", a, law, 1e-12, n * n));

    const double eta_max = a.period().value_or(4.0 * pi);
    double imf = 0.0;
    std::int64_t pts = 0;
    for (const auto &iv : xi_domain(a, eta_max)) {
        for (int i = 0; i < 400; ++i) {
            const double eta = iv.lo + (iv.hi - iv.lo) * (i + 0.5) / 400.0;
            const double x = xi(a, eta);
            if (std::abs(x) * (1.0 + s) > 600.0) {
                continue;
            }
            const complex z = eval_f(a, {x, eta});
            imf = std::max(imf, std::abs(z.imag()) / std::max(1.0, std::abs(z)));
            ++pts;
        }
    }
    out.push_back(detail::check_le("geometry.xi.im_f", a, imf, 1e-10, pts));

    const double h = pi / (1.0 + s);
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 1000; ++i) {
        top = std::max(top, boundary_image_x(a, h * i / 1000.0));
    }
    out.push_back({"geometry.boundary_image.negative", a.to_string(), top < 0.0, top, 0.0, 999});
    out.push_back(
        detail::check_le("geometry.boundary_image.sup", a, std::abs(boundary_image_x(a, 1e-9) - x_a(a)), 1e-6));

    if (a.exact() && a.exact()->p == 1 && a.exact()->q == 4) {
        const auto curves = gamma_curves(a);
        int bad = curves.size() == 8 ? 0 : 1;
        for (const auto &cv : curves) {
            const bool cubic = cv.k == 1 || cv.k == 2 || cv.k == 5 || cv.k == 6;
            bad += (cv.shape == Shape::Cubic) != cubic;
        }
        out.push_back(detail::check_le("geometry.gamma.shapes", a, bad, 0.0, static_cast<std::int64_t>(curves.size())));
    }
    return out;
}

inline std::vector<Check> branch_checks(const Parameter &a, std::uint64_t seed)
{
    std::vector<Check> out;
    const BranchSolver solver(a);
    const auto &g = solver.geometry();
    const auto &bps = solver.points();

    for (const auto &b : period_branches(g)) {
        const auto dom = branch_domain(g, b);
        detail::QuasiRandom<3> qr(seed);
        double res = 0.0;
        std::int64_t wrong = 0, used = 0;
        for (int draw = 0; used < 500 && draw < 50000; ++draw) {
            const complex z = detail::sample_z(qr.next());
            if (!dom.contains(z)) {
                continue;
            }
            ++used;
            try {
                const auto v = solver.solve(z, b);
                res = std::max(res, v.residual / std::max(1.0, std::abs(z)));
                wrong += !(g.region_of(v.w) == dom.codomain);
            } catch (const std::exception &) {
                res = std::numeric_limits<double>::infinity();
            }
        }
        const auto tag = to_string(b);
        out.push_back(detail::check_le("branches.roundtrip." + tag, a, used < 500 ? HUGE_VAL : res, 1e-10, used));
        out.push_back(detail::check_le("branches.codomain." + tag, a, static_cast<double>(wrong), 0.0, used));

        detail::QuasiRandom<3> qd(seed + 7919);
        double deriv = 0.0;
        std::int64_t nd = 0;
        const double h = 1e-6;
        for (int draw = 0; nd < 100 && draw < 50000; ++draw) {
            const complex z = detail::sample_z(qd.next());
            if (!dom.contains(z) || !dom.contains(z + h) || !dom.contains(z - h)) {
                continue;
            }
            bool far = std::abs(z) > 0.05;
            for (const auto &bp : bps) {
                far = far && std::abs(z - bp) > 0.05;
            }
            if (!far) {
                continue;
            }
            ++nd;
            try {
                const complex w = solver.solve(z, b).w;
                const complex fd = (solver.solve(z + h, b).w - solver.solve(z - h, b).w) / (2.0 * h);
                const complex d = psi_prime(a, z, w);
                deriv = std::max(deriv, std::abs(fd - d) / std::abs(d));
            } catch (const std::exception &) {
                deriv = std::numeric_limits<double>::infinity();
            }
        }
        out.push_back(detail::check_le("branches.derivative." + tag, a, nd < 100 ? HUGE_VAL : deriv, 1e-6, nd));
    }

    // Real branches on [x_a + 1e-6, x_a + 10] and [x_a + 1e-6, -1e-6].
    const double xa = x_a(a);
    double conc = 0.0, mono0 = -HUGE_VAL, mono1 = -HUGE_VAL, prev = -HUGE_VAL, prev_d = HUGE_VAL;
    constexpr int n = 2000;
    for (int i = 0; i < n; ++i) {
        const double w = psi0_real(a, xa + 1e-6 + 10.0 * i / (n - 1));
        if (i > 0) {
            mono0 = std::max(mono0, prev - w);
            if (i > 1) {
                conc = std::max(conc, (w - prev) - prev_d);
            }
            prev_d = w - prev;
        }
        prev = w;
    }
    prev = HUGE_VAL;
    for (int i = 0; i < n; ++i) {
        const double w = psi_minus1_real(a, xa + 1e-6 + (-2e-6 - xa) * i / (n - 1));
        mono1 = std::max(mono1, w - prev);
        prev = w;
    }
    out.push_back({"branches.real.psi0_increasing", a.to_string(), mono0 < 0.0, mono0, 0.0, n});
    out.push_back(detail::check_le("branches.real.psi0_concave", a, conc, 1e-9, n));
    out.push_back({"branches.real.psim1_decreasing", a.to_string(), mono1 < 0.0, mono1, 0.0, n});
    const double meet = std::max(std::abs(psi0_real(a, xa) - xi_a(a)), std::abs(psi_minus1_real(a, xa) - xi_a(a)));
    out.push_back(detail::check_le("branches.real.meet", a, meet, 1e-8, 2));

    if (a.exact() && a.exact()->p == 1 && a.exact()->q == 3) {
        detail::QuasiRandom<3> qt(seed + 104729);
        double plain = 0.0, tilde = 0.0;
        for (int i = 0; i < 100; ++i) {
            complex z = detail::sample_z(qt.next());
            if (z.imag() == 0.0) {
                z += complex{0.0, 1e-3};
            }
            plain = std::max(plain, std::abs(psi_one_third(z, ThirdBranch::Plain) - solver.solve(z, {Family::Principal, 0}).w));
            const BranchId tb{Family::Tilde, z.imag() < 0.0 ? 1 : -1};
            tilde = std::max(tilde, std::abs(psi_one_third(z, ThirdBranch::Tilde) - solver.solve(z, tb).w));
        }
        out.push_back(detail::check_le("branches.one_third.plain", a, plain, 1e-10, 100));
        out.push_back(detail::check_le("branches.one_third.tilde", a, tilde, 1e-10, 100));
    }
    return out;
}

/// Errors of the a -> 0+ (Lambert W) and a -> 1- (logarithm) limits.
inline std::vector<Check> limit_checks()
{
    std::vector<Check> out;
    constexpr int n = 50;
    auto small_err = [&](const Parameter &a) {
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = -0.3 + 10.3 * i / (n - 1);
            e = std::max(e, std::abs(psi0_real(a, a.value() * u) - lambert_w(0, u)));
        }
        return e;
    };
    auto near_err = [&](const Parameter &a) {
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = 10.0 * i / (n - 1);
            e = std::max(e, std::abs(psi0_real(a, x) - 0.5 * std::log1p(2.0 * x)));
        }
        return e;
    };
    auto sequence = [&](const std::string &name, const std::vector<Parameter> &as, auto err) {
        std::vector<double> errs;
        std::string label;
        for (const auto &a : as) {
            errs.push_back(err(a));
            out.push_back({name + "." + a.to_string(), a.to_string(), std::isfinite(errs.back()), errs.back(), 0.0, n});
            label += (label.empty() ? "" : ";") + a.to_string();
        }
        bool dec = true;
        for (std::size_t i = 1; i < errs.size(); ++i) {
            dec = dec && errs[i] < errs[i - 1];
        }
        out.push_back({name + ".decreasing", label, dec, errs.back(), 0.0, static_cast<std::int64_t>(errs.size())});
    };
    sequence("limits.small_a", {Parameter::rational(1, 10), Parameter::rational(1, 100), Parameter::rational(1, 1000)},
             small_err);
    sequence("limits.near_one",
             {Parameter::rational(9, 10), Parameter::rational(99, 100), Parameter::rational(999, 1000)}, near_err);
    return out;
}

inline std::vector<Check> monodromy_checks(const Parameter &a, std::uint64_t seed)
{
    std::vector<Check> out;
    const auto atlas = build_atlas(a);
    const BranchSolver solver(a);
    const auto &g = solver.geometry();
    const double scale = std::abs(x_a(a));
    const auto bps = branch_points(a);

    // No return to the start sheet within 8 loops around 0.
    const BranchId first{d_family(g, 1), 1};
    const auto probe = monodromy_loops(a, 0.0, first, 8);
    double returns = 0.0, res = 0.0;
    std::int64_t atlas_bad = 0, ccc_bad = 0, events = 0;
    auto audit = [&](const ContinuationResult &r, double size) {
        res = std::max(res, r.max_residual / std::max(1.0, size));
        for (const auto &e : r.events) {
            ++events;
            const auto entry = atlas.find(e.from, e.boundary);
            if (!entry || !(entry->neighbor == e.to) || entry->cut.distance(e.z) > 1e-7 * std::max(1.0, std::abs(e.z))) {
                ++atlas_bad;
            } else if ((entry->side == Side::Closed) != e.counterclockwise) {
                ++ccc_bad;
            }
        }
    };
    std::vector<BranchId> seen{first};
    for (std::size_t i = 0; i < probe.sheets.size(); ++i) {
        returns += std::find(seen.begin(), seen.end(), probe.sheets[i]) != seen.end();
        seen.push_back(probe.sheets[i]);
        audit(probe.loops[i], probe.radius);
    }
    out.push_back(detail::check_le("monodromy.no_return", a, returns, 0.0, 8));

    // A loop around no branch point.
    const complex center = complex{2.0 * scale, 1.5 * scale};
    const PathSpec trivial{Circle{center, 0.5 * scale, 1.0, 0.0}, 4096};
    const complex w0 = solver.solve(trivial.point(0.0), {Family::Principal, 0}).w;
    const auto tr = continue_path(a, trivial, w0);
    audit(tr, std::abs(center) + scale);
    out.push_back(detail::check_le("monodromy.trivial_loop", a, std::abs(tr.samples.back().w - w0), 1e-8, 1));

    // Random loops: every crossing must match the atlas and the CCC rule.
    detail::QuasiRandom<3> qr(seed + 15485863);
    const auto sheets = period_branches(g);
    int loops = 0;
    for (int draw = 0; loops < 100 && draw < 10000; ++draw) {
        const auto u = qr.next();
        const complex c = scale * complex{-2.0 + 4.0 * u[0], -2.0 + 4.0 * u[1]};
        const double r = scale * (0.05 + 2.0 * u[2]);
        bool clear = true;
        for (const auto &bp : bps) {
            clear = clear && std::abs(std::abs(bp - c) - r) > 1e-3 * scale;
        }
        if (!clear) {
            continue;
        }
        std::optional<std::pair<BranchId, double>> start;
        for (std::size_t i = 0; i < sheets.size() && !start; ++i) {
            const auto b = sheets[(static_cast<std::size_t>(draw) + i) % sheets.size()];
            try {
                start = std::pair{b, start_angle_in(g, b, c, r)};
            } catch (const domain_error &) {
            }
        }
        if (!start) {
            continue;
        }
        const PathSpec loop{Circle{c, r, 1.0, start->second}, 1024};
        audit(continue_path(a, loop, solver.solve(loop.point(0.0), start->first).w), std::abs(c) + r);
        ++loops;
    }
    out.push_back(detail::check_le("monodromy.atlas", a, static_cast<double>(atlas_bad), 0.0, events));
    out.push_back(detail::check_le("monodromy.ccc", a, static_cast<double>(ccc_bad), 0.0, events));
    out.push_back(detail::check_le("monodromy.residual", a, res, 1e-8, loops + 9));
    return out;
}

/// Runs a suite over the given parameters; records are sorted by name, then a.
inline std::vector<Check> run_verify(const std::vector<Parameter> &params, Suite suite, std::uint64_t seed)
{
    std::vector<Check> out;
    auto add = [&](std::vector<Check> v) { out.insert(out.end(), v.begin(), v.end()); };
    const bool all = suite == Suite::All;
    for (const auto &a : params) {
        if (all || suite == Suite::Core) {
            add(core_checks(a));
        }
        if (all || suite == Suite::Branches) {
            add(branch_checks(a, seed));
        }
        if ((all || suite == Suite::Monodromy) && a.is_rational()) {
            add(monodromy_checks(a, seed));
        }
    }
    if (all || suite == Suite::Limits) {
        add(limit_checks());
    }
    std::stable_sort(out.begin(), out.end(), [](const Check &l, const Check &r) {
        return std::tie(l.name, l.a) < std::tie(r.name, r.a);
    });
    return out;
}

} // namespace psiw

#endif
