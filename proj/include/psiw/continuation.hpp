#ifndef PSIW_CONTINUATION_HPP
#define PSIW_CONTINUATION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "branch_solver.hpp"
#include "core_map.hpp"
#include "domain_geometry.hpp"
#include "errors.hpp"
#include "parameter.hpp"

namespace psiw
{

// ---------------------------------------------------------------------------
// Paths

struct Polyline {
    std::vector<complex> points;
};

struct Circle {
    complex center;
    double radius = 1.0;
    double turns = 1.0;
    double start_angle = 0.0;
};

struct PathSpec {
    std::variant<Polyline, Circle> kind;
    int samples = 4096;

    complex point(double t) const
    {
        if (const auto *c = std::get_if<Circle>(&kind)) {
            return c->center + std::polar(c->radius, c->start_angle + 2.0 * pi * c->turns * t);
        }
        const auto &pts = std::get<Polyline>(kind).points;
        const auto [i, s] = locate(t);
        return pts[i] + s * (pts[i + 1] - pts[i]);
    }

    complex velocity(double t) const
    {
        if (const auto *c = std::get_if<Circle>(&kind)) {
            const double omega = 2.0 * pi * c->turns;
            return complex{0.0, omega} * std::polar(c->radius, c->start_angle + omega * t);
        }
        const auto &pts = std::get<Polyline>(kind).points;
        const double total = length();
        if (total == 0.0) {
            return {};
        }
        const auto i = locate(t).first;
        const complex d = pts[i + 1] - pts[i];
        const double len = std::abs(d);
        return len == 0.0 ? complex{} : d / len * total;
    }

    double length() const
    {
        if (const auto *c = std::get_if<Circle>(&kind)) {
            return 2.0 * pi * c->radius * std::abs(c->turns);
        }
        const auto &pts = std::get<Polyline>(kind).points;
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            total += std::abs(pts[i + 1] - pts[i]);
        }
        return total;
    }

    void validate() const
    {
        if (samples < 1) {
            throw domain_error("path samples must be positive");
        }
        if (const auto *c = std::get_if<Circle>(&kind)) {
            if (!(c->radius > 0.0) || !std::isfinite(c->radius)) {
                throw domain_error("circle radius must be positive");
            }
            if (!std::isfinite(c->turns) || !std::isfinite(c->start_angle) || !std::isfinite(c->center.real())
                || !std::isfinite(c->center.imag())) {
                throw domain_error("circle parameters must be finite");
            }
            return;
        }
        const auto &pts = std::get<Polyline>(kind).points;
        if (pts.size() < 2) {
            throw domain_error("a polyline needs at least two points");
        }
        for (const auto &p : pts) {
            if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
                throw domain_error("polyline points must be finite");
            }
        }
    }

private:
    // Segment index and local fraction for arclength parameter t.
    std::pair<std::size_t, double> locate(double t) const
    {
        const auto &pts = std::get<Polyline>(kind).points;
        const double total = length();
        if (total == 0.0) {
            return {0, 0.0};
        }
        double target = std::clamp(t, 0.0, 1.0) * total;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double len = std::abs(pts[i + 1] - pts[i]);
            if (target <= len && len > 0.0) {
                return {i, target / len};
            }
            target -= len;
        }
        std::size_t last = pts.size() - 2;
        while (last > 0 && pts[last + 1] == pts[last]) {
            --last;
        }
        return {last, 1.0};
    }
};

// ---------------------------------------------------------------------------
// Boundaries of the codomain partition and their images

enum class BoundaryKind { UpperArch, LowerArch, Ray, Cubic };

/// A boundary curve in the w-plane. Arches and rays belong to Omega_k (k = Omega
/// index); cubics are numbered by strip and position inside the strip.
struct Boundary {
    BoundaryKind kind;
    std::int64_t k;
    int index = 0;

    friend bool operator==(const Boundary &, const Boundary &) = default;
};

inline std::string to_string(const Boundary &b)
{
    switch (b.kind) {
        case BoundaryKind::UpperArch:
            return "upper-arch:" + std::to_string(b.k);
        case BoundaryKind::LowerArch:
            return "lower-arch:" + std::to_string(b.k);
        case BoundaryKind::Ray:
            return "ray:" + std::to_string(b.k);
        case BoundaryKind::Cubic:
            break;
    }
    return "cubic:" + std::to_string(b.k) + "." + std::to_string(b.index);
}

/// Image of a boundary: the set base + t dir with 0 <= t <= length.
struct Cut {
    complex base;
    complex dir;
    double length;

    bool is_ray() const noexcept { return std::isinf(length); }

    double distance(complex z) const
    {
        const complex u = (z - base) / dir;
        const double t = std::clamp(u.real(), 0.0, length);
        return std::abs(z - (base + t * dir));
    }
};

enum class Side { Closed, Open };

inline std::string to_string(Side s)
{
    return s == Side::Closed ? "closed" : "open";
}

inline Cut cut_of(const Geometry &g, const Boundary &b)
{
    const auto &a = g.parameter();
    if (b.kind == BoundaryKind::Cubic) {
        const auto &cb = g.cubics().at(static_cast<std::size_t>(b.index - 1));
        const double eta = static_cast<double>(b.k - 1) * g.spacing() + cb.num_zero;
        return {{0.0, 0.0}, std::polar(1.0, pi + (1.0 - a.value()) * eta), std::numeric_limits<double>::infinity()};
    }
    const complex zk = critical_point(a, b.k).z;
    const complex dir = zk / std::abs(zk);
    if (b.kind == BoundaryKind::Ray) {
        return {{0.0, 0.0}, dir, std::abs(zk)};
    }
    return {zk, dir, std::numeric_limits<double>::infinity()};
}

/// A point on the boundary curve, used to read off the regions on either side.
inline complex boundary_point(const Geometry &g, const Boundary &b)
{
    const auto &a = g.parameter();
    const double s = a.value(), c = g.spacing();
    const double h = 0.5 * pi / (1.0 + s);
    switch (b.kind) {
        case BoundaryKind::UpperArch:
            return {xi(a, h), static_cast<double>(b.k) * c + h};
        case BoundaryKind::LowerArch:
            return {xi(a, h), static_cast<double>(b.k) * c - h};
        case BoundaryKind::Ray:
            return {xi_a(a) - 1.0, static_cast<double>(b.k) * c};
        case BoundaryKind::Cubic:
            break;
    }
    const auto &cb = g.cubics().at(static_cast<std::size_t>(b.index - 1));
    const double e = 0.5 * (cb.lo + cb.hi);
    const double x = std::log(std::sin((1.0 - s) * e) / std::sin((1.0 + s) * e)) / (2.0 * s);
    return {x, static_cast<double>(b.k - 1) * c + e};
}

/// The boundary separating two adjacent regions, and whether `first` lies below it.
inline std::optional<std::pair<Boundary, bool>> boundary_between(const Geometry &g, const RegionId &first,
                                                                 const RegionId &second)
{
    if (first.kind == RegionKind::Unresolved || second.kind == RegionKind::Unresolved) {
        return std::nullopt;
    }
    const std::int64_t r = g.regions_per_strip();
    if (first.kind == RegionKind::Omega && second.kind == RegionKind::Omega) {
        return std::nullopt;
    }
    if (first.kind == RegionKind::Omega || second.kind == RegionKind::Omega) {
        const bool omega_first = first.kind == RegionKind::Omega;
        const auto k = omega_first ? first.k : second.k;
        const auto n = Geometry::d_ordinal(omega_first ? second.k : first.k);
        if (n == k * r) {
            return std::pair{Boundary{BoundaryKind::UpperArch, k}, omega_first};
        }
        if (n == k * r - 1) {
            return std::pair{Boundary{BoundaryKind::LowerArch, k}, !omega_first};
        }
        return std::nullopt;
    }
    const auto n1 = Geometry::d_ordinal(first.k), n2 = Geometry::d_ordinal(second.k);
    if (std::abs(n1 - n2) != 1) {
        return std::nullopt;
    }
    const auto lower = std::min(n1, n2);
    const auto j = detail::floor_mod(lower, r);
    const auto s = (lower - j) / r + 1;
    if (j == r - 1) {
        return std::pair{Boundary{BoundaryKind::Ray, s}, n1 < n2};
    }
    return std::pair{Boundary{BoundaryKind::Cubic, s, static_cast<int>(j) + 1}, n1 < n2};
}

// ---------------------------------------------------------------------------
// Gluing atlas

struct AtlasEntry {
    BranchId sheet;
    Boundary boundary;
    Cut cut;
    Side side;
    BranchId neighbor;
};

/// Cut/side/neighbor table for one period of sheets; other periods follow by
/// translating every index by the period.
class GluingAtlas
{
public:
    GluingAtlas(const Geometry &g, std::vector<AtlasEntry> entries)
        : m_geo(g), m_sheets(*g.parameter().principal_sheets_per_period()), m_entries(std::move(entries))
    {
    }

    const Geometry &geometry() const noexcept { return m_geo; }
    const std::vector<AtlasEntry> &entries() const noexcept { return m_entries; }
    int principal_per_period() const noexcept { return m_sheets; }
    int sheets_per_period() const noexcept { return m_sheets * (1 + m_geo.regions_per_strip()); }

    BranchId shift(const BranchId &b, std::int64_t periods) const
    {
        if (b.family == Family::Principal) {
            return {b.family, b.k + periods * m_sheets};
        }
        const auto n = Geometry::d_ordinal(b.k) + periods * m_sheets * m_geo.regions_per_strip();
        const auto idx = Geometry::d_index(n);
        return {d_family(m_geo, idx), idx};
    }

    Boundary shift(const Boundary &b, std::int64_t periods) const
    {
        return {b.kind, b.k + periods * m_sheets, b.index};
    }

    /// Entry for `sheet` along `boundary`, translated from the stored period.
    std::optional<AtlasEntry> find(const BranchId &sheet, const Boundary &boundary) const
    {
        const auto base = boundary.kind == BoundaryKind::Cubic ? boundary.k - 1 : boundary.k;
        const auto m = (base - detail::floor_mod(base, m_sheets)) / m_sheets;
        const auto s = shift(sheet, -m);
        const auto b = shift(boundary, -m);
        for (const auto &e : m_entries) {
            if (e.sheet == s && e.boundary == b) {
                auto out = e;
                out.sheet = sheet;
                out.boundary = boundary;
                out.neighbor = shift(e.neighbor, m);
                out.cut = cut_of(m_geo, boundary);
                return out;
            }
        }
        return std::nullopt;
    }

    /// Sheets of the stored period whose cuts start at the branch point bp.
    std::vector<BranchId> sheets_at(complex bp, double tol = 1e-12) const
    {
        std::vector<BranchId> out;
        for (const auto &e : m_entries) {
            if (std::abs(e.cut.base - bp) <= tol && std::find(out.begin(), out.end(), e.sheet) == out.end()) {
                out.push_back(e.sheet);
            }
        }
        std::sort(out.begin(), out.end(), [](const BranchId &l, const BranchId &r) {
            return std::pair{l.family != Family::Principal, l.k} < std::pair{r.family != Family::Principal, r.k};
        });
        return out;
    }

private:
    Geometry m_geo;
    int m_sheets;
    std::vector<AtlasEntry> m_entries;
};

inline constexpr int atlas_sheet_limit = 64;

/// Reads the gluing off the region partition: for every boundary curve of one
/// period, the region just below owns the closed side of the cut.
inline GluingAtlas build_atlas(const Parameter &a)
{
    if (!a.is_rational()) {
        throw unsupported_error("no gluing atlas for an irrational parameter");
    }
    const Geometry g(a);
    const int per = *a.principal_sheets_per_period();
    if (static_cast<std::int64_t>(per) * (1 + g.regions_per_strip()) > atlas_sheet_limit) {
        throw unsupported_error("atlas for a = " + a.to_string() + " exceeds " + std::to_string(atlas_sheet_limit)
                                + " sheets per period");
    }
    std::vector<Boundary> curves;
    for (std::int64_t k = 0; k < per; ++k) {
        curves.push_back({BoundaryKind::LowerArch, k});
        curves.push_back({BoundaryKind::Ray, k});
        curves.push_back({BoundaryKind::UpperArch, k});
        for (int j = 1; j < g.regions_per_strip(); ++j) {
            curves.push_back({BoundaryKind::Cubic, k + 1, j});
        }
    }
    std::vector<AtlasEntry> entries;
    for (const auto &b : curves) {
        const complex w = boundary_point(g, b);
        const double delta = 1e-6 * std::max(1.0, std::abs(w.imag()));
        const auto below = branch_of_region(g, g.region_of(w - complex{0.0, delta}));
        const auto above = branch_of_region(g, g.region_of(w + complex{0.0, delta}));
        const auto cut = cut_of(g, b);
        entries.push_back({below, b, cut, Side::Closed, above});
        entries.push_back({above, b, cut, Side::Open, below});
    }
    return {g, std::move(entries)};
}

// ---------------------------------------------------------------------------
// Continuation

struct PathSample {
    double t;
    complex z;
    complex w;
};

struct ContinuationEvent {
    double t;
    complex z;
    complex w;
    Boundary boundary;
    Cut cut;
    BranchId from;
    BranchId to;
    bool counterclockwise; // around the base point of the cut
};

struct ContinuationResult {
    std::vector<PathSample> samples;
    std::vector<ContinuationEvent> events;
    BranchId final_sheet;
    double max_residual;
};

/// Whether an observed crossing agrees with the atlas: the neighbor matches and
/// counter-clockwise crossings leave through a closed side.
inline bool consistent_with(const GluingAtlas &atlas, const ContinuationEvent &e)
{
    const auto entry = atlas.find(e.from, e.boundary);
    if (!entry || !(entry->neighbor == e.to)) {
        return false;
    }
    if (entry->cut.distance(e.z) > 1e-7 * std::max(1.0, std::abs(e.z))) {
        return false;
    }
    return (entry->side == Side::Closed) == e.counterclockwise;
}

namespace detail
{

inline complex newton_project(const Parameter &a, complex w, complex z, int max_iter)
{
    for (int i = 0; i < max_iter; ++i) {
        const complex d = f_prime(a, w);
        if (std::abs(d) < 1e-10) {
            throw singularity_error("continuation met a critical point of f");
        }
        const complex step = (eval_f(a, w) - z) / d;
        w -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) {
            break;
        }
    }
    return w;
}

inline BranchId sheet_of(const Geometry &g, complex w)
{
    return branch_of_region(g, g.region_of(w));
}

} // namespace detail

namespace detail
{

// Integrates dw/dt = z'(t) / f'(w) from (t0, w0) to t1 with RK4 substeps no longer
// than a twentieth of the distance to the nearest branch point, projecting back
// onto f(w) = z(t) after each substep.
class Tracker
{
public:
    Tracker(const Parameter &a, const PathSpec &path) : m_a(a), m_path(path), m_bps(branch_points(a)) {}

    double clearance(complex z) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto &bp : m_bps) {
            d = std::min(d, std::abs(z - bp));
        }
        return d;
    }

    complex advance(double t0, complex w0, double t1, double *max_residual = nullptr) const
    {
        const complex z0 = m_path.point(t0), z1 = m_path.point(t1);
        const double gap = std::min(clearance(z0), clearance(z1));
        const double len = m_path.length() * std::abs(t1 - t0);
        const int m = static_cast<int>(std::clamp(std::ceil(len / (0.05 * gap)), 1.0, 1e6));
        const double h = (t1 - t0) / m;
        complex w = w0;
        for (int i = 0; i < m; ++i) {
            const double t = t0 + i * h, tn = i + 1 == m ? t1 : t0 + (i + 1) * h;
            const complex k1 = rhs(t, w);
            const complex k2 = rhs(t + 0.5 * h, w + 0.5 * h * k1);
            const complex k3 = rhs(t + 0.5 * h, w + 0.5 * h * k2);
            const complex k4 = rhs(tn, w + h * k3);
            const complex zn = m_path.point(tn);
            w = newton_project(m_a, w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), zn, 4);
            const double res = std::abs(eval_f(m_a, w) - zn);
            if (res > 1e-8 * std::max(1.0, std::abs(zn))) {
                throw convergence_error("continuation residual " + format_residual(res) + " exceeds tolerance");
            }
            if (max_residual) {
                *max_residual = std::max(*max_residual, res);
            }
        }
        return w;
    }

private:
    complex rhs(double t, complex w) const
    {
        const complex d = f_prime(m_a, w);
        if (std::abs(d) < 1e-10) {
            throw singularity_error("continuation met a critical point of f");
        }
        return m_path.velocity(t) / d;
    }

    static std::string format_residual(double r)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", r);
        return buf;
    }

    const Parameter &m_a;
    const PathSpec &m_path;
    std::vector<complex> m_bps;
};

} // namespace detail

/// Lifts the path z(t) through f starting at w_start (f(w_start) = z(0)).
inline ContinuationResult continue_path(const Parameter &a, const PathSpec &path, complex w_start)
{
    path.validate();
    const Geometry g(a);
    const detail::Tracker tracker(a, path);
    const complex z0 = path.point(0.0);
    if (std::abs(eval_f(a, w_start) - z0) > 1e-10 * std::max(1.0, std::abs(z0))) {
        throw domain_error("w_start is not a preimage of the path start");
    }
    auto clear = [&](complex z) {
        if (tracker.clearance(z) < 1e-6) {
            throw domain_error("path passes within 1e-6 of a branch point");
        }
    };
    clear(z0);

    const int n = path.samples;
    ContinuationResult out;
    out.samples.reserve(static_cast<std::size_t>(n) + 1);
    out.samples.push_back({0.0, z0, w_start});
    out.max_residual = std::abs(eval_f(a, w_start) - z0);

    auto region = g.region_of(w_start);
    auto sheet = branch_of_region(g, region);
    complex w = w_start;

    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n, t1 = static_cast<double>(i + 1) / n;
        const complex z1 = path.point(t1);
        clear(z1);
        const complex w1 = tracker.advance(t, w, t1, &out.max_residual);

        const auto region1 = g.region_of(w1);
        // Walk from the left end, bisecting out one crossing at a time.
        double tl = t;
        complex wl = w;
        auto rl = region;
        while (!(rl == region1)) {
            double lo = tl, hi = t1;
            complex wlo = wl, whi = w1;
            auto rhi = region1;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const complex wm = tracker.advance(lo, wlo, mid);
                const auto rm = g.region_of(wm);
                if (rm == rl) {
                    lo = mid;
                    wlo = wm;
                } else {
                    hi = mid;
                    whi = wm;
                    rhi = rm;
                }
            }
            const auto link = boundary_between(g, rl, rhi);
            if (!link) {
                throw convergence_error("could not resolve a crossing between " + to_string(rl) + " and "
                                        + to_string(rhi));
            }
            const double tc = 0.5 * (lo + hi);
            const auto cut = cut_of(g, link->first);
            const bool ccw = (path.velocity(tc) / cut.dir).imag() > 0.0;
            const auto next = branch_of_region(g, rhi);
            out.events.push_back({tc, path.point(tc), 0.5 * (wlo + whi), link->first, cut, sheet, next, ccw});
            sheet = next;
            tl = hi;
            wl = whi;
            rl = rhi;
        }
        region = region1;
        w = w1;
        out.samples.push_back({t1, z1, w1});
    }
    out.final_sheet = detail::sheet_of(g, w);
    return out;
}

// ---------------------------------------------------------------------------
// Monodromy

/// An angle on the circle around `center` whose point lies inside the domain of b
/// and as far as possible from every cut line through 0 or a critical value.
inline double start_angle_in(const Geometry &g, const BranchId &b, complex center, double radius)
{
    const auto dom = branch_domain(g, b);
    std::vector<complex> dirs;
    for (const auto &z : critical_values(g.parameter())) {
        dirs.push_back(z / std::abs(z));
    }
    const double s = g.parameter().value();
    for (const auto &cb : g.cubics()) {
        for (int strip = 0; strip < g.parameter().principal_sheets_per_period().value_or(1); ++strip) {
            dirs.push_back(std::polar(1.0, pi + (1.0 - s) * (strip * g.spacing() + cb.num_zero)));
        }
    }
    auto clearance = [&](complex z) {
        double d = std::abs(z);
        for (const auto &u : dirs) {
            d = std::min(d, std::abs((z / u).imag()));
        }
        return d;
    };
    constexpr int n = 720;
    double best = -1.0, angle = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * pi * i / n;
        const complex z = center + std::polar(radius, th);
        if (!dom.contains(z)) {
            continue;
        }
        const double c = clearance(z);
        if (c > best + 1e-15) {
            best = c;
            angle = th;
        }
    }
    if (best < 0.0) {
        throw domain_error("the circle does not meet the domain of " + to_string(b));
    }
    return angle;
}

/// Default loop radius around a branch point: half the distance to the nearest
/// other branch point, and at most |x_a| / 2.
inline double loop_radius(const Parameter &a, complex bp)
{
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto &p : branch_points(a)) {
        if (std::abs(p - bp) > 1e-12) {
            nearest = std::min(nearest, std::abs(p - bp));
        }
    }
    return 0.5 * std::min(nearest, std::abs(x_a(a)));
}

struct MonodromyLoops {
    double radius;
    double start_angle;
    std::vector<ContinuationResult> loops;
    std::vector<BranchId> sheets;
};

inline MonodromyLoops monodromy_loops(const Parameter &a, complex bp, const BranchId &start, int n_loops,
                                      int samples_per_loop = 4096)
{
    if (n_loops < 1) {
        throw domain_error("n_loops must be positive");
    }
    const auto bps = branch_points(a);
    if (std::none_of(bps.begin(), bps.end(), [&](complex p) { return std::abs(p - bp) <= 1e-12; })) {
        throw domain_error("monodromy probe needs a branch point");
    }
    const BranchSolver solver(a);
    MonodromyLoops out;
    out.radius = loop_radius(a, bp);
    out.start_angle = start_angle_in(solver.geometry(), start, bp, out.radius);
    const PathSpec loop{Circle{bp, out.radius, 1.0, out.start_angle}, samples_per_loop};
    complex w = solver.solve(loop.point(0.0), start).w;
    for (int i = 0; i < n_loops; ++i) {
        auto r = continue_path(a, loop, w);
        w = r.samples.back().w;
        out.sheets.push_back(r.final_sheet);
        out.loops.push_back(std::move(r));
    }
    return out;
}

/// Sheet reached after each of n_loops positive loops around bp.
inline std::vector<BranchId> monodromy_probe(const Parameter &a, complex bp, const BranchId &start, int n_loops)
{
    return monodromy_loops(a, bp, start, n_loops).sheets;
}

} // namespace psiw

#endif
