#ifndef PSIW_DOMAIN_GEOMETRY_HPP
#define PSIW_DOMAIN_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "core_map.hpp"

namespace psiw
{

/// Boundary level (1/(2a)) ln(sin((1-a)eta) / sin((1+a)eta)); even in eta.
///
/// eta = 0 returns the removable limit xi_a.
inline double xi(const Parameter &a, double eta)
{
    if (eta == 0.0) {
        return xi_a(a);
    }
    const double s = a.value();
    const double num = std::sin((1.0 - s) * eta);
    const double den = std::sin((1.0 + s) * eta);
    if (num == 0.0 || den == 0.0 || (num > 0.0) != (den > 0.0)) {
        throw domain_error("xi: eta outside the domain of the boundary function");
    }
    return std::log(num / den) / (2.0 * s);
}

enum class EndTag { PlusInf, MinusInf, Finite };

inline std::string to_string(EndTag t)
{
    switch (t) {
        case EndTag::PlusInf:
            return "+inf";
        case EndTag::MinusInf:
            return "-inf";
        case EndTag::Finite:
            return "finite";
    }
    return "?";
}

struct XiInterval {
    int k;
    double lo;
    double hi;
    EndTag left;
    EndTag right;
};

namespace detail
{

struct Breakpoint {
    double eta;
    bool num_zero;
    bool den_zero;
};

// Zeros of sin((1-a)eta) and sin((1+a)eta) in (0, eta_max], merged where they coincide.
inline std::vector<Breakpoint> breakpoints(const Parameter &a, double eta_max)
{
    std::vector<Breakpoint> out;
    const double s = a.value();
    if (const auto &ex = a.exact()) {
        // eta = pi * key / ((q-p)(q+p)) for integer keys.
        const auto [p, q] = *ex;
        const std::int64_t lo_den = q - p, hi_den = q + p;
        const double unit = pi / static_cast<double>(lo_den * hi_den);
        const auto limit = static_cast<std::int64_t>(std::floor(eta_max / unit + 1e-9));
        std::vector<std::pair<std::int64_t, int>> keys;
        for (std::int64_t m = 1; m * q * hi_den <= limit; ++m) {
            keys.emplace_back(m * q * hi_den, 1);
        }
        for (std::int64_t m = 1; m * q * lo_den <= limit; ++m) {
            keys.emplace_back(m * q * lo_den, 2);
        }
        std::sort(keys.begin(), keys.end());
        for (const auto &[key, which] : keys) {
            if (!out.empty() && out.back().eta == unit * static_cast<double>(key)) {
                (which == 1 ? out.back().num_zero : out.back().den_zero) = true;
                continue;
            }
            out.push_back({unit * static_cast<double>(key), which == 1, which == 2});
        }
        return out;
    }
    for (int m = 1; m * pi / (1.0 - s) <= eta_max; ++m) {
        out.push_back({m * pi / (1.0 - s), true, false});
    }
    for (int m = 1; m * pi / (1.0 + s) <= eta_max; ++m) {
        out.push_back({m * pi / (1.0 + s), false, true});
    }
    std::sort(out.begin(), out.end(), [](const auto &l, const auto &r) { return l.eta < r.eta; });
    std::vector<Breakpoint> merged;
    for (const auto &b : out) {
        if (!merged.empty() && std::abs(merged.back().eta - b.eta) <= 1e-12 * b.eta) {
            merged.back().num_zero |= b.num_zero;
            merged.back().den_zero |= b.den_zero;
        } else {
            merged.push_back(b);
        }
    }
    return merged;
}

inline EndTag tag_of(const Breakpoint &b)
{
    if (b.num_zero && b.den_zero) {
        return EndTag::Finite;
    }
    return b.den_zero ? EndTag::PlusInf : EndTag::MinusInf;
}

inline bool ratio_positive(double s, double eta)
{
    const double num = std::sin((1.0 - s) * eta), den = std::sin((1.0 + s) * eta);
    return num != 0.0 && den != 0.0 && (num > 0.0) == (den > 0.0);
}

} // namespace detail

/// Maximal open intervals of [0, eta_max] on which xi is defined.
///
/// Intervals are also split at the points where both sines vanish with a
/// positive limiting ratio (the vertices of the Omega arches); such ends and
/// ends cut off by eta_max are tagged Finite.
inline std::vector<XiInterval> xi_domain(const Parameter &a, double eta_max)
{
    if (!(eta_max > 0.0) || !std::isfinite(eta_max)) {
        throw domain_error("xi_domain: eta_max must be positive and finite");
    }
    auto bps = detail::breakpoints(a, eta_max);
    std::vector<detail::Breakpoint> cuts{{0.0, true, true}};
    cuts.insert(cuts.end(), bps.begin(), bps.end());
    if (cuts.back().eta < eta_max) {
        cuts.push_back({eta_max, true, true});
    }
    std::vector<XiInterval> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i].eta, hi = cuts[i + 1].eta;
        if (detail::ratio_positive(a.value(), 0.5 * (lo + hi))) {
            out.push_back({static_cast<int>(out.size()), lo, hi, detail::tag_of(cuts[i]), detail::tag_of(cuts[i + 1])});
        }
    }
    return out;
}

namespace detail
{

// Sign-change scan at resolution pi/2048 followed by bisection.
template <class F>
std::vector<double> scan_roots(F &&g, double lo, double hi)
{
    std::vector<double> out;
    const double step = pi / 2048.0;
    const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
    const double h = (hi - lo) / n;
    double x0 = lo + 1e-3 * h, g0 = g(x0);
    for (int i = 1; i <= n; ++i) {
        const double x1 = i == n ? hi - 1e-3 * h : lo + i * h;
        const double g1 = g(x1);
        // Sign changes buried in rounding noise (next to higher-order zeros) are ignored.
        if (std::abs(g0) > 1e-12 && std::abs(g1) > 1e-12 && (g0 < 0.0) != (g1 < 0.0)) {
            double l = x0, r = x1, gl = g0;
            while (r - l > 1e-12) {
                const double m = 0.5 * (l + r);
                const double gm = g(m);
                if ((gm < 0.0) == (gl < 0.0)) {
                    l = m;
                    gl = gm;
                } else {
                    r = m;
                }
            }
            out.push_back(0.5 * (l + r));
        }
        x0 = x1;
        g0 = g1;
    }
    return out;
}

} // namespace detail

/// Critical points of xi on an interval: solutions of sin(2 a eta) = a sin(2 eta).
///
/// Finite-tagged ends that are arch vertices are included as extrema.
inline std::vector<double> xi_extrema(const Parameter &a, const XiInterval &iv)
{
    if (!(iv.lo < iv.hi)) {
        throw domain_error("xi_extrema: empty interval");
    }
    const double s = a.value();
    auto g = [s](double eta) { return std::sin(2.0 * s * eta) - s * std::sin(2.0 * eta); };
    std::vector<double> out;
    auto vertex = [&](double eta, EndTag t) {
        return t == EndTag::Finite && std::abs(g(eta)) <= 1e-10 && std::abs(std::sin((1.0 + s) * eta)) < 1e-9;
    };
    if (vertex(iv.lo, iv.left)) {
        out.push_back(iv.lo);
    }
    for (double r : detail::scan_roots(g, iv.lo, iv.hi)) {
        out.push_back(r);
    }
    if (vertex(iv.hi, iv.right)) {
        out.push_back(iv.hi);
    }
    return out;
}

/// Zeros of xi in [0, eta_max]: candidates k pi / a and pi/2 + k pi that lie in the domain.
inline std::vector<double> xi_zeros(const Parameter &a, double eta_max)
{
    const double s = a.value();
    std::vector<double> cand;
    for (int k = 1; k * pi / s <= eta_max; ++k) {
        cand.push_back(k * pi / s);
    }
    for (int k = 0; pi / 2 + k * pi <= eta_max; ++k) {
        cand.push_back(pi / 2 + k * pi);
    }
    std::sort(cand.begin(), cand.end());
    std::vector<double> out;
    for (double eta : cand) {
        const double num = std::sin((1.0 - s) * eta), den = std::sin((1.0 + s) * eta);
        if (std::abs(num) < 1e-9 || std::abs(den) < 1e-9 || (num > 0.0) != (den > 0.0)) {
            continue;
        }
        if (std::abs(std::log(num / den) / (2.0 * s)) <= 1e-10
            && (out.empty() || std::abs(out.back() - eta) > 1e-12 * eta)) {
            out.push_back(eta);
        }
    }
    return out;
}

/// Real part of f along the lower boundary arch of Omega_0, eta in (0, pi/(1+a)).
inline double boundary_image_x(const Parameter &a, double eta)
{
    const double s = a.value();
    if (!(eta > 0.0 && eta < pi / (1.0 + s))) {
        throw domain_error("boundary_image_x: eta must lie in (0, pi/(1+a))");
    }
    const double ratio = std::sin((1.0 - s) * eta) / std::sin((1.0 + s) * eta);
    return -std::sin(2.0 * eta * s) / (2.0 * std::sin(eta * (1.0 + s))) * std::pow(ratio, (1.0 - s) / (2.0 * s));
}

/// Image of the horizontal line xi = xi0 through the two-exponential form of f.
inline complex g_curve(const Parameter &a, double xi0, double eta)
{
    const double s = a.value();
    detail::check_range(a, {xi0, eta});
    const double alpha = 0.5 * std::exp(xi0 * (1.0 + s));
    const double beta = 0.5 * std::exp(xi0 * (1.0 - s));
    return {alpha * std::cos(eta * (1.0 + s)) - beta * std::cos(eta * (1.0 - s)),
            alpha * std::sin(eta * (1.0 + s)) - beta * std::sin(eta * (1.0 - s))};
}

enum class Shape { Parabolic, Cubic };

inline std::string to_string(Shape s)
{
    return s == Shape::Parabolic ? "parabolic" : "cubic";
}

struct GammaCurve {
    int k;
    Shape shape;
    double lo;
    double hi;
    bool includes_ray;
};

/// One curve per domain interval of xi over one period of f.
inline std::vector<GammaCurve> gamma_curves(const Parameter &a)
{
    const auto period = a.period();
    if (!period) {
        throw unsupported_error("gamma_curves requires a rational parameter");
    }
    std::vector<GammaCurve> out;
    for (const auto &iv : xi_domain(a, *period)) {
        const bool cubic = iv.left == EndTag::MinusInf || iv.right == EndTag::MinusInf;
        out.push_back({iv.k, cubic ? Shape::Cubic : Shape::Parabolic, iv.lo, iv.hi, !cubic});
    }
    return out;
}

enum class RegionKind { Omega, D, Unresolved };

struct RegionId {
    RegionKind kind;
    std::int64_t k;
    friend bool operator==(const RegionId &, const RegionId &) = default;
};

inline std::string to_string(const RegionId &r)
{
    switch (r.kind) {
        case RegionKind::Omega:
            return "omega:" + std::to_string(r.k);
        case RegionKind::D:
            return "d:" + std::to_string(r.k);
        case RegionKind::Unresolved:
            return "unresolved";
    }
    return "?";
}

// Angular sector {z != 0 : 0 < arg(z) - lo (mod 2 pi) < width}.
// The extended sector also contains the ray arg(z) = lo + width.
struct Sector {
    double lo;
    double width;

    // Offset of arg z from lo, reduced to [0, 2 pi).
    double offset(complex z) const
    {
        double d = std::fmod(std::arg(z) - lo, 2.0 * pi);
        if (d < 0.0) {
            d += 2.0 * pi;
        }
        return d;
    }

    bool contains(complex z, bool extended = false, double tol = 1e-12) const
    {
        if (z == complex{}) {
            return false;
        }
        const double d = offset(z);
        const bool full = width >= 2.0 * pi - tol;
        if (full) {
            return extended || (d > tol && d < 2.0 * pi - tol);
        }
        if (d > tol && d < width - tol) {
            return true;
        }
        return extended && std::abs(d - width) <= tol;
    }
};

/// Layout of the w-plane codomains for a parameter.
///
/// The plane is cut into horizontal strips (c_{s-1}, c_s] with c_s = s pi / a.
/// Each strip holds the part of Omega_{s-1} and Omega_s lying in it and r
/// regions D separated by the cubic boundary curves; the D regions are numbered
/// consecutively upwards, skipping 0, with D(-1) directly below Omega_0.
class Geometry
{
public:
    static constexpr double boundary_tol = 1e-9;

    struct Cubic {
        double lo;
        double hi;
        double num_zero; // eta where the curve runs off to xi = -inf
        bool falling;    // +inf at lo, -inf at hi
    };

    explicit Geometry(const Parameter &a) : m_a(a), m_c(pi / a.value()), m_xi_a(xi_a(a))
    {
        const double s = a.value();
        m_half_width = pi / (1.0 + s);
        if (const auto &ex = a.exact()) {
            const auto [p, q] = *ex;
            const auto g = std::gcd(q + p, q - p);
            const auto stride = (q - p) / g;
            for (std::int64_t m = 1;; ++m) {
                // m pi / (1-a) < pi / a  <=>  m p < q - p
                if (m * p >= q - p) {
                    break;
                }
                if (m % stride == 0) {
                    continue;
                }
                const double eta = static_cast<double>(m * q) * pi / static_cast<double>(q - p);
                const double level = (1.0 + s) * eta / pi;
                const double sign = (m % 2 == 0 ? 1.0 : -1.0) * std::sin((1.0 + s) * eta);
                if (sign > 0.0) {
                    m_cubics.push_back({eta, std::ceil(level) * pi / (1.0 + s), eta, false});
                } else {
                    m_cubics.push_back({std::floor(level) * pi / (1.0 + s), eta, eta, true});
                }
            }
        }
    }

    const Parameter &parameter() const noexcept { return m_a; }
    double spacing() const noexcept { return m_c; }
    const std::vector<Cubic> &cubics() const noexcept { return m_cubics; }
    int regions_per_strip() const noexcept { return static_cast<int>(m_cubics.size()) + 1; }

    bool in_omega(std::int64_t k, complex w) const
    {
        const double d = w.imag() - static_cast<double>(k) * m_c;
        if (!(std::abs(d) < m_half_width)) {
            return false;
        }
        if (d == 0.0) {
            return w.real() >= m_xi_a - boundary_tol;
        }
        const double level = xi(m_a, std::abs(d));
        return d > 0.0 ? w.real() >= level - boundary_tol : w.real() > level + boundary_tol;
    }

    std::optional<std::int64_t> omega_index(complex w) const
    {
        const auto k = static_cast<std::int64_t>(std::llround(w.imag() / m_c));
        for (auto j : {k, k - 1, k + 1}) {
            if (in_omega(j, w)) {
                return j;
            }
        }
        return std::nullopt;
    }

    RegionId region_of(complex w) const
    {
        if (const auto k = omega_index(w)) {
            return {RegionKind::Omega, *k};
        }
        if (!m_a.is_rational()) {
            return {RegionKind::Unresolved, 0};
        }
        const auto s = static_cast<std::int64_t>(std::ceil((w.imag() - boundary_tol) / m_c));
        const double e = w.imag() - static_cast<double>(s - 1) * m_c;
        std::int64_t j = 1;
        for (const auto &cb : m_cubics) {
            if (above(cb, w.real(), e)) {
                ++j;
            }
        }
        return {RegionKind::D, d_index((s - 1) * regions_per_strip() + (j - 1))};
    }

    // Consecutive numbering of D regions (ordinal 0 is the first region above eta = 0).
    static std::int64_t d_index(std::int64_t ordinal) noexcept { return ordinal >= 0 ? ordinal + 1 : ordinal; }
    static std::int64_t d_ordinal(std::int64_t index) noexcept { return index > 0 ? index - 1 : index; }

    // Strip number s and position j (1-based) of a D region.
    std::pair<std::int64_t, int> d_position(std::int64_t index) const
    {
        const auto n = d_ordinal(index);
        const auto r = regions_per_strip();
        const auto j = detail::floor_mod(n, r);
        return {(n - j) / r + 1, static_cast<int>(j) + 1};
    }

    // Heights of the two asymptotic channels (xi -> -inf) bounding a D region.
    std::pair<double, double> d_channels(std::int64_t index) const
    {
        const auto [s, j] = d_position(index);
        const double base = static_cast<double>(s - 1) * m_c;
        auto bound = [&](int i) {
            if (i == 0) {
                return 0.0;
            }
            if (i == regions_per_strip()) {
                return m_c;
            }
            return m_cubics[static_cast<std::size_t>(i - 1)].num_zero;
        };
        return {base + bound(j - 1), base + bound(j)};
    }

    // The z-plane sector onto which f maps a D region.
    Sector d_sector(std::int64_t index) const
    {
        const auto [lo, hi] = d_channels(index);
        const double s = m_a.value();
        return {pi + (1.0 - s) * lo, (1.0 - s) * (hi - lo)};
    }

private:
    bool above(const Cubic &cb, double x, double e) const
    {
        if (cb.falling) {
            if (e > cb.hi + boundary_tol) {
                return true;
            }
            if (e <= cb.lo || e >= cb.hi - boundary_tol) {
                return false;
            }
            return x > curve(e) + boundary_tol;
        }
        if (e >= cb.hi) {
            return true;
        }
        if (e <= cb.lo + boundary_tol) {
            return false;
        }
        return x < curve(e) - boundary_tol;
    }

    double curve(double e) const
    {
        const double s = m_a.value();
        const double ratio = std::sin((1.0 - s) * e) / std::sin((1.0 + s) * e);
        return ratio > 0.0 ? std::log(ratio) / (2.0 * s) : -std::numeric_limits<double>::infinity();
    }

    Parameter m_a;
    double m_c;
    double m_xi_a;
    double m_half_width;
    std::vector<Cubic> m_cubics;
};

/// Codomain region containing w; boundaries belong to the region below them.
inline RegionId region_of(const Parameter &a, complex w)
{
    return Geometry(a).region_of(w);
}

} // namespace psiw

#endif
