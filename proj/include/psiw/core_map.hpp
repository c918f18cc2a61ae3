#ifndef PSIW_CORE_MAP_HPP
#define PSIW_CORE_MAP_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parameter.hpp"

namespace psiw
{

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

namespace detail
{

// Largest |Re w| (1+a) accepted before e^{(1+a) Re w} could overflow.
inline double range_limit() noexcept
{
    return std::log(std::numeric_limits<double>::max()) - 2.0;
}

inline void check_range(const Parameter &a, complex w)
{
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
        throw range_error("non-finite argument");
    }
    if (std::abs(w.real()) * (1.0 + a.value()) > range_limit()) {
        throw range_error("|Re w| too large for binary64 evaluation of f");
    }
}

inline std::int64_t floor_mod(std::int64_t x, std::int64_t m) noexcept
{
    const auto r = x % m;
    return r < 0 ? r + m : r;
}

// e^{i pi m / n} with exact values on the quarter turns.
inline complex unit_root(std::int64_t m, std::int64_t n)
{
    m = floor_mod(m, 2 * n);
    if (m == 0) {
        return {1.0, 0.0};
    }
    if (m == n) {
        return {-1.0, 0.0};
    }
    if (2 * m == n) {
        return {0.0, 1.0};
    }
    if (2 * m == 3 * n) {
        return {0.0, -1.0};
    }
    // Reduce to (-pi, pi] before calling the trigonometric functions.
    if (m > n) {
        m -= 2 * n;
    }
    const double t = pi * static_cast<double>(m) / static_cast<double>(n);
    return {std::cos(t), std::sin(t)};
}

} // namespace detail

// Rotation e^{i (1+a) k pi / a} relating f on Omega_k to f on Omega_0:
// f(w + i k pi / a) = f(w) * rotation(a, k).
inline complex rotation(const Parameter &a, std::int64_t k)
{
    if (const auto &ex = a.exact()) {
        return detail::unit_root(k * (ex->q + ex->p), ex->p);
    }
    const double t = std::remainder((1.0 + a.value()) * static_cast<double>(k) * pi / a.value(), 2.0 * pi);
    return std::polar(1.0, t);
}

/// The real critical value x_a = f(xi_a), where the two real branches meet.
inline double x_a(const Parameter &a)
{
    const double s = a.value();
    return -s / (1.0 + s) * std::exp((1.0 - s) / (2.0 * s) * std::log((1.0 - s) / (1.0 + s)));
}

/// The real critical point xi_a = ln((1-a)/(1+a)) / (2a).
inline double xi_a(const Parameter &a)
{
    const double s = a.value();
    return std::log((1.0 - s) / (1.0 + s)) / (2.0 * s);
}

/// f(w) = sinh(a w) e^w, evaluated from its real coordinate form.
///
/// Throws range_error when e^{(1+a) Re w} would leave the floating range.
inline complex eval_f(const Parameter &a, complex w)
{
    detail::check_range(a, w);
    const double s = a.value();
    const double xi = w.real(), eta = w.imag();
    const double e = std::exp(xi);
    const double sh = std::sinh(s * xi), ch = std::cosh(s * xi);
    const double ca = std::cos(s * eta), sa = std::sin(s * eta);
    const double c = std::cos(eta), sn = std::sin(eta);
    // sinh(a w) = sh*ca + i ch*sa, e^w = e (c + i sn)
    const double re = sh * ca, im = ch * sa;
    return {e * (re * c - im * sn), e * (re * sn + im * c)};
}

/// f'(w) = e^w (a cosh(a w) + sinh(a w)).
inline complex f_prime(const Parameter &a, complex w)
{
    detail::check_range(a, w);
    const double s = a.value();
    return std::exp(w) * (s * std::cosh(s * w) + std::sinh(s * w));
}

inline complex f_second(const Parameter &a, complex w)
{
    detail::check_range(a, w);
    const double s = a.value();
    return std::exp(w) * ((1.0 + s * s) * std::sinh(s * w) + 2.0 * s * std::cosh(s * w));
}

/// Jacobian of (xi, eta) -> (x, y); equals |f'(w)|^2 and is never negative.
inline double jacobian(const Parameter &a, complex w)
{
    detail::check_range(a, w);
    const double s = a.value();
    const double xi = w.real(), eta = w.imag();
    const double t = (1.0 + s) * (1.0 + s) * std::exp(2.0 * s * xi) + (1.0 - s) * (1.0 - s) * std::exp(-2.0 * s * xi)
                     - 2.0 * (1.0 - s * s) * std::cos(2.0 * eta * s);
    return 0.25 * std::exp(2.0 * xi) * std::max(t, 0.0);
}

struct CriticalPoint {
    std::int64_t k;
    complex w; // xi_a + i k pi / a
    complex z; // f(w)
};

inline CriticalPoint critical_point(const Parameter &a, std::int64_t k)
{
    const complex w{xi_a(a), static_cast<double>(k) * pi / a.value()};
    const complex r = rotation(a, k);
    const double x = x_a(a);
    return {k, w, {x * r.real() + 0.0, x * r.imag() + 0.0}};
}

inline std::vector<CriticalPoint> critical_points(const Parameter &a, std::int64_t k_min, std::int64_t k_max)
{
    if (k_min > k_max) {
        throw domain_error("critical_points: k_min > k_max");
    }
    std::vector<CriticalPoint> out;
    out.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    for (auto k = k_min; k <= k_max; ++k) {
        out.push_back(critical_point(a, k));
    }
    return out;
}

namespace detail
{

inline void push_distinct(std::vector<complex> &pts, complex z)
{
    for (const auto &p : pts) {
        if (std::abs(p - z) <= 1e-13) {
            return;
        }
    }
    pts.push_back(z);
}

// Canonical order: by argument in (-pi, pi], then by modulus.
inline void sort_points(std::vector<complex> &pts)
{
    std::sort(pts.begin(), pts.end(), [](complex l, complex r) {
        const double al = l == complex{} ? -10.0 : std::arg(l);
        const double ar = r == complex{} ? -10.0 : std::arg(r);
        if (al != ar) {
            return al < ar;
        }
        return std::abs(l) < std::abs(r);
    });
}

} // namespace detail

/// Distinct critical values z_k over one period (only z_0 for irrational a).
inline std::vector<complex> critical_values(const Parameter &a)
{
    std::vector<complex> out;
    const int n = a.principal_sheets_per_period().value_or(1);
    for (int k = 0; k < n; ++k) {
        detail::push_distinct(out, critical_point(a, k).z);
    }
    detail::sort_points(out);
    return out;
}

/// Branch points of psi: the critical values together with 0.
inline std::vector<complex> branch_points(const Parameter &a)
{
    auto out = critical_values(a);
    detail::push_distinct(out, complex{0.0, 0.0});
    detail::sort_points(out);
    return out;
}

/// Derivative of any branch of psi at z, given the branch value w = psi(z).
///
/// Throws singularity_error at (or numerically on top of) a critical point.
inline complex psi_prime(const Parameter &a, complex z, complex w)
{
    const complex fw = eval_f(a, w);
    if (std::abs(fw - z) > 1e-8 * std::max(1.0, std::abs(z))) {
        throw domain_error("psi_prime: w is not a preimage of z");
    }
    const complex d = f_prime(a, w);
    if (std::abs(d) < 1e-10) {
        throw singularity_error("psi' is undefined at a critical point");
    }
    return 1.0 / d;
}

} // namespace psiw

#endif
