#ifndef PSIW_PARAMETER_HPP
#define PSIW_PARAMETER_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace psiw
{

// How the branch structure of the inverse depends on a.
enum class Category {
    IntegerRatio,    // (1+a)/(1-a) is a natural number
    RationalGeneric, // a rational, (1+a)/(1-a) not a natural number
    Irrational       // a supplied as a bare floating value
};

inline std::string to_string(Category c)
{
    switch (c) {
        case Category::IntegerRatio:
            return "integer-ratio";
        case Category::RationalGeneric:
            return "rational-generic";
        case Category::Irrational:
            return "irrational";
    }
    return "?";
}

struct Fraction {
    std::int64_t p;
    std::int64_t q;
    friend bool operator==(const Fraction &, const Fraction &) = default;
};

// The shape parameter 0 < a < 1 of f(w) = sinh(a w) e^w.
//
// Rational values must be built from an integer pair; a plain double is always
// classified as irrational because category detection from a float is ill-posed.
class Parameter
{
public:
    static Parameter rational(std::int64_t p, std::int64_t q)
    {
        if (q <= 0 || p <= 0 || p >= q) {
            throw domain_error("parameter p/q must satisfy 0 < p < q");
        }
        const auto g = std::gcd(p, q);
        return Parameter(static_cast<double>(p / g) / static_cast<double>(q / g), Fraction{p / g, q / g});
    }

    static Parameter real(double a)
    {
        if (!(a > 0.0 && a < 1.0)) {
            throw domain_error("parameter a must lie in (0, 1)");
        }
        return Parameter(a, std::nullopt);
    }

    // Accepts "p/q" (exact) or a decimal literal (treated as irrational).
    static Parameter parse(std::string_view text)
    {
        const auto slash = text.find('/');
        if (slash != std::string_view::npos) {
            std::int64_t p = 0, q = 0;
            const auto lhs = text.substr(0, slash);
            const auto rhs = text.substr(slash + 1);
            auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), p);
            auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), q);
            if (r1.ec != std::errc{} || r1.ptr != lhs.data() + lhs.size() || r2.ec != std::errc{}
                || r2.ptr != rhs.data() + rhs.size()) {
                throw std::invalid_argument("malformed rational parameter '" + std::string(text) + "'");
            }
            return rational(p, q);
        }
        double v = 0.0;
        auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
            throw std::invalid_argument("malformed parameter '" + std::string(text) + "'");
        }
        return real(v);
    }

    double value() const noexcept { return m_value; }
    const std::optional<Fraction> &exact() const noexcept { return m_exact; }
    Category category() const noexcept { return m_category; }
    bool is_rational() const noexcept { return m_exact.has_value(); }

    // Spacing pi/a between consecutive principal codomains Omega_k.
    double omega_spacing() const noexcept { return std::numbers::pi / m_value; }

    // Imaginary period of f as an eta-length: q*pi if p+q is even, else 2*q*pi.
    std::optional<double> period() const noexcept
    {
        if (!m_exact) {
            return std::nullopt;
        }
        const auto [p, q] = *m_exact;
        return ((p + q) % 2 == 0 ? 1.0 : 2.0) * static_cast<double>(q) * std::numbers::pi;
    }

    // Number of principal sheets Omega_k per period (p or 2p).
    std::optional<int> principal_sheets_per_period() const noexcept
    {
        if (!m_exact) {
            return std::nullopt;
        }
        const auto [p, q] = *m_exact;
        return static_cast<int>((p + q) % 2 == 0 ? p : 2 * p);
    }

    // True when 1/a is an integer; then every Omega_k boundary lies on the graph of Xi.
    bool is_unit_fraction() const noexcept { return m_exact && m_exact->p == 1; }

    std::string to_string() const
    {
        if (m_exact) {
            return std::to_string(m_exact->p) + "/" + std::to_string(m_exact->q);
        }
        char buf[32];
        auto r = std::to_chars(buf, buf + sizeof(buf), m_value, std::chars_format::general, 17);
        return std::string(buf, r.ptr);
    }

private:
    Parameter(double v, std::optional<Fraction> exact) : m_value(v), m_exact(exact)
    {
        if (!m_exact) {
            m_category = Category::Irrational;
        } else {
            const auto [p, q] = *m_exact;
            m_category = ((q + p) % (q - p) == 0) ? Category::IntegerRatio : Category::RationalGeneric;
        }
    }

    double m_value;
    std::optional<Fraction> m_exact;
    Category m_category = Category::Irrational;
};

} // namespace psiw

#endif
