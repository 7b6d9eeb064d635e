#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace mtconv {

/// A right-tail probability carried in log10 so that values far below the
/// double range stay meaningful.
struct p_value {
    double log10_p = 0.0;

    /// Reports below this are printed as a bound rather than a number.
    static constexpr double reporting_floor_log10 = -320.0;

    /// The probability as a double (0 once it underflows).
    [[nodiscard]] double value() const noexcept { return std::pow(10.0, log10_p); }
    [[nodiscard]] bool below_reporting_floor() const noexcept { return log10_p < reporting_floor_log10; }

    /// "0.4213", "3.3e-52", or "< 1e-320".
    [[nodiscard]] std::string to_string() const {
        if (below_reporting_floor()) return "< 1e-320";
        const double v = value();
        if (v >= 1e-3) return fmt::format("{:.4f}", v);
        return fmt::format("{:.2g}", v);
    }
};

namespace detail {

inline constexpr double ln10 = 2.302585092994045684;

/// ln of the common prefactor x^a e^-x / Gamma(a).
inline double log_gamma_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

/// ln P(a, x) by the power series; valid and efficient for x < a + 1.
inline double log_gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 100000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return std::log(sum) + log_gamma_prefactor(a, x);
}

/// ln Q(a, x) by the modified Lentz continued fraction; for x >= a + 1.
inline double log_gamma_q_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return std::log(h) + log_gamma_prefactor(a, x);
}

}  // namespace detail

/// ln of the regularized lower incomplete gamma P(a, x).
[[nodiscard]] inline double log_gamma_p(double a, double x) {
    if (!(a > 0) || !(x >= 0) || !std::isfinite(a) || !std::isfinite(x))
        throw std::domain_error("log_gamma_p: invalid arguments");
    if (x == 0) return -std::numeric_limits<double>::infinity();
    if (x < a + 1.0) return detail::log_gamma_p_series(a, x);
    return std::log1p(-std::exp(detail::log_gamma_q_fraction(a, x)));
}

/// ln of the regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
[[nodiscard]] inline double log_gamma_q(double a, double x) {
    if (!(a > 0) || !(x >= 0) || !std::isfinite(a) || !std::isfinite(x))
        throw std::domain_error("log_gamma_q: invalid arguments");
    if (x == 0) return 0.0;
    if (x < a + 1.0) return std::log1p(-std::exp(detail::log_gamma_p_series(a, x)));
    return detail::log_gamma_q_fraction(a, x);
}

/// P(Y >= observed) for Y ~ Poisson(mean).
[[nodiscard]] inline p_value p_value_poisson(std::uint64_t observed, double mean) {
    if (!std::isfinite(mean) || !(mean > 0)) throw std::domain_error("p_value_poisson: mean must be finite and > 0");
    if (observed == 0) return {0.0};
    // P(Y >= k) = P(k, mean), the regularized lower incomplete gamma.
    return {log_gamma_p(static_cast<double>(observed), mean) / detail::ln10};
}

/// P(X >= stat) for X ~ chi-square with `dof` degrees of freedom.
[[nodiscard]] inline p_value p_value_chisq(double stat, std::uint64_t dof) {
    if (!std::isfinite(stat) || stat < 0) throw std::domain_error("p_value_chisq: statistic must be finite and >= 0");
    if (dof == 0) throw std::domain_error("p_value_chisq: dof must be >= 1");
    if (stat == 0) return {0.0};
    return {log_gamma_q(0.5 * static_cast<double>(dof), 0.5 * stat) / detail::ln10};
}

}  // namespace mtconv
