// SPDX-License-Identifier: Apache-2.0
#ifndef HSL_CORE_HPP
#define HSL_CORE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace hsl {

/// 1-based index type used throughout the library.
using index_t = std::int64_t;

/// Outcome of an inequality check.  `inconclusive` can only arise from
/// Monte Carlo estimates whose confidence band straddles the bound.
enum class check_status { pass, inconclusive, violation };

inline const char* to_string(check_status s) {
    switch (s) {
        case check_status::pass: return "pass";
        case check_status::inconclusive: return "inconclusive";
        default: return "violation";
    }
}

/// Estimator selection for verification routines: exhaustive Rademacher
/// enumeration (exact) or seeded Monte Carlo with a replica count.
struct run_mode {
    enum class kind_t { exact, monte_carlo } kind = kind_t::monte_carlo;
    std::uint64_t replicas = 100000;

    static run_mode exact() { return {kind_t::exact, 0}; }
    static run_mode monte_carlo(std::uint64_t replicas) {
        return {kind_t::monte_carlo, replicas};
    }
    bool is_exact() const { return kind == kind_t::exact; }
};

// Neumaier-compensated accumulator.  Long diagonals (N ~ 1e4) must meet
// 1e-12 identity tolerances, which naive summation does not guarantee.
class neumaier_sum {
  public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
    neumaier_sum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

/// Squared Euclidean norm of a small coordinate block.
inline double norm_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(norm_sq(v)); }

namespace detail {

// Three-way classification of "lhs <= rhs" evidence.  Exact comparisons get a
// relative slack of a few ulps so a genuinely tight bound does not flicker.
inline check_status classify_exact(double lhs, double rhs) {
    const double slack = 1e-12 * std::max(1.0, std::abs(rhs));
    return lhs <= rhs + slack ? check_status::pass : check_status::violation;
}

// Monte Carlo rule: pass when mean + 3se <= rhs, violation only when
// mean - 3se > rhs, otherwise statistically inconclusive.
inline check_status classify_mc(double mean, double se, double rhs,
                                double rhs_se = 0.0) {
    const double band = 3.0 * std::sqrt(se * se + rhs_se * rhs_se);
    if (mean + band <= rhs) return check_status::pass;
    if (mean - band > rhs) return check_status::violation;
    return check_status::inconclusive;
}

}  // namespace detail
}  // namespace hsl

#endif
