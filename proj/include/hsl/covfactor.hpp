// SPDX-License-Identifier: Apache-2.0
//
// Covariance structures and their triangular factorizations: a dense
// Cholesky with an explicit pivot-failure contract, the fractional Gaussian
// noise kernel, and the closed-form index-0 model.
#ifndef HSL_COVFACTOR_HPP
#define HSL_COVFACTOR_HPP

#include <vector>

#include "hsl/coeffs.hpp"
#include "hsl/core.hpp"

namespace hsl::covfactor {

using coeffs::coefficient_matrix;

/// fGN kernel r(n-m) = 1/2 |k+1|^{2H} + 1/2 |k-1|^{2H} - |k|^{2H} with the
/// convention |0|^{2H} := 0 for every H in [0,1).  That convention is the
/// unique one reproducing the index-0 covariances (1, -1/2, 0, 0, ...).
inline double fgn_covariance(double hurst, index_t n, index_t m) {
    if (!(hurst >= 0.0 && hurst < 1.0))
        throw std::invalid_argument("Hurst index must lie in [0, 1)");
    const double k = std::abs(static_cast<double>(n - m));
    const auto p = [hurst](double x) {
        return x == 0.0 ? 0.0 : std::pow(x, 2.0 * hurst);
    };
    return 0.5 * p(k + 1.0) + 0.5 * p(std::abs(k - 1.0)) - p(k);
}

class covariance_spec {
  public:
    /// Explicit symmetric matrix, row-major.  Positive semidefiniteness is
    /// checked during factorization, not here.
    static covariance_spec explicit_matrix(index_t n, std::vector<double> row_major) {
        if (n < 1) throw std::invalid_argument("covariance size must be >= 1");
        if (row_major.size() != static_cast<std::size_t>(n) * n)
            throw std::invalid_argument("covariance storage size mismatch");
        double scale = 0.0;
        for (double v : row_major) scale = std::max(scale, std::abs(v));
        for (index_t i = 0; i < n; ++i)
            for (index_t j = 0; j < i; ++j) {
                const double a = row_major[static_cast<std::size_t>(i * n + j)];
                const double b = row_major[static_cast<std::size_t>(j * n + i)];
                if (std::abs(a - b) > 1e-12 * std::max(1.0, scale))
                    throw std::invalid_argument(
                        "covariance matrix is not symmetric at (" +
                        std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            }
        covariance_spec s;
        s.n_ = n;
        s.data_ = std::move(row_major);
        return s;
    }

    static covariance_spec fgn(double hurst, index_t n) {
        if (n < 1) throw std::invalid_argument("covariance size must be >= 1");
        if (!(hurst >= 0.0 && hurst < 1.0))
            throw std::invalid_argument("Hurst index must lie in [0, 1)");
        covariance_spec s;
        s.n_ = n;
        s.fgn_ = true;
        s.hurst_ = hurst;
        return s;
    }

    index_t size() const { return n_; }
    bool is_fgn() const { return fgn_; }
    double hurst() const { return hurst_; }

    double at(index_t n, index_t m) const {
        if (n < 1 || m < 1 || n > n_ || m > n_)
            throw std::out_of_range("covariance index out of range");
        if (fgn_) return fgn_covariance(hurst_, n, m);
        return data_[static_cast<std::size_t>((n - 1) * n_ + (m - 1))];
    }

  private:
    covariance_spec() = default;
    index_t n_ = 0;
    bool fgn_ = false;
    double hurst_ = 0.0;
    std::vector<double> data_;
};

/// Signals a numerically non-positive-definite pivot; names the 1-based
/// pivot index so an inadmissible covariance fails loudly.
class factorization_error : public std::runtime_error {
  public:
    factorization_error(index_t pivot, double value)
        : std::runtime_error("factorization pivot " + std::to_string(pivot) +
                             " is not positive (value " + std::to_string(value) + ")"),
          pivot_(pivot), value_(value) {}
    index_t pivot_index() const { return pivot_; }
    double pivot_value() const { return value_; }

  private:
    index_t pivot_;
    double value_;
};

/// Dense lower Cholesky with nonnegative diagonal.  The pivot tolerance is
/// relative to the largest diagonal entry of the covariance.
inline coefficient_matrix<double> cholesky_lower(const covariance_spec& spec,
                                                 double pivot_rel_tol = 1e-12) {
    const index_t n = spec.size();
    double max_diag = 0.0;
    for (index_t i = 1; i <= n; ++i) max_diag = std::max(max_diag, spec.at(i, i));
    const double tol = pivot_rel_tol * std::max(max_diag, 1.0e-300);

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (index_t i = 1; i <= n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i - 1)];
        row.assign(static_cast<std::size_t>(i), 0.0);
        for (index_t j = 1; j <= i; ++j) {
            neumaier_sum dot;
            const auto& rj = rows[static_cast<std::size_t>(j - 1)];
            for (index_t k = 1; k < j; ++k)
                dot.add(row[static_cast<std::size_t>(k - 1)] *
                        rj[static_cast<std::size_t>(k - 1)]);
            const double s = spec.at(i, j) - dot.value();
            if (j < i) {
                row[static_cast<std::size_t>(j - 1)] =
                    s / rj[static_cast<std::size_t>(j - 1)];
            } else {
                if (s <= tol) throw factorization_error(j, s);
                row[static_cast<std::size_t>(j - 1)] = std::sqrt(s);
            }
        }
    }
    return coefficient_matrix<double>::from_rows(std::move(rows));
}

/// Explicit index-0 model: row n is (-sqrt((n-1)/(2n)), sqrt((n+1)/(2n)))
/// at columns n-1, n; row 1 is (1).  Banded with bandwidth 1, unit row norm.
inline coefficient_matrix<double> fgn0_coefficients(index_t n) {
    if (n < 1) throw std::invalid_argument("size must be >= 1");
    return coefficient_matrix<double>(
        [](index_t row, index_t col) {
            const double r = static_cast<double>(row);
            if (col == row) return std::sqrt((r + 1.0) / (2.0 * r));
            if (col == row - 1) return -std::sqrt((r - 1.0) / (2.0 * r));
            return 0.0;
        },
        n, {coeffs::support_kind::banded, 1});
}

struct factorization_report {
    double max_abs_deviation = 0.0;
    index_t worst_n = 0;
    index_t worst_m = 0;
    double tol = 0.0;
    bool pass = false;
};

/// Recomputes M M^T and reports the worst elementwise deviation from the
/// covariance.
inline factorization_report verify_factorization(const coefficient_matrix<double>& m,
                                                 const covariance_spec& spec,
                                                 double tol) {
    const index_t n = spec.size();
    if (m.truncation_order() < n)
        throw std::invalid_argument("factor truncation order smaller than covariance");
    factorization_report rep;
    rep.tol = tol;
    for (index_t i = 1; i <= n; ++i)
        for (index_t j = 1; j <= i; ++j) {
            neumaier_sum dot;
            for (index_t k = 1; k <= j; ++k) dot.add(m.at(i, k) * m.at(j, k));
            const double dev = std::abs(dot.value() - spec.at(i, j));
            if (dev > rep.max_abs_deviation) {
                rep.max_abs_deviation = dev;
                rep.worst_n = i;
                rep.worst_m = j;
            }
        }
    rep.pass = rep.max_abs_deviation <= tol;
    return rep;
}

/// Factorizations are unique only up to column signs; flip columns so that
/// every diagonal entry is nonnegative before elementwise comparisons.
inline coefficient_matrix<double> normalize_column_signs(
    const coefficient_matrix<double>& m) {
    const index_t n = m.truncation_order();
    std::vector<double> flip(static_cast<std::size_t>(n), 1.0);
    for (index_t k = 1; k <= n; ++k)
        if (m.at(k, k) < 0.0) flip[static_cast<std::size_t>(k - 1)] = -1.0;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (index_t i = 1; i <= n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i - 1)];
        row.resize(static_cast<std::size_t>(i));
        for (index_t k = 1; k <= i; ++k)
            row[static_cast<std::size_t>(k - 1)] =
                m.at(i, k) * flip[static_cast<std::size_t>(k - 1)];
    }
    return coefficient_matrix<double>::from_rows(std::move(rows));
}

}  // namespace hsl::covfactor

#endif
