// SPDX-License-Identifier: Apache-2.0
//
// Triangular coefficient matrices a(n,k), 1 <= k <= n, and the deterministic
// quantities attached to them: diagonals d_n = (a(n+k-1, k))_k, the series
// criterion  sum_n ||d_n||_l2, the maximal-inequality bound, tail terms A_N
// and B_N, and the comparison criteria (absolute sums, column sums).
//
// Every infinite sum of the theory is computed as a truncation at explicit
// cutoffs; the convergence flag is advisory evidence, never a proof.
#ifndef HSL_COEFFS_HPP
#define HSL_COEFFS_HPP

#include <algorithm>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hsl/core.hpp"

namespace hsl::coeffs {

inline double abs_sq(double x) { return x * x; }
inline double abs_sq(std::complex<double> z) { return std::norm(z); }
inline double modulus(double x) { return std::abs(x); }
inline double modulus(std::complex<double> z) { return std::abs(z); }

/// Thrown when an entry beyond the declared truncation order is requested.
class truncation_error : public std::out_of_range {
  public:
    truncation_error(index_t n, index_t k, index_t order)
        : std::out_of_range("entry (" + std::to_string(n) + "," +
                            std::to_string(k) + ") lies beyond truncation order " +
                            std::to_string(order)),
          n_(n), k_(k), order_(order) {}
    index_t row() const { return n_; }
    index_t col() const { return k_; }
    index_t order() const { return order_; }

  private:
    index_t n_, k_, order_;
};

enum class support_kind { full, banded, collinear, diagonal };

// Declared sparsity of a row: entries outside [row_begin, row_end] are
// identically zero.  `banded` with bandwidth m keeps Z_{n-m}..Z_n, i.e.
// a(n,k) = 0 for k < n - m.
struct support_info {
    support_kind kind = support_kind::full;
    index_t bandwidth = 0;

    index_t row_begin(index_t n) const {
        switch (kind) {
            case support_kind::banded: return std::max<index_t>(1, n - bandwidth);
            case support_kind::diagonal: return n;
            default: return 1;
        }
    }
    index_t row_end(index_t n) const {
        return kind == support_kind::collinear ? index_t{1} : n;
    }
};

template <class Scalar = double>
class coefficient_matrix {
  public:
    using value_type = Scalar;
    using rule_type = std::function<Scalar(index_t, index_t)>;

    /// Rule-backed matrix.  The rule must be pure: same (n,k), same value.
    coefficient_matrix(rule_type rule, index_t truncation_order,
                       support_info support = {})
        : rule_(std::move(rule)), order_(truncation_order), support_(support) {
        if (order_ < 1) throw std::invalid_argument("truncation order must be >= 1");
    }

    /// Explicit lower-triangular table; row n holds exactly n entries.
    static coefficient_matrix from_rows(std::vector<std::vector<Scalar>> rows) {
        if (rows.empty()) throw std::invalid_argument("empty coefficient table");
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].size() != i + 1)
                throw std::invalid_argument("row " + std::to_string(i + 1) +
                                            " must hold " + std::to_string(i + 1) +
                                            " entries");
        coefficient_matrix m;
        m.order_ = static_cast<index_t>(rows.size());
        m.rows_ = std::make_shared<const std::vector<std::vector<Scalar>>>(
            std::move(rows));
        return m;
    }

    Scalar at(index_t n, index_t k) const {
        if (n < 1 || k < 1) throw std::invalid_argument("indices are 1-based");
        if (n > order_) throw truncation_error(n, k, order_);
        if (k > n) return Scalar(0);
        if (rows_) return (*rows_)[static_cast<std::size_t>(n - 1)]
                                  [static_cast<std::size_t>(k - 1)];
        if (k < support_.row_begin(n) || k > support_.row_end(n)) return Scalar(0);
        return rule_(n, k);
    }

    index_t truncation_order() const { return order_; }
    const support_info& support() const { return support_; }
    bool is_explicit() const { return static_cast<bool>(rows_); }

    /// Optional closed-form upper bound on sum_{n > N} ||d_n||, used by the
    /// `analytic` tail policy.  May return +inf for divergent tails.
    void set_criterion_tail_bound(std::function<double(index_t)> f) {
        tail_bound_ = std::move(f);
    }
    const std::function<double(index_t)>& criterion_tail_bound() const {
        return tail_bound_;
    }

  private:
    coefficient_matrix() = default;

    std::shared_ptr<const std::vector<std::vector<Scalar>>> rows_;
    rule_type rule_;
    index_t order_ = 0;
    support_info support_{};
    std::function<double(index_t)> tail_bound_;
};

// ---------------------------------------------------------------------------
// Vector weights u_n for the weighted (Hilbert-space) criterion.

class vector_weights {
  public:
    using fill_type = std::function<void(index_t, std::span<double>)>;

    static vector_weights from_vectors(std::vector<std::vector<double>> vecs) {
        if (vecs.empty()) throw std::invalid_argument("empty weight table");
        const std::size_t d = vecs.front().size();
        if (d == 0) throw std::invalid_argument("weight dimension must be >= 1");
        for (const auto& v : vecs)
            if (v.size() != d)
                throw std::invalid_argument("inconsistent weight dimensions");
        vector_weights w;
        w.dim_ = static_cast<int>(d);
        w.order_ = static_cast<index_t>(vecs.size());
        w.vecs_ = std::make_shared<const std::vector<std::vector<double>>>(
            std::move(vecs));
        return w;
    }

    static vector_weights from_rule(int dim, index_t order, fill_type fill) {
        if (dim < 1) throw std::invalid_argument("weight dimension must be >= 1");
        vector_weights w;
        w.dim_ = dim;
        w.order_ = order;
        w.fill_ = std::move(fill);
        return w;
    }

    int dim() const { return dim_; }
    index_t order() const { return order_; }

    void vector(index_t n, std::span<double> out) const {
        if (n < 1 || n > order_)
            throw std::out_of_range("weight index " + std::to_string(n) +
                                    " outside 1.." + std::to_string(order_));
        if (static_cast<int>(out.size()) != dim_)
            throw std::invalid_argument("weight output span has wrong dimension");
        if (vecs_) {
            const auto& v = (*vecs_)[static_cast<std::size_t>(n - 1)];
            std::copy(v.begin(), v.end(), out.begin());
        } else {
            fill_(n, out);
        }
    }

    // ||u_n||^2, always computed from the coordinates.
    double norm_sq(index_t n) const {
        if (dim_ == 1) {
            double x;
            vector(n, {&x, 1});
            return x * x;
        }
        std::vector<double> buf(static_cast<std::size_t>(dim_));
        vector(n, buf);
        return hsl::norm_sq(buf);
    }

  private:
    vector_weights() = default;

    int dim_ = 1;
    index_t order_ = 0;
    std::shared_ptr<const std::vector<std::vector<double>>> vecs_;
    fill_type fill_;
};

// ---------------------------------------------------------------------------
// Diagonals and criterion sums.

namespace detail {

inline double unit_weight(index_t) { return 1.0; }

// ||d_n|| truncated to `count` entries, entries weighted by wsq(row index).
// Returns the compensated sum of squares before the square root.
template <class Scalar, class WFn>
double diagonal_sum_sq(const coefficient_matrix<Scalar>& m, index_t n,
                       index_t count, WFn&& wsq) {
    neumaier_sum acc;
    for (index_t k = 1; k <= count; ++k) {
        const index_t row = n + k - 1;
        const Scalar a = m.at(row, k);
        if (a != Scalar(0)) acc.add(abs_sq(a) * wsq(row));
    }
    return acc.value();
}

inline index_t clamp_inner(index_t K, index_t order, index_t n) {
    return std::min(K, order - n + 1);
}

// Stagnation evidence: the partial sums moved by less than rel_tol over running
// the last decade of indices (from floor(j/10), at least 1, up to j).
inline bool stagnated(std::span<const double> partials, double rel_tol) {
    if (partials.empty()) return true;
    const index_t j = static_cast<index_t>(partials.size());
    const index_t back = std::max<index_t>(1, j / 10);
    const double last = partials[static_cast<std::size_t>(j - 1)];
    const double earlier = partials[static_cast<std::size_t>(back - 1)];
    const double move = last - earlier;
    return move <= rel_tol * std::max(std::abs(last), 1e-300);
}

}  // namespace detail

enum class tail_policy { none, stagnation, analytic };

inline constexpr double kStagnationRelTol = 1e-8;

/// d_n truncated to K entries: (a(n,1), a(n+1,2), ..., a(n+K-1,K)).
/// Requires n + K - 1 within the truncation order.
template <class Scalar>
std::vector<Scalar> diagonal(const coefficient_matrix<Scalar>& m, index_t n,
                             index_t K) {
    if (n < 1 || K < 1) throw std::invalid_argument("diagonal requires n, K >= 1");
    std::vector<Scalar> d(static_cast<std::size_t>(K));
    for (index_t k = 1; k <= K; ++k)
        d[static_cast<std::size_t>(k - 1)] = m.at(n + k - 1, k);
    return d;
}

struct diagonal_profile {
    std::vector<double> norms;              // ||d_n||, n = 1..N
    std::vector<double> partial_criterion;  // running sums of norms
    std::vector<index_t> inner_count;       // effective per-diagonal cutoff
    std::vector<bool> inner_stagnant;       // inner sums stagnated at 1e-8
    tail_policy policy = tail_policy::stagnation;
    bool converged = false;      // advisory: criterion not falsified
    index_t first_growing = 0;   // smallest diagonal with non-stagnant inner sums
    double analytic_tail = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

template <class Scalar, class WFn>
diagonal_profile make_profile(const coefficient_matrix<Scalar>& m, index_t N,
                              index_t K, tail_policy policy, WFn&& wsq) {
    if (N < 1 || K < 1)
        throw std::invalid_argument("criterion cutoffs must be >= 1");
    if (N > m.truncation_order())
        throw truncation_error(N, 1, m.truncation_order());

    diagonal_profile p;
    p.policy = policy;
    p.norms.reserve(static_cast<std::size_t>(N));
    p.partial_criterion.reserve(static_cast<std::size_t>(N));
    p.inner_count.reserve(static_cast<std::size_t>(N));
    p.inner_stagnant.reserve(static_cast<std::size_t>(N));

    neumaier_sum outer;
    std::vector<double> inner_partials;
    for (index_t n = 1; n <= N; ++n) {
        const index_t count = clamp_inner(K, m.truncation_order(), n);
        inner_partials.clear();
        inner_partials.reserve(static_cast<std::size_t>(count));
        neumaier_sum inner;
        for (index_t k = 1; k <= count; ++k) {
            const index_t row = n + k - 1;
            const Scalar a = m.at(row, k);
            if (a != Scalar(0)) inner.add(abs_sq(a) * wsq(row));
            inner_partials.push_back(inner.value());
        }
        const bool stag = stagnated(inner_partials, kStagnationRelTol);
        const double nrm = std::sqrt(std::max(0.0, inner.value()));
        outer.add(nrm);
        p.norms.push_back(nrm);
        p.partial_criterion.push_back(outer.value());
        p.inner_count.push_back(count);
        p.inner_stagnant.push_back(stag);
        if (!stag && p.first_growing == 0) p.first_growing = n;
    }

    const bool inner_ok = (p.first_growing == 0);
    switch (policy) {
        case tail_policy::none:
            p.converged = false;
            break;
        case tail_policy::stagnation:
            p.converged =
                inner_ok && stagnated(p.partial_criterion, kStagnationRelTol);
            break;
        case tail_policy::analytic: {
            const auto& f = m.criterion_tail_bound();
            if (!f)
                throw std::invalid_argument(
                    "analytic tail policy requires a declared tail bound");
            p.analytic_tail = f(N);
            p.converged = inner_ok && std::isfinite(p.analytic_tail);
            break;
        }
    }
    return p;
}

}  // namespace detail

template <class Scalar>
diagonal_profile make_profile(const coefficient_matrix<Scalar>& m, index_t N,
                              index_t K,
                              tail_policy policy = tail_policy::stagnation) {
    return detail::make_profile(m, N, K, policy, detail::unit_weight);
}

template <class Scalar>
diagonal_profile make_profile(const coefficient_matrix<Scalar>& m,
                              const vector_weights& w, index_t N, index_t K,
                              tail_policy policy = tail_policy::stagnation) {
    if (w.order() < N + K - 1)
        throw std::invalid_argument("weights defined up to " +
                                    std::to_string(w.order()) +
                                    ", need N + K - 1");
    return detail::make_profile(m, N, K, policy,
                                [&w](index_t row) { return w.norm_sq(row); });
}

struct criterion_result {
    double value = 0.0;   // truncated criterion; a lower bound of the limit
    bool converged = false;
    index_t outer_cutoff = 0;
    index_t inner_cutoff = 0;
    index_t inner_diverges_at = 0;  // 0 when all inner sums stagnate
};

namespace detail {

inline criterion_result from_profile(const diagonal_profile& p, index_t N,
                                     index_t K) {
    criterion_result r;
    r.value = p.partial_criterion.empty() ? 0.0 : p.partial_criterion.back();
    r.converged = p.converged;
    r.outer_cutoff = N;
    r.inner_cutoff = K;
    r.inner_diverges_at = p.first_growing;
    return r;
}

}  // namespace detail

/// Truncated criterion sum_{n<=N} ||d_n^{(K)}||.
template <class Scalar>
criterion_result criterion_sum(const coefficient_matrix<Scalar>& m, index_t N,
                               index_t K,
                               tail_policy policy = tail_policy::stagnation) {
    return detail::from_profile(make_profile(m, N, K, policy), N, K);
}

/// Weighted variant: each |a(n+k-1,k)|^2 carries ||u_{n+k-1}||^2.
template <class Scalar>
criterion_result weighted_criterion_sum(const coefficient_matrix<Scalar>& m,
                                        const vector_weights& w, index_t N,
                                        index_t K,
                                        tail_policy policy = tail_policy::stagnation) {
    return detail::from_profile(make_profile(m, w, N, K, policy), N, K);
}

/// Maximal-inequality bound over horizon N:
///   2 sum_{n=1}^{N} ( sum_{k=1}^{N-n+1} |a(n+k-1,k)|^2 )^{1/2}.
/// All sums are finite, so no truncation policy applies.
template <class Scalar>
double levy_bound(const coefficient_matrix<Scalar>& m, index_t N) {
    if (N < 1) throw std::invalid_argument("levy_bound requires N >= 1");
    if (N > m.truncation_order())
        throw truncation_error(N, 1, m.truncation_order());
    neumaier_sum acc;
    for (index_t n = 1; n <= N; ++n)
        acc.add(std::sqrt(std::max(
            0.0, detail::diagonal_sum_sq(m, n, N - n + 1, detail::unit_weight))));
    return 2.0 * acc.value();
}

template <class Scalar>
double levy_bound(const coefficient_matrix<Scalar>& m, const vector_weights& w,
                  index_t N) {
    if (N < 1) throw std::invalid_argument("levy_bound requires N >= 1");
    if (N > m.truncation_order())
        throw truncation_error(N, 1, m.truncation_order());
    if (w.order() < N) throw std::invalid_argument("weights shorter than horizon");
    neumaier_sum acc;
    for (index_t n = 1; n <= N; ++n)
        acc.add(std::sqrt(std::max(
            0.0, detail::diagonal_sum_sq(m, n, N - n + 1,
                                         [&w](index_t row) { return w.norm_sq(row); }))));
    return 2.0 * acc.value();
}

// ---------------------------------------------------------------------------
// Tail terms A_N, B_N.  K is an absolute index cutoff for both the inner
// entry index k and the outer diagonal index n.

/// A_N = sum_{n=1}^{N} ( sum_{k >= N+2-n} |a(n+k-1,k)|^2 )^{1/2}, inner sums
/// truncated at index K (and at the matrix truncation order).
template <class Scalar>
double tail_A(const coefficient_matrix<Scalar>& m, index_t N, index_t K) {
    if (N < 1 || K < 1) throw std::invalid_argument("tail_A requires N, K >= 1");
    if (N > m.truncation_order())
        throw truncation_error(N, 1, m.truncation_order());
    neumaier_sum acc;
    for (index_t n = 1; n <= N; ++n) {
        const index_t k_begin = N + 2 - n;
        const index_t k_end = detail::clamp_inner(K, m.truncation_order(), n);
        neumaier_sum inner;
        for (index_t k = k_begin; k <= k_end; ++k) {
            const Scalar a = m.at(n + k - 1, k);
            if (a != Scalar(0)) inner.add(abs_sq(a));
        }
        acc.add(std::sqrt(std::max(0.0, inner.value())));
    }
    return acc.value();
}

/// B_N = sum_{n=N+1}^{K} ||d_n^{(K)}||.
template <class Scalar>
double tail_B(const coefficient_matrix<Scalar>& m, index_t N, index_t K) {
    if (N < 1 || K < 1) throw std::invalid_argument("tail_B requires N, K >= 1");
    neumaier_sum acc;
    const index_t n_end = std::min(K, m.truncation_order());
    for (index_t n = N + 1; n <= n_end; ++n) {
        const index_t count = detail::clamp_inner(K, m.truncation_order(), n);
        acc.add(std::sqrt(std::max(
            0.0, detail::diagonal_sum_sq(m, n, count, detail::unit_weight))));
    }
    return acc.value();
}

struct tail_report {
    index_t N = 0;
    double A = 0.0;
    double B = 0.0;
    double bound_rhs = 0.0;  // 2 (A + B)
};

template <class Scalar>
tail_report tail_bounds(const coefficient_matrix<Scalar>& m, index_t N,
                        index_t K) {
    tail_report t;
    t.N = N;
    t.A = tail_A(m, N, K);
    t.B = tail_B(m, N, K);
    t.bound_rhs = 2.0 * (t.A + t.B);
    return t;
}

// ---------------------------------------------------------------------------
// Comparison criteria and diagnostics.

struct absolute_sum_result {
    double value = 0.0;
    bool converged = false;
};

/// sum_{n<=N} sum_{k<=n} |a(n,k)| with the stagnation flag on the outer
/// partial sums.  A much stronger requirement than the diagonal criterion;
/// used only for the scalar unconditional-convergence comparison.
template <class Scalar>
absolute_sum_result absolute_sum(const coefficient_matrix<Scalar>& m, index_t N) {
    if (N < 1) throw std::invalid_argument("absolute_sum requires N >= 1");
    if (N > m.truncation_order())
        throw truncation_error(N, 1, m.truncation_order());
    std::vector<double> partials;
    partials.reserve(static_cast<std::size_t>(N));
    neumaier_sum acc;
    for (index_t n = 1; n <= N; ++n) {
        const auto& s = m.support();
        for (index_t k = s.row_begin(n); k <= s.row_end(n); ++k)
            acc.add(modulus(m.at(n, k)));
        partials.push_back(acc.value());
    }
    return {acc.value(), detail::stagnated(partials, kStagnationRelTol)};
}

/// Rearranged column sums c_k = sum_{n=k}^{N} a(n,k).  Diagnostic only: the
/// rearrangement behind these is not justified in general.
template <class Scalar>
std::vector<Scalar> column_sums(const coefficient_matrix<Scalar>& m, index_t N) {
    if (N < 1) throw std::invalid_argument("column_sums requires N >= 1");
    if (N > m.truncation_order())
        throw truncation_error(N, 1, m.truncation_order());
    std::vector<Scalar> c(static_cast<std::size_t>(N), Scalar(0));
    // compensated per column, componentwise for complex entries
    std::vector<neumaier_sum> re(static_cast<std::size_t>(N));
    std::vector<neumaier_sum> im(static_cast<std::size_t>(N));
    for (index_t n = 1; n <= N; ++n)
        for (index_t k = 1; k <= n; ++k) {
            const Scalar a = m.at(n, k);
            if constexpr (std::is_same_v<Scalar, double>) {
                re[static_cast<std::size_t>(k - 1)].add(a);
            } else {
                re[static_cast<std::size_t>(k - 1)].add(a.real());
                im[static_cast<std::size_t>(k - 1)].add(a.imag());
            }
        }
    for (index_t k = 1; k <= N; ++k) {
        if constexpr (std::is_same_v<Scalar, double>)
            c[static_cast<std::size_t>(k - 1)] = re[static_cast<std::size_t>(k - 1)].value();
        else
            c[static_cast<std::size_t>(k - 1)] =
                Scalar(re[static_cast<std::size_t>(k - 1)].value(),
                       im[static_cast<std::size_t>(k - 1)].value());
    }
    return c;
}

/// a(n,k) = (n-k+1)^(-alpha): slow polynomial decay off the main diagonal.
inline coefficient_matrix<double> power_decay_matrix(double alpha, index_t order) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("power decay requires alpha > 0");
    return coefficient_matrix<double>(
        [alpha](index_t n, index_t k) {
            return std::pow(static_cast<double>(n - k + 1), -alpha);
        },
        order, {support_kind::full, 0});
}

/// Row mask used by the tail analysis: b(k,j) = a(k,j) for k >= N+1, else 0.
template <class Scalar>
coefficient_matrix<Scalar> shift_mask(const coefficient_matrix<Scalar>& m,
                                      index_t N) {
    if (N < 0) throw std::invalid_argument("shift_mask requires N >= 0");
    return coefficient_matrix<Scalar>(
        [m, N](index_t n, index_t k) {
            return n >= N + 1 ? m.at(n, k) : Scalar(0);
        },
        m.truncation_order(), m.support());
}

}  // namespace hsl::coeffs

#endif
