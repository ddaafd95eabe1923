// SPDX-License-Identifier: Apache-2.0
//
// Stopping-time machinery: first-crossing times tau_r, the zeta sign
// sequence (+1 up to and including the crossing step, -1 after), the
// flipped series T_n, the Levy-type probability inequality, and the moment
// diagnostics (fourth-moment ratio, L2 Cauchy profile).
#ifndef HSL_STOPTIME_HPP
#define HSL_STOPTIME_HPP

#include <optional>
#include <vector>

#include "hsl/simulate.hpp"

namespace hsl::stoptime {

using coeffs::coefficient_matrix;
using innovations::innovation_spec;
using simulate::series_path;

struct stopping_record {
    double level = 0.0;
    std::optional<index_t> tau;     // nullopt encodes "min emptyset = infinity"
    std::vector<double> signs;      // zeta_n, exactly +-1
    std::vector<double> flipped;    // T_n, horizon x dim row-major
    index_t horizon = 0;
    int dim = 1;

    std::span<const double> flipped_sum(index_t n) const {
        return {flipped.data() + (n - 1) * dim, static_cast<std::size_t>(dim)};
    }
};

/// tau_r = min { n : ||S_n|| > r } (strict; ties at r do not trigger).
inline stopping_record first_crossing(const series_path& path, double level) {
    if (!(level > 0.0)) throw std::invalid_argument("crossing level must be > 0");
    stopping_record rec;
    rec.level = level;
    rec.horizon = path.horizon;
    rec.dim = path.dim;
    rec.signs.resize(static_cast<std::size_t>(path.horizon));
    rec.flipped.assign(path.prefix.size(), 0.0);

    for (index_t n = 1; n <= path.horizon; ++n) {
        if (!rec.tau && norm(path.prefix_sum(n)) > level) rec.tau = n;
        // zeta_n = +1 iff tau >= n
        const double zeta = (!rec.tau || *rec.tau >= n) ? 1.0 : -1.0;
        rec.signs[static_cast<std::size_t>(n - 1)] = zeta;
        const auto x = path.term(n);
        double* t = rec.flipped.data() + (n - 1) * path.dim;
        const double* prev = n == 1 ? nullptr : rec.flipped.data() + (n - 2) * path.dim;
        for (int c = 0; c < path.dim; ++c)
            t[c] = (prev ? prev[c] : 0.0) + zeta * x[c];
    }
    return rec;
}

struct stopping_row {
    double level = 0.0;
    double p_sup = 0.0, p_final = 0.0, p_flipped = 0.0;
    double se_sup = 0.0, se_final = 0.0, se_flipped = 0.0;
    double margin = 0.0;  // (p_final + p_flipped) - p_sup
    check_status status = check_status::pass;
};

namespace detail {

inline double bernoulli_se(double p, double n) {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

}  // namespace detail

/// P(sup_n ||S_n|| > r) <= P(||S_N|| > r) + P(||T_N|| > r) over an r-grid.
/// Exact mode enumerates scalar Rademacher outcomes and compares integer
/// counts; Monte Carlo mode fails only when p_sup - 3 se exceeds the rhs.
inline std::vector<stopping_row> verify_stopping_inequality(
    const coefficient_matrix<double>& m, const innovation_spec& spec, index_t N,
    std::span<const double> r_grid, run_mode mode, std::uint64_t seed = 0,
    index_t cap = innovations::enumeration_cap()) {
    if (N < 1 || N > m.truncation_order())
        throw std::invalid_argument("horizon outside matrix truncation order");
    for (double r : r_grid)
        if (!(r > 0.0)) throw std::invalid_argument("crossing levels must be > 0");

    const std::size_t nr = r_grid.size();
    std::vector<std::uint64_t> c_sup(nr, 0), c_final(nr, 0), c_flip(nr, 0);
    double total = 0.0;

    if (mode.is_exact()) {
        if (spec.dist != innovations::distribution::rademacher ||
            spec.emb != innovations::embedding::scalar)
            throw std::invalid_argument(
                "exact verification requires scalar Rademacher innovations");
        std::vector<double> s(static_cast<std::size_t>(N));
        innovations::for_each_sign_tuple(
            N,
            [&](std::span<const double> z) {
                double acc = 0.0, run_max = 0.0;
                for (index_t n = 1; n <= N; ++n) {
                    double x = 0.0;
                    const auto& sup = m.support();
                    for (index_t k = sup.row_begin(n); k <= sup.row_end(n); ++k) {
                        const double a = m.at(n, k);
                        if (a != 0.0) x += a * z[static_cast<std::size_t>(k - 1)];
                    }
                    acc += x;
                    s[static_cast<std::size_t>(n - 1)] = acc;
                    run_max = std::max(run_max, std::abs(acc));
                }
                const double s_final = std::abs(s.back());
                for (std::size_t i = 0; i < nr; ++i) {
                    const double r = r_grid[i];
                    if (run_max > r) ++c_sup[i];
                    if (s_final > r) ++c_final[i];
                    // tau_r and T_N = 2 S_{tau and N} - S_N
                    index_t tau = 0;
                    for (index_t n = 1; n <= N; ++n)
                        if (std::abs(s[static_cast<std::size_t>(n - 1)]) > r) {
                            tau = n;
                            break;
                        }
                    const double t_final =
                        tau == 0 ? s.back()
                                 : 2.0 * s[static_cast<std::size_t>(tau - 1)] - s.back();
                    if (std::abs(t_final) > r) ++c_flip[i];
                }
            },
            cap);
        total = static_cast<double>(std::uint64_t{1} << N);
    } else {
        spec.validate();
        if (mode.replicas < 2)
            throw std::invalid_argument("Monte Carlo mode needs >= 2 replicas");
        // sequential over replicas in stream order: thread-count independent
        innovations::innovation_block block;
        for (std::uint64_t rep = 0; rep < mode.replicas; ++rep) {
            innovations::sample_innovations_into(spec, N, seed, rep, block);
            const series_path path = simulate::build_path(m, block, N);
            const double run_max = path.sup();
            const double s_final = norm(path.prefix_sum(N));
            for (std::size_t i = 0; i < nr; ++i) {
                const double r = r_grid[i];
                if (run_max > r) ++c_sup[i];
                if (s_final > r) ++c_final[i];
                index_t tau = 0;
                for (index_t n = 1; n <= N; ++n)
                    if (norm(path.prefix_sum(n)) > r) {
                        tau = n;
                        break;
                    }
                double t_sq = 0.0;
                const auto sN = path.prefix_sum(N);
                if (tau == 0) {
                    t_sq = norm_sq(sN);
                } else {
                    const auto st = path.prefix_sum(tau);
                    for (int c = 0; c < path.dim; ++c) {
                        const double t = 2.0 * st[c] - sN[c];
                        t_sq += t * t;
                    }
                }
                if (std::sqrt(t_sq) > r) ++c_flip[i];
            }
        }
        total = static_cast<double>(mode.replicas);
    }

    std::vector<stopping_row> rows(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        auto& row = rows[i];
        row.level = r_grid[i];
        row.p_sup = static_cast<double>(c_sup[i]) / total;
        row.p_final = static_cast<double>(c_final[i]) / total;
        row.p_flipped = static_cast<double>(c_flip[i]) / total;
        row.margin = row.p_final + row.p_flipped - row.p_sup;
        if (mode.is_exact()) {
            // integer counts: the inequality is checked exactly
            row.status = c_sup[i] <= c_final[i] + c_flip[i] ? check_status::pass
                                                            : check_status::violation;
        } else {
            row.se_sup = detail::bernoulli_se(row.p_sup, total);
            row.se_final = detail::bernoulli_se(row.p_final, total);
            row.se_flipped = detail::bernoulli_se(row.p_flipped, total);
            const double se = std::sqrt(row.se_sup * row.se_sup +
                                        row.se_final * row.se_final +
                                        row.se_flipped * row.se_flipped);
            row.status = row.p_sup - 3.0 * se > row.p_final + row.p_flipped
                             ? check_status::violation
                             : check_status::pass;
        }
    }
    return rows;
}

struct distribution_match {
    double max_gap = 0.0;
    bool pass = false;
};

/// Exact-mode check that T_N and S_N have the same distribution (valid for
/// diagonal matrices, i.e. independent terms): compares the two sorted value
/// multisets over all scalar Rademacher outcomes.
inline distribution_match flipped_distribution_match(
    const coefficient_matrix<double>& m, index_t N, double level, double tol = 1e-12,
    index_t cap = innovations::enumeration_cap()) {
    if (!(level > 0.0)) throw std::invalid_argument("crossing level must be > 0");
    std::vector<double> s_vals, t_vals, s(static_cast<std::size_t>(N));
    innovations::for_each_sign_tuple(
        N,
        [&](std::span<const double> z) {
            double acc = 0.0;
            for (index_t n = 1; n <= N; ++n) {
                double x = 0.0;
                for (index_t k = 1; k <= n; ++k) {
                    const double a = m.at(n, k);
                    if (a != 0.0) x += a * z[static_cast<std::size_t>(k - 1)];
                }
                acc += x;
                s[static_cast<std::size_t>(n - 1)] = acc;
            }
            index_t tau = 0;
            for (index_t n = 1; n <= N; ++n)
                if (std::abs(s[static_cast<std::size_t>(n - 1)]) > level) {
                    tau = n;
                    break;
                }
            s_vals.push_back(s.back());
            t_vals.push_back(tau == 0
                                 ? s.back()
                                 : 2.0 * s[static_cast<std::size_t>(tau - 1)] - s.back());
        },
        cap);
    std::sort(s_vals.begin(), s_vals.end());
    std::sort(t_vals.begin(), t_vals.end());
    distribution_match rep;
    for (std::size_t i = 0; i < s_vals.size(); ++i)
        rep.max_gap = std::max(rep.max_gap, std::abs(s_vals[i] - t_vals[i]));
    rep.pass = rep.max_gap <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Moment diagnostics.

struct moment_report {
    index_t m = 0, j = 0;
    double second = 0.0;   // E ||S_{m+j} - S_m||^2
    double fourth = 0.0;   // E ||S_{m+j} - S_m||^4
    double ratio = 0.0;    // fourth / second^2
    double se_ratio = 0.0; // delta-method propagation (MC only)
    bool exact = false;
    std::uint64_t samples = 0;
};

/// Fourth-to-second-squared moment ratio of the segment sum
/// S_{m+j} - S_m = X_{m+1} + ... + X_{m+j}.
inline moment_report fourth_moment_ratio(const coefficient_matrix<double>& m,
                                         const innovation_spec& spec, index_t seg_m,
                                         index_t seg_j, run_mode mode,
                                         std::uint64_t seed = 0,
                                         index_t cap = innovations::enumeration_cap()) {
    if (seg_m < 0 || seg_j < 1)
        throw std::invalid_argument("segment needs m >= 0 and j >= 1");
    const index_t total_n = seg_m + seg_j;
    if (total_n > m.truncation_order())
        throw coeffs::truncation_error(total_n, 1, m.truncation_order());

    moment_report rep;
    rep.m = seg_m;
    rep.j = seg_j;

    if (mode.is_exact()) {
        if (spec.dist != innovations::distribution::rademacher ||
            spec.emb != innovations::embedding::scalar)
            throw std::invalid_argument(
                "exact moments require scalar Rademacher innovations");
        neumaier_sum sum2, sum4;
        innovations::for_each_sign_tuple(
            total_n,
            [&](std::span<const double> z) {
                double v = 0.0;
                for (index_t n = seg_m + 1; n <= total_n; ++n) {
                    double x = 0.0;
                    for (index_t k = 1; k <= n; ++k) {
                        const double a = m.at(n, k);
                        if (a != 0.0) x += a * z[static_cast<std::size_t>(k - 1)];
                    }
                    v += x;
                }
                const double v2 = v * v;
                sum2.add(v2);
                sum4.add(v2 * v2);
            },
            cap);
        const double count = static_cast<double>(std::uint64_t{1} << total_n);
        rep.second = sum2.value() / count;
        rep.fourth = sum4.value() / count;
        rep.exact = true;
        rep.samples = std::uint64_t{1} << total_n;
    } else {
        spec.validate();
        if (mode.replicas < 2)
            throw std::invalid_argument("Monte Carlo mode needs >= 2 replicas");
        // x_r = ||V||^2 per replica; higher powers feed the delta-method SE.
        std::vector<double> xs(mode.replicas);
        innovations::innovation_block block;
        std::vector<double> v(static_cast<std::size_t>(spec.dim));
        std::vector<double> x(static_cast<std::size_t>(spec.dim));
        for (std::uint64_t rep_i = 0; rep_i < mode.replicas; ++rep_i) {
            innovations::sample_innovations_into(spec, total_n, seed, rep_i, block);
            std::fill(v.begin(), v.end(), 0.0);
            for (index_t n = seg_m + 1; n <= total_n; ++n) {
                simulate::detail::compute_term(m, block, n, 1.0, nullptr, x, {});
                for (std::size_t c = 0; c < v.size(); ++c) v[c] += x[c];
            }
            xs[rep_i] = norm_sq(v);
        }
        const double r = static_cast<double>(mode.replicas);
        neumaier_sum s1, s2, s3, s4;
        for (double xv : xs) {
            s1.add(xv);
            s2.add(xv * xv);
            s3.add(xv * xv * xv);
            s4.add(xv * xv * xv * xv);
        }
        const double m1 = s1.value() / r;  // E x
        const double m2 = s2.value() / r;  // E x^2
        const double m3 = s3.value() / r;
        const double m4 = s4.value() / r;
        rep.second = m1;
        rep.fourth = m2;
        rep.samples = mode.replicas;
        const double var_x = m2 - m1 * m1;
        const double var_x2 = m4 - m2 * m2;
        const double cov = m3 - m2 * m1;
        const double m1_2 = m1 * m1;
        const double var_ratio = (var_x2 / (m1_2 * m1_2) +
                                  4.0 * m2 * m2 * var_x / (m1_2 * m1_2 * m1_2) -
                                  4.0 * m2 * cov / (m1_2 * m1_2 * m1)) /
                                 r;
        rep.se_ratio = std::sqrt(std::max(0.0, var_ratio));
    }
    rep.ratio = rep.second > 0.0 ? rep.fourth / (rep.second * rep.second)
                                 : (rep.fourth > 0.0 ? std::numeric_limits<double>::infinity()
                                                     : 0.0);
    return rep;
}

/// Scans segments and reports the maximal ratio (the empirical constant K).
struct moment_scan_result {
    std::vector<moment_report> rows;
    double max_ratio = 0.0;
    index_t argmax = 0;  // index into rows
};

inline moment_scan_result fourth_moment_scan(
    const coefficient_matrix<double>& m, const innovation_spec& spec,
    std::span<const std::pair<index_t, index_t>> segments, run_mode mode,
    std::uint64_t seed = 0) {
    moment_scan_result out;
    for (const auto& [sm, sj] : segments)
        out.rows.push_back(fourth_moment_ratio(m, spec, sm, sj, mode, seed));
    for (std::size_t i = 0; i < out.rows.size(); ++i)
        if (out.rows[i].ratio > out.max_ratio) {
            out.max_ratio = out.rows[i].ratio;
            out.argmax = static_cast<index_t>(i);
        }
    return out;
}

struct l2_row {
    index_t m = 0;
    index_t argmax_j = 0;
    double sup_second_moment = 0.0;
    double se = 0.0;  // standard error at the argmax
};

/// Estimated L2 Cauchy tail: for each m in the grid,
/// sup_{1<=j<=J} E ||S_{m+j} - S_m||^2 with the standard error at the
/// maximizer.  Evidence table; monotone decay in m is expected for
/// criterion-convergent matrices.
inline std::vector<l2_row> l2_cauchy_profile(const coefficient_matrix<double>& m,
                                             const innovation_spec& spec,
                                             std::span<const index_t> m_grid,
                                             index_t J, std::uint64_t replicas,
                                             std::uint64_t seed) {
    spec.validate();
    if (J < 1) throw std::invalid_argument("J must be >= 1");
    if (replicas < 2) throw std::invalid_argument("need >= 2 replicas");
    std::vector<l2_row> rows;
    rows.reserve(m_grid.size());
    innovations::innovation_block block;
    std::vector<double> v(static_cast<std::size_t>(spec.dim));
    std::vector<double> x(static_cast<std::size_t>(spec.dim));
    std::uint64_t grid_pos = 0;
    for (index_t mm : m_grid) {
        if (mm < 0 || mm + J > m.truncation_order())
            throw coeffs::truncation_error(mm + J, 1, m.truncation_order());
        std::vector<neumaier_sum> sums(static_cast<std::size_t>(J));
        std::vector<neumaier_sum> sqsums(static_cast<std::size_t>(J));
        // one stream block per grid row keeps rows independent
        const std::uint64_t stream_base = grid_pos * replicas;
        for (std::uint64_t rep = 0; rep < replicas; ++rep) {
            innovations::sample_innovations_into(spec, mm + J, seed,
                                                 stream_base + rep, block);
            std::fill(v.begin(), v.end(), 0.0);
            for (index_t j = 1; j <= J; ++j) {
                simulate::detail::compute_term(m, block, mm + j, 1.0, nullptr, x, {});
                for (std::size_t c = 0; c < v.size(); ++c) v[c] += x[c];
                const double n2 = norm_sq(v);
                sums[static_cast<std::size_t>(j - 1)].add(n2);
                sqsums[static_cast<std::size_t>(j - 1)].add(n2 * n2);
            }
        }
        l2_row row;
        row.m = mm;
        const double r = static_cast<double>(replicas);
        for (index_t j = 1; j <= J; ++j) {
            const double mean = sums[static_cast<std::size_t>(j - 1)].value() / r;
            if (j == 1 || mean > row.sup_second_moment) {
                row.sup_second_moment = mean;
                row.argmax_j = j;
                const double m2 = sqsums[static_cast<std::size_t>(j - 1)].value() / r;
                const double var = std::max(0.0, m2 - mean * mean) * r / (r - 1.0);
                row.se = std::sqrt(var / r);
            }
        }
        rows.push_back(row);
        ++grid_pos;
    }
    return rows;
}

}  // namespace hsl::stoptime

#endif
