// SPDX-License-Identifier: Apache-2.0
//
// Path realization for the dependent series X_n = sum_k a(n,k) Z_k, prefix
// suprema, and verification of the maximal inequality both exactly (scalar
// Rademacher enumeration) and statistically (seeded Monte Carlo).
//
// Replica-parallel contract: replica r always draws from stream
// stream_begin + r and results are reduced in replica order, so estimates do
// not depend on the thread count.
#ifndef HSL_SIMULATE_HPP
#define HSL_SIMULATE_HPP

#include <thread>
#include <vector>

#include "hsl/coeffs.hpp"
#include "hsl/core.hpp"
#include "hsl/innovations.hpp"

namespace hsl::simulate {

using coeffs::coefficient_matrix;
using coeffs::vector_weights;
using innovations::innovation_block;
using innovations::innovation_spec;
using innovations::sign_pattern;

/// One realization: terms, prefix sums, and the running supremum of ||S_n||.
struct series_path {
    index_t horizon = 0;
    int dim = 1;
    std::vector<double> terms;        // horizon x dim, row-major
    std::vector<double> prefix;       // horizon x dim
    std::vector<double> running_sup;  // horizon

    std::span<const double> term(index_t n) const {
        return {terms.data() + (n - 1) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> prefix_sum(index_t n) const {
        return {prefix.data() + (n - 1) * dim, static_cast<std::size_t>(dim)};
    }
    double sup() const { return running_sup.back(); }
};

struct mc_estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_begin = 0;
    std::uint64_t stream_end = 0;  // exclusive
};

namespace detail {

// Writes the term X_n (or eps_n x_n u_n in weighted mode) into `out`.
// Shared by every path builder so that alternative entry points produce
// bit-identical values.
inline void compute_term(const coefficient_matrix<double>& m,
                         const innovation_block& z, index_t n, double sign,
                         const vector_weights* weights, std::span<double> out,
                         std::span<double> weight_buf) {
    if (!weights) {
        for (auto& c : out) c = 0.0;
        const auto& s = m.support();
        for (index_t k = s.row_begin(n); k <= s.row_end(n); ++k) {
            const double a = m.at(n, k);
            if (a == 0.0) continue;
            const auto zr = z.row(k);
            for (std::size_t c = 0; c < out.size(); ++c) out[c] += a * zr[c];
        }
        for (auto& c : out) c *= sign;
    } else {
        double x = 0.0;
        const auto& s = m.support();
        for (index_t k = s.row_begin(n); k <= s.row_end(n); ++k) {
            const double a = m.at(n, k);
            if (a != 0.0) x += a * z.scalar(k);
        }
        weights->vector(n, weight_buf);
        for (std::size_t c = 0; c < out.size(); ++c)
            out[c] = sign * x * weight_buf[c];
    }
}

struct path_workspace {
    std::vector<double> x, v, u;
    void resize(int dim, int weight_dim) {
        x.assign(static_cast<std::size_t>(dim), 0.0);
        v.assign(static_cast<std::size_t>(dim), 0.0);
        u.assign(static_cast<std::size_t>(weight_dim), 0.0);
    }
};

// sup over 1 <= l <= m of || sum_{n=lo+1}^{lo+l} X_n ||.
inline double tail_sup_kernel(const coefficient_matrix<double>& m,
                              const innovation_block& z, index_t lo, index_t span,
                              const vector_weights* weights, path_workspace& ws) {
    for (auto& c : ws.v) c = 0.0;
    double sup = 0.0;
    for (index_t n = lo + 1; n <= lo + span; ++n) {
        compute_term(m, z, n, 1.0, weights, ws.x, ws.u);
        for (std::size_t c = 0; c < ws.v.size(); ++c) ws.v[c] += ws.x[c];
        sup = std::max(sup, norm(ws.v));
    }
    return sup;
}

// Per-replica values are stored by replica index and reduced sequentially;
// threads only split the fill loop.
template <class MakeWorker>
void fill_replica_values(std::vector<double>& out, std::uint64_t replicas,
                         int threads, MakeWorker make_worker) {
    out.resize(replicas);
    if (threads <= 1 || replicas < 2 * static_cast<std::uint64_t>(threads)) {
        auto worker = make_worker();
        for (std::uint64_t r = 0; r < replicas; ++r) out[r] = worker(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const std::uint64_t chunk = (replicas + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::uint64_t lo = chunk * static_cast<std::uint64_t>(t);
        const std::uint64_t hi = std::min(replicas, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&out, lo, hi, &make_worker] {
            auto worker = make_worker();
            for (std::uint64_t r = lo; r < hi; ++r) out[r] = worker(r);
        });
    }
    for (auto& th : pool) th.join();
}

inline mc_estimate estimate_from(const std::vector<double>& values,
                                 std::uint64_t seed, std::uint64_t stream_begin) {
    if (values.size() < 2)
        throw std::invalid_argument("Monte Carlo estimates need >= 2 replicas");
    const auto r = static_cast<double>(values.size());
    neumaier_sum acc;
    for (double v : values) acc.add(v);
    const double mean = acc.value() / r;
    neumaier_sum sq;
    for (double v : values) sq.add((v - mean) * (v - mean));
    const double sd = std::sqrt(sq.value() / (r - 1.0));
    mc_estimate e;
    e.mean = mean;
    e.std_error = sd / std::sqrt(r);
    e.replicas = values.size();
    e.seed = seed;
    e.stream_begin = stream_begin;
    e.stream_end = stream_begin + values.size();
    return e;
}

}  // namespace detail

/// X_n = eps_n sum_{k<=n} a(n,k) Z_k; with weights present the innovations
/// must be scalar and the n-th term becomes eps_n x_n u_n.
inline series_path build_path(const coefficient_matrix<double>& m,
                              const innovation_block& z, index_t N,
                              const sign_pattern* signs = nullptr,
                              const vector_weights* weights = nullptr) {
    if (N < 1) throw std::invalid_argument("horizon must be >= 1");
    if (N > m.truncation_order())
        throw coeffs::truncation_error(N, 1, m.truncation_order());
    if (z.count < N) throw std::invalid_argument("innovation block shorter than horizon");
    if (signs && signs->size() < N)
        throw std::invalid_argument("sign pattern shorter than horizon");
    if (weights) {
        if (z.dim != 1)
            throw std::invalid_argument("weighted paths require scalar innovations");
        if (weights->order() < N)
            throw std::invalid_argument("weights shorter than horizon");
    }

    series_path p;
    p.horizon = N;
    p.dim = weights ? weights->dim() : z.dim;
    p.terms.assign(static_cast<std::size_t>(N) * p.dim, 0.0);
    p.prefix.assign(static_cast<std::size_t>(N) * p.dim, 0.0);
    p.running_sup.assign(static_cast<std::size_t>(N), 0.0);

    std::vector<double> u(weights ? static_cast<std::size_t>(weights->dim()) : 0);
    double sup = 0.0;
    for (index_t n = 1; n <= N; ++n) {
        std::span<double> x{p.terms.data() + (n - 1) * p.dim,
                            static_cast<std::size_t>(p.dim)};
        const double eps = signs ? signs->at(n) : 1.0;
        detail::compute_term(m, z, n, eps, weights, x, u);
        std::span<double> s{p.prefix.data() + (n - 1) * p.dim,
                            static_cast<std::size_t>(p.dim)};
        if (n == 1) {
            std::copy(x.begin(), x.end(), s.begin());
        } else {
            const double* prev = p.prefix.data() + (n - 2) * p.dim;
            for (std::size_t c = 0; c < s.size(); ++c) s[c] = prev[c] + x[c];
        }
        sup = std::max(sup, norm(s));
        p.running_sup[static_cast<std::size_t>(n - 1)] = sup;
    }
    return p;
}

/// Monte Carlo mean and standard error of sup_{n<=N} ||S_n|| over
/// independent replicas on streams stream_begin .. stream_begin+replicas-1.
inline mc_estimate mc_expected_sup(const coefficient_matrix<double>& m,
                                   const innovation_spec& spec, index_t N,
                                   std::uint64_t replicas, std::uint64_t seed,
                                   int threads = 1,
                                   const vector_weights* weights = nullptr,
                                   std::uint64_t stream_begin = 0) {
    spec.validate();
    if (N < 1 || N > m.truncation_order())
        throw std::invalid_argument("horizon outside matrix truncation order");
    if (weights && spec.dim != 1)
        throw std::invalid_argument("weighted paths require scalar innovations");
    const int out_dim = weights ? weights->dim() : spec.dim;
    std::vector<double> values;
    detail::fill_replica_values(values, replicas, threads, [&] {
        return [&, ws = detail::path_workspace{}, block = innovation_block{}](
                   std::uint64_t r) mutable {
            innovations::sample_innovations_into(spec, N, seed, stream_begin + r,
                                                 block);
            ws.resize(out_dim, weights ? weights->dim() : 0);
            return detail::tail_sup_kernel(m, block, 0, N, weights, ws);
        };
    });
    return detail::estimate_from(values, seed, stream_begin);
}

/// Exact E sup_{n<=N} |S_n| under scalar Rademacher innovations:
/// 2^-N times the sum of the running supremum over all sign tuples.
inline double exact_expected_sup(const coefficient_matrix<double>& m, index_t N,
                                 index_t cap = innovations::enumeration_cap()) {
    if (N < 1 || N > m.truncation_order())
        throw std::invalid_argument("horizon outside matrix truncation order");
    // dense row-major copy keeps the per-outcome loop tight
    std::vector<double> a(static_cast<std::size_t>(N) * N, 0.0);
    for (index_t n = 1; n <= N; ++n)
        for (index_t k = 1; k <= n; ++k)
            a[static_cast<std::size_t>((n - 1) * N + (k - 1))] = m.at(n, k);

    neumaier_sum acc;
    innovations::for_each_sign_tuple(
        N,
        [&](std::span<const double> z) {
            double s = 0.0, sup = 0.0;
            for (index_t n = 1; n <= N; ++n) {
                double x = 0.0;
                const double* row = a.data() + (n - 1) * N;
                for (index_t k = 1; k <= n; ++k)
                    x += row[k - 1] * z[static_cast<std::size_t>(k - 1)];
                s += x;
                sup = std::max(sup, std::abs(s));
            }
            acc.add(sup);
        },
        cap);
    return acc.value() / static_cast<double>(std::uint64_t{1} << N);
}

struct levy_report {
    double lhs_mean = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs_mean
    check_status status = check_status::pass;
    bool exact = false;
    std::uint64_t samples = 0;  // replicas, or 2^N in exact mode
};

/// Checks E sup ||S_n|| <= levy_bound.  Exact mode requires scalar
/// Rademacher innovations (weights allowed when one-dimensional, by row
/// scaling).  Monte Carlo mode applies the 3-sigma acceptance rule.
inline levy_report verify_levy(const coefficient_matrix<double>& m,
                               const innovation_spec& spec, index_t N,
                               run_mode mode, std::uint64_t seed = 0,
                               int threads = 1,
                               const vector_weights* weights = nullptr) {
    levy_report rep;
    rep.rhs = weights ? coeffs::levy_bound(m, *weights, N) : coeffs::levy_bound(m, N);
    if (mode.is_exact()) {
        if (spec.dist != innovations::distribution::rademacher ||
            spec.emb != innovations::embedding::scalar)
            throw std::invalid_argument(
                "exact verification requires scalar Rademacher innovations");
        rep.exact = true;
        rep.samples = std::uint64_t{1} << N;
        if (!weights) {
            rep.lhs_mean = exact_expected_sup(m, N);
        } else {
            if (weights->dim() != 1)
                throw std::invalid_argument(
                    "exact weighted verification requires dim-1 weights");
            const auto& w = *weights;
            coefficient_matrix<double> scaled(
                [m, w](index_t n, index_t k) {
                    double u;
                    w.vector(n, {&u, 1});
                    return m.at(n, k) * u;
                },
                m.truncation_order(), m.support());
            rep.lhs_mean = exact_expected_sup(scaled, N);
        }
        rep.status = hsl::detail::classify_exact(rep.lhs_mean, rep.rhs);
    } else {
        const mc_estimate e =
            mc_expected_sup(m, spec, N, mode.replicas, seed, threads, weights);
        rep.lhs_mean = e.mean;
        rep.lhs_se = e.std_error;
        rep.samples = e.replicas;
        rep.status = hsl::detail::classify_mc(e.mean, e.std_error, rep.rhs);
    }
    rep.margin = rep.rhs - rep.lhs_mean;
    return rep;
}

/// Components s_{n,N}: the n-th tuple has n-1 leading zeros and then the
/// partial sums of the n-th diagonal series.  Their elementwise vector sum
/// over n reproduces (S_1, ..., S_N).
inline std::vector<std::vector<double>> prefix_decomposition(
    const coefficient_matrix<double>& m, const innovation_block& z, index_t N) {
    if (N < 1 || N > m.truncation_order())
        throw std::invalid_argument("horizon outside matrix truncation order");
    if (z.count < N) throw std::invalid_argument("innovation block shorter than horizon");
    const int d = z.dim;
    std::vector<std::vector<double>> comps(
        static_cast<std::size_t>(N),
        std::vector<double>(static_cast<std::size_t>(N) * d, 0.0));
    for (index_t n = 1; n <= N; ++n) {
        auto& comp = comps[static_cast<std::size_t>(n - 1)];
        std::vector<double> partial(static_cast<std::size_t>(d), 0.0);
        for (index_t j = n; j <= N; ++j) {
            const index_t k = j - n + 1;
            const double a = m.at(j, k);
            const auto zr = z.row(k);
            for (int c = 0; c < d; ++c) partial[static_cast<std::size_t>(c)] += a * zr[c];
            std::copy(partial.begin(), partial.end(),
                      comp.begin() + (j - 1) * d);
        }
    }
    return comps;
}

/// Monte Carlo estimate of E sup_{1<=l<=m} ||X_{N+1} + ... + X_{N+l}||.
/// offset = 0 reduces to mc_expected_sup over the same streams.
inline mc_estimate tail_sup_estimate(const coefficient_matrix<double>& m,
                                     const innovation_spec& spec, index_t offset,
                                     index_t span, std::uint64_t replicas,
                                     std::uint64_t seed, int threads = 1) {
    spec.validate();
    if (offset < 0 || span < 1) throw std::invalid_argument("need offset >= 0, span >= 1");
    if (offset + span > m.truncation_order())
        throw coeffs::truncation_error(offset + span, 1, m.truncation_order());
    std::vector<double> values;
    detail::fill_replica_values(values, replicas, threads, [&] {
        return [&, ws = detail::path_workspace{}, block = innovation_block{}](
                   std::uint64_t r) mutable {
            innovations::sample_innovations_into(spec, offset + span, seed, r, block);
            ws.resize(spec.dim, 0);
            return detail::tail_sup_kernel(m, block, offset, span, nullptr, ws);
        };
    });
    return detail::estimate_from(values, seed, 0);
}

/// Exact tail supremum expectation under scalar Rademacher enumeration.
inline double exact_tail_sup(const coefficient_matrix<double>& m, index_t offset,
                             index_t span,
                             index_t cap = innovations::enumeration_cap()) {
    const index_t total = offset + span;
    if (total > m.truncation_order())
        throw coeffs::truncation_error(total, 1, m.truncation_order());
    neumaier_sum acc;
    innovations::for_each_sign_tuple(
        total,
        [&](std::span<const double> z) {
            double v = 0.0, sup = 0.0;
            for (index_t n = offset + 1; n <= total; ++n) {
                double x = 0.0;
                const auto& s = m.support();
                for (index_t k = s.row_begin(n); k <= s.row_end(n); ++k) {
                    const double a = m.at(n, k);
                    if (a != 0.0) x += a * z[static_cast<std::size_t>(k - 1)];
                }
                v += x;
                sup = std::max(sup, std::abs(v));
            }
            acc.add(sup);
        },
        cap);
    return acc.value() / static_cast<double>(std::uint64_t{1} << total);
}

struct tail_check_report {
    mc_estimate estimate;
    coeffs::tail_report tails;
    check_status status = check_status::pass;
};

/// Tail-bound verification: MC mean + 3se <= 2 (A_N + B_N), truncations
/// matched through K.
inline tail_check_report verify_tail_bound(const coefficient_matrix<double>& m,
                                           const innovation_spec& spec, index_t N,
                                           index_t span, index_t K,
                                           std::uint64_t replicas,
                                           std::uint64_t seed, int threads = 1) {
    tail_check_report rep;
    rep.estimate = tail_sup_estimate(m, spec, N, span, replicas, seed, threads);
    rep.tails = coeffs::tail_bounds(m, N, K);
    rep.status = hsl::detail::classify_mc(rep.estimate.mean, rep.estimate.std_error,
                                          rep.tails.bound_rhs);
    return rep;
}

}  // namespace hsl::simulate

#endif
