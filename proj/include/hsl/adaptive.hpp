// SPDX-License-Identifier: Apache-2.0
//
// Predictable random coefficients: a(n,k) may depend on the innovation
// history Z_1..Z_{k-1} only.  Predictability is structural — the rule is
// handed exactly the first k-1 scalar innovations of the realization, so a
// rule that peeks at the contemporaneous innovation cannot be written.
//
// Rules operate on scalar innovation histories; vector-valued predictable
// coefficients are out of scope here.
#ifndef HSL_ADAPTIVE_HPP
#define HSL_ADAPTIVE_HPP

#include <vector>

#include "hsl/simulate.hpp"

namespace hsl::adaptive {

using coeffs::coefficient_matrix;
using innovations::innovation_spec;
using simulate::mc_estimate;
using simulate::series_path;

struct predictable_rule {
    /// (n, k, history) -> a(n,k); history.size() == k-1 always.
    std::function<double(index_t, index_t, std::span<const double>)> coeff;
    /// Optional deterministic envelope with |a(n,k)| <= envelope(n,k) for
    /// every history; required for the envelope criterion value.
    std::function<double(index_t, index_t)> envelope;
    /// Optional closed form for E |a(n,k)|^2.  When absent, verification
    /// falls back to Monte Carlo (or enumeration in exact mode).
    std::function<double(index_t, index_t)> second_moment;
    index_t truncation_order = 0;

    void validate(index_t N) const {
        if (!coeff) throw std::invalid_argument("predictable rule has no coefficient");
        if (N < 1 || N > truncation_order)
            throw std::invalid_argument("horizon outside rule truncation order");
    }
};

/// Wraps a constant matrix as a (trivially predictable) rule; its exact
/// second moment is declared, so the Thm-1 reductions hold bit for bit.
inline predictable_rule constant_rule(coefficient_matrix<double> m) {
    predictable_rule r;
    r.truncation_order = m.truncation_order();
    r.coeff = [m](index_t n, index_t k, std::span<const double>) {
        return m.at(n, k);
    };
    r.envelope = [m](index_t n, index_t k) { return std::abs(m.at(n, k)); };
    r.second_moment = [m](index_t n, index_t k) {
        const double a = m.at(n, k);
        return a * a;
    };
    return r;
}

namespace detail {

inline void require_scalar(const innovation_spec& spec) {
    spec.validate();
    if (spec.emb != innovations::embedding::scalar)
        throw std::invalid_argument(
            "predictable rules read scalar innovation histories");
}

inline std::span<const double> history(const innovations::innovation_block& z,
                                       index_t k) {
    return {z.data.data(), static_cast<std::size_t>(k - 1)};
}

inline std::span<const double> history(std::span<const double> z, index_t k) {
    return z.subspan(0, static_cast<std::size_t>(k - 1));
}

}  // namespace detail

/// Path where coefficient (n,k) is evaluated on exactly the first k-1
/// innovations of this realization.
inline series_path simulate_predictable(const predictable_rule& rule,
                                        const innovation_spec& spec, index_t N,
                                        std::uint64_t seed, std::uint64_t stream = 0) {
    rule.validate(N);
    detail::require_scalar(spec);
    const auto z = innovations::sample_innovations(spec, N, seed, stream);
    series_path p;
    p.horizon = N;
    p.dim = 1;
    p.terms.resize(static_cast<std::size_t>(N));
    p.prefix.resize(static_cast<std::size_t>(N));
    p.running_sup.resize(static_cast<std::size_t>(N));
    double s = 0.0, sup = 0.0;
    for (index_t n = 1; n <= N; ++n) {
        double x = 0.0;
        for (index_t k = 1; k <= n; ++k)
            x += rule.coeff(n, k, detail::history(z, k)) * z.scalar(k);
        s += x;
        sup = std::max(sup, std::abs(s));
        p.terms[static_cast<std::size_t>(n - 1)] = x;
        p.prefix[static_cast<std::size_t>(n - 1)] = s;
        p.running_sup[static_cast<std::size_t>(n - 1)] = sup;
    }
    return p;
}

struct criterion_estimate {
    mc_estimate value;          // MC estimate of sum_n sqrt(sum_k E|a|^2)
    double envelope_value = 0.0;
    bool has_envelope = false;
};

/// Monte Carlo estimate of the expected-square criterion
///   sum_{n<=N} ( sum_{k<=K_n} E |a(n+k-1,k)|^2 )^{1/2}
/// from per-replica realized coefficients, plus the deterministic envelope
/// upper bound when the rule declares one.  The standard error comes from
/// batch means (the criterion is a nonlinear functional of the moments).
inline criterion_estimate expected_square_criterion(
    const predictable_rule& rule, const innovation_spec& spec, index_t N, index_t K,
    std::uint64_t replicas, std::uint64_t seed, std::uint64_t batches = 10) {
    rule.validate(N);
    detail::require_scalar(spec);
    if (K < 1) throw std::invalid_argument("inner cutoff must be >= 1");
    if (replicas < 2) throw std::invalid_argument("need >= 2 replicas");
    batches = std::min(batches, replicas);

    const index_t order = rule.truncation_order;
    std::vector<index_t> counts(static_cast<std::size_t>(N));
    index_t depth = 0;  // deepest innovation index any coefficient needs
    for (index_t n = 1; n <= N; ++n) {
        counts[static_cast<std::size_t>(n - 1)] = std::min(K, order - n + 1);
        depth = std::max(depth, n + counts[static_cast<std::size_t>(n - 1)] - 1);
    }

    // per-(diagonal, k) accumulators of |a|^2, split into batches
    std::vector<std::vector<neumaier_sum>> sums(static_cast<std::size_t>(batches));
    std::vector<std::uint64_t> batch_count(static_cast<std::size_t>(batches), 0);
    std::size_t entries = 0;
    for (index_t n = 1; n <= N; ++n)
        entries += static_cast<std::size_t>(counts[static_cast<std::size_t>(n - 1)]);
    for (auto& b : sums) b.resize(entries);

    innovations::innovation_block block;
    for (std::uint64_t rep = 0; rep < replicas; ++rep) {
        innovations::sample_innovations_into(spec, depth, seed, rep, block);
        const std::uint64_t b = rep * batches / replicas;
        ++batch_count[static_cast<std::size_t>(b)];
        auto& acc = sums[static_cast<std::size_t>(b)];
        std::size_t slot = 0;
        for (index_t n = 1; n <= N; ++n)
            for (index_t k = 1; k <= counts[static_cast<std::size_t>(n - 1)]; ++k) {
                const double a =
                    rule.coeff(n + k - 1, k, detail::history(block, k));
                acc[slot++].add(a * a);
            }
    }

    // assemble the criterion from pooled means; batch criteria give the SE
    const auto assemble = [&](const std::vector<double>& means) {
        neumaier_sum outer;
        std::size_t slot = 0;
        for (index_t n = 1; n <= N; ++n) {
            neumaier_sum inner;
            for (index_t k = 1; k <= counts[static_cast<std::size_t>(n - 1)]; ++k)
                inner.add(means[slot++]);
            outer.add(std::sqrt(std::max(0.0, inner.value())));
        }
        return outer.value();
    };

    std::vector<double> pooled(entries, 0.0);
    for (std::size_t s = 0; s < entries; ++s) {
        neumaier_sum tot;
        for (std::uint64_t b = 0; b < batches; ++b)
            tot.add(sums[static_cast<std::size_t>(b)][s].value());
        pooled[s] = tot.value() / static_cast<double>(replicas);
    }
    std::vector<double> batch_vals;
    std::vector<double> means(entries);
    for (std::uint64_t b = 0; b < batches; ++b) {
        if (batch_count[static_cast<std::size_t>(b)] == 0) continue;
        for (std::size_t s = 0; s < entries; ++s)
            means[s] = sums[static_cast<std::size_t>(b)][s].value() /
                       static_cast<double>(batch_count[static_cast<std::size_t>(b)]);
        batch_vals.push_back(assemble(means));
    }

    criterion_estimate out;
    out.value.mean = assemble(pooled);
    out.value.replicas = replicas;
    out.value.seed = seed;
    out.value.stream_end = replicas;
    if (batch_vals.size() >= 2) {
        neumaier_sum bm;
        for (double v : batch_vals) bm.add(v);
        const double mean_b = bm.value() / static_cast<double>(batch_vals.size());
        neumaier_sum sq;
        for (double v : batch_vals) sq.add((v - mean_b) * (v - mean_b));
        const double nb = static_cast<double>(batch_vals.size());
        out.value.std_error = std::sqrt(sq.value() / (nb - 1.0)) / std::sqrt(nb);
    }
    if (rule.envelope) {
        out.has_envelope = true;
        neumaier_sum outer;
        for (index_t n = 1; n <= N; ++n) {
            neumaier_sum inner;
            for (index_t k = 1; k <= counts[static_cast<std::size_t>(n - 1)]; ++k) {
                const double e = rule.envelope(n + k - 1, k);
                inner.add(e * e);
            }
            outer.add(std::sqrt(std::max(0.0, inner.value())));
        }
        out.envelope_value = outer.value();
    }
    return out;
}

struct martingale_report {
    mc_estimate lhs;       // E sup ||S_n|| estimate (exact mean when exact)
    double rhs = 0.0;      // 2 sum_n sqrt(sum_k E|a|^2)
    double rhs_se = 0.0;   // nonzero only when E|a|^2 itself was estimated
    bool rhs_exact = true;
    bool exact = false;
    check_status status = check_status::pass;
};

/// Doob-based bound: E sup_{n<=N} ||S_n|| <= 2 sum_{n=1}^{N}
/// ( sum_{k=1}^{N-n+1} E|a(n+k-1,k)|^2 )^{1/2}.  Exact mode enumerates
/// coefficients and paths jointly over scalar Rademacher outcomes.
inline martingale_report martingale_bound(const predictable_rule& rule,
                                          const innovation_spec& spec, index_t N,
                                          run_mode mode, std::uint64_t seed = 0,
                                          index_t cap = innovations::enumeration_cap()) {
    rule.validate(N);
    detail::require_scalar(spec);
    martingale_report rep;

    const auto assemble_rhs = [N](auto&& moment) {
        neumaier_sum outer;
        for (index_t n = 1; n <= N; ++n) {
            neumaier_sum inner;
            for (index_t k = 1; k <= N - n + 1; ++k) inner.add(moment(n + k - 1, k));
            outer.add(std::sqrt(std::max(0.0, inner.value())));
        }
        return 2.0 * outer.value();
    };

    if (mode.is_exact()) {
        if (spec.dist != innovations::distribution::rademacher)
            throw std::invalid_argument(
                "exact verification requires Rademacher innovations");
        rep.exact = true;
        // joint enumeration: per outcome evaluate every coefficient once
        std::vector<neumaier_sum> moment_sums(static_cast<std::size_t>(N) * N);
        neumaier_sum sup_sum;
        innovations::for_each_sign_tuple(
            N,
            [&](std::span<const double> z) {
                double s = 0.0, sup = 0.0;
                for (index_t n = 1; n <= N; ++n) {
                    double x = 0.0;
                    for (index_t k = 1; k <= n; ++k) {
                        const double a = rule.coeff(n, k, detail::history(z, k));
                        moment_sums[static_cast<std::size_t>((n - 1) * N + (k - 1))]
                            .add(a * a);
                        x += a * z[static_cast<std::size_t>(k - 1)];
                    }
                    s += x;
                    sup = std::max(sup, std::abs(s));
                }
                sup_sum.add(sup);
            },
            cap);
        const double count = static_cast<double>(std::uint64_t{1} << N);
        rep.lhs.mean = sup_sum.value() / count;
        rep.lhs.replicas = std::uint64_t{1} << N;
        rep.rhs = assemble_rhs([&](index_t n, index_t k) {
            if (rule.second_moment) return rule.second_moment(n, k);
            return moment_sums[static_cast<std::size_t>((n - 1) * N + (k - 1))]
                       .value() /
                   count;
        });
        rep.status = hsl::detail::classify_exact(rep.lhs.mean, rep.rhs);
    } else {
        if (mode.replicas < 2)
            throw std::invalid_argument("Monte Carlo mode needs >= 2 replicas");
        std::vector<double> sups(mode.replicas);
        for (std::uint64_t r = 0; r < mode.replicas; ++r)
            sups[r] = simulate_predictable(rule, spec, N, seed, r).sup();
        rep.lhs = simulate::detail::estimate_from(sups, seed, 0);
        if (rule.second_moment) {
            rep.rhs = assemble_rhs(
                [&](index_t n, index_t k) { return rule.second_moment(n, k); });
        } else {
            // estimated moments carry their own error, reported separately
            rep.rhs_exact = false;
            const auto est = expected_square_criterion(rule, spec, N, N,
                                                       mode.replicas, seed + 1);
            rep.rhs = 2.0 * est.value.mean;
            rep.rhs_se = 2.0 * est.value.std_error;
        }
        rep.status = hsl::detail::classify_mc(rep.lhs.mean, rep.lhs.std_error,
                                              rep.rhs, rep.rhs_se);
    }
    return rep;
}

struct doob_report {
    index_t component = 0;
    double sup_sq_mean = 0.0;       // E sup_j M_j^2
    double terminal_sq_mean = 0.0;  // E M_N^2
    double ratio = 0.0;             // sup / terminal (1 when both vanish)
    check_status status = check_status::pass;
    bool exact = false;
};

/// Doob check for the n-th decomposition component: the norms of the
/// partial sums of the n-th diagonal series form a nonnegative
/// submartingale M_j, and E sup_{j<=N} M_j^2 <= 4 E M_N^2.
inline doob_report doob_check(index_t component, const predictable_rule& rule,
                              const innovation_spec& spec, index_t N, run_mode mode,
                              std::uint64_t seed = 0,
                              index_t cap = innovations::enumeration_cap()) {
    rule.validate(N);
    detail::require_scalar(spec);
    if (component < 1 || component > N)
        throw std::invalid_argument("component index outside 1..N");

    doob_report rep;
    rep.component = component;

    const auto walk = [&](std::span<const double> z, double& sup_sq, double& term_sq) {
        double partial = 0.0;
        sup_sq = 0.0;
        for (index_t j = component; j <= N; ++j) {
            const index_t k = j - component + 1;
            partial += rule.coeff(j, k, detail::history(z, k)) *
                       z[static_cast<std::size_t>(k - 1)];
            sup_sq = std::max(sup_sq, partial * partial);
        }
        term_sq = partial * partial;
    };

    if (mode.is_exact()) {
        if (spec.dist != innovations::distribution::rademacher)
            throw std::invalid_argument(
                "exact verification requires Rademacher innovations");
        rep.exact = true;
        const index_t len = N - component + 1;  // only Z_1..Z_len matter
        neumaier_sum sup_acc, term_acc;
        innovations::for_each_sign_tuple(
            len,
            [&](std::span<const double> z) {
                double sup_sq, term_sq;
                walk(z, sup_sq, term_sq);
                sup_acc.add(sup_sq);
                term_acc.add(term_sq);
            },
            cap);
        const double count = static_cast<double>(std::uint64_t{1} << len);
        rep.sup_sq_mean = sup_acc.value() / count;
        rep.terminal_sq_mean = term_acc.value() / count;
        rep.status =
            hsl::detail::classify_exact(rep.sup_sq_mean, 4.0 * rep.terminal_sq_mean);
    } else {
        if (mode.replicas < 2)
            throw std::invalid_argument("Monte Carlo mode needs >= 2 replicas");
        // per-replica difference sup - 4 terminal carries the joint error
        std::vector<double> diffs(mode.replicas);
        neumaier_sum sup_acc, term_acc;
        innovations::innovation_block block;
        const index_t len = N - component + 1;
        for (std::uint64_t r = 0; r < mode.replicas; ++r) {
            innovations::sample_innovations_into(spec, len, seed, r, block);
            double sup_sq, term_sq;
            walk({block.data.data(), block.data.size()}, sup_sq, term_sq);
            sup_acc.add(sup_sq);
            term_acc.add(term_sq);
            diffs[r] = sup_sq - 4.0 * term_sq;
        }
        const double count = static_cast<double>(mode.replicas);
        rep.sup_sq_mean = sup_acc.value() / count;
        rep.terminal_sq_mean = term_acc.value() / count;
        const auto d = simulate::detail::estimate_from(diffs, seed, 0);
        rep.status = hsl::detail::classify_mc(d.mean, d.std_error, 0.0);
    }
    rep.ratio = rep.terminal_sq_mean > 0.0
                    ? rep.sup_sq_mean / rep.terminal_sq_mean
                    : (rep.sup_sq_mean > 0.0 ? std::numeric_limits<double>::infinity()
                                             : 1.0);
    return rep;
}

}  // namespace hsl::adaptive

#endif
