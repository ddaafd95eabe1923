// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the CLI.  Every run is fully determined by
// its run_config; the resolved config is echoed into the report header and
// the report body is byte-identical across reruns (the timestamp lives in
// its own comment line).  --threads never changes output, only wall time.
//
// Exit codes: 0 all checks passed, 2 statistical-inconclusive present,
// 1 violation or error.
#ifndef HSL_CLI_HPP
#define HSL_CLI_HPP

#include <string>
#include <vector>

#include "hsl/adaptive.hpp"
#include "hsl/coeffs.hpp"
#include "hsl/covfactor.hpp"
#include "hsl/innovations.hpp"
#include "hsl/io.hpp"
#include "hsl/rules.hpp"
#include "hsl/simulate.hpp"
#include "hsl/stoptime.hpp"

namespace hsl::cli {

struct run_config {
    std::string command;  // analyze | verify | factor | simulate
    std::string sub;      // verify: levy|martingale|stopping; simulate: path|sup|tail|l2|moment
    std::string matrix;
    std::string weights;
    std::string cov;
    std::string rule;
    index_t N = 0;
    index_t K = 0;  // 0 -> N
    std::uint64_t seed = 0;
    std::uint64_t replicas = 100000;
    bool exact = false;
    std::string r_grid;
    std::string dist = "rademacher";
    int dim = 1;
    std::string embedding = "scalar";
    std::string out;
    std::string format = "csv";
    int threads = 1;
    std::vector<std::string> segments;
    std::string m_grid;
    index_t J = 10;
    index_t offset = 0;
    index_t span = 0;
    double tol = 1e-10;
    std::string tail_policy = "stagnation";
};

struct command_result {
    io::report rep;
    int exit_code = 0;
    // factor writes the matrix to --out itself; the report then goes to stdout
    bool out_consumed = false;
};

namespace detail {

inline innovations::distribution parse_dist(const std::string& s) {
    if (s == "rademacher") return innovations::distribution::rademacher;
    if (s == "gaussian") return innovations::distribution::gaussian;
    if (s == "uniform") return innovations::distribution::uniform;
    throw std::invalid_argument("unknown distribution '" + s +
                                "' (rademacher|gaussian|uniform)");
}

inline innovations::embedding parse_embedding(const std::string& s) {
    if (s == "scalar") return innovations::embedding::scalar;
    if (s == "axis-cycling" || s == "axis") return innovations::embedding::axis_cycling;
    if (s == "isotropic") return innovations::embedding::isotropic;
    throw std::invalid_argument("unknown embedding '" + s +
                                "' (scalar|axis-cycling|isotropic)");
}

inline coeffs::tail_policy parse_tail_policy(const std::string& s) {
    if (s == "none") return coeffs::tail_policy::none;
    if (s == "stagnation") return coeffs::tail_policy::stagnation;
    if (s == "analytic") return coeffs::tail_policy::analytic;
    throw std::invalid_argument("unknown tail policy '" + s +
                                "' (none|stagnation|analytic)");
}

inline innovations::innovation_spec make_spec(const run_config& cfg) {
    innovations::innovation_spec spec;
    spec.dist = parse_dist(cfg.dist);
    spec.dim = cfg.dim;
    spec.emb = parse_embedding(cfg.embedding);
    spec.validate();
    return spec;
}

inline run_mode make_mode(const run_config& cfg) {
    return cfg.exact ? run_mode::exact() : run_mode::monte_carlo(cfg.replicas);
}

inline int worse(int a, int b) {
    // 1 (violation/error) dominates 2 (inconclusive) dominates 0
    if (a == 1 || b == 1) return 1;
    if (a == 2 || b == 2) return 2;
    return 0;
}

inline int code_of(check_status s) {
    switch (s) {
        case check_status::pass: return 0;
        case check_status::inconclusive: return 2;
        default: return 1;
    }
}

inline std::string yesno(bool b) { return b ? "yes" : "no"; }

inline void echo_common(io::report& rep, const run_config& cfg) {
    // everything that determines the run; --threads and --out are excluded
    // because they must not alter the body
    if (!cfg.matrix.empty()) rep.add_config("matrix", cfg.matrix);
    if (!cfg.weights.empty()) rep.add_config("weights", cfg.weights);
    if (!cfg.cov.empty()) rep.add_config("cov", cfg.cov);
    if (!cfg.rule.empty()) rep.add_config("rule", cfg.rule);
    if (cfg.N > 0) rep.add_config("N", std::to_string(cfg.N));
    if (cfg.K > 0) rep.add_config("K", std::to_string(cfg.K));
    rep.add_config("seed", std::to_string(cfg.seed));
    if (!cfg.exact) rep.add_config("replicas", std::to_string(cfg.replicas));
    rep.add_config("mode", cfg.exact ? "exact" : "monte-carlo");
    rep.add_config("dist", cfg.dist);
    rep.add_config("dim", std::to_string(cfg.dim));
    rep.add_config("embedding", cfg.embedding);
    if (!cfg.r_grid.empty()) rep.add_config("r-grid", cfg.r_grid);
    if (!cfg.m_grid.empty()) rep.add_config("m-grid", cfg.m_grid);
    for (const auto& s : cfg.segments) rep.add_config("segment", s);
    rep.add_config("format", cfg.format);
}

inline io::real_matrix require_real(io::any_matrix m, const char* what) {
    if (!std::holds_alternative<io::real_matrix>(m))
        throw std::invalid_argument(std::string(what) +
                                    " requires a real coefficient matrix");
    return std::get<io::real_matrix>(std::move(m));
}

// 1-2-5 decades up to and including limit
inline std::vector<index_t> decade_grid(index_t limit) {
    std::vector<index_t> g;
    for (index_t base = 1; base <= limit; base *= 10)
        for (index_t m : {index_t{1}, index_t{2}, index_t{5}}) {
            const index_t v = base * m;
            if (v <= limit) g.push_back(v);
        }
    if (g.empty() || g.back() != limit) g.push_back(limit);
    return g;
}

}  // namespace detail

inline command_result cmd_analyze(const run_config& cfg) {
    if (cfg.N < 1) throw std::invalid_argument("analyze requires --N >= 1");
    const index_t K = cfg.K > 0 ? cfg.K : cfg.N;
    const auto policy = detail::parse_tail_policy(cfg.tail_policy);

    command_result res;
    auto& rep = res.rep;
    rep.command = "analyze";
    detail::echo_common(rep, cfg);
    rep.add_config("tail-policy", cfg.tail_policy);
    rep.columns = {"quantity", "index", "value", "flag"};

    // weights must cover rows up to N + K - 1
    std::optional<coeffs::vector_weights> weights;
    if (!cfg.weights.empty())
        weights = rules::resolve_weights(cfg.weights, cfg.N + K, cfg.dim);

    auto matrix = rules::resolve_matrix(cfg.matrix, cfg.N + K - 1);
    std::visit(
        [&](const auto& m) {
            const auto profile =
                weights ? coeffs::make_profile(m, *weights, cfg.N, K, policy)
                        : coeffs::make_profile(m, cfg.N, K, policy);
            for (index_t n = 1; n <= cfg.N; ++n) {
                const auto i = static_cast<std::size_t>(n - 1);
                rep.add_row({"diagonal_norm", std::to_string(n),
                             io::fmt_float(profile.norms[i]),
                             profile.inner_stagnant[i] ? "stagnant" : "growing"});
            }
            for (index_t n = 1; n <= cfg.N; ++n)
                rep.add_row({"criterion_partial", std::to_string(n),
                             io::fmt_float(profile.partial_criterion[static_cast<std::size_t>(n - 1)]),
                             ""});
            rep.add_row({"criterion_value", std::to_string(cfg.N),
                         io::fmt_float(profile.partial_criterion.empty()
                                           ? 0.0
                                           : profile.partial_criterion.back()),
                         profile.converged ? "converged" : "not-falsified-only"});
            if (profile.first_growing > 0) {
                rep.add_row({"inner_diverges_at", std::to_string(profile.first_growing),
                             io::fmt_float(static_cast<double>(profile.first_growing)),
                             "growing"});
                rep.notes.push_back(
                    "inner sum diverges at diagonal " +
                    std::to_string(profile.first_growing) +
                    " (reported criterion is a lower bound at this truncation)");
            }
            for (const index_t nt : detail::decade_grid(cfg.N)) {
                const auto t = coeffs::tail_bounds(m, nt, std::max(K, nt + 1));
                rep.add_row({"tail_A", std::to_string(nt), io::fmt_float(t.A), ""});
                rep.add_row({"tail_B", std::to_string(nt), io::fmt_float(t.B), ""});
                rep.add_row({"tail_bound", std::to_string(nt),
                             io::fmt_float(t.bound_rhs), ""});
            }
            const auto abs = coeffs::absolute_sum(m, cfg.N);
            rep.add_row({"absolute_sum", std::to_string(cfg.N),
                         io::fmt_float(abs.value),
                         abs.converged ? "converged" : "not-falsified-only"});
            const auto cols = coeffs::column_sums(m, cfg.N);
            for (index_t k = 1; k <= cfg.N; ++k) {
                const auto& c = cols[static_cast<std::size_t>(k - 1)];
                if constexpr (std::is_same_v<std::decay_t<decltype(c)>, double>) {
                    rep.add_row({"column_sum", std::to_string(k), io::fmt_float(c), ""});
                } else {
                    rep.add_row({"column_sum_re", std::to_string(k),
                                 io::fmt_float(c.real()), ""});
                    rep.add_row({"column_sum_im", std::to_string(k),
                                 io::fmt_float(c.imag()), ""});
                }
            }
        },
        matrix);
    return res;
}

inline command_result cmd_verify(const run_config& cfg) {
    if (cfg.N < 1) throw std::invalid_argument("verify requires --N >= 1");
    command_result res;
    auto& rep = res.rep;
    rep.command = "verify " + cfg.sub;
    detail::echo_common(rep, cfg);
    const auto spec = detail::make_spec(cfg);
    const auto mode = detail::make_mode(cfg);

    if (cfg.sub == "levy") {
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, cfg.N),
                                      "verification");
        std::optional<coeffs::vector_weights> weights;
        if (!cfg.weights.empty())
            weights = rules::resolve_weights(cfg.weights, cfg.N, cfg.dim);
        const auto r = simulate::verify_levy(m, spec, cfg.N, mode, cfg.seed,
                                             cfg.threads,
                                             weights ? &*weights : nullptr);
        rep.columns = {"check", "method", "samples", "lhs",   "lhs_se",
                       "rhs",   "margin", "status"};
        rep.add_row({"levy", r.exact ? "exact" : "monte-carlo",
                     std::to_string(r.samples), io::fmt_float(r.lhs_mean),
                     io::fmt_float(r.lhs_se), io::fmt_float(r.rhs),
                     io::fmt_float(r.margin), to_string(r.status)});
        res.exit_code = detail::code_of(r.status);
    } else if (cfg.sub == "martingale") {
        if (cfg.rule.empty())
            throw std::invalid_argument("verify martingale requires --rule");
        const auto rule = rules::make_predictable(cfg.rule, cfg.N);
        const auto r =
            adaptive::martingale_bound(rule, spec, cfg.N, mode, cfg.seed);
        rep.columns = {"check",  "method", "samples", "lhs",    "lhs_se",
                       "rhs",    "rhs_se", "rhs_exact", "margin", "status"};
        rep.add_row({"martingale", r.exact ? "exact" : "monte-carlo",
                     std::to_string(r.lhs.replicas), io::fmt_float(r.lhs.mean),
                     io::fmt_float(r.lhs.std_error), io::fmt_float(r.rhs),
                     io::fmt_float(r.rhs_se), detail::yesno(r.rhs_exact),
                     io::fmt_float(r.rhs - r.lhs.mean), to_string(r.status)});
        res.exit_code = detail::code_of(r.status);
    } else if (cfg.sub == "stopping") {
        if (cfg.r_grid.empty())
            throw std::invalid_argument("verify stopping requires --r-grid");
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, cfg.N),
                                      "verification");
        const auto grid = rules::parse_r_grid(cfg.r_grid);
        const auto rows = stoptime::verify_stopping_inequality(
            m, spec, cfg.N, grid, mode, cfg.seed);
        rep.columns = {"r",        "p_sup",     "se_sup",     "p_final", "se_final",
                       "p_flipped", "se_flipped", "margin",   "status"};
        for (const auto& row : rows) {
            rep.add_row({io::fmt_float(row.level), io::fmt_float(row.p_sup),
                         io::fmt_float(row.se_sup), io::fmt_float(row.p_final),
                         io::fmt_float(row.se_final), io::fmt_float(row.p_flipped),
                         io::fmt_float(row.se_flipped), io::fmt_float(row.margin),
                         to_string(row.status)});
            res.exit_code = detail::worse(res.exit_code, detail::code_of(row.status));
        }
    } else {
        throw std::invalid_argument("unknown verify kind '" + cfg.sub +
                                    "' (levy|martingale|stopping)");
    }
    return res;
}

inline command_result cmd_factor(const run_config& cfg) {
    if (cfg.N < 1) throw std::invalid_argument("factor requires --N >= 1");
    if (cfg.cov.empty()) throw std::invalid_argument("factor requires --cov");

    covfactor::covariance_spec spec = [&] {
        if (cfg.cov == "fgn0") return covfactor::covariance_spec::fgn(0.0, cfg.N);
        if (cfg.cov.rfind("fgn:H=", 0) == 0) {
            const std::string h = cfg.cov.substr(6);
            char* end = nullptr;
            const double hv = std::strtod(h.c_str(), &end);
            if (end != h.c_str() + h.size())
                throw std::invalid_argument("malformed Hurst index in --cov");
            return covfactor::covariance_spec::fgn(hv, cfg.N);
        }
        return io::load_covmat_file(cfg.cov);
    }();

    const auto factor = covfactor::cholesky_lower(spec);
    const auto check = covfactor::verify_factorization(factor, spec, cfg.tol);

    command_result res;
    auto& rep = res.rep;
    rep.command = "factor";
    detail::echo_common(rep, cfg);
    rep.add_config("tol", io::fmt_float(cfg.tol));
    rep.columns = {"quantity", "value"};
    rep.add_row({"size", std::to_string(spec.size())});
    rep.add_row({"max_deviation", io::fmt_float(check.max_abs_deviation)});
    rep.add_row({"worst_entry", std::to_string(check.worst_n) + ":" +
                                    std::to_string(check.worst_m)});
    rep.add_row({"tol", io::fmt_float(check.tol)});
    rep.add_row({"status", check.pass ? "pass" : "violation"});
    res.exit_code = check.pass ? 0 : 1;

    if (!cfg.out.empty()) {
        std::ofstream out(cfg.out);
        if (!out) throw std::runtime_error("cannot open output file: " + cfg.out);
        io::write_trimat(out, factor, spec.size());
        res.out_consumed = true;
    }
    return res;
}

inline command_result cmd_simulate(const run_config& cfg) {
    command_result res;
    auto& rep = res.rep;
    rep.command = "simulate " + cfg.sub;
    detail::echo_common(rep, cfg);
    const auto spec = detail::make_spec(cfg);

    if (cfg.sub == "path") {
        if (cfg.N < 1) throw std::invalid_argument("simulate path requires --N >= 1");
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, cfg.N),
                                      "simulation");
        std::optional<coeffs::vector_weights> weights;
        if (!cfg.weights.empty())
            weights = rules::resolve_weights(cfg.weights, cfg.N, cfg.dim);
        const auto z = innovations::sample_innovations(spec, cfg.N, cfg.seed, 0);
        const auto path = simulate::build_path(m, z, cfg.N, nullptr,
                                               weights ? &*weights : nullptr);
        rep.columns = {"step"};
        for (int c = 1; c <= path.dim; ++c) rep.columns.push_back("x" + std::to_string(c));
        for (int c = 1; c <= path.dim; ++c) rep.columns.push_back("s" + std::to_string(c));
        rep.columns.push_back("running_sup");
        for (index_t n = 1; n <= cfg.N; ++n) {
            std::vector<std::string> row{std::to_string(n)};
            for (double v : path.term(n)) row.push_back(io::fmt_float(v));
            for (double v : path.prefix_sum(n)) row.push_back(io::fmt_float(v));
            row.push_back(io::fmt_float(path.running_sup[static_cast<std::size_t>(n - 1)]));
            rep.add_row(std::move(row));
        }
    } else if (cfg.sub == "sup") {
        if (cfg.N < 1) throw std::invalid_argument("simulate sup requires --N >= 1");
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, cfg.N),
                                      "simulation");
        std::optional<coeffs::vector_weights> weights;
        if (!cfg.weights.empty())
            weights = rules::resolve_weights(cfg.weights, cfg.N, cfg.dim);
        const auto e = simulate::mc_expected_sup(m, spec, cfg.N, cfg.replicas,
                                                 cfg.seed, cfg.threads,
                                                 weights ? &*weights : nullptr);
        rep.columns = {"horizon", "replicas", "mean", "std_error"};
        rep.add_row({std::to_string(cfg.N), std::to_string(e.replicas),
                     io::fmt_float(e.mean), io::fmt_float(e.std_error)});
    } else if (cfg.sub == "tail") {
        if (cfg.span < 1) throw std::invalid_argument("simulate tail requires --span >= 1");
        const index_t total = cfg.offset + cfg.span;
        const index_t K = cfg.K > 0 ? cfg.K : total;
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, total),
                                      "simulation");
        const auto r = simulate::verify_tail_bound(m, spec, cfg.offset, cfg.span, K,
                                                   cfg.replicas, cfg.seed, cfg.threads);
        rep.columns = {"offset", "span",   "replicas", "mean",  "std_error",
                       "tail_A", "tail_B", "bound",    "status"};
        rep.add_row({std::to_string(cfg.offset), std::to_string(cfg.span),
                     std::to_string(r.estimate.replicas),
                     io::fmt_float(r.estimate.mean),
                     io::fmt_float(r.estimate.std_error), io::fmt_float(r.tails.A),
                     io::fmt_float(r.tails.B), io::fmt_float(r.tails.bound_rhs),
                     to_string(r.status)});
        res.exit_code = detail::code_of(r.status);
    } else if (cfg.sub == "l2") {
        if (cfg.m_grid.empty())
            throw std::invalid_argument("simulate l2 requires --m-grid");
        std::vector<index_t> grid;
        for (double v : rules::parse_r_grid(cfg.m_grid))
            grid.push_back(static_cast<index_t>(std::llround(v)));
        const index_t order = (grid.empty() ? 0 : *std::max_element(grid.begin(), grid.end())) + cfg.J;
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, order),
                                      "simulation");
        const auto rows = stoptime::l2_cauchy_profile(m, spec, grid, cfg.J,
                                                      cfg.replicas, cfg.seed);
        rep.columns = {"m", "argmax_j", "sup_second_moment", "std_error"};
        for (const auto& row : rows)
            rep.add_row({std::to_string(row.m), std::to_string(row.argmax_j),
                         io::fmt_float(row.sup_second_moment), io::fmt_float(row.se)});
    } else if (cfg.sub == "moment") {
        if (cfg.segments.empty())
            throw std::invalid_argument("simulate moment requires --segment m:j");
        std::vector<std::pair<index_t, index_t>> segs;
        index_t order = 1;
        for (const auto& s : cfg.segments) {
            segs.push_back(rules::parse_segment(s));
            order = std::max(order, segs.back().first + segs.back().second);
        }
        auto m = detail::require_real(rules::resolve_matrix(cfg.matrix, order),
                                      "simulation");
        const auto scan = stoptime::fourth_moment_scan(m, spec, segs,
                                                       detail::make_mode(cfg), cfg.seed);
        rep.columns = {"m",     "j",        "samples", "second", "fourth",
                       "ratio", "se_ratio", "is_max"};
        for (std::size_t i = 0; i < scan.rows.size(); ++i) {
            const auto& row = scan.rows[i];
            rep.add_row({std::to_string(row.m), std::to_string(row.j),
                         std::to_string(row.samples), io::fmt_float(row.second),
                         io::fmt_float(row.fourth), io::fmt_float(row.ratio),
                         io::fmt_float(row.se_ratio),
                         detail::yesno(static_cast<index_t>(i) == scan.argmax)});
        }
        rep.notes.push_back("empirical K (max ratio over scanned segments) = " +
                            io::fmt_float(scan.max_ratio));
    } else {
        throw std::invalid_argument("unknown simulate kind '" + cfg.sub +
                                    "' (path|sup|tail|l2|moment)");
    }
    return res;
}

inline command_result run(const run_config& cfg) {
    if (cfg.command == "analyze") return cmd_analyze(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "factor") return cmd_factor(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

inline io::report_format parse_format(const std::string& s) {
    if (s == "csv") return io::report_format::csv;
    if (s == "table") return io::report_format::table;
    throw std::invalid_argument("unknown format '" + s + "' (csv|table)");
}

}  // namespace hsl::cli

#endif
