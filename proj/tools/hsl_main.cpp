// SPDX-License-Identifier: Apache-2.0
//
// hsl — analyze convergence criteria of triangular random series, verify
// the maximal inequalities by enumeration or Monte Carlo, factor covariance
// structures, and run path simulations.  All randomness flows from --seed
// and stream ids; reports are deterministic given the config.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hsl/cli.hpp"

namespace {

void add_common_flags(CLI::App* app, hsl::cli::run_config& cfg) {
    app->add_option("--N", cfg.N, "horizon / outer cutoff");
    app->add_option("--K", cfg.K, "inner cutoff (defaults to N)");
    app->add_option("--seed", cfg.seed, "master seed");
    app->add_option("--replicas", cfg.replicas, "Monte Carlo replica count");
    app->add_flag("--exact", cfg.exact, "exhaustive Rademacher enumeration");
    app->add_option("--dist", cfg.dist, "rademacher|gaussian|uniform");
    app->add_option("--dim", cfg.dim, "ambient dimension");
    app->add_option("--embedding", cfg.embedding, "scalar|axis-cycling|isotropic");
    app->add_option("--out", cfg.out, "output path (default stdout)");
    app->add_option("--format", cfg.format, "csv|table");
    app->add_option("--threads", cfg.threads, "worker threads (wall time only)");
}

int emit(const hsl::cli::run_config& cfg, const hsl::cli::command_result& res) {
    const auto text = res.rep.render(hsl::cli::parse_format(cfg.format));
    if (cfg.out.empty() || res.out_consumed) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out);
        if (!out) {
            std::cerr << "hsl: cannot open output file: " << cfg.out << "\n";
            return 1;
        }
        out << text;
    }
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    hsl::cli::run_config cfg;
    CLI::App app{"random-series criteria, maximal-inequality verification, "
                 "covariance factorization, and simulation"};
    app.require_subcommand(1);

    auto* analyze = app.add_subcommand("analyze", "criterion and tail report");
    analyze->add_option("--matrix", cfg.matrix, "matrix file or rule")->required();
    analyze->add_option("--weights", cfg.weights, "weights file or rule");
    analyze->add_option("--tail-policy", cfg.tail_policy,
                        "none|stagnation|analytic");
    add_common_flags(analyze, cfg);

    auto* verify = app.add_subcommand("verify", "inequality verification");
    verify->require_subcommand(1);
    for (const char* kind : {"levy", "martingale", "stopping"}) {
        auto* sub = verify->add_subcommand(kind);
        sub->add_option("--matrix", cfg.matrix, "matrix file or rule");
        sub->add_option("--weights", cfg.weights, "weights file or rule");
        sub->add_option("--rule", cfg.rule, "predictable rule (martingale)");
        sub->add_option("--r-grid", cfg.r_grid, "lo:hi:count (stopping)");
        add_common_flags(sub, cfg);
    }

    auto* factor = app.add_subcommand("factor", "covariance factorization");
    factor->add_option("--cov", cfg.cov, "covariance file, fgn:H=<h>, or fgn0")
        ->required();
    factor->add_option("--tol", cfg.tol, "verification tolerance");
    add_common_flags(factor, cfg);

    auto* simulate = app.add_subcommand("simulate", "paths and estimates");
    simulate->require_subcommand(1);
    for (const char* kind : {"path", "sup", "tail", "l2", "moment"}) {
        auto* sub = simulate->add_subcommand(kind);
        sub->add_option("--matrix", cfg.matrix, "matrix file or rule");
        sub->add_option("--weights", cfg.weights, "weights file or rule");
        sub->add_option("--offset", cfg.offset, "tail offset N");
        sub->add_option("--span", cfg.span, "tail horizon m");
        sub->add_option("--m-grid", cfg.m_grid, "lo:hi:count (l2)");
        sub->add_option("--J", cfg.J, "L2 tail horizon (l2)");
        sub->add_option("--segment", cfg.segments, "m:j (moment; repeatable)");
        add_common_flags(sub, cfg);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto* cmd : app.get_subcommands()) {
            cfg.command = cmd->get_name();
            const auto subs = cmd->get_subcommands();
            cfg.sub = subs.empty() ? "" : subs.front()->get_name();
        }
        return emit(cfg, hsl::cli::run(cfg));
    } catch (const std::exception& e) {
        std::cerr << "hsl: " << e.what() << "\n";
        return 1;
    }
}
