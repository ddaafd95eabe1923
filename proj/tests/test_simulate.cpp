// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hsl;
using namespace hsl::simulate;
using hsl::testing::gaussian_scalar;
using hsl::testing::rademacher_scalar;
using Catch::Approx;

namespace {

innovations::innovation_block scalar_block(std::vector<double> values) {
    innovations::innovation_block b;
    b.dim = 1;
    b.count = static_cast<index_t>(values.size());
    b.data = std::move(values);
    return b;
}

}  // namespace

TEST_CASE("build_path") {
    SECTION("diagonal ones reproduce the innovations") {
        auto m = rules::make_matrix("diag:ones", 6);
        auto z = innovations::sample_innovations(gaussian_scalar(), 6, 9, 0);
        auto p = build_path(m, z, 6);
        double s = 0.0;
        for (index_t n = 1; n <= 6; ++n) {
            REQUIRE(p.term(n)[0] == z.scalar(n));
            s += z.scalar(n);
            REQUIRE(p.prefix_sum(n)[0] == s);
        }
    }
    SECTION("hand-evaluated two-step example") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}, {1.0, 1.0}});
        auto p = build_path(m, scalar_block({1.0, 1.0}), 2);
        REQUIRE(p.prefix_sum(1)[0] == 1.0);
        REQUIRE(p.prefix_sum(2)[0] == 3.0);
        REQUIRE(p.running_sup == std::vector<double>{1.0, 3.0});
    }
    SECTION("a global sign flip negates the path but not the supremum") {
        auto m = testing::random_lower(10, 21);
        auto z = innovations::sample_innovations(gaussian_scalar(), 10, 21, 0);
        auto plus = build_path(m, z, 10);
        auto flip = innovations::sign_pattern::all_minus(10);
        auto minus = build_path(m, z, 10, &flip);
        for (index_t n = 1; n <= 10; ++n)
            REQUIRE(minus.prefix_sum(n)[0] == -plus.prefix_sum(n)[0]);
        REQUIRE(minus.running_sup == plus.running_sup);
    }
    SECTION("weighted terms are x_n u_n and need scalar innovations") {
        auto m = rules::make_matrix("diag:ones", 4);
        auto w = rules::make_weights("harmonic", 4, 2);
        auto z = innovations::sample_innovations(rademacher_scalar(), 4, 5, 0);
        auto p = build_path(m, z, 4, nullptr, &w);
        REQUIRE(p.dim == 2);
        REQUIRE(p.term(1)[0] == z.scalar(1) * 1.0);
        REQUIRE(p.term(2)[1] == z.scalar(2) * 0.5);  // axis cycles

        innovations::innovation_spec vec{innovations::distribution::gaussian, 2,
                                         innovations::embedding::axis_cycling};
        auto zv = innovations::sample_innovations(vec, 4, 5, 0);
        REQUIRE_THROWS_AS(build_path(m, zv, 4, nullptr, &w), std::invalid_argument);
    }
    SECTION("prefix increments equal the terms exactly") {
        auto m = testing::random_lower(16, 31);
        innovations::innovation_spec iso{innovations::distribution::uniform, 3,
                                         innovations::embedding::isotropic};
        auto z = innovations::sample_innovations(iso, 16, 4, 2);
        auto p = build_path(m, z, 16);
        for (index_t n = 2; n <= 16; ++n)
            for (int c = 0; c < 3; ++c)
                REQUIRE(p.prefix_sum(n)[c] - p.prefix_sum(n - 1)[c] ==
                        Approx(p.term(n)[c]).margin(0.0));
        for (index_t n = 2; n <= 16; ++n)
            REQUIRE(p.running_sup[size_t(n - 1)] >= p.running_sup[size_t(n - 2)]);
    }
}

TEST_CASE("mc_expected_sup") {
    SECTION("single Gaussian term estimates E|Z| = sqrt(2/pi)") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}});
        auto e = mc_expected_sup(m, gaussian_scalar(), 1, 1000000, 2026);
        REQUIRE(std::abs(e.mean - std::sqrt(2.0 / M_PI)) <= 3.0 * e.std_error);
    }
    SECTION("single Rademacher term is exactly 1") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}});
        auto e = mc_expected_sup(m, rademacher_scalar(), 1, 100, 7);
        REQUIRE(e.mean == 1.0);
        REQUIRE(e.std_error == 0.0);
    }
    SECTION("two-step example approaches its exact value 2") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}, {1.0, 1.0}});
        auto e = mc_expected_sup(m, rademacher_scalar(), 2, 40000, 11);
        REQUIRE(std::abs(e.mean - 2.0) <= 3.0 * e.std_error);
    }
    SECTION("replica floor") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}});
        REQUIRE_THROWS_AS(mc_expected_sup(m, rademacher_scalar(), 1, 1, 0),
                          std::invalid_argument);
    }
}

TEST_CASE("exact_expected_sup") {
    auto ones = coeffs::coefficient_matrix<double>::from_rows({{1.0}, {1.0, 1.0}});
    REQUIRE(exact_expected_sup(ones, 2) == 2.0);
    auto diag = rules::make_matrix("diag:ones", 2);
    REQUIRE(exact_expected_sup(diag, 2) == 1.5);
    REQUIRE(exact_expected_sup(testing::zero_matrix(4), 3) == 0.0);

    SECTION("nondecreasing in the horizon") {
        auto m = testing::random_lower(10, 55);
        double prev = 0.0;
        for (index_t n = 1; n <= 10; ++n) {
            const double v = exact_expected_sup(m, n);
            REQUIRE(v >= prev - 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("verify_levy") {
    SECTION("two-step example passes with the expected margin") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}, {1.0, 1.0}});
        auto r = verify_levy(m, rademacher_scalar(), 2, run_mode::exact());
        REQUIRE(r.exact);
        REQUIRE(r.lhs_mean == 2.0);
        REQUIRE(r.rhs == Approx(4.8284271247461903).margin(1e-12));
        REQUIRE(r.status == check_status::pass);
    }
    SECTION("zero matrix passes with zero margin") {
        auto r = verify_levy(testing::zero_matrix(4), rademacher_scalar(), 3,
                             run_mode::exact());
        REQUIRE(r.lhs_mean == 0.0);
        REQUIRE(r.rhs == 0.0);
        REQUIRE(r.status == check_status::pass);
    }
    SECTION("random matrices never violate the exact bound") {
        for (std::uint64_t seed = 200; seed < 220; ++seed) {
            auto m = testing::random_lower(10, seed);
            auto r = verify_levy(m, rademacher_scalar(), 10, run_mode::exact());
            REQUIRE(r.status == check_status::pass);
        }
    }
    SECTION("Monte Carlo mode passes for a Gaussian fixture") {
        auto m = rules::make_matrix("fgn0", 40);
        auto r = verify_levy(m, gaussian_scalar(), 40,
                             run_mode::monte_carlo(4000), 3, 2);
        REQUIRE_FALSE(r.exact);
        REQUIRE(r.status == check_status::pass);
    }
    SECTION("exact weighted mode folds dim-1 weights into the rows") {
        auto m = rules::make_matrix("diag:ones", 8);
        auto w = rules::make_weights("geometric", 8, 1);
        auto r = verify_levy(m, rademacher_scalar(), 8, run_mode::exact(), 0, 1, &w);
        REQUIRE(r.status == check_status::pass);
        REQUIRE(r.rhs == Approx(coeffs::levy_bound(m, w, 8)).margin(0.0));
    }
    SECTION("exact mode refuses non-Rademacher innovations") {
        auto m = rules::make_matrix("diag:ones", 4);
        REQUIRE_THROWS_AS(verify_levy(m, gaussian_scalar(), 4, run_mode::exact()),
                          std::invalid_argument);
    }
}

TEST_CASE("three-way Monte Carlo classification") {
    using hsl::detail::classify_mc;
    REQUIRE(classify_mc(1.0, 0.01, 2.0) == check_status::pass);
    REQUIRE(classify_mc(1.95, 0.1, 2.0) == check_status::inconclusive);
    REQUIRE(classify_mc(2.05, 0.1, 2.0) == check_status::inconclusive);
    REQUIRE(classify_mc(2.5, 0.1, 2.0) == check_status::violation);
}

TEST_CASE("sign invariance of the bound and of the exact expectation") {
    stream_engine eng(4242, 9);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = testing::random_lower(9, 3000 + trial);
        std::vector<double> eps(9);
        for (auto& e : eps) e = eng.rademacher();
        auto flipped = testing::flip_rows(m, eps);
        REQUIRE(coeffs::levy_bound(flipped, 9) == coeffs::levy_bound(m, 9));
        REQUIRE(exact_expected_sup(flipped, 9) ==
                Approx(exact_expected_sup(m, 9)).margin(1e-12));
    }
}

TEST_CASE("prefix decomposition") {
    SECTION("hand example") {
        auto m = coeffs::coefficient_matrix<double>::from_rows({{1.0}, {1.0, 1.0}});
        auto comps = prefix_decomposition(m, scalar_block({1.0, 1.0}), 2);
        REQUIRE(comps[0] == std::vector<double>{1.0, 2.0});
        REQUIRE(comps[1] == std::vector<double>{0.0, 1.0});
    }
    SECTION("diagonal matrices have a single nonzero component") {
        auto m = testing::random_diagonal(8, 77);
        auto z = innovations::sample_innovations(rademacher_scalar(), 8, 1, 0);
        auto comps = prefix_decomposition(m, z, 8);
        for (std::size_t n = 1; n < comps.size(); ++n)
            for (double v : comps[n]) REQUIRE(v == 0.0);
    }
    SECTION("component sum reproduces the prefix sums") {
        for (std::uint64_t seed = 500; seed < 600; ++seed) {
            const int d = 1 + static_cast<int>(seed % 3);
            innovations::innovation_spec spec{
                innovations::distribution::gaussian, d,
                d == 1 ? innovations::embedding::scalar
                       : innovations::embedding::isotropic};
            auto m = testing::random_lower(12, seed);
            auto z = innovations::sample_innovations(spec, 12, seed, 0);
            auto path = build_path(m, z, 12);
            auto comps = prefix_decomposition(m, z, 12);
            for (index_t j = 1; j <= 12; ++j)
                for (int c = 0; c < d; ++c) {
                    neumaier_sum acc;
                    for (const auto& comp : comps)
                        acc.add(comp[static_cast<std::size_t>((j - 1) * d + c)]);
                    REQUIRE(acc.value() ==
                            Approx(path.prefix_sum(j)[c]).margin(1e-10));
                }
        }
    }
    SECTION("zero matrix gives all-zero components") {
        auto z = innovations::sample_innovations(gaussian_scalar(), 5, 2, 0);
        for (const auto& comp :
             prefix_decomposition(testing::zero_matrix(5), z, 5))
            for (double v : comp) REQUIRE(v == 0.0);
    }
}

TEST_CASE("tail supremum estimates") {
    SECTION("offset 0 reduces to mc_expected_sup on the same streams") {
        auto m = rules::make_matrix("fgn0", 30);
        auto a = mc_expected_sup(m, gaussian_scalar(), 30, 400, 13);
        auto b = tail_sup_estimate(m, gaussian_scalar(), 0, 30, 400, 13);
        REQUIRE(a.mean == b.mean);
        REQUIRE(a.std_error == b.std_error);
    }
    SECTION("collinear geometric tail is deterministic under Rademacher") {
        auto m = rules::make_matrix("collinear:geometric", 64);
        auto e = tail_sup_estimate(m, rademacher_scalar(), 10, 10, 64, 0);
        const double expected = std::ldexp(1.0, -10) - std::ldexp(1.0, -20);
        REQUIRE(e.mean == Approx(expected).margin(1e-15));
        REQUIRE(e.std_error == 0.0);

        auto chk = verify_tail_bound(m, rademacher_scalar(), 10, 10, 64, 64, 0);
        REQUIRE(chk.status == check_status::pass);
        REQUIRE(chk.estimate.mean <= chk.tails.bound_rhs);
    }
    SECTION("exact tail matches the deterministic collinear oracle") {
        auto m = rules::make_matrix("collinear:geometric", 24);
        const double v = exact_tail_sup(m, 10, 10);
        REQUIRE(v == Approx(std::ldexp(1.0, -10) - std::ldexp(1.0, -20)).margin(1e-15));
    }
    SECTION("zero matrix tail check passes at zero") {
        auto chk = verify_tail_bound(testing::zero_matrix(16), rademacher_scalar(),
                                     4, 4, 16, 16, 0);
        REQUIRE(chk.estimate.mean == 0.0);
        REQUIRE(chk.tails.bound_rhs == 0.0);
        REQUIRE(chk.status == check_status::pass);
    }
}

TEST_CASE("thread count does not change Monte Carlo output") {
    auto m = rules::make_matrix("fgn0", 25);
    auto e1 = mc_expected_sup(m, gaussian_scalar(), 25, 2000, 99, 1);
    auto e4 = mc_expected_sup(m, gaussian_scalar(), 25, 2000, 99, 4);
    REQUIRE(e1.mean == e4.mean);
    REQUIRE(e1.std_error == e4.std_error);
}
