// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hsl;
using namespace hsl::innovations;

TEST_CASE("distribution support") {
    innovation_spec rad = testing::rademacher_scalar();
    auto b = sample_innovations(rad, 1000, 3, 0);
    for (double v : b.data) REQUIRE((v == 1.0 || v == -1.0));

    innovation_spec uni{distribution::uniform, 1, embedding::scalar};
    auto u = sample_innovations(uni, 1000, 3, 0);
    for (double v : u.data) {
        REQUIRE(v >= -testing::kSqrt3);
        REQUIRE(v <= testing::kSqrt3);
    }
}

TEST_CASE("axis-cycling embedding places mass on the cycling axis") {
    innovation_spec spec{distribution::gaussian, 3, embedding::axis_cycling};
    auto b = sample_innovations(spec, 8, 7, 0);
    const auto on_axis = [&](index_t n, int axis) {
        auto row = b.row(n);
        for (int c = 0; c < 3; ++c) {
            if (c == axis) {
                REQUIRE(row[c] != 0.0);
            } else {
                REQUIRE(row[c] == 0.0);
            }
        }
    };
    on_axis(1, 0);
    on_axis(2, 1);
    on_axis(3, 2);
    on_axis(4, 0);
}

TEST_CASE("reproducibility and stream independence") {
    innovation_spec g = testing::gaussian_scalar();
    auto a = sample_innovations(g, 256, 42, 5);
    auto b = sample_innovations(g, 256, 42, 5);
    REQUIRE(a.data == b.data);
    auto c = sample_innovations(g, 256, 42, 6);
    REQUIRE(a.data != c.data);
    auto d = sample_innovations(g, 256, 43, 5);
    REQUIRE(a.data != d.data);
}

TEST_CASE("symmetry and unit second moment across all spec combinations") {
    const std::uint64_t R = 1000000;
    for (auto dist : {distribution::rademacher, distribution::gaussian,
                      distribution::uniform}) {
        for (auto [emb, d] :
             {std::pair{embedding::scalar, 1}, {embedding::axis_cycling, 3},
              {embedding::isotropic, 3}}) {
            innovation_spec spec{dist, d, emb};
            auto b = sample_innovations(spec, static_cast<index_t>(R), 1, 0);
            std::vector<neumaier_sum> mean(static_cast<std::size_t>(d));
            neumaier_sum m2, m2sq;
            for (index_t n = 1; n <= static_cast<index_t>(R); ++n) {
                auto row = b.row(n);
                double ns = 0.0;
                for (int c = 0; c < d; ++c) {
                    mean[static_cast<std::size_t>(c)].add(row[c]);
                    ns += row[c] * row[c];
                }
                m2.add(ns);
                m2sq.add(ns * ns);
            }
            INFO("dist=" << to_string(dist) << " emb=" << to_string(emb));
            double mean_norm_sq = 0.0;
            for (int c = 0; c < d; ++c) {
                const double mv = mean[static_cast<std::size_t>(c)].value() / R;
                mean_norm_sq += mv * mv;
            }
            // E||Z||^2 = 1, so the mean estimator has SE 1/sqrt(R)
            REQUIRE(std::sqrt(mean_norm_sq) < 3.0 / std::sqrt(double(R)));
            const double m2m = m2.value() / R;
            const double var =
                std::max(0.0, (m2sq.value() / R - m2m * m2m)) * R / (R - 1.0);
            const double se = std::sqrt(var / R);
            REQUIRE(std::abs(m2m - 1.0) <= 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("spec validation") {
    innovation_spec bad{distribution::gaussian, 2, embedding::scalar};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    innovation_spec bad2{distribution::gaussian, 0, embedding::isotropic};
    REQUIRE_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("sign patterns hold exactly +-1") {
    auto s = sign_pattern::from_list({1.0, -1.0, 1.0});
    REQUIRE(s.at(2) == -1.0);
    REQUIRE_THROWS_AS(sign_pattern::from_list({0.5}), std::invalid_argument);
    auto alt = sign_pattern::from_rule(4, [](index_t n) { return n % 2 ? 1.0 : -1.0; });
    REQUIRE(alt.values() == std::vector<double>{1.0, -1.0, 1.0, -1.0});
}

TEST_CASE("rademacher enumeration") {
    SECTION("N=1 yields (+1) then (-1)") {
        rademacher_enumerator en(1);
        std::vector<double> buf(1);
        REQUIRE(en.next(buf));
        REQUIRE(buf[0] == 1.0);
        REQUIRE(en.next(buf));
        REQUIRE(buf[0] == -1.0);
        REQUIRE_FALSE(en.next(buf));
    }
    SECTION("N=2 yields 4 distinct tuples") {
        std::vector<std::vector<double>> seen;
        for_each_sign_tuple(2, [&](std::span<const double> z) {
            seen.emplace_back(z.begin(), z.end());
        });
        REQUIRE(seen.size() == 4);
        for (const auto& t : seen)
            for (double v : t) REQUIRE((v == 1.0 || v == -1.0));
        std::sort(seen.begin(), seen.end());
        REQUIRE(std::unique(seen.begin(), seen.end()) == seen.end());
    }
    SECTION("N=24 streams all 16777216 tuples under an explicit cap") {
        rademacher_enumerator en(24, 24);
        std::vector<double> buf(24);
        std::uint64_t count = 0;
        while (en.next(buf)) ++count;
        REQUIRE(count == 16777216u);
    }
    SECTION("the cap refuses larger horizons by value") {
        try {
            rademacher_enumerator en(21, 20);
            FAIL("expected refusal");
        } catch (const std::invalid_argument& e) {
            REQUIRE(std::string(e.what()).find("cap 20") != std::string::npos);
        }
    }
    SECTION("HSL_ENUM_CAP overrides the default cap") {
        REQUIRE(enumeration_cap() == 20);
        setenv("HSL_ENUM_CAP", "8", 1);
        REQUIRE(enumeration_cap() == 8);
        setenv("HSL_ENUM_CAP", "99", 1);  // clamped to the hard ceiling
        REQUIRE(enumeration_cap() == 24);
        unsetenv("HSL_ENUM_CAP");
        REQUIRE(enumeration_cap() == 20);
    }
}
