// SPDX-License-Identifier: Apache-2.0
//
// Independent symmetric unit-variance innovation sequences Z_n, their
// embedding into R^d, deterministic sign patterns, and the exhaustive
// Rademacher enumeration used as an exact-expectation oracle.
#ifndef HSL_INNOVATIONS_HPP
#define HSL_INNOVATIONS_HPP

#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "hsl/core.hpp"
#include "hsl/rng.hpp"

namespace hsl::innovations {

enum class distribution { rademacher, gaussian, uniform };
enum class embedding { scalar, axis_cycling, isotropic };

struct innovation_spec {
    distribution dist = distribution::rademacher;
    int dim = 1;
    embedding emb = embedding::scalar;

    void validate() const {
        if (dim < 1) throw std::invalid_argument("innovation dimension must be >= 1");
        if (emb == embedding::scalar && dim != 1)
            throw std::invalid_argument("scalar embedding requires dim = 1");
    }
};

inline const char* to_string(distribution d) {
    switch (d) {
        case distribution::rademacher: return "rademacher";
        case distribution::gaussian: return "gaussian";
        default: return "uniform";
    }
}

inline const char* to_string(embedding e) {
    switch (e) {
        case embedding::scalar: return "scalar";
        case embedding::axis_cycling: return "axis-cycling";
        default: return "isotropic";
    }
}

/// Non-random change of sign: exactly +-1 per index.
class sign_pattern {
  public:
    static sign_pattern all_plus(index_t n) {
        return sign_pattern(std::vector<double>(static_cast<std::size_t>(n), 1.0));
    }
    static sign_pattern all_minus(index_t n) {
        return sign_pattern(std::vector<double>(static_cast<std::size_t>(n), -1.0));
    }
    static sign_pattern from_list(std::vector<double> signs) {
        return sign_pattern(std::move(signs));
    }
    static sign_pattern from_rule(index_t n, const std::function<double(index_t)>& rule) {
        std::vector<double> s(static_cast<std::size_t>(n));
        for (index_t i = 1; i <= n; ++i) s[static_cast<std::size_t>(i - 1)] = rule(i);
        return sign_pattern(std::move(s));
    }

    double at(index_t n) const { return signs_.at(static_cast<std::size_t>(n - 1)); }
    index_t size() const { return static_cast<index_t>(signs_.size()); }
    const std::vector<double>& values() const { return signs_; }

  private:
    explicit sign_pattern(std::vector<double> s) : signs_(std::move(s)) {
        for (double v : signs_)
            if (v != 1.0 && v != -1.0)
                throw std::invalid_argument("sign pattern entries must be exactly +-1");
    }
    std::vector<double> signs_;
};

/// N innovation vectors in R^d, stored row-major.
struct innovation_block {
    int dim = 1;
    index_t count = 0;
    std::vector<double> data;

    std::span<const double> row(index_t n) const {
        return {data.data() + (n - 1) * dim, static_cast<std::size_t>(dim)};
    }
    double scalar(index_t n) const { return data[static_cast<std::size_t>(n - 1)]; }
};

inline double draw(stream_engine& eng, distribution d) {
    switch (d) {
        case distribution::rademacher: return eng.rademacher();
        case distribution::gaussian: return eng.gaussian();
        default: return eng.uniform_sym();
    }
}

/// Deterministic given (seed, stream); distinct streams are independent.
/// Reuses the block's storage, so hot Monte Carlo loops do not reallocate.
inline void sample_innovations_into(const innovation_spec& spec, index_t N,
                                    std::uint64_t seed, std::uint64_t stream,
                                    innovation_block& b) {
    spec.validate();
    if (N < 1) throw std::invalid_argument("sample count must be >= 1");
    b.dim = spec.dim;
    b.count = N;
    b.data.assign(static_cast<std::size_t>(N) * spec.dim, 0.0);
    stream_engine eng(seed, stream);
    switch (spec.emb) {
        case embedding::scalar:
            for (index_t n = 0; n < N; ++n)
                b.data[static_cast<std::size_t>(n)] = draw(eng, spec.dist);
            break;
        case embedding::axis_cycling:
            // Z_n = xi_n e_c with c = ((n-1) mod d) + 1.
            for (index_t n = 1; n <= N; ++n) {
                const index_t c = (n - 1) % spec.dim;
                b.data[static_cast<std::size_t>((n - 1) * spec.dim + c)] =
                    draw(eng, spec.dist);
            }
            break;
        case embedding::isotropic: {
            // i.i.d. coordinates scaled to variance 1/d, so E||Z||^2 = 1.
            const double scale = 1.0 / std::sqrt(static_cast<double>(spec.dim));
            for (std::size_t i = 0; i < b.data.size(); ++i)
                b.data[i] = scale * draw(eng, spec.dist);
            break;
        }
    }
}

inline innovation_block sample_innovations(const innovation_spec& spec, index_t N,
                                           std::uint64_t seed, std::uint64_t stream) {
    innovation_block b;
    sample_innovations_into(spec, N, seed, stream, b);
    return b;
}

// ---------------------------------------------------------------------------
// Exhaustive Rademacher enumeration (exact-expectation oracle).

/// Enumeration cap: default 20, overridable through HSL_ENUM_CAP, hard
/// ceiling 24 (16.7M outcomes).
inline index_t enumeration_cap() {
    if (const char* env = std::getenv("HSL_ENUM_CAP")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return std::min<index_t>(v, 24);
    }
    return 20;
}

/// Streams all 2^N sign tuples in code order; never materializes the set.
class rademacher_enumerator {
  public:
    explicit rademacher_enumerator(index_t n, index_t cap = enumeration_cap())
        : n_(n) {
        if (n < 1) throw std::invalid_argument("enumeration horizon must be >= 1");
        if (n > cap)
            throw std::invalid_argument("enumeration horizon N=" + std::to_string(n) +
                                        " exceeds cap " + std::to_string(cap));
        total_ = std::uint64_t{1} << n;
    }

    std::uint64_t count() const { return total_; }

    /// Fills `out` (size N) with the next tuple; false when exhausted.
    bool next(std::span<double> out) {
        if (code_ == total_) return false;
        for (index_t j = 0; j < n_; ++j)
            out[static_cast<std::size_t>(j)] = (code_ >> j) & 1u ? -1.0 : 1.0;
        ++code_;
        return true;
    }

  private:
    index_t n_;
    std::uint64_t code_ = 0;
    std::uint64_t total_ = 0;
};

template <class F>
void for_each_sign_tuple(index_t n, F&& f, index_t cap = enumeration_cap()) {
    rademacher_enumerator en(n, cap);
    std::vector<double> buf(static_cast<std::size_t>(n));
    while (en.next(buf)) f(std::span<const double>(buf));
}

}  // namespace hsl::innovations

#endif
