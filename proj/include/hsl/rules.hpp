// SPDX-License-Identifier: Apache-2.0
//
// Named catalogs shared by the CLI and the tests.  Arbitrary expression
// parsing is deliberately out of scope: a fixed catalog keeps rule
// evaluation pure and, for predictable rules, keeps predictability
// enforceable rather than promised.
//
// Matrix rules:   fgn0 | fgn:H=<h> | power:alpha=<a> |
//                 diag:<law> | collinear:<law>       (hyphen aliases accepted)
// Entry laws:     ones | geometric (2^-n) | harmonic (1/n) | invsq (1/n^2)
// Weight rules:   unit | geometric (||u||^2 = 2^-n) | harmonic (||u|| = 1/n)
//                 | invsq (||u|| = 1/n^2), axis-cycling over --dim
// Predictable:    zero | sign:<law> | clamp:<law> | constant:<matrix rule>
#ifndef HSL_RULES_HPP
#define HSL_RULES_HPP

#include <cmath>
#include <string>
#include <string_view>

#include "hsl/adaptive.hpp"
#include "hsl/coeffs.hpp"
#include "hsl/covfactor.hpp"
#include "hsl/io.hpp"

namespace hsl::rules {

using coeffs::coefficient_matrix;
using coeffs::vector_weights;

enum class entry_law { ones, geometric, harmonic, invsq };

inline entry_law parse_law(std::string_view name) {
    if (name == "ones") return entry_law::ones;
    if (name == "geometric") return entry_law::geometric;
    if (name == "harmonic") return entry_law::harmonic;
    if (name == "invsq") return entry_law::invsq;
    throw std::invalid_argument("unknown entry law '" + std::string(name) +
                                "' (ones|geometric|harmonic|invsq)");
}

inline double law_value(entry_law law, index_t n) {
    switch (law) {
        case entry_law::ones: return 1.0;
        case entry_law::geometric: return std::ldexp(1.0, static_cast<int>(-n));
        case entry_law::harmonic: return 1.0 / static_cast<double>(n);
        default: return 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    }
}

namespace detail {

inline double parse_param(std::string_view spec, std::string_view prefix) {
    const std::string s(spec.substr(prefix.size()));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw std::invalid_argument("malformed rule parameter in '" +
                                    std::string(spec) + "'");
    return v;
}

// accept both "diag:geometric" and "diag-geometric"
inline bool split_named(std::string_view spec, std::string_view head,
                        std::string_view& tail) {
    for (char sep : {':', '-'}) {
        if (spec.size() > head.size() + 1 && spec.substr(0, head.size()) == head &&
            spec[head.size()] == sep) {
            tail = spec.substr(head.size() + 1);
            return true;
        }
    }
    return false;
}

// criterion tail bounds for the collinear laws (sum_{n>N} of the law)
inline std::function<double(index_t)> collinear_tail(entry_law law) {
    switch (law) {
        case entry_law::geometric:
            return [](index_t n) { return std::ldexp(1.0, static_cast<int>(-n)); };
        case entry_law::invsq:
            return [](index_t n) { return 1.0 / static_cast<double>(n); };
        default:  // harmonic and ones tails diverge
            return [](index_t) { return std::numeric_limits<double>::infinity(); };
    }
}

}  // namespace detail

inline coefficient_matrix<double> make_matrix(std::string_view spec, index_t order) {
    if (spec == "fgn0") return covfactor::fgn0_coefficients(order);
    if (spec.rfind("fgn:H=", 0) == 0) {
        const double h = detail::parse_param(spec, "fgn:H=");
        return covfactor::cholesky_lower(covfactor::covariance_spec::fgn(h, order));
    }
    if (spec.rfind("power:alpha=", 0) == 0)
        return coeffs::power_decay_matrix(detail::parse_param(spec, "power:alpha="),
                                          order);
    std::string_view law_name;
    if (detail::split_named(spec, "diag", law_name)) {
        const entry_law law = parse_law(law_name);
        coefficient_matrix<double> m(
            [law](index_t n, index_t k) {
                return k == n ? law_value(law, n) : 0.0;
            },
            order, {coeffs::support_kind::diagonal, 0});
        // only d_1 is nonzero, so the criterion tail past N >= 1 vanishes
        m.set_criterion_tail_bound([](index_t) { return 0.0; });
        return m;
    }
    if (detail::split_named(spec, "collinear", law_name)) {
        const entry_law law = parse_law(law_name);
        coefficient_matrix<double> m(
            [law](index_t n, index_t k) {
                return k == 1 ? law_value(law, n) : 0.0;
            },
            order, {coeffs::support_kind::collinear, 0});
        m.set_criterion_tail_bound(detail::collinear_tail(law));
        return m;
    }
    throw std::invalid_argument("unknown matrix rule '" + std::string(spec) + "'");
}

/// File path when the argument names an existing file (or contains a path
/// separator), otherwise a catalog rule.
inline io::any_matrix resolve_matrix(const std::string& spec, index_t order) {
    const bool looks_like_path =
        spec.find('/') != std::string::npos || spec.find(".trimat") != std::string::npos;
    if (looks_like_path || std::ifstream(spec).good())
        return io::load_trimat_file(spec);
    return make_matrix(spec, order);
}

inline vector_weights make_weights(std::string_view spec, index_t order, int dim = 1) {
    if (dim < 1) throw std::invalid_argument("weight dimension must be >= 1");
    std::function<double(index_t)> norm_of;
    if (spec == "unit") {
        norm_of = [](index_t) { return 1.0; };
    } else if (spec == "geometric") {
        // ||u_n||^2 = 2^-n
        norm_of = [](index_t n) {
            return std::sqrt(std::ldexp(1.0, static_cast<int>(-n)));
        };
    } else if (spec == "harmonic") {
        norm_of = [](index_t n) { return 1.0 / static_cast<double>(n); };
    } else if (spec == "invsq") {
        norm_of = [](index_t n) {
            return 1.0 / (static_cast<double>(n) * static_cast<double>(n));
        };
    } else {
        throw std::invalid_argument("unknown weight rule '" + std::string(spec) +
                                    "' (unit|geometric|harmonic|invsq)");
    }
    // u_n = w_n e_c, axis-cycling as in the innovation embedding
    return vector_weights::from_rule(
        dim, order, [norm_of, dim](index_t n, std::span<double> out) {
            for (auto& c : out) c = 0.0;
            out[static_cast<std::size_t>((n - 1) % dim)] = norm_of(n);
        });
}

inline vector_weights resolve_weights(const std::string& spec, index_t order,
                                      int dim = 1) {
    const bool looks_like_path =
        spec.find('/') != std::string::npos || spec.find(".vecw") != std::string::npos;
    if (looks_like_path || std::ifstream(spec).good())
        return io::load_weights_file(spec);
    return make_weights(spec, order, dim);
}

// ---------------------------------------------------------------------------
// Predictable-rule catalog.

inline adaptive::predictable_rule make_predictable(std::string_view spec,
                                                   index_t order) {
    adaptive::predictable_rule r;
    r.truncation_order = order;
    std::string_view law_name;
    if (spec == "zero") {
        r.coeff = [](index_t, index_t, std::span<const double>) { return 0.0; };
        r.envelope = [](index_t, index_t) { return 0.0; };
        r.second_moment = [](index_t, index_t) { return 0.0; };
        return r;
    }
    if (detail::split_named(spec, "sign", law_name)) {
        // a(n,k) = sign(Z_{k-1}) w_n (first column w_n); |a| = w_n surely,
        // so the exact second moment is declared
        const entry_law law = parse_law(law_name);
        r.coeff = [law](index_t n, index_t k, std::span<const double> hist) {
            const double w = law_value(law, n);
            if (k == 1) return w;
            return hist[static_cast<std::size_t>(k - 2)] < 0.0 ? -w : w;
        };
        r.envelope = [law](index_t n, index_t) { return law_value(law, n); };
        r.second_moment = [law](index_t n, index_t) {
            const double w = law_value(law, n);
            return w * w;
        };
        return r;
    }
    if (detail::split_named(spec, "clamp", law_name)) {
        // a(n,k) = clamp(Z_{k-1}, -1, 1) w_n; the exact moment depends on
        // the innovation law, so only the envelope is declared
        const entry_law law = parse_law(law_name);
        r.coeff = [law](index_t n, index_t k, std::span<const double> hist) {
            const double w = law_value(law, n);
            if (k == 1) return w;
            const double z = hist[static_cast<std::size_t>(k - 2)];
            return std::clamp(z, -1.0, 1.0) * w;
        };
        r.envelope = [law](index_t n, index_t) { return law_value(law, n); };
        return r;
    }
    if (detail::split_named(spec, "constant", law_name)) {
        auto resolved = resolve_matrix(std::string(law_name), order);
        if (!std::holds_alternative<coefficient_matrix<double>>(resolved))
            throw std::invalid_argument("constant rules require a real matrix");
        return adaptive::constant_rule(
            std::get<coefficient_matrix<double>>(std::move(resolved)));
    }
    throw std::invalid_argument("unknown predictable rule '" + std::string(spec) +
                                "' (zero|sign:<law>|clamp:<law>|constant:<matrix>)");
}

// ---------------------------------------------------------------------------
// Grid parsing.

/// "lo:hi:count" -> inclusive linspace with `count` points (count >= 1).
inline std::vector<double> parse_r_grid(std::string_view spec) {
    const auto c1 = spec.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
        throw std::invalid_argument("grid must be 'lo:hi:count'");
    const auto num = [&](std::string_view s) {
        const std::string str(s);
        char* end = nullptr;
        const double v = std::strtod(str.c_str(), &end);
        if (end != str.c_str() + str.size())
            throw std::invalid_argument("malformed grid number '" + str + "'");
        return v;
    };
    const double lo = num(spec.substr(0, c1));
    const double hi = num(spec.substr(c1 + 1, c2 - c1 - 1));
    const auto count = static_cast<index_t>(num(spec.substr(c2 + 1)));
    if (count < 1) throw std::invalid_argument("grid count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (index_t i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
    return grid;
}

/// "m:j" -> segment pair.
inline std::pair<index_t, index_t> parse_segment(std::string_view spec) {
    const auto c = spec.find(':');
    if (c == std::string_view::npos)
        throw std::invalid_argument("segment must be 'm:j'");
    const auto num = [&](std::string_view s) {
        const std::string str(s);
        char* end = nullptr;
        const long v = std::strtol(str.c_str(), &end, 10);
        if (end != str.c_str() + str.size())
            throw std::invalid_argument("malformed segment index '" + str + "'");
        return static_cast<index_t>(v);
    };
    return {num(spec.substr(0, c)), num(spec.substr(c + 1))};
}

}  // namespace hsl::rules

#endif
