#ifndef LIPKIT_EXTENSION_HPP
#define LIPKIT_EXTENSION_HPP

#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file extension.hpp
 *
 * @brief McShane-Whitney extensions with a constant or per-anchor Lipschitz constants.
 *
 * For anchors A and constants lambda_a,
 *
 *     minimal(p) = max_a [phi(a) - lambda_a d(a,p)]
 *     maximal(p) = min_a [phi(a) + lambda_a d(a,p)]
 *
 * With a single constant these are the smallest and the largest lambda-Lipschitz extensions.
 * With per-anchor constants they still agree with phi on A and satisfy minimal <= maximal, but no
 * global Lipschitz bound is claimed.
 */

namespace lipkit {

/// Relative slack allowed in admissibility checks: |dphi| <= lambda d (1 + tol) + tol.
inline constexpr double admissibility_tolerance = 1e-12;

enum class ExtensionMode { minimal, maximal, midpoint, bounded_range };

/// How the Lipschitz constant(s) of an extension are chosen.
struct LambdaPolicy {
    enum class Kind { constant, auto_constant, per_anchor, auto_per_anchor };
    Kind kind = Kind::auto_constant;
    double value = 0; ///< only for `constant`

    static LambdaPolicy constant(double v) { return {Kind::constant, v}; }
    /// Exact pairwise constant max |phi(a)-phi(b)| / d(a,b).
    static LambdaPolicy automatic() { return {Kind::auto_constant, 0}; }
    /// The source's own per-anchor constants.
    static LambdaPolicy per_anchor() { return {Kind::per_anchor, 0}; }
    /// Per-anchor constants from `estimate_anchor_constants()`.
    static LambdaPolicy automatic_per_anchor() { return {Kind::auto_per_anchor, 0}; }

    bool uniform() const noexcept { return kind == Kind::constant || kind == Kind::auto_constant; }
};

struct ExtensionSpec {
    AnchoredFunction source;
    ExtensionMode mode = ExtensionMode::midpoint;
    LambdaPolicy lambda = LambdaPolicy::automatic();
    /// M such that |phi| < M on the anchors; required by `bounded_range`.
    std::optional<double> bound = std::nullopt;
};

/// Exact Lipschitz constant of phi on its anchors (0 for a single anchor).
inline double pairwise_constant(const AnchoredFunction& source) {
    const auto& dom = source.domain();
    double best = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        for (std::size_t j = i + 1; j < source.size(); ++j) {
            double r = std::abs(source.value(i) - source.value(j)) /
                       dom.unchecked_distance(source.anchor(i), source.anchor(j));
            best = std::max(best, r);
        }
    }
    return best;
}

/// K_a = max_{b != a} |phi(a)-phi(b)| / d(a,b): the smallest constants that are admissible per anchor.
inline std::vector<double> estimate_anchor_constants(const AnchoredFunction& source) {
    const auto& dom = source.domain();
    std::vector<double> k(source.size(), 0.0);
    for (std::size_t i = 0; i < source.size(); ++i) {
        for (std::size_t j = i + 1; j < source.size(); ++j) {
            double r = std::abs(source.value(i) - source.value(j)) /
                       dom.unchecked_distance(source.anchor(i), source.anchor(j));
            k[i] = std::max(k[i], r);
            k[j] = std::max(k[j], r);
        }
    }
    return k;
}

/**
 * @brief Local slope L on a locality ball together with the derived global constant at its center.
 *
 * `L` is the Lipschitz constant of phi on the anchors of O(a, 2 delta); with oscillation M,
 * K = max(L, M / delta) bounds |phi(x) - phi(z)| <= K d(x,z) for every anchor x and every anchor z of O(a, delta).
 */
struct PointwiseConstantEstimate {
    double L;
    double delta;
    double oscillation;
    double K;
};

inline std::vector<PointwiseConstantEstimate> estimate_pointwise_constants(const AnchoredFunction& source,
                                                                           std::span<const double> deltas) {
    if (deltas.size() != source.size()) {
        throw ArgumentError("PointwiseConstantEstimate.delta_count", std::to_string(deltas.size()) +
                                                                         " radii for " + std::to_string(source.size()) +
                                                                         " anchors");
    }
    const auto& dom = source.domain();
    const auto [lo, hi] = std::minmax_element(source.values().begin(), source.values().end());
    const double osc = *hi - *lo;
    std::vector<PointwiseConstantEstimate> out;
    out.reserve(source.size());
    for (std::size_t a = 0; a < source.size(); ++a) {
        const double delta = deltas[a];
        if (!(delta > 0)) {
            throw ArgumentError("PointwiseConstantEstimate.delta_positive", "delta = " + format_double(delta));
        }
        std::vector<std::size_t> near;
        for (std::size_t b = 0; b < source.size(); ++b) {
            if (dom.unchecked_distance(source.anchor(a), source.anchor(b)) < 2 * delta) near.push_back(b);
        }
        double L = 0;
        for (std::size_t s = 0; s < near.size(); ++s) {
            for (std::size_t t = s + 1; t < near.size(); ++t) {
                L = std::max(L, std::abs(source.value(near[s]) - source.value(near[t])) /
                                    dom.unchecked_distance(source.anchor(near[s]), source.anchor(near[t])));
            }
        }
        out.push_back({L, delta, osc, std::max(L, osc / delta)});
    }
    return out;
}

/**
 * @brief A resolved McShane-Whitney extension.
 *
 * Construction resolves the lambda policy and checks admissibility for every anchor pair
 * (|phi(a)-phi(b)| <= min(lambda_a, lambda_b) d(a,b)); evaluation is then a plain anchor scan.
 */
class Extension {
public:
    explicit Extension(ExtensionSpec spec) : spec_(std::move(spec)) {
        const auto& src = spec_.source;
        switch (spec_.lambda.kind) {
        case LambdaPolicy::Kind::constant:
            if (!(spec_.lambda.value >= 0) || !std::isfinite(spec_.lambda.value)) {
                throw ArgumentError("ExtensionSpec.lambda_nonnegative", "lambda = " + format_double(spec_.lambda.value));
            }
            lambdas_.assign(src.size(), spec_.lambda.value);
            break;
        case LambdaPolicy::Kind::auto_constant:
            lambdas_.assign(src.size(), pairwise_constant(src));
            break;
        case LambdaPolicy::Kind::per_anchor:
            if (!src.constants()) {
                throw ArgumentError("ExtensionSpec.per_anchor_constants", "source carries no per-anchor constants");
            }
            lambdas_ = *src.constants();
            break;
        case LambdaPolicy::Kind::auto_per_anchor:
            lambdas_ = estimate_anchor_constants(src);
            break;
        }
        check_admissible();

        if (spec_.mode == ExtensionMode::bounded_range && !spec_.bound) {
            throw ArgumentError("ExtensionSpec.bound_required", "bounded_range mode needs a bound M");
        }
        if (spec_.bound) {
            const double M = *spec_.bound;
            if (!(M > 0)) throw ArgumentError("ExtensionSpec.bound_positive", "M = " + format_double(M));
            for (std::size_t i = 0; i < src.size(); ++i) {
                if (!(std::abs(src.value(i)) < M)) {
                    throw ArgumentError("ExtensionSpec.bound", "|phi| = " + format_double(std::abs(src.value(i))) +
                                                                   " at anchor " + std::to_string(i) +
                                                                   " is not below M = " + format_double(M));
                }
            }
        }
    }

    const ExtensionSpec& spec() const noexcept { return spec_; }
    const AnchoredFunction& source() const noexcept { return spec_.source; }
    std::span<const double> lambdas() const noexcept { return lambdas_; }
    bool uniform() const noexcept { return spec_.lambda.uniform(); }

    /// The single constant of a uniform extension.
    double lambda() const { return lambdas_.front(); }

    /// Phi_-(p) = sup_a [phi(a) - lambda_a d(a,p)].
    double minimal(const Point& p) const {
        const auto& src = spec_.source;
        src.domain().validate(p);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < src.size(); ++i) {
            double d = src.domain().unchecked_distance(src.anchor(i), p);
            if (d == 0) return src.value(i);
            best = std::max(best, src.value(i) - lambdas_[i] * d);
        }
        return best;
    }

    /// Phi_+(p) = inf_a [phi(a) + lambda_a d(a,p)].
    double maximal(const Point& p) const {
        const auto& src = spec_.source;
        src.domain().validate(p);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < src.size(); ++i) {
            double d = src.domain().unchecked_distance(src.anchor(i), p);
            if (d == 0) return src.value(i);
            best = std::min(best, src.value(i) + lambdas_[i] * d);
        }
        return best;
    }

    double midpoint(const Point& p) const { return (minimal(p) + maximal(p)) / 2; }

    /// (Phi_- + Phi_+) / (2 + d(p, A)); strictly inside (-M, M).
    double bounded(const Point& p) const {
        if (!spec_.bound) throw ArgumentError("ExtensionSpec.bound_required", "bounded_range needs a bound M");
        const double lo = minimal(p);
        const double hi = maximal(p);
        const double dA = distance_to_set(spec_.source.domain(), p, spec_.source.anchors());
        return (lo + hi) / (2.0 + dA);
    }

    /// Value in ExtensionSpec::mode.
    double operator()(const Point& p) const {
        switch (spec_.mode) {
        case ExtensionMode::minimal: return minimal(p);
        case ExtensionMode::maximal: return maximal(p);
        case ExtensionMode::midpoint: return midpoint(p);
        case ExtensionMode::bounded_range: return bounded(p);
        }
        return midpoint(p);
    }

private:
    void check_admissible() const {
        const auto& src = spec_.source;
        const auto& dom = src.domain();
        for (std::size_t i = 0; i < src.size(); ++i) {
            for (std::size_t j = i + 1; j < src.size(); ++j) {
                const double d = dom.unchecked_distance(src.anchor(i), src.anchor(j));
                const double lam = std::min(lambdas_[i], lambdas_[j]);
                const double diff = std::abs(src.value(i) - src.value(j));
                if (diff > lam * d * (1 + admissibility_tolerance) + admissibility_tolerance) {
                    throw AdmissibilityError("ExtensionSpec.lambda_admissible",
                                             "|phi(" + std::to_string(i) + ") - phi(" + std::to_string(j) +
                                                 ")| = " + format_double(diff) + " exceeds lambda*d = " +
                                                 format_double(lam * d),
                                             i, j);
                }
            }
        }
    }

    ExtensionSpec spec_;
    std::vector<double> lambdas_;
};

inline double mw_minimal(const Extension& ext, const Point& p) { return ext.minimal(p); }
inline double mw_maximal(const Extension& ext, const Point& p) { return ext.maximal(p); }

inline double bounded_range_extension(const Extension& ext, const Point& p) { return ext.bounded(p); }

inline EvaluableFunction make_extension(ExtensionSpec spec) {
    Extension ext(std::move(spec));
    return [ext = std::move(ext)](const Point& p) { return ext(p); };
}

/// arctan of every value; maps R into (-pi/2, pi/2) and is 1-Lipschitz.
inline std::vector<double> compress(std::span<const double> values) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](double v) { return std::atan(v); });
    return out;
}

inline double decompress(double v) {
    if (!(std::abs(v) < std::numbers::pi / 2)) {
        throw RangeError("decompress.open_interval", format_double(v) + " is not inside (-pi/2, pi/2)");
    }
    return std::tan(v);
}

inline std::vector<double> decompress(std::span<const double> values) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](double v) { return decompress(v); });
    return out;
}

/**
 * @brief Extension of an arbitrary real-valued phi through arctan, a bounded-range extension with M = pi/2, and tan.
 *
 * Constants for the compressed values default to `estimate_anchor_constants()`. Since arctan is
 * 1-Lipschitz, constants carried by the source stay admissible and may be used with `per_anchor`.
 */
class UnboundedExtension {
public:
    explicit UnboundedExtension(const AnchoredFunction& source,
                                LambdaPolicy lambda = LambdaPolicy::automatic_per_anchor())
        : inner_(ExtensionSpec{AnchoredFunction(source.domain(), source.anchors(), compress(source.values()),
                                                source.constants()),
                               ExtensionMode::bounded_range, lambda, std::numbers::pi / 2}) {}

    double operator()(const Point& p) const { return decompress(inner_.bounded(p)); }

    const Extension& inner() const noexcept { return inner_; }

private:
    Extension inner_;
};

inline double extend_unbounded(const AnchoredFunction& source, const Point& p) {
    return UnboundedExtension(source)(p);
}

} // namespace lipkit

#endif
