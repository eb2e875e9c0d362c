#ifndef LIPKIT_BLEND_HPP
#define LIPKIT_BLEND_HPP

#include "lipkit/extension.hpp"
#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"
#include "lipkit/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file blend.hpp
 *
 * @brief Blending local extensions through a partition of unity.
 *
 * Phi(x) = sum_n xi_n(x) Phi_n(x), where only pieces with xi_n(x) > 0 are evaluated.
 */

namespace lipkit {

struct BlendSpec {
    PartitionOfUnity partition;
    std::vector<EvaluableFunction> pieces;

    void validate() const {
        if (pieces.size() != partition.size()) {
            throw ArgumentError("BlendSpec.piece_count", std::to_string(pieces.size()) + " pieces for " +
                                                             std::to_string(partition.size()) + " cover sets");
        }
        for (std::size_t n = 0; n < pieces.size(); ++n) {
            if (!pieces[n]) throw ArgumentError("BlendSpec.piece", "piece " + std::to_string(n) + " is empty");
        }
    }
};

struct BlendEvaluation {
    double value = 0;
    /// Indices n with xi_n(p) > 0, increasing.
    std::vector<std::size_t> active;
    std::vector<double> piece_values;
    PartitionWeights weights;
};

/// Blend with piece n evaluated as piece(n, p); only pieces with xi_n(p) > 0 are called.
template <class PieceFn>
BlendEvaluation blend_with(const PartitionOfUnity& partition, PieceFn&& piece, const Point& p) {
    BlendEvaluation out;
    out.weights = partition.weights(p);
    for (std::size_t n = 0; n < out.weights.xi.size(); ++n) {
        if (out.weights.xi[n] > 0) {
            out.active.push_back(n);
            out.piece_values.push_back(piece(n, p));
        }
    }
    const bool agree = std::all_of(out.piece_values.begin(), out.piece_values.end(),
                                   [&](double v) { return v == out.piece_values.front(); });
    if (agree) {
        out.value = out.piece_values.front();
    } else {
        double sum = 0;
        for (std::size_t i = 0; i < out.active.size(); ++i) sum += out.weights.xi[out.active[i]] * out.piece_values[i];
        // A convex combination; clamping only removes rounding drift past the extreme pieces.
        const auto [lo, hi] = std::minmax_element(out.piece_values.begin(), out.piece_values.end());
        out.value = std::clamp(sum, *lo, *hi);
    }
    return out;
}

inline BlendEvaluation blend_eval_detailed(const BlendSpec& spec, const Point& p) {
    return blend_with(spec.partition, [&](std::size_t n, const Point& q) { return spec.pieces[n](q); }, p);
}

inline double blend_eval(const BlendSpec& spec, const Point& p) { return blend_eval_detailed(spec, p).value; }

inline EvaluableFunction make_blend(BlendSpec spec) {
    spec.validate();
    auto shared = std::make_shared<const BlendSpec>(std::move(spec));
    return [shared](const Point& p) { return blend_eval(*shared, p); };
}

/// How a full cover of X is derived from anchor subsets U_n when none is supplied.
enum class CoverInflation {
    /// O_n = X \ (A \ U_n): covers X, exact complement distance.
    complement,
    /// O_n = union of balls O(a, d(a, A \ U_n) / 2) over a in U_n (whole space when A \ U_n is empty).
    balls,
};

struct LocalExtensionOptions {
    ExtensionMode piece_mode = ExtensionMode::maximal;
    CoverInflation inflation = CoverInflation::complement;
    PartitionOptions partition{};
};

/// Full cover with O_n intersected with A equal to U_n.
inline Cover inflate_subdomain_cover(const AnchoredFunction& source,
                                     const std::vector<std::vector<std::size_t>>& subsets,
                                     CoverInflation inflation = CoverInflation::complement) {
    const auto& dom = source.domain();
    std::vector<CoverSet> sets;
    sets.reserve(subsets.size());
    for (const auto& u : subsets) {
        std::vector<bool> in(source.size(), false);
        for (auto i : u) in.at(i) = true;
        std::vector<Point> rest;
        for (std::size_t a = 0; a < source.size(); ++a) {
            if (!in[a]) rest.push_back(source.anchor(a));
        }
        if (rest.empty()) {
            sets.push_back(whole_space());
        } else if (inflation == CoverInflation::complement) {
            sets.push_back(point_complement(std::move(rest)));
        } else {
            std::vector<Ball> balls;
            for (auto i : u) balls.emplace_back(source.anchor(i), distance_to_set(dom, source.anchor(i), rest) / 2);
            sets.push_back(ball_union(std::move(balls)));
        }
    }
    std::vector<Point> samples = dom.is_explicit() ? std::vector<Point>{} : source.anchors();
    return Cover(dom, std::move(sets), std::move(samples));
}

/**
 * @brief Locally Lipschitz extension of phi from a cover {U_n} of the anchors on whose members phi is Lipschitz.
 *
 * Each piece is a constant-lambda McShane-Whitney extension of phi restricted to U_n, with lambda the
 * exact pairwise constant there; the pieces are blended through the partition of a full cover {O_n}.
 */
class LocalExtension {
public:
    LocalExtension(const AnchoredFunction& source, std::vector<std::vector<std::size_t>> subsets,
                   std::optional<Cover> full_cover = std::nullopt, LocalExtensionOptions options = {})
        : source_(source), subsets_(std::move(subsets)) {
        if (subsets_.empty()) throw ArgumentError("LocalExtension.subsets_nonempty", "no anchor subsets given");
        std::vector<bool> seen(source_.size(), false);
        for (std::size_t n = 0; n < subsets_.size(); ++n) {
            auto& u = subsets_[n];
            if (u.empty()) {
                throw ArgumentError("LocalExtension.subset_nonempty", "piece " + std::to_string(n) + " has no anchors");
            }
            std::sort(u.begin(), u.end());
            u.erase(std::unique(u.begin(), u.end()), u.end());
            for (auto i : u) {
                if (i >= source_.size()) {
                    throw ArgumentError("LocalExtension.subset_index", "piece " + std::to_string(n) + ": anchor " +
                                                                           std::to_string(i) + " out of range");
                }
                seen[i] = true;
            }
        }
        for (std::size_t a = 0; a < seen.size(); ++a) {
            if (!seen[a]) {
                throw ArgumentError("LocalExtension.covers_anchors",
                                    "anchor " + std::to_string(a) + " (" + source_.anchor(a).to_string() +
                                        ") lies in no subset");
            }
        }

        Cover cover = full_cover ? std::move(*full_cover) : inflate_subdomain_cover(source_, subsets_, options.inflation);
        if (cover.size() != subsets_.size()) {
            throw ArgumentError("LocalExtension.cover_size", std::to_string(cover.size()) + " cover sets for " +
                                                                 std::to_string(subsets_.size()) + " subsets");
        }
        for (std::size_t n = 0; n < subsets_.size(); ++n) {
            for (std::size_t a = 0; a < source_.size(); ++a) {
                const bool in_u = std::binary_search(subsets_[n].begin(), subsets_[n].end(), a);
                if (cover.contains(n, source_.anchor(a)) != in_u) {
                    throw ArgumentError("LocalExtension.trace",
                                        "cover set " + std::to_string(n) + (in_u ? " misses" : " contains") +
                                            " anchor " + source_.anchor(a).to_string() +
                                            "; O_n must meet the anchors exactly in U_n");
                }
            }
        }

        std::vector<EvaluableFunction> pieces;
        pieces.reserve(subsets_.size());
        for (std::size_t n = 0; n < subsets_.size(); ++n) {
            auto piece_source = source_.restrict_to(subsets_[n]);
            try {
                auto ext = std::make_shared<const Extension>(
                    ExtensionSpec{piece_source, options.piece_mode, LambdaPolicy::automatic()});
                lambdas_.push_back(ext->lambda());
                pieces.push_back([ext](const Point& p) { return (*ext)(p); });
            } catch (const Error& e) {
                throw ArgumentError(e.invariant(), "piece " + std::to_string(n) + ": " + e.what());
            }
        }
        spec_ = std::make_shared<const BlendSpec>(
            BlendSpec{PartitionOfUnity(std::move(cover), options.partition), std::move(pieces)});
        spec_->validate();
    }

    double operator()(const Point& p) const { return blend_eval(*spec_, p); }
    BlendEvaluation detailed(const Point& p) const { return blend_eval_detailed(*spec_, p); }

    const AnchoredFunction& source() const noexcept { return source_; }
    const std::vector<std::vector<std::size_t>>& subsets() const noexcept { return subsets_; }
    const BlendSpec& blend() const noexcept { return *spec_; }
    /// Resolved constant of each piece.
    const std::vector<double>& lambdas() const noexcept { return lambdas_; }

    EvaluableFunction as_function() const {
        auto spec = spec_;
        return [spec](const Point& p) { return blend_eval(*spec, p); };
    }

private:
    AnchoredFunction source_;
    std::vector<std::vector<std::size_t>> subsets_;
    std::vector<double> lambdas_;
    std::shared_ptr<const BlendSpec> spec_;
};

/// The single-subset cover {A}.
inline std::vector<std::vector<std::size_t>> whole_anchor_subset(const AnchoredFunction& source) {
    std::vector<std::size_t> all(source.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return {all};
}

inline EvaluableFunction extend_locally_lipschitz(const AnchoredFunction& source,
                                                  std::vector<std::vector<std::size_t>> subsets,
                                                  std::optional<Cover> full_cover = std::nullopt,
                                                  LocalExtensionOptions options = {}) {
    return LocalExtension(source, std::move(subsets), std::move(full_cover), options).as_function();
}

/**
 * @brief eta = d(., X \ U) / (d(., A) + d(., X \ U)): 1 on A, 0 off U.
 *
 * d(., X \ U) is measured as in `Region::complement_distance`; band sets use `samples`.
 */
class Clamp {
public:
    Clamp(MetricDomain domain, CoverSet set, std::vector<Point> anchors, std::span<const Point> samples = {})
        : anchors_(std::move(anchors)), region_(std::move(domain), std::move(set), samples) {
        if (anchors_.empty()) throw ArgumentError("Clamp.anchors_nonempty", "anchor set is empty");
        for (const auto& a : anchors_) {
            region_.domain().validate(a);
            if (!region_.contains(a)) {
                throw InconsistencyError("Clamp.anchors_inside", "anchor " + a.to_string() + " is not in U");
            }
        }
    }

    double operator()(const Point& p) const {
        if (region_.whole()) return 1.0;
        const double dU = region_.complement_distance(p);
        const double dA = distance_to_set(region_.domain(), p, anchors_);
        if (dU == 0) {
            if (dA == 0) throw InconsistencyError("Clamp.denominator", p.to_string() + " is an anchor outside U");
            return 0.0;
        }
        if (dA == 0 || std::isinf(dU)) return 1.0;
        return dU / (dA + dU);
    }

    const Region& region() const noexcept { return region_; }
    const std::vector<Point>& anchors() const noexcept { return anchors_; }

private:
    std::vector<Point> anchors_;
    Region region_;
};

inline double clamp_function(const MetricDomain& domain, const CoverSet& set, std::span<const Point> anchors,
                             const Point& p) {
    return Clamp(domain, set, std::vector<Point>(anchors.begin(), anchors.end()))(p);
}

/**
 * @brief eta * Psi with Psi a locally Lipschitz extension of phi and eta the clamp of U = {|Psi| < M}.
 *
 * Values lie strictly inside (-M, M). On a continuum, U is measured at the anchors and the probe points.
 */
class RangeBoundedExtension {
public:
    RangeBoundedExtension(const AnchoredFunction& source, double bound,
                          std::vector<std::vector<std::size_t>> subsets = {}, std::optional<Cover> full_cover = std::nullopt,
                          std::vector<Point> probes = {}, LocalExtensionOptions options = {})
        : bound_(bound) {
        if (!(bound > 0) || !std::isfinite(bound)) {
            throw ArgumentError("extend_range_bounded.bound_positive", "M = " + format_double(bound));
        }
        for (std::size_t a = 0; a < source.size(); ++a) {
            if (!(std::abs(source.value(a)) < bound)) {
                throw ArgumentError("extend_range_bounded.bound", "|phi| = " + format_double(std::abs(source.value(a))) +
                                                                      " at anchor " + source.anchor(a).to_string() +
                                                                      " is not below M = " + format_double(bound));
            }
        }
        if (subsets.empty()) subsets = whole_anchor_subset(source);
        psi_ = std::make_shared<const LocalExtension>(source, std::move(subsets), std::move(full_cover), options);
        auto psi = psi_;
        const auto& dom = source.domain();
        std::vector<Point> samples;
        if (!dom.is_explicit() || !probes.empty()) {
            samples = source.anchors();
            for (auto& q : probes) {
                dom.validate(q);
                samples.push_back(std::move(q));
            }
        }
        clamp_ = std::make_shared<const Clamp>(
            dom, band_set([psi](const Point& p) { return (*psi)(p); }, -bound, bound), source.anchors(), samples);
    }

    double operator()(const Point& p) const {
        const double eta = (*clamp_)(p);
        if (eta == 0) return 0.0;
        const double v = (*psi_)(p);
        return eta == 1 ? v : eta * v;
    }

    double bound() const noexcept { return bound_; }
    const LocalExtension& inner() const noexcept { return *psi_; }
    const Clamp& clamp() const noexcept { return *clamp_; }

private:
    double bound_;
    std::shared_ptr<const LocalExtension> psi_;
    std::shared_ptr<const Clamp> clamp_;
};

inline EvaluableFunction extend_range_bounded(const AnchoredFunction& source, double bound,
                                              std::vector<std::vector<std::size_t>> subsets = {},
                                              std::optional<Cover> full_cover = std::nullopt,
                                              std::vector<Point> probes = {}) {
    auto ext = std::make_shared<const RangeBoundedExtension>(source, bound, std::move(subsets), std::move(full_cover),
                                                             std::move(probes));
    return [ext](const Point& p) { return (*ext)(p); };
}

/// Locally Lipschitz extension of an arbitrary real phi: arctan, range-bounded extension with M = pi/2, tan.
class LocallyLipschitzExtension {
public:
    explicit LocallyLipschitzExtension(const AnchoredFunction& source, std::vector<std::vector<std::size_t>> subsets = {},
                                       std::optional<Cover> full_cover = std::nullopt, std::vector<Point> probes = {})
        : inner_(source.with_values(compress(source.values())), std::numbers::pi / 2, std::move(subsets),
                 std::move(full_cover), std::move(probes)) {}

    double operator()(const Point& p) const { return decompress(inner_(p)); }
    const RangeBoundedExtension& inner() const noexcept { return inner_; }

private:
    RangeBoundedExtension inner_;
};

} // namespace lipkit

#endif
