#ifndef LIPKIT_PARTITION_HPP
#define LIPKIT_PARTITION_HPP

#include "lipkit/extension.hpp"
#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

/**
 * @file partition.hpp
 *
 * @brief Finite open covers and their locally Lipschitz partitions of unity.
 *
 * For a cover O_1, ..., O_m (list order is the enumeration) the partition is built from
 *
 *     eta_n   = min{ d(x, X \ O_n), 2^-n }
 *     eta     = sum_n eta_n / 2^n
 *     gamma_n = max{ eta_n - eta / 2, 0 }
 *     xi_k    = gamma_k / sum_n gamma_n
 *
 * If some O_n is the whole space, the first such set gets xi_n = 1 and every other member vanishes.
 */

namespace lipkit {

/// The whole space.
struct WholeSpace {};

/// Union of open balls.
struct BallUnion {
    std::vector<Ball> balls;
};

/// Explicit list of point indices (explicit domains only).
struct IndexSubset {
    std::vector<std::size_t> indices;
};

/// { x : lower < carrier(x) < upper }. Covers sublevel sets {phi > -k}, preimages {|phi - r| < eps}, ...
struct LevelBand {
    EvaluableFunction carrier;
    double lower;
    double upper;
};

/// X minus finitely many points. Open, and d(x, complement) is exact on every domain kind.
struct PointComplement {
    std::vector<Point> removed;
};

using CoverSet = std::variant<WholeSpace, BallUnion, IndexSubset, LevelBand, PointComplement>;

inline CoverSet whole_space() { return WholeSpace{}; }
inline CoverSet ball_set(Point center, double radius) { return BallUnion{{Ball(std::move(center), radius)}}; }
inline CoverSet ball_union(std::vector<Ball> balls) { return BallUnion{std::move(balls)}; }
inline CoverSet subset_set(std::vector<std::size_t> indices) { return IndexSubset{std::move(indices)}; }
inline CoverSet point_complement(std::vector<Point> removed) { return PointComplement{std::move(removed)}; }

/// { x : carrier(x) > -k }
inline CoverSet sublevel_set(EvaluableFunction carrier, double k) {
    return LevelBand{std::move(carrier), -k, std::numeric_limits<double>::infinity()};
}

/// { x : |carrier(x) - center| < radius }
inline CoverSet preimage_set(EvaluableFunction carrier, double center, double radius) {
    return LevelBand{std::move(carrier), center - radius, center + radius};
}

inline CoverSet band_set(EvaluableFunction carrier, double lower, double upper) {
    return LevelBand{std::move(carrier), lower, upper};
}

/// Weight 2^-n of the set at 0-based list position `index`.
inline double position_weight(std::size_t index) { return std::ldexp(1.0, -static_cast<int>(index + 1)); }

/**
 * @brief One open set together with the data needed to measure d(x, X \ O).
 *
 * - explicit domains: exact distance to the complement (band sets: complement within the sample list);
 * - balls on a continuum: the surrogate max{r - d(x,c), 0}, 1-Lipschitz and positive exactly on the ball;
 * - band sets on a continuum: distance to the sample points outside the band;
 * - point complements: exact on both kinds.
 */
class Region {
public:
    Region(MetricDomain domain, CoverSet set, std::span<const Point> samples)
        : domain_(std::move(domain)), set_(std::move(set)) {
        if (auto* s = std::get_if<IndexSubset>(&set_)) {
            if (!domain_.is_explicit()) {
                throw UnsupportedDomainError("Cover.subset_explicit", "index subsets need an explicit domain");
            }
            std::sort(s->indices.begin(), s->indices.end());
            s->indices.erase(std::unique(s->indices.begin(), s->indices.end()), s->indices.end());
            for (auto i : s->indices) domain_.validate(Point::at(i));
        } else if (auto* b = std::get_if<BallUnion>(&set_)) {
            for (const auto& ball : b->balls) domain_.validate(ball.center);
        } else if (auto* l = std::get_if<LevelBand>(&set_)) {
            if (!l->carrier) throw ArgumentError("Cover.carrier", "level set without a carrier function");
        } else if (auto* c = std::get_if<PointComplement>(&set_)) {
            for (const auto& q : c->removed) domain_.validate(q);
        }

        const bool band = std::holds_alternative<LevelBand>(set_);
        if (domain_.is_explicit() && !(band && !samples.empty())) {
            for (std::size_t i = 0; i < domain_.size(); ++i) {
                Point p = Point::at(i);
                if (!contains(p)) outside_.push_back(std::move(p));
            }
            exact_ = true;
        } else if (band) {
            for (const auto& s : samples) {
                if (!contains(s)) outside_.push_back(s);
            }
            // Sample-based: never treated as the whole space, even when every sample is inside.
            exact_ = false;
        }
        if (const auto* c = std::get_if<PointComplement>(&set_)) {
            outside_ = c->removed;
            exact_ = true;
        }
        whole_ = std::holds_alternative<WholeSpace>(set_) || (exact_ && outside_.empty());
    }

    const MetricDomain& domain() const noexcept { return domain_; }
    const CoverSet& set() const noexcept { return set_; }

    /// True when the set provably equals the whole space.
    bool whole() const noexcept { return whole_; }

    bool contains(const Point& p) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, WholeSpace>) {
                    return true;
                } else if constexpr (std::is_same_v<T, BallUnion>) {
                    return std::any_of(s.balls.begin(), s.balls.end(),
                                       [&](const Ball& b) { return b.contains(domain_, p); });
                } else if constexpr (std::is_same_v<T, IndexSubset>) {
                    return std::binary_search(s.indices.begin(), s.indices.end(), p.index());
                } else if constexpr (std::is_same_v<T, PointComplement>) {
                    return std::none_of(s.removed.begin(), s.removed.end(),
                                        [&](const Point& q) { return domain_.unchecked_distance(p, q) == 0; });
                } else {
                    const double v = s.carrier(p);
                    return s.lower < v && v < s.upper;
                }
            },
            set_);
    }

    /// d(p, X \ O), or its documented surrogate; 0 outside the set, +inf when the complement is empty.
    double complement_distance(const Point& p) const {
        domain_.validate(p);
        if (!contains(p)) return 0.0;
        if (std::holds_alternative<WholeSpace>(set_)) return std::numeric_limits<double>::infinity();
        if (!domain_.is_explicit()) {
            if (const auto* b = std::get_if<BallUnion>(&set_)) {
                double m = 0;
                for (const auto& ball : b->balls) {
                    m = std::max(m, ball.radius - domain_.unchecked_distance(ball.center, p));
                }
                return m;
            }
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : outside_) best = std::min(best, domain_.unchecked_distance(p, q));
        return best;
    }

private:
    MetricDomain domain_;
    CoverSet set_;
    std::vector<Point> outside_;
    bool exact_ = false;
    bool whole_ = false;
};

/**
 * @brief An ordered finite open cover.
 *
 * The cover property is validated at the sample points (all points of an explicit domain when no
 * samples are given). Queries outside every set raise `UncoveredPointError` at evaluation.
 */
class Cover {
public:
    /// Position weights 2^-n are computed in long double; this keeps 2^-2n in range.
    static constexpr std::size_t max_sets = 4000;

    Cover(MetricDomain domain, std::vector<CoverSet> sets, std::vector<Point> samples = {})
        : domain_(std::move(domain)), samples_(std::move(samples)) {
        if (sets.empty()) throw ArgumentError("Cover.nonempty", "cover has no sets");
        if (sets.size() > max_sets) {
            throw ArgumentError("Cover.size_limit", std::to_string(sets.size()) + " sets exceed the limit of " +
                                                        std::to_string(max_sets));
        }
        for (const auto& s : samples_) domain_.validate(s);
        regions_.reserve(sets.size());
        for (auto& s : sets) regions_.emplace_back(domain_, std::move(s), samples_);

        const auto check = domain_.is_explicit() && samples_.empty() ? domain_.points() : samples_;
        for (const auto& p : check) {
            if (!covered(p)) {
                throw UncoveredPointError("Cover.covers_samples", "no set contains " + p.to_string(), p.to_string());
            }
        }
    }

    const MetricDomain& domain() const noexcept { return domain_; }
    const std::vector<Point>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return regions_.size(); }
    const Region& region(std::size_t n) const { return regions_.at(n); }

    bool contains(std::size_t n, const Point& p) const { return region(n).contains(p); }

    bool covered(const Point& p) const {
        return std::any_of(regions_.begin(), regions_.end(), [&](const Region& r) { return r.contains(p); });
    }

    /// First set equal to the whole space, if any.
    std::optional<std::size_t> first_whole() const {
        for (std::size_t n = 0; n < regions_.size(); ++n) {
            if (regions_[n].whole()) return n;
        }
        return std::nullopt;
    }

private:
    MetricDomain domain_;
    std::vector<Point> samples_;
    std::vector<Region> regions_;
};

/// eta_n(p) = min{ d(p, X \ O_n), 2^-n } for the set at 0-based position `index`.
inline double membership_margin(const Cover& cover, std::size_t index, const Point& p) {
    if (index >= cover.size()) {
        throw ArgumentError("membership_margin.index", "set index " + std::to_string(index) + " out of range for " +
                                                           std::to_string(cover.size()) + " sets");
    }
    return std::min(cover.region(index).complement_distance(p), position_weight(index));
}

/// Least k >= 1 with eta > 2^-k.
inline int vanish_index_for(long double eta) {
    if (!(eta > 0)) {
        throw ArgumentError("vanish_index.eta_positive", "eta = " + format_double(static_cast<double>(eta)));
    }
    int k = 1;
    while (!(eta > std::ldexp(1.0L, -k))) ++k;
    return k;
}

struct PartitionOptions {
    /// Use xi_n = 1 for the first set equal to the whole space.
    bool trivial_reduction = true;
};

/// All intermediate quantities of the partition at one point.
struct PartitionWeights {
    std::vector<double> eta_n;
    std::vector<double> gamma_n;
    std::vector<double> xi;
    double eta = 0;
    int vanish_index = 0;
    std::optional<std::size_t> trivial;
};

/**
 * @brief Locally finite index-subordinated partition of unity of a `Cover`.
 *
 * Immutable after construction; `weights()` may be called concurrently.
 */
class PartitionOfUnity {
public:
    explicit PartitionOfUnity(Cover cover, PartitionOptions options = {})
        : cover_(std::move(cover)), trivial_(options.trivial_reduction ? cover_.first_whole() : std::nullopt) {}

    const Cover& cover() const noexcept { return cover_; }
    std::size_t size() const noexcept { return cover_.size(); }
    std::optional<std::size_t> trivial_index() const noexcept { return trivial_; }

    /// @throws UncoveredPointError when p lies in no set.
    PartitionWeights weights(const Point& p) const {
        const std::size_t m = cover_.size();
        PartitionWeights w;
        w.eta_n.resize(m);
        w.gamma_n.assign(m, 0.0);
        w.xi.assign(m, 0.0);
        w.trivial = trivial_;
        // Extended precision: products 2^-n * 2^-n leave the double range for long covers.
        std::vector<long double> eta_n(m);
        std::vector<long double> gamma_n(m);
        long double eta = 0;
        for (std::size_t n = 0; n < m; ++n) {
            const long double weight = std::ldexp(1.0L, -static_cast<int>(n + 1));
            eta_n[n] = std::min<long double>(cover_.region(n).complement_distance(p), weight);
            eta += eta_n[n] * weight;
        }
        if (!(eta > 0)) {
            throw UncoveredPointError("PartitionOfUnity.covered", "no set contains " + p.to_string(), p.to_string());
        }
        long double total = 0;
        for (std::size_t n = 0; n < m; ++n) {
            gamma_n[n] = std::max(eta_n[n] - eta / 2, 0.0L);
            total += gamma_n[n];
        }
        w.eta = static_cast<double>(eta);
        for (std::size_t n = 0; n < m; ++n) {
            w.eta_n[n] = static_cast<double>(eta_n[n]);
            w.gamma_n[n] = static_cast<double>(gamma_n[n]);
        }
        if (trivial_) {
            w.xi[*trivial_] = 1.0;
        } else {
            for (std::size_t n = 0; n < m; ++n) w.xi[n] = static_cast<double>(gamma_n[n] / total);
        }
        w.vanish_index = vanish_index_for(eta);
        return w;
    }

    double xi(std::size_t k, const Point& p) const { return weights(p).xi.at(k); }

    EvaluableFunction member(std::size_t k) const {
        if (k >= size()) throw ArgumentError("PartitionOfUnity.member", "index out of range");
        auto self = std::make_shared<const PartitionOfUnity>(*this);
        return [self, k](const Point& p) { return self->xi(k, p); };
    }

    /// Least k with eta(p) > 2^-k; every gamma_n with n > k vanishes at p.
    int vanish_index(const Point& p) const { return weights(p).vanish_index; }

private:
    Cover cover_;
    std::optional<std::size_t> trivial_;
};

inline PartitionOfUnity build_partition(Cover cover, PartitionOptions options = {}) {
    return PartitionOfUnity(std::move(cover), options);
}

inline int vanish_index(const PartitionOfUnity& partition, const Point& p) { return partition.vanish_index(p); }

/**
 * U_1, ..., U_{n_max} with U_n the union of the balls O(a, delta_a) over anchors with K_a <= n.
 * Levels may be empty; the sequence is increasing.
 */
inline std::vector<std::vector<Ball>> increasing_lipschitz_cover(const AnchoredFunction& source,
                                                                 std::span<const double> constants,
                                                                 std::span<const double> deltas, int n_max) {
    if (constants.size() != source.size() || deltas.size() != source.size()) {
        throw ArgumentError("increasing_lipschitz_cover.estimates",
                            "need one constant and one radius per anchor (" + std::to_string(source.size()) +
                                " anchors, " + std::to_string(constants.size()) + " constants, " +
                                std::to_string(deltas.size()) + " radii)");
    }
    std::vector<std::vector<Ball>> levels(static_cast<std::size_t>(std::max(n_max, 0)));
    for (int n = 1; n <= n_max; ++n) {
        for (std::size_t a = 0; a < source.size(); ++a) {
            if (constants[a] <= n) levels[n - 1].emplace_back(source.anchor(a), deltas[a]);
        }
    }
    return levels;
}

inline std::vector<std::vector<Ball>> increasing_lipschitz_cover(const AnchoredFunction& source,
                                                                 std::span<const PointwiseConstantEstimate> estimates,
                                                                 int n_max) {
    std::vector<double> k;
    std::vector<double> d;
    for (const auto& e : estimates) {
        k.push_back(e.K);
        d.push_back(e.delta);
    }
    return increasing_lipschitz_cover(source, k, d, n_max);
}

/// Indices of the anchors lying in a union of balls.
inline std::vector<std::size_t> anchors_in(const AnchoredFunction& source, std::span<const Ball> balls) {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < source.size(); ++a) {
        if (std::any_of(balls.begin(), balls.end(),
                        [&](const Ball& b) { return b.contains(source.domain(), source.anchor(a)); })) {
            out.push_back(a);
        }
    }
    return out;
}

} // namespace lipkit

#endif
