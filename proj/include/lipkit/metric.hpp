#ifndef LIPKIT_METRIC_HPP
#define LIPKIT_METRIC_HPP

#include "lipkit/error.hpp"
#include "lipkit/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

/**
 * @file metric.hpp
 *
 * @brief Metric domains, points, anchor sets and distances.
 *
 * Every other module obtains distances exclusively through `MetricDomain::distance()`.
 */

namespace lipkit {

/// Tolerance used when validating metric axioms.
inline constexpr double metric_tolerance = 1e-12;

/**
 * @brief A point of a metric domain.
 *
 * Either an index into an explicit finite domain or a coordinate vector of a Euclidean continuum.
 */
class Point {
public:
    static Point at(std::size_t index) { return Point(index); }
    static Point coords(std::vector<double> c) { return Point(std::move(c)); }
    static Point on_line(double x) { return Point(std::vector<double>{x}); }

    bool is_index() const noexcept { return std::holds_alternative<std::size_t>(data_); }

    std::size_t index() const { return std::get<std::size_t>(data_); }

    std::span<const double> coords() const { return std::get<std::vector<double>>(data_); }

    /// First coordinate, or the index for explicit points. Used as the abscissa of plot data.
    double abscissa() const {
        if (is_index()) return static_cast<double>(index());
        auto c = coords();
        return c.empty() ? 0.0 : c.front();
    }

    std::string to_string() const {
        if (is_index()) return "#" + std::to_string(index());
        std::string out = "(";
        auto c = coords();
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) out += ",";
            out += format_double(c[i]);
        }
        return out + ")";
    }

    friend bool operator==(const Point&, const Point&) = default;

private:
    explicit Point(std::size_t index) : data_(index) {}
    explicit Point(std::vector<double> c) : data_(std::move(c)) {}

    std::variant<std::size_t, std::vector<double>> data_;
};

/// Convenience: points on the real line.
inline std::vector<Point> line_points(std::span<const double> xs) {
    std::vector<Point> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(Point::on_line(x));
    return out;
}

inline std::vector<Point> line_points(std::initializer_list<double> xs) {
    return line_points(std::span<const double>(xs.begin(), xs.size()));
}

/// Points with the given indices of an explicit domain.
inline std::vector<Point> index_points(std::size_t n) {
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(Point::at(i));
    return out;
}

/// Monotone transform applied to the base distance.
enum class Transform {
    identity,
    bounded ///< t -> t / (1 + t), an equivalent metric bounded by 1
};

inline double apply_transform(Transform t, double base) {
    return t == Transform::bounded ? base / (1.0 + base) : base;
}

/// A failed metric axiom found by `validate_metric()`.
struct MetricViolation {
    enum class Kind { non_finite, negative, nonzero_diagonal, asymmetry, indiscernible, triangle };
    Kind kind;
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t k = 0; ///< Only meaningful for `triangle`: d(i,k) > d(i,j) + d(j,k).

    std::string to_string() const {
        auto ij = "(" + std::to_string(i) + "," + std::to_string(j);
        switch (kind) {
        case Kind::non_finite: return "non-finite entry at " + ij + ")";
        case Kind::negative: return "negative entry at " + ij + ")";
        case Kind::nonzero_diagonal: return "nonzero diagonal at " + ij + ")";
        case Kind::asymmetry: return "asymmetry at " + ij + ")";
        case Kind::indiscernible: return "zero distance between distinct points " + ij + ")";
        case Kind::triangle: return "triangle inequality violated at " + ij + "," + std::to_string(k) + ")";
        }
        return "unknown";
    }

    friend bool operator==(const MetricViolation&, const MetricViolation&) = default;
};

/**
 * Checks the metric axioms on a square matrix with tolerance `metric_tolerance`.
 * Triples are scanned exhaustively in (i, j, k) order.
 *
 * @return Empty when the matrix is a metric.
 * @throws ArgumentError when the matrix is not square.
 */
inline std::vector<MetricViolation> validate_metric(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) {
            throw ArgumentError("MetricDomain.square_matrix",
                                "row " + std::to_string(i) + " has " + std::to_string(m[i].size()) +
                                    " entries, expected " + std::to_string(n));
        }
    }

    using K = MetricViolation::Kind;
    std::vector<MetricViolation> out;
    bool entries_ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = m[i][j];
            if (!std::isfinite(v)) {
                out.push_back({K::non_finite, i, j});
                entries_ok = false;
            } else if (v < 0) {
                out.push_back({K::negative, i, j});
                entries_ok = false;
            } else if (i == j && v > metric_tolerance) {
                out.push_back({K::nonzero_diagonal, i, j});
            } else if (i < j && std::abs(v - m[j][i]) > metric_tolerance) {
                out.push_back({K::asymmetry, i, j});
            } else if (i < j && v <= metric_tolerance) {
                out.push_back({K::indiscernible, i, j});
            }
        }
    }
    if (!entries_ok) return out;

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                if (m[i][k] > m[i][j] + m[j][k] + metric_tolerance) out.push_back({K::triangle, i, j, k});
            }
        }
    }
    return out;
}

/**
 * @brief The sole source of distances.
 *
 * Either an explicit finite space (validated distance matrix) or a Euclidean continuum of fixed dimension.
 * Both kinds accept the bounded transform t -> t/(1+t). Copies share the immutable matrix.
 */
class MetricDomain {
public:
    static MetricDomain euclidean(std::size_t dimension, Transform transform = Transform::identity) {
        if (dimension == 0) throw ArgumentError("MetricDomain.dimension", "euclidean dimension must be positive");
        MetricDomain d;
        d.dimension_ = dimension;
        d.transform_ = transform;
        return d;
    }

    /// @throws ArgumentError naming the first violated axiom.
    static MetricDomain explicit_matrix(const std::vector<std::vector<double>>& matrix,
                                        std::vector<std::string> labels = {},
                                        Transform transform = Transform::identity) {
        if (matrix.empty()) throw ArgumentError("MetricDomain.nonempty", "explicit matrix has no points");
        auto violations = validate_metric(matrix);
        if (!violations.empty()) {
            throw ArgumentError("MetricDomain.metric_axioms",
                                violations.front().to_string() + " (" + std::to_string(violations.size()) +
                                    " violation(s))");
        }
        const std::size_t n = matrix.size();
        if (labels.empty()) {
            labels.reserve(n);
            for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
        } else if (labels.size() != n) {
            throw ArgumentError("MetricDomain.labels", "expected " + std::to_string(n) + " labels, got " +
                                                           std::to_string(labels.size()));
        }
        auto data = std::make_shared<ExplicitData>();
        data->n = n;
        data->labels = std::move(labels);
        data->matrix.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) data->matrix[i * n + j] = i == j ? 0.0 : matrix[i][j];
        }
        MetricDomain d;
        d.explicit_ = std::move(data);
        d.transform_ = transform;
        return d;
    }

    /// Points 0..n-1 of the real line as an explicit domain (handy for fixtures).
    static MetricDomain line_indices(std::span<const double> xs, Transform transform = Transform::identity) {
        std::vector<std::vector<double>> m(xs.size(), std::vector<double>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = 0; j < xs.size(); ++j) m[i][j] = std::abs(xs[i] - xs[j]);
        }
        return explicit_matrix(m, {}, transform);
    }

    bool is_explicit() const noexcept { return explicit_ != nullptr; }
    Transform transform() const noexcept { return transform_; }

    /// Euclidean dimension; 0 for explicit domains.
    std::size_t dimension() const noexcept { return dimension_; }

    /// Number of points of an explicit domain.
    std::size_t size() const {
        require_explicit("size");
        return explicit_->n;
    }

    const std::vector<std::string>& labels() const {
        require_explicit("labels");
        return explicit_->labels;
    }

    /// All points of an explicit domain, in index order.
    std::vector<Point> points() const {
        require_explicit("points");
        return index_points(explicit_->n);
    }

    /// @throws DomainError when `p` does not belong to this domain.
    void validate(const Point& p) const {
        if (is_explicit()) {
            if (!p.is_index()) {
                throw DomainError("Point.kind", "coordinate point " + p.to_string() + " used with an explicit domain");
            }
            if (p.index() >= explicit_->n) {
                throw DomainError("Point.index_in_bounds", "index " + std::to_string(p.index()) +
                                                               " out of range for " + std::to_string(explicit_->n) +
                                                               " points");
            }
        } else {
            if (p.is_index()) {
                throw DomainError("Point.kind", "index point " + p.to_string() + " used with a euclidean domain");
            }
            if (p.coords().size() != dimension_) {
                throw DomainError("Point.dimension", "point " + p.to_string() + " has " +
                                                         std::to_string(p.coords().size()) +
                                                         " coordinates, domain dimension is " +
                                                         std::to_string(dimension_));
            }
            for (double c : p.coords()) {
                if (!std::isfinite(c)) throw DomainError("Point.finite", "point " + p.to_string() + " is not finite");
            }
        }
    }

    double distance(const Point& p, const Point& q) const {
        validate(p);
        validate(q);
        return unchecked_distance(p, q);
    }

    /// Distance for points already known to be valid.
    double unchecked_distance(const Point& p, const Point& q) const {
        double base;
        if (explicit_) {
            base = explicit_->matrix[p.index() * explicit_->n + q.index()];
        } else {
            auto a = p.coords();
            auto b = q.coords();
            if (dimension_ == 1) {
                base = std::abs(a[0] - b[0]);
            } else {
                double s = 0;
                for (std::size_t i = 0; i < dimension_; ++i) {
                    double t = a[i] - b[i];
                    s += t * t;
                }
                base = std::sqrt(s);
            }
        }
        return apply_transform(transform_, base);
    }

private:
    struct ExplicitData {
        std::size_t n = 0;
        std::vector<double> matrix;
        std::vector<std::string> labels;
    };

    MetricDomain() = default;

    void require_explicit(const char* what) const {
        if (!explicit_) {
            throw UnsupportedDomainError("MetricDomain.explicit", std::string(what) + " requires an explicit domain");
        }
    }

    std::shared_ptr<const ExplicitData> explicit_;
    std::size_t dimension_ = 0;
    Transform transform_ = Transform::identity;
};

inline double distance(const MetricDomain& domain, const Point& p, const Point& q) {
    return domain.distance(p, q);
}

/// min over s in `set` of d(p, s); 1-Lipschitz in p.
inline double distance_to_set(const MetricDomain& domain, const Point& p, std::span<const Point> set) {
    if (set.empty()) throw ArgumentError("distance_to_set.nonempty", "distance to an empty set");
    domain.validate(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : set) {
        domain.validate(s);
        best = std::min(best, domain.unchecked_distance(p, s));
    }
    return best;
}

/// Open ball O(center, radius).
struct Ball {
    Point center;
    double radius;

    Ball(Point c, double r) : center(std::move(c)), radius(r) {
        if (!(radius > 0) || std::isnan(radius)) {
            throw ArgumentError("Ball.radius_positive", "radius " + format_double(radius) + " is not positive");
        }
    }

    bool contains(const MetricDomain& domain, const Point& p) const {
        return domain.unchecked_distance(center, p) < radius;
    }
};

/**
 * @brief Anchor points with real values and optional per-anchor Lipschitz constants.
 *
 * This is the partial function phi : A -> R that every construction starts from.
 * Anchors are pairwise distinct; duplicates are rejected, not merged.
 */
class AnchoredFunction {
public:
    AnchoredFunction(MetricDomain domain, std::vector<Point> anchors, std::vector<double> values,
                     std::optional<std::vector<double>> constants = std::nullopt)
        : data_(build(Data{std::move(domain), std::move(anchors), std::move(values), std::move(constants), {}})) {}

    /// Values on the real line at the given abscissae.
    static AnchoredFunction on_line(std::span<const double> xs, std::span<const double> values,
                                    Transform t = Transform::identity) {
        return AnchoredFunction(MetricDomain::euclidean(1, t), line_points(xs),
                                std::vector<double>(values.begin(), values.end()));
    }

    static AnchoredFunction on_line(std::initializer_list<double> xs, std::initializer_list<double> values) {
        return on_line(std::span<const double>(xs.begin(), xs.size()),
                       std::span<const double>(values.begin(), values.size()));
    }

    /// One value per point of an explicit domain.
    static AnchoredFunction on_all_points(MetricDomain domain, std::vector<double> values) {
        auto pts = domain.points();
        return AnchoredFunction(std::move(domain), std::move(pts), std::move(values));
    }

    const MetricDomain& domain() const noexcept { return data_->domain; }
    const std::vector<Point>& anchors() const noexcept { return data_->anchors; }
    const std::vector<double>& values() const noexcept { return data_->values; }
    const std::optional<std::vector<double>>& constants() const noexcept { return data_->constants; }
    std::size_t size() const noexcept { return data_->anchors.size(); }
    const Point& anchor(std::size_t i) const { return data_->anchors.at(i); }
    double value(std::size_t i) const { return data_->values.at(i); }

    /// Index of the anchor coinciding with `p`, if any. O(log n).
    std::optional<std::size_t> find(const Point& p) const {
        const auto& order = data_->order;
        auto it = std::lower_bound(order.begin(), order.end(), p,
                                   [this](std::size_t i, const Point& q) { return less(anchor(i), q); });
        if (it != order.end() && anchor(*it) == p) return *it;
        return std::nullopt;
    }

    /// phi(p) for an anchor point; throws DomainError elsewhere.
    double at(const Point& p) const {
        auto i = find(p);
        if (!i) throw DomainError("AnchoredFunction.defined_on_anchors", p.to_string() + " is not an anchor");
        return value(*i);
    }

    /// Same anchors, different values (constants dropped).
    AnchoredFunction with_values(std::vector<double> values) const {
        return AnchoredFunction(domain(), anchors(), std::move(values));
    }

    AnchoredFunction with_constants(std::vector<double> constants) const {
        return AnchoredFunction(domain(), anchors(), values(), std::move(constants));
    }

    /// Restriction to the anchors with the given indices.
    AnchoredFunction restrict_to(std::span<const std::size_t> indices) const {
        std::vector<Point> a;
        std::vector<double> v;
        std::optional<std::vector<double>> c;
        if (constants()) c.emplace();
        for (auto i : indices) {
            if (i >= size()) {
                throw ArgumentError("AnchoredFunction.restrict", "anchor index " + std::to_string(i) + " out of range");
            }
            a.push_back(anchor(i));
            v.push_back(value(i));
            if (c) c->push_back((*constants())[i]);
        }
        return AnchoredFunction(domain(), std::move(a), std::move(v), std::move(c));
    }

private:
    struct Data {
        MetricDomain domain;
        std::vector<Point> anchors;
        std::vector<double> values;
        std::optional<std::vector<double>> constants;
        std::vector<std::size_t> order; // anchors sorted by less()
    };

    static bool less(const Point& a, const Point& b) {
        if (a.is_index() != b.is_index()) return a.is_index();
        if (a.is_index()) return a.index() < b.index();
        auto x = a.coords();
        auto y = b.coords();
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    }

    static std::shared_ptr<const Data> build(Data d) {
        if (d.anchors.empty()) throw ArgumentError("AnchoredFunction.nonempty", "no anchors");
        if (d.values.size() != d.anchors.size()) {
            throw ArgumentError("AnchoredFunction.values_length", std::to_string(d.values.size()) + " values for " +
                                                                      std::to_string(d.anchors.size()) + " anchors");
        }
        for (std::size_t i = 0; i < d.anchors.size(); ++i) {
            d.domain.validate(d.anchors[i]);
            if (!std::isfinite(d.values[i])) {
                throw ArgumentError("AnchoredFunction.finite_values", "value at anchor " + std::to_string(i) +
                                                                          " is " + format_double(d.values[i]));
            }
        }
        if (d.constants) {
            if (d.constants->size() != d.anchors.size()) {
                throw ArgumentError("AnchoredFunction.constants_length",
                                    std::to_string(d.constants->size()) + " constants for " +
                                        std::to_string(d.anchors.size()) + " anchors");
            }
            for (std::size_t i = 0; i < d.constants->size(); ++i) {
                double c = (*d.constants)[i];
                if (!(c >= 0) || !std::isfinite(c)) {
                    throw ArgumentError("AnchoredFunction.constants_nonnegative",
                                        "constant at anchor " + std::to_string(i) + " is " + format_double(c));
                }
            }
        }
        d.order.resize(d.anchors.size());
        std::iota(d.order.begin(), d.order.end(), std::size_t{0});
        std::sort(d.order.begin(), d.order.end(),
                  [&](std::size_t i, std::size_t j) { return less(d.anchors[i], d.anchors[j]); });
        // Distinct coordinates (or indices) are distinct points: explicit matrices are validated
        // to have positive off-diagonal entries and the euclidean metric is definite.
        for (std::size_t t = 1; t < d.order.size(); ++t) {
            if (d.anchors[d.order[t - 1]] == d.anchors[d.order[t]]) {
                auto [i, j] = std::minmax(d.order[t - 1], d.order[t]);
                throw ArgumentError("AnchoredFunction.distinct_anchors",
                                    "anchors " + std::to_string(i) + " and " + std::to_string(j) + " coincide at " +
                                        d.anchors[i].to_string());
            }
        }
        return std::make_shared<const Data>(std::move(d));
    }

    std::shared_ptr<const Data> data_;
};

} // namespace lipkit

#endif
