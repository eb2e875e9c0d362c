#ifndef LIPKIT_APPROX_HPP
#define LIPKIT_APPROX_HPP

#include "lipkit/blend.hpp"
#include "lipkit/envelope.hpp"
#include "lipkit/extension.hpp"
#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"
#include "lipkit/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

/**
 * @file approx.hpp
 *
 * @brief Locally Lipschitz approximation: monotone, uniform, variable tolerance, insertion and small-scale.
 */

namespace lipkit {

/// A function known through an evaluator together with the points at which it is sampled.
struct SampledFunction {
    MetricDomain domain;
    std::vector<Point> samples;
    EvaluableFunction phi;

    static SampledFunction from_anchored(const AnchoredFunction& f) {
        return {f.domain(), f.anchors(), as_evaluable(f)};
    }

    static SampledFunction closed_form(MetricDomain domain, std::vector<Point> samples, EvaluableFunction phi) {
        return {std::move(domain), std::move(samples), std::move(phi)};
    }

    void validate() const {
        if (samples.empty()) throw ArgumentError("SampledFunction.samples_nonempty", "no sample points");
        if (!phi) throw ArgumentError("SampledFunction.evaluator", "no evaluator");
        for (const auto& s : samples) domain.validate(s);
    }

    std::vector<double> values() const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples) {
            const double v = phi(s);
            if (!std::isfinite(v)) {
                throw ArgumentError("SampledFunction.finite", "phi(" + s.to_string() + ") = " + format_double(v));
            }
            out.push_back(v);
        }
        return out;
    }

    /// Samples to hand to a `Cover`: none when they exhaust an explicit domain (exact distances apply).
    std::vector<Point> cover_samples() const {
        if (domain.is_explicit()) {
            std::vector<bool> hit(domain.size(), false);
            for (const auto& s : samples) hit[s.index()] = true;
            if (std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) return {};
        }
        return samples;
    }
};

/// Finite increasing list of levels standing in for the rationals.
struct LevelGrid {
    std::vector<double> levels;
    double spacing = 0;

    /// lo, lo + s, lo + 2s, ... up to the first level >= hi.
    static LevelGrid spanning(double lo, double hi, double spacing) {
        if (!(spacing > 0) || !std::isfinite(spacing)) {
            throw ArgumentError("LevelGrid.spacing_positive", "spacing = " + format_double(spacing));
        }
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
            throw ArgumentError("LevelGrid.range", "[" + format_double(lo) + ", " + format_double(hi) + "]");
        }
        const double steps = std::ceil((hi - lo) / spacing);
        if (steps + 1 > static_cast<double>(Cover::max_sets)) {
            throw ArgumentError("LevelGrid.size_limit", "grid would need " + format_double(steps + 1) + " levels");
        }
        LevelGrid g;
        g.spacing = spacing;
        for (std::size_t i = 0; i <= static_cast<std::size_t>(steps); ++i) g.levels.push_back(lo + spacing * i);
        return g;
    }

    /// Spacing eps/2 over [lo, hi]: every value of the range is within eps/4 of a level.
    static LevelGrid for_tolerance(double lo, double hi, double eps) { return spanning(lo, hi, eps / 2); }

    static LevelGrid from_levels(std::vector<double> levels) {
        LevelGrid g;
        g.levels = std::move(levels);
        for (std::size_t i = 1; i < g.levels.size(); ++i) g.spacing = std::max(g.spacing, g.levels[i] - g.levels[i - 1]);
        g.validate();
        return g;
    }

    void validate() const {
        if (levels.empty()) throw ArgumentError("LevelGrid.nonempty", "no levels");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!std::isfinite(levels[i])) throw ArgumentError("LevelGrid.finite", "level " + std::to_string(i));
            if (i > 0 && !(levels[i] > levels[i - 1])) {
                throw ArgumentError("LevelGrid.increasing", "level " + std::to_string(i) + " = " +
                                                                format_double(levels[i]) + " does not exceed its predecessor");
            }
        }
    }
};

/// A constant tolerance or a positive function eps(x).
class ToleranceField {
public:
    static ToleranceField constant(double eps) {
        if (!(eps > 0) || !std::isfinite(eps)) {
            throw ArgumentError("ToleranceField.positive", "eps = " + format_double(eps));
        }
        ToleranceField t;
        t.constant_ = eps;
        t.eval_ = [eps](const Point&) { return eps; };
        return t;
    }

    static ToleranceField function(EvaluableFunction eps) {
        if (!eps) throw ArgumentError("ToleranceField.evaluator", "no evaluator");
        ToleranceField t;
        t.eval_ = std::move(eps);
        return t;
    }

    static ToleranceField anchored(const AnchoredFunction& eps) { return function(as_evaluable(eps)); }

    bool is_constant() const noexcept { return constant_.has_value(); }
    std::optional<double> constant_value() const noexcept { return constant_; }
    const EvaluableFunction& evaluator() const noexcept { return eval_; }

    double operator()(const Point& p) const {
        const double v = eval_(p);
        if (!(v > 0) || !std::isfinite(v)) {
            throw ArgumentError("ToleranceField.positive", "eps(" + p.to_string() + ") = " + format_double(v));
        }
        return v;
    }

private:
    ToleranceField() = default;
    std::optional<double> constant_;
    EvaluableFunction eval_;
};

/**
 * @brief Increasing sequence f_1 <= f_2 <= ... converging to phi on a finite explicit domain.
 *
 * With O_k = {phi > -k}, phi_k = max(phi, -k) and f^k_n the lower envelope of phi_k at slope n,
 * f_n = sum_k xi_k f^k_n over the partition of {O_k}.
 */
class MonotoneApproximation {
public:
    explicit MonotoneApproximation(const AnchoredFunction& source, PartitionOptions options = {})
        : source_(source) {
        const auto& dom = source.domain();
        if (!dom.is_explicit()) {
            throw UnsupportedDomainError("monotone_approximation.explicit_domain",
                                         "requires a finite explicit domain");
        }
        for (std::size_t i = 0; i < dom.size(); ++i) {
            if (!source.find(Point::at(i))) {
                throw ArgumentError("monotone_approximation.total", "phi has no value at point #" + std::to_string(i));
            }
        }
        const double lo = *std::min_element(source.values().begin(), source.values().end());
        const double levels = std::max(1.0, std::floor(-lo) + 1);
        if (levels > static_cast<double>(Cover::max_sets)) {
            throw ArgumentError("monotone_approximation.size_limit",
                                "min phi = " + format_double(lo) + " needs too many sublevel sets");
        }
        levels_ = static_cast<int>(levels);

        std::vector<CoverSet> sets;
        auto phi = as_evaluable(source);
        for (int k = 1; k <= levels_; ++k) {
            sets.push_back(sublevel_set(phi, k));
            std::vector<double> trunc(source.values().begin(), source.values().end());
            for (auto& v : trunc) v = v > -k ? v : -static_cast<double>(k);
            truncated_.push_back(source.with_values(std::move(trunc)));
        }
        partition_ = std::make_shared<const PartitionOfUnity>(Cover(dom, std::move(sets)), options);
    }

    /// f_n(p).
    double value(int n, const Point& p) const {
        if (n < 1) throw ArgumentError("monotone_approximation.n_positive", "n = " + std::to_string(n));
        return blend_with(
                   *partition_,
                   [&](std::size_t k, const Point& q) { return envelope_eval(EnvelopeSpec{truncated_[k], double(n)}, q); },
                   p)
            .value;
    }

    EvaluableFunction member(int n) const {
        if (n < 1) throw ArgumentError("monotone_approximation.n_positive", "n = " + std::to_string(n));
        auto self = std::make_shared<const MonotoneApproximation>(*this);
        return [self, n](const Point& p) { return self->value(n, p); };
    }

    const PartitionOfUnity& partition() const noexcept { return *partition_; }
    int levels() const noexcept { return levels_; }
    const AnchoredFunction& truncation(int k) const { return truncated_.at(static_cast<std::size_t>(k - 1)); }

    /// Least integer n from which f_n = phi at every point.
    int exact_from() const { return std::max(1, static_cast<int>(std::ceil(convergence_index(source_)))); }

private:
    AnchoredFunction source_;
    int levels_ = 1;
    std::vector<AnchoredFunction> truncated_;
    std::shared_ptr<const PartitionOfUnity> partition_;
};

inline std::vector<EvaluableFunction> monotone_approximation(const AnchoredFunction& source, std::span<const int> ns,
                                                             PartitionOptions options = {}) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1])) {
            throw ArgumentError("monotone_approximation.increasing_n", "n list must be positive and strictly increasing");
        }
    }
    MonotoneApproximation m(source, options);
    std::vector<EvaluableFunction> out;
    for (int n : ns) out.push_back(m.member(n));
    return out;
}

/// f = sum_r xi_r r over the cover {|phi - r| < eps}; |f - phi| < eps wherever phi is sampled.
class UniformApproximation {
public:
    UniformApproximation(const SampledFunction& phi, double eps, std::optional<LevelGrid> grid = std::nullopt,
                         PartitionOptions options = {})
        : eps_(eps) {
        phi.validate();
        if (!(eps > 0) || !std::isfinite(eps)) {
            throw ArgumentError("uniform_approximation.eps_positive", "eps = " + format_double(eps));
        }
        if (!grid) {
            const auto v = phi.values();
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            grid = LevelGrid::for_tolerance(*lo, *hi, eps);
        }
        grid->validate();
        grid_ = std::move(*grid);

        std::vector<CoverSet> sets;
        std::vector<EvaluableFunction> pieces;
        for (double r : grid_.levels) {
            sets.push_back(preimage_set(phi.phi, r, eps));
            pieces.push_back([r](const Point&) { return r; });
        }
        blend_ = std::make_shared<const BlendSpec>(
            BlendSpec{PartitionOfUnity(Cover(phi.domain, std::move(sets), phi.cover_samples()), options), std::move(pieces)});
    }

    double operator()(const Point& p) const { return blend_eval(*blend_, p); }
    double eps() const noexcept { return eps_; }
    const LevelGrid& grid() const noexcept { return grid_; }
    const PartitionOfUnity& partition() const noexcept { return blend_->partition; }

private:
    double eps_;
    LevelGrid grid_;
    std::shared_ptr<const BlendSpec> blend_;
};

inline EvaluableFunction uniform_approximation(const SampledFunction& phi, double eps,
                                               std::optional<LevelGrid> grid = std::nullopt) {
    auto u = std::make_shared<const UniformApproximation>(phi, eps, std::move(grid));
    return [u](const Point& p) { return (*u)(p); };
}

/**
 * @brief Approximation within a variable tolerance: |f(x) - phi(x)| < eps(x) at every sample.
 *
 * Uniform approximants at eps = 1/n are blended over O_n = {eps > 1/n}; only the n between the
 * first nonempty O_n and the first O_n containing every sample are used.
 */
class FineApproximation {
public:
    FineApproximation(const SampledFunction& phi, const ToleranceField& tol, PartitionOptions options = {}) {
        phi.validate();
        double t_lo = std::numeric_limits<double>::infinity();
        double t_hi = 0;
        for (const auto& s : phi.samples) {
            const double t = tol(s);
            t_lo = std::min(t_lo, t);
            t_hi = std::max(t_hi, t);
        }
        const auto first_below = [](double t) {
            double n = std::floor(1 / t) + 1;
            while (n > 1 && 1 / (n - 1) < t) --n;
            while (!(1 / n < t)) ++n;
            return n;
        };
        const double n_lo = first_below(t_hi);
        const double n_hi = first_below(t_lo);
        if (n_hi - n_lo + 1 > static_cast<double>(Cover::max_sets)) {
            throw ArgumentError("fine_approximation.size_limit", "tolerance range [" + format_double(t_lo) + ", " +
                                                                     format_double(t_hi) + "] needs too many scales");
        }
        first_n_ = static_cast<int>(n_lo);
        const auto v = phi.values();
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());

        std::vector<CoverSet> sets;
        std::vector<EvaluableFunction> pieces;
        auto carrier = tol.evaluator();
        for (int n = first_n_; n <= static_cast<int>(n_hi); ++n) {
            const double eps = 1.0 / n;
            sets.push_back(band_set(carrier, eps, std::numeric_limits<double>::infinity()));
            auto u = std::make_shared<const UniformApproximation>(phi, eps, LevelGrid::for_tolerance(*lo, *hi, eps),
                                                                  options);
            pieces.push_back([u](const Point& p) { return (*u)(p); });
        }
        blend_ = std::make_shared<const BlendSpec>(
            BlendSpec{PartitionOfUnity(Cover(phi.domain, std::move(sets), phi.cover_samples()), options), std::move(pieces)});
    }

    double operator()(const Point& p) const { return blend_eval(*blend_, p); }
    /// n of the first scale; scale i of the partition uses eps = 1/(first_scale() + i).
    int first_scale() const noexcept { return first_n_; }
    std::size_t scales() const noexcept { return blend_->pieces.size(); }

private:
    int first_n_ = 1;
    std::shared_ptr<const BlendSpec> blend_;
};

inline EvaluableFunction fine_approximation(const SampledFunction& phi, const ToleranceField& tol) {
    auto f = std::make_shared<const FineApproximation>(phi, tol);
    return [f](const Point& p) { return (*f)(p); };
}

/**
 * @brief f = eta Psi + (1 - eta) Phi: equal to g on A and within eps(x) of phi.
 *
 * Psi extends g (locally Lipschitz), Phi approximates phi within eps, and eta is the clamp of
 * U = {|Psi - phi| < eps} around A.
 */
class ExtendApproximate {
public:
    ExtendApproximate(const AnchoredFunction& g, const SampledFunction& phi, const ToleranceField& tol,
                      std::vector<std::vector<std::size_t>> subsets = {})
        : phi_(phi) {
        phi.validate();
        for (std::size_t a = 0; a < g.size(); ++a) {
            const auto& p = g.anchor(a);
            const double gap = std::abs(g.value(a) - phi.phi(p));
            const double t = tol(p);
            if (!(gap < t)) {
                throw ArgumentError("extend_and_approximate.anchor_tolerance",
                                    "|g - phi| = " + format_double(gap) + " at anchor " + p.to_string() +
                                        " is not below eps = " + format_double(t));
            }
        }
        if (subsets.empty()) subsets = whole_anchor_subset(g);
        psi_ = std::make_shared<const LocalExtension>(g, std::move(subsets));
        fine_ = std::make_shared<const FineApproximation>(phi, tol);

        auto psi = psi_;
        auto f = phi.phi;
        auto t = tol;
        std::vector<Point> samples = phi.samples;
        for (const auto& a : g.anchors()) {
            if (std::find(samples.begin(), samples.end(), a) == samples.end()) samples.push_back(a);
        }
        clamp_ = std::make_shared<const Clamp>(
            phi.domain,
            band_set([psi, f, t](const Point& p) { return std::abs((*psi)(p) - f(p)) - t(p); },
                     -std::numeric_limits<double>::infinity(), 0.0),
            g.anchors(), samples);
    }

    double operator()(const Point& p) const {
        const double eta = (*clamp_)(p);
        if (eta == 1) return (*psi_)(p);
        if (eta == 0) return (*fine_)(p);
        return eta * (*psi_)(p) + (1 - eta) * (*fine_)(p);
    }

    const LocalExtension& extension() const noexcept { return *psi_; }
    const FineApproximation& approximation() const noexcept { return *fine_; }
    const Clamp& clamp() const noexcept { return *clamp_; }

private:
    SampledFunction phi_;
    std::shared_ptr<const LocalExtension> psi_;
    std::shared_ptr<const FineApproximation> fine_;
    std::shared_ptr<const Clamp> clamp_;
};

inline EvaluableFunction extend_and_approximate(const AnchoredFunction& g, const SampledFunction& phi,
                                                const ToleranceField& tol) {
    auto f = std::make_shared<const ExtendApproximate>(g, phi, tol);
    return [f](const Point& p) { return (*f)(p); };
}

/**
 * @brief A function strictly between phi < psi: f = sum_r xi_r r over O_r = {phi < r < psi}.
 *
 * Both inputs must share the same anchors; the cover is checked there.
 */
class Insertion {
public:
    Insertion(const AnchoredFunction& below, const AnchoredFunction& above, LevelGrid grid,
              PartitionOptions options = {})
        : grid_(std::move(grid)) {
        grid_.validate();
        if (below.size() != above.size()) {
            throw ArgumentError("insert_between.same_anchors", "anchor counts differ");
        }
        for (std::size_t a = 0; a < below.size(); ++a) {
            if (!(below.anchor(a) == above.anchor(a))) {
                throw ArgumentError("insert_between.same_anchors",
                                    "anchor " + std::to_string(a) + " differs: " + below.anchor(a).to_string() + " vs " +
                                        above.anchor(a).to_string());
            }
            if (!(below.value(a) < above.value(a))) {
                throw ArgumentError("insert_between.strict_order",
                                    "lower " + format_double(below.value(a)) + " is not below upper " +
                                        format_double(above.value(a)) + " at " + below.anchor(a).to_string());
            }
        }
        auto lo = as_evaluable(below);
        auto hi = as_evaluable(above);
        std::vector<CoverSet> sets;
        std::vector<EvaluableFunction> pieces;
        for (double r : grid_.levels) {
            sets.push_back(band_set([lo, hi, r](const Point& p) { return std::max(lo(p) - r, r - hi(p)); },
                                    -std::numeric_limits<double>::infinity(), 0.0));
            pieces.push_back([r](const Point&) { return r; });
        }
        auto sf = SampledFunction::from_anchored(below);
        blend_ = std::make_shared<const BlendSpec>(
            BlendSpec{PartitionOfUnity(Cover(below.domain(), std::move(sets), sf.cover_samples()), options),
                      std::move(pieces)});
    }

    double operator()(const Point& p) const { return blend_eval(*blend_, p); }
    const LevelGrid& grid() const noexcept { return grid_; }

private:
    LevelGrid grid_;
    std::shared_ptr<const BlendSpec> blend_;
};

inline EvaluableFunction insert_between(const AnchoredFunction& below, const AnchoredFunction& above,
                                        LevelGrid grid) {
    auto f = std::make_shared<const Insertion>(below, above, std::move(grid));
    return [f](const Point& p) { return (*f)(p); };
}

struct SmallScaleSpec {
    double delta;
    int k;
    double epsilon;

    void validate() const {
        if (!(delta > 0) || !std::isfinite(delta)) {
            throw ArgumentError("SmallScaleSpec.delta_positive", "delta = " + format_double(delta));
        }
        if (k < 1) throw ArgumentError("SmallScaleSpec.k_positive", "k = " + std::to_string(k));
        if (!(epsilon > 0) || !std::isfinite(epsilon)) {
            throw ArgumentError("SmallScaleSpec.epsilon_positive", "epsilon = " + format_double(epsilon));
        }
        if (!(k * delta > epsilon)) {
            throw ArgumentError("SmallScaleSpec.k_delta", "k*delta = " + format_double(k * delta) +
                                                              " does not exceed epsilon = " + format_double(epsilon));
        }
    }
};

/// Largest delta with |phi(a) - phi(b)| < eps for all anchor pairs closer than 2 delta.
inline double choose_delta(const AnchoredFunction& source, double eps) {
    if (!(eps > 0)) throw ArgumentError("choose_delta.eps_positive", "eps = " + format_double(eps));
    const auto& dom = source.domain();
    double close = std::numeric_limits<double>::infinity();
    double diameter = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        for (std::size_t j = i + 1; j < source.size(); ++j) {
            const double d = dom.unchecked_distance(source.anchor(i), source.anchor(j));
            diameter = std::max(diameter, d);
            if (std::abs(source.value(i) - source.value(j)) >= eps) close = std::min(close, d);
        }
    }
    if (std::isfinite(close)) return close / 2;
    return diameter > 0 ? diameter : 1.0;
}

/// delta from `choose_delta` and the least k with k delta > eps.
inline SmallScaleSpec choose_small_scale(const AnchoredFunction& source, double eps) {
    const double delta = choose_delta(source, eps);
    int k = static_cast<int>(std::floor(eps / delta)) + 1;
    while (!(k * delta > eps)) ++k;
    return {delta, k, eps};
}

/**
 * @brief f(x) = min over anchors y with d(x,y) < delta of [phi(y) + k d(x,y)].
 *
 * Under the SmallScaleSpec modulus condition, f is k-Lipschitz on every delta-ball and phi - eps <= f <= phi
 * at the anchors. `wide()` evaluates the same formula over the 2 delta window.
 */
class SmallScaleApproximation {
public:
    SmallScaleApproximation(const AnchoredFunction& source, SmallScaleSpec spec) : source_(source), spec_(spec) {
        spec_.validate();
        const auto& dom = source.domain();
        for (std::size_t i = 0; i < source.size(); ++i) {
            for (std::size_t j = i + 1; j < source.size(); ++j) {
                const double d = dom.unchecked_distance(source.anchor(i), source.anchor(j));
                if (d < 2 * spec_.delta && !(std::abs(source.value(i) - source.value(j)) < spec_.epsilon)) {
                    throw AdmissibilityError("SmallScaleSpec.modulus",
                                             "|phi(" + source.anchor(i).to_string() + ") - phi(" +
                                                 source.anchor(j).to_string() + ")| = " +
                                                 format_double(std::abs(source.value(i) - source.value(j))) +
                                                 " at distance " + format_double(d) + " < 2 delta",
                                             i, j);
                }
            }
        }
    }

    double operator()(const Point& p) const { return eval(p, spec_.delta); }
    double wide(const Point& p) const { return eval(p, 2 * spec_.delta); }

    /// max |f - wide| over the points.
    double window_discrepancy(std::span<const Point> points) const {
        double worst = 0;
        for (const auto& p : points) worst = std::max(worst, std::abs((*this)(p) - wide(p)));
        return worst;
    }

    const SmallScaleSpec& spec() const noexcept { return spec_; }
    const AnchoredFunction& source() const noexcept { return source_; }

private:
    double eval(const Point& p, double window) const {
        return envelope_eval(EnvelopeSpec{source_, static_cast<double>(spec_.k), Side::lower, window}, p);
    }

    AnchoredFunction source_;
    SmallScaleSpec spec_;
};

inline EvaluableFunction small_scale_approximation(const AnchoredFunction& source, SmallScaleSpec spec) {
    auto f = std::make_shared<const SmallScaleApproximation>(source, spec);
    return [f](const Point& p) { return (*f)(p); };
}

} // namespace lipkit

#endif
