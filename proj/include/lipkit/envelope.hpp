#ifndef LIPKIT_ENVELOPE_HPP
#define LIPKIT_ENVELOPE_HPP

#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

/**
 * @file envelope.hpp
 *
 * @brief Pasch-Hausdorff envelopes.
 *
 * The lower envelope of phi at slope kappa is f(p) = min_a [phi(a) + kappa d(a,p)], the greatest
 * kappa-Lipschitz minorant of phi. The upper envelope is max_a [phi(a) - kappa d(a,p)].
 * Evaluation always scans the anchors.
 */

namespace lipkit {

enum class Side { lower, upper };

struct EnvelopeSpec {
    AnchoredFunction source;
    double kappa;
    Side side = Side::lower;
    /// Restrict the scan to anchors with d(a,p) < window.
    std::optional<double> window = std::nullopt;

    void validate() const {
        if (!(kappa > 0) || !std::isfinite(kappa)) {
            throw ArgumentError("EnvelopeSpec.kappa_positive", "kappa = " + format_double(kappa));
        }
        if (window && !(*window > 0)) {
            throw ArgumentError("EnvelopeSpec.window_positive", "window = " + format_double(*window));
        }
    }
};

/// Envelope value together with the (lowest-index) anchor attaining it.
struct EnvelopeValue {
    double value;
    std::size_t anchor;
};

inline EnvelopeValue envelope_eval_detailed(const EnvelopeSpec& spec, const Point& p) {
    spec.validate();
    const auto& src = spec.source;
    const auto& dom = src.domain();
    dom.validate(p);

    const bool lower = spec.side == Side::lower;
    double best = lower ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    std::size_t arg = src.size();
    for (std::size_t i = 0; i < src.size(); ++i) {
        double d = dom.unchecked_distance(src.anchor(i), p);
        if (spec.window && !(d < *spec.window)) continue;
        double v = lower ? src.value(i) + spec.kappa * d : src.value(i) - spec.kappa * d;
        if (lower ? v < best : v > best) {
            best = v;
            arg = i;
        }
    }
    if (arg == src.size()) {
        throw EmptyWindowError("EnvelopeSpec.nonempty_window",
                               "no anchor within " + format_double(*spec.window) + " of " + p.to_string(),
                               p.to_string(), *spec.window);
    }
    return {best, arg};
}

inline double envelope_eval(const EnvelopeSpec& spec, const Point& p) {
    return envelope_eval_detailed(spec, p).value;
}

inline EvaluableFunction make_envelope(EnvelopeSpec spec) {
    spec.validate();
    return [spec = std::move(spec)](const Point& p) { return envelope_eval(spec, p); };
}

/// Lower (or upper) envelopes for a strictly increasing list of slopes.
inline std::vector<EvaluableFunction> envelope_sequence(const AnchoredFunction& source,
                                                        std::span<const double> kappas,
                                                        Side side = Side::lower) {
    for (std::size_t i = 1; i < kappas.size(); ++i) {
        if (!(kappas[i] > kappas[i - 1])) {
            throw ArgumentError("envelope_sequence.increasing_kappas",
                                "kappa[" + std::to_string(i) + "] = " + format_double(kappas[i]) +
                                    " does not exceed kappa[" + std::to_string(i - 1) +
                                    "] = " + format_double(kappas[i - 1]));
        }
    }
    std::vector<EvaluableFunction> out;
    out.reserve(kappas.size());
    for (double k : kappas) out.push_back(make_envelope(EnvelopeSpec{source, k, side}));
    return out;
}

/**
 * Slope from which the lower envelope reproduces phi at every anchor of a finite explicit space:
 * (max phi - min phi) / d_min, with d_min the least distance between distinct anchors.
 */
inline double convergence_index(const AnchoredFunction& source) {
    if (!source.domain().is_explicit()) {
        throw UnsupportedDomainError("convergence_index.explicit_domain",
                                     "requires an explicit finite domain (continuum anchors have no limit statement)");
    }
    if (source.size() < 2) return 0.0;
    const auto [lo, hi] = std::minmax_element(source.values().begin(), source.values().end());
    double d_min = std::numeric_limits<double>::infinity();
    const auto& dom = source.domain();
    for (std::size_t i = 0; i < source.size(); ++i) {
        for (std::size_t j = i + 1; j < source.size(); ++j) {
            d_min = std::min(d_min, dom.unchecked_distance(source.anchor(i), source.anchor(j)));
        }
    }
    return (*hi - *lo) / d_min;
}

/**
 * Lower envelope at 0 of the identity on the real line under the bounded metric |x-y|/(1+|x-y|).
 *
 * At step r the anchors are 0 and +-r' for every r' <= r of the schedule. Since the metric is
 * bounded by 1, the value at 0 is at most -r + kappa and runs off to -infinity.
 */
inline std::vector<double> divergence_probe(double kappa, std::span<const double> radii) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0 || (i > 0 && !(radii[i] > radii[i - 1]))) {
            throw ArgumentError("divergence_probe.increasing_radii", "radius schedule must be nonnegative and increasing");
        }
    }
    std::vector<double> xs{0.0};
    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        if (r > 0) {
            xs.push_back(-r);
            xs.push_back(r);
        }
        auto src = AnchoredFunction::on_line(xs, xs, Transform::bounded);
        out.push_back(envelope_eval(EnvelopeSpec{src, kappa}, Point::on_line(0.0)));
    }
    return out;
}

} // namespace lipkit

#endif
