#ifndef LIPKIT_VERIFY_HPP
#define LIPKIT_VERIFY_HPP

#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

/**
 * @file verify.hpp
 *
 * @brief Sampled measurements of Lipschitz moduli and pass/fail verdicts.
 *
 * Every check is evidence from finitely many samples, never a proof. Pair scans enumerate (i, j),
 * i < j, in lexicographic order; past the pair budget a fixed-seed uniform subsample is used instead.
 */

namespace lipkit {

/// Slack for Lipschitz-type inequalities and orderings.
inline constexpr double check_tolerance = 1e-9;
/// Slack for exact-agreement checks.
inline constexpr double agreement_tolerance = 1e-12;

struct ScanOptions {
    std::size_t pair_budget = 1'000'000;
    std::uint64_t seed = 20240607;
    /// Violations kept in a verdict; the count is always complete.
    std::size_t max_violations = 100;
};

enum class VerdictStatus { pass, fail, inconclusive };

inline const char* to_string(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// One failed inequality lhs <= rhs; `second` is unset for single-point checks.
struct Violation {
    std::size_t first = 0;
    std::optional<std::size_t> second;
    double lhs = 0;
    double rhs = 0;
};

struct Verdict {
    VerdictStatus status = VerdictStatus::inconclusive;
    std::vector<Violation> violations;
    std::size_t violation_count = 0;
    /// Pairs or points inside the scope of the check.
    std::size_t checked = 0;
    bool subsampled = false;
    /// Violation with the largest lhs - rhs.
    std::optional<Violation> worst;

    bool passed() const noexcept { return status == VerdictStatus::pass; }
};

namespace detail {

inline std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Calls visit(i, j) for all pairs, or for `budget` seeded random pairs when there are more.
template <class Visit>
bool for_each_pair(std::size_t n, const ScanOptions& opt, Visit&& visit) {
    if (pair_count(n) <= opt.pair_budget) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
        }
        return false;
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t t = 0; t < opt.pair_budget; ++t) {
        std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        while (j == i) j = pick(rng);
        visit(std::min(i, j), std::max(i, j));
    }
    return true;
}

inline void record(Verdict& v, const ScanOptions& opt, Violation w) {
    ++v.violation_count;
    if (!v.worst || w.lhs - w.rhs > v.worst->lhs - v.worst->rhs) v.worst = w;
    if (v.violations.size() < opt.max_violations) v.violations.push_back(w);
}

inline void finish(Verdict& v) {
    if (v.violation_count > 0) {
        v.status = VerdictStatus::fail;
    } else {
        v.status = v.checked > 0 ? VerdictStatus::pass : VerdictStatus::inconclusive;
    }
}

} // namespace detail

struct LipschitzEstimate {
    double constant = 0;
    /// Indices into the sample list attaining `constant` (first in scan order).
    std::pair<std::size_t, std::size_t> witness{0, 0};
    std::size_t pairs = 0;
    bool subsampled = false;
    std::uint64_t seed = 0;
};

/// max |f(p) - f(q)| / d(p,q) over sampled pairs; coincident pairs are skipped.
inline LipschitzEstimate empirical_lip(std::span<const double> values, const MetricDomain& domain,
                                       std::span<const Point> samples, const ScanOptions& opt = {}) {
    if (values.size() != samples.size()) {
        throw ArgumentError("empirical_lip.values", "one value per sample required");
    }
    if (samples.size() < 2) throw ArgumentError("empirical_lip.two_samples", "need at least two samples");
    for (const auto& s : samples) domain.validate(s);
    LipschitzEstimate est;
    est.seed = opt.seed;
    bool found = false;
    est.subsampled = detail::for_each_pair(samples.size(), opt, [&](std::size_t i, std::size_t j) {
        const double d = domain.unchecked_distance(samples[i], samples[j]);
        if (d == 0) return;
        ++est.pairs;
        const double r = std::abs(values[i] - values[j]) / d;
        if (!found || r > est.constant) {
            est.constant = r;
            est.witness = {i, j};
            found = true;
        }
    });
    if (!found) throw ArgumentError("empirical_lip.distinct_samples", "all sampled pairs coincide");
    return est;
}

inline LipschitzEstimate empirical_lip(const EvaluableFunction& f, const MetricDomain& domain,
                                       std::span<const Point> samples, const ScanOptions& opt = {}) {
    const auto v = evaluate_batch(f, samples, thread_cap_from_env());
    return empirical_lip(v, domain, samples, opt);
}

inline LipschitzEstimate empirical_lip(const AnchoredFunction& f, const ScanOptions& opt = {}) {
    return empirical_lip(f.values(), f.domain(), f.anchors(), opt);
}

/// sup over samples x with 0 < d(x,p) < t of |f(x) - f(p)| / d(x,p); 0 when p is isolated at scale t.
inline double pointwise_modulus(const EvaluableFunction& f, const MetricDomain& domain, const Point& p, double t,
                                std::span<const Point> samples) {
    if (!(t > 0)) throw ArgumentError("pointwise_modulus.radius_positive", "t = " + format_double(t));
    domain.validate(p);
    const double fp = f(p);
    double best = 0;
    for (const auto& x : samples) {
        const double d = domain.distance(x, p);
        if (d > 0 && d < t) best = std::max(best, std::abs(f(x) - fp) / d);
    }
    return best;
}

/// Pointwise moduli at every sample, computed from precomputed values.
inline std::vector<double> pointwise_moduli(std::span<const double> values, const MetricDomain& domain,
                                            std::span<const Point> samples, double t) {
    if (!(t > 0)) throw ArgumentError("pointwise_modulus.radius_positive", "t = " + format_double(t));
    std::vector<double> out(samples.size(), 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = 0; j < samples.size(); ++j) {
            const double d = domain.unchecked_distance(samples[i], samples[j]);
            if (d > 0 && d < t) out[i] = std::max(out[i], std::abs(values[i] - values[j]) / d);
        }
    }
    return out;
}

/// sup |f(p) - f(q)| over sampled pairs with d(p,q) < scale.
inline double modulus_of_continuity(std::span<const double> values, const MetricDomain& domain,
                                    std::span<const Point> samples, double scale, const ScanOptions& opt = {}) {
    if (!(scale > 0)) throw ArgumentError("modulus_of_continuity.scale_positive", "scale = " + format_double(scale));
    double best = 0;
    detail::for_each_pair(samples.size(), opt, [&](std::size_t i, std::size_t j) {
        if (domain.unchecked_distance(samples[i], samples[j]) < scale) {
            best = std::max(best, std::abs(values[i] - values[j]));
        }
    });
    return best;
}

/// Pass iff |f(p) - f(q)| <= K d(p,q) + 1e-9 for every sampled pair with d(p,q) < delta.
inline Verdict check_small_scale(std::span<const double> values, const MetricDomain& domain,
                                 std::span<const Point> samples, double delta, double K, const ScanOptions& opt = {}) {
    if (!(delta > 0)) throw ArgumentError("check_small_scale.delta_positive", "delta = " + format_double(delta));
    if (!(K >= 0)) throw ArgumentError("check_small_scale.K_nonnegative", "K = " + format_double(K));
    Verdict v;
    v.subsampled = detail::for_each_pair(samples.size(), opt, [&](std::size_t i, std::size_t j) {
        const double d = domain.unchecked_distance(samples[i], samples[j]);
        if (!(d < delta)) return;
        ++v.checked;
        const double lhs = std::abs(values[i] - values[j]);
        const double rhs = K * d;
        if (lhs > rhs + check_tolerance) detail::record(v, opt, {i, j, lhs, rhs});
    });
    detail::finish(v);
    return v;
}

inline Verdict check_small_scale(const EvaluableFunction& f, const MetricDomain& domain, std::span<const Point> samples,
                                 double delta, double K, const ScanOptions& opt = {}) {
    const auto values = evaluate_batch(f, samples, thread_cap_from_env());
    return check_small_scale(values, domain, samples, delta, K, opt);
}

/// Pass iff |ext(a) - phi(a)| <= 1e-12 at every anchor.
inline Verdict check_extension(const EvaluableFunction& ext, const AnchoredFunction& source,
                               const ScanOptions& opt = {}) {
    Verdict v;
    for (std::size_t a = 0; a < source.size(); ++a) {
        ++v.checked;
        const double gap = std::abs(ext(source.anchor(a)) - source.value(a));
        if (!(gap <= agreement_tolerance)) detail::record(v, opt, {a, std::nullopt, gap, agreement_tolerance});
    }
    detail::finish(v);
    return v;
}

/// Pass iff lo <= mid <= hi within 1e-9 at every sample.
inline Verdict check_sandwich(const EvaluableFunction& lo, const EvaluableFunction& mid, const EvaluableFunction& hi,
                              std::span<const Point> samples, const ScanOptions& opt = {}) {
    Verdict v;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        ++v.checked;
        const double a = lo(samples[i]);
        const double b = mid(samples[i]);
        const double c = hi(samples[i]);
        if (a > b + check_tolerance) detail::record(v, opt, {i, std::nullopt, a, b});
        if (b > c + check_tolerance) detail::record(v, opt, {i, std::nullopt, b, c});
    }
    detail::finish(v);
    return v;
}

struct UniformContinuityCheck {
    Verdict verdict;
    double approximation_error = 0;
    double scale = 0;
    double modulus = 0;
};

/**
 * @brief A small-scale approximant f (k-Lipschitz on delta-balls) forces phi to be uniformly continuous.
 *
 * For eps' > 3 sup|f - phi|, the modulus of phi at scale min{eps' / (3k), delta} is at most eps'.
 * Inconclusive when eps' is too small for the measured approximation error.
 */
inline UniformContinuityCheck check_uniform_continuity(std::span<const double> phi, std::span<const double> f,
                                                       const MetricDomain& domain, std::span<const Point> samples,
                                                       double k, double delta, double eps_prime,
                                                       const ScanOptions& opt = {}) {
    if (phi.size() != samples.size() || f.size() != samples.size()) {
        throw ArgumentError("check_uniform_continuity.values", "one value per sample required");
    }
    UniformContinuityCheck out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out.approximation_error = std::max(out.approximation_error, std::abs(f[i] - phi[i]));
    }
    out.scale = std::min(eps_prime / (3 * k), delta);
    if (!(eps_prime > 3 * out.approximation_error)) {
        out.verdict.status = VerdictStatus::inconclusive;
        return out;
    }
    out.modulus = modulus_of_continuity(phi, domain, samples, out.scale, opt);
    out.verdict.checked = 1;
    if (out.modulus > eps_prime) {
        detail::record(out.verdict, opt, {0, std::nullopt, out.modulus, eps_prime});
    }
    detail::finish(out.verdict);
    return out;
}

/// Global, pointwise and small-scale measurements of one function on one sample set.
struct LipschitzReport {
    LipschitzEstimate global;
    Point witness_first = Point::at(0);
    Point witness_second = Point::at(0);
    double radius = 0;
    std::vector<double> pointwise;

    struct SmallScale {
        double delta;
        double K;
        Verdict verdict;
    };
    std::vector<SmallScale> small_scale;
};

inline LipschitzReport make_report(std::span<const double> values, const MetricDomain& domain,
                                   std::span<const Point> samples, double radius,
                                   std::span<const std::pair<double, double>> small_scale = {},
                                   const ScanOptions& opt = {}) {
    LipschitzReport r;
    r.global = empirical_lip(values, domain, samples, opt);
    r.witness_first = samples[r.global.witness.first];
    r.witness_second = samples[r.global.witness.second];
    r.radius = radius;
    r.pointwise = pointwise_moduli(values, domain, samples, radius);
    for (const auto& [delta, K] : small_scale) {
        r.small_scale.push_back({delta, K, check_small_scale(values, domain, samples, delta, K, opt)});
    }
    return r;
}

} // namespace lipkit

#endif
