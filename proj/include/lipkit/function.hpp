#ifndef LIPKIT_FUNCTION_HPP
#define LIPKIT_FUNCTION_HPP

#include "lipkit/metric.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace lipkit {

/// A closed-form evaluator computable at arbitrary query points of its domain.
using EvaluableFunction = std::function<double(const Point&)>;

/// Wraps an anchored function; defined only at its anchors.
inline EvaluableFunction as_evaluable(const AnchoredFunction& f) {
    return [f](const Point& p) { return f.at(p); };
}

/// Worker count from LIPKIT_THREADS, defaulting to 1.
inline unsigned thread_cap_from_env() {
    const char* v = std::getenv("LIPKIT_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end == v || n < 1) return 1;
    return static_cast<unsigned>(std::min<long>(n, 256));
}

/**
 * Evaluates `f` at every point. Results are in input order regardless of the number of workers.
 * The first exception thrown by any worker is rethrown (the lowest failing index wins).
 */
inline std::vector<double> evaluate_batch(const EvaluableFunction& f, std::span<const Point> points,
                                          unsigned threads = 1) {
    std::vector<double> out(points.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
        return out;
    }

    std::mutex mu;
    std::size_t failed_at = points.size();
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < points.size(); i += threads) {
                try {
                    out[i] = f(points[i]);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (i < failed_at) {
                        failed_at = i;
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace lipkit

#endif
