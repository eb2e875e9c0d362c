// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-lipkit> <tests-dir>

#include "cli_runner.hpp"
#include "lipkit/lipkit.hpp"
#include "oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace lipkit;

namespace {

constexpr double lip_slack = 1e-9;
constexpr double anchor_tol = 1e-12;
constexpr double weight_tol = 1e-12;
constexpr double c1_seconds = 2.0;
constexpr double c2_seconds = 1.0;
constexpr double c8_seconds = 10.0;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::vector<Point> planar(oracle::Gen& g, std::size_t n, double lo, double hi) {
    std::vector<Point> out;
    for (auto& c : g.points(n, 2, lo, hi)) out.push_back(Point::coords(c));
    return out;
}

AnchoredFunction random_explicit(oracle::Gen& g, std::size_t n) {
    auto dom = MetricDomain::explicit_matrix(oracle::distance_matrix(g.points(n, 2, 0, 1)));
    return AnchoredFunction::on_all_points(dom, g.uniforms(n, -1, 1));
}

Outcome mw_suite() {
    Outcome o;
    oracle::Gen g(101);
    const auto anchors = planar(g, 50, 0, 1);
    AnchoredFunction f(MetricDomain::euclidean(2), anchors, g.uniforms(50, -1, 1));
    Extension e({f, ExtensionMode::midpoint});
    const double lam = e.lambda();
    o.require(std::abs(lam - pairwise_constant(f)) == 0, "lambda differs from the pairwise constant");
    const auto ps = planar(g, 1000, -0.25, 1.25);
    const auto qs = planar(g, 1000, -0.25, 1.25);
    double worst = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double d = f.domain().distance(ps[i], qs[i]);
        worst = std::max(worst, std::abs(e.minimal(ps[i]) - e.minimal(qs[i])) - lam * d);
        worst = std::max(worst, std::abs(e.maximal(ps[i]) - e.maximal(qs[i])) - lam * d);
    }
    o.require(worst <= lip_slack, "Lipschitz excess " + format_double(worst));
    for (std::size_t a = 0; a < f.size(); ++a) {
        o.require(std::abs(e.minimal(f.anchor(a)) - f.value(a)) <= anchor_tol &&
                      std::abs(e.maximal(f.anchor(a)) - f.value(a)) <= anchor_tol,
                  "anchor mismatch at #" + std::to_string(a));
    }
    for (std::size_t i = 0; i < 500; ++i) {
        const double lo = e.minimal(ps[i]);
        const double hi = e.maximal(ps[i]);
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double mid = t * lo + (1 - t) * hi;
            o.require(lo <= mid + lip_slack && mid <= hi + lip_slack, "sandwich fails at query " + std::to_string(i));
        }
    }
    if (o.pass) o.detail = "lambda=" + format_double(lam) + " max excess=" + format_double(worst);
    return o;
}

Outcome envelope_suite() {
    Outcome o;
    oracle::Gen g(202);
    const auto f = random_explicit(g, 100);
    const auto pts = f.domain().points();
    const double idx = convergence_index(f);
    std::vector<double> kappas;
    for (double k = 1; k < 2 * idx; k *= 2) kappas.push_back(k);
    kappas.push_back(idx);
    std::sort(kappas.begin(), kappas.end());
    std::vector<double> prev(pts.size(), -INFINITY);
    for (double k : kappas) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double v = envelope_eval({f, k}, pts[i]);
            o.require(v >= prev[i], "not monotone in kappa at point " + std::to_string(i));
            prev[i] = v;
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        o.require(std::abs(envelope_eval({f, idx}, pts[i]) - f.value(i)) <= anchor_tol,
                  "no fixed point at kappa=convergence_index");
    }
    std::vector<double> neg(f.values().begin(), f.values().end());
    for (auto& v : neg) v = -v;
    const auto fneg = f.with_values(neg);
    for (double k : {0.5, 3.0}) {
        for (const auto& p : pts) {
            o.require(envelope_eval({f, k, Side::upper}, p) == -envelope_eval({fneg, k}, p), "duality is not exact");
        }
    }
    const double k = 2;
    std::vector<double> env;
    for (const auto& p : pts) env.push_back(envelope_eval({f, k}, p));
    for (int m = 0; m < 100; ++m) {
        auto h = f.with_values(g.uniforms(pts.size(), -3, 3));
        std::vector<double> minorant;
        double shift = -INFINITY;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            minorant.push_back(envelope_eval({h, k}, pts[i]));
            shift = std::max(shift, minorant.back() - f.value(i));
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            o.require(minorant[i] - shift <= env[i] + lip_slack, "a kappa-Lipschitz minorant exceeds the envelope");
        }
    }
    if (o.pass) o.detail = "convergence_index=" + format_double(idx) + " kappas=" + std::to_string(kappas.size());
    return o;
}

Outcome divergence() {
    Outcome o;
    const std::vector<double> radii{1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
    const auto v = divergence_probe(1.0, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        o.require(v[i] < -(radii[i] - 1), "value at r=" + format_double(radii[i]) + " is " + format_double(v[i]));
        if (i > 0) o.require(v[i] < v[i - 1], "not decreasing at r=" + format_double(radii[i]));
    }
    if (o.pass) o.detail = "value at r=1e6: " + format_double(v.back());
    return o;
}

Outcome partition_suite() {
    Outcome o;
    oracle::Gen g(404);
    const auto dom = MetricDomain::euclidean(2);
    const auto samples = planar(g, 200, 0, 1);
    int built = 0;
    while (built < 10) {
        std::vector<CoverSet> sets;
        for (int n = 0; n < 10; ++n) sets.push_back(ball_set(Point::coords(g.uniforms(2, 0, 1)), g.uniform(0.2, 0.6)));
        std::optional<Cover> cover;
        try {
            cover.emplace(dom, std::move(sets), samples);
        } catch (const UncoveredPointError&) {
            continue;
        }
        ++built;
        const Cover cov = *cover;
        PartitionOfUnity pou(std::move(*cover));
        for (const auto& p : samples) {
            const auto w = pou.weights(p);
            double sum = 0;
            for (std::size_t n = 0; n < w.xi.size(); ++n) {
                sum += w.xi[n];
                o.require(w.xi[n] >= 0 && w.xi[n] <= 1, "xi outside [0,1]");
                o.require(w.xi[n] == 0 || cov.contains(n, p), "xi positive outside its set");
                if (static_cast<int>(n) + 1 > w.vanish_index) o.require(w.gamma_n[n] == 0, "gamma beyond vanish_index");
            }
            o.require(std::abs(sum - 1) <= weight_tol, "sum of xi is " + format_double(sum));
        }
    }
    const std::vector<double> xs{0, 1, 2};
    PartitionOfUnity worked(Cover(MetricDomain::line_indices(xs), {subset_set({0, 1}), subset_set({1, 2})}));
    const std::vector<std::vector<double>> expect{{1, 11.0 / 14, 0}, {0, 3.0 / 14, 1}};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto w = worked.weights(Point::at(i));
        for (std::size_t n = 0; n < 2; ++n) {
            o.require(std::abs(w.xi[n] - expect[n][i]) <= weight_tol, "worked example xi mismatch");
        }
    }
    if (o.pass) o.detail = "10 covers x 200 samples";
    return o;
}

Outcome monotone_suite() {
    Outcome o;
    const std::vector<double> xs{0, 1, 2};
    MonotoneApproximation m(AnchoredFunction::on_all_points(MetricDomain::line_indices(xs), {0, 5, 1}));
    const std::vector<std::pair<int, std::vector<double>>> expect{{1, {0, 1, 1}}, {2, {0, 2, 1}}, {5, {0, 5, 1}}};
    for (const auto& [n, vals] : expect) {
        for (std::size_t i = 0; i < 3; ++i) o.require(m.value(n, Point::at(i)) == vals[i], "fixture f_" + std::to_string(n));
    }
    oracle::Gen g(505);
    auto dom = MetricDomain::explicit_matrix(oracle::distance_matrix(g.points(100, 2, 0, 1)));
    auto f = AnchoredFunction::on_all_points(dom, g.uniforms(100, -4, 2));
    MonotoneApproximation r(f);
    const int top = static_cast<int>(std::ceil(convergence_index(f)));
    std::vector<double> prev(100, -INFINITY);
    for (int n = 1; n <= top; ++n) {
        for (std::size_t i = 0; i < 100; ++i) {
            const double v = r.value(n, Point::at(i));
            o.require(v >= prev[i], "decrease at n=" + std::to_string(n));
            prev[i] = v;
        }
    }
    for (std::size_t i = 0; i < 100; ++i) o.require(prev[i] == f.value(i), "f_n != phi at n=ceil(convergence_index)");
    if (o.pass) o.detail = "random instance reaches phi at n=" + std::to_string(top);
    return o;
}

double sin_plus(const Point& p) { return std::sin(5 * p.abscissa()) + p.abscissa(); }

Outcome uniform_fine_suite() {
    Outcome o;
    std::vector<double> xs(400);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 4.0 * static_cast<double>(i) / 399.0;
    const auto samples = line_points(xs);
    auto phi = SampledFunction::closed_form(MetricDomain::euclidean(1), samples, sin_plus);
    UniformApproximation u(phi, 0.05);
    double worst = 0;
    std::vector<double> vals;
    for (const auto& s : samples) {
        vals.push_back(u(s));
        worst = std::max(worst, std::abs(vals.back() - sin_plus(s)));
    }
    o.require(worst < 0.05, "uniform error " + format_double(worst));
    auto tol = ToleranceField::function([](const Point& p) { return 0.05 + 0.05 * p.abscissa(); });
    FineApproximation fine(phi, tol);
    double margin = -INFINITY;
    std::vector<double> fvals;
    for (const auto& s : samples) {
        fvals.push_back(fine(s));
        margin = std::max(margin, std::abs(fvals.back() - sin_plus(s)) - tol(s));
    }
    o.require(margin < 0, "fine approximation excess " + format_double(margin));
    const double lu = empirical_lip(vals, phi.domain, samples).constant;
    const double lf = empirical_lip(fvals, phi.domain, samples).constant;
    o.require(std::isfinite(lu) && std::isfinite(lf), "empirical constant not finite");
    if (o.pass) {
        o.detail = "max err=" + format_double(worst) + " lip(uniform)=" + format_double(lu) +
                   " max(|f-phi|-tol)=" + format_double(margin) + " lip(fine)=" + format_double(lf);
    }
    return o;
}

Outcome insertion_suite() {
    Outcome o;
    oracle::Gen g(707);
    const auto pts = planar(g, 200, 0, 1);
    auto lo = g.uniforms(200, -1, 1);
    std::vector<double> hi(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) hi[i] = lo[i] + g.uniform(0.2, 1.0);
    AnchoredFunction below(MetricDomain::euclidean(2), pts, lo);
    AnchoredFunction above(MetricDomain::euclidean(2), pts, hi);
    Insertion f(below, above, LevelGrid::spanning(*std::min_element(lo.begin(), lo.end()),
                                                  *std::max_element(hi.begin(), hi.end()), 0.05));
    double gap = INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double v = f(pts[i]);
        o.require(lo[i] < v && v < hi[i], "not strictly between at sample " + std::to_string(i));
        gap = std::min({gap, v - lo[i], hi[i] - v});
    }
    if (o.pass) o.detail = "min gap=" + format_double(gap);
    return o;
}

struct SmallScaleRun {
    std::vector<Point> samples;
    std::vector<double> phi;
    std::vector<double> f;
    SmallScaleSpec spec{0.005, 21, 0.1};
};

Outcome small_scale_suite(SmallScaleRun& run) {
    Outcome o;
    oracle::Gen g(808);
    std::vector<double> xs = g.uniforms(10000, 0, 100);
    xs.push_back(0);
    xs.push_back(100);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) run.phi.push_back(std::sqrt(x));
    auto src = AnchoredFunction::on_line(xs, run.phi);
    run.samples = src.anchors();
    SmallScaleApproximation s(src, run.spec);
    double window = 0;
    for (std::size_t i = 0; i < run.samples.size(); ++i) {
        const double v = s(run.samples[i]);
        run.f.push_back(v);
        o.require(run.phi[i] - run.spec.epsilon <= v && v <= run.phi[i], "two-sided bound fails at sample " + std::to_string(i));
        window = std::max(window, std::abs(v - s.wide(run.samples[i])));
    }
    o.require(window <= anchor_tol, "window discrepancy " + format_double(window));
    const ScanOptions all{.pair_budget = 100'000'000};
    auto k = check_small_scale(run.f, src.domain(), run.samples, run.spec.delta, run.spec.k, all);
    o.require(k.passed(), std::string("K-check ") + to_string(k.status));
    o.require(!k.subsampled, "K-check was subsampled");
    if (o.pass) {
        o.detail = std::to_string(run.samples.size()) + " samples, " + std::to_string(k.checked) +
                   " pairs within delta, window discrepancy=" + format_double(window);
    }
    return o;
}

Outcome necessity_suite(const SmallScaleRun& run) {
    Outcome o;
    const double eps_prime = 0.5;
    const ScanOptions all{.pair_budget = 100'000'000};
    auto c = check_uniform_continuity(run.phi, run.f, MetricDomain::euclidean(1), run.samples, run.spec.k,
                                      run.spec.delta, eps_prime, all);
    o.require(c.verdict.passed(), std::string("verdict ") + to_string(c.verdict.status));
    o.detail = "scale=" + format_double(c.scale) + " modulus=" + format_double(c.modulus) +
               " sup|f-phi|=" + format_double(c.approximation_error);
    return o;
}

Outcome cli_determinism(const std::string& exe, const std::string& dir) {
    Outcome o;
    for (const auto& fc : cli::fixture_commands) {
        const auto args = cli::rooted(dir, fc.args);
        const auto a = cli::run(exe, args);
        const auto b = cli::run(exe, args);
        o.require(a.exit_code == 0 && b.exit_code == 0, std::string("non-zero exit: ") + fc.args);
        o.require(a.out == b.out, std::string("outputs differ: ") + fc.args);
        o.require(a.out == cli::slurp(dir + "/" + fc.golden), std::string("golden mismatch: ") + fc.golden);
    }
    if (o.pass) o.detail = std::to_string(cli::fixture_commands.size()) + " commands";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <lipkit> <tests-dir>\n", argv[0]);
        return 2;
    }
    const std::string exe = argv[1];
    const std::string dir = argv[2];
    SmallScaleRun run;

    struct Criterion {
        int id;
        const char* name;
        double limit;
        std::function<Outcome()> body;
    };
    const std::vector<Criterion> criteria{
        {1, "McShane-Whitney suite", c1_seconds, mw_suite},
        {2, "envelope suite", c2_seconds, envelope_suite},
        {3, "divergence probe", 0, divergence},
        {4, "partition suite", 0, partition_suite},
        {5, "monotone approximation", 0, monotone_suite},
        {6, "uniform and fine approximation", 0, uniform_fine_suite},
        {7, "insertion", 0, insertion_suite},
        {8, "small-scale approximation", c8_seconds, [&] { return small_scale_suite(run); }},
        {9, "uniform-continuity necessity", 0, [&] { return necessity_suite(run); }},
        {10, "CLI determinism and goldens", 0, [&] { return cli_determinism(exe, dir); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0 && secs >= c.limit) {
            o.require(false, "runtime " + format_double(secs) + " s over the " + format_double(c.limit) + " s limit");
        }
        if (!o.pass) ++failures;
        std::printf("criterion %2d %s: %s (%s; %.3f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
