#include "lipkit/extension.hpp"
#include "lipkit/verify.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lipkit;

namespace {

AnchoredFunction three_point() {
    const std::vector<double> xs{0, 1, 2};
    return AnchoredFunction::on_all_points(MetricDomain::line_indices(xs), {0, 5, 1});
}

std::vector<Point> grid_points(double lo, double hi, std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return line_points(xs);
}

} // namespace

TEST(EmpiricalLip, Examples) {
    auto est = empirical_lip(three_point());
    EXPECT_EQ(est.constant, 5.0);
    EXPECT_EQ(est.witness, (std::pair<std::size_t, std::size_t>{0, 1}));
    EXPECT_EQ(est.pairs, 3u);
    EXPECT_FALSE(est.subsampled);

    auto line = MetricDomain::euclidean(1);
    auto pts = grid_points(-3, 7, 50);
    EXPECT_EQ(empirical_lip([](const Point&) { return 4.0; }, line, pts).constant, 0.0);
    EXPECT_NEAR(empirical_lip([](const Point& p) { return 3 * p.abscissa(); }, line, pts).constant, 3.0, 1e-12);
}

TEST(EmpiricalLip, Errors) {
    auto line = MetricDomain::euclidean(1);
    const std::vector<double> one{1};
    EXPECT_THROW(empirical_lip(one, line, line_points({0})), ArgumentError);
    const std::vector<double> two{1, 2};
    EXPECT_THROW(empirical_lip(two, line, line_points({0, 0})), ArgumentError);
}

TEST(EmpiricalLip, SubsamplingIsSeededAndDeterministic) {
    oracle::Gen g(4);
    auto xs = g.distinct_line(2000, 0, 1);
    auto ys = g.uniforms(2000, 0, 1);
    auto pts = line_points(xs);
    auto line = MetricDomain::euclidean(1);
    ScanOptions opt{.pair_budget = 10000, .seed = 5};
    auto a = empirical_lip(ys, line, pts, opt);
    auto b = empirical_lip(ys, line, pts, opt);
    EXPECT_TRUE(a.subsampled);
    EXPECT_EQ(a.seed, 5u);
    EXPECT_EQ(a.constant, b.constant);
    EXPECT_EQ(a.witness, b.witness);
    auto full = empirical_lip(ys, line, pts, {.pair_budget = 3'000'000});
    EXPECT_FALSE(full.subsampled);
    EXPECT_LE(a.constant, full.constant);
}

TEST(EmpiricalLip, WitnessReproducesRatio) {
    oracle::Gen g(8);
    auto pts = g.points(60, 2, 0, 1);
    std::vector<Point> ps;
    for (auto& p : pts) ps.push_back(Point::coords(p));
    auto vals = g.uniforms(60, -1, 1);
    auto est = empirical_lip(vals, MetricDomain::euclidean(2), ps);
    const auto [i, j] = est.witness;
    EXPECT_EQ(est.constant, std::abs(vals[i] - vals[j]) / oracle::dist(pts[i], pts[j]));
}

TEST(EmpiricalLip, ExtensionBelowLambda) {
    oracle::Gen g(12);
    for (int trial = 0; trial < 10; ++trial) {
        auto xs = g.distinct_line(15, 0, 5);
        auto f = AnchoredFunction::on_line(xs, g.uniforms(15, -1, 1));
        Extension e({f, ExtensionMode::maximal});
        auto qs = line_points(g.uniforms(300, -2, 7));
        auto est = empirical_lip([&](const Point& p) { return e.maximal(p); }, f.domain(), qs);
        EXPECT_LE(est.constant, e.lambda() * (1 + 1e-9) + 1e-9);
    }
}

TEST(PointwiseModulus, Examples) {
    auto f = three_point();
    auto ev = as_evaluable(f);
    auto pts = f.domain().points();
    EXPECT_EQ(pointwise_modulus(ev, f.domain(), Point::at(1), 1.5, pts), 5.0);
    EXPECT_EQ(pointwise_modulus(ev, f.domain(), Point::at(1), 0.5, pts), 0.0);
    auto line = MetricDomain::euclidean(1);
    auto id = [](const Point& p) { return p.abscissa(); };
    auto grid = grid_points(0, 1, 11);
    EXPECT_NEAR(pointwise_modulus(id, line, Point::on_line(0.35), 0.3, grid), 1.0, 1e-12);
    EXPECT_THROW(pointwise_modulus(id, line, Point::on_line(0), 0, grid), ArgumentError);
}

TEST(PointwiseModulus, NonincreasingAsRadiusShrinks) {
    oracle::Gen g(21);
    auto xs = g.distinct_line(80, 0, 1);
    auto ys = g.uniforms(80, 0, 1);
    auto f = as_evaluable(AnchoredFunction::on_line(xs, ys));
    auto pts = line_points(xs);
    auto line = MetricDomain::euclidean(1);
    for (int i = 0; i < 20; ++i) {
        const auto& p = pts[g.index(pts.size())];
        double prev = INFINITY;
        for (double t : {1.0, 0.5, 0.2, 0.1, 0.05, 0.01}) {
            const double m = pointwise_modulus(f, line, p, t, pts);
            ASSERT_LE(m, prev);
            prev = m;
        }
    }
}

TEST(CheckSmallScale, Examples) {
    auto line = MetricDomain::euclidean(1);
    auto pts = grid_points(0, 10, 201);
    EXPECT_TRUE(check_small_scale([](const Point& p) { return std::sin(p.abscissa()); }, line, pts, 0.3, 1).passed());

    auto sq = check_small_scale([](const Point& p) { return p.abscissa() * p.abscissa(); }, line, pts, 1, 1);
    EXPECT_EQ(sq.status, VerdictStatus::fail);
    ASSERT_TRUE(sq.worst.has_value());
    EXPECT_GT(pts[sq.worst->first].abscissa(), 9.0);

    auto step = check_small_scale([](const Point& p) { return std::floor(p.abscissa()); }, line,
                                  line_points({0, 0.2, 0.4, 1.5, 1.7, 3, 3.3}), 0.5, 0);
    EXPECT_TRUE(step.passed());
    EXPECT_GT(step.checked, 0u);

    auto none = check_small_scale([](const Point&) { return 0.0; }, line, line_points({0, 5}), 1, 1);
    EXPECT_EQ(none.status, VerdictStatus::inconclusive);
}

TEST(CheckExtension, Examples) {
    auto f = AnchoredFunction::on_line({0, 1, 3}, {0, 5, 1});
    Extension e({f, ExtensionMode::midpoint});
    EXPECT_TRUE(check_extension([&](const Point& p) { return e(p); }, f).passed());
    auto shifted = check_extension([&](const Point& p) { return e(p) + 1; }, f);
    EXPECT_EQ(shifted.status, VerdictStatus::fail);
    EXPECT_EQ(shifted.violation_count, 3u);
}

TEST(CheckSandwich, Examples) {
    auto f = AnchoredFunction::on_line({0, 1, 3}, {0, 5, 1});
    Extension e({f, ExtensionMode::midpoint});
    auto lo = [&](const Point& p) { return e.minimal(p); };
    auto mid = [&](const Point& p) { return e.midpoint(p); };
    auto hi = [&](const Point& p) { return e.maximal(p); };
    auto pts = grid_points(-2, 5, 71);
    EXPECT_TRUE(check_sandwich(lo, mid, hi, pts).passed());
    EXPECT_EQ(check_sandwich(hi, mid, lo, pts).status, VerdictStatus::fail);
    EXPECT_TRUE(check_sandwich(mid, mid, mid, pts).passed());
}

TEST(UniformContinuity, SqrtPassesAndTightIsInconclusive) {
    auto pts = grid_points(0, 4, 401);
    std::vector<double> phi, f;
    for (const auto& p : pts) {
        phi.push_back(std::sqrt(p.abscissa()));
        f.push_back(phi.back() - 0.05);
    }
    auto line = MetricDomain::euclidean(1);
    auto ok = check_uniform_continuity(phi, f, line, pts, 21, 0.005, 0.5);
    EXPECT_TRUE(ok.verdict.passed());
    EXPECT_NEAR(ok.approximation_error, 0.05, 1e-12);
    EXPECT_EQ(ok.scale, 0.005);
    EXPECT_LE(ok.modulus, 0.5);
    auto tight = check_uniform_continuity(phi, f, line, pts, 21, 0.005, 0.1);
    EXPECT_EQ(tight.verdict.status, VerdictStatus::inconclusive);
}

TEST(Report, GlobalDominatesPointwise) {
    oracle::Gen g(31);
    auto xs = g.distinct_line(50, 0, 3);
    auto ys = g.uniforms(50, 0, 1);
    auto pts = line_points(xs);
    const std::vector<std::pair<double, double>> small{{0.1, 100}, {0.1, 0}};
    auto r = make_report(ys, MetricDomain::euclidean(1), pts, 0.2, small);
    for (double m : r.pointwise) EXPECT_LE(m, r.global.constant);
    ASSERT_EQ(r.small_scale.size(), 2u);
    EXPECT_EQ(r.witness_first, pts[r.global.witness.first]);
}
