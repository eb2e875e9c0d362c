#include "lipkit/envelope.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace lipkit;

namespace {

AnchoredFunction fixture() { return AnchoredFunction::on_line({0, 1, 2}, {0, 5, 1}); }

std::vector<double> distances_to(const AnchoredFunction& f, const Point& p) {
    std::vector<double> d;
    for (const auto& a : f.anchors()) d.push_back(f.domain().distance(a, p));
    return d;
}

} // namespace

TEST(EnvelopeEval, FixtureValues) {
    auto f = fixture();
    EXPECT_EQ(envelope_eval({f, 1.0}, Point::on_line(1)), 1.0);
    EXPECT_EQ(envelope_eval({f, 1.0}, Point::on_line(2)), 1.0);
    EXPECT_EQ(envelope_eval({fixture().with_values({0, 5, 1}), 1.0, Side::upper}, Point::on_line(0)), 4.0);
}

TEST(EnvelopeEval, ConstantIsFixed) {
    auto f = AnchoredFunction::on_line({0, 1, 4}, {2.5, 2.5, 2.5});
    for (double k : {0.1, 1.0, 7.0}) {
        for (double x : {0.0, 1.0, 4.0}) EXPECT_EQ(envelope_eval({f, k}, Point::on_line(x)), 2.5);
        EXPECT_DOUBLE_EQ(envelope_eval({f, k}, Point::on_line(-3)), 2.5 + 3 * k);
        EXPECT_DOUBLE_EQ(envelope_eval({f, k}, Point::on_line(2)), 2.5 + k);
    }
}

TEST(EnvelopeEval, LowestIndexOnTies) {
    auto f = AnchoredFunction::on_line({0, 2}, {0, 0});
    auto r = envelope_eval_detailed({f, 1.0}, Point::on_line(1));
    EXPECT_EQ(r.value, 1.0);
    EXPECT_EQ(r.anchor, 0u);
}

TEST(EnvelopeEval, WindowedAndEmptyWindow) {
    auto f = fixture();
    EXPECT_EQ(envelope_eval({f, 1.0, Side::lower, 0.5}, Point::on_line(1)), 5.0);
    try {
        envelope_eval({f, 1.0, Side::lower, 0.5}, Point::on_line(10));
        FAIL() << "expected EmptyWindowError";
    } catch (const EmptyWindowError& e) {
        EXPECT_EQ(e.invariant(), "EnvelopeSpec.nonempty_window");
        EXPECT_EQ(e.window(), 0.5);
        EXPECT_EQ(e.point(), "(10)");
    }
}

TEST(EnvelopeEval, InvalidSpec) {
    EXPECT_THROW(envelope_eval({fixture(), 0.0}, Point::on_line(0)), ArgumentError);
    EXPECT_THROW(envelope_eval({fixture(), 1.0, Side::lower, -1.0}, Point::on_line(0)), ArgumentError);
}

TEST(EnvelopeSequence, FixtureValues) {
    const std::vector<double> kappas{1, 2, 5};
    auto seq = envelope_sequence(fixture(), kappas);
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_EQ(seq[0](Point::on_line(1)), 1.0);
    EXPECT_EQ(seq[1](Point::on_line(1)), 2.0);
    EXPECT_EQ(seq[2](Point::on_line(1)), 5.0);
    for (auto& f : seq) EXPECT_EQ(f(Point::on_line(0)), 0.0);
}

TEST(EnvelopeSequence, RejectsNonIncreasing) {
    const std::vector<double> kappas{1, 1};
    EXPECT_THROW(envelope_sequence(fixture(), kappas), ArgumentError);
}

TEST(ConvergenceIndex, Values) {
    auto xs = std::vector<double>{0, 1, 2};
    auto f = AnchoredFunction::on_all_points(MetricDomain::line_indices(xs), {0, 5, 1});
    EXPECT_EQ(convergence_index(f), 5.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(envelope_eval({f, 5.0}, Point::at(i)), f.value(i));

    auto c = AnchoredFunction::on_all_points(MetricDomain::line_indices(xs), {3, 3, 3});
    EXPECT_EQ(convergence_index(c), 0.0);

    auto two = AnchoredFunction::on_all_points(MetricDomain::explicit_matrix({{0, 2}, {2, 0}}), {0, 1});
    EXPECT_EQ(convergence_index(two), 0.5);
    EXPECT_EQ(envelope_eval({two, 0.5}, Point::at(0)), 0.0);
    EXPECT_EQ(envelope_eval({two, 0.5}, Point::at(1)), 1.0);

    EXPECT_THROW(convergence_index(fixture()), UnsupportedDomainError);
}

TEST(DivergenceProbe, Bounds) {
    const std::vector<double> radii{0, 10, 100};
    auto v = divergence_probe(1.0, radii);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_LE(v[1], -9.0);
    EXPECT_LE(v[2], -99.0);
}

TEST(EnvelopeProperties, MatchesOracleAndIsKappaLipschitz) {
    oracle::Gen g(21);
    for (int inst = 0; inst < 20; ++inst) {
        auto xs = g.distinct_line(15, -3, 3);
        auto phi = g.uniforms(15, -2, 2);
        auto f = AnchoredFunction::on_line(xs, phi);
        const double kappa = g.uniform(0.1, 5);
        std::vector<double> qs = g.uniforms(50, -5, 5);
        for (double x : qs) {
            const auto p = Point::on_line(x);
            ASSERT_EQ(envelope_eval({f, kappa}, p), oracle::envelope(distances_to(f, p), f.values(), kappa));
        }
        for (std::size_t i = 0; i < qs.size(); ++i) {
            for (std::size_t j = i + 1; j < qs.size(); ++j) {
                const double a = envelope_eval({f, kappa}, Point::on_line(qs[i]));
                const double b = envelope_eval({f, kappa}, Point::on_line(qs[j]));
                ASSERT_LE(std::abs(a - b), kappa * std::abs(qs[i] - qs[j]) + 1e-9);
            }
        }
    }
}

TEST(EnvelopeProperties, MinorantMonotoneAndDual) {
    oracle::Gen g(22);
    for (int inst = 0; inst < 20; ++inst) {
        auto xs = g.distinct_line(12, 0, 5);
        auto phi = g.uniforms(12, -1, 1);
        auto f = AnchoredFunction::on_line(xs, phi);
        std::vector<double> neg(phi.size());
        std::transform(phi.begin(), phi.end(), neg.begin(), [](double v) { return -v; });
        auto fneg = f.with_values(neg);
        for (std::size_t a = 0; a < xs.size(); ++a) {
            ASSERT_LE(envelope_eval({f, 1.0}, f.anchor(a)), f.value(a));
        }
        for (int q = 0; q < 30; ++q) {
            const auto p = Point::on_line(g.uniform(-1, 6));
            double prev = -INFINITY;
            for (double k : {0.5, 1.0, 2.0, 4.0}) {
                const double v = envelope_eval({f, k}, p);
                ASSERT_LE(prev, v);
                prev = v;
                ASSERT_EQ(envelope_eval({f, k, Side::upper}, p), -envelope_eval({fneg, k}, p));
            }
        }
    }
}

TEST(EnvelopeProperties, GreatestMinorant) {
    oracle::Gen g(23);
    auto xs = g.distinct_line(10, 0, 4);
    auto f = AnchoredFunction::on_line(xs, g.uniforms(10, -1, 1));
    const double kappa = 1.5;
    for (int c = 0; c < 20; ++c) {
        const double shift = g.uniform(0.01, 1);
        std::vector<double> lowered(f.values());
        for (auto& v : lowered) v -= shift;
        auto minorant = f.with_values(lowered);
        for (int q = 0; q < 20; ++q) {
            const auto p = Point::on_line(g.uniform(-1, 5));
            ASSERT_LE(envelope_eval({minorant, kappa}, p), envelope_eval({f, kappa}, p) + 1e-9);
        }
    }
}

TEST(EnvelopeProperties, EqualsPhiAboveLipschitzConstant) {
    auto f = AnchoredFunction::on_line({0, 1, 2, 3}, {0, 2, 1, 1.5});
    for (std::size_t a = 0; a < f.size(); ++a) EXPECT_EQ(envelope_eval({f, 2.0}, f.anchor(a)), f.value(a));
}
