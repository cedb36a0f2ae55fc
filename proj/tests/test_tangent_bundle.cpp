#include <gtest/gtest.h>

#include "splinefold/error.hpp"
#include "splinefold/tangent_bundle.hpp"
#include "test_util.hpp"

using namespace splinefold;
using namespace splinefold::testing;

namespace {

const Manifold S2 = Manifold::sphere();
const TangentBundle TS2(S2);

double bundle_gap(const BundlePoint& a, const BundlePoint& b) {
    return std::max((a.foot.coords - b.foot.coords).norm(), (a.fiber - b.fiber).norm());
}

// Random pair at moderate separation, the regime of hurricane codes.
std::pair<BundlePoint, BundlePoint> nearby_pair(std::mt19937_64& rng, double spread = 0.6) {
    const BundlePoint a = random_bundle_point(S2, rng, 0.4);
    const Point q = near(S2, a.foot, rng, spread);
    const Vec u = S2.parallel_transport(a.foot, q, a.fiber_tangent()).vec +
                  random_tangent(S2, q, rng, 0.3).vec;
    return {a, BundlePoint{q, S2.project_tangent(q.coords, u)}};
}

}  // namespace

TEST(Sasaki, InnerProduct) {
    const BundlePoint at = TS2.point(S2.point(vec3(0, 0, 1)), vec3(0.2, 0, 0));
    const BundleTangent h = TS2.tangent(at, vec3(0.3, 0.4, 0), S2.zero());
    const BundleTangent v = TS2.tangent(at, S2.zero(), vec3(-1, 2, 0));
    EXPECT_NEAR(TS2.inner(at, h, h), 0.25, 1e-16);
    EXPECT_EQ(TS2.inner(at, h, v), 0.0);
    EXPECT_NEAR(TS2.inner(at, v, v), 5.0, 1e-15);
}

TEST(Sasaki, FlatInnerIsDotProductOfStackedCoordinates) {
    const Manifold r3 = Manifold::euclidean(3);
    const TangentBundle tr3(r3);
    std::mt19937_64 rng(10);
    for (int i = 0; i < 100; ++i) {
        const BundlePoint at{Point{gaussian(rng, 3)}, gaussian(rng, 3)};
        const BundleTangent a{at, gaussian(rng, 3), gaussian(rng, 3)};
        const BundleTangent b{at, gaussian(rng, 3), gaussian(rng, 3)};
        Eigen::VectorXd sa(6), sb(6);
        sa << a.horizontal, a.vertical;
        sb << b.horizontal, b.vertical;
        EXPECT_NEAR(tr3.inner(at, a, b), sa.dot(sb), 1e-13);
    }
}

TEST(Sasaki, PathEnergyClosedForms) {
    const int K = 8;
    const BundlePoint c = TS2.point(S2.point(vec3(1, 0, 0)), vec3(0, 0.3, 0.1));
    DiscretePath constant{std::vector<BundlePoint>(K + 1, c)};
    EXPECT_EQ(TS2.path_energy(constant), 0.0);

    // Horizontal path: feet along a geodesic, fibers parallel.
    const Point q = S2.point(vec3(0, 0.6, 0.8));
    DiscretePath horizontal;
    for (int k = 0; k <= K; ++k) {
        const Point pk = S2.geodesic(c.foot, q, static_cast<double>(k) / K);
        horizontal.nodes.push_back({pk, S2.parallel_transport(c.foot, pk, c.fiber_tangent()).vec});
    }
    const double d = S2.dist(c.foot, q);
    EXPECT_NEAR(TS2.path_energy(horizontal), d * d, 1e-12);

    // Flat straight line: K * sum |dz|^2 with dz = (z_K - z_0) / K.
    const Manifold r2 = Manifold::euclidean(2);
    const TangentBundle tr2(r2);
    const Vec p0 = vecn({0, 1}), p1 = vecn({2, -1}), u0 = vecn({0.5, 0}), u1 = vecn({-1, 1});
    DiscretePath line;
    for (int k = 0; k <= K; ++k) {
        const double t = static_cast<double>(k) / K;
        line.nodes.push_back({Point{(1 - t) * p0 + t * p1}, (1 - t) * u0 + t * u1});
    }
    EXPECT_NEAR(tr2.path_energy(line), (p1 - p0).squaredNorm() + (u1 - u0).squaredNorm(), 1e-12);
}

TEST(Sasaki, EnergyGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    const auto [a, b] = nearby_pair(rng);
    DiscretePath path = TS2.geodesic(a, b, 6);
    // Perturb an interior node off the minimizer so the gradient is not zero.
    path.nodes[3] = TS2.retract(path.nodes[3], vec3(0.05, -0.02, 0.03), vec3(0.01, 0.04, -0.02));
    const auto grad = TS2.energy_gradient(path);
    const auto basis = S2.tangent_basis(path.nodes[3].foot.coords);
    const double h = 1e-6;
    for (const auto& e : basis) {
        for (const bool vertical : {false, true}) {
            DiscretePath plus = path, minus = path;
            const Vec zero = S2.zero();
            const Vec step = h * e;
            plus.nodes[3] = vertical ? TS2.retract(path.nodes[3], zero, step)
                                     : TS2.retract(path.nodes[3], step, zero);
            minus.nodes[3] = vertical ? TS2.retract(path.nodes[3], zero, -step)
                                      : TS2.retract(path.nodes[3], -step, zero);
            const double fd = (TS2.path_energy(plus) - TS2.path_energy(minus)) / (2 * h);
            const double analytic = (vertical ? grad[3].vertical : grad[3].horizontal).dot(e);
            EXPECT_NEAR(fd, analytic, 1e-6 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST(Sasaki, GeodesicSpecialCases) {
    const BundlePoint a = TS2.point(S2.point(vec3(0, 0, 1)), vec3(0.2, -0.1, 0));
    const DiscretePath same = TS2.geodesic(a, a);
    for (const auto& n : same.nodes) EXPECT_LT(bundle_gap(n, a), 1e-14);

    // Fiber carried parallel: the foot follows the base geodesic.
    const Point q = S2.project(vec3(0.5, 0.3, 0.8));
    const BundlePoint b{q, S2.parallel_transport(a.foot, q, a.fiber_tangent()).vec};
    const DiscretePath h = TS2.geodesic(a, b);
    const int K = h.segments();
    for (int k = 0; k <= K; ++k) {
        const Point pk = S2.geodesic(a.foot, q, static_cast<double>(k) / K);
        const BundlePoint expect{pk, S2.parallel_transport(a.foot, pk, a.fiber_tangent()).vec};
        EXPECT_LT(bundle_gap(h.nodes[k], expect), 1e-5);
    }

    // Same foot: the fiber moves linearly.
    const BundlePoint c{a.foot, vec3(-0.3, 0.4, 0)};
    const DiscretePath v = TS2.geodesic(a, c);
    for (int k = 0; k <= K; ++k) {
        const double t = static_cast<double>(k) / K;
        EXPECT_LT(bundle_gap(v.nodes[k], {a.foot, (1 - t) * a.fiber + t * c.fiber}), 1e-5);
    }
}

TEST(Sasaki, FlatGeodesicIsStraight) {
    const Manifold r2 = Manifold::euclidean(2);
    const TangentBundle tr2(r2);
    const BundlePoint a{Point{vecn({0, 1})}, vecn({0.5, 0})}, b{Point{vecn({2, -1})}, vecn({-1, 1})};
    const DiscretePath path = tr2.geodesic(a, b);
    const int K = path.segments();
    for (int k = 0; k <= K; ++k) {
        const double t = static_cast<double>(k) / K;
        const BundlePoint expect{Point{(1 - t) * a.foot.coords + t * b.foot.coords},
                                 (1 - t) * a.fiber + t * b.fiber};
        EXPECT_LT(bundle_gap(path.nodes[k], expect), 1e-10);
    }
    const BundleTangent l = tr2.log(a, b);
    EXPECT_LT((l.horizontal - (b.foot.coords - a.foot.coords)).norm(), 1e-10);
    EXPECT_LT((l.vertical - (b.fiber - a.fiber)).norm(), 1e-10);
    const BundlePoint e = tr2.exp(a, l);
    EXPECT_LT(bundle_gap(e, b), 1e-10);
}

TEST(Sasaki, EnergyDecreasesEveryIteration) {
    SasakiOptions options;
    options.record_energy = true;
    const TangentBundle tb(S2, options);
    std::mt19937_64 rng(12);
    for (int i = 0; i < 20; ++i) {
        const auto [a, b] = nearby_pair(rng, 1.0);
        const GeodesicSolve s = tb.geodesic_solve(a, b, 10);
        ASSERT_FALSE(s.energy_history.empty());
        // Near the minimum, steps are judged below double resolution of E;
        // allow rounding-level ties.
        for (std::size_t k = 1; k < s.energy_history.size(); ++k)
            EXPECT_LE(s.energy_history[k], s.energy_history[k - 1] * (1 + 1e-12));
        EXPECT_LT(s.gradient_norm, 1e-8);
    }
}

TEST(Sasaki, LogAndExp) {
    const BundlePoint a = TS2.point(S2.point(vec3(0, 1, 0)), vec3(0.1, 0, 0.2));
    const BundleTangent z = TS2.log(a, a);
    EXPECT_LT(z.horizontal.norm() + z.vertical.norm(), 1e-14);
    EXPECT_LT(bundle_gap(TS2.exp(a, TS2.zero_tangent(a)), a), 1e-15);

    // Pure vertical: the foot stays, the fiber is shifted.
    const BundlePoint v = TS2.exp(a, TS2.tangent(a, S2.zero(), vec3(-0.4, 0, 0.3)));
    EXPECT_LT(bundle_gap(v, {a.foot, a.fiber + vec3(-0.4, 0, 0.3)}), 1e-14);

    std::mt19937_64 rng(13);
    for (int i = 0; i < 50; ++i) {
        const auto [p, q] = nearby_pair(rng);
        EXPECT_LT(bundle_gap(TS2.exp(p, TS2.log(p, q)), q), 1e-4);
    }
}

TEST(Sasaki, LogConvergesQuadraticallyInK) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 10; ++i) {
        const auto [a, b] = nearby_pair(rng);
        const auto at = [&](int K) {
            SasakiOptions o;
            o.segments = K;
            const BundleTangent t = TangentBundle(S2, o).log(a, b);
            Eigen::VectorXd s(6);
            s << t.horizontal, t.vertical;
            return s;
        };
        const auto l10 = at(10), l20 = at(20), l40 = at(40);
        const double ratio = (l10 - l20).norm() / (l20 - l40).norm();
        EXPECT_GE(ratio, 3.0);
        EXPECT_LE(ratio, 5.0);
    }
}

TEST(Sasaki, SquaredLogNormMatchesEnergy) {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 20; ++i) {
        const auto [a, b] = nearby_pair(rng);
        const BundleTangent l = TS2.log(a, b);
        const double energy = TS2.path_energy(TS2.geodesic(a, b));
        EXPECT_NEAR(TS2.inner(a, l, l), energy, 1e-3 * energy);
    }
}

TEST(Sasaki, Mean) {
    std::mt19937_64 rng(16);
    const auto [a, b] = nearby_pair(rng);
    const std::vector<BundlePoint> one{a};
    EXPECT_LT(bundle_gap(TS2.mean(one), a), 1e-12);

    const std::vector<BundlePoint> two{a, b};
    const DiscretePath path = TS2.geodesic(a, b);
    EXPECT_LT(bundle_gap(TS2.mean(two), path.nodes[path.segments() / 2]), 1e-4);

    const Manifold r3 = Manifold::euclidean(3);
    const TangentBundle tr3(r3);
    std::vector<BundlePoint> pts;
    Vec fsum = Vec::Zero(3), usum = Vec::Zero(3);
    for (int i = 0; i < 5; ++i) {
        pts.push_back({Point{gaussian(rng, 3)}, gaussian(rng, 3)});
        fsum += pts.back().foot.coords;
        usum += pts.back().fiber;
    }
    EXPECT_LT(bundle_gap(tr3.mean(pts), {Point{fsum / 5}, usum / 5}), 1e-10);
}

TEST(Sasaki, RejectsForeignTangents) {
    const BundlePoint a = TS2.point(S2.point(vec3(1, 0, 0)), vec3(0, 0.1, 0));
    const BundlePoint b = TS2.point(S2.point(vec3(0, 1, 0)), vec3(0, 0, 0.1));
    try {
        (void)TS2.inner(a, TS2.zero_tangent(b), TS2.zero_tangent(b));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FootMismatch);
    }
}
