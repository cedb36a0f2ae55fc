#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <sstream>

#include "splinefold/bezierfold.hpp"
#include "splinefold/error.hpp"
#include "splinefold/pca.hpp"
#include "test_util.hpp"

using namespace splinefold;
using namespace splinefold::testing;

namespace {

const Manifold S2 = Manifold::sphere();
const Bezierfold BF{TangentBundle(S2)};

SplineCode random_code(std::mt19937_64& rng, int L, const Point& center, double spread = 0.3) {
    SplineCode c;
    Point p = near(S2, center, rng, spread);
    for (int i = 0; i <= L; ++i) {
        const Vec u = random_tangent(S2, p, rng, 0.2).vec;
        c.anchors.push_back({p, u});
        p = S2.exp(p, Tangent{p, Vec(3 * u + random_tangent(S2, p, rng, 0.1).vec)});
    }
    return c;
}

SplineCode flat_code(std::mt19937_64& rng, int L, int n) {
    SplineCode c;
    for (int i = 0; i <= L; ++i) c.anchors.push_back({Point{gaussian(rng, n)}, gaussian(rng, n)});
    return c;
}

Eigen::VectorXd flat_stack(const SplineCode& c) {
    const Eigen::Index n = c.anchors.front().fiber.size();
    Eigen::VectorXd x(2 * n * static_cast<Eigen::Index>(c.anchors.size()));
    for (std::size_t i = 0; i < c.anchors.size(); ++i)
        x.segment(2 * n * static_cast<Eigen::Index>(i), 2 * n) << c.anchors[i].foot.coords,
            c.anchors[i].fiber;
    return x;
}

double code_gap(const SplineCode& a, const SplineCode& b) {
    double g = 0;
    for (std::size_t i = 0; i < a.anchors.size(); ++i)
        g = std::max({g, (a.anchors[i].foot.coords - b.anchors[i].foot.coords).norm(),
                      (a.anchors[i].fiber - b.anchors[i].fiber).norm()});
    return g;
}

}  // namespace

TEST(Code, EncodeDecodeAreInverse) {
    std::mt19937_64 rng(40);
    for (int i = 0; i < 50; ++i) {
        const SplineCode c = random_code(rng, 1 + i % 3, random_point(S2, rng));
        const CubicSpline b = decode(S2, c);
        EXPECT_LT(code_gap(encode(S2, b), c), 1e-10);
        const CubicSpline b2 = decode(S2, encode(S2, b));
        for (std::size_t k = 0; k < b.controls().size(); ++k)
            EXPECT_LT((b.controls()[k].coords - b2.controls()[k].coords).norm(), 1e-10);
    }
}

TEST(Code, ConstantSpline) {
    const Point p = S2.point(vec3(0, 0, 1));
    const SplineCode c = encode(S2, CubicSpline(std::vector<Point>(7, p)));
    ASSERT_EQ(c.segments(), 2);
    for (const auto& a : c.anchors) {
        EXPECT_EQ(a.foot.coords, p.coords);
        EXPECT_EQ(a.fiber, S2.zero());
    }
    const CubicSpline b = decode(S2, c);
    for (const auto& q : b.controls()) EXPECT_EQ(q.coords, p.coords);
}

TEST(Code, FlatAnchorsAreControlDifferences) {
    const Manifold r2 = Manifold::euclidean(2);
    const CubicSpline b({Point{vecn({0, 0})}, Point{vecn({1, 2})}, Point{vecn({3, 1})},
                         Point{vecn({4, -1})}});
    const SplineCode c = encode(r2, b);
    EXPECT_EQ(c.anchors[0].fiber, vecn({1, 2}));
    EXPECT_EQ(c.anchors[1].foot.coords, vecn({4, -1}));
    EXPECT_EQ(c.anchors[1].fiber, vecn({1, -2}));
}

TEST(Code, JoinVelocityIsThreeTimesFiber) {
    std::mt19937_64 rng(41);
    const SplineCode c = random_code(rng, 2, S2.point(vec3(1, 0, 0)));
    const CubicSpline b = decode(S2, c);
    const Vec u1 = c.anchors[1].fiber;
    EXPECT_LT((endpoint_velocity(S2, b, 0, SegmentEnd::End).vec - 3 * u1).norm(), 1e-12);
    EXPECT_LT((endpoint_velocity(S2, b, 1, SegmentEnd::Start).vec - 3 * u1).norm(), 1e-12);
}

TEST(Code, DecodeRejectsLongFibers) {
    std::mt19937_64 rng(42);
    SplineCode c = random_code(rng, 2, S2.point(vec3(1, 0, 0)));
    c.anchors[2].fiber = S2.project_tangent(c.anchors[2].foot.coords, gaussian(rng, 3));
    c.anchors[2].fiber *= 1.2 / c.anchors[2].fiber.norm();
    try {
        (void)decode(S2, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutOfInjectivityRadius);
        EXPECT_EQ(e.index(), 2u);
    }
}

TEST(Pullback, InnerProduct) {
    std::mt19937_64 rng(43);
    const SplineCode c = random_code(rng, 2, S2.point(vec3(0, 1, 0)));
    SplineCodeTangent x = BF.zero(c), y = BF.zero(c);
    const Vec v = random_tangent(S2, c.anchors[1].foot, rng, 1.0).vec;
    x.components[1].horizontal = v;
    EXPECT_NEAR(BF.inner(c, x, x), v.squaredNorm(), 1e-15);
    y.components[0].vertical = random_tangent(S2, c.anchors[0].foot, rng, 1.0).vec;
    EXPECT_EQ(BF.inner(c, x, y), 0.0);

    const Manifold r2 = Manifold::euclidean(2);
    const Bezierfold flat{TangentBundle(r2)};
    const SplineCode f = flat_code(rng, 1, 2);
    SplineCodeTangent a = flat.zero(f), b = flat.zero(f);
    for (int i = 0; i < 2; ++i) {
        a.components[i].horizontal = gaussian(rng, 2);
        a.components[i].vertical = gaussian(rng, 2);
        b.components[i].horizontal = gaussian(rng, 2);
        b.components[i].vertical = gaussian(rng, 2);
    }
    ASSERT_EQ(flat.stack(a).size(), 8);
    EXPECT_NEAR(flat.inner(f, a, b), flat.stack(a).dot(flat.stack(b)), 1e-14);
}

TEST(Bezierfold, GeodesicLogExp) {
    std::mt19937_64 rng(44);
    const SplineCode a = random_code(rng, 2, S2.point(vec3(0, 0, 1)));
    for (const auto& c : BF.geodesic(a, a)) EXPECT_LT(code_gap(c, a), 1e-14);

    const SplineCode b = random_code(rng, 2, S2.point(vec3(0, 0, 1)));
    const auto path = BF.geodesic(a, b);
    const int K = static_cast<int>(path.size()) - 1;
    for (int i = 0; i <= 2; ++i) {
        const DiscretePath component = BF.bundle().geodesic(a.anchors[i], b.anchors[i]);
        EXPECT_LT((path[K / 2].anchors[i].foot.coords - component.nodes[K / 2].foot.coords).norm(),
                  1e-4);
        EXPECT_LT((path[K / 2].anchors[i].fiber - component.nodes[K / 2].fiber).norm(), 1e-4);
    }
    EXPECT_LT(code_gap(BF.exp(a, BF.log(a, b)), b), 1e-4);

    const Manifold r3 = Manifold::euclidean(3);
    const Bezierfold flat{TangentBundle(r3)};
    const SplineCode fa = flat_code(rng, 1, 3), fb = flat_code(rng, 1, 3);
    const auto line = flat.geodesic(fa, fb);
    for (std::size_t k = 0; k < line.size(); ++k) {
        const double t = static_cast<double>(k) / (line.size() - 1);
        EXPECT_LT((flat_stack(line[k]) - ((1 - t) * flat_stack(fa) + t * flat_stack(fb))).norm(),
                  1e-10);
    }
}

TEST(Bezierfold, Mean) {
    std::mt19937_64 rng(45);
    const SplineCode a = random_code(rng, 1, S2.point(vec3(1, 0, 0)));
    const std::vector<SplineCode> one{a};
    EXPECT_LT(code_gap(BF.mean(one), a), 1e-12);

    const SplineCode b = random_code(rng, 1, S2.point(vec3(1, 0, 0)));
    const std::vector<SplineCode> two{a, b};
    const auto path = BF.geodesic(a, b);
    EXPECT_LT(code_gap(BF.mean(two), path[path.size() / 2]), 1e-4);

    const Manifold r2 = Manifold::euclidean(2);
    const Bezierfold flat{TangentBundle(r2)};
    std::vector<SplineCode> codes;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(8);
    for (int i = 0; i < 6; ++i) {
        codes.push_back(flat_code(rng, 1, 2));
        sum += flat_stack(codes.back());
    }
    EXPECT_LT((flat_stack(flat.mean(codes)) - sum / 6).norm(), 1e-10);
}

TEST(Eigen, JacobiMatchesReferenceSolver) {
    std::mt19937_64 rng(46);
    for (const int n : {2, 5, 12}) {
        Eigen::MatrixXd b(n, n);
        for (int i = 0; i < n; ++i) b.col(i) = gaussian(rng, n);
        const Eigen::MatrixXd a = b * b.transpose();
        const SymmetricEigen mine = jacobi_eigen(a);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(mine.values[i], ref.eigenvalues()[n - 1 - i], 1e-10);
        EXPECT_LT((a * mine.vectors - mine.vectors * mine.values.asDiagonal()).norm(), 1e-10);
        EXPECT_LT((mine.vectors.transpose() * mine.vectors - Eigen::MatrixXd::Identity(n, n)).norm(),
                  1e-12);
    }
}

TEST(PGA, IdenticalCodesHaveNoVariance) {
    std::mt19937_64 rng(47);
    const SplineCode a = random_code(rng, 1, S2.point(vec3(1, 0, 0)));
    const std::vector<SplineCode> same(4, a);
    const PGAModel m = BF.pga(same, 2);
    EXPECT_EQ(m.rank, 0);
    EXPECT_TRUE(m.rank_deficient);
    EXPECT_LT(m.variances.maxCoeff(), 1e-20);
    EXPECT_LT(m.total_variance, 1e-20);
}

TEST(PGA, FlatCaseIsClassicalPCA) {
    const Manifold r2 = Manifold::euclidean(2);
    const Bezierfold flat{TangentBundle(r2)};
    std::mt19937_64 rng(48);
    std::vector<SplineCode> codes;
    const int N = 20;
    Eigen::MatrixXd X(N, 8);
    for (int j = 0; j < N; ++j) {
        codes.push_back(flat_code(rng, 1, 2));
        X.row(j) = flat_stack(codes.back()).transpose();
    }
    const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / N;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(cov);

    const PGAModel m = flat.pga(codes, 8);
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(m.variances[k], ref.eigenvalues()[7 - k], 1e-8);
    EXPECT_NEAR(m.variances.sum(), m.total_variance, 1e-8);
    EXPECT_NEAR(m.total_variance, cov.trace(), 1e-10);
    // Scores are projections of the centred data on the principal axes.
    for (int k = 0; k < 8; ++k) {
        const Eigen::VectorXd axis = ref.eigenvectors().col(7 - k);
        const Eigen::VectorXd proj = centered * axis;
        EXPECT_LT(std::min((proj - m.scores.col(k)).norm(), (proj + m.scores.col(k)).norm()), 1e-8);
    }
}

TEST(PGA, SphereModelInvariants) {
    std::mt19937_64 rng(49);
    const Point center = S2.project(vec3(0.3, -0.8, 0.5));
    std::vector<SplineCode> codes;
    for (int j = 0; j < 12; ++j) codes.push_back(random_code(rng, 2, center, 0.2));
    const PGAModel m = BF.pga(codes, 11);

    for (int a = 0; a < 11; ++a) {
        if (a > 0) EXPECT_LE(m.variances[a], m.variances[a - 1]);
        EXPECT_GE(m.variances[a], 0.0);
        for (int b = 0; b < 11; ++b)
            EXPECT_NEAR(BF.inner(m.mean, m.directions[a], m.directions[b]), a == b ? 1.0 : 0.0, 1e-8);
    }
    EXPECT_LE(m.variances.sum(), m.total_variance * (1 + 1e-12));

    // First-order condition of the mean.
    std::vector<SplineCodeTangent> logs;
    for (const auto& c : codes) logs.push_back(BF.log(m.mean, c));
    const std::vector<double> ones(codes.size(), 1.0);
    double pairwise = 0;
    int pairs = 0;
    for (std::size_t i = 0; i < codes.size(); ++i)
        for (std::size_t j = i + 1; j < codes.size(); ++j, ++pairs) pairwise += BF.dist(codes[i], codes[j]);
    EXPECT_LT(BF.norm(m.mean, BF.combine(m.mean, logs, ones)), 1e-5 * pairwise / pairs);

    // Scores are inner products with the directions.
    for (std::size_t j = 0; j < codes.size(); ++j)
        for (int k = 0; k < 11; ++k)
            EXPECT_NEAR(m.scores(static_cast<Eigen::Index>(j), k),
                        BF.inner(m.mean, logs[j], m.directions[k]), 1e-8);

    // Reconstruction improves with every added mode.
    for (std::size_t j = 0; j < 3; ++j) {
        double previous = BF.dist(m.mean, codes[j]);
        for (int modes = 1; modes <= 11; ++modes) {
            std::vector<SplineCodeTangent> dirs(m.directions.begin(), m.directions.begin() + modes);
            std::vector<double> w;
            for (int k = 0; k < modes; ++k) w.push_back(m.scores(static_cast<Eigen::Index>(j), k));
            const double r = BF.dist(BF.exp(m.mean, BF.combine(m.mean, dirs, w)), codes[j]);
            EXPECT_LE(r, previous + 1e-6);
            previous = r;
        }
        EXPECT_LT(previous, 1e-3);
    }
}

TEST(PGA, RejectsBadModeCounts) {
    std::mt19937_64 rng(50);
    std::vector<SplineCode> codes;
    for (int j = 0; j < 5; ++j) codes.push_back(random_code(rng, 1, S2.point(vec3(0, 0, 1))));
    EXPECT_THROW((void)BF.pga(codes, 5), Error);
    EXPECT_THROW((void)BF.pga(codes, 0), Error);
    EXPECT_THROW((void)BF.pga(std::span(codes).first(1), 1), Error);
}

TEST(PGA, ScoreExport) {
    Eigen::MatrixXd s(2, 2);
    s << 1.5, -0.25, 0.1, 2;
    const std::vector<std::string> ids{"AL012010", "AL022010"}, labels{"group_i", "group_iii"};
    std::ostringstream out;
    write_pga_scores(out, s, ids, labels);
    EXPECT_EQ(out.str(),
              "id,label,score_1,score_2\n"
              "AL012010,group_i,1.5,-0.25\n"
              "AL022010,group_iii,0.10000000000000001,2\n");
    std::ostringstream side;
    write_pga_sidecar(side, Eigen::Vector2d(0.5, 0.25), 1.0, 2, false);
    EXPECT_NE(side.str().find("\"total_variance\": 1.0"), std::string::npos);
}
