#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "splinefold/error.hpp"
#include "splinefold/stats_ml.hpp"
#include "test_util.hpp"

using namespace splinefold;
using namespace splinefold::testing;

namespace {

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
    int hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

// Four clusters at (+-1, +-1); the label is the sign of x*y.
void xor_layout(std::mt19937_64& rng, int per_cluster, Eigen::MatrixXd& x, std::vector<int>& y) {
    x.resize(4 * per_cluster, 2);
    y.clear();
    const double cx[4] = {1, -1, 1, -1}, cy[4] = {1, -1, -1, 1};
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < per_cluster; ++i) {
            const Vec n = gaussian(rng, 2, 0.1);
            x.row(c * per_cluster + i) << cx[c] + n[0], cy[c] + n[1];
            y.push_back(c < 2 ? 0 : 1);
        }
}

void check_dual_feasible(const SVMModel& m) {
    for (const auto& p : m.pairs) {
        for (std::size_t i = 0; i < p.alpha.size(); ++i) {
            EXPECT_GE(p.alpha[i], 0.0);
            EXPECT_LE(p.alpha[i], p.upper[i]);
        }
        EXPECT_LT(std::abs(p.equality_residual()), 1e-8);
    }
}

}  // namespace

TEST(Rng, DeterministicStreams) {
    CounterRng a(42, 3), b(42, 3), c(42, 4);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.next());
        vb.push_back(b.next());
        vc.push_back(c.next());
    }
    EXPECT_EQ(va, vb);
    EXPECT_NE(va, vc);

    CounterRng r(1, 0);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
    for (const int n : counts) EXPECT_NEAR(n, 10000, 500);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }

    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, r);
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(SVM, KernelValues) {
    const Eigen::VectorXd a = Eigen::Vector2d(1, 2), b = Eigen::Vector2d(0, 0);
    EXPECT_NEAR(rbf_kernel(a, b, 0.7), std::exp(-0.7 * 5), 1e-16);
    EXPECT_EQ(rbf_kernel(a, a, 0.7), 1.0);
    Eigen::MatrixXd x(2, 2);
    x << 1, 2, 0, 0;
    const Eigen::MatrixXd k = rbf_gram(x, x, 0.7);
    EXPECT_NEAR(k(0, 1), std::exp(-3.5), 1e-16);
    EXPECT_EQ(k(0, 1), k(1, 0));
}

TEST(SVM, SeparableCloudsAreLearnedExactly) {
    std::mt19937_64 rng(60);
    Eigen::MatrixXd x(60, 3);
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        const int c = i % 3;
        x.row(i) = (gaussian(rng, 3, 0.2) + Vec::Constant(3, 3.0 * c)).transpose();
        y.push_back(c);
    }
    const SVMModel m = svm_train(x, y);
    EXPECT_EQ(m.pairs.size(), 3u);
    EXPECT_EQ(accuracy(svm_predict(m, x), y), 1.0);
    check_dual_feasible(m);
}

TEST(SVM, XorNeedsTheKernel) {
    std::mt19937_64 rng(61);
    Eigen::MatrixXd x;
    std::vector<int> y;
    xor_layout(rng, 25, x, y);
    const SVMModel m = svm_train(x, y);
    EXPECT_EQ(accuracy(svm_predict(m, x), y), 1.0);
    check_dual_feasible(m);

    // Exhaustive check of linear separators: no line does better than 3/4.
    double best = 0.0;
    for (int a = 0; a < 720; ++a) {
        const double th = kPi * a / 720;
        const Eigen::Vector2d n(std::cos(th), std::sin(th));
        std::vector<double> proj(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) proj[static_cast<std::size_t>(i)] = x.row(i).dot(n);
        std::vector<double> cuts = proj;
        std::sort(cuts.begin(), cuts.end());
        cuts.push_back(cuts.back() + 1);
        for (const double c : cuts)
            for (const int side : {0, 1}) {
                int hit = 0;
                for (std::size_t i = 0; i < proj.size(); ++i) hit += ((proj[i] < c) == (side == 1)) == (y[i] == 1);
                best = std::max(best, static_cast<double>(hit) / proj.size());
            }
    }
    EXPECT_LE(best, 0.75);
}

TEST(SVM, DualObjectiveNeverDecreases) {
    std::mt19937_64 rng(62);
    Eigen::MatrixXd x(90, 4);
    std::vector<int> y;
    for (int i = 0; i < 90; ++i) {
        x.row(i) = gaussian(rng, 4).transpose();
        y.push_back(i < 50 ? 0 : (i < 75 ? 1 : 2));
    }
    SVMOptions o;
    o.record_objective = true;
    const SVMModel m = svm_train(x, y, o);
    for (const auto& p : m.pairs) {
        ASSERT_FALSE(p.dual_history.empty());
        for (std::size_t k = 1; k < p.dual_history.size(); ++k)
            EXPECT_GE(p.dual_history[k], p.dual_history[k - 1] - 1e-12);
    }
    check_dual_feasible(m);
    // Balanced weights: N / (classes * count).
    EXPECT_NEAR(m.class_weights[0], 90.0 / (3 * 50), 1e-15);
    EXPECT_NEAR(m.class_weights[2], 90.0 / (3 * 15), 1e-15);
    for (const auto& p : m.pairs)
        for (std::size_t i = 0; i < p.rows.size(); ++i) {
            const int c = p.y[i] > 0 ? p.positive : p.negative;
            EXPECT_NEAR(p.upper[i], 3.0 * m.class_weights[static_cast<std::size_t>(c)], 1e-15);
        }
}

TEST(SVM, PredictionsIgnoreTrainingOrder) {
    Eigen::MatrixXd x(6, 1);
    x << 0, 0.2, 0.4, 2, 2.2, 2.4;
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    Eigen::MatrixXd xr(6, 1);
    xr << 2.4, 0.2, 2, 0, 2.2, 0.4;
    const std::vector<int> yr{1, 0, 1, 0, 1, 0};
    Eigen::MatrixXd test(5, 1);
    test << -1, 0.9, 1.2, 1.3, 3;
    EXPECT_EQ(svm_predict(svm_train(x, y), test), svm_predict(svm_train(xr, yr), test));
}

TEST(SVM, RejectsSingleClass) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
    const std::vector<int> y(5, 1);
    try {
        (void)svm_train(x, y);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingleClassInput);
    }
}

TEST(BalancedAccuracy, Identities) {
    const std::vector<int> truth{0, 0, 1, 1, 1, 2, 2, 2, 2};
    EXPECT_EQ(balanced_accuracy(truth, truth), 1.0);
    const std::vector<int> constant(truth.size(), 1);
    EXPECT_NEAR(balanced_accuracy(constant, truth), 1.0 / 3, 1e-15);

    // Recalls 1/2, 3/4 and 1.
    const std::vector<int> t2{0, 0, 1, 1, 1, 1, 2, 2};
    const std::vector<int> p2{0, 1, 1, 1, 1, 0, 2, 2};
    EXPECT_NEAR(balanced_accuracy(p2, t2), 0.75, 1e-15);

    const std::vector<int> classes{0, 1, 2, 3};
    try {
        (void)balanced_accuracy(p2, t2, classes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
    }
}

TEST(BalancedAccuracy, RandomPredictorIsChance) {
    std::vector<int> truth;
    for (int i = 0; i < 90; ++i) truth.push_back(i < 50 ? 0 : (i < 75 ? 1 : 2));
    CounterRng rng(5, 0);
    double sum = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> guess;
        for (std::size_t i = 0; i < truth.size(); ++i) guess.push_back(static_cast<int>(rng.below(3)));
        sum += balanced_accuracy(guess, truth);
    }
    // Per-class recall is binomial(n_c, 1/3) / n_c.
    const double var = (1.0 / 9) * (2.0 / 9) * (1.0 / 50 + 1.0 / 25 + 1.0 / 15);
    const double sigma = std::sqrt(var / trials);
    EXPECT_NEAR(sum / trials, 1.0 / 3, 3 * sigma);
}

TEST(CrossValidation, StratifiedFolds) {
    std::vector<int> labels;
    for (int i = 0; i < 101; ++i) labels.push_back(i < 58 ? 0 : (i < 90 ? 1 : 2));
    CounterRng rng(9, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const auto folds = stratified_folds(labels, 3, rng);
        std::map<int, int> size;
        std::map<std::pair<int, int>, int> per;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ++size[folds[i]];
            ++per[{folds[i], labels[i]}];
        }
        int lo = 1000, hi = 0;
        for (const auto& [f, n] : size) {
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        EXPECT_LE(hi - lo, 1);
        const int counts[3] = {58, 32, 11};
        for (int f = 0; f < 3; ++f)
            for (int c = 0; c < 3; ++c) {
                const double expect = counts[c] * static_cast<double>(size[f]) / 101;
                EXPECT_LE(std::abs(per[{f, c}] - expect), 1.0 + 1e-12);
            }
    }
}

TEST(CrossValidation, SeededAndReproducible) {
    std::mt19937_64 g(63);
    Eigen::MatrixXd x(45, 3);
    std::vector<int> y;
    for (int i = 0; i < 45; ++i) {
        y.push_back(i % 3);
        x.row(i) = (gaussian(g, 3) + Vec::Constant(3, 0.8 * (i % 3))).transpose();
    }
    CVOptions o;
    o.repetitions = 20;
    o.seed = 42;
    const CVResult a = repeated_cv(x, y, o), b = repeated_cv(x, y, o);
    ASSERT_EQ(a.scores.size(), 60u);
    std::ostringstream sa, sb;
    write_cv_csv(sa, "sasaki", a, true);
    write_cv_csv(sb, "sasaki", b, true);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), "repetition,fold,method,accuracy");
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        EXPECT_EQ(a.scores[i].repetition, static_cast<int>(i / 3));
        EXPECT_EQ(a.scores[i].fold, static_cast<int>(i % 3));
    }
    o.seed = 43;
    EXPECT_NE(repeated_cv(x, y, o).summary.mean, a.summary.mean);

    // Standardizing uses a separate path; it must be reproducible too.
    o.standardize = true;
    EXPECT_EQ(repeated_cv(x, y, o).summary.mean, repeated_cv(x, y, o).summary.mean);

    std::vector<int> tiny = y;
    tiny[0] = 7;
    try {
        (void)repeated_cv(x, tiny, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ClassTooSmall);
    }
}

TEST(CrossValidation, Summary) {
    const Summary s = summarize({4, 1, 3, 2, 5});
    EXPECT_EQ(s.mean, 3);
    EXPECT_NEAR(s.std, std::sqrt(2.5), 1e-15);
    EXPECT_EQ(s.min, 1);
    EXPECT_EQ(s.q1, 2);
    EXPECT_EQ(s.median, 3);
    EXPECT_EQ(s.q3, 4);
    EXPECT_EQ(s.max, 5);
    EXPECT_EQ(s.count, 5u);
}

TEST(L2Baseline, IdenticalCurvesHaveNoVariance) {
    const Manifold s2 = Manifold::sphere();
    std::vector<Point> curve;
    for (int k = 0; k < 32; ++k) curve.push_back(s2.project(vec3(1, 0.01 * k, 0.2)));
    const std::vector<std::vector<Point>> curves(5, curve);
    const L2Baseline b = l2_baseline_pga(s2, curves, 3);
    EXPECT_LT(b.pca.total_variance, 1e-20);
    EXPECT_EQ(b.pca.rank, 0);
}

TEST(L2Baseline, FlatCaseIsClassicalPCA) {
    const Manifold r2 = Manifold::euclidean(2);
    std::mt19937_64 g(64);
    const int N = 15, len = 32;
    std::vector<std::vector<Point>> curves;
    Eigen::MatrixXd X(N, 2 * len);
    for (int j = 0; j < N; ++j) {
        std::vector<Point> c;
        const Vec shift = gaussian(g, 2), bend = gaussian(g, 2);
        for (int k = 0; k < len; ++k) {
            const double t = k / 31.0;
            c.push_back(Point{shift + t * t * bend + gaussian(g, 2, 0.01)});
            X.block(j, 2 * k, 1, 2) = c.back().coords.transpose();
        }
        curves.push_back(c);
    }
    const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(centered.transpose() * centered / N);
    const L2Baseline b = l2_baseline_pga(r2, curves, 5);
    for (int k = 0; k < 5; ++k)
        EXPECT_NEAR(b.pca.variances[k], ref.eigenvalues()[2 * len - 1 - k], 1e-8);
}
