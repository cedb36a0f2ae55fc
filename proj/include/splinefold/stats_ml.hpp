#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "splinefold/manifold.hpp"
#include "splinefold/pca.hpp"

namespace splinefold {

/// Counter-based generator: output n of stream s is a pure function of
/// (seed, s, n), so parallel streams need no shared state and every draw is
/// reproducible across platforms.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next();
    /// Uniform integer in [0, n), n > 0, without modulo bias.
    std::uint64_t below(std::uint64_t n);
    double uniform();

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

/// Fisher-Yates with `CounterRng::below`.
template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

struct SVMOptions {
    double gamma = 0.7;
    double C = 3.0;
    /// Stop when the maximal KKT violation m(a) - M(a) drops below this.
    double tolerance = 1e-3;
    long max_iterations = 100000;
    /// Class weight N / (n_classes * count(c)) multiplies C.
    bool balanced = true;
    /// Keep the dual objective after every SMO step.
    bool record_objective = false;
};

/// One binary subproblem: `positive` (y = +1) against `negative`.
struct BinarySVM {
    int positive = 0;
    int negative = 0;
    /// Training rows of the two classes, in training order.
    std::vector<std::size_t> rows;
    std::vector<double> y;
    std::vector<double> alpha;
    std::vector<double> upper;
    double rho = 0.0;
    long iterations = 0;
    /// Dual objective sum(a) - 1/2 a^T Q a, maximized.
    double dual_objective = 0.0;
    std::vector<double> dual_history;

    /// Violation of sum(alpha_i y_i) = 0.
    [[nodiscard]] double equality_residual() const;
};

/// One-vs-one RBF support vector classifier.
struct SVMModel {
    SVMOptions options;
    std::vector<int> classes;
    std::vector<double> class_weights;
    std::vector<BinarySVM> pairs;
    /// Training features; empty for models trained from a kernel matrix.
    Eigen::MatrixXd train;
};

[[nodiscard]] double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);
/// K(i, j) = rbf(rows i of a, rows j of b).
[[nodiscard]] Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       double gamma);

/// Features are rows of `x`.
[[nodiscard]] SVMModel svm_train(const Eigen::MatrixXd& x, std::span<const int> labels,
                                 const SVMOptions& options = {});
[[nodiscard]] std::vector<int> svm_predict(const SVMModel& model, const Eigen::MatrixXd& x);

/// Same as above from a precomputed training kernel (train x train) and
/// test kernel (test x train).
[[nodiscard]] SVMModel svm_train_kernel(const Eigen::MatrixXd& k, std::span<const int> labels,
                                        const SVMOptions& options = {});
[[nodiscard]] std::vector<int> svm_predict_kernel(const SVMModel& model, const Eigen::MatrixXd& k);
/// Decision value of pair p for one kernel row (test sample against training rows).
[[nodiscard]] double decision_value(const BinarySVM& pair, const Eigen::VectorXd& kernel_row);

/// Mean per-class recall. `classes` lists the classes to score; empty means
/// the classes present in `truth`. A listed class without true samples is
/// an EmptyClass error.
[[nodiscard]] double balanced_accuracy(std::span<const int> predicted, std::span<const int> truth,
                                       std::span<const int> classes = {});

struct CVOptions {
    int folds = 3;
    int repetitions = 1000;
    std::uint64_t seed = 0;
    SVMOptions svm;
    /// z-score features with the training fold's mean and deviation.
    bool standardize = false;
};

struct FoldScore {
    int repetition = 0;
    int fold = 0;
    double accuracy = 0.0;
};

struct Summary {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

[[nodiscard]] Summary summarize(std::vector<double> values);

struct CVResult {
    std::vector<FoldScore> scores;  // ordered by (repetition, fold)
    Summary summary;
};

/// Stratified fold assignment for one repetition: each class is shuffled
/// and dealt round-robin, continuing the deal where the previous class
/// stopped. Returns the fold of every sample.
[[nodiscard]] std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                                CounterRng& rng);

[[nodiscard]] CVResult repeated_cv(const Eigen::MatrixXd& x, std::span<const int> labels,
                                   const CVOptions& options);

/// Rows (repetition, fold, method, accuracy).
void write_cv_csv(std::ostream& out, const std::string& method, const CVResult& result,
                  bool header);

/// Tangent PCA of sampled curves as points of the product manifold M^n:
/// per-index Frechet means, logs stacked, product metric.
struct L2Baseline {
    std::vector<Point> mean;
    TangentPCA pca;
};

[[nodiscard]] L2Baseline l2_baseline_pga(const Manifold& m,
                                         std::span<const std::vector<Point>> curves, int modes);

}  // namespace splinefold
