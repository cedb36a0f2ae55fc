#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "splinefold/bezier.hpp"
#include "splinefold/tangent_bundle.hpp"

namespace splinefold {

/// Image of a spline under F: one bundle point (B(i), B'(i)/3) per join,
/// L+1 in total.
struct SplineCode {
    std::vector<BundlePoint> anchors;

    [[nodiscard]] int segments() const noexcept { return static_cast<int>(anchors.size()) - 1; }
};

/// Tangent vector at a code, one bundle tangent per anchor.
struct SplineCodeTangent {
    std::vector<BundleTangent> components;
};

[[nodiscard]] SplineCode encode(const Manifold& m, const CubicSpline& b);
/// Controls (p_i, exp(p_i, u_i), exp(p_{i+1}, -u_{i+1}), p_{i+1}). Fibers
/// must stay below a third of the injectivity guard.
[[nodiscard]] CubicSpline decode(const Manifold& m, const SplineCode& c);

struct PGAModel {
    SplineCode mean;
    /// Orthonormal under the pullback metric; rank deficient modes are zero.
    std::vector<SplineCodeTangent> directions;
    Eigen::VectorXd variances;
    /// samples x modes
    Eigen::MatrixXd scores;
    /// (1/N) sum_j |log(mean, code_j)|^2
    double total_variance = 0.0;
    int rank = 0;
    bool rank_deficient = false;
};

/// The space of L-segment cubic splines with the pullback of the product
/// Sasaki metric. Everything is computed per anchor in (TM)^{L+1}.
class Bezierfold {
public:
    explicit Bezierfold(TangentBundle bundle) : bundle_(std::move(bundle)) {}

    [[nodiscard]] const TangentBundle& bundle() const noexcept { return bundle_; }
    [[nodiscard]] const Manifold& base() const noexcept { return bundle_.base(); }

    [[nodiscard]] double inner(const SplineCode& at, const SplineCodeTangent& x,
                               const SplineCodeTangent& y) const;
    [[nodiscard]] double norm(const SplineCode& at, const SplineCodeTangent& x) const;

    /// K+1 codes along the product discrete geodesic.
    [[nodiscard]] std::vector<SplineCode> geodesic(const SplineCode& a, const SplineCode& b) const;
    [[nodiscard]] SplineCodeTangent log(const SplineCode& a, const SplineCode& b) const;
    [[nodiscard]] SplineCode exp(const SplineCode& a, const SplineCodeTangent& x) const;
    [[nodiscard]] double dist(const SplineCode& a, const SplineCode& b) const;
    [[nodiscard]] SplineCode mean(std::span<const SplineCode> codes) const;

    [[nodiscard]] SplineCodeTangent zero(const SplineCode& at) const;
    /// sum_j weights[j] x_j, all x_j at the same code.
    [[nodiscard]] SplineCodeTangent combine(const SplineCode& at,
                                            std::span<const SplineCodeTangent> xs,
                                            std::span<const double> weights) const;
    /// Stacked (h_0, v_0, ..., h_L, v_L) embedding coordinates; the pullback
    /// inner product is the dot product of these.
    [[nodiscard]] Eigen::VectorXd stack(const SplineCodeTangent& x) const;

    [[nodiscard]] PGAModel pga(std::span<const SplineCode> codes, int modes) const;

private:
    void check_shape(const SplineCode& a, const SplineCode& b) const;

    TangentBundle bundle_;
};

/// One row per sample: id,label,score_1..score_m. `labels` may be empty.
void write_pga_scores(std::ostream& out, const Eigen::MatrixXd& scores,
                      std::span<const std::string> ids, std::span<const std::string> labels);
/// JSON sidecar with variances, total variance and rank.
void write_pga_sidecar(std::ostream& out, const Eigen::VectorXd& variances, double total_variance,
                       int rank, bool rank_deficient);

}  // namespace splinefold
