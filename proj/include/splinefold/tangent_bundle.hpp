#pragma once

#include <span>
#include <vector>

#include "splinefold/manifold.hpp"

namespace splinefold {

/// An element (p, u) of TM.
struct BundlePoint {
    Point foot;
    Vec fiber;

    [[nodiscard]] Tangent fiber_tangent() const { return Tangent{foot, fiber}; }
};

/// A tangent vector (v, w) of TM at `at`, split into its horizontal and
/// vertical parts; both are identified with vectors in T_p M.
struct BundleTangent {
    BundlePoint at;
    Vec horizontal;
    Vec vertical;
};

/// Polygonal path of K segments in TM.
struct DiscretePath {
    std::vector<BundlePoint> nodes;

    [[nodiscard]] int segments() const { return static_cast<int>(nodes.size()) - 1; }
};

/// How the logarithm is read off a discrete geodesic.
///  - DiscreteLegendre: minus one half of the gradient of the first segment's
///    energy with respect to its start node. Second-order accurate in 1/K.
///  - FirstDifference: (K log(p0, p1), K (P u1 - u0)). First-order accurate;
///    kept for comparison.
/// Both coincide in flat space and in their vertical part.
enum class LogReadout { DiscreteLegendre, FirstDifference };

struct SasakiOptions {
    /// Segments of the discrete geodesic and RK4 steps of the shooting.
    int segments = 10;
    LogReadout readout = LogReadout::DiscreteLegendre;
    double gradient_tolerance = 1e-8;
    int max_iterations = 2000;
    double mean_tolerance = 1e-7;
    int mean_max_iterations = 100;
    /// Record the energy after every descent step.
    bool record_energy = false;
};

struct GeodesicSolve {
    DiscretePath path;
    int iterations = 0;
    double gradient_norm = 0.0;
    double energy = 0.0;
    std::vector<double> energy_history;
};

/// The Sasaki metric on TM over a base manifold.
///
/// Geodesics between two bundle points are computed as minimizers of the
/// discrete path energy
///
///   E = K * sum_k [ d(p_{k-1}, p_k)^2 + |P_{p_{k-1} -> p_k} u_{k-1} - u_k|^2 ]
///
/// over the interior nodes, by Riemannian gradient descent with Armijo
/// backtracking. The descent direction is the gradient smoothed by the
/// inverse of the flat-space Hessian (a tridiagonal solve along the path),
/// which keeps the iteration count independent of K.
///
/// The exponential map integrates the geodesic equations
///   nabla_v v = -R(u, w) v,  nabla_v w = 0
/// with classical RK4 in the embedding.
class TangentBundle {
public:
    explicit TangentBundle(Manifold base, SasakiOptions options = {});

    [[nodiscard]] const Manifold& base() const noexcept { return base_; }
    [[nodiscard]] const SasakiOptions& options() const noexcept { return options_; }

    /// Validated construction of a bundle point.
    [[nodiscard]] BundlePoint point(const Point& foot, const Vec& fiber) const;
    [[nodiscard]] BundleTangent tangent(const BundlePoint& at, const Vec& horizontal,
                                        const Vec& vertical) const;
    [[nodiscard]] BundleTangent zero_tangent(const BundlePoint& at) const;

    [[nodiscard]] double inner(const BundlePoint& at, const BundleTangent& a,
                               const BundleTangent& b) const;
    [[nodiscard]] double norm(const BundleTangent& a) const;

    [[nodiscard]] double path_energy(const DiscretePath& path) const;
    /// Sasaki gradient of `path_energy` with respect to every node.
    [[nodiscard]] std::vector<BundleTangent> energy_gradient(const DiscretePath& path) const;
    [[nodiscard]] GeodesicSolve geodesic_solve(const BundlePoint& a, const BundlePoint& b,
                                               int segments) const;
    [[nodiscard]] DiscretePath geodesic(const BundlePoint& a, const BundlePoint& b,
                                        int segments) const;
    [[nodiscard]] DiscretePath geodesic(const BundlePoint& a, const BundlePoint& b) const {
        return geodesic(a, b, options_.segments);
    }

    [[nodiscard]] BundleTangent log(const BundlePoint& a, const BundlePoint& b) const;
    /// Initial velocity of a discrete geodesic, read off its first segment.
    [[nodiscard]] BundleTangent initial_velocity(const DiscretePath& path) const;

    [[nodiscard]] BundlePoint exp(const BundlePoint& a, const BundleTangent& t,
                                  int steps) const;
    [[nodiscard]] BundlePoint exp(const BundlePoint& a, const BundleTangent& t) const {
        return exp(a, t, options_.segments);
    }

    [[nodiscard]] BundlePoint mean(std::span<const BundlePoint> points) const;

    /// Sasaki-metric distance, the square root of the minimal discrete energy.
    [[nodiscard]] double dist(const BundlePoint& a, const BundlePoint& b) const;

    /// Moves `at` along a tangent direction: the foot follows the base
    /// geodesic carrying the fiber parallel, then the vertical part is added.
    [[nodiscard]] BundlePoint retract(const BundlePoint& at, const Vec& horizontal,
                                      const Vec& vertical) const;

private:
    void check_at(const BundlePoint& expected, const BundlePoint& actual) const;

    Manifold base_;
    SasakiOptions options_;
};

}  // namespace splinefold
