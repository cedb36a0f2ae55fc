#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "splinefold/error.hpp"

namespace splinefold {

/// Embedded coordinates of points and tangent vectors. Stack storage, at
/// most 8 ambient dimensions.
inline constexpr int kMaxAmbientDim = 8;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbientDim, 1>;

/// A point of the base manifold in embedding coordinates. On the sphere the
/// coordinates are a unit vector; `Manifold::point` enforces that.
struct Point {
    Vec coords;
};

/// A tangent vector together with the point it is attached to.
struct Tangent {
    Point foot;
    Vec vec;
};

/// Partial gradients of the extension of (p, q, u, r) -> |P_{p->q} u - r|^2
/// to the ambient space, P being parallel transport along the connecting
/// geodesic. Used by first-order solvers on the tangent bundle.
struct TransportResidualGradient {
    double value = 0.0;
    Vec d_from;
    Vec d_to;
    Vec d_vec;
    Vec d_target;
};

struct FrechetOptions {
    double tolerance = 1e-10;
    int max_iterations = 200;
};

/// Riemannian primitives for the unit sphere S^2 (embedded in R^3) and flat
/// R^n. All members are const and the object is a cheap value type.
///
/// Checked entry points take `Point` / `Tangent` and validate feet and
/// radii; the `*_at` variants work on raw coordinates and trust the caller.
class Manifold {
public:
    enum class Kind { Sphere2, Euclidean };

    static Manifold sphere(double injectivity_guard = kDefaultSphereGuard);
    static Manifold euclidean(int n);

    static constexpr double kDefaultSphereGuard = 3.141592653589793 - 1e-6;
    static constexpr double kUnitTolerance = 1e-12;
    static constexpr double kAntipodalThreshold = 1e-9;

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_sphere() const noexcept { return kind_ == Kind::Sphere2; }
    /// Size of the coordinate vectors.
    [[nodiscard]] int ambient_dim() const noexcept { return ambient_; }
    /// Intrinsic dimension n.
    [[nodiscard]] int dim() const noexcept { return is_sphere() ? 2 : ambient_; }
    [[nodiscard]] double injectivity_guard() const noexcept { return guard_; }

    /// Validated construction; throws InvalidArgument when off the manifold.
    [[nodiscard]] Point point(const Vec& coords) const;
    /// Nearest point (normalization on the sphere).
    [[nodiscard]] Point project(const Vec& coords) const;
    [[nodiscard]] Tangent tangent(const Point& foot, const Vec& vec) const;
    [[nodiscard]] Vec project_tangent(const Vec& foot, const Vec& vec) const;
    [[nodiscard]] Vec zero() const { return Vec::Zero(ambient_); }

    [[nodiscard]] Point exp(const Point& p, const Tangent& v) const;
    [[nodiscard]] Tangent log(const Point& p, const Point& q) const;
    [[nodiscard]] double dist(const Point& p, const Point& q) const;
    [[nodiscard]] double inner(const Point& p, const Tangent& v, const Tangent& w) const;
    [[nodiscard]] Tangent parallel_transport(const Point& p, const Point& q,
                                             const Tangent& v) const;
    /// R(x, y) z with the convention R(x, y) z = <y, z> x - <x, z> y on S^2.
    [[nodiscard]] Tangent curvature(const Point& p, const Tangent& x, const Tangent& y,
                                    const Tangent& z) const;
    /// gamma(t; p, q) = exp_p(t log_p q). Any real t is accepted as long as
    /// the shooting vector stays inside the guard.
    [[nodiscard]] Point geodesic(const Point& p, const Point& q, double t) const;

    [[nodiscard]] Point frechet_mean(std::span<const Point> points,
                                     std::span<const double> weights,
                                     const FrechetOptions& options = {}) const;
    [[nodiscard]] Point frechet_mean(std::span<const Point> points,
                                     const FrechetOptions& options = {}) const;

    /// Orthonormal basis of T_p M, `dim()` vectors.
    [[nodiscard]] std::vector<Vec> tangent_basis(const Vec& p) const;

    // Raw-coordinate kernels.
    [[nodiscard]] Vec exp_at(const Vec& p, const Vec& v) const;
    [[nodiscard]] Vec log_at(const Vec& p, const Vec& q) const;
    [[nodiscard]] double dist_at(const Vec& p, const Vec& q) const;
    [[nodiscard]] Vec transport_at(const Vec& p, const Vec& q, const Vec& v) const;
    [[nodiscard]] Vec curvature_at(const Vec& p, const Vec& x, const Vec& y,
                                   const Vec& z) const;
    [[nodiscard]] Vec geodesic_at(const Vec& p, const Vec& q, double t) const;
    /// Normal component of d/dt X along a curve with velocity v through p,
    /// for a tangent field X: ambient d/dt X = covariant derivative + this.
    [[nodiscard]] Vec normal_term_at(const Vec& p, const Vec& x, const Vec& v) const;
    [[nodiscard]] TransportResidualGradient transport_residual_gradient(
        const Vec& p, const Vec& q, const Vec& u, const Vec& r) const;

    /// Throws FootMismatch unless the two feet coincide within 1e-12.
    void check_foot(const Point& expected, const Point& actual) const;

private:
    Manifold(Kind kind, int ambient, double guard) : kind_(kind), ambient_(ambient), guard_(guard) {}

    void check_size(const Vec& v) const;

    Kind kind_;
    int ambient_;
    double guard_;
};

[[nodiscard]] bool same_point(const Vec& a, const Vec& b, double tol = Manifold::kUnitTolerance);

}  // namespace splinefold
