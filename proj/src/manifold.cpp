#include "splinefold/manifold.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace splinefold {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

}  // namespace

bool same_point(const Vec& a, const Vec& b, double tol) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

Manifold Manifold::sphere(double injectivity_guard) {
    if (!(injectivity_guard > 0.0))
        throw Error(ErrorKind::InvalidArgument, "injectivity guard must be positive");
    return Manifold(Kind::Sphere2, 3, injectivity_guard);
}

Manifold Manifold::euclidean(int n) {
    if (n < 1 || n > kMaxAmbientDim)
        throw Error(ErrorKind::InvalidArgument,
                    "euclidean dimension must lie in [1, " + std::to_string(kMaxAmbientDim) + "]");
    return Manifold(Kind::Euclidean, n, std::numeric_limits<double>::infinity());
}

void Manifold::check_size(const Vec& v) const {
    if (v.size() != ambient_)
        throw Error(ErrorKind::InvalidArgument,
                    "expected " + std::to_string(ambient_) + " coordinates, got " +
                        std::to_string(v.size()));
}

Point Manifold::point(const Vec& coords) const {
    check_size(coords);
    if (!coords.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite coordinates");
    if (is_sphere() && std::abs(coords.norm() - 1.0) > kUnitTolerance)
        throw Error(ErrorKind::InvalidArgument, "sphere point is not a unit vector");
    return Point{coords};
}

Point Manifold::project(const Vec& coords) const {
    check_size(coords);
    if (!is_sphere()) return Point{coords};
    const double n = coords.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(ErrorKind::InvalidArgument, "cannot project the origin onto the sphere");
    return Point{coords / n};
}

Tangent Manifold::tangent(const Point& foot, const Vec& vec) const {
    check_size(vec);
    if (is_sphere() && std::abs(foot.coords.dot(vec)) > kUnitTolerance * std::max(1.0, vec.norm()))
        throw Error(ErrorKind::InvalidArgument, "vector is not tangent at its foot point");
    return Tangent{foot, vec};
}

Vec Manifold::project_tangent(const Vec& foot, const Vec& vec) const {
    if (!is_sphere()) return vec;
    return vec - foot.dot(vec) * foot;
}

void Manifold::check_foot(const Point& expected, const Point& actual) const {
    if (!same_point(expected.coords, actual.coords))
        throw Error(ErrorKind::FootMismatch, "tangent vector is attached to a different point");
}

Vec Manifold::exp_at(const Vec& p, const Vec& v) const {
    if (!is_sphere()) return p + v;
    const double n = v.norm();
    if (n < 1e-12) return p;
    if (n >= guard_)
        throw Error(ErrorKind::OutOfInjectivityRadius,
                    "shooting length " + std::to_string(n) + " exceeds the injectivity guard");
    Vec out = std::cos(n) * p + (std::sin(n) / n) * v;
    return out / out.norm();
}

Vec Manifold::log_at(const Vec& p, const Vec& q) const {
    if (!is_sphere()) return q - p;
    if (p == q) return Vec::Zero(3);
    const double c = p.dot(q);
    if (1.0 + c < kAntipodalThreshold)
        throw Error(ErrorKind::AntipodalPoints, "logarithm of (nearly) antipodal points");
    Vec w = q - c * p;
    const double n = w.norm();
    if (n == 0.0) return Vec::Zero(3);
    return (std::atan2(n, c) / n) * w;
}

double Manifold::dist_at(const Vec& p, const Vec& q) const {
    if (!is_sphere()) return (q - p).norm();
    const Eigen::Vector3d a = p, b = q;
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

Vec Manifold::transport_at(const Vec& p, const Vec& q, const Vec& v) const {
    if (!is_sphere() || p == q) return v;
    const double d = 1.0 + p.dot(q);
    if (d < kAntipodalThreshold)
        throw Error(ErrorKind::AntipodalPoints, "parallel transport between antipodal points");
    return v - (q.dot(v) / d) * (p + q);
}

Vec Manifold::curvature_at(const Vec& /*p*/, const Vec& x, const Vec& y, const Vec& z) const {
    if (!is_sphere()) return Vec::Zero(ambient_);
    return y.dot(z) * x - x.dot(z) * y;
}

Vec Manifold::geodesic_at(const Vec& p, const Vec& q, double t) const {
    if (t == 0.0) return p;
    if (t == 1.0) return q;
    return exp_at(p, t * log_at(p, q));
}

Vec Manifold::normal_term_at(const Vec& p, const Vec& x, const Vec& v) const {
    if (!is_sphere()) return Vec::Zero(ambient_);
    return -x.dot(v) * p;
}

TransportResidualGradient Manifold::transport_residual_gradient(const Vec& p, const Vec& q,
                                                                const Vec& u,
                                                                const Vec& r) const {
    TransportResidualGradient g;
    if (!is_sphere()) {
        const Vec e = u - r;
        g.value = e.squaredNorm();
        g.d_from = Vec::Zero(ambient_);
        g.d_to = Vec::Zero(ambient_);
        g.d_vec = 2.0 * e;
        g.d_target = -2.0 * e;
        return g;
    }
    const double d = 1.0 + p.dot(q);
    if (d < kAntipodalThreshold)
        throw Error(ErrorKind::AntipodalPoints, "parallel transport between antipodal points");
    const Vec pq = p + q;
    const double c = q.dot(u) / d;
    const Vec e = u - c * pq - r;
    const double a = e.dot(pq);
    g.value = e.squaredNorm();
    g.d_vec = 2.0 * (e - (a / d) * q);
    g.d_from = 2.0 * (-c * e + (a * c / d) * q);
    g.d_to = 2.0 * (-c * e - (a / d) * u + (a * c / d) * p);
    g.d_target = -2.0 * e;
    return g;
}

Point Manifold::exp(const Point& p, const Tangent& v) const {
    check_foot(p, v.foot);
    check_size(v.vec);
    return Point{exp_at(p.coords, v.vec)};
}

Tangent Manifold::log(const Point& p, const Point& q) const {
    return Tangent{p, log_at(p.coords, q.coords)};
}

double Manifold::dist(const Point& p, const Point& q) const {
    return dist_at(p.coords, q.coords);
}

double Manifold::inner(const Point& p, const Tangent& v, const Tangent& w) const {
    check_foot(p, v.foot);
    check_foot(p, w.foot);
    return v.vec.dot(w.vec);
}

Tangent Manifold::parallel_transport(const Point& p, const Point& q, const Tangent& v) const {
    check_foot(p, v.foot);
    return Tangent{q, transport_at(p.coords, q.coords, v.vec)};
}

Tangent Manifold::curvature(const Point& p, const Tangent& x, const Tangent& y,
                            const Tangent& z) const {
    check_foot(p, x.foot);
    check_foot(p, y.foot);
    check_foot(p, z.foot);
    return Tangent{p, curvature_at(p.coords, x.vec, y.vec, z.vec)};
}

Point Manifold::geodesic(const Point& p, const Point& q, double t) const {
    return Point{geodesic_at(p.coords, q.coords, t)};
}

std::vector<Vec> Manifold::tangent_basis(const Vec& p) const {
    std::vector<Vec> basis;
    if (!is_sphere()) {
        for (int i = 0; i < ambient_; ++i) basis.push_back(Vec::Unit(ambient_, i));
        return basis;
    }
    int axis = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(p[i]) < std::abs(p[axis])) axis = i;
    Vec e1 = Vec::Unit(3, axis);
    e1 -= p.dot(e1) * p;
    e1.normalize();
    const Eigen::Vector3d a = p, b = e1;
    Vec e2 = a.cross(b);
    basis.push_back(e1);
    basis.push_back(e2);
    return basis;
}

Point Manifold::frechet_mean(std::span<const Point> points, const FrechetOptions& options) const {
    std::vector<double> w(points.size(), points.empty() ? 0.0 : 1.0 / points.size());
    return frechet_mean(points, w, options);
}

Point Manifold::frechet_mean(std::span<const Point> points, std::span<const double> weights,
                             const FrechetOptions& options) const {
    if (points.empty()) throw Error(ErrorKind::InvalidArgument, "Frechet mean of no points");
    if (points.size() != weights.size())
        throw Error(ErrorKind::InvalidArgument, "points and weights differ in length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidArgument, "weights must sum to one");

    Vec mean = Vec::Zero(ambient_);
    for (std::size_t i = 0; i < points.size(); ++i) mean += weights[i] * points[i].coords;
    if (!is_sphere()) return Point{mean};

    const double n = mean.norm();
    if (n < 1e-9)
        throw Error(ErrorKind::SpreadTooLarge, "points do not lie in a common hemisphere");
    mean /= n;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (dist_at(mean, points[i].coords) >= kHalfPi)
            throw Error(ErrorKind::SpreadTooLarge,
                        "point lies outside the pi/2 ball around the initial estimate", i);

    for (int it = 0; it < options.max_iterations; ++it) {
        Vec step = Vec::Zero(3);
        for (std::size_t i = 0; i < points.size(); ++i)
            step += weights[i] * log_at(mean, points[i].coords);
        mean = exp_at(mean, step);
        if (step.norm() < options.tolerance) return Point{mean};
    }
    throw Error(ErrorKind::NoConvergence, "Frechet mean iteration did not converge");
}

}  // namespace splinefold
