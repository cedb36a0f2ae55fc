#pragma once

#include <cmath>
#include <random>

#include "splinefold/manifold.hpp"
#include "splinefold/tangent_bundle.hpp"

namespace splinefold::testing {

inline constexpr double kPi = 3.141592653589793;

inline Vec vec3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

inline Vec vecn(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (const double x : xs) v[i++] = x;
    return v;
}

inline Vec gaussian(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

inline Point random_point(const Manifold& m, std::mt19937_64& rng) {
    return m.project(gaussian(rng, m.ambient_dim()));
}

/// Tangent at p with norm at most `radius` (uniform length).
inline Tangent random_tangent(const Manifold& m, const Point& p, std::mt19937_64& rng,
                              double radius) {
    Vec v = m.project_tangent(p.coords, gaussian(rng, m.ambient_dim()));
    std::uniform_real_distribution<double> u(0.0, radius);
    if (v.norm() > 0) v *= u(rng) / v.norm();
    return Tangent{p, v};
}

inline Point near(const Manifold& m, const Point& p, std::mt19937_64& rng, double radius) {
    return m.exp(p, random_tangent(m, p, rng, radius));
}

inline BundlePoint random_bundle_point(const Manifold& m, std::mt19937_64& rng,
                                       double fiber_radius) {
    const Point p = random_point(m, rng);
    return BundlePoint{p, random_tangent(m, p, rng, fiber_radius).vec};
}

}  // namespace splinefold::testing
