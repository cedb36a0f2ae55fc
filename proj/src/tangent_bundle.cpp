#include "splinefold/tangent_bundle.hpp"

#include <cmath>
#include <string>

#include "splinefold/parallel.hpp"

namespace splinefold {

namespace {

constexpr double kEnergyResolution = 1e-12;

// Working storage for the descent on interior nodes.
struct NodeState {
    std::vector<Vec> feet;
    std::vector<Vec> fibers;
};

double energy_of(const Manifold& m, const NodeState& s) {
    const std::size_t k = s.feet.size() - 1;
    double e = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
        const double d = m.dist_at(s.feet[j - 1], s.feet[j]);
        const Vec moved = m.transport_at(s.feet[j - 1], s.feet[j], s.fibers[j - 1]);
        e += d * d + (moved - s.fibers[j]).squaredNorm();
    }
    return static_cast<double>(k) * e;
}

// Sasaki gradient of the energy at every node (endpoints included, callers
// ignore them). Returns the norm over interior nodes.
double gradient_of(const Manifold& m, const NodeState& s, std::vector<Vec>& horizontal,
                   std::vector<Vec>& vertical) {
    const std::size_t k = s.feet.size() - 1;
    const int dim = m.ambient_dim();
    std::vector<Vec> riem(k + 1, Vec::Zero(dim));
    std::vector<Vec> amb(k + 1, Vec::Zero(dim));
    std::vector<Vec> fib(k + 1, Vec::Zero(dim));
    for (std::size_t j = 1; j <= k; ++j) {
        const Vec& p = s.feet[j - 1];
        const Vec& q = s.feet[j];
        riem[j - 1] -= 2.0 * m.log_at(p, q);
        riem[j] -= 2.0 * m.log_at(q, p);
        const TransportResidualGradient g =
            m.transport_residual_gradient(p, q, s.fibers[j - 1], s.fibers[j]);
        amb[j - 1] += g.d_from;
        amb[j] += g.d_to;
        fib[j - 1] += g.d_vec;
        fib[j] += g.d_target;
    }
    const double scale = static_cast<double>(k);
    double sq = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
        const Vec& p = s.feet[j];
        horizontal[j] = scale * (riem[j] + m.project_tangent(p, amb[j]));
        if (m.is_sphere()) horizontal[j] -= scale * fib[j].dot(p) * s.fibers[j];
        vertical[j] = scale * m.project_tangent(p, fib[j]);
        if (j > 0 && j < k) sq += horizontal[j].squaredNorm() + vertical[j].squaredNorm();
    }
    return std::sqrt(sq);
}

void step_nodes(const Manifold& m, const NodeState& from, const std::vector<Vec>& horizontal,
                const std::vector<Vec>& vertical, double alpha, NodeState& to) {
    const std::size_t k = from.feet.size() - 1;
    to.feet.front() = from.feet.front();
    to.fibers.front() = from.fibers.front();
    to.feet.back() = from.feet.back();
    to.fibers.back() = from.fibers.back();
    for (std::size_t j = 1; j < k; ++j) {
        const Vec p = m.exp_at(from.feet[j], -alpha * horizontal[j]);
        Vec u = m.transport_at(from.feet[j], p, from.fibers[j] - alpha * vertical[j]);
        to.feet[j] = p;
        to.fibers[j] = m.project_tangent(p, u);
    }
}

// Applies the inverse of the flat Hessian 2K tridiag(-1, 2, -1) over the
// interior nodes to the gradient, then projects back onto each tangent
// space. Exact Newton step in flat space; a good preconditioner near it.
void precondition(const Manifold& m, const NodeState& s, const std::vector<Vec>& gh,
                  const std::vector<Vec>& gv, std::vector<Vec>& dh, std::vector<Vec>& dv) {
    const std::size_t k = s.feet.size() - 1;
    const std::size_t n = k - 1;
    const double scale = 2.0 * static_cast<double>(k);
    // Thomas algorithm; the off-diagonal is -1 and the diagonal 2.
    std::vector<double> c(n);
    std::vector<Vec> yh(n), yv(n);
    double denom = 2.0;
    c[0] = -1.0 / denom;
    yh[0] = gh[1] / denom;
    yv[0] = gv[1] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = 2.0 + c[i - 1];
        c[i] = -1.0 / denom;
        yh[i] = (gh[i + 1] + yh[i - 1]) / denom;
        yv[i] = (gv[i + 1] + yv[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        yh[i] -= c[i] * yh[i + 1];
        yv[i] -= c[i] * yv[i + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = s.feet[i + 1];
        dh[i + 1] = m.project_tangent(p, yh[i]) / scale;
        dv[i + 1] = m.project_tangent(p, yv[i]) / scale;
    }
}

DiscretePath to_path(const NodeState& s) {
    DiscretePath path;
    path.nodes.reserve(s.feet.size());
    for (std::size_t j = 0; j < s.feet.size(); ++j)
        path.nodes.push_back(BundlePoint{Point{s.feet[j]}, s.fibers[j]});
    return path;
}

}  // namespace

TangentBundle::TangentBundle(Manifold base, SasakiOptions options)
    : base_(base), options_(options) {
    if (options_.segments < 2)
        throw Error(ErrorKind::InvalidArgument, "discrete geodesics need at least 2 segments");
}

BundlePoint TangentBundle::point(const Point& foot, const Vec& fiber) const {
    const Point p = base_.point(foot.coords);
    return BundlePoint{p, base_.tangent(p, fiber).vec};
}

BundleTangent TangentBundle::tangent(const BundlePoint& at, const Vec& horizontal,
                                     const Vec& vertical) const {
    return BundleTangent{at, base_.tangent(at.foot, horizontal).vec,
                         base_.tangent(at.foot, vertical).vec};
}

BundleTangent TangentBundle::zero_tangent(const BundlePoint& at) const {
    return BundleTangent{at, base_.zero(), base_.zero()};
}

void TangentBundle::check_at(const BundlePoint& expected, const BundlePoint& actual) const {
    base_.check_foot(expected.foot, actual.foot);
    if (!same_point(expected.fiber, actual.fiber))
        throw Error(ErrorKind::FootMismatch, "bundle tangent attached to a different fiber");
}

double TangentBundle::inner(const BundlePoint& at, const BundleTangent& a,
                            const BundleTangent& b) const {
    check_at(at, a.at);
    check_at(at, b.at);
    return a.horizontal.dot(b.horizontal) + a.vertical.dot(b.vertical);
}

double TangentBundle::norm(const BundleTangent& a) const {
    return std::sqrt(a.horizontal.squaredNorm() + a.vertical.squaredNorm());
}

double TangentBundle::path_energy(const DiscretePath& path) const {
    if (path.segments() < 1) throw Error(ErrorKind::InvalidArgument, "path needs two nodes");
    NodeState s;
    for (const auto& n : path.nodes) {
        s.feet.push_back(n.foot.coords);
        s.fibers.push_back(n.fiber);
    }
    return energy_of(base_, s);
}

std::vector<BundleTangent> TangentBundle::energy_gradient(const DiscretePath& path) const {
    if (path.segments() < 1) throw Error(ErrorKind::InvalidArgument, "path needs two nodes");
    NodeState s;
    for (const auto& n : path.nodes) {
        s.feet.push_back(n.foot.coords);
        s.fibers.push_back(n.fiber);
    }
    std::vector<Vec> gh(s.feet.size()), gv(s.feet.size());
    gradient_of(base_, s, gh, gv);
    std::vector<BundleTangent> out;
    out.reserve(s.feet.size());
    for (std::size_t j = 0; j < s.feet.size(); ++j)
        out.push_back(BundleTangent{path.nodes[j], gh[j], gv[j]});
    return out;
}

BundlePoint TangentBundle::retract(const BundlePoint& at, const Vec& horizontal,
                                   const Vec& vertical) const {
    const Vec p = base_.exp_at(at.foot.coords, horizontal);
    const Vec u = base_.transport_at(at.foot.coords, p, at.fiber + vertical);
    return BundlePoint{Point{p}, base_.project_tangent(p, u)};
}

GeodesicSolve TangentBundle::geodesic_solve(const BundlePoint& a, const BundlePoint& b,
                                            int segments) const {
    if (segments < 2)
        throw Error(ErrorKind::InvalidArgument, "discrete geodesics need at least 2 segments");
    const std::size_t k = static_cast<std::size_t>(segments);
    const Manifold& m = base_;

    NodeState cur;
    cur.feet.resize(k + 1);
    cur.fibers.resize(k + 1);
    for (std::size_t j = 0; j <= k; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(k);
        const Vec p = m.geodesic_at(a.foot.coords, b.foot.coords, t);
        const Vec ua = m.transport_at(a.foot.coords, p, a.fiber);
        const Vec ub = m.transport_at(b.foot.coords, p, b.fiber);
        cur.feet[j] = p;
        cur.fibers[j] = m.project_tangent(p, (1.0 - t) * ua + t * ub);
    }
    cur.feet.front() = a.foot.coords;
    cur.fibers.front() = a.fiber;
    cur.feet.back() = b.foot.coords;
    cur.fibers.back() = b.fiber;

    NodeState trial = cur;
    std::vector<Vec> gh(k + 1), gv(k + 1), th(k + 1), tv(k + 1), dh(k + 1), dv(k + 1);

    GeodesicSolve out;
    double energy = energy_of(m, cur);
    double alpha = 1.0;
    constexpr double kArmijo = 1e-4;
    if (options_.record_energy) out.energy_history.push_back(energy);

    int it = 0;
    double gnorm = gradient_of(m, cur, gh, gv);
    for (; gnorm >= options_.gradient_tolerance && it < options_.max_iterations; ++it) {
        precondition(m, cur, gh, gv, dh, dv);
        double slope0 = 0.0;
        for (std::size_t j = 1; j < k; ++j) slope0 += gh[j].dot(dh[j]) + gv[j].dot(dv[j]);

        alpha = std::min(2.0 * alpha, 1.0);
        double next = energy;
        double next_gnorm = -1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60 && !accepted; ++halvings) {
            step_nodes(m, cur, dh, dv, alpha, trial);
            next = energy_of(m, trial);
            if (next <= energy - kArmijo * alpha * slope0) {
                accepted = true;
            } else if (std::abs(next - energy) <= kEnergyResolution * std::max(1.0, energy)) {
                // The change is below the resolution of the energy. Estimate
                // it from the slopes at both ends of the step (trapezoid rule).
                next_gnorm = gradient_of(m, trial, th, tv);
                double slope = 0.0;
                for (std::size_t j = 1; j < k; ++j) {
                    slope -= th[j].dot(m.transport_at(cur.feet[j], trial.feet[j], dh[j]));
                    slope -= tv[j].dot(m.transport_at(cur.feet[j], trial.feet[j], dv[j]));
                }
                accepted = slope <= (1.0 - 2.0 * kArmijo) * slope0;
            }
            if (!accepted) alpha *= 0.5;
        }
        if (!accepted) break;
        std::swap(cur, trial);
        energy = next;
        if (options_.record_energy) out.energy_history.push_back(next);
        if (next_gnorm >= 0.0) {
            std::swap(gh, th);
            std::swap(gv, tv);
            gnorm = next_gnorm;
        } else {
            gnorm = gradient_of(m, cur, gh, gv);
        }
    }
    if (gnorm >= options_.gradient_tolerance)
        throw Error(ErrorKind::NoConvergence,
                    "discrete Sasaki geodesic stopped after " + std::to_string(it) +
                        " iterations with gradient norm " + std::to_string(gnorm));
    out.path = to_path(cur);
    out.iterations = it;
    out.gradient_norm = gnorm;
    out.energy = energy;
    return out;
}

DiscretePath TangentBundle::geodesic(const BundlePoint& a, const BundlePoint& b,
                                     int segments) const {
    return geodesic_solve(a, b, segments).path;
}

BundleTangent TangentBundle::initial_velocity(const DiscretePath& path) const {
    if (path.segments() < 1) throw Error(ErrorKind::InvalidArgument, "path needs two nodes");
    const Manifold& m = base_;
    const double scale = static_cast<double>(path.segments());
    const BundlePoint& n0 = path.nodes[0];
    const BundlePoint& n1 = path.nodes[1];
    const Vec& p = n0.foot.coords;
    const Vec& q = n1.foot.coords;

    BundleTangent out{n0, scale * m.log_at(p, q),
                      scale * (m.transport_at(q, p, n1.fiber) - n0.fiber)};
    if (options_.readout == LogReadout::DiscreteLegendre && m.is_sphere()) {
        const TransportResidualGradient g = m.transport_residual_gradient(p, q, n0.fiber, n1.fiber);
        const Vec coupling = m.project_tangent(p, g.d_from) - g.d_vec.dot(p) * n0.fiber;
        out.horizontal -= 0.5 * scale * coupling;
    }
    out.horizontal = m.project_tangent(p, out.horizontal);
    out.vertical = m.project_tangent(p, out.vertical);
    return out;
}

BundleTangent TangentBundle::log(const BundlePoint& a, const BundlePoint& b) const {
    if (same_point(a.foot.coords, b.foot.coords, 0.0) && same_point(a.fiber, b.fiber, 0.0))
        return zero_tangent(a);
    return initial_velocity(geodesic(a, b, options_.segments));
}

double TangentBundle::dist(const BundlePoint& a, const BundlePoint& b) const {
    return std::sqrt(geodesic_solve(a, b, options_.segments).energy);
}

namespace {

struct Phase {
    Vec p, u, v, w;
};

Phase rhs(const Manifold& m, const Phase& s) {
    Phase d;
    d.p = s.v;
    d.u = s.w + m.normal_term_at(s.p, s.u, s.v);
    d.v = -m.curvature_at(s.p, s.u, s.w, s.v) + m.normal_term_at(s.p, s.v, s.v);
    d.w = m.normal_term_at(s.p, s.w, s.v);
    return d;
}

Phase axpy(const Phase& s, double h, const Phase& d) {
    return Phase{s.p + h * d.p, s.u + h * d.u, s.v + h * d.v, s.w + h * d.w};
}

}  // namespace

BundlePoint TangentBundle::exp(const BundlePoint& a, const BundleTangent& t, int steps) const {
    check_at(a, t.at);
    if (steps < 1) throw Error(ErrorKind::InvalidArgument, "exp needs at least one step");
    const Manifold& m = base_;
    if (!m.is_sphere())
        return BundlePoint{Point{a.foot.coords + t.horizontal}, a.fiber + t.vertical};
    if (t.horizontal.squaredNorm() == 0.0)
        return BundlePoint{a.foot, a.fiber + t.vertical};

    Phase s{a.foot.coords, a.fiber, t.horizontal, t.vertical};
    const double h = 1.0 / static_cast<double>(steps);
    for (int i = 0; i < steps; ++i) {
        const Phase k1 = rhs(m, s);
        const Phase k2 = rhs(m, axpy(s, 0.5 * h, k1));
        const Phase k3 = rhs(m, axpy(s, 0.5 * h, k2));
        const Phase k4 = rhs(m, axpy(s, h, k3));
        Phase next{s.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
                   s.u + (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
                   s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
                   s.w + (h / 6.0) * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
        const Vec p = next.p / next.p.norm();
        double correction = (p - next.p).norm();
        const Vec u = m.project_tangent(p, next.u);
        const Vec v = m.project_tangent(p, next.v);
        const Vec w = m.project_tangent(p, next.w);
        correction = std::max({correction, (u - next.u).norm(), (v - next.v).norm(),
                               (w - next.w).norm()});
        if (correction > 1e-3)
            throw Error(ErrorKind::StepUnstable,
                        "re-projection correction " + std::to_string(correction) +
                            " at step " + std::to_string(i));
        s = Phase{p, u, v, w};
    }
    return BundlePoint{Point{s.p}, s.u};
}

BundlePoint TangentBundle::mean(std::span<const BundlePoint> points) const {
    if (points.empty()) throw Error(ErrorKind::InvalidArgument, "mean of no bundle points");
    const Manifold& m = base_;
    std::vector<Point> feet;
    feet.reserve(points.size());
    for (const auto& b : points) feet.push_back(b.foot);
    const Point foot = m.frechet_mean(feet);
    Vec fiber = m.zero();
    for (const auto& b : points) fiber += m.transport_at(b.foot.coords, foot.coords, b.fiber);
    fiber /= static_cast<double>(points.size());
    BundlePoint current{foot, m.project_tangent(foot.coords, fiber)};
    if (points.size() == 1) return points.front();

    std::vector<BundleTangent> logs(points.size());
    for (int it = 0; it < options_.mean_max_iterations; ++it) {
        parallel_for(points.size(), [&](std::size_t i) { logs[i] = log(current, points[i]); });
        Vec h = m.zero(), v = m.zero();
        for (const auto& l : logs) {
            h += l.horizontal;
            v += l.vertical;
        }
        h /= static_cast<double>(points.size());
        v /= static_cast<double>(points.size());
        const double step = std::sqrt(h.squaredNorm() + v.squaredNorm());
        current = exp(current, BundleTangent{current, h, v});
        if (step < options_.mean_tolerance) return current;
    }
    throw Error(ErrorKind::NoConvergence, "Sasaki mean did not converge");
}

}  // namespace splinefold
