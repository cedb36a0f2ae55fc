#include "splinefold/regression.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace splinefold {

namespace {

using Controls = std::array<Vec, 4>;

Controls segment_controls(const Manifold& m, const SplineCode& c, std::size_t s) {
    const BundlePoint& a = c.anchors[s];
    const BundlePoint& b = c.anchors[s + 1];
    return {a.foot.coords, m.exp_at(a.foot.coords, a.fiber), m.exp_at(b.foot.coords, -b.fiber),
            b.foot.coords};
}

Vec cubic_at(const Manifold& m, const Controls& c, double t) {
    if (t == 0.0) return c[0];
    if (t == 1.0) return c[3];
    const Vec a = m.geodesic_at(c[0], c[1], t);
    const Vec b = m.geodesic_at(c[1], c[2], t);
    const Vec d = m.geodesic_at(c[2], c[3], t);
    return m.geodesic_at(m.geodesic_at(a, b, t), m.geodesic_at(b, d, t), t);
}

// Samples grouped by the segment that evaluates them.
struct Partition {
    std::vector<std::size_t> begin;  // L+1 offsets into the sample list
};

Partition partition(const TimedSamples& data, int l) {
    Partition p;
    p.begin.assign(static_cast<std::size_t>(l) + 1, data.size());
    std::size_t i = 0;
    for (int s = 0; s < l; ++s) {
        p.begin[s] = i;
        while (i < data.size() && (data.times[i] < s + 1 || s == l - 1)) ++i;
    }
    p.begin[l] = data.size();
    return p;
}

double segment_cost(const Manifold& m, const SplineCode& c, const TimedSamples& data,
                    const Partition& part, std::size_t s) {
    const Controls ctl = segment_controls(m, c, s);
    double sum = 0.0;
    for (std::size_t i = part.begin[s]; i < part.begin[s + 1]; ++i) {
        const double d =
            m.dist_at(cubic_at(m, ctl, data.times[i] - static_cast<double>(s)), data.points[i].coords);
        sum += d * d;
    }
    return sum;
}

double total_cost(const Manifold& m, const SplineCode& c, const TimedSamples& data,
                  const Partition& part) {
    double sum = 0.0;
    for (std::size_t s = 0; s + 1 < c.anchors.size(); ++s) sum += segment_cost(m, c, data, part, s);
    return sum / static_cast<double>(data.size());
}

// Cost of the segments touching anchor i.
double local_cost(const Manifold& m, const SplineCode& c, const TimedSamples& data,
                  const Partition& part, std::size_t i) {
    double sum = 0.0;
    if (i > 0) sum += segment_cost(m, c, data, part, i - 1);
    if (i + 1 < c.anchors.size()) sum += segment_cost(m, c, data, part, i);
    return sum;
}

struct Gradient {
    std::vector<Vec> feet;
    std::vector<Vec> fibers;
    double norm = 0.0;
};

Gradient fd_gradient(const Manifold& m, const SplineCode& c, const TimedSamples& data,
                     const Partition& part, double h) {
    const double n = static_cast<double>(data.size());
    Gradient g;
    SplineCode work = c;
    double sq = 0.0;
    for (std::size_t i = 0; i < c.anchors.size(); ++i) {
        const BundlePoint& a = c.anchors[i];
        Vec gf = m.zero(), gu = m.zero();
        for (const Vec& e : m.tangent_basis(a.foot.coords)) {
            double plus = 0.0, minus = 0.0;
            for (double sign : {1.0, -1.0}) {
                const Vec p = m.exp_at(a.foot.coords, sign * h * e);
                work.anchors[i] = BundlePoint{Point{p}, m.transport_at(a.foot.coords, p, a.fiber)};
                (sign > 0 ? plus : minus) = local_cost(m, work, data, part, i);
            }
            gf += ((plus - minus) / (2.0 * h * n)) * e;
            for (double sign : {1.0, -1.0}) {
                work.anchors[i] = BundlePoint{a.foot, a.fiber + sign * h * e};
                (sign > 0 ? plus : minus) = local_cost(m, work, data, part, i);
            }
            gu += ((plus - minus) / (2.0 * h * n)) * e;
        }
        work.anchors[i] = a;
        sq += gf.squaredNorm() + gu.squaredNorm();
        g.feet.push_back(gf);
        g.fibers.push_back(gu);
    }
    g.norm = std::sqrt(sq);
    return g;
}

// Trial codes whose velocities leave the decodable range throw, which the
// line search treats as a rejected step.
SplineCode step(const Manifold& m, const SplineCode& c, const Gradient& g, double alpha) {
    const double limit = m.injectivity_guard() / 3.0;
    SplineCode out;
    out.anchors.reserve(c.anchors.size());
    for (std::size_t i = 0; i < c.anchors.size(); ++i) {
        const BundlePoint& a = c.anchors[i];
        const Vec p = m.exp_at(a.foot.coords, -alpha * g.feet[i]);
        const Vec u = m.transport_at(a.foot.coords, p, a.fiber - alpha * g.fibers[i]);
        out.anchors.push_back(BundlePoint{Point{p}, m.project_tangent(p, u)});
        if (!(out.anchors.back().fiber.norm() < limit))
            throw Error(ErrorKind::OutOfInjectivityRadius, "anchor velocity too long", i);
    }
    return out;
}

// Piecewise-geodesic interpolant of the samples.
Vec interpolant(const Manifold& m, const TimedSamples& data, double t) {
    const auto& ts = data.times;
    if (t <= ts.front()) return data.points.front().coords;
    if (t >= ts.back()) return data.points.back().coords;
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    return m.geodesic_at(data.points[j - 1].coords, data.points[j].coords, w);
}

SplineCode initial_code(const Manifold& m, const TimedSamples& data, int l) {
    constexpr double kDelta = 1.0 / 3.0;
    SplineCode c;
    for (int i = 0; i <= l; ++i) {
        const Vec p = interpolant(m, data, i);
        Vec u;
        if (i == 0) {
            u = m.log_at(p, interpolant(m, data, kDelta));
        } else if (i == l) {
            u = -m.log_at(p, interpolant(m, data, l - kDelta));
        } else {
            u = 0.5 * (m.log_at(p, interpolant(m, data, i + kDelta)) -
                       m.log_at(p, interpolant(m, data, i - kDelta)));
        }
        c.anchors.push_back(BundlePoint{Point{p}, m.project_tangent(p, u)});
    }
    return c;
}

}  // namespace

double fit_objective(const Manifold& m, const CubicSpline& b, const TimedSamples& data) {
    if (data.size() == 0) throw Error(ErrorKind::InsufficientData, "no samples");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = m.dist_at(eval_spline(m, b, data.times[i]).coords, data.points[i].coords);
        sum += d * d;
    }
    return sum / static_cast<double>(data.size());
}

SplineFit fit_spline(const Manifold& m, const TimedSamples& data, int segments,
                     const FitOptions& options) {
    if (segments < 1) throw Error(ErrorKind::InvalidArgument, "need at least one segment");
    const std::size_t needed = 2 * static_cast<std::size_t>(segments) + 2;
    if (data.size() < needed)
        throw Error(ErrorKind::InsufficientData, std::to_string(data.size()) + " samples for " +
                                                     std::to_string(needed) + " free controls");
    if (data.times.size() != data.size())
        throw Error(ErrorKind::InvalidArgument, "times and points differ in length");
    if (data.times.front() != 0.0 || data.times.back() != segments)
        throw Error(ErrorKind::InvalidArgument, "sample times must span [0, L]");

    const Partition part = partition(data, segments);
    SplineFit fit;
    SplineCode cur;
    if (options.seed) {
        if (options.seed->segments() != segments)
            throw Error(ErrorKind::InvalidArgument, "seed has the wrong segment count");
        cur = *options.seed;
        fit.report.initialization = "seed";
    } else {
        cur = initial_code(m, data, segments);
        fit.report.initialization = "interpolant";
    }

    double f = total_cost(m, cur, data, part);
    fit.report.initial_objective = f;
    if (options.record_objective) fit.report.objective_history.push_back(f);
    Gradient g = fd_gradient(m, cur, data, part, options.fd_step);
    double alpha = 1.0;
    constexpr double kArmijo = 1e-4;
    int it = 0;
    for (; g.norm >= options.gradient_tolerance && it < options.max_iterations; ++it) {
        alpha *= 2.0;
        bool accepted = false;
        SplineCode trial;
        double next = f;
        for (int halvings = 0; halvings < 60; ++halvings, alpha *= 0.5) {
            try {
                trial = step(m, cur, g, alpha);
                next = total_cost(m, trial, data, part);
            } catch (const Error&) {
                continue;
            }
            if (next <= f - kArmijo * alpha * g.norm * g.norm) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        cur = std::move(trial);
        f = next;
        if (options.record_objective) fit.report.objective_history.push_back(f);
        g = fd_gradient(m, cur, data, part, options.fd_step);
    }
    fit.report.objective = f;
    fit.report.gradient_norm = g.norm;
    fit.report.iterations = it;
    fit.report.converged = g.norm < options.gradient_tolerance;
    fit.code = cur;
    fit.spline = decode(m, cur);
    return fit;
}

double r_squared(const Manifold& m, const CubicSpline& b, const TimedSamples& data) {
    if (data.size() == 0) throw Error(ErrorKind::InsufficientData, "no samples");
    bool all_equal = true;
    for (const auto& p : data.points)
        all_equal = all_equal && p.coords == data.points.front().coords;
    if (all_equal) throw Error(ErrorKind::DegenerateData, "all samples coincide");
    const Point mean = m.frechet_mean(data.points);
    double total = 0.0;
    for (const auto& p : data.points) {
        const double d = m.dist_at(mean.coords, p.coords);
        total += d * d;
    }
    total /= static_cast<double>(data.size());
    return 1.0 - fit_objective(m, b, data) / total;
}

CubicSpline subdivide(const Manifold& m, const CubicSpline& b) {
    std::vector<Point> out;
    for (int s = 0; s < b.segments(); ++s) {
        const auto c = b.segment(s);
        const Vec a1 = m.geodesic_at(c[0].coords, c[1].coords, 0.5);
        const Vec b1 = m.geodesic_at(c[1].coords, c[2].coords, 0.5);
        const Vec c1 = m.geodesic_at(c[2].coords, c[3].coords, 0.5);
        const Vec a2 = m.geodesic_at(a1, b1, 0.5);
        const Vec b2 = m.geodesic_at(b1, c1, 0.5);
        const Vec mid = m.geodesic_at(a2, b2, 0.5);
        if (s == 0) out.push_back(c[0]);
        for (const Vec& v : {a1, a2, mid, b2, c1}) out.push_back(Point{v});
        out.push_back(c[3]);
    }
    return CubicSpline(std::move(out));
}

TimedSamples rescale_times(const TimedSamples& data, double from, double to) {
    TimedSamples out = data;
    for (double& t : out.times) t *= to / from;
    if (!out.times.empty()) out.times.back() = to;
    return out;
}

}  // namespace splinefold
