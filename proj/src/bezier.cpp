#include "splinefold/bezier.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace splinefold {

Point decasteljau(const Manifold& m, std::span<const Point> controls, double t) {
    if (controls.empty()) throw Error(ErrorKind::InvalidArgument, "Bezier curve without controls");
    if (t == 0.0) return controls.front();
    if (t == 1.0) return controls.back();
    std::vector<Vec> level;
    level.reserve(controls.size());
    for (const auto& c : controls) level.push_back(c.coords);
    for (std::size_t r = level.size() - 1; r > 0; --r)
        for (std::size_t i = 0; i < r; ++i) level[i] = m.geodesic_at(level[i], level[i + 1], t);
    return Point{level.front()};
}

CubicSpline::CubicSpline(std::vector<Point> controls) : controls_(std::move(controls)) {
    if (controls_.size() < 4 || (controls_.size() - 1) % 3 != 0)
        throw Error(ErrorKind::InvalidArgument,
                    "a cubic spline needs 3L+1 controls, got " + std::to_string(controls_.size()));
}

std::span<const Point> CubicSpline::segment(int i) const {
    if (i < 0 || i >= segments())
        throw Error(ErrorKind::ParameterOutOfRange, "segment index " + std::to_string(i));
    return std::span<const Point>(controls_).subspan(3 * static_cast<std::size_t>(i), 4);
}

Point eval_spline(const Manifold& m, const CubicSpline& b, double t) {
    const int l = b.segments();
    if (!(t >= 0.0 && t <= l))
        throw Error(ErrorKind::ParameterOutOfRange,
                    "spline parameter " + std::to_string(t) + " outside [0, " +
                        std::to_string(l) + "]");
    const int i = std::min(static_cast<int>(std::floor(t)), l - 1);
    return decasteljau(m, b.segment(i), t - i);
}

Tangent endpoint_velocity(const Manifold& m, const CubicSpline& b, int segment, SegmentEnd end) {
    const auto c = b.segment(segment);
    if (end == SegmentEnd::Start) return Tangent{c[0], 3.0 * m.log_at(c[0].coords, c[1].coords)};
    return Tangent{c[3], -3.0 * m.log_at(c[3].coords, c[2].coords)};
}

double c1_defect(const Manifold& m, const CubicSpline& b) {
    double worst = 0.0;
    for (int i = 0; i + 1 < b.segments(); ++i) {
        const auto a = b.segment(i);
        const auto n = b.segment(i + 1);
        const Vec mirrored = m.geodesic_at(a[2].coords, a[3].coords, 2.0);
        worst = std::max(worst, (mirrored - n[1].coords).norm());
    }
    return worst;
}

TimedSamples normalize_times(std::span<const double> raw_times, std::span<const Point> points,
                             double span_length) {
    if (raw_times.size() != points.size())
        throw Error(ErrorKind::InvalidArgument, "times and points differ in length");
    TimedSamples out;
    std::vector<double> kept;
    for (std::size_t i = 0; i < raw_times.size(); ++i) {
        if (!kept.empty() && raw_times[i] <= kept.back()) {
            if (raw_times[i] < kept.back())
                throw Error(ErrorKind::InvalidArgument, "timestamps decrease", i);
            ++out.dropped_duplicates;
            continue;
        }
        kept.push_back(raw_times[i]);
        out.points.push_back(points[i]);
    }
    if (kept.size() < 2)
        throw Error(ErrorKind::InsufficientData, "need two distinct timestamps");
    const double t0 = kept.front();
    const double scale = span_length / (kept.back() - t0);
    out.times.reserve(kept.size());
    for (double t : kept) out.times.push_back((t - t0) * scale);
    out.times.back() = span_length;
    return out;
}

void write_spline(std::ostream& out, const CubicSpline& b) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << b.segments() << '\n' << std::setprecision(17);
    for (int i = 0; i < b.segments(); ++i)
        for (const auto& p : b.segment(i)) {
            for (int d = 0; d < p.coords.size(); ++d) out << (d ? " " : "") << p.coords[d];
            out << '\n';
        }
    out.flags(flags);
    out.precision(precision);
}

CubicSpline read_spline(std::istream& in, const Manifold& m) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, "no spline record");
    int l = 0;
    {
        std::istringstream head(line);
        if (!(head >> l) || l < 1)
            throw Error(ErrorKind::MalformedHeader, "bad segment count '" + line + "'");
    }
    std::vector<Point> controls;
    for (int k = 0; k < 4 * l; ++k) {
        if (!std::getline(in, line))
            throw Error(ErrorKind::MalformedRow, "spline record ends early", k);
        std::istringstream row(line);
        Vec v(m.ambient_dim());
        for (int d = 0; d < v.size(); ++d)
            if (!(row >> v[d])) throw Error(ErrorKind::MalformedRow, "bad control point", k);
        const Point p = m.point(v);
        if (k % 4 == 0 && k > 0) {
            if (!(controls.back().coords == p.coords))
                throw Error(ErrorKind::MalformedRow, "segment does not start at previous end", k);
            continue;
        }
        controls.push_back(p);
    }
    return CubicSpline(std::move(controls));
}

}  // namespace splinefold
