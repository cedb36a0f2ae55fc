#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "splinefold/manifold.hpp"

namespace splinefold {

/// beta_0^k(t) of the geodesic De Casteljau pyramid over k+1 controls.
[[nodiscard]] Point decasteljau(const Manifold& m, std::span<const Point> controls, double t);

/// Composite cubic Bezier spline with L segments. Neighbouring segments
/// share their join point, so the controls are stored once: segment i uses
/// controls[3i .. 3i+3].
class CubicSpline {
public:
    CubicSpline() = default;
    /// Takes 3L+1 controls. The C1 condition is not enforced here; splines
    /// built by `decode` satisfy it by construction.
    explicit CubicSpline(std::vector<Point> controls);

    [[nodiscard]] int segments() const noexcept {
        return controls_.empty() ? 0 : static_cast<int>(controls_.size() - 1) / 3;
    }
    [[nodiscard]] const std::vector<Point>& controls() const noexcept { return controls_; }
    [[nodiscard]] std::span<const Point> segment(int i) const;

private:
    std::vector<Point> controls_;
};

/// B(t) for t in [0, L]. Segment i covers [i, i+1); t = L belongs to the
/// last segment.
[[nodiscard]] Point eval_spline(const Manifold& m, const CubicSpline& b, double t);

enum class SegmentEnd { Start, End };

/// 3 log(p0, p1) at the start of segment i, -3 log(p3, p2) at its end.
[[nodiscard]] Tangent endpoint_velocity(const Manifold& m, const CubicSpline& b, int segment,
                                        SegmentEnd end);

/// Max deviation of gamma(2; p2, p3) from the next segment's p1 over all
/// joins.
[[nodiscard]] double c1_defect(const Manifold& m, const CubicSpline& b);

/// Observations (q_i, t_i) with t in [0, L].
struct TimedSamples {
    std::vector<double> times;
    std::vector<Point> points;
    /// Samples dropped by `normalize_times` because of repeated timestamps.
    int dropped_duplicates = 0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// Maps raw, non-decreasing timestamps affinely onto [0, L]; repeated
/// timestamps keep their first sample.
[[nodiscard]] TimedSamples normalize_times(std::span<const double> raw_times,
                                           std::span<const Point> points, double span_length);

/// Plain-text record: "L" on one line, then the 4 control points of every
/// segment (4L lines, joins repeated), one vector per line, 17 significant
/// digits. Reading rejects joins that do not repeat exactly.
void write_spline(std::ostream& out, const CubicSpline& b);
[[nodiscard]] CubicSpline read_spline(std::istream& in, const Manifold& m);

}  // namespace splinefold
