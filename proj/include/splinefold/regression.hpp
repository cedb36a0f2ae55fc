#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splinefold/bezierfold.hpp"

namespace splinefold {

struct FitOptions {
    double gradient_tolerance = 1e-7;
    int max_iterations = 1000;
    /// Central-difference step in orthonormal tangent coordinates.
    double fd_step = 1e-6;
    /// Start from this code instead of the interpolant-based guess.
    std::optional<SplineCode> seed;
    bool record_objective = false;
};

struct FitReport {
    /// (1/N) sum d(B(t_i), q_i)^2 at the returned spline.
    double objective = 0.0;
    double initial_objective = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    /// "interpolant" or "seed".
    std::string initialization;
    std::vector<double> objective_history;
};

struct SplineFit {
    CubicSpline spline;
    SplineCode code;
    FitReport report;
};

/// Least-squares cubic spline with L segments through timed samples
/// (times in [0, L]). Optimizes over the code (L+1 feet and velocities) by
/// Riemannian gradient descent with Armijo backtracking; the gradient comes
/// from central differences. Non-convergence is reported in the result,
/// never thrown.
[[nodiscard]] SplineFit fit_spline(const Manifold& m, const TimedSamples& data, int segments,
                                   const FitOptions& options = {});

/// (1/N) sum d(B(t_i), q_i)^2
[[nodiscard]] double fit_objective(const Manifold& m, const CubicSpline& b,
                                   const TimedSamples& data);

/// Geometric coefficient of determination, 1 - unexplained / total
/// variance, the total being the Frechet variance of the samples.
[[nodiscard]] double r_squared(const Manifold& m, const CubicSpline& b, const TimedSamples& data);

/// Splits every segment at its midpoint by De Casteljau subdivision. The
/// result has 2L segments and is C1.
[[nodiscard]] CubicSpline subdivide(const Manifold& m, const CubicSpline& b);

/// Rescales sample times from [0, L] to [0, L'].
[[nodiscard]] TimedSamples rescale_times(const TimedSamples& data, double from, double to);

}  // namespace splinefold
