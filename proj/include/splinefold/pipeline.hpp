#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "splinefold/bezierfold.hpp"
#include "splinefold/hurdat.hpp"
#include "splinefold/regression.hpp"
#include "splinefold/stats_ml.hpp"

namespace splinefold {

inline constexpr const char* kDataEnvVar = "SPLINEFOLD_DATA";
inline constexpr const char* kDefaultDataPath = "data/hurdat2_atlantic_2010_2021.txt";

struct PipelineConfig {
    std::filesystem::path data_path = kDefaultDataPath;
    int first_year = 2010;
    int last_year = 2021;
    std::string basin = "AL";
    /// Spline segments used for PGA and classification.
    int segments = 2;
    /// Segments of the discrete Sasaki geodesics.
    int geodesic_segments = 10;
    /// PGA modes used as features; 0 means all available.
    int pga_modes = 0;
    double gamma = 0.7;
    double C = 3.0;
    int folds = 3;
    int repetitions = 1000;
    std::uint64_t seed = 7;
    bool synoptic_only = false;
    bool standardize = false;
    std::filesystem::path output_dir = "out";
};

/// Throws InvalidArgument for non-positive numeric fields. Returns
/// warnings (e.g. L outside {1, 2}).
std::vector<std::string> validate(const PipelineConfig& config);

/// Outcome of one command. `failures` lists per-item problems that did not
/// stop the command (exit code 1 when non-empty).
struct CommandResult {
    std::vector<std::string> failures;
    std::vector<std::string> messages;
    std::vector<std::filesystem::path> outputs;
};

CommandResult cmd_ingest(const PipelineConfig& config);
CommandResult cmd_regress(const PipelineConfig& config);
CommandResult cmd_pga(const PipelineConfig& config);
CommandResult cmd_classify(const PipelineConfig& config);
CommandResult cmd_export_tracks(const PipelineConfig& config);

// Building blocks, exposed for the acceptance harness.

/// Samples of a track with times normalized onto [0, L].
[[nodiscard]] TimedSamples track_samples(const Track& t, int segments);

struct TrackFit {
    std::string id;
    Group label = Group::I;
    int segments = 0;
    bool ok = false;
    std::string error;
    SplineFit fit;
    double r2 = 0.0;
};

/// Fits every track with `segments` segments (in parallel).
[[nodiscard]] std::vector<TrackFit> fit_tracks(const Manifold& m, const std::vector<Track>& tracks,
                                               int segments);

/// Scale-free separation of group means in the first two score columns:
/// sqrt(between-group variance / total variance).
[[nodiscard]] double group_separation(const Eigen::MatrixXd& scores, const std::vector<int>& labels);

/// Path of a keyed cache file under <output>/cache.
[[nodiscard]] std::filesystem::path cache_path(const PipelineConfig& config, const std::string& stage);
/// FNV-1a 64-bit.
[[nodiscard]] std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
/// Content key of a stage: hashes the input file and the configuration
/// fields the stage depends on.
[[nodiscard]] std::string stage_key(const PipelineConfig& config, const std::string& stage);

/// Minimal structural GeoJSON check (FeatureCollection of LineString
/// features with numeric [lon, lat] positions). Returns problems found.
[[nodiscard]] std::vector<std::string> lint_geojson(const std::string& text);

}  // namespace splinefold
