#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "splinefold/manifold.hpp"

namespace splinefold {

/// Intensity groups by peak maximum sustained wind.
enum class Group { I, II, III };

inline constexpr int kHurricaneWindKt = 64;       // Saffir-Simpson category 1
inline constexpr int kMajorHurricaneWindKt = 113;  // Saffir-Simpson category 4

[[nodiscard]] std::string to_string(Group g);
[[nodiscard]] Group group_from_string(const std::string& s);

struct TrackSample {
    /// Minutes since 1970-01-01 00:00 UTC.
    std::int64_t minutes = 0;
    double lat = 0.0;  // degrees north
    double lon = 0.0;  // degrees east
    int maxwind = 0;   // knots
    int pressure = -999;
    std::string record_id;
    std::string status;
    Point point;
};

struct Track {
    std::string id;
    std::string name;
    std::vector<TrackSample> samples;
    Group label = Group::I;

    [[nodiscard]] std::string basin() const { return id.substr(0, 2); }
    [[nodiscard]] int year() const { return std::stoi(id.substr(4, 4)); }
};

/// (cos lat cos lon, cos lat sin lon, sin lat), degrees in.
[[nodiscard]] Vec latlon_to_unit(double lat, double lon);
/// Inverse of `latlon_to_unit`, degrees out, lon in (-180, 180].
[[nodiscard]] std::array<double, 2> unit_to_latlon(const Vec& p);

/// Reads every storm of a HURDAT2 file. Rows with missing wind (-99) are
/// dropped. Labels are assigned from the remaining winds when there are any.
[[nodiscard]] std::vector<Track> parse_hurdat2(std::istream& in);

/// One data row in HURDAT2 layout (the first eight fields).
[[nodiscard]] std::string format_hurdat2_row(const TrackSample& s);

struct FilterOptions {
    int first_year = 2010;
    int last_year = 2021;
    std::string basin = "AL";
    /// Keep only 00/06/12/18 UTC fixes.
    bool synoptic_only = false;
};

struct Rejection {
    std::string id;
    std::string reason;
};

struct FilterResult {
    std::vector<Track> tracks;
    std::vector<Rejection> rejected;
    /// Kept tracks outside the usual 13..96 sample range.
    std::vector<std::string> warnings;
};

[[nodiscard]] FilterResult filter_dataset(const std::vector<Track>& tracks,
                                          const FilterOptions& options = {});

/// Peak wind: < 64 kt group I, 64..112 kt group II, >= 113 kt group III.
[[nodiscard]] Group label_category(const Track& t);

/// Sample times mapped affinely onto [0, 1].
[[nodiscard]] std::vector<double> normalized_times(const Track& t);

struct ResampledTrack {
    std::string id;
    std::vector<Point> points;
};

inline constexpr int kResampleCount = 32;

/// Geodesic interpolation at k/31, k = 0..31, of the normalized-time track.
[[nodiscard]] ResampledTrack resample32(const Manifold& m, const Track& t);

/// Tab-separated cache: id, name, label, then samples as
/// "YYYYMMDDHHMM,lat,lon,wind" joined by ';' with 6 fractional digits.
void write_tracks(std::ostream& out, const std::vector<Track>& tracks);
[[nodiscard]] std::vector<Track> read_tracks(std::istream& in);

}  // namespace splinefold
