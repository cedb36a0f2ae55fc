#include "splinefold/hurdat.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace splinefold {

namespace {

constexpr double kDeg = 3.141592653589793 / 180.0;
constexpr double kHalfPi = 1.5707963267948966;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(trim(field));
    return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_coordinate(const std::string& s, char positive, char negative, double& out) {
    if (s.size() < 2) return false;
    const char hemi = s.back();
    double v = 0.0;
    if (!parse_number(s.substr(0, s.size() - 1), v) || v < 0.0) return false;
    if (hemi == positive) {
        out = v;
    } else if (hemi == negative) {
        out = -v;
    } else {
        return false;
    }
    return true;
}

bool parse_timestamp(const std::string& date, const std::string& hhmm, std::int64_t& minutes) {
    int ymd = 0, hm = 0;
    if (date.size() != 8 || hhmm.size() != 4 || !parse_number(date, ymd) || !parse_number(hhmm, hm))
        return false;
    using namespace std::chrono;
    const year_month_day d{year{ymd / 10000}, month{static_cast<unsigned>(ymd / 100 % 100)},
                           day{static_cast<unsigned>(ymd % 100)}};
    const int h = hm / 100, mi = hm % 100;
    if (!d.ok() || h > 23 || mi > 59) return false;
    minutes = static_cast<std::int64_t>(sys_days(d).time_since_epoch().count()) * 1440 + h * 60 + mi;
    return true;
}

std::string format_timestamp(std::int64_t minutes) {
    using namespace std::chrono;
    const auto day_count = static_cast<int>(minutes >= 0 ? minutes / 1440 : (minutes - 1439) / 1440);
    const year_month_day d{sys_days{days{day_count}}};
    const std::int64_t rest = minutes - static_cast<std::int64_t>(day_count) * 1440;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d%02u%02u%02d%02d", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()),
                  static_cast<int>(rest / 60), static_cast<int>(rest % 60));
    return buf;
}

bool looks_like_header(const std::vector<std::string>& f) {
    return f.size() >= 3 && f[0].size() == 8 && std::isalpha(static_cast<unsigned char>(f[0][0])) &&
           std::isalpha(static_cast<unsigned char>(f[0][1]));
}

}  // namespace

std::string to_string(Group g) {
    switch (g) {
        case Group::I: return "group_i";
        case Group::II: return "group_ii";
        case Group::III: return "group_iii";
    }
    return "?";
}

Group group_from_string(const std::string& s) {
    if (s == "group_i") return Group::I;
    if (s == "group_ii") return Group::II;
    if (s == "group_iii") return Group::III;
    throw Error(ErrorKind::InvalidArgument, "unknown group '" + s + "'");
}

Vec latlon_to_unit(double lat, double lon) {
    const double phi = lat * kDeg, lambda = lon * kDeg;
    Vec v(3);
    v << std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi);
    return v;
}

std::array<double, 2> unit_to_latlon(const Vec& p) {
    return {std::atan2(p[2], std::hypot(p[0], p[1])) / kDeg, std::atan2(p[1], p[0]) / kDeg};
}

std::vector<Track> parse_hurdat2(std::istream& in) {
    std::vector<Track> out;
    std::string line;
    std::size_t lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        any = true;
        const auto head = split(line, ',');
        int rows = 0;
        if (!looks_like_header(head) || !parse_number(head[2], rows) || rows < 0)
            throw Error(ErrorKind::MalformedHeader, "expected a storm header: '" + line + "'", lineno);
        Track t;
        t.id = head[0];
        t.name = head[1];
        for (int r = 0; r < rows; ++r) {
            if (!std::getline(in, line))
                throw Error(ErrorKind::MalformedRow,
                            "storm " + t.id + " ends after " + std::to_string(r) + " of " +
                                std::to_string(rows) + " rows",
                            lineno);
            ++lineno;
            const auto f = split(line, ',');
            TrackSample s;
            if (f.size() < 8 || !parse_timestamp(f[0], f[1], s.minutes) ||
                !parse_coordinate(f[4], 'N', 'S', s.lat) || !parse_coordinate(f[5], 'E', 'W', s.lon) ||
                !parse_number(f[6], s.maxwind) || !parse_number(f[7], s.pressure))
                throw Error(ErrorKind::MalformedRow, "bad data row '" + line + "'", lineno);
            if (s.maxwind == -99) continue;
            s.record_id = f[2];
            s.status = f[3];
            s.point = Point{latlon_to_unit(s.lat, s.lon)};
            t.samples.push_back(std::move(s));
        }
        if (!t.samples.empty()) t.label = label_category(t);
        out.push_back(std::move(t));
    }
    if (!any) throw Error(ErrorKind::EmptyInput, "no storms in input");
    return out;
}

std::string format_hurdat2_row(const TrackSample& s) {
    const std::string stamp = format_timestamp(s.minutes);
    char lat[16], lon[16], buf[128];
    std::snprintf(lat, sizeof lat, "%.1f%c", std::abs(s.lat), s.lat < 0 ? 'S' : 'N');
    std::snprintf(lon, sizeof lon, "%.1f%c", std::abs(s.lon), s.lon < 0 ? 'W' : 'E');
    std::snprintf(buf, sizeof buf, "%s, %s, %1s, %2s, %5s, %6s, %4d, %4d,", stamp.substr(0, 8).c_str(),
                  stamp.substr(8, 4).c_str(), s.record_id.c_str(), s.status.c_str(), lat, lon,
                  s.maxwind, s.pressure);
    return buf;
}

Group label_category(const Track& t) {
    if (t.samples.empty()) throw Error(ErrorKind::NoWindData, "track " + t.id + " has no wind data");
    int peak = 0;
    for (const auto& s : t.samples) peak = std::max(peak, s.maxwind);
    if (peak >= kMajorHurricaneWindKt) return Group::III;
    if (peak >= kHurricaneWindKt) return Group::II;
    return Group::I;
}

FilterResult filter_dataset(const std::vector<Track>& tracks, const FilterOptions& options) {
    FilterResult out;
    for (const auto& src : tracks) {
        if (src.id.size() != 8 || src.basin() != options.basin) continue;
        const int y = src.year();
        if (y < options.first_year || y > options.last_year) continue;

        Track t = src;
        if (options.synoptic_only)
            std::erase_if(t.samples, [](const TrackSample& s) { return s.minutes % 360 != 0; });
        const auto reject = [&](const std::string& why) { out.rejected.push_back({t.id, why}); };
        if (t.samples.size() < 2) {
            reject(std::to_string(t.samples.size()) + " sample(s), need at least 2");
            continue;
        }
        bool ordered = true;
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            ordered = ordered && t.samples[i].minutes > t.samples[i - 1].minutes;
        if (!ordered) {
            reject("timestamps not strictly increasing");
            continue;
        }
        const Vec& first = t.samples.front().point.coords;
        const auto far = std::find_if(t.samples.begin(), t.samples.end(), [&](const TrackSample& s) {
            const Eigen::Vector3d a = first, b = s.point.coords;
            return std::atan2(a.cross(b).norm(), a.dot(b)) >= kHalfPi;
        });
        if (far != t.samples.end()) {
            reject("sample " + std::to_string(far - t.samples.begin()) +
                   " lies pi/2 or more from the first fix");
            continue;
        }
        t.label = label_category(t);
        if (t.samples.size() < 13 || t.samples.size() > 96)
            out.warnings.push_back(t.id + ": " + std::to_string(t.samples.size()) + " samples");
        out.tracks.push_back(std::move(t));
    }
    return out;
}

std::vector<double> normalized_times(const Track& t) {
    if (t.samples.size() < 2)
        throw Error(ErrorKind::InsufficientData, "track " + t.id + " has fewer than 2 samples");
    const double t0 = static_cast<double>(t.samples.front().minutes);
    const double span = static_cast<double>(t.samples.back().minutes) - t0;
    std::vector<double> out;
    out.reserve(t.samples.size());
    for (const auto& s : t.samples) out.push_back((static_cast<double>(s.minutes) - t0) / span);
    out.back() = 1.0;
    return out;
}

ResampledTrack resample32(const Manifold& m, const Track& t) {
    const std::vector<double> times = normalized_times(t);
    ResampledTrack out;
    out.id = t.id;
    std::size_t j = 1;
    for (int k = 0; k < kResampleCount; ++k) {
        const double s = static_cast<double>(k) / (kResampleCount - 1);
        if (k == 0) {
            out.points.push_back(t.samples.front().point);
            continue;
        }
        if (k == kResampleCount - 1) {
            out.points.push_back(t.samples.back().point);
            continue;
        }
        while (j + 1 < times.size() && times[j] < s) ++j;
        const double w = (s - times[j - 1]) / (times[j] - times[j - 1]);
        out.points.push_back(Point{m.geodesic_at(t.samples[j - 1].point.coords,
                                                 t.samples[j].point.coords, w)});
    }
    return out;
}

void write_tracks(std::ostream& out, const std::vector<Track>& tracks) {
    char buf[96];
    for (const auto& t : tracks) {
        out << t.id << '\t' << t.name << '\t' << to_string(t.label) << '\t';
        for (std::size_t i = 0; i < t.samples.size(); ++i) {
            const auto& s = t.samples[i];
            std::snprintf(buf, sizeof buf, "%s%s,%.6f,%.6f,%d", i ? ";" : "",
                          format_timestamp(s.minutes).c_str(), s.lat, s.lon, s.maxwind);
            out << buf;
        }
        out << '\n';
    }
}

std::vector<Track> read_tracks(std::istream& in) {
    std::vector<Track> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, '\t');
        if (f.size() != 4) throw Error(ErrorKind::MalformedRow, "track cache row", lineno);
        Track t;
        t.id = f[0];
        t.name = f[1];
        t.label = group_from_string(f[2]);
        for (const auto& rec : split(f[3], ';')) {
            const auto v = split(rec, ',');
            TrackSample s;
            if (v.size() != 4 || v[0].size() != 12 ||
                !parse_timestamp(v[0].substr(0, 8), v[0].substr(8), s.minutes) ||
                !parse_number(v[1], s.lat) || !parse_number(v[2], s.lon) ||
                !parse_number(v[3], s.maxwind))
                throw Error(ErrorKind::MalformedRow, "bad sample '" + rec + "'", lineno);
            s.point = Point{latlon_to_unit(s.lat, s.lon)};
            t.samples.push_back(std::move(s));
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace splinefold
