#include "splinefold/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "splinefold/parallel.hpp"

namespace splinefold {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kSamplesPerSegment = 100;
constexpr int kExportModes = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    // Write then rename, so a reader never sees a half-written cache.
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        out << text;
        if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string require(const fs::path& path, const std::string& what, const std::string& command) {
    if (!fs::exists(path))
        throw Error(ErrorKind::MissingCache, "no " + what + " for this configuration (" +
                                                 path.string() + "); run `splinefold " + command +
                                                 "` first");
    return read_file(path);
}

std::string hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<int> regress_segments(const PipelineConfig& config) {
    std::vector<int> out{1, 2};
    if (config.segments != 1 && config.segments != 2) out.push_back(config.segments);
    return out;
}

Manifold sphere() { return Manifold::sphere(); }

Bezierfold make_fold(const PipelineConfig& config) {
    SasakiOptions options;
    options.segments = config.geodesic_segments;
    return Bezierfold(TangentBundle(sphere(), options));
}

std::vector<Track> load_tracks(const PipelineConfig& config) {
    std::istringstream in(require(cache_path(config, "tracks"), "track cache", "ingest"));
    return read_tracks(in);
}

// Spline cache: per track either "<id> ok" followed by a spline record, or
// "<id> failed <reason>".
std::string format_fits(const std::vector<TrackFit>& fits) {
    std::ostringstream out;
    for (const auto& f : fits) {
        if (f.ok) {
            out << f.id << " ok\n";
            write_spline(out, f.fit.spline);
        } else {
            out << f.id << " failed " << f.error << '\n';
        }
    }
    return out.str();
}

struct CachedSpline {
    std::string id;
    bool ok = false;
    std::string error;
    CubicSpline spline;
};

std::vector<CachedSpline> parse_fits(const std::string& text, const Manifold& m) {
    std::istringstream in(text);
    std::vector<CachedSpline> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream head(line);
        CachedSpline c;
        std::string status;
        head >> c.id >> status;
        if (status == "ok") {
            c.ok = true;
            c.spline = read_spline(in, m);
        } else if (status == "failed") {
            std::getline(head >> std::ws, c.error);
        } else {
            throw Error(ErrorKind::MalformedRow, "spline cache entry '" + line + "'");
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<CachedSpline> load_fits(const PipelineConfig& config, int segments,
                                    const Manifold& m) {
    return parse_fits(require(cache_path(config, "splines-L" + std::to_string(segments)),
                              "L=" + std::to_string(segments) + " spline cache", "regress"),
                      m);
}

json vec_json(const Vec& v) { return std::vector<double>(v.begin(), v.end()); }

Vec json_vec(const json& j) {
    const auto v = j.get<std::vector<double>>();
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

json matrix_json(const Eigen::MatrixXd& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(a.cols()));
        for (Eigen::Index k = 0; k < a.cols(); ++k) r[static_cast<std::size_t>(k)] = a(i, k);
        rows.push_back(r);
    }
    return rows;
}

Eigen::MatrixXd json_matrix(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k)
            a(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    return a;
}

json code_json(const SplineCode& c) {
    json out = json::array();
    for (const auto& a : c.anchors)
        out.push_back({{"foot", vec_json(a.foot.coords)}, {"fiber", vec_json(a.fiber)}});
    return out;
}

SplineCode json_code(const json& j) {
    SplineCode c;
    for (const auto& a : j) c.anchors.push_back({Point{json_vec(a["foot"])}, json_vec(a["fiber"])});
    return c;
}

json tangent_json(const SplineCodeTangent& x) {
    json out = json::array();
    for (const auto& t : x.components)
        out.push_back({{"horizontal", vec_json(t.horizontal)}, {"vertical", vec_json(t.vertical)}});
    return out;
}

SplineCodeTangent json_tangent(const json& j, const SplineCode& at) {
    SplineCodeTangent x;
    for (std::size_t i = 0; i < j.size(); ++i)
        x.components.push_back({at.anchors[i], json_vec(j[i]["horizontal"]), json_vec(j[i]["vertical"])});
    return x;
}

std::vector<int> label_ints(const std::vector<std::string>& labels) {
    std::vector<int> out;
    for (const auto& l : labels) out.push_back(static_cast<int>(group_from_string(l)));
    return out;
}

json summary_json(const Summary& s) {
    return {{"mean", s.mean}, {"std", s.std},       {"min", s.min},     {"q1", s.q1},
            {"median", s.median}, {"q3", s.q3}, {"max", s.max}, {"count", s.count}};
}

json line_feature(json coords, json properties) {
    return {{"type", "Feature"},
            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
            {"properties", std::move(properties)}};
}

json lonlat(const std::vector<Point>& points) {
    json coords = json::array();
    for (const auto& p : points) {
        const auto ll = unit_to_latlon(p.coords);
        coords.push_back({ll[1], ll[0]});
    }
    return coords;
}

std::vector<Point> sample_spline(const Manifold& m, const CubicSpline& b) {
    std::vector<Point> out;
    const int n = b.segments() * kSamplesPerSegment;
    for (int k = 0; k <= n; ++k)
        out.push_back(eval_spline(m, b, static_cast<double>(k) * b.segments() / n));
    return out;
}

}  // namespace

std::vector<std::string> validate(const PipelineConfig& config) {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
    };
    positive(config.first_year, "first year");
    positive(config.last_year, "last year");
    positive(config.segments, "segments");
    positive(config.geodesic_segments, "geodesic segments");
    positive(config.gamma, "gamma");
    positive(config.C, "C");
    positive(config.folds, "folds");
    positive(config.repetitions, "repetitions");
    if (config.pga_modes < 0) throw Error(ErrorKind::InvalidArgument, "PGA modes must be positive (0 = all)");
    if (config.last_year < config.first_year)
        throw Error(ErrorKind::InvalidArgument, "year range is empty");
    if (config.basin.size() != 2) throw Error(ErrorKind::InvalidArgument, "basin must be two letters");
    std::vector<std::string> warnings;
    if (config.segments != 1 && config.segments != 2)
        warnings.push_back("segments = " + std::to_string(config.segments) +
                           "; the experiments use 1 or 2");
    return warnings;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string stage_key(const PipelineConfig& config, const std::string& stage) {
    std::uint64_t h = fnv1a(read_file(config.data_path));
    std::ostringstream cfg;
    cfg << "ingest v1|" << config.first_year << '|' << config.last_year << '|' << config.basin << '|'
        << config.synoptic_only;
    h = fnv1a(cfg.str(), h);
    if (stage == "tracks") return hex(h);
    h = fnv1a("regress v1", h);
    if (stage.starts_with("splines")) return hex(h);
    cfg.str("");
    cfg << "pga v1|" << config.segments << '|' << config.geodesic_segments << '|' << config.pga_modes;
    h = fnv1a(cfg.str(), h);
    if (stage == "pga") return hex(h);
    throw Error(ErrorKind::InvalidArgument, "unknown stage '" + stage + "'");
}

fs::path cache_path(const PipelineConfig& config, const std::string& stage) {
    const std::string ext = stage == "tracks" ? ".tsv" : stage == "pga" ? ".json" : ".txt";
    return config.output_dir / "cache" / (stage + "-" + stage_key(config, stage) + ext);
}

TimedSamples track_samples(const Track& t, int segments) {
    std::vector<double> raw;
    std::vector<Point> points;
    for (const auto& s : t.samples) {
        raw.push_back(static_cast<double>(s.minutes));
        points.push_back(s.point);
    }
    return normalize_times(raw, points, segments);
}

std::vector<TrackFit> fit_tracks(const Manifold& m, const std::vector<Track>& tracks, int segments) {
    std::vector<TrackFit> out(tracks.size());
    parallel_for(tracks.size(), [&](std::size_t i) {
        TrackFit& f = out[i];
        f.id = tracks[i].id;
        f.label = tracks[i].label;
        f.segments = segments;
        try {
            const TimedSamples data = track_samples(tracks[i], segments);
            f.fit = fit_spline(m, data, segments);
            f.r2 = r_squared(m, f.fit.spline, data);
            f.ok = true;
        } catch (const Error& e) {
            f.error = e.what();
        }
    });
    return out;
}

double group_separation(const Eigen::MatrixXd& scores, const std::vector<int>& labels) {
    const Eigen::Index cols = std::min<Eigen::Index>(2, scores.cols());
    const Eigen::MatrixXd x = scores.leftCols(cols);
    const Eigen::RowVectorXd mu = x.colwise().mean();
    const double total = (x.rowwise() - mu).squaredNorm();
    if (total == 0.0) return 0.0;
    std::vector<int> groups(labels);
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    double between = 0.0;
    for (const int g : groups) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(cols);
        double n = 0.0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == g) {
                sum += x.row(static_cast<Eigen::Index>(i));
                n += 1.0;
            }
        between += n * (sum / n - mu).squaredNorm();
    }
    return std::sqrt(between / total);
}

CommandResult cmd_ingest(const PipelineConfig& config) {
    CommandResult result;
    result.messages = validate(config);
    std::istringstream in(read_file(config.data_path));
    const auto storms = parse_hurdat2(in);
    FilterOptions filter;
    filter.first_year = config.first_year;
    filter.last_year = config.last_year;
    filter.basin = config.basin;
    filter.synoptic_only = config.synoptic_only;
    const FilterResult kept = filter_dataset(storms, filter);

    std::ostringstream cache;
    write_tracks(cache, kept.tracks);
    const fs::path path = cache_path(config, "tracks");
    write_file(path, cache.str());

    json summary;
    summary["tracks"] = kept.tracks.size();
    json groups;
    for (const Group g : {Group::I, Group::II, Group::III})
        groups[to_string(g)] = std::count_if(kept.tracks.begin(), kept.tracks.end(),
                                             [&](const Track& t) { return t.label == g; });
    summary["groups"] = groups;
    summary["rejected"] = json::array();
    for (const auto& r : kept.rejected) {
        summary["rejected"].push_back({{"id", r.id}, {"reason", r.reason}});
        result.failures.push_back(r.id + ": " + r.reason);
    }
    summary["warnings"] = kept.warnings;
    const fs::path report = config.output_dir / "ingest_summary.json";
    write_file(report, summary.dump(2) + "\n");

    std::ostringstream msg;
    msg << kept.tracks.size() << " tracks";
    for (const auto& [name, count] : groups.items()) msg << ", " << name << " " << count.get<int>();
    result.messages.push_back(msg.str());
    if (!kept.warnings.empty())
        result.messages.push_back(std::to_string(kept.warnings.size()) +
                                  " tracks outside the usual 13..96 sample range");
    result.outputs = {path, report};
    return result;
}

CommandResult cmd_regress(const PipelineConfig& config) {
    CommandResult result;
    result.messages = validate(config);
    const Manifold m = sphere();
    const auto tracks = load_tracks(config);

    std::ostringstream csv;
    csv << "id,label,segments,status,r2,objective,initial_objective,gradient_norm,iterations,"
           "converged\n";
    json summary = json::object();
    std::vector<std::vector<TrackFit>> all;
    for (const int L : regress_segments(config)) {
        all.push_back(fit_tracks(m, tracks, L));
        const auto& fits = all.back();
        const fs::path path = cache_path(config, "splines-L" + std::to_string(L));
        write_file(path, format_fits(fits));
        result.outputs.push_back(path);

        double sum = 0.0;
        int ok = 0, high = 0, unconverged = 0;
        for (const auto& f : fits) {
            if (!f.ok) {
                result.failures.push_back(f.id + " (L=" + std::to_string(L) + "): " + f.error);
                continue;
            }
            ++ok;
            sum += f.r2;
            high += f.r2 >= 0.95;
            unconverged += !f.fit.report.converged;
        }
        json s;
        s["fitted"] = ok;
        s["failed"] = static_cast<int>(fits.size()) - ok;
        s["mean_r2"] = ok ? sum / ok : 0.0;
        s["r2_at_least_0.95"] = high;
        s["not_converged"] = unconverged;
        summary["L" + std::to_string(L)] = s;
        result.messages.push_back("L=" + std::to_string(L) + ": " + std::to_string(ok) +
                                  " fitted, mean R2 " + fmt(ok ? sum / ok : 0.0));
    }
    // Rows grouped by track so the histogram file reads per track.
    for (std::size_t i = 0; i < tracks.size(); ++i)
        for (const auto& fits : all) {
            const auto& f = fits[i];
            csv << f.id << ',' << to_string(f.label) << ',' << f.segments << ',';
            if (f.ok) {
                const auto& r = f.fit.report;
                csv << "ok," << fmt(f.r2) << ',' << fmt(r.objective) << ','
                    << fmt(r.initial_objective) << ',' << fmt(r.gradient_norm) << ','
                    << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
            } else {
                csv << "failed,,,,,,\n";
            }
        }
    const fs::path hist = config.output_dir / "regression_r2.csv";
    const fs::path sum_path = config.output_dir / "regression_summary.json";
    write_file(hist, csv.str());
    write_file(sum_path, summary.dump(2) + "\n");
    result.outputs.push_back(hist);
    result.outputs.push_back(sum_path);
    return result;
}

CommandResult cmd_pga(const PipelineConfig& config) {
    CommandResult result;
    result.messages = validate(config);
    const Manifold m = sphere();
    const auto tracks = load_tracks(config);
    const auto fits = load_fits(config, config.segments, m);
    if (fits.size() != tracks.size())
        throw Error(ErrorKind::MissingCache, "spline cache does not match the track cache; run "
                                             "`splinefold regress` again");

    std::vector<SplineCode> codes;
    std::vector<std::vector<Point>> curves;
    std::vector<std::string> ids, labels, excluded;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (!fits[i].ok) {
            excluded.push_back(tracks[i].id);
            result.failures.push_back(tracks[i].id + " excluded from PGA: " + fits[i].error);
            continue;
        }
        codes.push_back(encode(m, fits[i].spline));
        curves.push_back(resample32(m, tracks[i]).points);
        ids.push_back(tracks[i].id);
        labels.push_back(to_string(tracks[i].label));
    }
    const Bezierfold fold = make_fold(config);
    const int dim = (config.segments + 1) * 2 * m.dim();
    const int n = static_cast<int>(codes.size());
    const int sasaki_modes = config.pga_modes ? config.pga_modes : std::min(n - 1, dim);
    const int l2_modes = config.pga_modes ? config.pga_modes : std::min(n - 1, kResampleCount * m.dim());
    const PGAModel model = fold.pga(codes, sasaki_modes);
    const L2Baseline l2 = l2_baseline_pga(m, curves, l2_modes);

    const auto ints = label_ints(labels);
    const double sep_sasaki = group_separation(model.scores, ints);
    const double sep_l2 = group_separation(l2.pca.scores, ints);

    json cache;
    cache["segments"] = config.segments;
    cache["ids"] = ids;
    cache["labels"] = labels;
    cache["excluded"] = excluded;
    cache["sasaki"] = {{"mean", code_json(model.mean)},
                       {"directions", json::array()},
                       {"variances", std::vector<double>(model.variances.begin(), model.variances.end())},
                       {"total_variance", model.total_variance},
                       {"rank", model.rank},
                       {"rank_deficient", model.rank_deficient},
                       {"scores", matrix_json(model.scores)}};
    for (const auto& d : model.directions) cache["sasaki"]["directions"].push_back(tangent_json(d));
    cache["l2"] = {{"variances", std::vector<double>(l2.pca.variances.begin(), l2.pca.variances.end())},
                   {"total_variance", l2.pca.total_variance},
                   {"rank", l2.pca.rank},
                   {"rank_deficient", l2.pca.rank_deficient},
                   {"scores", matrix_json(l2.pca.scores)}};
    const fs::path cache_file = cache_path(config, "pga");
    write_file(cache_file, cache.dump() + "\n");
    result.outputs.push_back(cache_file);

    const std::string tag = "L" + std::to_string(config.segments);
    const auto emit = [&](const std::string& name, const std::string& text) {
        const fs::path p = config.output_dir / name;
        write_file(p, text);
        result.outputs.push_back(p);
    };
    std::ostringstream s1, s2, j1, j2;
    write_pga_scores(s1, model.scores, ids, labels);
    write_pga_sidecar(j1, model.variances, model.total_variance, model.rank, model.rank_deficient);
    write_pga_scores(s2, l2.pca.scores, ids, labels);
    write_pga_sidecar(j2, l2.pca.variances, l2.pca.total_variance, l2.pca.rank, l2.pca.rank_deficient);
    emit("pga_sasaki_" + tag + ".csv", s1.str());
    emit("pga_sasaki_" + tag + ".json", j1.str());
    emit("pga_l2_" + tag + ".csv", s2.str());
    emit("pga_l2_" + tag + ".json", j2.str());

    std::ostringstream mean_csv;
    mean_csv << "t,lat,lon\n";
    const CubicSpline mean_spline = decode(m, model.mean);
    const auto points = sample_spline(m, mean_spline);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto ll = unit_to_latlon(points[k].coords);
        mean_csv << fmt(static_cast<double>(k) / kSamplesPerSegment) << ',' << fmt(ll[0]) << ','
                 << fmt(ll[1]) << '\n';
    }
    emit("pga_mean_spline_" + tag + ".csv", mean_csv.str());

    json summary;
    summary["samples"] = n;
    summary["excluded"] = excluded;
    summary["sasaki_modes"] = sasaki_modes;
    summary["l2_modes"] = l2_modes;
    summary["separation_sasaki"] = sep_sasaki;
    summary["separation_l2"] = sep_l2;
    summary["separation_ratio"] = sep_l2 > 0.0 ? sep_sasaki / sep_l2 : 0.0;
    emit("pga_summary_" + tag + ".json", summary.dump(2) + "\n");
    result.messages.push_back(std::to_string(n) + " splines, " + std::to_string(sasaki_modes) +
                              " modes; separation Sasaki " + fmt(sep_sasaki) + ", L2 " + fmt(sep_l2));
    return result;
}

CommandResult cmd_classify(const PipelineConfig& config) {
    CommandResult result;
    result.messages = validate(config);
    const json cache = json::parse(require(cache_path(config, "pga"), "PGA cache", "pga"));
    const auto labels = label_ints(cache["labels"].get<std::vector<std::string>>());

    CVOptions cv;
    cv.folds = config.folds;
    cv.repetitions = config.repetitions;
    cv.seed = config.seed;
    cv.standardize = config.standardize;
    cv.svm.gamma = config.gamma;
    cv.svm.C = config.C;

    std::ostringstream csv;
    json summary;
    bool header = true;
    for (const std::string method : {"sasaki", "l2"}) {
        const CVResult r = repeated_cv(json_matrix(cache[method]["scores"]), labels, cv);
        write_cv_csv(csv, method, r, header);
        header = false;
        summary[method] = summary_json(r.summary);
        result.messages.push_back(method + ": mean balanced accuracy " + fmt(r.summary.mean));
    }
    summary["settings"] = {{"segments", config.segments}, {"folds", config.folds},
                           {"repetitions", config.repetitions}, {"seed", config.seed},
                           {"gamma", config.gamma}, {"C", config.C},
                           {"standardize", config.standardize}};
    const std::string tag = "L" + std::to_string(config.segments);
    const fs::path p1 = config.output_dir / ("classification_" + tag + ".csv");
    const fs::path p2 = config.output_dir / ("classification_" + tag + ".json");
    write_file(p1, csv.str());
    write_file(p2, summary.dump(2) + "\n");
    result.outputs = {p1, p2};
    return result;
}

CommandResult cmd_export_tracks(const PipelineConfig& config) {
    CommandResult result;
    result.messages = validate(config);
    const Manifold m = sphere();
    const auto tracks = load_tracks(config);
    const auto fits = load_fits(config, config.segments, m);
    const json cache = json::parse(require(cache_path(config, "pga"), "PGA cache", "pga"));

    json features = json::array();
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const Track& t = tracks[i];
        json coords = json::array();
        for (const auto& s : t.samples) coords.push_back({s.lon, s.lat});
        features.push_back(line_feature(
            coords, {{"kind", "track"}, {"id", t.id}, {"label", to_string(t.label)}}));
        if (i < fits.size() && fits[i].ok)
            features.push_back(line_feature(lonlat(sample_spline(m, fits[i].spline)),
                                            {{"kind", "spline"}, {"id", t.id},
                                             {"label", to_string(t.label)},
                                             {"segments", config.segments}}));
    }

    const Bezierfold fold = make_fold(config);
    const SplineCode mean = json_code(cache["sasaki"]["mean"]);
    features.push_back(line_feature(lonlat(sample_spline(m, decode(m, mean))), {{"kind", "pga_mean"}}));
    const auto& dirs = cache["sasaki"]["directions"];
    const auto variances = cache["sasaki"]["variances"].get<std::vector<double>>();
    const std::size_t modes = std::min<std::size_t>(kExportModes, dirs.size());
    for (std::size_t k = 0; k < modes; ++k) {
        const SplineCodeTangent d = json_tangent(dirs[k], mean);
        for (const double sign : {1.0, -1.0}) {
            const std::vector<SplineCodeTangent> xs{d};
            const std::vector<double> w{sign * std::sqrt(variances[k])};
            try {
                const CubicSpline b = decode(m, fold.exp(mean, fold.combine(mean, xs, w)));
                features.push_back(line_feature(lonlat(sample_spline(m, b)),
                                                {{"kind", "pga_mode"}, {"mode", k + 1},
                                                 {"sign", sign > 0 ? "+" : "-"}}));
            } catch (const Error& e) {
                result.failures.push_back("mode " + std::to_string(k + 1) + (sign > 0 ? "+" : "-") +
                                          ": " + e.what());
            }
        }
    }
    const json doc = {{"type", "FeatureCollection"}, {"features", features}};
    const std::string text = doc.dump() + "\n";
    const auto problems = lint_geojson(text);
    if (!problems.empty()) throw Error(ErrorKind::InvalidArgument, "GeoJSON lint: " + problems.front());
    const fs::path path = config.output_dir / ("tracks_L" + std::to_string(config.segments) + ".geojson");
    write_file(path, text);
    result.outputs.push_back(path);
    result.messages.push_back(std::to_string(features.size()) + " features");
    return result;
}

std::vector<std::string> lint_geojson(const std::string& text) {
    std::vector<std::string> problems;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        return {std::string("not JSON: ") + e.what()};
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
        return {"top level is not a FeatureCollection"};
    if (!doc.contains("features") || !doc["features"].is_array()) return {"features is not an array"};
    std::size_t i = 0;
    for (const auto& f : doc["features"]) {
        const std::string where = "feature " + std::to_string(i++);
        if (!f.is_object() || f.value("type", "") != "Feature") {
            problems.push_back(where + ": not a Feature");
            continue;
        }
        if (!f.contains("properties") || !(f["properties"].is_object() || f["properties"].is_null()))
            problems.push_back(where + ": properties must be an object or null");
        if (!f.contains("geometry") || !f["geometry"].is_object()) {
            problems.push_back(where + ": missing geometry");
            continue;
        }
        const auto& g = f["geometry"];
        if (g.value("type", "") != "LineString") {
            problems.push_back(where + ": geometry is not a LineString");
            continue;
        }
        if (!g.contains("coordinates") || !g["coordinates"].is_array() || g["coordinates"].size() < 2) {
            problems.push_back(where + ": a LineString needs two or more positions");
            continue;
        }
        for (const auto& p : g["coordinates"]) {
            if (!p.is_array() || p.size() < 2 || p.size() > 3 ||
                !std::all_of(p.begin(), p.end(), [](const json& v) { return v.is_number(); })) {
                problems.push_back(where + ": malformed position");
                break;
            }
            const double lon = p[0].get<double>(), lat = p[1].get<double>();
            if (!std::isfinite(lon) || !std::isfinite(lat) || std::abs(lon) > 180.0 || std::abs(lat) > 90.0) {
                problems.push_back(where + ": position out of range");
                break;
            }
        }
    }
    return problems;
}

}  // namespace splinefold
