// splinefold: hurricane track pipeline (ingest, regress, pga, classify,
// export-tracks). Exit codes: 0 success, 1 some items failed, 2 fatal.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "splinefold/error.hpp"
#include "splinefold/pipeline.hpp"

using namespace splinefold;

namespace {

bool is_input_error(ErrorKind k) {
    switch (k) {
        case ErrorKind::EmptyInput:
        case ErrorKind::MalformedHeader:
        case ErrorKind::MalformedRow:
        case ErrorKind::IoError:
        case ErrorKind::MissingCache:
        case ErrorKind::InvalidArgument:
            return true;
        default:
            return false;
    }
}

int report(const CommandResult& r) {
    for (const auto& m : r.messages) std::cout << m << '\n';
    for (const auto& f : r.failures) std::cerr << "failed: " << f << '\n';
    for (const auto& p : r.outputs) std::cout << "wrote " << p.string() << '\n';
    return r.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bezier spline statistics of hurricane tracks on the sphere"};
    app.require_subcommand(1);
    app.fallthrough();

    PipelineConfig config;
    if (const char* env = std::getenv(kDataEnvVar)) config.data_path = env;
    std::string data_flag;

    app.add_option("--data", data_flag, std::string("HURDAT2 file (default $") + kDataEnvVar +
                                            " or " + kDefaultDataPath + ")");
    app.add_option("--first-year", config.first_year)->capture_default_str();
    app.add_option("--last-year", config.last_year)->capture_default_str();
    app.add_option("--basin", config.basin)->capture_default_str();
    app.add_option("-L,--segments", config.segments, "spline segments for PGA and classification")
        ->capture_default_str();
    app.add_option("-K,--geodesic-segments", config.geodesic_segments,
                   "segments of discrete Sasaki geodesics")
        ->capture_default_str();
    app.add_option("--modes", config.pga_modes, "PGA modes used as features (0 = all)")
        ->capture_default_str();
    app.add_option("--gamma", config.gamma)->capture_default_str();
    app.add_option("-C", config.C)->capture_default_str();
    app.add_option("--folds", config.folds)->capture_default_str();
    app.add_option("--repetitions", config.repetitions)->capture_default_str();
    app.add_option("--seed", config.seed)->capture_default_str();
    app.add_flag("--synoptic-only", config.synoptic_only, "keep only 00/06/12/18 UTC fixes");
    app.add_flag("--standardize", config.standardize, "z-score features per training fold");
    app.add_option("-o,--output", config.output_dir, "output directory")->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "parse, filter and label tracks");
    auto* regress = app.add_subcommand("regress", "fit L=1 and L=2 splines to every track");
    auto* pga = app.add_subcommand("pga", "Sasaki and L2 principal geodesic analysis");
    auto* classify = app.add_subcommand("classify", "repeated stratified CV of the SVM");
    auto* exporter = app.add_subcommand("export-tracks", "GeoJSON of tracks, splines and modes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (!data_flag.empty()) config.data_path = data_flag;

    try {
        if (ingest->parsed()) return report(cmd_ingest(config));
        if (regress->parsed()) return report(cmd_regress(config));
        if (pga->parsed()) return report(cmd_pga(config));
        if (classify->parsed()) return report(cmd_classify(config));
        if (exporter->parsed()) return report(cmd_export_tracks(config));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_input_error(e.kind()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
