#pragma once

// Subcommands behind the torchpilot executable: run, suite, features,
// validate-config.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "torchpilot/config.hpp"
#include "torchpilot/error.hpp"
#include "torchpilot/features.hpp"
#include "torchpilot/harness.hpp"
#include "torchpilot/ppm.hpp"

namespace torchpilot::cli {

namespace fs = std::filesystem;

inline constexpr const char* kOutEnv = "TORCHPILOT_OUT";

/// --out flag, then run.out_dir from the config, then $TORCHPILOT_OUT, then "out".
inline fs::path resolve_out_dir(const std::optional<std::string>& flag, const config::RunConfig& cfg)
{
    if (flag) return *flag;
    if (cfg.out_dir) return *cfg.out_dir;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    return "out";
}

inline std::string run_dir_name(const harness::RunResult& r)
{
    return std::string(harness::to_string(r.mode)) + "_" + harness::thickness_label(r.thickness);
}

namespace detail {

inline void create_dirs(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

inline void finish(std::ofstream& out, const fs::path& path)
{
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::string frame_name(harness::Phase phase, std::size_t index)
{
    char buf[32];
    if (phase == harness::Phase::Calibrate) {
        std::snprintf(buf, sizeof buf, "cal_%02zu.ppm", index);
    } else {
        std::snprintf(buf, sizeof buf, "frame_%05zu.ppm", index);
    }
    return buf;
}

} // namespace detail

/// Execute the configured runs and write their artifacts under `out`.
/// Returns 0 iff no run aborted.
inline int cmd_run(const config::RunConfig& cfg, const fs::path& out, bool force_suite, std::ostream& log)
{
    auto specs = config::run_specs(cfg, force_suite);
    detail::create_dirs(out);

    std::vector<fs::path> dirs;
    for (auto& s : specs) {
        harness::RunResult probe;
        probe.mode = s.mode;
        probe.thickness = s.config.plate.thickness;
        dirs.push_back(out / run_dir_name(probe));
        detail::create_dirs(dirs.back());
        if (cfg.dump_frames) {
            const fs::path frames = dirs.back() / "frames";
            detail::create_dirs(frames);
            s.config.frame_sink = [frames](const imgproc::RgbImage& img, harness::Phase phase, std::size_t index) {
                if (phase != harness::Phase::Calibrate && phase != harness::Phase::Combustion) return;
                ppm::write_file(frames / detail::frame_name(phase, index), img);
            };
        }
    }

    const unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
    const auto results = harness::run_all(specs, jobs);

    bool any_abort = false;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        const fs::path path = dirs[k] / "telemetry.csv";
        auto f = detail::open_out(path);
        harness::write_telemetry_csv(f, r.telemetry);
        detail::finish(f, path);
        log << run_dir_name(r) << ": success_ratio=" << std::fixed << std::setprecision(3) << r.success_ratio
            << " steps=" << r.combustion_steps;
        if (r.abort) log << " aborted (" << harness::to_string(*r.abort) << ": " << r.abort_detail << ")";
        log << '\n';
        any_abort = any_abort || r.aborted();
    }
    const fs::path summary = out / "summary.csv";
    auto f = detail::open_out(summary);
    harness::write_summary_csv(f, results);
    detail::finish(f, summary);
    return any_abort ? 1 : 0;
}

struct FeatureRow {
    std::size_t frame_index;
    std::optional<features::PoolFeatures> features;
    bool pool_lost;
};

/// Offline feature extraction over a directory of dumped frames:
/// cal_*.ppm feed calibration, frame_*.ppm are measured in name order.
inline std::vector<FeatureRow> extract_features(const fs::path& dir, const features::PerceptionParams& params,
                                                features::Calibration* cal_out = nullptr)
{
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> cal_files, frame_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.path().extension() != ".ppm") continue;
        if (name.rfind("cal_", 0) == 0) cal_files.push_back(entry.path());
        if (name.rfind("frame_", 0) == 0) frame_files.push_back(entry.path());
    }
    if (cal_files.empty()) throw CalibrationFailed("no calibration frames (cal_*.ppm) in " + dir.string());
    std::sort(cal_files.begin(), cal_files.end());
    std::sort(frame_files.begin(), frame_files.end());

    std::vector<imgproc::QuantizedImage> cal_frames;
    for (const auto& p : cal_files) cal_frames.push_back(imgproc::quantize(ppm::read_file(p), params.cutoffs));
    const auto cal = features::calibrate(cal_frames, params.intensity);
    if (cal_out) *cal_out = cal;

    std::vector<FeatureRow> rows;
    features::SampleHold hold(params.hold_steps);
    for (std::size_t k = 0; k < frame_files.size(); ++k) {
        const auto m = features::measure_frame(ppm::read_file(frame_files[k]), cal, params);
        const auto held = hold.update(m, params.lambda);
        rows.push_back({k, held.features, held.pool_lost});
    }
    return rows;
}

/// Columns frame_index,c,i,s,pool_lost; c/i/s stay empty once the hold expires.
inline void write_features_csv(std::ostream& out, const std::vector<FeatureRow>& rows)
{
    out << "frame_index,c,i,s,pool_lost\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& r : rows) {
        out << r.frame_index << ',';
        if (r.features) {
            out << r.features->convexity << ',' << r.features->intensity << ',' << r.features->state;
        } else {
            out << ",,";
        }
        out << ',' << (r.pool_lost ? 1 : 0) << '\n';
    }
}

inline int cmd_features(const fs::path& dir, const config::RunConfig& cfg, std::ostream& csv, std::ostream& log)
{
    features::Calibration cal;
    const auto rows = extract_features(dir, cfg.perception, &cal);
    log << "calibration centroid (" << cal.centroid.x << ", " << cal.centroid.y << "), I_cal "
        << cal.baseline_intensity << '\n';
    write_features_csv(csv, rows);
    return 0;
}

/// Full command-line entry point. Returns the process exit status:
/// 0 ok, 1 a run aborted, 2 usage/config/I-O failure.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Vision-guided torch speed control simulator", "torchpilot"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool dump_frames = false;
    std::optional<int> jobs;
    std::optional<std::string> mode;
    std::optional<double> thickness;
    std::optional<double> v_const;

    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "Base random seed");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_flag("--dump-frames", dump_frames, "Write PPM frames per run");
        sub->add_option("--jobs", jobs, "Parallel runs (0: hardware threads)")->check(CLI::NonNegativeNumber);
    };

    auto* run = app.add_subcommand("run", "Run one configured experiment (or the suite if run.suite is set)");
    add_run_flags(run);
    run->add_option("--mode", mode, "slow | fast | controlled | constant")
        ->check(CLI::IsMember({"slow", "fast", "controlled", "constant"}));
    run->add_option("--thickness", thickness, "Plate thickness in inches");
    run->add_option("--v-const", v_const, "Torch speed for constant mode, cm/s");

    auto* suite = app.add_subcommand("suite", "Run the 3 x 3 mode/thickness suite");
    add_run_flags(suite);

    std::string frames_dir;
    std::optional<std::string> csv_path;
    auto* feats = app.add_subcommand("features", "Extract per-frame features from dumped PPM frames");
    feats->add_option("frames_dir", frames_dir, "Directory with cal_*.ppm and frame_*.ppm")->required();
    feats->add_option("--config", config_path, "JSON config file");
    feats->add_option("--out", csv_path, "CSV output path (default: stdout)");

    auto* validate = app.add_subcommand("validate-config", "Check a config file and print the resolved config");
    validate->add_option("--config", config_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        config::RunConfig cfg = config_path ? config::load_config(*config_path) : config::RunConfig{};

        if (validate->parsed()) {
            out << config::serialize(cfg);
            return 0;
        }
        if (feats->parsed()) {
            if (csv_path) {
                auto f = detail::open_out(*csv_path);
                const int rc = cmd_features(frames_dir, cfg, f, err);
                detail::finish(f, *csv_path);
                return rc;
            }
            return cmd_features(frames_dir, cfg, out, err);
        }

        if (seed) cfg.seed = *seed;
        if (dump_frames) cfg.dump_frames = true;
        if (jobs) cfg.jobs = *jobs;
        if (mode) {
            cfg.mode = config::detail::parse_enum(*mode,
                                                  {harness::Mode::Slow, harness::Mode::Fast,
                                                   harness::Mode::Controlled, harness::Mode::Constant},
                                                  "--mode");
        }
        if (thickness) cfg.thickness = *thickness;
        if (v_const) cfg.v_const = *v_const;
        cfg.validate();
        return cmd_run(cfg, resolve_out_dir(out_dir, cfg), suite->parsed(), out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 2;
}

} // namespace torchpilot::cli
