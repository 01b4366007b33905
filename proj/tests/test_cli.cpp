#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "torchpilot/cli.hpp"

using namespace torchpilot;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr)
{
    args.insert(args.begin(), "torchpilot");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int rc = cli::main(static_cast<int>(argv.size()), argv.data(), o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return rc;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_files(const fs::path& dir, const std::string& prefix)
{
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().rfind(prefix, 0) == 0;
    return n;
}

std::size_t count_rows(const fs::path& csv, const std::string& needle)
{
    std::ifstream in(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) n += line.find(needle) != std::string::npos;
    return n;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const auto p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

// Short path keeps CLI runs fast.
const char* kShort = R"({"plant": {"path_length": 4.0}})";

} // namespace

TEST(Cli, OutDirPrecedence)
{
    config::RunConfig cfg;
    ::unsetenv(cli::kOutEnv);
    EXPECT_EQ(cli::resolve_out_dir(std::nullopt, cfg), fs::path("out"));
    ::setenv(cli::kOutEnv, "/tmp/env_out", 1);
    EXPECT_EQ(cli::resolve_out_dir(std::nullopt, cfg), fs::path("/tmp/env_out"));
    cfg.out_dir = "cfg_out";
    EXPECT_EQ(cli::resolve_out_dir(std::nullopt, cfg), fs::path("cfg_out"));
    EXPECT_EQ(cli::resolve_out_dir(std::string("flag_out"), cfg), fs::path("flag_out"));
    ::unsetenv(cli::kOutEnv);
}

TEST(Cli, ValidateConfigPrintsResolvedConfig)
{
    testsupport::TempDir dir;
    std::string out, err;
    EXPECT_EQ(invoke({"validate-config", "--config", write_config(dir.path(), R"({"controller": {"gain": 50}})").string()},
                     &out, &err),
              0);
    EXPECT_NE(out.find("\"gain\": 50.0"), std::string::npos) << out;

    EXPECT_EQ(invoke({"validate-config", "--config", write_config(dir.path(), R"({"controller": {"gain": -1}})").string()},
                     &out, &err),
              2);
    EXPECT_NE(err.find("gain must be > 0"), std::string::npos) << err;

    EXPECT_EQ(invoke({"validate-config", "--config", write_config(dir.path(), "{ nope").string()}, &out, &err), 2);
    EXPECT_NE(err.find("line 1"), std::string::npos) << err;
}

TEST(Cli, UsageErrors)
{
    std::string out, err;
    EXPECT_EQ(invoke({}, &out, &err), 2);
    EXPECT_EQ(invoke({"bogus"}, &out, &err), 2);
    EXPECT_EQ(invoke({"run", "--mode", "warp"}, &out, &err), 2);
    EXPECT_EQ(invoke({"--help"}, &out, &err), 0);
}

TEST(Cli, SuiteWritesNineTelemetryFilesAndSummary)
{
    testsupport::TempDir dir;
    const auto cfg = write_config(dir.path(), kShort);
    const auto out = dir.path() / "out";
    std::string log;
    EXPECT_EQ(invoke({"suite", "--config", cfg.string(), "--out", out.string(), "--jobs", "3"}, &log), 0) << log;

    std::size_t telemetry = 0;
    for (const auto& e : fs::recursive_directory_iterator(out)) telemetry += e.path().filename() == "telemetry.csv";
    EXPECT_EQ(telemetry, 9u);
    EXPECT_TRUE(fs::exists(out / "controlled_0.375" / "telemetry.csv"));
    EXPECT_TRUE(fs::exists(out / "slow_0.250" / "telemetry.csv"));
    ASSERT_TRUE(fs::exists(out / "summary.csv"));
    const auto summary = slurp(out / "summary.csv");
    EXPECT_EQ(summary.rfind("mode,thickness,success_ratio,steps,aborted,cause\n", 0), 0u);
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 10);
}

TEST(Cli, FrameDumpMatchesCombustionRows)
{
    testsupport::TempDir dir;
    const auto cfg = write_config(dir.path(), kShort);
    const auto out = dir.path() / "out";
    ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", out.string(), "--dump-frames"}), 0);
    const auto run_dir = out / "controlled_0.375";
    const auto frames = run_dir / "frames";
    EXPECT_EQ(count_files(frames, "frame_"), count_rows(run_dir / "telemetry.csv", ",combustion,"));
    EXPECT_EQ(count_files(frames, "cal_"), 10u);
}

TEST(Cli, RepeatedRunsAreByteIdentical)
{
    testsupport::TempDir dir;
    const auto cfg = write_config(dir.path(), kShort);
    const auto a = dir.path() / "a";
    const auto b = dir.path() / "b";
    ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", a.string(), "--seed", "77", "--dump-frames"}), 0);
    ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", b.string(), "--seed", "77", "--dump-frames"}), 0);
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        ASSERT_TRUE(fs::exists(b / rel)) << rel;
        EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    }
}

TEST(Cli, AbortGivesNonzeroExit)
{
    testsupport::TempDir dir;
    const auto cfg = write_config(dir.path(), R"({"plant": {"path_length": 2.0}, "run": {"mode": "constant", "v_const": 0}})");
    std::string log;
    EXPECT_EQ(invoke({"run", "--config", cfg.string(), "--out", (dir.path() / "o").string()}, &log), 1);
    EXPECT_NE(log.find("path-timeout"), std::string::npos) << log;
    EXPECT_NE(slurp(dir.path() / "o" / "summary.csv").find("constant,0.375"), std::string::npos);
}

TEST(Cli, UnwritableOutputIsAnError)
{
    testsupport::TempDir dir;
    std::ofstream(dir.path() / "blocker") << "x";
    std::string out, err;
    const auto cfg = write_config(dir.path(), kShort);
    EXPECT_EQ(invoke({"run", "--config", cfg.string(), "--out", (dir.path() / "blocker" / "sub").string()}, &out, &err), 2);
    EXPECT_NE(err.find("blocker"), std::string::npos) << err;
}

TEST(Cli, FeaturesFromDumpedFrames)
{
    testsupport::TempDir dir;
    const auto cfg = write_config(dir.path(), kShort);
    const auto out = dir.path() / "out";
    ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", out.string(), "--dump-frames"}), 0);
    const auto frames = out / "controlled_0.375" / "frames";

    features::Calibration cal;
    const auto rows = cli::extract_features(frames, features::PerceptionParams{}, &cal);
    EXPECT_NEAR(cal.centroid.x, 64.0, 1.0);
    EXPECT_NEAR(cal.centroid.y, 64.0, 1.0);
    EXPECT_EQ(rows.size(), count_files(frames, "frame_"));

    // Inject an all-Black frame mid-sequence.
    const auto mid = rows.size() / 2;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.ppm", mid);
    ppm::write_file(frames / name, imgproc::RgbImage(128, 128));
    const auto with_gap = cli::extract_features(frames, features::PerceptionParams{});
    EXPECT_TRUE(with_gap[mid].pool_lost);
    EXPECT_FALSE(with_gap[mid + 1].pool_lost);

    const auto csv = dir.path() / "features.csv";
    ASSERT_EQ(invoke({"features", frames.string(), "--out", csv.string()}), 0);
    const auto text = slurp(csv);
    EXPECT_EQ(text.rfind("frame_index,c,i,s,pool_lost\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows.size() + 1);
}

TEST(Cli, FeaturesWithLambdaOneCopiesConvexity)
{
    testsupport::TempDir dir;
    const auto out = dir.path() / "out";
    ASSERT_EQ(invoke({"run", "--config", write_config(dir.path(), kShort).string(), "--out", out.string(),
                      "--dump-frames"}),
              0);
    features::PerceptionParams params;
    params.lambda = 1.0;
    for (const auto& r : cli::extract_features(out / "controlled_0.375" / "frames", params)) {
        ASSERT_TRUE(r.features);
        EXPECT_EQ(r.features->state, r.features->convexity);
    }
}

TEST(Cli, FeaturesWithoutCalibrationFramesFails)
{
    testsupport::TempDir dir;
    ppm::write_file(dir.path() / "frame_00000.ppm", imgproc::RgbImage(8, 8));
    EXPECT_THROW(cli::extract_features(dir.path(), features::PerceptionParams{}), CalibrationFailed);
    std::string out, err;
    EXPECT_EQ(invoke({"features", dir.path().string()}, &out, &err), 2);
    EXPECT_NE(err.find("calibration"), std::string::npos);
}

TEST(Cli, BinaryRuns)
{
    testsupport::TempDir dir;
    const std::string cmd = std::string(TORCHPILOT_CLI_PATH) + " validate-config --config " +
                            write_config(dir.path(), "").string() + " > " + (dir.path() / "o.txt").string();
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_NE(slurp(dir.path() / "o.txt").find("\"gain\": 200.0"), std::string::npos);
}
