// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <spdlog/fmt/fmt.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const auto cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", HOE_CLI_PATH, args);
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / fmt::format("hoe_cli_{}", ::getpid());
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

const std::string kGeometry = R"({"mics": [{"azimuth_deg": 0, "distance_m": 1.0}, {"azimuth_deg": 90, "distance_m": 1.2},
                        {"azimuth_deg": -90, "distance_m": 0.8}, {"azimuth_deg": -180, "distance_m": 1.1}]})";

const std::string kScene = R"({"name": "desk", "geometry": )" + kGeometry + R"(, "talker_orientation_deg": 90,
  "source": {"type": "speech_shaped", "duration_s": 2.0, "seed": 3}})";

}  // namespace

TEST_CASE("exit codes")
{
    TempDir dir;
    CHECK(run("") == 2);
    CHECK(run("eval --config") == 2);
    CHECK(run(fmt::format("eval --config {} --out {}", (dir.path / "missing.json").string(), dir.path.string())) == 2);
    const auto bad = dir.write("bad.json", R"({"methods": ["RAPM-unknown"]})");
    CHECK(run(fmt::format("eval --config {} --out {}", bad.string(), (dir.path / "o").string())) == 2);
    const auto missing_wav = dir.write("est.json", R"({"wav": "nothing.wav", "geometry": {"mics": [
        {"azimuth_deg": 0, "distance_m": 1}, {"azimuth_deg": 90, "distance_m": 1}]}})");
    CHECK(run(fmt::format("estimate --config {}", missing_wav.string())) == 3);
}

TEST_CASE("model-pattern, simulate and estimate round trip")
{
    TempDir dir;
    const auto pattern = dir.path / "pattern.json";
    REQUIRE(run(fmt::format("model-pattern --grid-step 5 --out {}", pattern.string())) == 0);
    CHECK(fs::file_size(pattern) > 1000);

    const auto scene = dir.write("scene.json", kScene);
    const auto wav = dir.path / "desk.wav";
    REQUIRE(run(fmt::format("simulate --config {} --out {} --seed 5", scene.string(), wav.string())) == 0);
    CHECK(fs::exists(dir.path / "desk.flags.csv"));

    const auto est = dir.write("est.json", fmt::format(R"({{"wav": "desk.wav", "flags": "desk.flags.csv",
        "pattern": "pattern.json", "geometry": {}}})",
                                                       kGeometry));
    const auto out = dir.path / "est.csv";
    REQUIRE(run(fmt::format("estimate --config {} --method RAPM --gain-mode distance --grid-step 5 --out {}",
                            est.string(), out.string())) == 0);
    std::ifstream in(out);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "frame,theta_hat,confidence");
    int rows = 0, near = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        const double theta = std::stod(line.substr(a + 1, b - a - 1));
        near += std::abs(theta - 90.0) <= 10.0;
    }
    CHECK(rows > 20);
    CHECK(near >= rows * 8 / 10);
}

TEST_CASE("eval is deterministic")
{
    TempDir dir;
    const auto cfg = dir.write("eval.json", R"({"methods": ["SD", "RAPM-model"], "gain_modes": ["lfa"],
        "van_scenes": {"orientations_deg": [0], "positions": ["rear_right"], "source": {"duration_s": 1.5},
                       "snr_db": 15}})");
    REQUIRE(run(fmt::format("eval --config {} --out {} --seed 9", cfg.string(), (dir.path / "a").string())) == 0);
    REQUIRE(run(fmt::format("eval --config {} --out {} --seed 9", cfg.string(), (dir.path / "b").string())) == 0);
    REQUIRE(run(fmt::format("eval --config {} --out {} --seed 10", cfg.string(), (dir.path / "c").string())) == 0);
    CHECK(slurp(dir.path / "a" / "frames.csv") == slurp(dir.path / "b" / "frames.csv"));
    CHECK(slurp(dir.path / "a" / "summary.json") == slurp(dir.path / "b" / "summary.json"));
    CHECK(slurp(dir.path / "a" / "frames.csv") != slurp(dir.path / "c" / "frames.csv"));
}
