// SPDX-License-Identifier: Apache-2.0
// hoe: command-line front end for head orientation estimation.

#include "hoe/bands.hpp"
#include "hoe/config.hpp"
#include "hoe/directivity.hpp"
#include "hoe/error.hpp"
#include "hoe/harness.hpp"
#include "hoe/simulate.hpp"
#include "hoe/wav.hpp"

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using hoe::ConfigError;
using hoe::DataError;
using json = nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Options {
    std::string config;
    std::string out;
    std::string method;
    std::string gain_mode;
    std::optional<double> grid_step;
    std::optional<std::uint64_t> seed;
};

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    out << text;
}

std::string flags_path_for(const std::string& wav_path)
{
    std::filesystem::path p(wav_path);
    p.replace_extension(".flags.csv");
    return p.string();
}

int cmd_model_pattern(const Options& o)
{
    hoe::ModelParams params;
    if (!o.config.empty()) {
        const auto j = hoe::read_json_file(o.config);
        params = hoe::parse_model_params(j.contains("model") ? j.at("model") : j);
    }
    const double step = o.grid_step.value_or(1.0);
    if (!(step > 0.0)) {
        throw ConfigError("--grid-step must be positive");
    }
    const auto pattern = hoe::model_pattern(params, hoe::nominal_band_centers(), hoe::uniform_grid(-180.0, 180.0 - step, step),
                                            hoe::uniform_grid(-90.0, 90.0, step));
    hoe::save_pattern(pattern, o.out);
    spdlog::info("wrote {} bands to {}", pattern.band_count(), o.out);
    return 0;
}

int cmd_simulate(const Options& o)
{
    const auto j = hoe::read_json_file(o.config);
    const auto base = hoe::directory_of(o.config);
    auto scene = hoe::parse_scene(j.contains("scene") ? j.at("scene") : j, base);
    if (o.seed) {
        scene.noise_seed = *o.seed;
        scene.source.seed = *o.seed + 1;
    }
    const auto exp = hoe::parse_experiment(j, base);
    const auto pattern_spec = j.value("pattern", std::string("model"));
    const auto pattern = pattern_spec == "model"
                             ? hoe::model_pattern(exp.model, hoe::nominal_band_centers(), hoe::uniform_grid(-180.0, 179.0, 1.0),
                                                  hoe::uniform_grid(-90.0, 90.0, 1.0))
                             : hoe::load_pattern(exp.measured_pattern_path.empty() ? pattern_spec : exp.measured_pattern_path);
    const auto rendered = hoe::render(scene, pattern, exp.stft);
    hoe::write_wav(o.out, rendered.audio);
    hoe::write_flags_csv(flags_path_for(o.out), rendered.speech_active);
    spdlog::info("wrote {} channels to {}", rendered.audio.channels.size(), o.out);
    return 0;
}

int cmd_estimate(const Options& o)
{
    auto j = hoe::read_json_file(o.config);
    const auto base = hoe::directory_of(o.config);

    const auto pattern_spec = j.value("pattern", std::string("model"));
    std::string method_name = o.method.empty() ? j.value("method", std::string("RAPM")) : o.method;
    if (method_name == "RAPM") {
        method_name = pattern_spec == "model" ? "RAPM-model" : "RAPM-measured";
    }
    const auto method = hoe::parse_method(method_name);
    if (method == hoe::Method::RapmMeasured) {
        if (pattern_spec == "model") {
            throw ConfigError("RAPM-measured needs a pattern file");
        }
        j["measured_pattern"] = pattern_spec;
    }
    auto cfg = hoe::parse_experiment(j, base);
    cfg.methods = {method};
    cfg.gain_modes = {hoe::parse_gain_mode(o.gain_mode.empty() ? j.value("gain_mode", std::string("lfa")) : o.gain_mode)};
    if (o.grid_step) {
        cfg.grid = hoe::CandidateGrid::full_circle(*o.grid_step);
    }
    cfg.threads = 1;

    hoe::SceneConfig scene;
    scene.name = j.value("name", std::string("input"));
    if (!j.contains("geometry")) {
        throw ConfigError("estimate: missing geometry");
    }
    scene.geometry = hoe::parse_geometry(j.at("geometry"));
    scene.talker_orientation_deg = j.value("talker_orientation_deg", 0.0);

    std::vector<std::string> wavs;
    if (!j.contains("wav")) {
        throw ConfigError("estimate: missing wav");
    }
    if (j.at("wav").is_string()) {
        wavs.push_back(j.at("wav").get<std::string>());
    } else {
        wavs = j.at("wav").get<std::vector<std::string>>();
    }
    for (auto& w : wavs) {
        if (!std::filesystem::path(w).is_absolute() && !base.empty()) {
            w = (std::filesystem::path(base) / w).string();
        }
    }
    const auto audio = wavs.size() == 1 ? hoe::read_wav(wavs.front()) : hoe::read_wav_channels(wavs);
    if (audio.sample_rate != cfg.stft.sample_rate) {
        throw DataError(fmt::format("sample rate {} does not match the configured {}", audio.sample_rate,
                                    cfg.stft.sample_rate));
    }
    if (audio.channels.size() != scene.geometry.size()) {
        throw DataError(fmt::format("{} channels but {} microphones", audio.channels.size(), scene.geometry.size()));
    }

    std::vector<bool> flags;
    if (j.contains("flags")) {
        auto fp = j.at("flags").get<std::string>();
        if (!std::filesystem::path(fp).is_absolute() && !base.empty()) {
            fp = (std::filesystem::path(base) / fp).string();
        }
        flags = hoe::read_flags_csv(fp);
    } else {
        flags = hoe::energy_vad(audio.channels.front(), cfg.stft, cfg.vad_threshold_dbfs, cfg.vad_hangover);
    }

    cfg.scenes = {{scene, std::nullopt}};
    const hoe::Experiment experiment(cfg);
    const auto result = experiment.evaluate_audio(scene, audio, flags);
    std::string csv = "frame,theta_hat,confidence\n";
    for (const auto& r : result.records) {
        csv += fmt::format("{},{},{}\n", r.frame, r.theta_hat ? fmt::format("{:.4f}", *r.theta_hat) : std::string(),
                           r.confidence ? fmt::format("{:.6f}", *r.confidence) : std::string());
    }
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        write_text(o.out, csv);
    }
    return 0;
}

int cmd_eval(const Options& o)
{
    auto j = hoe::read_json_file(o.config);
    if (o.seed) {
        j["seed"] = *o.seed;
        if (j.contains("van_scenes")) {
            j["van_scenes"]["seed"] = *o.seed;
        }
        if (j.contains("scenes")) {
            std::uint64_t k = 0;
            for (auto& s : j["scenes"]) {
                s["noise_seed"] = *o.seed + 2 * k;
                s["source"]["seed"] = *o.seed + 2 * k + 1;
                ++k;
            }
        }
    }
    auto cfg = hoe::parse_experiment(j, hoe::directory_of(o.config));
    if (!o.method.empty()) {
        cfg.methods = {hoe::parse_method(o.method)};
    }
    if (!o.gain_mode.empty()) {
        cfg.gain_modes = {hoe::parse_gain_mode(o.gain_mode)};
    }
    if (o.grid_step) {
        cfg.grid = hoe::CandidateGrid::full_circle(*o.grid_step);
    }
    std::filesystem::create_directories(o.out);
    const auto output = hoe::run(cfg, o.out);
    for (const auto& [scene, why] : output.summary.failures) {
        spdlog::error("scene {} failed: {}", scene, why);
    }
    return output.summary.failures.empty() ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Head orientation estimation from multi-microphone speech"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON configuration file");
        sub->add_option("--out", o.out, "output path");
    };

    auto* pattern = app.add_subcommand("model-pattern", "tabulate the analytic directivity pattern");
    add_common(pattern);
    pattern->add_option("--grid-step", o.grid_step, "angular grid step in degrees");
    pattern->get_option("--out")->required();

    auto* simulate = app.add_subcommand("simulate", "render a scene to a multichannel WAV file");
    add_common(simulate);
    simulate->add_option("--seed", o.seed, "override the scene seeds");
    simulate->get_option("--config")->required();
    simulate->get_option("--out")->required();

    auto* estimate = app.add_subcommand("estimate", "estimate orientation per frame from recordings");
    add_common(estimate);
    estimate->add_option("--method", o.method, "HLBR, HBV, SD, RAPM, RAPM-model or RAPM-measured");
    estimate->add_option("--gain-mode", o.gain_mode, "none, distance, lfa or lfa_converged");
    estimate->add_option("--grid-step", o.grid_step, "candidate grid step in degrees");
    estimate->get_option("--config")->required();

    auto* eval = app.add_subcommand("eval", "run an experiment and write frames.csv and summary.json");
    add_common(eval);
    eval->add_option("--method", o.method, "restrict to one method");
    eval->add_option("--gain-mode", o.gain_mode, "restrict to one gain mode");
    eval->add_option("--grid-step", o.grid_step, "candidate grid step in degrees");
    eval->add_option("--seed", o.seed, "override the scene seeds");
    eval->get_option("--config")->required();
    eval->get_option("--out")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*pattern) {
            return cmd_model_pattern(o);
        }
        if (*simulate) {
            return cmd_simulate(o);
        }
        if (*estimate) {
            return cmd_estimate(o);
        }
        return cmd_eval(o);
    } catch (const ConfigError& e) {
        spdlog::error("configuration: {}", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        spdlog::error("data: {}", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    }
}
