// SPDX-License-Identifier: Apache-2.0
#include "hoe/config.hpp"

#include "hoe/error.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>

namespace hoe {

namespace {

using json = nlohmann::json;

std::string resolve(const std::string& path, const std::string& base_dir)
{
    if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / path).string();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::pair<double, double> range_or(const json& j, const char* key, double lo, double hi)
{
    if (!j.contains(key)) {
        return {lo, hi};
    }
    const auto v = get_or<std::vector<double>>(j, key, {});
    if (v.size() != 2) {
        throw ConfigError(std::string("config key '") + key + "' must be [lo_hz, hi_hz]");
    }
    return {v[0], v[1]};
}

StftConfig parse_stft(const json& j)
{
    StftConfig s;
    s.sample_rate = get_or(j, "sample_rate", s.sample_rate);
    s.frame_size = get_or(j, "frame_size", s.frame_size);
    s.hop_size = get_or(j, "hop_size", s.hop_size);
    const auto window = get_or<std::string>(j, "window", "hann");
    if (window != "hann" && window != "Hann") {
        throw ConfigError("stft: only the Hann window is supported");
    }
    s.validate();
    return s;
}

}  // namespace

ModelParams parse_model_params(const json& j)
{
    ModelParams p;
    p.head_radius_m = get_or(j, "head_radius_m", p.head_radius_m);
    if (j.contains("piston_half_angle_deg")) {
        p.piston_half_angle_rad = get_or(j, "piston_half_angle_deg", 5.7) * std::numbers::pi / 180.0;
    }
    p.max_order = get_or(j, "max_order", p.max_order);
    p.speed_of_sound = get_or(j, "speed_of_sound", p.speed_of_sound);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

MicGeometry parse_geometry(const json& j)
{
    MicGeometry g;
    try {
        if (j.contains("mics")) {
            for (const auto& m : j.at("mics")) {
                Microphone mic;
                mic.azimuth_deg = m.at("azimuth_deg").get<double>();
                mic.elevation_deg = get_or(m, "elevation_deg", 0.0);
                mic.distance_m = m.at("distance_m").get<double>();
                mic.gain_offset_db = get_or(m, "gain_offset_db", 0.0);
                g.mics.push_back(mic);
            }
        } else if (j.contains("mic_positions")) {
            std::vector<Point3> pts;
            for (const auto& p : j.at("mic_positions")) {
                const auto v = p.get<std::vector<double>>();
                if (v.size() != 3) {
                    throw ConfigError("geometry: positions must be [x, y, z]");
                }
                pts.push_back({v[0], v[1], v[2]});
            }
            const auto t = get_or<std::vector<double>>(j, "talker_position", {0.0, 0.0, 0.0});
            if (t.size() != 3) {
                throw ConfigError("geometry: talker_position must be [x, y, z]");
            }
            g = geometry_from_positions(pts, {t[0], t[1], t[2]});
            const auto offsets = get_or<std::vector<double>>(j, "gain_offsets_db", {});
            for (std::size_t m = 0; m < offsets.size() && m < g.size(); ++m) {
                g.mics[m].gain_offset_db = offsets[m];
            }
        } else {
            throw ConfigError("geometry: expected 'mics' or 'mic_positions'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
    g.validate();
    return g;
}

SourceSpec parse_source(const json& j, const std::string& base_dir)
{
    SourceSpec s;
    const auto type = get_or<std::string>(j, "type", "speech_shaped");
    if (type == "speech_shaped") {
        s.kind = SourceKind::SpeechShaped;
    } else if (type == "pink") {
        s.kind = SourceKind::Pink;
    } else if (type == "white") {
        s.kind = SourceKind::White;
    } else if (type == "wav") {
        s.kind = SourceKind::Wav;
        s.wav_path = resolve(get_or<std::string>(j, "path", ""), base_dir);
        if (s.wav_path.empty()) {
            throw ConfigError("source: wav source needs a path");
        }
    } else {
        throw ConfigError("source: unknown type " + type);
    }
    s.duration_s = get_or(j, "duration_s", s.duration_s);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    s.level_dbfs = get_or(j, "level_dbfs", s.level_dbfs);
    return s;
}

SceneConfig parse_scene(const json& j, const std::string& base_dir)
{
    SceneConfig s;
    s.name = get_or<std::string>(j, "name", s.name);
    if (!j.contains("geometry")) {
        throw ConfigError("scene " + s.name + ": missing geometry");
    }
    s.geometry = parse_geometry(j.at("geometry"));
    s.talker_orientation_deg = get_or(j, "talker_orientation_deg", 0.0);
    if (j.contains("source")) {
        s.source = parse_source(j.at("source"), base_dir);
    }
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) {
        s.snr_db = get_or(j, "snr_db", 0.0);
    }
    s.noise_seed = get_or<std::uint64_t>(j, "noise_seed", s.noise_seed);
    s.sample_rate = get_or(j, "sample_rate", s.sample_rate);
    s.speed_of_sound = get_or(j, "speed_of_sound", s.speed_of_sound);
    s.position = get_or<std::string>(j, "position", s.position);
    s.off_center = get_or(j, "off_center", s.off_center);
    s.mirrored = get_or(j, "mirrored", s.mirrored);
    s.validate();
    return s;
}

ExperimentConfig parse_experiment(const json& j, const std::string& base_dir)
{
    ExperimentConfig c;
    if (j.contains("stft")) {
        c.stft = parse_stft(j.at("stft"));
    }
    if (j.contains("smoothing")) {
        const auto& s = j.at("smoothing");
        c.smoothing.tau_psd = get_or(s, "tau_psd", c.smoothing.tau_psd);
        c.smoothing.tau_lfa = get_or(s, "tau_lfa", c.smoothing.tau_lfa);
        c.smoothing.validate();
    }
    if (j.contains("model")) {
        c.model = parse_model_params(j.at("model"));
    }
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : get_or<std::vector<std::string>>(j, "methods", {})) {
            c.methods.push_back(parse_method(m));
        }
    }
    if (j.contains("gain_modes")) {
        c.gain_modes.clear();
        for (const auto& g : get_or<std::vector<std::string>>(j, "gain_modes", {})) {
            c.gain_modes.push_back(parse_gain_mode(g));
        }
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        const double step = get_or(g, "step", 1.0);
        if (g.contains("start") || g.contains("stop")) {
            c.grid = CandidateGrid::range(get_or(g, "start", -180.0), get_or(g, "stop", 179.0), step);
        } else {
            c.grid = CandidateGrid::full_circle(step);
        }
    }
    if (j.contains("bands")) {
        const auto& b = j.at("bands");
        auto& f = c.bands.features;
        std::tie(f.hlbr_low_lo, f.hlbr_low_hi) = range_or(b, "hlbr_low", f.hlbr_low_lo, f.hlbr_low_hi);
        std::tie(f.hlbr_high_lo, f.hlbr_high_hi) = range_or(b, "hlbr_high", f.hlbr_high_lo, f.hlbr_high_hi);
        std::tie(f.variance_high_lo, f.variance_high_hi) =
            range_or(b, "variance_high", f.variance_high_lo, f.variance_high_hi);
        std::tie(c.bands.matching_lo_hz, c.bands.matching_hi_hz) =
            range_or(b, "matching", c.bands.matching_lo_hz, c.bands.matching_hi_hz);
        std::tie(c.bands.lfa_lo_hz, c.bands.lfa_hi_hz) = range_or(b, "lfa", c.bands.lfa_lo_hz, c.bands.lfa_hi_hz);
        std::tie(c.bands.analysis_lo_hz, c.bands.analysis_hi_hz) =
            range_or(b, "analysis", c.bands.analysis_lo_hz, c.bands.analysis_hi_hz);
    }
    c.measured_pattern_path = resolve(get_or<std::string>(j, "measured_pattern", ""), base_dir);
    const auto render_pattern = get_or<std::string>(j, "render_pattern", "model");
    if (render_pattern != "model" && render_pattern != "measured") {
        throw ConfigError("render_pattern must be 'model' or 'measured'");
    }
    c.render_with_measured = render_pattern == "measured";
    c.reference_mic = get_or(j, "reference_mic", c.reference_mic);
    c.lifter_length = get_or(j, "lifter_length", c.lifter_length);
    c.clamp_sd = get_or(j, "clamp_sd", c.clamp_sd);
    c.vad_threshold_dbfs = get_or(j, "vad_threshold_dbfs", c.vad_threshold_dbfs);
    c.vad_hangover = get_or(j, "vad_hangover", c.vad_hangover);
    c.threads = get_or(j, "threads", c.threads);

    if (j.contains("scenes")) {
        for (const auto& s : j.at("scenes")) {
            EvalScene e;
            e.scene = parse_scene(s, base_dir);
            e.scene.speed_of_sound = get_or(s, "speed_of_sound", c.model.speed_of_sound);
            if (s.contains("recording")) {
                const auto& r = s.at("recording");
                Recording rec;
                if (r.contains("wav") && r.at("wav").is_string()) {
                    rec.wav_paths.push_back(resolve(r.at("wav").get<std::string>(), base_dir));
                } else {
                    for (const auto& p : get_or<std::vector<std::string>>(r, "wav", {})) {
                        rec.wav_paths.push_back(resolve(p, base_dir));
                    }
                }
                if (rec.wav_paths.empty()) {
                    throw ConfigError("scene " + e.scene.name + ": recording needs 'wav'");
                }
                rec.flags_path = resolve(get_or<std::string>(r, "flags", ""), base_dir);
                e.recording = rec;
            }
            c.scenes.push_back(std::move(e));
        }
    }
    if (j.contains("van_scenes")) {
        const auto& v = j.at("van_scenes");
        VanSceneOptions o;
        o.orientations_deg = get_or(v, "orientations_deg", o.orientations_deg);
        o.positions = get_or(v, "positions", o.positions);
        if (v.contains("source")) {
            o.source = parse_source(v.at("source"), base_dir);
        }
        if (v.contains("snr_db") && !v.at("snr_db").is_null()) {
            o.snr_db = get_or(v, "snr_db", 0.0);
        }
        o.seed = get_or<std::uint64_t>(v, "seed", get_or<std::uint64_t>(j, "seed", o.seed));
        o.gain_offsets_db = get_or(v, "gain_offsets_db", o.gain_offsets_db);
        o.sample_rate = c.stft.sample_rate;
        o.speed_of_sound = c.model.speed_of_sound;
        for (auto& s : van_scenes(o)) {
            c.scenes.push_back({std::move(s), std::nullopt});
        }
    }
    return c;
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string directory_of(const std::string& path)
{
    return std::filesystem::path(path).parent_path().string();
}

ExperimentConfig load_experiment(const std::string& path)
{
    return parse_experiment(read_json_file(path), directory_of(path));
}

SceneConfig load_scene(const std::string& path) { return parse_scene(read_json_file(path), directory_of(path)); }

}  // namespace hoe
