// SPDX-License-Identifier: Apache-2.0
#include "hoe/harness.hpp"

#include "hoe/bands.hpp"
#include "hoe/error.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace hoe {

namespace {

constexpr Method kAllMethods[] = {Method::Hlbr, Method::Hbv, Method::Sd, Method::RapmMeasured, Method::RapmModel};

bool is_rapm(Method m) { return m == Method::RapmMeasured || m == Method::RapmModel; }

std::optional<double> mirror_angle(std::optional<double> a)
{
    if (!a) {
        return a;
    }
    return wrap_degrees(-*a);
}

}  // namespace

std::string to_string(Method m)
{
    switch (m) {
    case Method::Hlbr:
        return "HLBR";
    case Method::Hbv:
        return "HBV";
    case Method::Sd:
        return "SD";
    case Method::RapmMeasured:
        return "RAPM-measured";
    case Method::RapmModel:
        return "RAPM-model";
    }
    return "?";
}

std::string to_string(GainMode g)
{
    switch (g) {
    case GainMode::None:
        return "none";
    case GainMode::Distance:
        return "distance";
    case GainMode::Lfa:
        return "lfa";
    case GainMode::LfaConverged:
        return "lfa_converged";
    }
    return "?";
}

Method parse_method(const std::string& name)
{
    for (Method m : kAllMethods) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown method: " + name);
}

GainMode parse_gain_mode(const std::string& name)
{
    for (GainMode g : {GainMode::None, GainMode::Distance, GainMode::Lfa, GainMode::LfaConverged}) {
        if (to_string(g) == name) {
            return g;
        }
    }
    throw ConfigError("unknown gain mode: " + name);
}

void ExperimentConfig::validate() const
{
    if (scenes.empty()) {
        throw ConfigError("experiment: no scenes");
    }
    if (methods.empty()) {
        throw ConfigError("experiment: no methods");
    }
    if (gain_modes.empty()) {
        throw ConfigError("experiment: no gain modes");
    }
    grid.validate();
    stft.validate();
    smoothing.validate();
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const bool wants_measured = std::find(methods.begin(), methods.end(), Method::RapmMeasured) != methods.end();
    if ((wants_measured || render_with_measured) && measured_pattern_path.empty()) {
        throw ConfigError("experiment: RAPM-measured needs a measured pattern file");
    }
    if (lifter_length < 1) {
        throw ConfigError("experiment: lifter length must be >= 1");
    }
    for (const auto& s : scenes) {
        s.scene.geometry.validate();
        if (reference_mic < 0 || static_cast<std::size_t>(reference_mic) >= s.scene.geometry.size()) {
            throw ConfigError("experiment: reference microphone out of range for scene " + s.scene.name);
        }
    }
}

double angular_error(double estimate_deg, double truth_deg) { return wrap_degrees(estimate_deg - truth_deg); }

double quantile(std::vector<double> values, double p)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile: empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::optional<Quantiles> summarize(const std::vector<double>& errors)
{
    if (errors.empty()) {
        return std::nullopt;
    }
    Quantiles q;
    q.q10 = quantile(errors, 0.10);
    q.q25 = quantile(errors, 0.25);
    q.median = quantile(errors, 0.50);
    q.q75 = quantile(errors, 0.75);
    q.q90 = quantile(errors, 0.90);
    return q;
}

std::vector<bool> energy_vad(std::span<const double> signal, const StftConfig& stft, double threshold_dbfs,
                             int hangover)
{
    const int frames = stft.frame_count(signal.size());
    std::vector<bool> flags(frames, false);
    int hold = 0;
    for (int t = 0; t < frames; ++t) {
        double e = 0.0;
        for (int n = 0; n < stft.frame_size; ++n) {
            const double v = signal[static_cast<std::size_t>(t) * stft.hop_size + n];
            e += v * v;
        }
        e /= stft.frame_size;
        if (e > 0.0 && 10.0 * std::log10(e) > threshold_dbfs) {
            flags[t] = true;
            hold = hangover;
        } else if (hold > 0) {
            flags[t] = true;
            --hold;
        }
    }
    return flags;
}

const SummaryCell* ErrorSummary::find(Method m, GainMode g, const std::string& group) const
{
    for (const auto* list : {&cells, &positions}) {
        for (const auto& c : *list) {
            if (c.method == m && c.gain_mode == g && c.group == group) {
                return &c;
            }
        }
    }
    return nullptr;
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config))
{
    config_.validate();
    const auto centers = nominal_band_centers(config_.bands.analysis_lo_hz, config_.bands.analysis_hi_hz);
    if (centers.empty()) {
        throw ConfigError("experiment: analysis band range holds no one-third-octave band");
    }
    layout_ = band_bins(config_.stft, centers);
    feature_bands_ = FeatureBands::from_hz(config_.stft, config_.bands.features);
    try {
        model_pattern_ = hoe::model_pattern(config_.model, centers, uniform_grid(-180.0, 179.0, 1.0),
                                            uniform_grid(-90.0, 90.0, 1.0));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!config_.measured_pattern_path.empty()) {
        measured_pattern_ = load_pattern(config_.measured_pattern_path);
    }
}

const DirectivityPattern& Experiment::pattern_for(Method m) const
{
    if (m == Method::RapmMeasured) {
        if (!measured_pattern_) {
            throw ConfigError("RAPM-measured requested without a measured pattern");
        }
        return *measured_pattern_;
    }
    return model_pattern_;
}

SceneResult Experiment::evaluate(const EvalScene& eval) const
{
    const auto& scene = eval.scene;
    try {
        if (eval.recording) {
            AudioBuffer audio = read_wav_channels(eval.recording->wav_paths);
            if (audio.sample_rate != config_.stft.sample_rate) {
                throw DataError("scene " + scene.name + ": recording sample rate does not match the analysis rate");
            }
            std::vector<bool> flags;
            if (eval.recording->flags_path.empty()) {
                flags = energy_vad(audio.channels.at(config_.reference_mic), config_.stft,
                                   config_.vad_threshold_dbfs, config_.vad_hangover);
            } else {
                flags = read_flags_csv(eval.recording->flags_path);
            }
            return evaluate_audio(scene, audio, flags);
        }
        const auto& render_pattern = config_.render_with_measured ? *measured_pattern_ : model_pattern_;
        auto rendered = render(scene, render_pattern, config_.stft);
        return evaluate_audio(scene, rendered.audio, rendered.speech_active);
    } catch (const std::exception& e) {
        SceneResult failed;
        failed.scene = scene.name;
        failed.position = scene.position;
        failed.off_center = scene.off_center;
        failed.mirrored = scene.mirrored;
        failed.failure = e.what();
        spdlog::error("scene {} failed: {}", scene.name, e.what());
        return failed;
    }
}

SceneResult Experiment::evaluate_audio(const SceneConfig& scene, const AudioBuffer& audio,
                                       const std::vector<bool>& speech_active) const
{
    const auto& cfg = config_;
    const auto& geometry = scene.geometry;
    const std::size_t mics = geometry.size();
    if (audio.channels.size() != mics) {
        throw DataError("scene " + scene.name + ": " + std::to_string(audio.channels.size()) +
                        " audio channels for " + std::to_string(mics) + " microphones");
    }
    const int frames = cfg.stft.frame_count(audio.frames());
    if (frames == 0) {
        throw DataError("scene " + scene.name + ": audio shorter than one frame");
    }

    const bool want_sd = std::find(cfg.methods.begin(), cfg.methods.end(), Method::Sd) != cfg.methods.end();
    const bool want_mag = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) { return !is_rapm(m); });

    SpectralFrontEnd front_end(cfg.stft, cfg.smoothing, layout_, static_cast<int>(mics));
    CepstralSmoother cepstrum(cfg.stft.bins(), cfg.lifter_length);
    LfaConfig lfa;
    lfa.frame_bands = band_indices_in_range(layout_.centers_hz, cfg.bands.lfa_lo_hz, cfg.bands.lfa_hi_hz);
    lfa.lambda = smoothing_coefficient(cfg.stft.hop_size, cfg.stft.sample_rate, cfg.smoothing.tau_lfa);
    lfa.reference = cfg.reference_mic;
    if (lfa.frame_bands.empty()) {
        throw ConfigError("LFA band range holds no analysis band");
    }

    // Pass 1: spectra, band powers and the LFA gain trajectory.
    std::vector<BandPowerFrame> phis(frames);
    std::vector<std::vector<std::vector<double>>> magnitudes(want_mag ? frames : 0);
    std::vector<std::vector<std::vector<double>>> liftered(want_sd ? frames : 0);
    std::vector<std::vector<double>> running_gains(frames);
    GainState gain_state = GainState::unity(mics);
    std::vector<std::span<const double>> frame_views(mics);
    for (int t = 0; t < frames; ++t) {
        for (std::size_t m = 0; m < mics; ++m) {
            frame_views[m] = std::span<const double>(audio.channels[m])
                                 .subspan(static_cast<std::size_t>(t) * cfg.stft.hop_size, cfg.stft.frame_size);
        }
        front_end.process(frame_views);
        BandPowerFrame& phi = phis[t];
        phi.frame_index = t;
        phi.phi = front_end.band_power();
        phi.speech_active = t < static_cast<int>(speech_active.size()) && speech_active[t];
        if (want_mag) {
            magnitudes[t] = front_end.magnitude();
        }
        if (want_sd) {
            liftered[t].resize(mics);
            for (std::size_t m = 0; m < mics; ++m) {
                liftered[t][m] = cepstrum.smooth(front_end.magnitude()[m]);
            }
        }
        gain_state = lfa_update(std::move(gain_state), phi, lfa);
        running_gains[t] = gain_state.gains;
    }

    const auto dist_gains = distance_gains(geometry, cfg.reference_mic);
    const std::vector<double> unit_gains(mics, 1.0);

    std::vector<std::optional<RapmEstimator>> estimators(std::size(kAllMethods));
    for (Method m : cfg.methods) {
        if (is_rapm(m)) {
            const auto& pattern = pattern_for(m);
            estimators[static_cast<int>(m)].emplace(
                pattern, geometry, cfg.grid,
                select_bands(layout_.centers_hz, pattern, cfg.bands.matching_lo_hz, cfg.bands.matching_hi_hz));
        }
    }

    SceneResult result;
    result.scene = scene.name;
    result.position = scene.position;
    result.off_center = scene.off_center;
    result.mirrored = scene.mirrored;
    result.lfa_gains = gain_state.gains;

    const double truth = scene.talker_orientation_deg;
    std::vector<double> features(mics);
    std::vector<double> amp(mics);
    std::vector<std::vector<double>> scaled(mics);
    for (Method method : cfg.methods) {
        for (GainMode mode : cfg.gain_modes) {
            for (int t = 0; t < frames; ++t) {
                const BandPowerFrame& phi = phis[t];
                if (!phi.speech_active) {
                    continue;
                }
                const std::vector<double>& gains = mode == GainMode::None       ? unit_gains
                                                   : mode == GainMode::Distance ? dist_gains
                                                   : mode == GainMode::Lfa      ? running_gains[t]
                                                                                : gain_state.gains;
                FrameRecord rec;
                rec.scene = scene.name;
                rec.method = method;
                rec.gain_mode = mode;
                rec.frame = t;
                rec.truth = truth;
                rec.speech_active = true;

                if (is_rapm(method)) {
                    if (const auto est = estimators[static_cast<int>(method)]->estimate(apply_gains(phi, gains))) {
                        rec.theta_hat = est->theta_hat_deg;
                        rec.confidence = est->confidence;
                    }
                } else {
                    for (std::size_t m = 0; m < mics; ++m) {
                        amp[m] = std::sqrt(gains[m]);
                    }
                    bool defined = true;
                    if (method == Method::Hlbr) {
                        for (std::size_t m = 0; m < mics && defined; ++m) {
                            const auto v = hlbr(magnitudes[t][m], feature_bands_.low, feature_bands_.high_hlbr);
                            defined = v.has_value();
                            features[m] = v.value_or(0.0);
                        }
                    } else if (method == Method::Hbv) {
                        for (std::size_t m = 0; m < mics; ++m) {
                            scaled[m] = magnitudes[t][m];
                            for (double& v : scaled[m]) {
                                v *= amp[m];
                            }
                            features[m] = hbv(scaled[m], geometry.mics[m].distance_m, feature_bands_.high_var);
                        }
                    } else {
                        for (std::size_t m = 0; m < mics; ++m) {
                            // Liftering commutes with a constant gain.
                            scaled[m] = liftered[t][m];
                            for (double& v : scaled[m]) {
                                v *= amp[m];
                            }
                        }
                        features = spectral_difference(scaled, feature_bands_.high_var);
                        if (cfg.clamp_sd) {
                            for (double& v : features) {
                                v = std::max(v, 0.0);
                            }
                        }
                    }
                    if (defined) {
                        rec.theta_hat = vectorial_decision(features, geometry);
                    }
                }
                if (rec.theta_hat) {
                    rec.error = angular_error(*rec.theta_hat, truth);
                }
                if (scene.mirrored) {
                    rec.theta_hat = mirror_angle(rec.theta_hat);
                    rec.truth = wrap_degrees(-rec.truth);
                    if (rec.theta_hat) {
                        rec.error = angular_error(*rec.theta_hat, rec.truth);
                    }
                }
                result.records.push_back(std::move(rec));
            }
        }
    }
    return result;
}

std::vector<SceneResult> Experiment::run_all() const
{
    const std::size_t n = config_.scenes.size();
    std::vector<SceneResult> results(n);
    unsigned workers = config_.threads > 0 ? static_cast<unsigned>(config_.threads)
                                           : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            results[i] = evaluate(config_.scenes[i]);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    return results;
}

ErrorSummary summarize_results(const ExperimentConfig& config, const std::vector<SceneResult>& results)
{
    ErrorSummary summary;
    std::vector<std::string> classes;
    std::vector<std::string> positions;
    for (const auto& r : results) {
        if (r.failure) {
            summary.failures.emplace_back(r.scene, *r.failure);
        }
        const std::string cls = r.off_center ? "off_center" : "center";
        if (std::find(classes.begin(), classes.end(), cls) == classes.end()) {
            classes.push_back(cls);
        }
        if (std::find(positions.begin(), positions.end(), r.position) == positions.end()) {
            positions.push_back(r.position);
        }
    }
    std::sort(classes.begin(), classes.end());

    auto make_cell = [&](Method m, GainMode g, const std::string& group, bool by_position) {
        SummaryCell cell{m, g, group, 0, 0, std::nullopt};
        std::vector<double> errors;
        for (const auto& r : results) {
            const bool member = by_position ? r.position == group : (r.off_center ? "off_center" : "center") == group;
            if (!member) {
                continue;
            }
            for (const auto& rec : r.records) {
                if (rec.method != m || rec.gain_mode != g || !rec.speech_active) {
                    continue;
                }
                ++cell.frames;
                if (rec.error) {
                    errors.push_back(*rec.error);
                } else {
                    ++cell.no_decision;
                }
            }
        }
        cell.stats = summarize(errors);
        return cell;
    };

    for (Method m : config.methods) {
        for (GainMode g : config.gain_modes) {
            for (const auto& cls : classes) {
                summary.cells.push_back(make_cell(m, g, cls, false));
            }
            for (const auto& pos : positions) {
                summary.positions.push_back(make_cell(m, g, pos, true));
            }
        }
    }
    return summary;
}

std::string frames_csv(const std::vector<SceneResult>& results)
{
    std::string out = "scene,method,gain_mode,frame,theta_hat,truth,error,confidence,speech_active\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : std::string(); };
    for (const auto& r : results) {
        for (const auto& rec : r.records) {
            out += fmt::format("{},{},{},{},{},{:.4f},{},{},{}\n", rec.scene, to_string(rec.method),
                               to_string(rec.gain_mode), rec.frame, opt(rec.theta_hat), rec.truth, opt(rec.error),
                               opt(rec.confidence), rec.speech_active ? 1 : 0);
        }
    }
    return out;
}

std::string summary_json(const ErrorSummary& summary)
{
    auto cell_json = [](const SummaryCell& c) {
        nlohmann::ordered_json j;
        j["method"] = to_string(c.method);
        j["gain_mode"] = to_string(c.gain_mode);
        j["group"] = c.group;
        j["frames"] = c.frames;
        j["no_decision"] = c.no_decision;
        if (c.stats) {
            j["q10"] = c.stats->q10;
            j["q25"] = c.stats->q25;
            j["median"] = c.stats->median;
            j["q75"] = c.stats->q75;
            j["q90"] = c.stats->q90;
        } else {
            for (const char* k : {"q10", "q25", "median", "q75", "q90"}) {
                j[k] = nullptr;
            }
        }
        return j;
    };
    nlohmann::ordered_json j;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : summary.cells) {
        j["cells"].push_back(cell_json(c));
    }
    j["positions"] = nlohmann::ordered_json::array();
    for (const auto& c : summary.positions) {
        j["positions"].push_back(cell_json(c));
    }
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& [scene, what] : summary.failures) {
        j["failures"].push_back({{"scene", scene}, {"error", what}});
    }
    return j.dump(2) + "\n";
}

RunOutput run(const ExperimentConfig& config, const std::string& out_dir)
{
    Experiment experiment(config);
    RunOutput out;
    out.results = experiment.run_all();
    out.summary = summarize_results(experiment.config(), out.results);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        std::ofstream frames(dir / "frames.csv", std::ios::binary);
        std::ofstream summary(dir / "summary.json", std::ios::binary);
        if (!frames || !summary) {
            throw DataError("cannot write results into " + out_dir);
        }
        frames << frames_csv(out.results);
        summary << summary_json(out.summary);
    }
    return out;
}

}  // namespace hoe
