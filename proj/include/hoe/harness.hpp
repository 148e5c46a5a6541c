// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hoe/baselines.hpp"
#include "hoe/directivity.hpp"
#include "hoe/rapm.hpp"
#include "hoe/simulate.hpp"
#include "hoe/spectral.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hoe {

enum class Method { Hlbr, Hbv, Sd, RapmMeasured, RapmModel };
// lfa: running gains per frame; lfa_converged: final gains of the scene
// applied to every frame.
enum class GainMode { None, Distance, Lfa, LfaConverged };

std::string to_string(Method m);
std::string to_string(GainMode g);
// Throw ConfigError on unknown names.
Method parse_method(const std::string& name);
GainMode parse_gain_mode(const std::string& name);

// A recorded scene: microphone signals instead of a rendered source.
struct Recording {
    std::vector<std::string> wav_paths;  // one multichannel file or one mono file per mic
    std::string flags_path;              // optional; energy VAD when empty
};

struct EvalScene {
    SceneConfig scene;
    std::optional<Recording> recording;
};

struct BandRanges {
    FeatureBandsHz features;
    double matching_lo_hz = 1000.0;
    double matching_hi_hz = 8000.0;
    double lfa_lo_hz = 100.0;
    double lfa_hi_hz = 400.0;
    double analysis_lo_hz = 100.0;
    double analysis_hi_hz = 8000.0;
};

struct ExperimentConfig {
    std::vector<EvalScene> scenes;
    std::vector<Method> methods = {Method::Hlbr, Method::Hbv, Method::Sd, Method::RapmModel};
    std::vector<GainMode> gain_modes = {GainMode::None, GainMode::Lfa};
    CandidateGrid grid = CandidateGrid::full_circle(1.0);
    StftConfig stft;
    SmoothingConfig smoothing;
    BandRanges bands;
    ModelParams model;
    std::string measured_pattern_path;  // required for RAPM-measured
    bool render_with_measured = false;  // render scenes with the measured pattern
    int reference_mic = 0;
    int lifter_length = 24;
    bool clamp_sd = false;
    double vad_threshold_dbfs = -50.0;
    int vad_hangover = 2;
    int threads = 0;  // 0: hardware concurrency

    void validate() const;
};

// Signed angular error wrapped to [-180, 180).
double angular_error(double estimate_deg, double truth_deg);

struct Quantiles {
    double q10 = 0, q25 = 0, median = 0, q75 = 0, q90 = 0;
};

// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);
std::optional<Quantiles> summarize(const std::vector<double>& errors);

// Energy VAD on one channel: frame level above threshold, extended by
// `hangover` frames.
std::vector<bool> energy_vad(std::span<const double> signal, const StftConfig& stft, double threshold_dbfs = -50.0,
                             int hangover = 2);

struct FrameRecord {
    std::string scene;
    Method method;
    GainMode gain_mode;
    int frame = 0;
    std::optional<double> theta_hat;  // empty: no decision
    double truth = 0.0;
    std::optional<double> error;
    std::optional<double> confidence;  // RAPM only
    bool speech_active = true;
};

struct SceneResult {
    std::string scene;
    std::string position;
    bool off_center = false;
    bool mirrored = false;
    std::vector<FrameRecord> records;
    std::optional<std::string> failure;
    // Final LFA gains of the scene, for diagnostics.
    std::vector<double> lfa_gains;
};

struct SummaryCell {
    Method method;
    GainMode gain_mode;
    std::string group;  // "center" / "off_center", or a position name
    std::size_t frames = 0;
    std::size_t no_decision = 0;
    std::optional<Quantiles> stats;
};

struct ErrorSummary {
    std::vector<SummaryCell> cells;      // by centre / off-centre class
    std::vector<SummaryCell> positions;  // by position
    std::vector<std::pair<std::string, std::string>> failures;

    const SummaryCell* find(Method m, GainMode g, const std::string& group) const;
};

// Patterns and band layouts shared by all scenes of a run.
class Experiment {
public:
    explicit Experiment(ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    const DirectivityPattern& model_pattern() const { return model_pattern_; }

    // Renders or loads the scene and evaluates every method and gain mode.
    // Errors are captured in SceneResult::failure.
    SceneResult evaluate(const EvalScene& scene) const;
    // Same with externally supplied audio and speech flags.
    SceneResult evaluate_audio(const SceneConfig& scene, const AudioBuffer& audio,
                               const std::vector<bool>& speech_active) const;

    std::vector<SceneResult> run_all() const;

private:
    const DirectivityPattern& pattern_for(Method m) const;

    ExperimentConfig config_;
    DirectivityPattern model_pattern_;
    std::optional<DirectivityPattern> measured_pattern_;
    BandLayout layout_;
    FeatureBands feature_bands_;
};

// Pools signed errors per cell; mirrored scenes contribute negated errors.
ErrorSummary summarize_results(const ExperimentConfig& config, const std::vector<SceneResult>& results);

// frames.csv: scene,method,gain_mode,frame,theta_hat,truth,error,confidence,speech_active
// Mirrored scenes are reported in mirrored coordinates.
std::string frames_csv(const std::vector<SceneResult>& results);
std::string summary_json(const ErrorSummary& summary);

struct RunOutput {
    std::vector<SceneResult> results;
    ErrorSummary summary;
};

// Runs everything and writes frames.csv and summary.json into out_dir
// (when non-empty).
RunOutput run(const ExperimentConfig& config, const std::string& out_dir = {});

}  // namespace hoe
