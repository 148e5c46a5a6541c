// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hoe/directivity.hpp"
#include "hoe/geometry.hpp"
#include "hoe/spectral.hpp"
#include "hoe/wav.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hoe {

enum class SourceKind { SpeechShaped, Pink, White, Wav };

struct SourceSpec {
    SourceKind kind = SourceKind::SpeechShaped;
    std::string wav_path;  // SourceKind::Wav only (first channel is used)
    double duration_s = 4.0;
    std::uint64_t seed = 1;
    double level_dbfs = -26.0;  // RMS over speech-active samples
};

struct SceneConfig {
    std::string name = "scene";
    MicGeometry geometry;
    double talker_orientation_deg = 0.0;
    SourceSpec source;
    std::optional<double> snr_db;
    std::uint64_t noise_seed = 1;
    double sample_rate = 16000.0;
    double speed_of_sound = 343.0;

    // Evaluation metadata.
    std::string position = "center";
    bool off_center = false;
    // Right-hand positions whose errors are reflected onto the left side.
    bool mirrored = false;

    void validate() const;
};

struct RenderedScene {
    AudioBuffer audio;
    std::vector<bool> speech_active;  // one flag per analysis frame
    double noise_scale = 0.0;
};

// Deterministic Gaussian white noise with unit variance.
std::vector<double> white_noise(std::size_t length, std::uint64_t seed);

// White noise through a first-order IIR cascade approximating a -3 dB/octave
// slope (Kellett's refined filter), scaled to roughly unit variance.
std::vector<double> pink_noise(std::size_t length, std::uint64_t seed);

// Pink noise shaped to a long-term average speech spectrum and gated by a
// syllabic envelope with word pauses.
std::vector<double> speech_shaped_noise(std::size_t length, double sample_rate, std::uint64_t seed);

// Long-term average speech spectrum level (dB, arbitrary reference) at the
// nominal one-third-octave centre, interpolated in log frequency.
double speech_spectrum_db(double freq_hz);

std::vector<double> make_source(const SourceSpec& spec, double sample_rate);

// Per analysis frame: RMS of the clean source above threshold_dbfs.
std::vector<bool> oracle_speech_flags(std::span<const double> source, const StftConfig& stft,
                                      double threshold_dbfs = -50.0);

// Zero-phase magnitude response interpolating |D_b| linearly in dB over
// log frequency between band centres (held constant outside).
std::vector<double> band_magnitude_response(const std::vector<double>& band_centers_hz,
                                            const std::vector<double>& band_power,
                                            std::size_t fft_size,
                                            double sample_rate);

// Free-field microphone signals without noise: directivity filter, nearest
// sample propagation delay, relative 1/d law (mic 0 at unit gain) and the
// per-mic gain offset.
AudioBuffer render_clean(const SceneConfig& scene, const DirectivityPattern& pattern, std::span<const double> source);

struct MixResult {
    std::vector<std::vector<double>> noisy;
    double noise_scale = 1.0;
};

// Scales all noise channels by one factor so that the mean over mics of
// per-mic SNR (energy ratio over active samples, dB) equals snr_db. An empty
// mask uses every sample; no snr_db passes the clean signal through.
// Throws DataError for zero noise energy.
MixResult mix_at_snr(const std::vector<std::vector<double>>& clean,
                     const std::vector<std::vector<double>>& noise,
                     std::optional<double> snr_db,
                     std::span<const char> active_mask = {});

// Mean over microphones of 10 log10(clean energy / noise energy) on the mask.
double mean_snr_db(const std::vector<std::vector<double>>& clean,
                   const std::vector<std::vector<double>>& noise,
                   std::span<const char> active_mask = {});

// Source, render, per-mic pink noise (scaled with the mic gain offsets) and
// mixing at the scene SNR, plus oracle speech flags.
RenderedScene render(const SceneConfig& scene, const DirectivityPattern& pattern, const StftConfig& stft);

// Writes per-frame flags as "frame_index,speech_active" CSV.
void write_flags_csv(const std::string& path, const std::vector<bool>& flags);
std::vector<bool> read_flags_csv(const std::string& path);

// Desk-scale van layout: six ceiling microphones 25 cm above mouth height
// around five talker positions (one on the centre line).
struct TalkerPosition {
    std::string name;
    Point3 location;
    bool off_center = false;
    bool mirrored = false;
};

std::vector<Point3> van_microphones();
std::vector<TalkerPosition> van_positions();

struct VanSceneOptions {
    std::vector<double> orientations_deg = {-90, -60, -30, 0, 30, 60, 90};
    std::vector<std::string> positions;  // empty: all five
    SourceSpec source;
    std::optional<double> snr_db;
    std::uint64_t seed = 1;
    std::vector<double> gain_offsets_db;  // empty: calibrated mics
    double sample_rate = 16000.0;
    double speed_of_sound = 343.0;
};

// Orientations x positions; source and noise seeds derive from `seed` and
// the scene index.
std::vector<SceneConfig> van_scenes(const VanSceneOptions& options);

}  // namespace hoe
