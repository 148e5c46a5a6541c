// SPDX-License-Identifier: Apache-2.0
#include "hoe/simulate.hpp"

#include "hoe/bands.hpp"
#include "hoe/error.hpp"
#include "hoe/fft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

namespace hoe {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x632BE59BD9B4E019ULL));
}

std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

// Applies a real, zero-phase frequency response to a whole signal.
std::vector<double> zero_phase_filter(std::span<const double> x, const std::vector<double>& response, Fft& fft)
{
    const std::size_t n = fft.size();
    std::vector<double> buf(n, 0.0);
    std::copy(x.begin(), x.end(), buf.begin());
    std::vector<std::complex<double>> spec(fft.bins());
    fft.forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        spec[k] *= response[k];
    }
    fft.inverse(spec, buf);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = buf[i] / static_cast<double>(n);
    }
    return y;
}

// Approximate long-term average speech spectrum (after Byrne et al., 1994),
// one-third-octave band levels in dB.
constexpr std::array<std::pair<double, double>, 21> kSpeechSpectrum = {{
    {100, 54.4},  {125, 57.7},  {160, 56.8},  {200, 60.2},  {250, 60.3},  {315, 59.0},  {400, 62.1},
    {500, 62.1},  {630, 60.5},  {800, 56.8},  {1000, 53.7}, {1250, 53.0}, {1600, 52.0}, {2000, 48.7},
    {2500, 48.1}, {3150, 46.8}, {4000, 45.6}, {5000, 44.5}, {6300, 44.3}, {8000, 43.7}, {10000, 43.4},
}};

}  // namespace

void SceneConfig::validate() const
{
    geometry.validate();
    if (!(sample_rate > 0.0)) {
        throw ConfigError("scene " + name + ": sample rate must be positive");
    }
    if (snr_db && !std::isfinite(*snr_db)) {
        throw ConfigError("scene " + name + ": SNR must be finite when present");
    }
    if (source.kind != SourceKind::Wav && !(source.duration_s > 0.0)) {
        throw ConfigError("scene " + name + ": source duration must be positive");
    }
    if (!(speed_of_sound > 0.0)) {
        throw ConfigError("scene " + name + ": speed of sound must be positive");
    }
}

std::vector<double> white_noise(std::size_t length, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> out(length);
    for (double& v : out) {
        v = dist(rng);
    }
    return out;
}

std::vector<double> pink_noise(std::size_t length, std::uint64_t seed)
{
    auto x = white_noise(length, seed);
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
    for (double& v : x) {
        const double white = v;
        b0 = 0.99886 * b0 + white * 0.0555179;
        b1 = 0.99332 * b1 + white * 0.0750759;
        b2 = 0.96900 * b2 + white * 0.1538520;
        b3 = 0.86650 * b3 + white * 0.3104856;
        b4 = 0.55000 * b4 + white * 0.5329522;
        b5 = -0.7616 * b5 - white * 0.0168980;
        v = (b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362) * 0.11;
        b6 = white * 0.115926;
    }
    return x;
}

double speech_spectrum_db(double freq_hz)
{
    const double lf = std::log2(std::max(freq_hz, 1.0));
    if (freq_hz <= kSpeechSpectrum.front().first) {
        return kSpeechSpectrum.front().second;
    }
    if (freq_hz >= kSpeechSpectrum.back().first) {
        return kSpeechSpectrum.back().second;
    }
    for (std::size_t i = 1; i < kSpeechSpectrum.size(); ++i) {
        if (freq_hz <= kSpeechSpectrum[i].first) {
            const double l0 = std::log2(kSpeechSpectrum[i - 1].first);
            const double l1 = std::log2(kSpeechSpectrum[i].first);
            const double t = (lf - l0) / (l1 - l0);
            return kSpeechSpectrum[i - 1].second + t * (kSpeechSpectrum[i].second - kSpeechSpectrum[i - 1].second);
        }
    }
    return kSpeechSpectrum.back().second;
}

std::vector<double> speech_shaped_noise(std::size_t length, double sample_rate, std::uint64_t seed)
{
    if (length == 0) {
        return {};
    }
    const auto pink = pink_noise(length, derive_seed(seed, 1));
    Fft fft(next_pow2(length + 4096));
    std::vector<double> response(fft.bins());
    const double ref = speech_spectrum_db(1000.0);
    for (std::size_t k = 0; k < response.size(); ++k) {
        const double f = k * sample_rate / static_cast<double>(fft.size());
        response[k] = std::pow(10.0, (speech_spectrum_db(f) - ref) / 20.0);
    }
    auto shaped = zero_phase_filter(pink, response, fft);

    // Words of syllables separated by silent pauses.
    std::mt19937_64 rng(derive_seed(seed, 2));
    std::uniform_real_distribution<double> word_len(0.35, 1.0);
    std::uniform_real_distribution<double> pause_len(0.12, 0.4);
    std::uniform_real_distribution<double> syllable_rate(3.5, 5.5);
    std::uniform_real_distribution<double> word_gain_db(-6.0, 0.0);
    std::vector<double> envelope(length, 0.0);
    const auto ramp = static_cast<std::size_t>(0.01 * sample_rate);
    std::size_t pos = static_cast<std::size_t>(pause_len(rng) * sample_rate * 0.5);
    while (pos < length) {
        const auto len = static_cast<std::size_t>(word_len(rng) * sample_rate);
        const double rate = syllable_rate(rng);
        const double gain = std::pow(10.0, word_gain_db(rng) / 20.0);
        for (std::size_t i = 0; i < len && pos + i < length; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            double e = gain * (0.35 + 0.65 * std::abs(std::sin(std::numbers::pi * rate * t)));
            if (i < ramp) {
                e *= static_cast<double>(i) / ramp;
            } else if (len - i < ramp) {
                e *= static_cast<double>(len - i) / ramp;
            }
            envelope[pos + i] = e;
        }
        pos += len + static_cast<std::size_t>(pause_len(rng) * sample_rate);
    }
    for (std::size_t i = 0; i < length; ++i) {
        shaped[i] *= envelope[i];
    }
    return shaped;
}

std::vector<double> make_source(const SourceSpec& spec, double sample_rate)
{
    std::vector<double> x;
    if (spec.kind == SourceKind::Wav) {
        AudioBuffer a = read_wav(spec.wav_path);
        if (a.sample_rate != sample_rate) {
            throw DataError("source " + spec.wav_path + ": sample rate " + std::to_string(a.sample_rate) +
                            " does not match scene rate " + std::to_string(sample_rate));
        }
        return std::move(a.channels.front());
    }
    const auto length = static_cast<std::size_t>(std::llround(spec.duration_s * sample_rate));
    switch (spec.kind) {
    case SourceKind::SpeechShaped:
        x = speech_shaped_noise(length, sample_rate, spec.seed);
        break;
    case SourceKind::Pink:
        x = pink_noise(length, spec.seed);
        break;
    case SourceKind::White:
        x = white_noise(length, spec.seed);
        break;
    case SourceKind::Wav:
        break;
    }
    double energy = 0.0;
    std::size_t active = 0;
    for (double v : x) {
        if (v != 0.0) {
            energy += v * v;
            ++active;
        }
    }
    if (active > 0 && energy > 0.0) {
        const double rms = std::sqrt(energy / static_cast<double>(active));
        const double scale = std::pow(10.0, spec.level_dbfs / 20.0) / rms;
        for (double& v : x) {
            v *= scale;
        }
    }
    return x;
}

std::vector<bool> oracle_speech_flags(std::span<const double> source, const StftConfig& stft, double threshold_dbfs)
{
    const int frames = stft.frame_count(source.size());
    std::vector<bool> flags(frames, false);
    for (int t = 0; t < frames; ++t) {
        double e = 0.0;
        for (int n = 0; n < stft.frame_size; ++n) {
            const double v = source[static_cast<std::size_t>(t) * stft.hop_size + n];
            e += v * v;
        }
        e /= stft.frame_size;
        flags[t] = e > 0.0 && 10.0 * std::log10(e) > threshold_dbfs;
    }
    return flags;
}

std::vector<double> band_magnitude_response(const std::vector<double>& band_centers_hz,
                                            const std::vector<double>& band_power,
                                            std::size_t fft_size,
                                            double sample_rate)
{
    std::vector<double> log_f(band_centers_hz.size());
    std::vector<double> level_db(band_centers_hz.size());
    for (std::size_t b = 0; b < band_centers_hz.size(); ++b) {
        log_f[b] = std::log2(third_octave_band(band_centers_hz[b]).exact_center_hz);
        level_db[b] = 10.0 * std::log10(std::max(band_power[b], 1e-30));
    }
    std::vector<double> response(fft_size / 2 + 1);
    for (std::size_t k = 0; k < response.size(); ++k) {
        const double f = k * sample_rate / static_cast<double>(fft_size);
        double db;
        if (k == 0 || std::log2(f) <= log_f.front()) {
            db = level_db.front();
        } else if (std::log2(f) >= log_f.back()) {
            db = level_db.back();
        } else {
            const double lf = std::log2(f);
            const auto it = std::upper_bound(log_f.begin(), log_f.end(), lf);
            const auto hi = static_cast<std::size_t>(it - log_f.begin());
            const double t = (lf - log_f[hi - 1]) / (log_f[hi] - log_f[hi - 1]);
            db = level_db[hi - 1] + t * (level_db[hi] - level_db[hi - 1]);
        }
        // Power level in dB is also the magnitude level in dB.
        response[k] = std::pow(10.0, db / 20.0);
    }
    return response;
}

AudioBuffer render_clean(const SceneConfig& scene, const DirectivityPattern& pattern, std::span<const double> source)
{
    scene.validate();
    const std::size_t length = source.size();
    Fft fft(next_pow2(length + 4096));
    AudioBuffer out;
    out.sample_rate = scene.sample_rate;
    const double d0 = scene.geometry.mics.front().distance_m;
    for (const auto& mic : scene.geometry.mics) {
        std::vector<double> band_power(pattern.band_count());
        for (std::size_t b = 0; b < band_power.size(); ++b) {
            band_power[b] = pattern.interpolate(mic.azimuth_deg - scene.talker_orientation_deg, mic.elevation_deg, b);
        }
        const auto response = band_magnitude_response(pattern.band_centers(), band_power, fft.size(), scene.sample_rate);
        const auto filtered = zero_phase_filter(source, response, fft);

        const auto delay = static_cast<std::size_t>(std::llround(mic.distance_m / scene.speed_of_sound * scene.sample_rate));
        const double gain = d0 / mic.distance_m * std::pow(10.0, mic.gain_offset_db / 20.0);
        std::vector<double> ch(length, 0.0);
        for (std::size_t n = delay; n < length; ++n) {
            ch[n] = gain * filtered[n - delay];
        }
        out.channels.push_back(std::move(ch));
    }
    return out;
}

namespace {

double masked_energy(const std::vector<double>& x, std::span<const char> mask)
{
    double e = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (mask.empty() || mask[n]) {
            e += x[n] * x[n];
        }
    }
    return e;
}

}  // namespace

double mean_snr_db(const std::vector<std::vector<double>>& clean,
                   const std::vector<std::vector<double>>& noise,
                   std::span<const char> active_mask)
{
    double sum = 0.0;
    for (std::size_t m = 0; m < clean.size(); ++m) {
        sum += 10.0 * std::log10(masked_energy(clean[m], active_mask) / masked_energy(noise[m], active_mask));
    }
    return sum / static_cast<double>(clean.size());
}

MixResult mix_at_snr(const std::vector<std::vector<double>>& clean,
                     const std::vector<std::vector<double>>& noise,
                     std::optional<double> snr_db,
                     std::span<const char> active_mask)
{
    MixResult result;
    result.noisy = clean;
    if (!snr_db) {
        result.noise_scale = 0.0;
        return result;
    }
    if (noise.size() != clean.size()) {
        throw DataError("mix_at_snr: one noise channel per microphone required");
    }
    for (std::size_t m = 0; m < clean.size(); ++m) {
        if (noise[m].size() != clean[m].size()) {
            throw DataError("mix_at_snr: noise and clean lengths differ");
        }
        if (!(masked_energy(noise[m], active_mask) > 0.0)) {
            throw DataError("mix_at_snr: noise channel " + std::to_string(m) + " has zero energy");
        }
    }
    const double unscaled = mean_snr_db(clean, noise, active_mask);
    result.noise_scale = std::pow(10.0, (unscaled - *snr_db) / 20.0);
    for (std::size_t m = 0; m < clean.size(); ++m) {
        for (std::size_t n = 0; n < clean[m].size(); ++n) {
            result.noisy[m][n] += result.noise_scale * noise[m][n];
        }
    }
    return result;
}

RenderedScene render(const SceneConfig& scene, const DirectivityPattern& pattern, const StftConfig& stft)
{
    scene.validate();
    if (stft.sample_rate != scene.sample_rate) {
        throw ConfigError("scene " + scene.name + ": sample rate differs from the analysis sample rate");
    }
    const auto source = make_source(scene.source, scene.sample_rate);
    if (source.size() < static_cast<std::size_t>(stft.frame_size)) {
        throw DataError("scene " + scene.name + ": source shorter than one analysis frame");
    }
    RenderedScene out;
    out.speech_active = oracle_speech_flags(source, stft);
    AudioBuffer clean = render_clean(scene, pattern, source);
    if (!scene.snr_db) {
        out.audio = std::move(clean);
        return out;
    }

    // SNR is measured on samples of speech-active frames.
    std::vector<char> mask(source.size(), 0);
    for (std::size_t t = 0; t < out.speech_active.size(); ++t) {
        if (out.speech_active[t]) {
            std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(t * stft.hop_size), stft.frame_size, 1);
        }
    }
    std::vector<std::vector<double>> noise;
    for (std::size_t m = 0; m < scene.geometry.size(); ++m) {
        auto n = pink_noise(source.size(), derive_seed(scene.noise_seed, m + 1, 0x6e6f697365ULL));
        const double g = std::pow(10.0, scene.geometry.mics[m].gain_offset_db / 20.0);
        for (double& v : n) {
            v *= g;
        }
        noise.push_back(std::move(n));
    }
    auto mixed = mix_at_snr(clean.channels, noise, scene.snr_db, mask);
    out.audio.sample_rate = scene.sample_rate;
    out.audio.channels = std::move(mixed.noisy);
    out.noise_scale = mixed.noise_scale;
    return out;
}

void write_flags_csv(const std::string& path, const std::vector<bool>& flags)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write flag file: " + path);
    }
    out << "frame_index,speech_active\n";
    for (std::size_t t = 0; t < flags.size(); ++t) {
        out << t << ',' << (flags[t] ? 1 : 0) << '\n';
    }
}

std::vector<bool> read_flags_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open flag file: " + path);
    }
    std::vector<bool> flags;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::size_t index = 0;
        char comma = 0;
        int active = 0;
        if (!(ss >> index >> comma >> active) || comma != ',') {
            throw DataError(path + ": malformed flag line: " + line);
        }
        if (index >= flags.size()) {
            flags.resize(index + 1, false);
        }
        flags[index] = active != 0;
    }
    return flags;
}

std::vector<Point3> van_microphones()
{
    constexpr double kHeight = 0.25;
    return {
        {1.0, 0.55, kHeight},  {1.0, -0.55, kHeight},  {0.0, 0.85, kHeight},
        {0.0, -0.85, kHeight}, {-1.0, 0.55, kHeight}, {-1.0, -0.55, kHeight},
    };
}

std::vector<TalkerPosition> van_positions()
{
    return {
        {"center", {0.0, 0.0, 0.0}, false, false},
        {"front_left", {0.45, 0.35, 0.0}, true, false},
        {"front_right", {0.45, -0.35, 0.0}, true, true},
        {"rear_left", {-0.45, 0.35, 0.0}, true, false},
        {"rear_right", {-0.45, -0.35, 0.0}, true, true},
    };
}

std::vector<SceneConfig> van_scenes(const VanSceneOptions& options)
{
    const auto mics = van_microphones();
    std::vector<TalkerPosition> positions;
    for (const auto& p : van_positions()) {
        if (options.positions.empty() ||
            std::find(options.positions.begin(), options.positions.end(), p.name) != options.positions.end()) {
            positions.push_back(p);
        }
    }
    if (positions.empty()) {
        throw ConfigError("van scenes: no known talker position selected");
    }
    if (!options.gain_offsets_db.empty() && options.gain_offsets_db.size() != mics.size()) {
        throw ConfigError("van scenes: gain offsets must list one value per microphone");
    }

    std::vector<SceneConfig> scenes;
    std::uint64_t index = 0;
    for (const auto& pos : positions) {
        for (double theta : options.orientations_deg) {
            SceneConfig s;
            std::ostringstream name;
            name << pos.name << '_' << (theta >= 0 ? "+" : "") << theta;
            s.name = name.str();
            s.geometry = geometry_from_positions(mics, pos.location);
            for (std::size_t m = 0; m < options.gain_offsets_db.size(); ++m) {
                s.geometry.mics[m].gain_offset_db = options.gain_offsets_db[m];
            }
            s.talker_orientation_deg = theta;
            s.source = options.source;
            s.source.seed = derive_seed(options.seed, index, 1);
            s.snr_db = options.snr_db;
            s.noise_seed = derive_seed(options.seed, index, 2);
            s.sample_rate = options.sample_rate;
            s.speed_of_sound = options.speed_of_sound;
            s.position = pos.name;
            s.off_center = pos.off_center;
            s.mirrored = pos.mirrored;
            scenes.push_back(std::move(s));
            ++index;
        }
    }
    return scenes;
}

}  // namespace hoe
