// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hoe/bands.hpp"
#include "hoe/error.hpp"
#include "hoe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace hoe;

namespace {

std::vector<double> random_signal(std::size_t n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (auto& v : x) {
        v = g(rng);
    }
    return x;
}

}  // namespace

TEST_CASE("third-octave bands use base-2 exact centres")
{
    const auto b = third_octave_band(1000.0);
    CHECK(b.exact_center_hz == doctest::Approx(1000.0));
    CHECK(b.lower_hz == doctest::Approx(1000.0 * std::pow(2.0, -1.0 / 6.0)));
    CHECK(b.upper_hz == doctest::Approx(1000.0 * std::pow(2.0, 1.0 / 6.0)));
    CHECK(third_octave_band(8000.0).exact_center_hz == doctest::Approx(8000.0));
    CHECK(third_octave_band(125.0).exact_center_hz == doctest::Approx(1000.0 * std::pow(2.0, -3.0)));
    // Adjacent bands share edges.
    CHECK(third_octave_band(1250.0).lower_hz == doctest::Approx(b.upper_hz));

    const auto centers = nominal_band_centers();
    REQUIRE(centers.size() == 20);
    CHECK(centers.front() == 100.0);
    CHECK(centers.back() == 8000.0);
    CHECK(find_band(centers, 1000.0) == 10);
    CHECK(find_band(centers, 1100.0) == -1);
    CHECK(band_indices_in_range(centers, 1000.0, 8000.0).size() == 10);
}

TEST_CASE("STFT frames match a direct DFT of the windowed signal")
{
    const StftConfig cfg;
    const auto w = hann_window(cfg.frame_size);
    CHECK(w[0] == 0.0);
    CHECK(w[cfg.frame_size / 2] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(w[cfg.frame_size - 1]));

    const auto x = random_signal(4096, 1);
    const auto spectra = stft(x, cfg);
    CHECK(spectra.size() == static_cast<std::size_t>(cfg.frame_count(x.size())));
    CHECK(cfg.frame_count(x.size()) == 1 + (4096 - 512) / 256);
    const int t = 3;
    const int N = cfg.frame_size;
    double energy_time = 0.0;
    for (int n = 0; n < N; ++n) {
        energy_time += std::pow(w[n] * x[t * cfg.hop_size + n], 2);
    }
    for (int k : {0, 1, 17, 100, 256}) {
        std::complex<double> acc = 0.0;
        for (int n = 0; n < N; ++n) {
            acc += w[n] * x[t * cfg.hop_size + n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / N);
        }
        CHECK(std::abs(spectra[t][k] - acc) <= 1e-9 * (1.0 + std::abs(acc)));
    }
    // Parseval over the one-sided spectrum.
    double energy_freq = std::norm(spectra[t][0]) + std::norm(spectra[t][N / 2]);
    for (int k = 1; k < N / 2; ++k) {
        energy_freq += 2.0 * std::norm(spectra[t][k]);
    }
    CHECK(energy_freq / N == doctest::Approx(energy_time).epsilon(1e-10));
    CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), cfg), DataError);
}

TEST_CASE("STFT configuration is validated")
{
    StftConfig cfg;
    cfg.hop_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.frame_size = 500;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("recursive smoothing")
{
    const double lambda = smoothing_coefficient(256, 16000.0, 0.25);
    CHECK(lambda == doctest::Approx(std::exp(-256.0 / 4000.0)).epsilon(1e-15));
    CHECK(lambda == doctest::Approx(0.9380).epsilon(1e-4));
    CHECK(smoothing_coefficient(256, 16000.0, 0.0) == 0.0);

    const std::vector<double> a = {1.0, 4.0};
    const std::vector<double> b = {3.0, 0.0};
    CHECK(smooth_psd({}, a, 0.9) == a);
    const auto s = smooth_psd(a, b, 0.75);
    CHECK(s[0] == doctest::Approx(0.75 * 1.0 + 0.25 * 3.0));
    CHECK(s[1] == doctest::Approx(3.0));

    RecursiveSmoother r(0.5);
    r.update(a);
    r.update(b);
    CHECK(r.value()[0] == doctest::Approx(2.0));
    CHECK(r.value()[1] == doctest::Approx(2.0));
}

TEST_CASE("band bins and band powers")
{
    const StftConfig cfg;
    const auto layout = band_bins(cfg, nominal_band_centers());
    const int b1k = find_band(layout.centers_hz, 1000.0);
    REQUIRE(b1k >= 0);
    const auto& bins = layout.bins[b1k];
    REQUIRE(!bins.empty());
    CHECK(bins.front() == 29);
    CHECK(bins.back() == 35);
    CHECK(bins.size() == 7);
    // 8 kHz band is clipped at Nyquist (bin 256).
    CHECK(layout.bins.back().back() == 256);
    CHECK(std::count(layout.merged_into.begin(), layout.merged_into.end(), -1) == 20);
    // At 62.5 Hz resolution the 100 Hz band holds no bin and borrows from the next band.
    StftConfig coarse = cfg;
    coarse.frame_size = 256;
    coarse.hop_size = 128;
    const auto merged = band_bins(coarse, nominal_band_centers());
    CHECK(merged.merged_into[0] == 1);
    CHECK(merged.bins[0] == merged.bins[1]);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> psd(cfg.bins());
    for (auto& v : psd) {
        v = u(rng);
    }
    double brute = 0.0;
    for (int k = 29; k <= 35; ++k) {
        brute += psd[k];
    }
    brute /= 7.0;
    CHECK(band_power(psd, bins) == doctest::Approx(brute).epsilon(1e-14));
    CHECK(band_powers(psd, layout)[b1k] == doctest::Approx(brute).epsilon(1e-14));
    CHECK_THROWS_AS(band_power(psd, std::vector<int>{}), std::invalid_argument);

    const auto r = bins_in_range(cfg, 5000.0, 8000.0);
    CHECK(r.front() == 160);
    CHECK(r.back() == 256);

    StftConfig low = cfg;
    low.sample_rate = 8000.0;
    CHECK_THROWS_AS(band_bins(low, nominal_band_centers()), ConfigError);
}

TEST_CASE("cepstral smoothing")
{
    const int bins = 257;
    // A flat spectrum is unchanged.
    const auto flat = cepstral_smooth(std::vector<double>(bins, 2.5), 24);
    for (double v : flat) {
        CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
    }
    // Keeping every quefrency reproduces the input.
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::vector<double> mags(bins);
    for (auto& v : mags) {
        v = u(rng);
    }
    const auto same = cepstral_smooth(mags, 512);
    for (int k = 0; k < bins; ++k) {
        CHECK(same[k] == doctest::Approx(mags[k]).epsilon(1e-10));
    }
    // Liftering removes fine structure: the smoothed log spectrum varies less.
    const auto smooth = cepstral_smooth(mags, 8);
    auto roughness = [](const std::vector<double>& v) {
        double r = 0.0;
        for (std::size_t k = 1; k < v.size(); ++k) {
            r += std::pow(std::log(v[k]) - std::log(v[k - 1]), 2);
        }
        return r;
    };
    CHECK(roughness(smooth) < 0.1 * roughness(mags));
}

TEST_CASE("front end produces smoothed band powers per microphone")
{
    const StftConfig cfg;
    const SmoothingConfig sm;
    const auto layout = band_bins(cfg, nominal_band_centers());
    SpectralFrontEnd fe(cfg, sm, layout, 2);
    const auto x = random_signal(cfg.frame_size, 7);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = 2.0 * x[i];
    }
    fe.process({x, y});
    const auto& bp = fe.band_power();
    REQUIRE(bp.size() == 2);
    for (std::size_t b = 0; b < bp[0].size(); ++b) {
        CHECK(bp[1][b] == doctest::Approx(4.0 * bp[0][b]).epsilon(1e-12));
    }
    // First frame initializes the smoother with the instantaneous PSD.
    const auto spectra = stft(x, cfg);
    CHECK(fe.psd()[0][40] == doctest::Approx(std::norm(spectra[0][40])).epsilon(1e-12));
    CHECK(fe.magnitude()[0][40] == doctest::Approx(std::abs(spectra[0][40])).epsilon(1e-12));
}
