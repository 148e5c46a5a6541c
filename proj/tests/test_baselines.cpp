// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hoe/baselines.hpp"
#include "hoe/error.hpp"

#include <cmath>

using namespace hoe;

TEST_CASE("HLBR is the high-to-low energy ratio")
{
    const std::vector<double> mag = {1.0, 2.0, 0.0, 3.0, 1.0};
    const std::vector<int> low = {0, 1};
    const std::vector<int> high = {3, 4};
    CHECK(*hlbr(mag, low, high) == doctest::Approx((9.0 + 1.0) / (1.0 + 4.0)));
    CHECK_FALSE(hlbr(mag, std::vector<int>{2}, high).has_value());
}

TEST_CASE("HBV is the magnitude variance over distance")
{
    const std::vector<double> mag = {0.0, 2.0};
    const std::vector<int> high = {0, 1};
    CHECK(hbv(mag, 1.0, high) == doctest::Approx(1.0));
    CHECK(hbv(mag, 2.0, high) == doctest::Approx(0.5));
    CHECK(hbv(std::vector<double>{3.0, 3.0}, 1.0, high) == 0.0);
    CHECK_THROWS_AS(hbv(mag, 0.0, high), std::invalid_argument);
}

TEST_CASE("spectral difference features are deviations from the mic average")
{
    const std::vector<std::vector<double>> liftered = {{2.0, 3.0}, {0.0, 1.0}};
    const std::vector<int> high = {0, 1};
    const auto sd = spectral_difference(liftered, high);
    REQUIRE(sd.size() == 2);
    CHECK(sd[0] == doctest::Approx(1.0));
    CHECK(sd[1] == doctest::Approx(-1.0));

    const std::vector<std::vector<double>> three = {{0.3, 0.7, 0.1}, {1.1, 0.2, 0.9}, {0.4, 0.4, 0.4}};
    const auto sd3 = spectral_difference(three, std::vector<int>{0, 1, 2});
    CHECK(std::abs(sd3[0] + sd3[1] + sd3[2]) <= 1e-15);
    CHECK_THROWS_AS(spectral_difference({{1.0}}, std::vector<int>{0}), std::invalid_argument);
}

TEST_CASE("vectorial decision points along the weighted resultant")
{
    MicGeometry g;
    g.mics = {{0.0, 0.0, 1.0, 0.0}, {90.0, 0.0, 1.0, 0.0}, {180.0 - 360.0, 0.0, 1.0, 0.0}};
    CHECK(*vectorial_decision(std::vector<double>{1.0, 1.0, 0.0}, g) == doctest::Approx(45.0));
    CHECK(*vectorial_decision(std::vector<double>{0.0, 0.0, 2.0}, g) == doctest::Approx(-180.0));
    // Negative features push away from a microphone.
    CHECK(*vectorial_decision(std::vector<double>{-1.0, 0.0, 0.0}, g) == doctest::Approx(-180.0));
    CHECK_FALSE(vectorial_decision(std::vector<double>{1.0, 0.0, 1.0}, g).has_value());
    CHECK_FALSE(vectorial_decision(std::vector<double>{0.0, 0.0, 0.0}, g).has_value());
    CHECK_THROWS_AS(vectorial_decision(std::vector<double>{1.0}, g), std::invalid_argument);
}

TEST_CASE("feature bands from frequencies")
{
    const StftConfig cfg;
    const auto fb = FeatureBands::from_hz(cfg);
    CHECK(fb.low.front() == 7);     // 218.75 Hz, first bin at or above 200 Hz
    CHECK(fb.low.back() == 12);     // 375 Hz
    CHECK(fb.high_hlbr.front() == 128);
    CHECK(fb.high_var.front() == 160);
    CHECK(fb.high_var.back() == 256);
    FeatureBandsHz bad;
    bad.variance_high_hi = 12000.0;
    bad.variance_high_lo = 10000.0;
    CHECK_THROWS_AS(FeatureBands::from_hz(cfg, bad), ConfigError);
}
