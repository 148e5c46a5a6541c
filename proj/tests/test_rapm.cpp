// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hoe/bands.hpp"
#include "hoe/error.hpp"
#include "hoe/rapm.hpp"

#include <cmath>
#include <numbers>

using namespace hoe;

namespace {

MicGeometry ring(int mics, double radius = 1.0)
{
    MicGeometry g;
    for (int m = 0; m < mics; ++m) {
        g.mics.push_back({wrap_degrees(360.0 * m / mics + 10.0), 0.0, radius * (1.0 + 0.1 * m), 0.0});
    }
    return g;
}

const DirectivityPattern& test_pattern()
{
    static const auto p = model_pattern(ModelParams{}, nominal_band_centers(1000.0, 8000.0),
                                        uniform_grid(-180.0, 179.0, 1.0), uniform_grid(-10.0, 10.0, 10.0));
    return p;
}

BandPowerFrame frame_from(const std::vector<std::vector<double>>& expected)  // [band][mic]
{
    BandPowerFrame f;
    f.phi.assign(expected.front().size(), std::vector<double>(expected.size()));
    for (std::size_t b = 0; b < expected.size(); ++b) {
        for (std::size_t m = 0; m < expected[b].size(); ++m) {
            f.phi[m][b] = expected[b][m];
        }
    }
    f.speech_active = true;
    return f;
}

}  // namespace

TEST_CASE("cosine similarity")
{
    CHECK(*cosine_similarity(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}) ==
          doctest::Approx(std::cos(std::numbers::pi / 4)));
    CHECK(*cosine_similarity(std::vector<double>{2.0, 4.0}, std::vector<double>{1.0, 2.0}) == doctest::Approx(1.0));
    CHECK(*cosine_similarity(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 3.0}) == 0.0);
    CHECK_FALSE(cosine_similarity(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 0.0}).has_value());
}

TEST_CASE("matching cost averages per-band similarities and skips empty bands")
{
    BandPowerFrame phi;
    phi.phi = {{1.0, 1.0, 0.0}, {0.0, 1.0, 0.0}};  // [mic][band]
    const std::vector<std::vector<double>> expected = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};  // [band][mic]
    const std::vector<int> bands = {0, 1, 2};
    const double c45 = std::cos(std::numbers::pi / 4);
    CHECK(*matching_cost(phi, expected, bands) == doctest::Approx((c45 + 1.0) / 2.0));
    BandPowerFrame empty;
    empty.phi = {{0.0}, {0.0}};
    CHECK_FALSE(matching_cost(empty, {{1.0, 1.0}}, std::vector<int>{0}).has_value());
}

TEST_CASE("candidate grids")
{
    CHECK(CandidateGrid::full_circle(1.0).azimuth_deg.size() == 360);
    CHECK(CandidateGrid::full_circle(5.0).azimuth_deg.front() == -180.0);
    const auto r = CandidateGrid::range(170.0, 190.0, 10.0);
    REQUIRE(r.azimuth_deg.size() == 3);
    CHECK(r.azimuth_deg[2] == doctest::Approx(-170.0));
    CandidateGrid empty;
    CHECK_THROWS_AS(empty.validate(), ConfigError);
}

TEST_CASE("grid search recovers the orientation of noiseless expected powers")
{
    const auto g = ring(6);
    const auto& pattern = test_pattern();
    const auto sel = select_bands(pattern.band_centers(), pattern, 1000.0, 8000.0);
    CHECK(sel.size() == 10);
    const RapmEstimator est(pattern, g, CandidateGrid::full_circle(1.0), sel);
    for (double truth : {-90.0, -37.0, 0.0, 45.0, 120.0}) {
        auto phi = frame_from(expected_powers(pattern, g, truth, sel.pattern_band));
        // Per-band, per-frame scaling does not change the decision.
        for (auto& row : phi.phi) {
            for (std::size_t b = 0; b < row.size(); ++b) {
                row[b] *= 1.0 + b;
            }
        }
        const auto e = est.estimate(phi);
        REQUIRE(e.has_value());
        CHECK(e->theta_hat_deg == doctest::Approx(truth));
        CHECK(e->confidence == doctest::Approx(1.0));
        CHECK_FALSE(e->low_information);
        const auto free = estimate(phi, pattern, g, CandidateGrid::full_circle(1.0), sel);
        CHECK(free->theta_hat_deg == e->theta_hat_deg);
        const double j = *cost(phi, pattern, g, truth, sel);
        CHECK(j == doctest::Approx(1.0));
    }
}

TEST_CASE("flat cost resolves to the smallest angle and is flagged")
{
    const auto g = ring(4);
    const auto omni = omnidirectional_pattern({1000.0, 2000.0}, uniform_grid(-180.0, 170.0, 10.0), {0.0});
    const auto sel = select_bands({1000.0, 2000.0}, omni, 1000.0, 2000.0);
    const RapmEstimator est(omni, g, CandidateGrid::range(-30.0, 30.0, 10.0), sel);
    BandPowerFrame phi;
    phi.phi.assign(4, {1.0, 2.0});
    const auto e = est.estimate(phi);
    REQUIRE(e.has_value());
    CHECK(e->theta_hat_deg == 0.0);
    CHECK(e->low_information);
    const auto curve = est.cost_curve(phi);
    CHECK(curve.size() == 7);

    // Symmetric tie between -20 and +20 resolves to the negative angle.
    const RapmEstimator sym(omni, g, CandidateGrid::range(-20.0, 20.0, 40.0), sel);
    CHECK(sym.estimate(phi)->theta_hat_deg == -20.0);

    BandPowerFrame zero;
    zero.phi.assign(4, {0.0, 0.0});
    CHECK_FALSE(est.estimate(zero).has_value());
}

TEST_CASE("band selection requires pattern coverage")
{
    const auto omni = omnidirectional_pattern({1000.0}, {0.0}, {0.0});
    CHECK_THROWS_AS(select_bands({1000.0, 2000.0}, omni, 1000.0, 2000.0), DataError);
}

TEST_CASE("distance gains")
{
    MicGeometry g;
    g.mics = {{0.0, 0.0, 1.0, 0.0}, {90.0, 0.0, 2.0, 0.0}, {-90.0, 0.0, 0.5, 0.0}};
    const auto a = distance_gains(g);
    CHECK(a[0] == 1.0);
    CHECK(a[1] == doctest::Approx(4.0));
    CHECK(a[2] == doctest::Approx(0.25));
    CHECK(distance_gains(g, 1)[0] == doctest::Approx(0.25));
}

TEST_CASE("LFA gains track long-term low-band powers on active frames")
{
    LfaConfig cfg{{0, 1}, 0.5, 0};
    auto state = GainState::unity(2);
    BandPowerFrame f;
    f.phi = {{1.0, 3.0}, {0.5, 0.5}};
    f.speech_active = false;
    state = lfa_update(state, f, cfg);
    CHECK_FALSE(state.initialized);
    CHECK(state.gains == std::vector<double>{1.0, 1.0});

    f.speech_active = true;
    state = lfa_update(state, f, cfg);
    CHECK(state.initialized);
    CHECK(state.gains[0] == 1.0);
    CHECK(state.gains[1] == doctest::Approx(4.0));

    BandPowerFrame g = f;
    g.phi = {{4.0, 4.0}, {4.0, 4.0}};
    state = lfa_update(state, g, cfg);
    // Smoothed: ref (2.5, 3.5) and mic 1 (2.25, 2.25).
    CHECK(state.gains[1] == doctest::Approx(6.0 / 4.5));

    const auto scaled = apply_gains(f, state.gains);
    CHECK(scaled.phi[1][0] == doctest::Approx(0.5 * 6.0 / 4.5));
    CHECK(scaled.phi[0][1] == 3.0);

    // A silent microphone keeps its previous gain.
    BandPowerFrame silent = f;
    silent.phi[1] = {0.0, 0.0};
    auto s2 = lfa_update(GainState::unity(2), silent, cfg);
    CHECK(s2.gains[1] == 1.0);
}
