// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace hoe {

// Piston-in-rigid-sphere speech radiation model. The fluid density and
// piston velocity prefactor cancels in the front-normalized directivity
// and is fixed to one.
struct ModelParams {
    double head_radius_m = 0.09;
    double piston_half_angle_rad = 5.7 * std::numbers::pi / 180.0;
    int max_order = 50;
    double speed_of_sound = 343.0;

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

// Legendre polynomial P_n(x) by the three-term recurrence.
// Throws std::domain_error for |x| > 1 or n < 0.
double legendre(int n, double x);

// P_0(x) .. P_nmax(x).
std::vector<double> legendre_all(int nmax, double x);

// Spherical Hankel function of the second kind h_n(x) = j_n(x) - i y_n(x)
// and its derivative. Throws std::domain_error for x <= 0 or n < 0.
std::complex<double> spherical_hankel2(int n, double x);
std::complex<double> spherical_hankel2_derivative(int n, double x);

struct Hankel2Table {
    std::vector<std::complex<double>> value;       // h_0 .. h_nmax
    std::vector<std::complex<double>> derivative;  // h'_0 .. h'_nmax
};

// j_n uses Miller's downward recurrence when n exceeds x, y_n the (stable)
// upward recurrence.
Hankel2Table spherical_hankel2_table(int nmax, double x);

class PistonSphereModel {
public:
    explicit PistonSphereModel(const ModelParams& params);

    const ModelParams& params() const { return params_; }

    // kappa_n * i^(n+1) / h'_n(ka), n = 0..max_order.
    std::vector<std::complex<double>> modal_coefficients(double freq_hz) const;

    // Far-field |D(f, theta)|^2 relative to the frontal direction.
    double power(double freq_hz, double theta_deg) const;

    // Same as power() with precomputed coefficients and cos(theta).
    static double power(const std::vector<std::complex<double>>& coefficients, double cos_theta);

private:
    ModelParams params_;
    std::vector<double> kappa_;
};

// |D(f, theta)|^2 of the analytic model; symmetric in theta.
double model_directivity(const ModelParams& params, double freq_hz, double theta_deg);

// Band x elevation x azimuth table of front-normalized squared directivity.
class DirectivityPattern {
public:
    DirectivityPattern() = default;

    // power is flattened [band][elevation][azimuth]. Throws DataError when
    // the grids or values break the pattern invariants, including front
    // normalization (|power(0 deg, 0 deg) - 1| <= 1e-6 in every band).
    DirectivityPattern(std::vector<double> band_centers_hz,
                       std::vector<double> azimuth_deg,
                       std::vector<double> elevation_deg,
                       std::vector<double> power);

    const std::vector<double>& band_centers() const { return bands_; }
    const std::vector<double>& azimuth_grid() const { return azimuth_; }
    const std::vector<double>& elevation_grid() const { return elevation_; }
    const std::vector<double>& values() const { return power_; }

    std::size_t band_count() const { return bands_.size(); }

    double at(std::size_t band, std::size_t elevation, std::size_t azimuth) const
    {
        return power_[(band * elevation_.size() + elevation) * azimuth_.size() + azimuth];
    }

    // Linear-in-dB interpolation over azimuth (periodic), nearest
    // elevation sample. Exact at grid points.
    double interpolate(double azimuth_deg, double elevation_deg, std::size_t band) const;

    // Band index for a nominal centre, or -1.
    int band_index(double nominal_hz) const;

private:
    std::size_t nearest_elevation(double elevation_deg) const;

    std::vector<double> bands_;
    std::vector<double> azimuth_;
    std::vector<double> elevation_;
    std::vector<double> power_;
};

std::vector<double> uniform_grid(double start, double stop, double step);

// Model evaluated over one-third-octave bands: per band the mean of |D|^2
// over 5 log-spaced frequencies spanning the band edges, at the great-circle
// angle between (azimuth, elevation) and the frontal axis.
DirectivityPattern model_pattern(const ModelParams& params,
                                 const std::vector<double>& band_centers_hz,
                                 const std::vector<double>& azimuth_deg,
                                 const std::vector<double>& elevation_deg);

// Single-frequency variant of model_pattern (band centre only).
DirectivityPattern model_pattern_at_centers(const ModelParams& params,
                                            const std::vector<double>& band_centers_hz,
                                            const std::vector<double>& azimuth_deg,
                                            const std::vector<double>& elevation_deg);

DirectivityPattern omnidirectional_pattern(const std::vector<double>& band_centers_hz,
                                           const std::vector<double>& azimuth_deg,
                                           const std::vector<double>& elevation_deg);

// Pattern file I/O (JSON: band_centers_hz, azimuth_deg, elevation_deg, power).
DirectivityPattern parse_pattern(const std::string& json_text);
DirectivityPattern load_pattern(const std::string& path);
std::string serialize_pattern(const DirectivityPattern& pattern);
void save_pattern(const DirectivityPattern& pattern, const std::string& path);

// Level difference other - reference in dB, per shared band, at the given
// azimuths and elevation.
struct PatternComparison {
    std::vector<double> band_centers_hz;
    std::vector<double> azimuth_deg;
    std::vector<std::vector<double>> difference_db;  // [band][azimuth]
    std::vector<double> rms_difference_db;            // per band
};

PatternComparison compare_patterns(const DirectivityPattern& reference,
                                   const DirectivityPattern& other,
                                   const std::vector<double>& azimuth_deg,
                                   double elevation_deg = 0.0);

}  // namespace hoe
