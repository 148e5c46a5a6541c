// SPDX-License-Identifier: Apache-2.0
#include "hoe/directivity.hpp"

#include "hoe/bands.hpp"
#include "hoe/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hoe {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kPowerFloor = 1e-30;

double wrap_azimuth(double deg)
{
    double w = std::fmod(deg + 180.0, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    return w - 180.0;
}

// Spherical Bessel functions of the first kind, j_0..j_nmax.
std::vector<double> spherical_bessel_j(int nmax, double x)
{
    std::vector<double> j(nmax + 1, 0.0);
    const double s = std::sin(x);
    const double c = std::cos(x);
    j[0] = s / x;
    if (nmax == 0) {
        return j;
    }
    if (x > static_cast<double>(nmax)) {
        j[1] = s / (x * x) - c / x;
        for (int n = 1; n < nmax; ++n) {
            j[n + 1] = (2.0 * n + 1.0) / x * j[n] - j[n - 1];
        }
        return j;
    }

    // Miller: recur downward from well above max(nmax, x), then normalize
    // with sum (2n+1) j_n^2 = 1.
    const double top = std::max(static_cast<double>(nmax), x);
    const int start = static_cast<int>(top + 15.0 + std::sqrt(40.0 * top));
    std::vector<double> f(start + 2, 0.0);
    f[start] = 1e-30;
    for (int n = start; n >= 1; --n) {
        f[n - 1] = (2.0 * n + 1.0) / x * f[n] - f[n + 1];
        if (std::abs(f[n - 1]) > 1e100) {
            for (int k = n - 1; k <= start; ++k) {
                f[k] *= 1e-100;
            }
        }
    }
    double norm = 0.0;
    for (int n = start; n >= 0; --n) {
        norm += (2.0 * n + 1.0) * f[n] * f[n];
    }
    double scale = 1.0 / std::sqrt(norm);
    // Fix the sign with whichever closed form is better conditioned.
    const double j0_exact = s / x;
    const double j1_exact = s / (x * x) - c / x;
    if (std::abs(j0_exact) >= std::abs(j1_exact)) {
        scale = std::copysign(scale, f[0] * j0_exact);
    } else {
        scale = std::copysign(scale, f[1] * j1_exact);
    }
    for (int n = 0; n <= nmax; ++n) {
        j[n] = f[n] * scale;
    }
    return j;
}

std::vector<double> spherical_bessel_y(int nmax, double x)
{
    std::vector<double> y(nmax + 1, 0.0);
    const double s = std::sin(x);
    const double c = std::cos(x);
    y[0] = -c / x;
    if (nmax >= 1) {
        y[1] = -c / (x * x) - s / x;
    }
    for (int n = 1; n < nmax; ++n) {
        y[n + 1] = (2.0 * n + 1.0) / x * y[n] - y[n - 1];
    }
    return y;
}

void check_hankel_args(int n, double x)
{
    if (!(x > 0.0)) {
        throw std::domain_error("spherical_hankel2: argument must be positive");
    }
    if (n < 0) {
        throw std::domain_error("spherical_hankel2: negative order");
    }
}

}  // namespace

void ModelParams::validate() const
{
    if (!(head_radius_m > 0.0)) {
        throw std::invalid_argument("ModelParams: head radius must be positive");
    }
    if (!(piston_half_angle_rad > 0.0 && piston_half_angle_rad < std::numbers::pi / 2.0)) {
        throw std::invalid_argument("ModelParams: piston half angle must be in (0, pi/2)");
    }
    if (max_order < 1) {
        throw std::invalid_argument("ModelParams: max order must be >= 1");
    }
    if (!(speed_of_sound > 0.0)) {
        throw std::invalid_argument("ModelParams: speed of sound must be positive");
    }
}

double legendre(int n, double x)
{
    if (n < 0) {
        throw std::domain_error("legendre: negative order");
    }
    if (!(std::abs(x) <= 1.0)) {
        throw std::domain_error("legendre: |x| > 1");
    }
    if (n == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> legendre_all(int nmax, double x)
{
    if (nmax < 0) {
        throw std::domain_error("legendre: negative order");
    }
    if (!(std::abs(x) <= 1.0)) {
        throw std::domain_error("legendre: |x| > 1");
    }
    std::vector<double> p(nmax + 1);
    p[0] = 1.0;
    if (nmax >= 1) {
        p[1] = x;
    }
    for (int k = 1; k < nmax; ++k) {
        p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
    }
    return p;
}

Hankel2Table spherical_hankel2_table(int nmax, double x)
{
    check_hankel_args(nmax, x);
    // One extra order so that h'_0 = -h_1 is always available.
    const int top = std::max(nmax, 1);
    const auto j = spherical_bessel_j(top, x);
    const auto y = spherical_bessel_y(top, x);

    Hankel2Table t;
    t.value.resize(nmax + 1);
    t.derivative.resize(nmax + 1);
    for (int n = 0; n <= nmax; ++n) {
        t.value[n] = {j[n], -y[n]};
    }
    t.derivative[0] = -std::complex<double>(j[1], -y[1]);
    for (int n = 1; n <= nmax; ++n) {
        t.derivative[n] = t.value[n - 1] - ((n + 1.0) / x) * t.value[n];
    }
    return t;
}

std::complex<double> spherical_hankel2(int n, double x)
{
    check_hankel_args(n, x);
    return spherical_hankel2_table(n, x).value[n];
}

std::complex<double> spherical_hankel2_derivative(int n, double x)
{
    check_hankel_args(n, x);
    return spherical_hankel2_table(n, x).derivative[n];
}

PistonSphereModel::PistonSphereModel(const ModelParams& params) : params_(params)
{
    params_.validate();
    const int nmax = params_.max_order;
    const auto p = legendre_all(nmax + 1, std::cos(params_.piston_half_angle_rad));
    kappa_.resize(nmax + 1);
    kappa_[0] = 1.0 - p[1];
    for (int n = 1; n <= nmax; ++n) {
        kappa_[n] = p[n - 1] - p[n + 1];
    }
}

std::vector<std::complex<double>> PistonSphereModel::modal_coefficients(double freq_hz) const
{
    if (!(freq_hz > 0.0)) {
        throw std::domain_error("PistonSphereModel: frequency must be positive");
    }
    const double ka = 2.0 * std::numbers::pi * freq_hz / params_.speed_of_sound * params_.head_radius_m;
    const auto table = spherical_hankel2_table(params_.max_order, ka);

    static constexpr std::complex<double> kPowersOfI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::vector<std::complex<double>> c(kappa_.size());
    for (std::size_t n = 0; n < kappa_.size(); ++n) {
        const auto& d = table.derivative[n];
        // Orders whose derivative overflowed contribute nothing.
        c[n] = std::isfinite(std::abs(d)) ? kappa_[n] * kPowersOfI[(n + 1) % 4] / d : 0.0;
    }
    return c;
}

double PistonSphereModel::power(const std::vector<std::complex<double>>& coefficients, double cos_theta)
{
    auto sum_at = [&](double x) {
        std::complex<double> s = coefficients[0];
        double prev = 1.0;
        double cur = x;
        for (std::size_t n = 1; n < coefficients.size(); ++n) {
            s += coefficients[n] * cur;
            const double next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
            prev = cur;
            cur = next;
        }
        return s;
    };
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);
    const double front = std::norm(sum_at(1.0));
    if (cos_theta == 1.0) {
        return 1.0;
    }
    return std::norm(sum_at(cos_theta)) / front;
}

double PistonSphereModel::power(double freq_hz, double theta_deg) const
{
    return power(modal_coefficients(freq_hz), std::cos(theta_deg * kDegToRad));
}

double model_directivity(const ModelParams& params, double freq_hz, double theta_deg)
{
    return PistonSphereModel(params).power(freq_hz, theta_deg);
}

DirectivityPattern::DirectivityPattern(std::vector<double> band_centers_hz,
                                       std::vector<double> azimuth_deg,
                                       std::vector<double> elevation_deg,
                                       std::vector<double> power)
    : bands_(std::move(band_centers_hz)),
      azimuth_(std::move(azimuth_deg)),
      elevation_(std::move(elevation_deg)),
      power_(std::move(power))
{
    if (bands_.empty() || azimuth_.empty() || elevation_.empty()) {
        throw DataError("directivity pattern: empty band or angle grid");
    }
    auto strictly_increasing = [](const std::vector<double>& v) {
        return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
    };
    if (!strictly_increasing(bands_) || bands_.front() <= 0.0) {
        throw DataError("directivity pattern: band centres must be positive and strictly increasing");
    }
    if (!strictly_increasing(azimuth_) || azimuth_.front() < -180.0 || azimuth_.back() >= 180.0) {
        throw DataError("directivity pattern: azimuths must be strictly increasing within [-180, 180)");
    }
    if (!strictly_increasing(elevation_) || elevation_.front() < -90.0 || elevation_.back() > 90.0) {
        throw DataError("directivity pattern: elevations must be strictly increasing within [-90, 90]");
    }
    if (power_.size() != bands_.size() * elevation_.size() * azimuth_.size()) {
        throw DataError("directivity pattern: power table shape does not match the grids");
    }
    for (double v : power_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw DataError("directivity pattern: power values must be finite and nonnegative");
        }
    }
    for (std::size_t b = 0; b < bands_.size(); ++b) {
        const double front = interpolate(0.0, 0.0, b);
        if (std::abs(front - 1.0) > 1e-6) {
            throw DataError("directivity pattern: not front-normalized in band " + std::to_string(bands_[b]) +
                            " Hz (power at 0/0 deg = " + std::to_string(front) + ")");
        }
    }
}

std::size_t DirectivityPattern::nearest_elevation(double elevation_deg) const
{
    const auto it = std::lower_bound(elevation_.begin(), elevation_.end(), elevation_deg);
    if (it == elevation_.begin()) {
        return 0;
    }
    if (it == elevation_.end()) {
        return elevation_.size() - 1;
    }
    const auto hi = static_cast<std::size_t>(it - elevation_.begin());
    // Ties go to the lower sample.
    return (*it - elevation_deg) < (elevation_deg - elevation_[hi - 1]) ? hi : hi - 1;
}

double DirectivityPattern::interpolate(double azimuth_deg, double elevation_deg, std::size_t band) const
{
    if (band >= bands_.size()) {
        throw std::out_of_range("directivity pattern: band index out of range");
    }
    const std::size_t e = nearest_elevation(elevation_deg);
    const double az = wrap_azimuth(azimuth_deg);
    const std::size_t n = azimuth_.size();

    std::size_t lo = 0;
    std::size_t hi = 0;
    double t = 0.0;
    const auto it = std::upper_bound(azimuth_.begin(), azimuth_.end(), az);
    if (it != azimuth_.begin() && it != azimuth_.end()) {
        hi = static_cast<std::size_t>(it - azimuth_.begin());
        lo = hi - 1;
        t = (az - azimuth_[lo]) / (azimuth_[hi] - azimuth_[lo]);
    } else {
        // Between the last sample and the first one, across the wrap.
        lo = n - 1;
        hi = 0;
        const double span = azimuth_.front() + 360.0 - azimuth_.back();
        double offset = az - azimuth_.back();
        if (offset < 0.0) {
            offset += 360.0;
        }
        t = n == 1 ? 0.0 : offset / span;
    }
    const double a = at(band, e, lo);
    if (t == 0.0) {
        return a;
    }
    const double b = at(band, e, hi);
    const double a_db = 10.0 * std::log10(std::max(a, kPowerFloor));
    const double b_db = 10.0 * std::log10(std::max(b, kPowerFloor));
    return std::pow(10.0, (a_db + t * (b_db - a_db)) / 10.0);
}

int DirectivityPattern::band_index(double nominal_hz) const { return find_band(bands_, nominal_hz); }

std::vector<double> uniform_grid(double start, double stop, double step)
{
    if (!(step > 0.0) || stop < start) {
        throw std::invalid_argument("uniform_grid: invalid range or step");
    }
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
        out.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

namespace {

DirectivityPattern build_model_pattern(const ModelParams& params,
                                       const std::vector<double>& bands,
                                       const std::vector<double>& azimuth,
                                       const std::vector<double>& elevation,
                                       int points_per_band)
{
    if (bands.empty() || azimuth.empty() || elevation.empty()) {
        throw std::invalid_argument("model_pattern: empty band or angle grid");
    }
    const PistonSphereModel model(params);
    const std::size_t na = azimuth.size();
    const std::size_t ne = elevation.size();

    std::vector<double> cos_angle(ne * na);
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t a = 0; a < na; ++a) {
            cos_angle[e * na + a] = std::cos(elevation[e] * kDegToRad) * std::cos(azimuth[a] * kDegToRad);
        }
    }

    std::vector<double> power(bands.size() * ne * na, 0.0);
    for (std::size_t b = 0; b < bands.size(); ++b) {
        const auto band = third_octave_band(bands[b]);
        std::vector<double> freqs;
        if (points_per_band == 1) {
            freqs.push_back(band.nominal_hz);
        } else {
            for (int i = 0; i < points_per_band; ++i) {
                const double t = static_cast<double>(i) / (points_per_band - 1);
                freqs.push_back(band.lower_hz * std::pow(band.upper_hz / band.lower_hz, t));
            }
        }
        for (double f : freqs) {
            const auto coeffs = model.modal_coefficients(f);
            for (std::size_t i = 0; i < cos_angle.size(); ++i) {
                power[b * ne * na + i] += PistonSphereModel::power(coeffs, cos_angle[i]);
            }
        }
        for (std::size_t i = 0; i < ne * na; ++i) {
            power[b * ne * na + i] /= static_cast<double>(freqs.size());
        }
    }
    return DirectivityPattern(bands, azimuth, elevation, std::move(power));
}

}  // namespace

DirectivityPattern model_pattern(const ModelParams& params,
                                 const std::vector<double>& band_centers_hz,
                                 const std::vector<double>& azimuth_deg,
                                 const std::vector<double>& elevation_deg)
{
    return build_model_pattern(params, band_centers_hz, azimuth_deg, elevation_deg, 5);
}

DirectivityPattern model_pattern_at_centers(const ModelParams& params,
                                            const std::vector<double>& band_centers_hz,
                                            const std::vector<double>& azimuth_deg,
                                            const std::vector<double>& elevation_deg)
{
    return build_model_pattern(params, band_centers_hz, azimuth_deg, elevation_deg, 1);
}

DirectivityPattern omnidirectional_pattern(const std::vector<double>& band_centers_hz,
                                           const std::vector<double>& azimuth_deg,
                                           const std::vector<double>& elevation_deg)
{
    std::vector<double> power(band_centers_hz.size() * azimuth_deg.size() * elevation_deg.size(), 1.0);
    return DirectivityPattern(band_centers_hz, azimuth_deg, elevation_deg, std::move(power));
}

DirectivityPattern parse_pattern(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("pattern file: invalid JSON: ") + e.what());
    }
    try {
        auto bands = j.at("band_centers_hz").get<std::vector<double>>();
        auto az = j.at("azimuth_deg").get<std::vector<double>>();
        auto el = j.at("elevation_deg").get<std::vector<double>>();
        const auto& nested = j.at("power");
        if (!nested.is_array() || nested.size() != bands.size()) {
            throw DataError("pattern file: power must have one entry per band");
        }
        std::vector<double> flat;
        flat.reserve(bands.size() * el.size() * az.size());
        for (const auto& band : nested) {
            if (!band.is_array() || band.size() != el.size()) {
                throw DataError("pattern file: power[band] must have one row per elevation");
            }
            for (const auto& row : band) {
                if (!row.is_array() || row.size() != az.size()) {
                    throw DataError("pattern file: power[band][elevation] must have one value per azimuth");
                }
                for (const auto& v : row) {
                    flat.push_back(v.get<double>());
                }
            }
        }
        return DirectivityPattern(std::move(bands), std::move(az), std::move(el), std::move(flat));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("pattern file: schema violation: ") + e.what());
    }
}

DirectivityPattern load_pattern(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open pattern file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pattern(ss.str());
}

std::string serialize_pattern(const DirectivityPattern& pattern)
{
    nlohmann::json j;
    j["band_centers_hz"] = pattern.band_centers();
    j["azimuth_deg"] = pattern.azimuth_grid();
    j["elevation_deg"] = pattern.elevation_grid();
    nlohmann::json power = nlohmann::json::array();
    for (std::size_t b = 0; b < pattern.band_count(); ++b) {
        nlohmann::json band = nlohmann::json::array();
        for (std::size_t e = 0; e < pattern.elevation_grid().size(); ++e) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t a = 0; a < pattern.azimuth_grid().size(); ++a) {
                row.push_back(pattern.at(b, e, a));
            }
            band.push_back(std::move(row));
        }
        power.push_back(std::move(band));
    }
    j["power"] = std::move(power);
    return j.dump();
}

void save_pattern(const DirectivityPattern& pattern, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write pattern file: " + path);
    }
    out << serialize_pattern(pattern) << '\n';
}

PatternComparison compare_patterns(const DirectivityPattern& reference,
                                   const DirectivityPattern& other,
                                   const std::vector<double>& azimuth_deg,
                                   double elevation_deg)
{
    PatternComparison cmp;
    cmp.azimuth_deg = azimuth_deg;
    for (std::size_t b = 0; b < reference.band_count(); ++b) {
        const int ob = other.band_index(reference.band_centers()[b]);
        if (ob < 0) {
            continue;
        }
        std::vector<double> diff;
        double sum_sq = 0.0;
        for (double az : azimuth_deg) {
            const double r = reference.interpolate(az, elevation_deg, b);
            const double o = other.interpolate(az, elevation_deg, static_cast<std::size_t>(ob));
            const double d = 10.0 * std::log10(std::max(o, kPowerFloor) / std::max(r, kPowerFloor));
            diff.push_back(d);
            sum_sq += d * d;
        }
        cmp.band_centers_hz.push_back(reference.band_centers()[b]);
        cmp.rms_difference_db.push_back(azimuth_deg.empty() ? 0.0 : std::sqrt(sum_sq / azimuth_deg.size()));
        cmp.difference_db.push_back(std::move(diff));
    }
    return cmp;
}

}  // namespace hoe
