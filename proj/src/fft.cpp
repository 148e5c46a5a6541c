// SPDX-License-Identifier: Apache-2.0
#include "hoe/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace hoe {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

Fft::Fft(std::size_t size) : size_(size)
{
    if (size < 2) {
        throw std::invalid_argument("Fft: size must be at least 2");
    }
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(size_);
    auto* spec = fftw_alloc_complex(bins());
    spectrum_ = spec;
    const int n = static_cast<int>(size_);
    forward_plan_ = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : size_(std::exchange(other.size_, 0)),
      real_(std::exchange(other.real_, nullptr)),
      spectrum_(std::exchange(other.spectrum_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr))
{
}

Fft& Fft::operator=(Fft&& other) noexcept
{
    if (this != &other) {
        release();
        size_ = std::exchange(other.size_, 0);
        real_ = std::exchange(other.real_, nullptr);
        spectrum_ = std::exchange(other.spectrum_, nullptr);
        forward_plan_ = std::exchange(other.forward_plan_, nullptr);
        inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
    }
    return *this;
}

void Fft::release() noexcept
{
    if (real_ == nullptr) {
        return;
    }
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    fftw_free(real_);
    fftw_free(spectrum_);
    real_ = nullptr;
    spectrum_ = nullptr;
}

void Fft::forward(std::span<const double> in, std::span<std::complex<double>> out)
{
    if (in.size() != size_ || out.size() != bins()) {
        throw std::invalid_argument("Fft::forward: size mismatch");
    }
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(static_cast<fftw_plan>(forward_plan_));
    const auto* spec = static_cast<const fftw_complex*>(spectrum_);
    for (std::size_t k = 0; k < bins(); ++k) {
        out[k] = {spec[k][0], spec[k][1]};
    }
}

void Fft::inverse(std::span<const std::complex<double>> in, std::span<double> out)
{
    if (in.size() != bins() || out.size() != size_) {
        throw std::invalid_argument("Fft::inverse: size mismatch");
    }
    auto* spec = static_cast<fftw_complex*>(spectrum_);
    for (std::size_t k = 0; k < bins(); ++k) {
        spec[k][0] = in[k].real();
        spec[k][1] = in[k].imag();
    }
    // c2r destroys its input array; it is rewritten on every call.
    fftw_execute(static_cast<fftw_plan>(inverse_plan_));
    std::copy(real_, real_ + size_, out.begin());
}

}  // namespace hoe
