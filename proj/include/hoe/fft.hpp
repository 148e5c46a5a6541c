// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace hoe {

// Real-input FFT of fixed length backed by FFTW. An instance owns its
// plans and scratch buffers: share nothing, create one per thread.
class Fft {
public:
    explicit Fft(std::size_t size);
    ~Fft();

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&& other) noexcept;
    Fft& operator=(Fft&& other) noexcept;

    std::size_t size() const { return size_; }
    std::size_t bins() const { return size_ / 2 + 1; }

    // in.size() == size(), out.size() == bins(). Unnormalized.
    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    // in.size() == bins(), out.size() == size(). Unnormalized (scale by 1/size()).
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    void release() noexcept;

    std::size_t size_ = 0;
    double* real_ = nullptr;
    void* spectrum_ = nullptr;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

}  // namespace hoe
