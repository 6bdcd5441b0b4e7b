#pragma once

#include <cstddef>
#include <span>

#include <fftw3.h>

#include "isac/types.hpp"

namespace isac {

/**
 * Thin RAII wrapper over a pair of FFTW plans (forward and backward) of a
 * fixed length. Transforms are unnormalized, matching FFTW.
 *
 * Plans are created with FFTW_ESTIMATE on buffers owned by the object, so a
 * given length always runs the same code path and results are reproducible
 * bit for bit. An instance is not safe to use from two threads at once;
 * separate instances are.
 */
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&& other) noexcept;
    Fft& operator=(Fft&& other) noexcept;

    std::size_t size() const { return n_; }

    void forward(std::span<const cd> in, std::span<cd> out);
    void inverse(std::span<const cd> in, std::span<cd> out);

private:
    void execute(fftw_plan plan, std::span<const cd> in, std::span<cd> out);
    void release();

    std::size_t n_ = 0;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/**
 * Aperiodic cross-correlation machinery for length-n vectors, realized with
 * zero padding to 2n-point FFTs.
 *
 * Lag vectors hold 2n-1 entries; entry l + n - 1 corresponds to lag l in
 * (-n, n).
 */
class LagCorrelator {
public:
    explicit LagCorrelator(Index n);

    Index length() const { return n_; }
    Index lag_count() const { return 2 * n_ - 1; }

    /// 2n-point spectrum of v zero-padded to length 2n.
    CVector spectrum(const CVector& v);

    /// c[l] = sum_m conj(a[m]) b[m + l], from the spectra of a and b.
    CVector cross(const CVector& spec_a, const CVector& spec_b);

    /// u[m] = sum_l coeff[l] b[m + l] for m in [0, n), i.e. sum_l coeff_l J_l b.
    CVector shift_combine(const CVector& coeff, const CVector& spec_b);

private:
    Index n_;
    Fft fft_;
    CVector work_;
    CVector work_out_;
};

}  // namespace isac
