#include "isac/fft.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace isac {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("Fft: length must be positive");
    std::lock_guard<std::mutex> lock(planner_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_1d(len, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_1d(len, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_ || !inverse_) {
        release();
        throw std::runtime_error("Fft: planner failed");
    }
}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      in_(std::exchange(other.in_, nullptr)),
      out_(std::exchange(other.out_, nullptr)),
      forward_(std::exchange(other.forward_, nullptr)),
      inverse_(std::exchange(other.inverse_, nullptr)) {}

Fft& Fft::operator=(Fft&& other) noexcept {
    if (this != &other) {
        release();
        n_ = std::exchange(other.n_, 0);
        in_ = std::exchange(other.in_, nullptr);
        out_ = std::exchange(other.out_, nullptr);
        forward_ = std::exchange(other.forward_, nullptr);
        inverse_ = std::exchange(other.inverse_, nullptr);
    }
    return *this;
}

void Fft::release() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
    if (in_) fftw_free(in_);
    if (out_) fftw_free(out_);
    forward_ = inverse_ = nullptr;
    in_ = out_ = nullptr;
}

void Fft::forward(std::span<const cd> in, std::span<cd> out) { execute(forward_, in, out); }

void Fft::inverse(std::span<const cd> in, std::span<cd> out) { execute(inverse_, in, out); }

void Fft::execute(fftw_plan plan, std::span<const cd> in, std::span<cd> out) {
    if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("Fft: length mismatch");
    // std::complex<double> and fftw_complex share layout.
    std::memcpy(in_, in.data(), n_ * sizeof(fftw_complex));
    fftw_execute(plan);
    std::memcpy(static_cast<void*>(out.data()), out_, n_ * sizeof(fftw_complex));
}

// ---------------------------------------------------------------------------

LagCorrelator::LagCorrelator(Index n)
    : n_(n), fft_(static_cast<std::size_t>(2 * n)), work_(2 * n), work_out_(2 * n) {
    if (n <= 0) throw std::invalid_argument("LagCorrelator: length must be positive");
}

CVector LagCorrelator::spectrum(const CVector& v) {
    if (v.size() != n_) throw std::invalid_argument("LagCorrelator: vector length mismatch");
    work_.setZero();
    work_.head(n_) = v;
    CVector spec(2 * n_);
    fft_.forward({work_.data(), static_cast<std::size_t>(work_.size())},
                 {spec.data(), static_cast<std::size_t>(spec.size())});
    return spec;
}

CVector LagCorrelator::cross(const CVector& spec_a, const CVector& spec_b) {
    const Index len = 2 * n_;
    work_ = spec_a.conjugate().cwiseProduct(spec_b);
    fft_.inverse({work_.data(), static_cast<std::size_t>(len)},
                 {work_out_.data(), static_cast<std::size_t>(len)});
    const double scale = 1.0 / static_cast<double>(len);
    CVector lags(lag_count());
    for (Index l = -(n_ - 1); l < n_; ++l) {
        lags[l + n_ - 1] = work_out_[(l + len) % len] * scale;
    }
    return lags;
}

CVector LagCorrelator::shift_combine(const CVector& coeff, const CVector& spec_b) {
    if (coeff.size() != lag_count()) throw std::invalid_argument("LagCorrelator: coefficient length mismatch");
    const Index len = 2 * n_;
    // Circular layout of conj(coeff); index n is unused.
    work_.setZero();
    for (Index l = -(n_ - 1); l < n_; ++l) work_[(l + len) % len] = std::conj(coeff[l + n_ - 1]);
    CVector g(len);
    fft_.forward({work_.data(), static_cast<std::size_t>(len)}, {g.data(), static_cast<std::size_t>(len)});
    work_ = g.conjugate().cwiseProduct(spec_b);
    fft_.inverse({work_.data(), static_cast<std::size_t>(len)},
                 {work_out_.data(), static_cast<std::size_t>(len)});
    return work_out_.head(n_) / static_cast<double>(len);
}

}  // namespace isac
