#include "isac/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "isac/otfs.hpp"

namespace isac {

DelayDopplerRegion::DelayDopplerRegion(int l_min, int l_max, int k_min, int k_max)
    : DelayDopplerRegion(l_min, l_max, k_min, k_max,
                         RMatrix::Ones(std::max(l_max - l_min + 1, 1), std::max(k_max - k_min + 1, 1))) {}

DelayDopplerRegion::DelayDopplerRegion(int l_min, int l_max, int k_min, int k_max, RMatrix weights)
    : l_min_(l_min), l_max_(l_max), k_min_(k_min), k_max_(k_max), weights_(std::move(weights)) {
    if (l_min > l_max || k_min > k_max) throw std::invalid_argument("DelayDopplerRegion: empty interval");
    if (weights_.rows() != delay_count() || weights_.cols() != doppler_count())
        throw std::invalid_argument("DelayDopplerRegion: weight table shape does not match the region");
    if ((weights_.array() < 0.0).any() || !weights_.allFinite())
        throw std::invalid_argument("DelayDopplerRegion: weights must be finite and nonnegative");
    // The uniform constructor passes all-ones; the mainlobe is never weighted.
    if (contains_mainlobe()) weights_(-l_min_, -k_min_) = 0.0;
}

int DelayDopplerRegion::max_abs_delay() const { return std::max(std::abs(l_min_), std::abs(l_max_)); }

void DelayDopplerRegion::check_delays(Index n_h) const {
    if (max_abs_delay() >= n_h)
        throw std::invalid_argument("delay offset " + std::to_string(max_abs_delay()) +
                                    " is not smaller than the filter length " + std::to_string(n_h));
}

bool CafGrid::matches(const DelayDopplerRegion& region) const {
    return l_min == region.l_min() && k_min == region.k_min() && values.rows() == region.delay_count() &&
           values.cols() == region.doppler_count();
}

// ---------------------------------------------------------------------------

cd caf_value(const CVector& h, const CVector& x_cp, int l, int k, Index n_x) {
    const Index n_h = h.size();
    if (x_cp.size() != n_h) throw std::invalid_argument("caf_value: filter and sequence lengths differ");
    if (std::abs(l) >= n_h)
        throw std::invalid_argument("caf_value: |l| = " + std::to_string(std::abs(l)) + " must be below N_h = " +
                                    std::to_string(n_h));
    const CVector d = doppler_phases(k, n_h, n_x);
    cd acc = 0.0;
    for (Index n = 0; n < n_h; ++n) {
        const Index m = n + l;
        if (m < 0 || m >= n_h) continue;
        acc += std::conj(h[n]) * d[m] * x_cp[m];
    }
    return acc / static_cast<double>(n_x);
}

CafGrid caf_grid(const CVector& h, const CVector& x_cp, const DelayDopplerRegion& region, Index n_x) {
    LagCorrelator correlator(h.size());
    return caf_grid(correlator, h, x_cp, region, n_x);
}

CafGrid caf_grid(LagCorrelator& correlator, const CVector& h, const CVector& x_cp,
                 const DelayDopplerRegion& region, Index n_x) {
    const Index n_h = h.size();
    if (x_cp.size() != n_h || correlator.length() != n_h)
        throw std::invalid_argument("caf_grid: filter, sequence and correlator lengths differ");
    region.check_delays(n_h);

    CafGrid grid{region.l_min(), region.k_min(), CMatrix(region.delay_count(), region.doppler_count())};
    const CVector spec_h = correlator.spectrum(h);
    const double scale = 1.0 / static_cast<double>(n_x);
    for (int k = region.k_min(); k <= region.k_max(); ++k) {
        const CVector modulated = doppler_phases(k, n_h, n_x).cwiseProduct(x_cp);
        const CVector lags = correlator.cross(spec_h, correlator.spectrum(modulated));
        for (int l = region.l_min(); l <= region.l_max(); ++l) {
            grid.values(l - region.l_min(), k - region.k_min()) = lags[l + n_h - 1] * scale;
        }
    }
    return grid;
}

double wisl(const CafGrid& grid, const DelayDopplerRegion& region) {
    if (!grid.matches(region)) throw std::invalid_argument("wisl: grid shape does not match the region");
    return (region.weights().array() * grid.values.array().abs2()).sum();
}

double peak_sidelobe_db(const CafGrid& grid, const DelayDopplerRegion& region) {
    if (!grid.matches(region) || !region.contains_mainlobe())
        throw std::invalid_argument("peak_sidelobe_db: grid must match a region containing the mainlobe");
    const double main = std::abs(grid.at(0, 0));
    double peak = 0.0;
    for (Index r = 0; r < grid.values.rows(); ++r)
        for (Index c = 0; c < grid.values.cols(); ++c)
            if (region.weights()(r, c) > 0.0) peak = std::max(peak, std::abs(grid.values(r, c)));
    if (peak == 0.0) return kNegativeInfinityDb;
    return 20.0 * std::log10(peak / main);
}

double lpg_db(const CVector& h, const CVector& x_cp) {
    if (h.size() != x_cp.size()) throw std::invalid_argument("lpg_db: length mismatch");
    const double hn = h.squaredNorm();
    const double xn = x_cp.squaredNorm();
    if (hn == 0.0 || xn == 0.0) throw std::invalid_argument("lpg_db: zero vector");
    const double inner = std::norm(h.dot(x_cp));
    if (inner == 0.0) return kNegativeInfinityDb;
    // Clamp rounding above 0 dB; Cauchy-Schwarz bounds the ratio by one.
    return std::min(0.0, 10.0 * std::log10(inner / (hn * xn)));
}

double beta_from_snr_loss(double p_h, Index n_h, double mu_db) {
    if (!(p_h > 0.0)) throw std::invalid_argument("beta_from_snr_loss: filter power must be positive");
    if (n_h < 1) throw std::invalid_argument("beta_from_snr_loss: N_h must be positive");
    return std::sqrt(p_h * static_cast<double>(n_h)) * std::pow(10.0, -mu_db / 20.0);
}

double peak_loss(const CVector& h, const CVector& x_cp, double beta) {
    if (h.size() != x_cp.size()) throw std::invalid_argument("peak_loss: length mismatch");
    return std::norm(h.dot(x_cp) - beta);
}

}  // namespace isac
