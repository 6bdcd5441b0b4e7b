#pragma once

#include <limits>

#include "isac/fft.hpp"
#include "isac/types.hpp"

namespace isac {

/**
 * Rectangular delay-Doppler area [l_min, l_max] x [k_min, k_max] with a
 * nonnegative weight per cell. The mainlobe cell (0, 0), when present, must
 * carry weight zero.
 *
 * Weights are stored with rows indexed by l - l_min and columns by k - k_min.
 */
class DelayDopplerRegion {
public:
    /// Uniform unit weights everywhere except the mainlobe.
    DelayDopplerRegion(int l_min, int l_max, int k_min, int k_max);
    DelayDopplerRegion(int l_min, int l_max, int k_min, int k_max, RMatrix weights);

    int l_min() const { return l_min_; }
    int l_max() const { return l_max_; }
    int k_min() const { return k_min_; }
    int k_max() const { return k_max_; }
    Index delay_count() const { return l_max_ - l_min_ + 1; }
    Index doppler_count() const { return k_max_ - k_min_ + 1; }

    bool contains(int l, int k) const { return l >= l_min_ && l <= l_max_ && k >= k_min_ && k <= k_max_; }
    bool contains_mainlobe() const { return contains(0, 0); }
    int max_abs_delay() const;

    double weight(int l, int k) const { return weights_(l - l_min_, k - k_min_); }
    const RMatrix& weights() const { return weights_; }

    /// Throws unless every |l| < n_h.
    void check_delays(Index n_h) const;

private:
    int l_min_, l_max_, k_min_, k_max_;
    RMatrix weights_;
};

/// CAF samples over a region; values(l - l_min, k - k_min).
struct CafGrid {
    int l_min = 0;
    int k_min = 0;
    CMatrix values;

    cd at(int l, int k) const { return values(l - l_min, k - k_min); }
    bool matches(const DelayDopplerRegion& region) const;
};

/// (1/n_x) h^H J_l D_k x_cp by direct summation (aperiodic shifts).
cd caf_value(const CVector& h, const CVector& x_cp, int l, int k, Index n_x);

/// All region cells via one 2N_h-point FFT correlation per Doppler slice.
CafGrid caf_grid(const CVector& h, const CVector& x_cp, const DelayDopplerRegion& region, Index n_x);
CafGrid caf_grid(LagCorrelator& correlator, const CVector& h, const CVector& x_cp,
                 const DelayDopplerRegion& region, Index n_x);

/// Sum of weight * |f|^2 over the region.
double wisl(const CafGrid& grid, const DelayDopplerRegion& region);

/// Largest |f_lk| / |f_00| in dB over cells with positive weight; -inf when
/// all such cells vanish.
double peak_sidelobe_db(const CafGrid& grid, const DelayDopplerRegion& region);

inline constexpr double kNegativeInfinityDb = -std::numeric_limits<double>::infinity();

/// Loss in processing gain, 10 log10(|h^H x|^2 / (|h|^2 |x|^2)). Returns
/// kNegativeInfinityDb when h is orthogonal to x_cp.
double lpg_db(const CVector& h, const CVector& x_cp);

/// Mainlobe target sqrt(p_h n_h) 10^(-mu_db / 20) for an SNR-loss budget.
double beta_from_snr_loss(double p_h, Index n_h, double mu_db);

/// |h^H x_cp - beta|^2.
double peak_loss(const CVector& h, const CVector& x_cp, double beta);

}  // namespace isac
