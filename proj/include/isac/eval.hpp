#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "isac/ambiguity.hpp"
#include "isac/optimizer.hpp"
#include "isac/otfs.hpp"
#include "isac/types.hpp"

namespace isac {

struct Target {
    cd amplitude;
    int delay = 0;
    int doppler = 0;
};

struct TargetScene {
    std::vector<Target> targets;
};

/// sum_t a_t J_{l_t} D_{k_t} x_cp plus circular Gaussian noise of variance noise_power per sample.
CVector simulate_echo(const CVector& x_cp, const TargetScene& scene, double noise_power, Index n_x,
                      std::mt19937_64& rng);

/**
 * Delay-Doppler power map of an echo after the receive filter. Cell (l, k)
 * holds |caf(h, echo, -l, -k)|^2, so a target simulated at (l_t, k_t) peaks
 * at that cell and its sidelobes follow the CAF of (h, x_cp) around it.
 * Rows index l - region.l_min(), columns k - region.k_min().
 */
RMatrix range_doppler_map(const CVector& h, const CVector& echo, const DelayDopplerRegion& region, Index n_x);

struct CfarConfig {
    int training_cells = 8;  // per side, per dimension
    int guard_cells = 2;
    double p_fa = 1e-3;

    void validate() const;
    int training_count() const;
    /// Threshold multiplier N_t (p_fa^(-1/N_t) - 1) for exponential noise.
    double alpha() const;
};

struct Detection {
    Index row = 0;
    Index col = 0;
    bool operator==(const Detection&) const = default;
};

/**
 * Two-dimensional cell-averaging CFAR on a power grid. The training ring is
 * the square window of half-width training + guard minus the guard square;
 * indices wrap around the grid edges. A cell is declared when it exceeds
 * alpha times the training mean.
 */
std::vector<Detection> ca_cfar(const RMatrix& power, const CfarConfig& cfg);

/// As above, but the training mean is taken from `reference` (same shape) instead of `power`.
std::vector<Detection> ca_cfar(const RMatrix& power, const RMatrix& reference, const CfarConfig& cfg);

/// Gaussian-approximation rate log2(1 + 1 / (||Hx - s||^2 / N_x + noise_power)),
/// capped at log2(psk_order).
double adr(const CMatrix& channel, const CVector& x, const CVector& s, double noise_power, int psk_order);

/**
 * Empirical mutual information (bits/symbol) between transmitted and
 * hard-decided labels when the received block is demodulated directly,
 * y = (F_N kron I_M)(H x + z), accumulated over `realizations` noise draws.
 */
double adr_histogram(const CMatrix& channel, const CVector& x, const std::vector<unsigned>& labels,
                     const PskConstellation& psk, Index m, Index n, double noise_power, std::mt19937_64& rng,
                     int realizations = 8);

enum class AdrEstimator { gaussian, histogram };

/**
 * Where CFAR training statistics come from. `echo`: the map under test
 * (classic adaptive CA-CFAR). `noise`: a target-free map of an independent
 * noise draw through the same filter, so every cell threshold is matched to
 * the receiver noise floor and sidelobes count against the design.
 */
enum class CfarReference { echo, noise };

struct EvalConfig {
    Index m = 8;
    Index n = 16;
    int psk_order = 4;
    OptimizerConfig optimizer;
    double noise_power = 0.1;         // communication receiver
    int channel_paths = 3;
    int channel_max_delay = 3;
    int channel_max_doppler = 2;
    TargetScene scene{{{cd(1.0, 0.0), 1, -2}, {cd(1.0, 0.0), 3, -1}}};
    double radar_noise_power = 1.0;
    CfarConfig cfar;
    CfarReference cfar_reference = CfarReference::noise;
    DelayDopplerRegion detect_region{-16, 16, -16, 16};
    AdrEstimator adr_estimator = AdrEstimator::gaussian;
    int threads = 0;                  // 0: hardware concurrency

    void validate() const;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    double wisl = 0.0;              // final WISL on the 1/N_x-normalized CAF
    double wisl_db = 0.0;           // 10 log10(wisl / |f_00|^2)
    double peak_sidelobe_db = 0.0;  // 20 log10 relative to |f_00|
    double interference = 0.0;
    double adr = 0.0;
    double effective_adr = 0.0;     // adr * N_x / (N_x + N_cp)
    double output_snr_db = 0.0;     // weakest target after the designed filter
    int hits = 0;
    int false_alarms = 0;
    int baseline_hits = 0;          // unoptimized matched-filter pair
    int baseline_false_alarms = 0;
    int iterations = 0;
    bool converged = false;
};

struct EvalReport {
    std::vector<TrialResult> trials;
    double mean_wisl = 0.0;     // linear mean of wisl
    double mean_wisl_db = 0.0;  // mean of wisl_db
    double mean_interference = 0.0;
    double mean_adr = 0.0;
    double mean_effective_adr = 0.0;
    long total_hits = 0;
    long total_false_alarms = 0;
    long total_baseline_hits = 0;
    long total_baseline_false_alarms = 0;
    int converged_count = 0;
};

/// Random communication problem of one trial: PSK labels, transmit block s and channel H.
struct Problem {
    std::vector<unsigned> labels;
    CVector s;
    CMatrix channel;
};

Problem draw_problem(const EvalConfig& config, std::mt19937_64& rng);

/// Deterministic per-trial seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

/// One trial: random frame and channel, joint design, and evaluation.
TrialResult run_trial(const EvalConfig& config, int trial, std::uint64_t seed);

/// Runs `trials` independent trials (in parallel) and aggregates them in trial order.
EvalReport monte_carlo(const EvalConfig& config, int trials, std::uint64_t master_seed);

}  // namespace isac
