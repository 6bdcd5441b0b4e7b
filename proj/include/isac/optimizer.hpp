#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "isac/ambiguity.hpp"
#include "isac/fft.hpp"
#include "isac/otfs.hpp"
#include "isac/types.hpp"

namespace isac {

struct OptimizerConfig {
    double rho = 0.5;     // sensing vs communication weight, in [0, 1]
    double mu_db = 1.0;   // SNR-loss budget
    DelayDopplerRegion region{-5, 5, -3, 3};
    double p_h = 0.0;     // filter power; <= 0 selects N_h
    Index n_cp = 0;
    double tol_x = 1e-6;
    double tol_h = 1e-6;
    int max_iters = 10000;
    bool squarem = false;
    std::uint64_t seed = 1;
    double eig_tol = 1e-10;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    double filter_power(Index n_h) const { return p_h > 0.0 ? p_h : static_cast<double>(n_h); }
};

struct MajorizerConstants {
    std::vector<double> lambda_a;  // per Doppler index, k_min..k_max
    std::vector<double> lambda_b;
    double lambda_h = 0.0;
};

struct ObjectiveTerms {
    double objective = 0.0;
    double wisl = 0.0;          // on the 1/N_x-normalized CAF
    double peak_loss = 0.0;
    double interference = 0.0;
};

struct TraceRow {
    int iter = 0;
    ObjectiveTerms terms;
    double rel_change_x = 0.0;
    double rel_change_h = 0.0;
};

struct DesignState {
    CVector x;  // unimodular, length N_x
    CVector h;  // ||h||^2 = P_h, length N_h
    std::vector<TraceRow> trace;
    int iter = 0;
    bool converged = false;

    std::vector<double> objective_trace() const;
};

/// Raised by the power iteration when it runs out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double partial) : std::runtime_error(what), partial_(partial) {}
    double partial() const { return partial_; }

private:
    double partial_;
};

/// Raised when the filter update direction vanishes.
class DegenerateDirection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Region weights with the mainlobe cell replaced by `mainlobe_weight`.
RMatrix modified_weights(const DelayDopplerRegion& region, double mainlobe_weight);

/// max_l w_l (n_h - |l|) for one Doppler column; weights[i] belongs to lag l_min + i.
double lambda_shift(const Eigen::VectorXd& weights, int l_min, Index n_h);

/// Upper estimate of the largest eigenvalue of H^H H by power iteration,
/// inflated by (1 + 10 tol).
double lambda_channel(const CMatrix& h, double tol = 1e-10, std::uint64_t seed = 1, int max_iters = 200000);

/**
 * Exact objective
 *
 *   rho * (sum_{Omega} w_lk |F_lk|^2 + |F_00 - beta|^2) + (1 - rho) ||H x - s||^2
 *
 * with F_lk = h^H J_l D_k Gamma x the unnormalized CAF (n_x times the value
 * returned by caf_value), so the sidelobe sum and the peak loss share units.
 * Computed from caf_grid, peak_loss and interference_power.
 */
ObjectiveTerms objective(const CVector& x, const CVector& h, const CVector& s, const CMatrix& channel,
                         const OptimizerConfig& config);

/**
 * Alternating MM solver for the joint filter / sequence design.
 *
 * Holds the problem data (s, H), the majorizer constants and the FFT
 * workspaces. Each outer iteration takes one majorized filter step followed
 * by one majorized sequence step. Not thread safe; use one instance per
 * thread.
 */
class JointDesigner {
public:
    JointDesigner(CVector s, CMatrix channel, OptimizerConfig config);

    Index n_x() const { return n_x_; }
    Index n_h() const { return n_h_; }
    double p_h() const { return p_h_; }
    double beta() const { return beta_; }
    const OptimizerConfig& config() const { return config_; }
    const MajorizerConstants& constants() const { return consts_; }
    /// Weight table used in both block updates (mainlobe weight 1).
    const RMatrix& sensing_weights() const { return weights_; }

    /// x0 = phase(s), h0 = sqrt(P_h / N_h) Gamma x0.
    DesignState initial_state() const;

    CVector update_filter(const CVector& x, const CVector& h);
    CVector update_sequence(const CVector& x, const CVector& h);
    ObjectiveTerms evaluate(const CVector& x, const CVector& h);

    /// sum_l w_lk conj(F_lk) J_l D_k Gamma x, the filter-step correction of Doppler slice k.
    CVector filter_slice_term(const CVector& x, const CVector& h, int k);
    /// D_k^H sum_l w_lk F_lk J_l^H h, the sequence-step correction of Doppler slice k.
    CVector sequence_slice_term(const CVector& x, const CVector& h, int k);

    /// Called after every outer iteration with the accepted iterate.
    using IterationObserver = std::function<void(int iter, const CVector& x, const CVector& h)>;

    DesignState run();
    DesignState run(DesignState start, const IterationObserver& observer = {});

private:
    struct Step {
        CVector x;
        CVector h;
    };

    Step mm_step(const CVector& x, const CVector& h);
    Step squarem_step(const Step& start);

    const std::vector<CVector>& slice_spectra(const CVector& x);
    const std::vector<CVector>& slice_lags(const CVector& x, const CVector& h);
    CVector filter_term(const CVector& lags, const CVector& spec, int k);
    CVector sequence_term(const CVector& lags, const CVector& spec_h, int k);

    OptimizerConfig config_;
    CVector s_;
    CMatrix channel_;
    CMatrix gram_;       // H^H H
    CVector matched_;    // H^H s
    Index n_x_, n_h_;
    CpExtension cp_;
    double p_h_;
    double beta_;
    RMatrix weights_;
    MajorizerConstants consts_;
    double lambda_sum_ = 0.0;
    std::vector<CVector> phases_;  // D_k diagonals over N_h samples

    LagCorrelator correlator_;

    CVector spectra_x_;
    std::vector<CVector> spectra_;
    CVector lags_x_, lags_h_;
    std::vector<CVector> lags_;
};

/// Convenience wrapper: builds a JointDesigner and runs it from the default start.
DesignState run(const CVector& s, const CMatrix& channel, const OptimizerConfig& config);

}  // namespace isac
