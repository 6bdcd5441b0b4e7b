#include "isac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace isac {

namespace {

bool same_vector(const CVector& a, const CVector& b) { return a.size() == b.size() && a == b; }

// y / |y| rounded so that std::abs of the result is exactly 1.
cd unit_phasor(cd y) {
    cd w = y / std::abs(y);
    for (int pass = 0; pass < 8 && std::abs(w) != 1.0; ++pass) w /= std::abs(w);
    if (std::abs(w) == 1.0) return w;
    // Nudge the dominant component one ulp at a time toward modulus 1.
    double re = w.real(), im = w.imag();
    double& big = std::abs(re) >= std::abs(im) ? re : im;
    for (int step = 0; step < 16 && std::abs(cd(re, im)) != 1.0; ++step) {
        const double target = std::abs(cd(re, im)) > 1.0 ? 0.0 : 2.0 * big;
        big = std::nextafter(big, target);
    }
    return {re, im};
}

// Unit-modulus projection; a zero entry keeps the phase it had in `previous`.
CVector phase_projection(const CVector& y, const CVector& previous) {
    CVector out(y.size());
    for (Index n = 0; n < y.size(); ++n) out[n] = std::abs(y[n]) > 0.0 ? unit_phasor(y[n]) : previous[n];
    return out;
}

double relative_change(const CVector& next, const CVector& prev) {
    const double denom = prev.norm();
    return denom > 0.0 ? (next - prev).norm() / denom : (next - prev).norm();
}

}  // namespace

void OptimizerConfig::validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
    if (!std::isfinite(mu_db)) throw std::invalid_argument("mu_db must be finite");
    if (!std::isfinite(p_h)) throw std::invalid_argument("p_h must be finite");
    if (n_cp < 0) throw std::invalid_argument("n_cp must be nonnegative");
    if (!(tol_x > 0.0)) throw std::invalid_argument("tol_x must be positive");
    if (!(tol_h > 0.0)) throw std::invalid_argument("tol_h must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (!(eig_tol > 0.0 && eig_tol < 1.0)) throw std::invalid_argument("eig_tol must lie in (0, 1)");
    if (!region.contains_mainlobe()) throw std::invalid_argument("region must contain the mainlobe cell (0, 0)");
}

std::vector<double> DesignState::objective_trace() const {
    std::vector<double> out;
    out.reserve(trace.size());
    for (const auto& row : trace) out.push_back(row.terms.objective);
    return out;
}

// ---------------------------------------------------------------------------

RMatrix modified_weights(const DelayDopplerRegion& region, double mainlobe_weight) {
    RMatrix w = region.weights();
    if (region.contains_mainlobe()) w(-region.l_min(), -region.k_min()) = mainlobe_weight;
    return w;
}

double lambda_shift(const Eigen::VectorXd& weights, int l_min, Index n_h) {
    if (weights.size() == 0) throw std::invalid_argument("lambda_shift: empty delay range");
    double best = 0.0;
    for (Index i = 0; i < weights.size(); ++i) {
        const Index l = std::abs(l_min + static_cast<int>(i));
        if (l >= n_h) throw std::invalid_argument("lambda_shift: delay offset not below N_h");
        best = std::max(best, weights[i] * static_cast<double>(n_h - l));
    }
    return best;
}

double lambda_channel(const CMatrix& h, double tol, std::uint64_t seed, int max_iters) {
    if (h.rows() != h.cols()) throw std::invalid_argument("lambda_channel: channel matrix must be square");
    if (!(tol > 0.0)) throw std::invalid_argument("lambda_channel: tolerance must be positive");
    const Index n = h.cols();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = cd(gauss(rng), gauss(rng));
    v.normalize();

    const double inflate = 1.0 + 10.0 * tol;
    double theta_prev = 0.0;
    double theta = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        const CVector w = h.adjoint() * (h * v);
        theta = v.dot(w).real();
        const double w_norm = w.norm();
        if (w_norm == 0.0) return 0.0;
        const double residual = (w - theta * v).norm();
        if (it > 1 && std::abs(theta - theta_prev) <= tol * theta && residual <= std::sqrt(tol) * theta)
            return theta * inflate;
        theta_prev = theta;
        v = w / w_norm;
    }
    throw ConvergenceError("lambda_channel: power iteration did not converge in " + std::to_string(max_iters) +
                               " iterations",
                           theta * inflate);
}

ObjectiveTerms objective(const CVector& x, const CVector& h, const CVector& s, const CMatrix& channel,
                         const OptimizerConfig& config) {
    const Index n_x = x.size();
    const CpExtension cp{config.n_cp};
    const Index n_h = n_x + cp.n_cp;
    if (h.size() != n_h || s.size() != n_x || channel.rows() != n_x || channel.cols() != n_x)
        throw std::invalid_argument("objective: dimension mismatch");
    const CVector x_cp = add_cp(x, cp);
    const double beta = beta_from_snr_loss(config.filter_power(n_h), n_h, config.mu_db);

    ObjectiveTerms t;
    t.wisl = wisl(caf_grid(h, x_cp, config.region, n_x), config.region);
    t.peak_loss = peak_loss(h, x_cp, beta);
    t.interference = interference_power(channel, x, s);
    const double scale = static_cast<double>(n_x) * static_cast<double>(n_x);
    t.objective = config.rho * (scale * t.wisl + t.peak_loss) + (1.0 - config.rho) * t.interference;
    return t;
}

// ---------------------------------------------------------------------------

JointDesigner::JointDesigner(CVector s, CMatrix channel, OptimizerConfig config)
    : config_(std::move(config)),
      s_(std::move(s)),
      channel_(std::move(channel)),
      n_x_(s_.size()),
      n_h_(s_.size() + config_.n_cp),
      cp_{config_.n_cp},
      p_h_(0.0),
      beta_(0.0),
      correlator_(std::max<Index>(n_h_, 1)) {
    config_.validate();
    if (n_x_ < 1) throw std::invalid_argument("JointDesigner: empty sequence");
    if (channel_.rows() != n_x_ || channel_.cols() != n_x_)
        throw std::invalid_argument("JointDesigner: channel matrix must be N_x x N_x");
    if (cp_.n_cp > n_x_) throw std::invalid_argument("JointDesigner: n_cp exceeds N_x");
    config_.region.check_delays(n_h_);

    p_h_ = config_.filter_power(n_h_);
    beta_ = beta_from_snr_loss(p_h_, n_h_, config_.mu_db);
    weights_ = modified_weights(config_.region, 1.0);

    const auto& region = config_.region;
    for (Index c = 0; c < region.doppler_count(); ++c) {
        const double lam = lambda_shift(weights_.col(c), region.l_min(), n_h_);
        consts_.lambda_a.push_back(lam);
        consts_.lambda_b.push_back(lam);
        lambda_sum_ += lam;
        phases_.push_back(doppler_phases(region.k_min() + static_cast<int>(c), n_h_, n_x_));
    }
    if (config_.rho < 1.0) {
        consts_.lambda_h = lambda_channel(channel_, config_.eig_tol, config_.seed);
        gram_ = channel_.adjoint() * channel_;
        matched_ = channel_.adjoint() * s_;
    }
}

DesignState JointDesigner::initial_state() const {
    DesignState state;
    state.x = phase_projection(s_, CVector::Ones(n_x_));
    state.h = std::sqrt(p_h_ / static_cast<double>(n_h_)) * add_cp(state.x, cp_);
    return state;
}

const std::vector<CVector>& JointDesigner::slice_spectra(const CVector& x) {
    if (!same_vector(x, spectra_x_) || spectra_.empty()) {
        const CVector u = add_cp(x, cp_);
        spectra_.clear();
        for (const auto& d : phases_) spectra_.push_back(correlator_.spectrum(d.cwiseProduct(u)));
        spectra_x_ = x;
    }
    return spectra_;
}

const std::vector<CVector>& JointDesigner::slice_lags(const CVector& x, const CVector& h) {
    if (!same_vector(x, lags_x_) || !same_vector(h, lags_h_) || lags_.empty()) {
        const auto& spectra = slice_spectra(x);
        const CVector spec_h = correlator_.spectrum(h);
        lags_.clear();
        for (const auto& spec : spectra) lags_.push_back(correlator_.cross(spec_h, spec));
        lags_x_ = x;
        lags_h_ = h;
    }
    return lags_;
}

CVector JointDesigner::filter_term(const CVector& lags, const CVector& spec, int k) {
    const auto& region = config_.region;
    CVector coeff = CVector::Zero(correlator_.lag_count());
    for (int l = region.l_min(); l <= region.l_max(); ++l) {
        const double w = weights_(l - region.l_min(), k - region.k_min());
        if (w != 0.0) coeff[l + n_h_ - 1] = w * std::conj(lags[l + n_h_ - 1]);
    }
    return correlator_.shift_combine(coeff, spec);
}

CVector JointDesigner::sequence_term(const CVector& lags, const CVector& spec_h, int k) {
    const auto& region = config_.region;
    // sum_l c_l J_{-l} h: coefficient of lag -l is c_l.
    CVector coeff = CVector::Zero(correlator_.lag_count());
    for (int l = region.l_min(); l <= region.l_max(); ++l) {
        const double w = weights_(l - region.l_min(), k - region.k_min());
        if (w != 0.0) coeff[-l + n_h_ - 1] = w * lags[l + n_h_ - 1];
    }
    const CVector xi = correlator_.shift_combine(coeff, spec_h);
    return phases_[static_cast<std::size_t>(k - region.k_min())].conjugate().cwiseProduct(xi);
}

CVector JointDesigner::filter_slice_term(const CVector& x, const CVector& h, int k) {
    if (!config_.region.contains(0, k)) throw std::invalid_argument("filter_slice_term: Doppler index outside region");
    const auto& lags = slice_lags(x, h);
    const std::size_t c = static_cast<std::size_t>(k - config_.region.k_min());
    return filter_term(lags[c], spectra_[c], k);
}

CVector JointDesigner::sequence_slice_term(const CVector& x, const CVector& h, int k) {
    if (!config_.region.contains(0, k))
        throw std::invalid_argument("sequence_slice_term: Doppler index outside region");
    const auto& lags = slice_lags(x, h);
    const std::size_t c = static_cast<std::size_t>(k - config_.region.k_min());
    return sequence_term(lags[c], correlator_.spectrum(h), k);
}

CVector JointDesigner::update_filter(const CVector& x, const CVector& h) {
    if (x.size() != n_x_ || h.size() != n_h_) throw std::invalid_argument("update_filter: dimension mismatch");
    const auto& lags = slice_lags(x, h);
    const auto& spectra = spectra_;
    // y = sum_k [N_h lambda_k h - Phi_k D_k Gamma x] + beta Gamma x
    CVector y = beta_ * add_cp(x, cp_) + (static_cast<double>(n_h_) * lambda_sum_) * h;
    for (std::size_t c = 0; c < phases_.size(); ++c)
        y -= filter_term(lags[c], spectra[c], config_.region.k_min() + static_cast<int>(c));
    const double norm = y.norm();
    if (!(norm > 0.0)) throw DegenerateDirection("update_filter: update direction vanished");
    return (std::sqrt(p_h_) / norm) * y;
}

CVector JointDesigner::update_sequence(const CVector& x, const CVector& h) {
    if (x.size() != n_x_ || h.size() != n_h_) throw std::invalid_argument("update_sequence: dimension mismatch");
    const double rho = config_.rho;
    CVector y = CVector::Zero(n_x_);
    if (rho > 0.0) {
        const auto& lags = slice_lags(x, h);
        const CVector spec_h = correlator_.spectrum(h);
        CVector z = -(p_h_ * lambda_sum_) * add_cp(x, cp_);
        for (std::size_t c = 0; c < phases_.size(); ++c)
            z += sequence_term(lags[c], spec_h, config_.region.k_min() + static_cast<int>(c));
        y += rho * (beta_ * cp_adjoint(h, cp_) - cp_adjoint(z, cp_));
    }
    if (rho < 1.0) y += (1.0 - rho) * (matched_ - gram_ * x + consts_.lambda_h * x);
    return phase_projection(y, x);
}

ObjectiveTerms JointDesigner::evaluate(const CVector& x, const CVector& h) {
    if (x.size() != n_x_ || h.size() != n_h_) throw std::invalid_argument("evaluate: dimension mismatch");
    const auto& lags = slice_lags(x, h);
    const auto& region = config_.region;
    double sidelobes = 0.0;
    for (Index c = 0; c < region.doppler_count(); ++c) {
        for (Index r = 0; r < region.delay_count(); ++r) {
            const double w = region.weights()(r, c);
            if (w != 0.0) sidelobes += w * std::norm(lags[static_cast<std::size_t>(c)][region.l_min() + r + n_h_ - 1]);
        }
    }
    const cd mainlobe = lags[static_cast<std::size_t>(-region.k_min())][n_h_ - 1];
    const double scale = static_cast<double>(n_x_) * static_cast<double>(n_x_);

    ObjectiveTerms t;
    t.wisl = sidelobes / scale;
    t.peak_loss = std::norm(mainlobe - beta_);
    t.interference = (channel_ * x - s_).squaredNorm();
    t.objective = config_.rho * (sidelobes + t.peak_loss) + (1.0 - config_.rho) * t.interference;
    return t;
}

JointDesigner::Step JointDesigner::mm_step(const CVector& x, const CVector& h) {
    // With rho = 0 the objective does not depend on h.
    CVector h_next = config_.rho > 0.0 ? update_filter(x, h) : h;
    CVector x_next = update_sequence(x, h_next);
    return {std::move(x_next), std::move(h_next)};
}

JointDesigner::Step JointDesigner::squarem_step(const Step& start) {
    const Step s1 = mm_step(start.x, start.h);
    const Step s2 = mm_step(s1.x, s1.h);
    const double g2 = evaluate(s2.x, s2.h).objective;

    // x is parameterized by its phases, h linearly.
    Eigen::VectorXd phase0(n_x_), r_phase(n_x_), v_phase(n_x_);
    for (Index n = 0; n < n_x_; ++n) {
        phase0[n] = std::arg(start.x[n]);
        r_phase[n] = std::arg(s1.x[n] * std::conj(start.x[n]));
        v_phase[n] = std::arg(s2.x[n] * std::conj(s1.x[n])) - r_phase[n];
    }
    const CVector r_h = s1.h - start.h;
    const CVector v_h = s2.h - 2.0 * s1.h + start.h;

    const double r_norm = std::sqrt(r_phase.squaredNorm() + r_h.squaredNorm());
    const double v_norm = std::sqrt(v_phase.squaredNorm() + v_h.squaredNorm());
    if (!(r_norm > 0.0) || !(v_norm > 0.0)) return s2;

    // Steplength alpha = -|r|/|v|; alpha = -1 reproduces s2. Extrapolated
    // points are projected back onto the constraints and stabilized by one MM
    // step; anything worse than s2 is rejected.
    double alpha = -r_norm / v_norm;
    for (int attempt = 0; attempt < 4 && alpha < -1.0; ++attempt) {
        CVector h = start.h - 2.0 * alpha * r_h + alpha * alpha * v_h;
        const double h_norm = h.norm();
        if (h_norm > 0.0) {
            h *= std::sqrt(p_h_) / h_norm;
            CVector x(n_x_);
            for (Index n = 0; n < n_x_; ++n)
                x[n] = std::polar(1.0, phase0[n] - 2.0 * alpha * r_phase[n] + alpha * alpha * v_phase[n]);
            Step candidate = mm_step(x, h);
            if (evaluate(candidate.x, candidate.h).objective <= g2) return candidate;
        }
        alpha = (alpha - 1.0) / 2.0;
    }
    return s2;
}

DesignState JointDesigner::run() { return run(initial_state()); }

DesignState JointDesigner::run(DesignState state, const IterationObserver& observer) {
    if (state.x.size() != n_x_ || state.h.size() != n_h_) throw std::invalid_argument("run: start state has wrong dimensions");
    state.trace.clear();
    state.iter = 0;
    state.converged = false;

    ObjectiveTerms terms = evaluate(state.x, state.h);
    state.trace.push_back({0, terms, 0.0, 0.0});
    for (int it = 1; it <= config_.max_iters; ++it) {
        Step next = config_.squarem ? squarem_step({state.x, state.h}) : mm_step(state.x, state.h);
        const double rel_x = relative_change(next.x, state.x);
        const double rel_h = relative_change(next.h, state.h);
        state.x = std::move(next.x);
        state.h = std::move(next.h);
        terms = evaluate(state.x, state.h);
        state.trace.push_back({it, terms, rel_x, rel_h});
        state.iter = it;
        if (observer) observer(it, state.x, state.h);
        if (rel_x <= config_.tol_x && rel_h <= config_.tol_h) {
            state.converged = true;
            break;
        }
    }
    return state;
}

DesignState run(const CVector& s, const CMatrix& channel, const OptimizerConfig& config) {
    JointDesigner designer(s, channel, config);
    return designer.run();
}

}  // namespace isac
