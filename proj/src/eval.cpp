#include "isac/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>

namespace isac {

namespace {

CVector complex_noise(Index length, double noise_power, std::mt19937_64& rng) {
    CVector z = CVector::Zero(length);
    if (noise_power <= 0.0) return z;
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
    for (Index i = 0; i < length; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        z[i] = cd(re, im);
    }
    return z;
}

CVector clean_echo(const CVector& x_cp, const TargetScene& scene, Index n_x) {
    const Index n_h = x_cp.size();
    CVector echo = CVector::Zero(n_h);
    for (const auto& t : scene.targets) {
        if (std::abs(t.delay) >= n_h)
            throw std::invalid_argument("simulate_echo: target delay " + std::to_string(t.delay) +
                                        " not below N_h = " + std::to_string(n_h));
        const CVector v = doppler_phases(t.doppler, n_h, n_x).cwiseProduct(x_cp);
        for (Index n = 0; n < n_h; ++n) {
            const Index m = n + t.delay;
            if (m >= 0 && m < n_h) echo[n] += t.amplitude * v[m];
        }
    }
    return echo;
}

struct DetectionCount {
    int hits = 0;
    int false_alarms = 0;
};

DetectionCount score(const std::vector<Detection>& detections, const DelayDopplerRegion& region,
                     const TargetScene& scene) {
    DetectionCount out;
    std::vector<bool> found(scene.targets.size(), false);
    for (const auto& d : detections) {
        const int l = region.l_min() + static_cast<int>(d.row);
        const int k = region.k_min() + static_cast<int>(d.col);
        bool hit = false;
        for (std::size_t i = 0; i < scene.targets.size(); ++i) {
            if (scene.targets[i].delay == l && scene.targets[i].doppler == k) {
                found[i] = true;
                hit = true;
            }
        }
        if (!hit) ++out.false_alarms;
    }
    out.hits = static_cast<int>(std::count(found.begin(), found.end(), true));
    return out;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

CVector simulate_echo(const CVector& x_cp, const TargetScene& scene, double noise_power, Index n_x,
                      std::mt19937_64& rng) {
    if (noise_power < 0.0) throw std::invalid_argument("simulate_echo: noise power must be nonnegative");
    CVector echo = clean_echo(x_cp, scene, n_x);
    echo += complex_noise(echo.size(), noise_power, rng);
    return echo;
}

RMatrix range_doppler_map(const CVector& h, const CVector& echo, const DelayDopplerRegion& region, Index n_x) {
    const DelayDopplerRegion mirrored(-region.l_max(), -region.l_min(), -region.k_max(), -region.k_min());
    const CafGrid grid = caf_grid(h, echo, mirrored, n_x);
    RMatrix power(region.delay_count(), region.doppler_count());
    for (int l = region.l_min(); l <= region.l_max(); ++l)
        for (int k = region.k_min(); k <= region.k_max(); ++k)
            power(l - region.l_min(), k - region.k_min()) = std::norm(grid.at(-l, -k));
    return power;
}

// ---------------------------------------------------------------------------

void CfarConfig::validate() const {
    if (training_cells < 1) throw std::invalid_argument("cfar training cells must be at least 1");
    if (guard_cells < 0) throw std::invalid_argument("cfar guard cells must be nonnegative");
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("cfar p_fa must lie in (0, 1)");
}

int CfarConfig::training_count() const {
    const int outer = 2 * (training_cells + guard_cells) + 1;
    const int inner = 2 * guard_cells + 1;
    return outer * outer - inner * inner;
}

double CfarConfig::alpha() const {
    const double n_t = training_count();
    return n_t * (std::pow(p_fa, -1.0 / n_t) - 1.0);
}

std::vector<Detection> ca_cfar(const RMatrix& power, const CfarConfig& cfg) { return ca_cfar(power, power, cfg); }

std::vector<Detection> ca_cfar(const RMatrix& power, const RMatrix& reference, const CfarConfig& cfg) {
    cfg.validate();
    if (reference.rows() != power.rows() || reference.cols() != power.cols())
        throw std::invalid_argument("ca_cfar: reference grid shape differs from the power grid");
    const Index rows = power.rows();
    const Index cols = power.cols();
    const int half = cfg.training_cells + cfg.guard_cells;
    const Index window = 2 * half + 1;
    if (window > rows || window > cols)
        throw std::invalid_argument("ca_cfar: window of " + std::to_string(window) + " cells exceeds the " +
                                    std::to_string(rows) + " x " + std::to_string(cols) + " grid");
    const double alpha = cfg.alpha();
    const double n_t = cfg.training_count();
    const int g = cfg.guard_cells;

    std::vector<Detection> detections;
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            double sum = 0.0;
            for (int dr = -half; dr <= half; ++dr) {
                const Index rr = (r + dr + rows) % rows;
                for (int dc = -half; dc <= half; ++dc) {
                    if (std::abs(dr) <= g && std::abs(dc) <= g) continue;
                    sum += reference(rr, (c + dc + cols) % cols);
                }
            }
            if (power(r, c) > alpha * (sum / n_t)) detections.push_back({r, c});
        }
    }
    return detections;
}

// ---------------------------------------------------------------------------

double adr(const CMatrix& channel, const CVector& x, const CVector& s, double noise_power, int psk_order) {
    if (noise_power < 0.0) throw std::invalid_argument("adr: noise power must be nonnegative");
    if (psk_order < 2) throw std::invalid_argument("adr: PSK order must be at least 2");
    const double cap = std::log2(static_cast<double>(psk_order));
    const double disturbance = interference_power(channel, x, s) / static_cast<double>(x.size()) + noise_power;
    if (disturbance <= 0.0) return cap;
    return std::min(cap, std::log2(1.0 + 1.0 / disturbance));
}

double adr_histogram(const CMatrix& channel, const CVector& x, const std::vector<unsigned>& labels,
                     const PskConstellation& psk, Index m, Index n, double noise_power, std::mt19937_64& rng,
                     int realizations) {
    if (noise_power < 0.0) throw std::invalid_argument("adr_histogram: noise power must be nonnegative");
    if (realizations < 1) throw std::invalid_argument("adr_histogram: need at least one realization");
    if (static_cast<Index>(labels.size()) != m * n || x.size() != m * n)
        throw std::invalid_argument("adr_histogram: dimension mismatch");
    const int q = psk.order();
    RMatrix joint = RMatrix::Zero(q, q);
    const CVector hx = channel * x;
    for (int rep = 0; rep < realizations; ++rep) {
        const CVector y = dd_receive(hx + complex_noise(hx.size(), noise_power, rng), m, n);
        for (Index i = 0; i < y.size(); ++i) joint(labels[static_cast<std::size_t>(i)], psk.demap(y[i])) += 1.0;
    }
    joint /= joint.sum();
    const Eigen::VectorXd p_tx = joint.rowwise().sum();
    const Eigen::RowVectorXd p_rx = joint.colwise().sum();
    double mi = 0.0;
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
            if (joint(a, b) > 0.0) mi += joint(a, b) * std::log2(joint(a, b) / (p_tx[a] * p_rx[b]));
    return std::max(0.0, mi);
}

// ---------------------------------------------------------------------------

void EvalConfig::validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("M and N must be positive");
    PskConstellation probe(psk_order);
    optimizer.validate();
    const Index n_x = m * n;
    const Index n_h = n_x + optimizer.n_cp;
    if (optimizer.n_cp > n_x) throw std::invalid_argument("n_cp must not exceed M*N");
    optimizer.region.check_delays(n_h);
    if (noise_power < 0.0) throw std::invalid_argument("noise_power must be nonnegative");
    if (channel_paths < 1) throw std::invalid_argument("channel_paths must be at least 1");
    if (channel_max_delay < 0 || channel_max_delay >= n_x)
        throw std::invalid_argument("channel_max_delay must lie in [0, M*N)");
    if (channel_max_doppler < 0) throw std::invalid_argument("channel_max_doppler must be nonnegative");
    if (radar_noise_power < 0.0) throw std::invalid_argument("radar_noise_power must be nonnegative");
    cfar.validate();
    detect_region.check_delays(n_h);
    const Index window = 2 * (cfar.training_cells + cfar.guard_cells) + 1;
    if (window > detect_region.delay_count() || window > detect_region.doppler_count())
        throw std::invalid_argument("CFAR window exceeds the detection region");
    for (const auto& t : scene.targets)
        if (!detect_region.contains(t.delay, t.doppler))
            throw std::invalid_argument("target outside the detection region");
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ splitmix64(index));
}

Problem draw_problem(const EvalConfig& config, std::mt19937_64& rng) {
    const PskConstellation psk(config.psk_order);
    Problem p;
    p.s = modulate(random_frame(config.m, config.n, psk, rng, &p.labels));
    p.channel = channel_matrix(
        random_channel(rng, config.channel_paths, config.channel_max_delay, config.channel_max_doppler), p.s.size());
    return p;
}

TrialResult run_trial(const EvalConfig& config, int trial, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const PskConstellation psk(config.psk_order);
    const Problem problem = draw_problem(config, rng);
    const CVector& s = problem.s;
    const CMatrix& channel = problem.channel;
    const std::vector<unsigned>& labels = problem.labels;
    const Index n_x = s.size();

    OptimizerConfig opt = config.optimizer;
    opt.seed = seed;
    JointDesigner designer(s, channel, opt);
    const DesignState state = designer.run();

    TrialResult out;
    out.trial = trial;
    out.seed = seed;
    out.iterations = state.iter;
    out.converged = state.converged;

    const CpExtension cp{opt.n_cp};
    const CVector x_cp = add_cp(state.x, cp);
    const CafGrid grid = caf_grid(state.h, x_cp, opt.region, n_x);
    out.wisl = wisl(grid, opt.region);
    out.wisl_db = 10.0 * std::log10(out.wisl / std::norm(grid.at(0, 0)));
    out.peak_sidelobe_db = peak_sidelobe_db(grid, opt.region);
    out.interference = interference_power(channel, state.x, s);
    out.adr = config.adr_estimator == AdrEstimator::gaussian
                  ? adr(channel, state.x, s, config.noise_power, config.psk_order)
                  : adr_histogram(channel, state.x, labels, psk, config.m, config.n, config.noise_power, rng);
    out.effective_adr = out.adr * static_cast<double>(n_x) / static_cast<double>(n_x + cp.n_cp);

    double weakest = std::numeric_limits<double>::infinity();
    for (const auto& t : config.scene.targets) weakest = std::min(weakest, std::norm(t.amplitude));
    out.output_snr_db = 10.0 * std::log10(weakest * std::norm(state.h.dot(x_cp)) /
                                          (config.radar_noise_power * state.h.squaredNorm()));

    // Both pairs see the same noise realizations.
    const DesignState baseline = designer.initial_state();
    const CVector baseline_cp = add_cp(baseline.x, cp);
    const CVector noise = complex_noise(x_cp.size(), config.radar_noise_power, rng);
    const CVector reference_noise = complex_noise(x_cp.size(), config.radar_noise_power, rng);
    const auto detect = [&](const CVector& h, const CVector& tx) {
        const CVector echo = clean_echo(tx, config.scene, n_x) + noise;
        const RMatrix power = range_doppler_map(h, echo, config.detect_region, n_x);
        const auto found = config.cfar_reference == CfarReference::echo
                               ? ca_cfar(power, config.cfar)
                               : ca_cfar(power, range_doppler_map(h, reference_noise, config.detect_region, n_x),
                                         config.cfar);
        return score(found, config.detect_region, config.scene);
    };
    const DetectionCount designed = detect(state.h, x_cp);
    const DetectionCount matched = detect(baseline.h, baseline_cp);
    out.hits = designed.hits;
    out.false_alarms = designed.false_alarms;
    out.baseline_hits = matched.hits;
    out.baseline_false_alarms = matched.false_alarms;
    return out;
}

EvalReport monte_carlo(const EvalConfig& config, int trials, std::uint64_t master_seed) {
    if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be at least 1");
    config.validate();

    EvalReport report;
    report.trials.resize(static_cast<std::size_t>(trials));
    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(trials));

    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    const auto work = [&](unsigned id) {
        try {
            for (int t = next++; t < trials; t = next++)
                report.trials[static_cast<std::size_t>(t)] =
                    run_trial(config, t, derive_seed(master_seed, static_cast<std::uint64_t>(t)));
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& t : report.trials) {
        report.mean_wisl += t.wisl;
        report.mean_wisl_db += t.wisl_db;
        report.mean_interference += t.interference;
        report.mean_adr += t.adr;
        report.mean_effective_adr += t.effective_adr;
        report.total_hits += t.hits;
        report.total_false_alarms += t.false_alarms;
        report.total_baseline_hits += t.baseline_hits;
        report.total_baseline_false_alarms += t.baseline_false_alarms;
        report.converged_count += t.converged ? 1 : 0;
    }
    const double inv = 1.0 / trials;
    report.mean_wisl *= inv;
    report.mean_wisl_db *= inv;
    report.mean_interference *= inv;
    report.mean_adr *= inv;
    report.mean_effective_adr *= inv;
    return report;
}

}  // namespace isac
