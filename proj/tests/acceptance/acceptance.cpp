// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "isac/cli.hpp"
#include "isac/eval.hpp"
#include "isac/optimizer.hpp"

using namespace isac;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass;
    std::string detail;
};

CVector random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
    return v;
}

CVector random_unimodular(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    CVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = std::polar(1.0, u(rng));
    return v;
}

CVector vec_shift(Index n, int l) {
    CMatrix j = CMatrix::Zero(n, n);
    for (Index r = 0; r < n; ++r)
        if (r + l >= 0 && r + l < n) j(r, r + l) = 1.0;
    return Eigen::Map<const CVector>(j.data(), j.size());
}

double largest_eigenvalue(const CMatrix& m) {
    return Eigen::SelfAdjointEigenSolver<CMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

struct Problem128 {
    CVector s;
    CMatrix channel;
};

Problem128 draw(Index m, Index n, std::uint64_t seed) {
    EvalConfig c;
    c.m = m;
    c.n = n;
    std::mt19937_64 rng(seed);
    const Problem p = draw_problem(c, rng);
    return {p.s, p.channel};
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------------------

Verdict caf_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> len(8, 128);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Index n_h = len(rng);
        const Index n_cp = rep % 4 == 0 ? 0 : n_h / (2 + rep % 5);
        const Index n_x = n_h - n_cp;
        const int lmax = static_cast<int>(std::min<Index>(n_h - 1, 12));
        const DelayDopplerRegion region(-lmax, lmax, -6, 6);
        const CVector h = random_vector(n_h, rng);
        const CVector x_cp = add_cp(random_unimodular(n_x, rng), {n_cp});
        const CafGrid grid = caf_grid(h, x_cp, region, n_x);
        for (int l = -lmax; l <= lmax; ++l)
            for (int k = -6; k <= 6; ++k)
                worst = std::max(worst, std::abs(grid.at(l, k) - caf_value(h, x_cp, l, k, n_x)));
    }
    const double t = seconds_since(start);
    return {worst <= 1e-10 && t < 10.0, "max abs error " + fmt("%.3g", worst) + ", " + fmt("%.2f", t) + " s"};
}

Verdict eigen_oracle() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    double shift_err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const Index m = 2, n = 4;
        const Index n_cp = rep % 5;  // N_h = 8..12
        const Index n_h = m * n + n_cp;
        RMatrix w(7, 5);
        for (Index i = 0; i < w.size(); ++i) w(i) = rep % 3 == 0 && i % 4 == 0 ? 0.0 : u(rng);
        OptimizerConfig cfg;
        cfg.n_cp = n_cp;
        cfg.region = DelayDopplerRegion(-3, 3, -2, 2, w);
        const Problem128 p = draw(m, n, 100 + rep);
        const JointDesigner designer(p.s, p.channel, cfg);
        const RMatrix& sw = designer.sensing_weights();
        for (Index c = 0; c < 5; ++c) {
            CMatrix a = CMatrix::Zero(n_h * n_h, n_h * n_h);
            CMatrix b = CMatrix::Zero(n_h * n_h, n_h * n_h);
            for (int l = -3; l <= 3; ++l) {
                const CVector va = vec_shift(n_h, l);
                const CVector vb = vec_shift(n_h, -l);
                a += sw(l + 3, c) * va * va.adjoint();
                b += sw(l + 3, c) * vb * vb.adjoint();
            }
            const double la = largest_eigenvalue(a), lb = largest_eigenvalue(b);
            shift_err = std::max(shift_err, std::abs(designer.constants().lambda_a[c] - la));
            shift_err = std::max(shift_err, std::abs(designer.constants().lambda_b[c] - lb));
            shift_err = std::max(shift_err, std::abs(lambda_shift(sw.col(c), -3, n_h) - la));
        }
    }
    double channel_err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        CMatrix h(8, 8);
        for (Index c = 0; c < 8; ++c) h.col(c) = random_vector(8, rng);
        const double exact = largest_eigenvalue(h.adjoint() * h);
        channel_err = std::max(channel_err, std::abs(lambda_channel(h, 1e-10, rep + 1) - exact) / exact);
    }
    return {shift_err <= 1e-10 && channel_err <= 1e-8,
            "shift constants max error " + fmt("%.3g", shift_err) + ", channel max relative error " +
                fmt("%.3g", channel_err)};
}

struct RunAudit {
    double worst_rise = 0.0;        // max relative objective increase per step
    double worst_modulus = 0.0;     // max ||x_n| - 1|
    double worst_power = 0.0;       // max |‖h‖² - P_h| / P_h
    int runs = 0;
    long iterations = 0;
    double seconds = 0.0;
};

RunAudit audit_runs() {
    RunAudit audit;
    const auto start = Clock::now();
    for (bool squarem : {false, true}) {
        for (int seed = 1; seed <= 20; ++seed) {
            const Problem128 p = draw(8, 16, 500 + seed);
            OptimizerConfig cfg;
            cfg.squarem = squarem;
            cfg.seed = seed;
            JointDesigner designer(p.s, p.channel, cfg);
            const auto observe = [&](int, const CVector& x, const CVector& h) {
                for (Index n = 0; n < x.size(); ++n) audit.worst_modulus = std::max(audit.worst_modulus, std::abs(std::abs(x[n]) - 1.0));
                audit.worst_power = std::max(audit.worst_power, std::abs(h.squaredNorm() - designer.p_h()) / designer.p_h());
            };
            const DesignState start_state = designer.initial_state();
            observe(0, start_state.x, start_state.h);
            const DesignState state = designer.run(start_state, observe);
            const auto trace = state.objective_trace();
            for (std::size_t i = 1; i < trace.size(); ++i)
                audit.worst_rise = std::max(audit.worst_rise, (trace[i] - trace[i - 1]) / std::abs(trace[i - 1]));
            ++audit.runs;
            audit.iterations += state.iter;
        }
    }
    audit.seconds = seconds_since(start);
    return audit;
}

Verdict sidelobe_suppression() {
    const auto start = Clock::now();
    const Problem128 p = draw(16, 16, 1);
    OptimizerConfig cfg;
    cfg.rho = 0.5;
    cfg.mu_db = 1.0;
    cfg.region = DelayDopplerRegion(-7, 7, -5, 5);
    cfg.squarem = true;
    JointDesigner designer(p.s, p.channel, cfg);
    const DesignState state = designer.run();
    const CafGrid grid = caf_grid(state.h, state.x, cfg.region, designer.n_x());
    const double psl = peak_sidelobe_db(grid, cfg.region);
    const double t = seconds_since(start);
    return {psl <= -60.0 && t <= 600.0, "N_x = 256, peak sidelobe " + fmt("%.2f", psl) + " dB after " +
                                            std::to_string(state.iter) + " iterations" +
                                            (state.converged ? " (converged)" : " (iteration cap)") + ", " +
                                            fmt("%.1f", t) + " s"};
}

EvalConfig sweep_base() {
    EvalConfig c;
    c.optimizer.squarem = true;
    c.threads = 0;
    return c;
}

Verdict rho_ordering() {
    std::vector<EvalReport> reports;
    std::string detail;
    for (double rho : {0.001, 0.5, 1.0}) {
        EvalConfig c = sweep_base();
        c.optimizer.rho = rho;
        reports.push_back(monte_carlo(c, 5, 11));
        detail += "rho " + fmt("%g", rho) + ": WISL " + fmt("%.2f", reports.back().mean_wisl_db) + " dB, ADR " +
                  fmt("%.4f", reports.back().mean_adr) + "; ";
    }
    const bool wisl_ok = reports[0].mean_wisl_db > reports[1].mean_wisl_db && reports[1].mean_wisl_db > reports[2].mean_wisl_db;
    const bool adr_ok = reports[0].mean_adr > reports[1].mean_adr && reports[1].mean_adr > reports[2].mean_adr;
    return {wisl_ok && adr_ok, detail};
}

Verdict cp_sweep() {
    EvalConfig c = sweep_base();
    const EvalReport plain = monte_carlo(c, 10, 12);
    c.optimizer.n_cp = 32;
    const EvalReport cp = monte_carlo(c, 10, 12);
    double penalty_err = 0.0;
    for (const auto& t : cp.trials) penalty_err = std::max(penalty_err, std::abs(t.effective_adr - t.adr * 128.0 / 160.0));
    for (const auto& t : plain.trials) penalty_err = std::max(penalty_err, std::abs(t.effective_adr - t.adr));
    return {cp.mean_wisl_db < plain.mean_wisl_db && penalty_err <= 1e-15,
            "WISL " + fmt("%.2f", plain.mean_wisl_db) + " dB (N_cp 0) vs " + fmt("%.2f", cp.mean_wisl_db) +
                " dB (N_cp 32); effective ADR " + fmt("%.4f", plain.mean_effective_adr) + " vs " +
                fmt("%.4f", cp.mean_effective_adr) + " (penalty error " + fmt("%.2g", penalty_err) + ")"};
}

Verdict snr_loss_sweep() {
    EvalConfig c = sweep_base();
    c.optimizer.mu_db = 0.1;
    const EvalReport low = monte_carlo(c, 10, 13);
    c.optimizer.mu_db = 3.0;
    const EvalReport high = monte_carlo(c, 10, 13);
    return {high.mean_wisl_db < low.mean_wisl_db && high.mean_adr > low.mean_adr,
            "mu 0.1 dB: WISL " + fmt("%.2f", low.mean_wisl_db) + " dB, ADR " + fmt("%.4f", low.mean_adr) +
                "; mu 3 dB: WISL " + fmt("%.2f", high.mean_wisl_db) + " dB, ADR " + fmt("%.4f", high.mean_adr)};
}

Verdict detection() {
    const auto start = Clock::now();
    EvalConfig c = sweep_base();
    c.optimizer.max_iters = 300;
    c.cfar_reference = CfarReference::noise;
    const int trials = 1000;
    const EvalReport r = monte_carlo(c, trials, 14);
    int both = 0, baseline_both = 0;
    double min_snr = std::numeric_limits<double>::infinity();
    for (const auto& t : r.trials) {
        both += t.hits == 2 ? 1 : 0;
        baseline_both += t.baseline_hits == 2 ? 1 : 0;
        min_snr = std::min(min_snr, t.output_snr_db);
    }
    const double pd = static_cast<double>(both) / trials;
    return {r.total_false_alarms < r.total_baseline_false_alarms && pd >= 0.95 && min_snr >= 10.0,
            "false alarms " + std::to_string(r.total_false_alarms) + " vs baseline " +
                std::to_string(r.total_baseline_false_alarms) + "; both targets in " + fmt("%.1f", 100.0 * pd) +
                "% of trials (baseline " + fmt("%.1f", 100.0 * baseline_both / trials) + "%); min output SNR " +
                fmt("%.1f", min_snr) + " dB; " + fmt("%.0f", seconds_since(start)) + " s"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[e.path().filename().string()] = ss.str();
    }
    return files;
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() / "isac_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "run.conf";
    std::ofstream(cfg) << "max_iters = 400\ntrials = 3\nthreads = 0\nseed = 8\n";
    const std::vector<std::vector<std::string>> commands{
        {"design", cfg.string()},
        {"evaluate", cfg.string()},
        {"sweep", cfg.string(), "--axis", "rho", "--values", "0.2,0.8"},
        {"design", cfg.string(), "--seed", "123"},
    };
    int compared = 0;
    bool same = true;
    std::ostringstream sink;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::map<std::string, std::string> runs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / ("c" + std::to_string(i) + "_" + std::to_string(rep));
            setenv(kOutputDirEnv, out.c_str(), 1);
            std::vector<const char*> argv{"isac_waveform"};
            for (const auto& a : commands[i]) argv.push_back(a.c_str());
            const int code = run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink);
            unsetenv(kOutputDirEnv);
            if (code == 1 || code == 3) return {false, "command failed: " + commands[i][0]};
            runs[rep] = snapshot(out);
        }
        same = same && !runs[0].empty() && runs[0] == runs[1];
        compared += static_cast<int>(runs[0].size());
    }
    fs::remove_all(root);
    return {same, std::to_string(compared) + " CSV artifacts from design/evaluate/sweep compared byte for byte"};
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const std::string& name, const Verdict& v) {
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << v.detail << std::endl;
        failures += v.pass ? 0 : 1;
    };

    report(1, "CAF FFT vs direct sum", caf_oracle());
    report(2, "majorizer eigenvalues vs dense solver", eigen_oracle());
    const RunAudit audit = audit_runs();
    report(3, "MM descent", {audit.worst_rise <= 1e-9,
                             std::to_string(audit.runs) + " runs (N_x = 128, plain and SQUAREM), " +
                                 std::to_string(audit.iterations) + " iterations, worst relative rise " +
                                 fmt("%.3g", audit.worst_rise) + ", " + fmt("%.1f", audit.seconds) + " s"});
    report(4, "constraint invariants", {audit.worst_modulus == 0.0 && audit.worst_power <= 1e-10,
                                        "max ||x_n| - 1| = " + fmt("%.3g", audit.worst_modulus) +
                                            ", max power deviation " + fmt("%.3g", audit.worst_power)});
    report(5, "sidelobe suppression", sidelobe_suppression());
    report(6, "rho ordering", rho_ordering());
    report(7, "CP sweep", cp_sweep());
    report(8, "SNR-loss sweep", snr_loss_sweep());
    report(9, "detection ordering", detection());
    report(10, "determinism", determinism());

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
