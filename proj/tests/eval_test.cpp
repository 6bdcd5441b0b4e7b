#include <gtest/gtest.h>

#include <set>

#include "dense_oracle.hpp"
#include "isac/eval.hpp"

using namespace isac;

namespace {

EvalConfig small_config() {
    EvalConfig c;
    c.m = 4;
    c.n = 8;
    c.optimizer.max_iters = 40;
    c.optimizer.region = DelayDopplerRegion(-3, 3, -2, 2);
    c.detect_region = DelayDopplerRegion(-8, 8, -8, 8);
    c.cfar = CfarConfig{4, 1, 1e-3};
    return c;
}

}  // namespace

TEST(SimulateEcho, Examples) {
    std::mt19937_64 rng(1);
    const CVector x = oracle::random_unimodular(20, rng);
    EXPECT_EQ(simulate_echo(x, {}, 0.0, 16, rng), CVector(CVector::Zero(20)));
    EXPECT_LT((simulate_echo(x, {{{1.0, 0, 0}}}, 0.0, 16, rng) - x).norm(), 1e-15);

    const Target a{cd(0.5, 1.0), 2, -1}, b{cd(-0.3, 0.2), -4, 3};
    const CVector both = simulate_echo(x, {{a, b}}, 0.0, 16, rng);
    const CVector sum = simulate_echo(x, {{a}}, 0.0, 16, rng) + simulate_echo(x, {{b}}, 0.0, 16, rng);
    EXPECT_LT((both - sum).norm(), 1e-14);

    const CVector dense = a.amplitude * oracle::shift_matrix(20, 2) * oracle::doppler_matrix(20, 16, -1) * x;
    EXPECT_LT((simulate_echo(x, {{a}}, 0.0, 16, rng) - dense).norm(), 1e-14);

    EXPECT_THROW(simulate_echo(x, {{{1.0, 20, 0}}}, 0.0, 16, rng), std::invalid_argument);
    EXPECT_THROW(simulate_echo(x, {}, -1.0, 16, rng), std::invalid_argument);
}

TEST(SimulateEcho, LinearInAmplitudes) {
    std::mt19937_64 rng(2);
    const CVector x = oracle::random_unimodular(32, rng);
    const Target t{cd(1.0, 0.0), 3, 2};
    const cd c(2.0, -0.5);
    const CVector base = simulate_echo(x, {{t}}, 0.0, 32, rng);
    const CVector scaled = simulate_echo(x, {{{c * t.amplitude, t.delay, t.doppler}}}, 0.0, 32, rng);
    EXPECT_LT((scaled - c * base).norm(), 1e-13);
}

TEST(SimulateEcho, NoiseVariance) {
    std::mt19937_64 rng(3);
    const CVector z = simulate_echo(CVector::Zero(200000), {}, 0.5, 16, rng);
    EXPECT_NEAR(z.squaredNorm() / z.size(), 0.5, 0.01);
    EXPECT_NEAR(z.real().squaredNorm() / z.size(), 0.25, 0.01);
}

TEST(RangeDopplerMap, PeaksAtTarget) {
    std::mt19937_64 rng(4);
    const CVector x = oracle::random_unimodular(128, rng);
    const DelayDopplerRegion region(-6, 6, -4, 4);
    const CVector echo = simulate_echo(x, {{{cd(0.0, 1.0), 2, -3}}}, 0.0, 128, rng);
    const RMatrix map = range_doppler_map(x, echo, region, 128);
    Index r = 0, c = 0;
    map.maxCoeff(&r, &c);
    EXPECT_EQ(region.l_min() + r, 2);
    EXPECT_EQ(region.k_min() + c, -3);
    EXPECT_NEAR(map(r, c), std::pow(126.0 / 128.0, 2), 1e-10);
}

TEST(Cfar, AlphaAndTrainingCount) {
    const CfarConfig cfg{8, 2, 1e-3};
    EXPECT_EQ(cfg.training_count(), 21 * 21 - 25);
    const double n_t = 416.0;
    EXPECT_NEAR(cfg.alpha(), n_t * (std::pow(1e-3, -1.0 / n_t) - 1.0), 1e-12);
    EXPECT_THROW((CfarConfig{0, 2, 1e-3}.validate()), std::invalid_argument);
    EXPECT_THROW((CfarConfig{1, -1, 1e-3}.validate()), std::invalid_argument);
    EXPECT_THROW((CfarConfig{1, 0, 1.0}.validate()), std::invalid_argument);
}

TEST(Cfar, FlatGridHasNoDetections) {
    EXPECT_TRUE(ca_cfar(RMatrix::Constant(15, 15, 3.0), CfarConfig{3, 1, 1e-2}).empty());
}

TEST(Cfar, SingleStrongCell) {
    RMatrix grid = RMatrix::Ones(12, 12);
    grid(0, 11) = 100.0;  // corner cell exercises wrap-around
    const CfarConfig cfg{2, 1, 0.1};
    ASSERT_LT(cfg.alpha(), 3.0);
    const auto d = ca_cfar(grid, cfg);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0], (Detection{0, 11}));
}

TEST(Cfar, ThresholdToZeroDetectsEverything) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    RMatrix grid(9, 9);
    for (Index i = 0; i < grid.size(); ++i) grid(i) = u(rng);
    const CfarConfig cfg{1, 0, 1.0 - 1e-15};
    EXPECT_LT(cfg.alpha(), 1e-12);
    EXPECT_EQ(ca_cfar(grid, cfg).size(), 81u);
}

TEST(Cfar, ScaleInvarianceAndReference) {
    std::mt19937_64 rng(6);
    std::exponential_distribution<double> e(1.0);
    RMatrix grid(25, 25);
    for (Index i = 0; i < grid.size(); ++i) grid(i) = e(rng);
    grid(4, 7) = 40.0;
    const CfarConfig cfg{4, 1, 1e-2};
    const auto base = ca_cfar(grid, cfg);
    EXPECT_FALSE(base.empty());
    for (double c : {1e-6, 3.0, 1e9}) EXPECT_EQ(ca_cfar(RMatrix(c * grid), cfg), base);
    EXPECT_EQ(ca_cfar(grid, grid, cfg), base);
    EXPECT_TRUE(ca_cfar(grid, RMatrix(1e6 * grid), cfg).empty());
    EXPECT_THROW(ca_cfar(grid, RMatrix::Ones(24, 25), cfg), std::invalid_argument);
    EXPECT_THROW(ca_cfar(RMatrix::Ones(10, 25), cfg), std::invalid_argument);
}

TEST(Adr, Examples) {
    std::mt19937_64 rng(7);
    const CVector s = oracle::random_vector(16, rng);
    const CMatrix eye = CMatrix::Identity(16, 16);
    EXPECT_NEAR(adr(eye, s, s, 1.0, 4), 1.0, 1e-15);
    EXPECT_EQ(adr(eye, s, s, 0.0, 4), 2.0);
    EXPECT_EQ(adr(eye, s, s, 1e-300, 8), 3.0);
    EXPECT_THROW(adr(eye, s, s, -0.1, 4), std::invalid_argument);

    const CMatrix h = oracle::random_matrix(16, rng);
    const CVector x = oracle::random_unimodular(16, rng);
    const double p_i = interference_power(h, x, s);
    EXPECT_NEAR(adr(h, x, s, 0.3, 4), std::log2(1.0 + 1.0 / (p_i / 16.0 + 0.3)), 1e-14);
}

TEST(Adr, DecreasesWithInterferenceAndNoise) {
    std::mt19937_64 rng(8);
    const CVector s = oracle::random_vector(16, rng);
    const CMatrix eye = CMatrix::Identity(16, 16);
    double prev = adr(eye, s, s, 0.5, 4);
    for (double bump : {0.1, 0.5, 1.0, 3.0}) {
        CVector x = s;
        x[0] += bump;
        const double cur = adr(eye, x, s, 0.5, 4);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
    EXPECT_LT(adr(eye, s, s, 0.9, 4), adr(eye, s, s, 0.8, 4));
}

TEST(AdrHistogram, CleanAndNoisyLimits) {
    std::mt19937_64 rng(9);
    const PskConstellation psk(4);
    std::vector<unsigned> labels;
    const CVector s = modulate(random_frame(8, 16, psk, rng, &labels));
    const CMatrix eye = CMatrix::Identity(128, 128);
    const double clean = adr_histogram(eye, s, labels, psk, 8, 16, 0.0, rng);
    EXPECT_GT(clean, 1.9);
    EXPECT_LE(clean, 2.0);
    const double noisy = adr_histogram(eye, s, labels, psk, 8, 16, 100.0, rng);
    EXPECT_LT(noisy, 0.2);
    EXPECT_THROW(adr_histogram(eye, s, labels, psk, 8, 16, -1.0, rng), std::invalid_argument);
}

TEST(DeriveSeed, DeterministicAndDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
    EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(EvalConfig, Validation) {
    EvalConfig c = small_config();
    EXPECT_NO_THROW(c.validate());
    c.scene.targets.push_back({1.0, 9, 0});
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.cfar = CfarConfig{8, 2, 1e-3};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.channel_max_delay = 32;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.psk_order = 6;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(MonteCarlo, SingleTrialReproducesRunTrial) {
    const EvalConfig c = small_config();
    const EvalReport report = monte_carlo(c, 1, 99);
    const TrialResult t = run_trial(c, 0, derive_seed(99, 0));
    ASSERT_EQ(report.trials.size(), 1u);
    EXPECT_EQ(report.trials[0].wisl, t.wisl);
    EXPECT_EQ(report.trials[0].adr, t.adr);
    EXPECT_EQ(report.trials[0].false_alarms, t.false_alarms);
    EXPECT_EQ(report.mean_wisl_db, t.wisl_db);
}

TEST(MonteCarlo, IdenticalAcrossRunsAndThreadCounts) {
    EvalConfig c = small_config();
    c.threads = 1;
    const EvalReport a = monte_carlo(c, 6, 5);
    c.threads = 3;
    const EvalReport b = monte_carlo(c, 6, 5);
    ASSERT_EQ(a.trials.size(), b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        EXPECT_EQ(a.trials[i].seed, b.trials[i].seed);
        EXPECT_EQ(a.trials[i].wisl, b.trials[i].wisl);
        EXPECT_EQ(a.trials[i].interference, b.trials[i].interference);
        EXPECT_EQ(a.trials[i].hits, b.trials[i].hits);
        EXPECT_EQ(a.trials[i].baseline_false_alarms, b.trials[i].baseline_false_alarms);
    }
    EXPECT_EQ(a.mean_adr, b.mean_adr);
    EXPECT_EQ(a.total_false_alarms, b.total_false_alarms);
    EXPECT_THROW(monte_carlo(c, 0, 5), std::invalid_argument);
}

TEST(MonteCarlo, EffectiveAdrCarriesCpPenalty) {
    EvalConfig c = small_config();
    c.optimizer.n_cp = 8;
    const TrialResult t = run_trial(c, 0, 3);
    EXPECT_NEAR(t.effective_adr, t.adr * 32.0 / 40.0, 1e-15);
}

TEST(MonteCarlo, SensingWeightOrdersWisl) {
    EvalConfig c;
    c.optimizer.squarem = true;
    c.threads = 1;
    c.optimizer.rho = 0.001;
    const EvalReport comm = monte_carlo(c, 10, 2024);
    c.optimizer.rho = 1.0;
    const EvalReport sense = monte_carlo(c, 10, 2024);
    EXPECT_LT(sense.mean_wisl_db, comm.mean_wisl_db);
    EXPECT_LT(sense.mean_wisl, comm.mean_wisl);
}
