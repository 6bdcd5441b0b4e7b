#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/eval.hpp"

namespace isac {

/// Invalid configuration file. The message carries "source:line: ..." when a line applies.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every setting of a design/evaluate/sweep run, flat so it maps 1:1 onto key=value lines.
struct RunConfig {
    Index m = 8;
    Index n = 16;
    int psk_order = 4;

    double rho = 0.5;
    double mu_db = 1.0;
    double p_h = 0.0;
    Index n_cp = 0;
    int delay_min = -5;
    int delay_max = 5;
    int doppler_min = -3;
    int doppler_max = 3;
    double tol_x = 1e-6;
    double tol_h = 1e-6;
    int max_iters = 10000;
    bool squarem = true;
    double eig_tol = 1e-10;
    std::uint64_t seed = 1;

    double noise_power = 0.1;
    int channel_paths = 3;
    int channel_max_delay = 3;
    int channel_max_doppler = 2;
    AdrEstimator adr_estimator = AdrEstimator::gaussian;

    std::vector<Target> targets{{cd(1.0, 0.0), 1, -2}, {cd(1.0, 0.0), 3, -1}};
    double radar_noise_power = 1.0;
    CfarReference cfar_reference = CfarReference::noise;
    int cfar_training = 8;
    int cfar_guard = 2;
    double cfar_pfa = 1e-3;
    int detect_delay_min = -16;
    int detect_delay_max = 16;
    int detect_doppler_min = -16;
    int detect_doppler_max = 16;

    int trials = 10;
    int threads = 0;
    std::string output_dir = "out";

    OptimizerConfig optimizer_config() const;
    /// Throws ConfigError if the settings are inconsistent.
    EvalConfig eval_config() const;
};

/// Parses key=value lines; '#' starts a comment. Unknown or repeated keys are errors.
RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& config);

}  // namespace isac
