#include "isac/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "isac/artifacts.hpp"
#include "isac/config.hpp"

namespace isac {

namespace {

enum Exit { kOk = 0, kInvalid = 1, kMaxIters = 2, kFailure = 3 };

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool dump_config = false;
    std::string axis;
    std::string values;
};

RunConfig load(const Options& opt) {
    RunConfig config = load_config(opt.config_path);
    if (opt.seed) config.seed = *opt.seed;
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) config.output_dir = dir;
    return config;
}

int cmd_design(const RunConfig& config, std::ostream& out) {
    const EvalConfig eval = config.eval_config();
    std::mt19937_64 rng(config.seed);
    const Problem problem = draw_problem(eval, rng);
    JointDesigner designer(problem.s, problem.channel, eval.optimizer);
    const DesignState state = designer.run();

    const CVector x_cp = add_cp(state.x, CpExtension{eval.optimizer.n_cp});
    const CafGrid grid = caf_grid(state.h, x_cp, eval.optimizer.region, designer.n_x());
    const std::filesystem::path dir = config.output_dir;
    write_atomic(dir / "sequence.csv", vector_csv(state.x));
    write_atomic(dir / "filter.csv", vector_csv(state.h));
    write_atomic(dir / "trace.csv", trace_csv(state.trace));
    write_atomic(dir / "caf.csv", caf_csv(grid));

    out << "iterations " << state.iter << (state.converged ? " (converged)" : " (max_iters reached)") << "\n"
        << "wisl_db " << 10.0 * std::log10(wisl(grid, eval.optimizer.region) / std::norm(grid.at(0, 0))) << "\n"
        << "peak_sidelobe_db " << peak_sidelobe_db(grid, eval.optimizer.region) << "\n"
        << "lpg_db " << lpg_db(state.h, x_cp) << "\n"
        << "interference " << interference_power(problem.channel, state.x, problem.s) << "\n";
    return state.converged ? kOk : kMaxIters;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
    const EvalConfig eval = config.eval_config();
    const EvalReport report = monte_carlo(eval, config.trials, config.seed);
    write_atomic(std::filesystem::path(config.output_dir) / "report.csv", report_csv(report, eval.optimizer));
    out << "trials " << report.trials.size() << " converged " << report.converged_count << "\n"
        << "mean_wisl_db " << report.mean_wisl_db << "\n"
        << "mean_interference " << report.mean_interference << "\n"
        << "mean_adr " << report.mean_adr << "\n"
        << "hits " << report.total_hits << " false_alarms " << report.total_false_alarms << "\n"
        << "baseline_hits " << report.total_baseline_hits << " baseline_false_alarms "
        << report.total_baseline_false_alarms << "\n";
    return kOk;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw ConfigError("--values: empty entry in '" + text + "'");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ConfigError("--values: not a number: '" + item + "'");
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError("--values: at least one value is required");
    return values;
}

int cmd_sweep(const RunConfig& base, const Options& opt, std::ostream& out) {
    const std::vector<double> values = parse_values(opt.values);
    std::vector<RunConfig> points;
    for (double v : values) {
        RunConfig c = base;
        if (opt.axis == "rho") {
            c.rho = v;
        } else if (opt.axis == "mu_db") {
            c.mu_db = v;
        } else {
            if (v < 0.0 || v != std::floor(v)) throw ConfigError("--values: n_cp entries must be nonnegative integers");
            c.n_cp = static_cast<Index>(v);
        }
        points.push_back(c);
    }
    std::vector<EvalConfig> evals;
    for (const auto& c : points) evals.push_back(c.eval_config());

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < evals.size(); ++i) {
        const EvalReport report = monte_carlo(evals[i], base.trials, base.seed);
        for (const auto& t : report.trials) rows.push_back({opt.axis, values[i], t});
        out << opt.axis << "=" << values[i] << " mean_wisl_db " << report.mean_wisl_db << " mean_adr "
            << report.mean_adr << " mean_effective_adr " << report.mean_effective_adr << "\n";
    }
    write_atomic(std::filesystem::path(base.output_dir) / "sweep.csv", sweep_csv(rows));
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint OTFS sequence and mismatched filter design"};
    app.require_subcommand(1);
    Options opt;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config_path, "key=value configuration file")->required();
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_flag("--dump-config", opt.dump_config, "print the effective configuration");
    };
    CLI::App* design = app.add_subcommand("design", "design one sequence/filter pair");
    CLI::App* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation");
    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
    common(design);
    common(evaluate);
    common(sweep);
    sweep->add_option("--axis", opt.axis, "rho, n_cp or mu_db")
        ->required()
        ->check(CLI::IsMember({"rho", "n_cp", "mu_db"}));
    sweep->add_option("--values", opt.values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        const RunConfig config = load(opt);
        if (opt.dump_config) out << serialize_config(config);
        if (design->parsed()) return cmd_design(config, out);
        if (evaluate->parsed()) return cmd_evaluate(config, out);
        return cmd_sweep(config, opt, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return kFailure;
    }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace isac
