#include "isac/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace isac {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string vector_csv(const CVector& v) {
    std::string out = "n,re,im,phase\n";
    for (Index i = 0; i < v.size(); ++i)
        out += std::to_string(i) + "," + num(v[i].real()) + "," + num(v[i].imag()) + "," + num(std::arg(v[i])) + "\n";
    return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::string out = "iter,objective,wisl,interference,peak_loss,rel_change_x,rel_change_h\n";
    for (const auto& r : trace)
        out += std::to_string(r.iter) + "," + num(r.terms.objective) + "," + num(r.terms.wisl) + "," +
               num(r.terms.interference) + "," + num(r.terms.peak_loss) + "," + num(r.rel_change_x) + "," +
               num(r.rel_change_h) + "\n";
    return out;
}

std::string caf_csv(const CafGrid& grid) {
    const double ref = std::abs(grid.at(0, 0));
    std::string out = "l,k,re,im,amp_db\n";
    for (Index r = 0; r < grid.values.rows(); ++r) {
        for (Index c = 0; c < grid.values.cols(); ++c) {
            const cd v = grid.values(r, c);
            out += std::to_string(grid.l_min + r) + "," + std::to_string(grid.k_min + c) + "," + num(v.real()) + "," +
                   num(v.imag()) + "," + num(20.0 * std::log10(std::abs(v) / ref)) + "\n";
        }
    }
    return out;
}

std::string report_csv(const EvalReport& report, const OptimizerConfig& config) {
    std::string out = "trial,seed,rho,n_cp,mu_db,wisl_db,interference,adr,hits,false_alarms\n";
    for (const auto& t : report.trials)
        out += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," + num(config.rho) + "," +
               std::to_string(config.n_cp) + "," + num(config.mu_db) + "," + num(t.wisl_db) + "," +
               num(t.interference) + "," + num(t.adr) + "," + std::to_string(t.hits) + "," +
               std::to_string(t.false_alarms) + "\n";
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "axis,value,trial,seed,wisl_db,interference,adr,effective_adr\n";
    for (const auto& r : rows)
        out += r.axis + "," + num(r.value) + "," + std::to_string(r.result.trial) + "," +
               std::to_string(r.result.seed) + "," + num(r.result.wisl_db) + "," + num(r.result.interference) + "," +
               num(r.result.adr) + "," + num(r.result.effective_adr) + "\n";
    return out;
}

}  // namespace isac
