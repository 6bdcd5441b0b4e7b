#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "isac/ambiguity.hpp"
#include "isac/eval.hpp"
#include "isac/optimizer.hpp"

namespace isac {

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// n,re,im,phase
std::string vector_csv(const CVector& v);
/// iter,objective,wisl,interference,peak_loss,rel_change_x,rel_change_h
std::string trace_csv(const std::vector<TraceRow>& trace);
/// l,k,re,im,amp_db (20 log10 relative to |f_00|)
std::string caf_csv(const CafGrid& grid);
/// trial,seed,rho,n_cp,mu_db,wisl_db,interference,adr,hits,false_alarms
std::string report_csv(const EvalReport& report, const OptimizerConfig& config);

struct SweepRow {
    std::string axis;
    double value = 0.0;
    TrialResult result;
};

/// axis,value,trial,seed,wisl_db,interference,adr,effective_adr
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace isac
