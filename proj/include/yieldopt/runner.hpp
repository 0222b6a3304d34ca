#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "yieldopt/config.hpp"

namespace yieldopt {

/// "offline + online = total", the blackbox accounting used in result tables.
std::string total_evaluations(std::size_t offline, std::size_t online);

/// One result-table row of an optimization run.
struct SummaryRow {
    std::string parameter_name;  ///< "C_max", "w" or empty
    double parameter = 0.0;
    double yield = 0.0;
    double cost = 0.0;
    std::size_t n_fev = 0;
    std::size_t offline = 0;
    std::size_t online = 0;
};

/// Text table: header line plus one line per row.
std::string format_table(const std::vector<SummaryRow>& rows);

// Each run writes into cfg.out: config.snapshot, summary.json and the
// method's CSV files. The returned text is a human-readable summary.

/// method mc or hybrid: summary.json, trace.csv (hybrid).
std::string run_estimate(const RunConfig& cfg);

/// method eps, ws, ws-multistart or nsga2: summary.json, history.csv or
/// generations/gen_NNN.csv, and front.csv.
std::string run_optimize(const RunConfig& cfg);

/// Repeats run_optimize over sweep.values (C_max for eps, w for ws and
/// ws-multistart), one subdirectory per value, plus table.csv and summary.json.
std::string run_sweep(const RunConfig& cfg);

}  // namespace yieldopt
