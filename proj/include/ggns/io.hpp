#pragma once

#include <iosfwd>
#include <string>

#include "ggns/engine.hpp"
#include "ggns/evidence.hpp"

namespace ggns {

/// weight,log_like,log_X,cluster,theta_1..theta_d with %.17g numbers; weight
/// is the shell width w.
void write_dead_points_csv(const NSResult& result, std::ostream& os);

/// One row per outer iteration.
void write_diagnostics_csv(const NSResult& result, std::ostream& os);

/// Run summary with the configuration echo, as pretty-printed JSON text.
std::string summary_json(const NSResult& result, const Problem& problem, const NSConfig& cfg);

/// Writes dead_points.csv, diagnostics.csv and summary.json into `dir`
/// (created if missing). Throws std::runtime_error on I/O failure.
void write_run_artifacts(const NSResult& result, const Problem& problem, const NSConfig& cfg,
                         const std::string& dir);

}  // namespace ggns
