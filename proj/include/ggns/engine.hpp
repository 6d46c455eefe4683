#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "ggns/evidence.hpp"
#include "ggns/hss.hpp"
#include "ggns/problems.hpp"

namespace ggns {

enum class TerminationMode {
  PeakRelative,         // stop when X L / (X L)_max < tol
  LegacyRemainingMass,  // stop when L_max X < tol
};

/// Likelihood paired with X in the stop test.
enum class TerminationLike {
  Barrier,  // the most recently killed point
  LiveMax,  // the best live point
};

struct NSConfig {
  long n_live = 200;
  double tol = 0.01;
  int min_ref = 1;
  int max_ref = 3;
  double delta_p = 0.05;
  double dt_ini = 0.1;
  double kill_fraction = 0.5;
  int prune_patience = 20;
  bool clustering_enabled = true;
  bool adaptive_dt = true;
  TerminationMode termination_mode = TerminationMode::PeakRelative;
  TerminationLike termination_like = TerminationLike::Barrier;
  std::optional<int> fixed_steps;  // fixed-length trajectories, keep the last point
  std::uint64_t seed = 0;
  int max_restarts = 100;
  int cluster_k_cap = 40;
  std::int64_t max_iterations = 1'000'000;
  unsigned workers = 1;
  BatchMode batch_mode = BatchMode::Pooled;
  MomentumNoise momentum_noise = MomentumNoise::Isotropic;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Sets one field from its text form; keys match the field names
/// ("clustering" and "termination" are accepted as short forms).
void set_config_value(NSConfig& cfg, const std::string& key, const std::string& value);

/// Every field as key -> text, in the form set_config_value accepts.
std::map<std::string, std::string> config_to_map(const NSConfig& cfg);

std::string to_string(TerminationMode mode);
std::string to_string(BatchMode mode);
std::string to_string(TerminationLike like);
std::string to_string(MomentumNoise noise);

/// Stop test on log-space quantities; log_xl_max is the running maximum of
/// log X + log_like.
bool termination_check(TerminationMode mode, double tol, double log_x, double log_like,
                       double log_xl_max);

using IterationObserver = std::function<void(const IterationDiagnostics&)>;

/// Full nested sampling run. Deterministic in (problem, cfg minus workers).
/// Throws NumericalError on a non-finite live likelihood or when the slice
/// sampler gives up on a particle.
NSResult run(const Problem& problem, const NSConfig& cfg, const IterationObserver& observer = {});

}  // namespace ggns
