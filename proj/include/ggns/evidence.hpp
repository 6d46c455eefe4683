#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ggns/hss.hpp"
#include "ggns/problems.hpp"
#include "ggns/random.hpp"

namespace ggns {

struct DeadPoint {
  Point theta;
  double log_like = 0.0;
  double log_x = 0.0;  // prior volume left after this point died
  double log_w = 0.0;  // shell width X_{i-1} - X_i
  int cluster = 0;
};

/// Per-iteration record of the outer loop.
struct IterationDiagnostics {
  std::int64_t iteration = 0;
  int n_clusters = 0;
  double dt = 0.0;
  double out_frac = 0.0;
  double log_delta_xl = 0.0;  // log of X L_max / (X L)_max
  std::uint64_t n_like_calls = 0;
  double log_x = 0.0;
  double barrier = 0.0;
  double max_log_like = 0.0;
};

struct NSResult {
  std::size_t dim = 0;
  long n_live = 0;
  std::vector<DeadPoint> dead;  // in kill order, final live points last
  double log_z = 0.0;           // moment accumulator E[Z]
  double log_z2 = 0.0;          // moment accumulator E[Z^2]
  double log_z_err_moments = 0.0;
  double log_z_err_kl = 0.0;
  double d_kl = 0.0;
  std::uint64_t n_like_calls = 0;
  std::int64_t iterations = 0;
  std::vector<std::pair<int, double>> cluster_log_z;  // (cluster id, log Z_p)
  std::vector<IterationDiagnostics> trace;
  StepCounters hss_totals;
  std::string stop_reason;
  double final_dt = 0.0;
  double wall_seconds = 0.0;
};

/// Bookkeeping of one kill: the killed point's volume before the kill and the
/// number of points sharing that volume.
struct KillRecord {
  double log_x_before = 0.0;
  long n = 0;
};

/// Sets log X_i = log X_before + log(n/(n+1)) and log w_i = log X_before - log(n+1)
/// on every dead point.
void assign_dead_volumes(std::span<DeadPoint> dead, std::span<const KillRecord> kills);

struct LogEvidence {
  double log_z = 0.0;
  double sigma_moments = 0.0;  // sqrt(E[Z^2] - E[Z]^2) / E[Z]
  double sigma_kl = 0.0;       // sqrt(D_KL / n_live)
};

LogEvidence log_evidence(const NSResult& result);

/// Normalized posterior weights L_i w_i / Z (sum to one).
std::vector<double> posterior_weights(const NSResult& result);

/// sum_i p_i (log L_i - log Z).
double kl_divergence(const NSResult& result);

/// Recomputes d_kl and both error bars from the archive and accumulators.
void finalize_evidence(NSResult& result);

/// Kish effective sample size of the posterior weights.
double effective_sample_size(const NSResult& result);

/// Weighted posterior mean of each coordinate.
Point posterior_mean(const NSResult& result);

/// Multinomial draw of `count` positions with the posterior weights.
std::vector<Point> resample_equal(const NSResult& result, std::size_t count, Rng& rng);

/// Number of centres with at least one sample within Euclidean distance `radius`.
int mode_coverage(std::span<const Point> samples, std::span<const Point> centers, double radius);

}  // namespace ggns
