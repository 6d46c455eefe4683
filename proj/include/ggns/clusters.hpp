#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ggns/problems.hpp"
#include "ggns/random.hpp"

namespace ggns {

/// Partition of points into mode-separated groups.
///
/// For k = 2, 3, ... the symmetric k-nearest-neighbour graph (an edge when
/// either point is among the other's k nearest, Euclidean after scaling every
/// coordinate by its standard deviation over the input) is split into
/// connected components. The scan stops at the first k whose multiset of
/// component sizes repeats the previous k's, and that partition is returned.
/// k never exceeds min(n - 1, k_cap).
///
/// Labels are 0..C-1, numbered by first appearance in the input.
std::vector<int> find_clusters(std::span<const Point> points, int k_cap = 40);

/// Number of distinct labels in a find_clusters result.
int count_clusters(std::span<const int> labels);

/// Evidence and prior-volume moments per cluster, kept in log space.
///
/// For clusters p, q the tracked expectations are
///   Z, Z^2                         (global evidence)
///   Z_p, Z_p^2, Z_p X_p            (evidence found inside cluster p)
///   X_p, X_p X_q (diagonal X_p^2)  (remaining volume of cluster p)
///   Z X_p
/// All are non-negative; an exact zero is stored as -inf.
class ClusterMoments {
 public:
  /// One cluster with n_live points, X = X^2 = 1 and every Z term zero.
  explicit ClusterMoments(long n_live);

  std::size_t size() const { return ids_.size(); }
  int id(std::size_t p) const { return ids_[p]; }
  /// Position of the cluster with this id, or size() when it is gone.
  std::size_t index_of(int id) const;
  long count(std::size_t p) const { return n_[p]; }

  double log_z() const { return z_; }
  double log_z2() const { return z2_; }
  double log_x(std::size_t p) const { return x_[p]; }
  double log_xx(std::size_t p, std::size_t q) const { return xx_[p][q]; }
  double log_x2(std::size_t p) const { return xx_[p][p]; }
  double log_zp(std::size_t p) const { return zp_[p]; }
  double log_zp2(std::size_t p) const { return zp2_[p]; }
  double log_zx(std::size_t p) const { return zx_[p]; }
  double log_zpxp(std::size_t p) const { return zpxp_[p]; }

  /// log of sum_p X_p over the live clusters.
  double log_x_total() const;
  /// log of E[(sum_p X_p)^2].
  double log_x2_total() const;
  /// log of E[Z * sum_p X_p].
  double log_zx_total() const;

  /// Evidence of clusters already removed, as (id, log Z_p).
  const std::vector<std::pair<int, double>>& retired() const { return retired_; }

  /// Removes one point with log-likelihood `log_like` from cluster p and
  /// applies the full update set using pre-update values on every right-hand
  /// side; afterwards n_p decreases by one.
  void kill(std::size_t p, double log_like);

  /// Replaces cluster p by sub-clusters with the given sizes (sum must equal
  /// n_p, each >= 1). Returns the ids of the new clusters in order; the first
  /// keeps position p, the rest are appended.
  std::vector<int> split(std::size_t p, std::span<const long> sizes);

  void add_points(std::size_t p, long count);

  /// Drops an empty cluster; its Z_p moves to retired().
  void remove(std::size_t p);

 private:
  int next_id_ = 0;
  std::vector<int> ids_;
  std::vector<long> n_;
  double z_;
  double z2_;
  std::vector<double> x_;
  std::vector<std::vector<double>> xx_;
  std::vector<double> zp_;
  std::vector<double> zp2_;
  std::vector<double> zx_;
  std::vector<double> zpxp_;
  std::vector<std::pair<int, double>> retired_;
};

/// n_spawn cluster positions drawn i.i.d. with probability proportional to
/// X_p, over clusters that still hold at least one point.
std::vector<std::size_t> spawn_allocation(const ClusterMoments& moments, std::size_t n_spawn, Rng& rng);

}  // namespace ggns
