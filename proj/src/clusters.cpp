#include "ggns/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ggns/logmath.hpp"

namespace ggns {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::vector<std::size_t> component_sizes() {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < parent_.size(); ++i)
      if (find(i) == i) out.push_back(size_[i]);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<int> labels() {
    std::vector<int> label_of_root(parent_.size(), -1), out(parent_.size());
    int next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const auto r = find(i);
      if (label_of_root[r] < 0) label_of_root[r] = next++;
      out[i] = label_of_root[r];
    }
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

std::vector<int> find_clusters(std::span<const Point> points, int k_cap) {
  const std::size_t n = points.size();
  if (n < 2) return std::vector<int>(n, 0);
  const std::size_t d = points[0].size();

  std::vector<double> scale(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0, m2 = 0.0;
    for (const auto& p : points) mean += p[j];
    mean /= static_cast<double>(n);
    for (const auto& p : points) m2 += (p[j] - mean) * (p[j] - mean);
    const double sd = std::sqrt(m2 / static_cast<double>(n));
    if (sd > 0.0) scale[j] = 1.0 / sd;
  }

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double t = (points[a][j] - points[b][j]) * scale[j];
        s += t * t;
      }
      dist[a * n + b] = dist[b * n + a] = s;
    }

  const std::size_t k_max = std::max<std::size_t>(
      1, std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::max(k_cap, 1))));
  // neighbours[a][j]: j-th nearest other point of a (ties by index).
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t b = 0; b < n; ++b)
      if (b != a) order.push_back(b);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_max), order.end(),
                      [&](std::size_t u, std::size_t v) {
                        const double du = dist[a * n + u], dv = dist[a * n + v];
                        return du < dv || (du == dv && u < v);
                      });
    order.resize(k_max);
    neighbours[a] = std::move(order);
  }

  // The k-graph contains the (k-1)-graph, so edges are added incrementally.
  DisjointSets sets(n);
  std::size_t linked = 0;
  std::vector<std::size_t> prev_sizes;
  bool have_prev = false;
  const std::size_t k_last = std::max<std::size_t>(2, k_max);
  for (std::size_t k = 2; k <= k_last; ++k) {
    const std::size_t kk = std::min(k, k_max);
    for (; linked < kk; ++linked)
      for (std::size_t a = 0; a < n; ++a) sets.unite(a, neighbours[a][linked]);
    auto sizes = sets.component_sizes();
    if (have_prev && sizes == prev_sizes) break;
    prev_sizes = std::move(sizes);
    have_prev = true;
  }
  return sets.labels();
}

int count_clusters(std::span<const int> labels) {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

// --- moments --------------------------------------------------------------------

ClusterMoments::ClusterMoments(long n_live) : z_(kNegInf), z2_(kNegInf) {
  if (n_live < 1) throw std::invalid_argument("ClusterMoments: n_live must be >= 1");
  ids_.push_back(next_id_++);
  n_.push_back(n_live);
  x_.push_back(0.0);
  xx_.push_back({0.0});
  zp_.push_back(kNegInf);
  zp2_.push_back(kNegInf);
  zx_.push_back(kNegInf);
  zpxp_.push_back(kNegInf);
}

std::size_t ClusterMoments::index_of(int id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  return static_cast<std::size_t>(it - ids_.begin());
}

double ClusterMoments::log_x_total() const { return log_sum_exp(x_); }

double ClusterMoments::log_x2_total() const {
  double s = kNegInf;
  for (const auto& row : xx_) s = log_add_exp(s, log_sum_exp(row));
  return s;
}

double ClusterMoments::log_zx_total() const { return log_sum_exp(zx_); }

void ClusterMoments::kill(std::size_t p, double log_like) {
  if (p >= size()) throw std::out_of_range("ClusterMoments::kill: no such cluster");
  if (n_[p] < 1) throw std::logic_error("ClusterMoments::kill: cluster has no live points");
  if (!std::isfinite(log_like) && log_like != kNegInf)
    throw NumericalError("ClusterMoments::kill: non-finite log-likelihood");

  const double n = static_cast<double>(n_[p]);
  const double ln = std::log(n), ln1 = std::log(n + 1.0), ln2 = std::log(n + 2.0);
  const double log2 = std::log(2.0);
  const double L = log_like;

  const double xp = x_[p], x2p = xx_[p][p], zxp = zx_[p], zpxp = zpxp_[p];

  z_ = log_add_exp(z_, xp + L - ln1);
  zp_[p] = log_add_exp(zp_[p], xp + L - ln1);
  x_[p] = ln + xp - ln1;
  z2_ = log_add_exp(z2_, log_add_exp(log2 + zxp + L - ln1, log2 + x2p + 2.0 * L - ln1 - ln2));
  zp2_[p] = log_add_exp(zp2_[p], log_add_exp(log2 + zpxp + L - ln1, log2 + x2p + 2.0 * L - ln1 - ln2));
  zx_[p] = log_add_exp(ln + zxp - ln1, ln + x2p + L - ln1 - ln2);
  for (std::size_t q = 0; q < size(); ++q)
    if (q != p) zx_[q] = log_add_exp(zx_[q], xx_[p][q] + L - ln1);
  zpxp_[p] = log_add_exp(ln + zpxp - ln1, ln + x2p + L - ln1 - ln2);
  xx_[p][p] = ln + x2p - ln2;
  for (std::size_t q = 0; q < size(); ++q)
    if (q != p) xx_[p][q] = xx_[q][p] = ln + xx_[p][q] - ln1;

  --n_[p];
}

std::vector<int> ClusterMoments::split(std::size_t p, std::span<const long> sizes) {
  if (p >= size()) throw std::out_of_range("ClusterMoments::split: no such cluster");
  if (sizes.empty()) throw std::invalid_argument("ClusterMoments::split: no parts");
  long total = 0;
  for (long s : sizes) {
    if (s < 1) throw std::invalid_argument("ClusterMoments::split: empty part");
    total += s;
  }
  if (total != n_[p])
    throw std::invalid_argument("ClusterMoments::split: part sizes sum to " + std::to_string(total) +
                                ", cluster holds " + std::to_string(n_[p]));

  const double n = static_cast<double>(n_[p]);
  const std::size_t old = size();
  const std::size_t k = sizes.size();
  // positions: part 0 -> p, part i>0 -> old + i - 1
  std::vector<std::size_t> pos(k);
  pos[0] = p;
  for (std::size_t i = 1; i < k; ++i) pos[i] = old + i - 1;

  const double xp = x_[p], x2p = xx_[p][p], zxp = zx_[p], zp = zp_[p], zp2 = zp2_[p], zpxp = zpxp_[p];
  const std::vector<double> row_p = xx_[p];

  const std::size_t total_clusters = old + k - 1;
  ids_.resize(total_clusters);
  n_.resize(total_clusters);
  x_.resize(total_clusters);
  zp_.resize(total_clusters);
  zp2_.resize(total_clusters);
  zx_.resize(total_clusters);
  zpxp_.resize(total_clusters);
  xx_.resize(total_clusters);
  for (auto& row : xx_) row.resize(total_clusters, kNegInf);

  std::vector<int> new_ids(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double ni = static_cast<double>(sizes[i]);
    const double frac = std::log(ni / n);
    const double frac2 = std::log(ni * (ni + 1.0) / (n * (n + 1.0)));
    const std::size_t a = pos[i];
    new_ids[i] = next_id_++;
    ids_[a] = new_ids[i];
    n_[a] = sizes[i];
    x_[a] = frac + xp;
    zx_[a] = frac + zxp;
    zp_[a] = frac + zp;
    zpxp_[a] = frac2 + zpxp;
    zp2_[a] = frac2 + zp2;
    for (std::size_t j = 0; j < k; ++j) {
      const double nj = static_cast<double>(sizes[j]);
      const double f = i == j ? frac2 : std::log(ni * nj / (n * (n + 1.0)));
      xx_[a][pos[j]] = f + x2p;
    }
    for (std::size_t q = 0; q < old; ++q) {
      if (q == p) continue;
      xx_[a][q] = xx_[q][a] = frac + row_p[q];
    }
  }
  return new_ids;
}

void ClusterMoments::add_points(std::size_t p, long count) {
  if (p >= size() || count < 0) throw std::invalid_argument("ClusterMoments::add_points: bad arguments");
  n_[p] += count;
}

void ClusterMoments::remove(std::size_t p) {
  if (p >= size()) throw std::out_of_range("ClusterMoments::remove: no such cluster");
  if (n_[p] != 0) throw std::logic_error("ClusterMoments::remove: cluster still has points");
  retired_.emplace_back(ids_[p], zp_[p]);
  auto erase = [p](auto& v) { v.erase(v.begin() + static_cast<std::ptrdiff_t>(p)); };
  erase(ids_);
  erase(n_);
  erase(x_);
  erase(zp_);
  erase(zp2_);
  erase(zx_);
  erase(zpxp_);
  erase(xx_);
  for (auto& row : xx_) erase(row);
}

std::vector<std::size_t> spawn_allocation(const ClusterMoments& m, std::size_t n_spawn, Rng& rng) {
  std::vector<double> weights(m.size(), 0.0);
  double top = kNegInf;
  for (std::size_t p = 0; p < m.size(); ++p)
    if (m.count(p) > 0) top = std::max(top, m.log_x(p));
  if (top == kNegInf) throw std::logic_error("spawn_allocation: no cluster has live points");
  for (std::size_t p = 0; p < m.size(); ++p)
    if (m.count(p) > 0) weights[p] = std::exp(m.log_x(p) - top);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::size_t> out(n_spawn);
  for (auto& o : out) o = pick(rng);
  return out;
}

}  // namespace ggns
