#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "ggns/clusters.hpp"
#include "ggns/logmath.hpp"

using namespace ggns;

namespace {

// Straightforward reimplementation of the stabilized k-NN component scan:
// full sorts, explicit adjacency, depth-first components.
std::vector<int> brute_force_clusters(const std::vector<Point>& pts, int k_cap) {
  const std::size_t n = pts.size(), d = pts[0].size();
  std::vector<double> sd(d);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0, v = 0;
    for (const auto& p : pts) m += p[j];
    m /= n;
    for (const auto& p : pts) v += (p[j] - m) * (p[j] - m);
    sd[j] = v > 0 ? std::sqrt(v / n) : 1.0;
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += std::pow((pts[a][j] - pts[b][j]) / sd[j], 2);
    return s;
  };
  const std::size_t k_max = std::min<std::size_t>(n - 1, k_cap);
  std::vector<int> labels, prev_labels;
  std::vector<std::size_t> prev_sizes;
  for (std::size_t k = 2; k <= std::max<std::size_t>(2, k_max); ++k) {
    const std::size_t kk = std::min(k, k_max);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<std::size_t> others;
      for (std::size_t b = 0; b < n; ++b)
        if (b != a) others.push_back(b);
      std::stable_sort(others.begin(), others.end(), [&](auto u, auto v) { return dist(a, u) < dist(a, v); });
      for (std::size_t j = 0; j < kk; ++j) adj[a][others[j]] = adj[others[j]][a] = true;
    }
    labels.assign(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (labels[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      labels[s] = next;
      while (!stack.empty()) {
        const auto a = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < n; ++b)
          if (adj[a][b] && labels[b] < 0) {
            labels[b] = next;
            stack.push_back(b);
          }
      }
      ++next;
    }
    std::vector<std::size_t> sizes(next, 0);
    for (int l : labels) ++sizes[l];
    std::sort(sizes.begin(), sizes.end());
    if (k > 2 && sizes == prev_sizes) return prev_labels;
    prev_sizes = sizes;
    prev_labels = labels;
  }
  return labels;
}

std::vector<Point> blobs(const std::vector<std::pair<double, double>>& centres, int per, double sigma, Rng& rng) {
  std::normal_distribution<double> n01;
  std::vector<Point> out;
  for (const auto& [cx, cy] : centres)
    for (int i = 0; i < per; ++i) out.push_back({cx + sigma * n01(rng), cy + sigma * n01(rng)});
  return out;
}

std::map<int, int> sizes_of(const std::vector<int>& labels) {
  std::map<int, int> s;
  for (int l : labels) ++s[l];
  return s;
}

bool close_log(double a, double b, double rel = 1e-12) {
  if (a == kNegInf || b == kNegInf) return a == b;
  return std::abs(std::exp(a - b) - 1.0) <= rel;
}

}  // namespace

TEST_CASE("two separated blobs give two clusters of fifty") {
  Rng rng(1);
  const auto pts = blobs({{-5, 0}, {5, 0}}, 50, 0.3, rng);
  const auto labels = find_clusters(pts);
  CHECK(count_clusters(labels) == 2);
  const auto s = sizes_of(labels);
  CHECK(s.at(0) == 50);
  CHECK(s.at(1) == 50);
  CHECK(labels == brute_force_clusters(pts, 40));
}

TEST_CASE("clustering agrees with the brute-force scan") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = blobs({{0, 0}, {3, 1}, {-2, 4}}, 15 + trial, 0.4 + 0.1 * trial, rng);
    CHECK(find_clusters(pts) == brute_force_clusters(pts, 40));
    CHECK(find_clusters(pts, 5) == brute_force_clusters(pts, 5));
  }
  const auto nine = blobs({{-5, -5}, {-5, 0}, {-5, 5}, {0, -5}, {0, 0}, {0, 5}, {5, -5}, {5, 0}, {5, 5}}, 20, 0.3, rng);
  const auto labels = find_clusters(nine);
  CHECK(count_clusters(labels) == 9);
  CHECK(labels == brute_force_clusters(nine, 40));
}

TEST_CASE("single groups and tiny inputs") {
  Rng rng(3);
  const auto one = blobs({{0, 0}}, 100, 1.0, rng);
  const auto labels = find_clusters(one);
  CHECK(count_clusters(labels) == 1);
  CHECK(std::all_of(labels.begin(), labels.end(), [](int l) { return l == 0; }));
  CHECK(find_clusters(std::vector<Point>{{0, 0}, {10, 10}}) == std::vector<int>{0, 0});
  CHECK(find_clusters(std::vector<Point>{{1, 2}}) == std::vector<int>{0});
}

TEST_CASE("cluster sizes do not depend on input order") {
  Rng rng(4);
  auto pts = blobs({{-4, 0}, {4, 0}, {0, 6}}, 30, 0.5, rng);
  const auto a = sizes_of(find_clusters(pts));
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = sizes_of(find_clusters(pts));
  std::vector<int> sa, sb;
  for (auto [k, v] : a) sa.push_back(v);
  for (auto [k, v] : b) sb.push_back(v);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  CHECK(sa == sb);
}

TEST_CASE("fresh moments") {
  ClusterMoments m(200);
  CHECK(m.size() == 1);
  CHECK(m.log_x(0) == 0.0);
  CHECK(m.log_x2(0) == 0.0);
  CHECK(m.log_z() == kNegInf);
  CHECK(m.log_z2() == kNegInf);
  CHECK(m.log_x_total() == 0.0);
}

TEST_CASE("single kill and the impossible likelihood") {
  ClusterMoments m(200);
  m.kill(0, 0.0);
  CHECK(std::exp(m.log_z()) == doctest::Approx(1.0 / 201).epsilon(1e-14));
  CHECK(std::exp(m.log_x(0)) == doctest::Approx(200.0 / 201).epsilon(1e-14));
  CHECK(m.count(0) == 199);

  ClusterMoments z(10);
  z.kill(0, 1.0);
  const double before = z.log_z();
  const double x_before = z.log_x(0);
  z.kill(0, kNegInf);
  CHECK(z.log_z() == before);
  CHECK(z.log_x(0) == doctest::Approx(x_before + std::log(9.0 / 10)).epsilon(1e-14));
}

TEST_CASE("evidence moment matches the simple running sum over a thousand kills") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-30.0, 5.0);
  const long n = 50;
  ClusterMoments m(n);
  double z_simple = 0.0, x = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const double ll = u(rng);
    z_simple += x * std::exp(ll) / (n + 1);
    x *= static_cast<double>(n) / (n + 1);
    m.kill(0, ll);
    m.add_points(0, 1);
    CHECK(close_log(m.log_x(0), std::log(x), 1e-12));
  }
  CHECK(close_log(m.log_z(), std::log(z_simple), 1e-12));
}

TEST_CASE("split examples") {
  ClusterMoments a(200);
  a.split(0, std::vector<long>{100, 100});
  CHECK(std::exp(a.log_x(0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::exp(a.log_x(1)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a.log_x_total() == doctest::Approx(0.0).epsilon(1e-14));

  ClusterMoments b(200);
  b.kill(0, 0.3);
  const auto before = std::vector<double>{b.log_z(), b.log_z2(), b.log_x(0), b.log_x2(0), b.log_zx(0),
                                          b.log_zp(0), b.log_zp2(0), b.log_zpxp(0)};
  b.split(0, std::vector<long>{199});
  const auto after = std::vector<double>{b.log_z(), b.log_z2(), b.log_x(0), b.log_x2(0), b.log_zx(0),
                                         b.log_zp(0), b.log_zp2(0), b.log_zpxp(0)};
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(close_log(after[i], before[i], 1e-14));

  ClusterMoments c(200);
  c.split(0, std::vector<long>{150, 50});
  CHECK(std::exp(c.log_xx(0, 1)) == doctest::Approx(150.0 * 50 / (200.0 * 201)).epsilon(1e-14));
  CHECK_THROWS_AS(c.split(0, std::vector<long>{100, 49}), std::invalid_argument);
}

TEST_CASE("random kill and split sequences conserve volume and keep variances non-negative") {
  Rng rng(6);
  std::uniform_real_distribution<double> u01;
  for (int trial = 0; trial < 20; ++trial) {
    ClusterMoments m(60);
    for (int step = 0; step < 400; ++step) {
      const std::size_t p = std::uniform_int_distribution<std::size_t>(0, m.size() - 1)(rng);
      if (u01(rng) < 0.05 && m.count(p) >= 2) {
        const long n = m.count(p);
        const long first = std::uniform_int_distribution<long>(1, n - 1)(rng);
        const double xp = m.log_x(p);
        const auto ids = m.split(p, std::vector<long>{first, n - first});
        const double sum = log_add_exp(m.log_x(m.index_of(ids[0])), m.log_x(m.index_of(ids[1])));
        CHECK(close_log(sum, xp, 1e-13));
      } else if (m.count(p) > 0) {
        m.kill(p, std::uniform_real_distribution<double>(-5.0, 3.0)(rng));
        if (m.count(p) == 0 && m.size() > 1) {
          m.remove(p);
        } else {
          m.add_points(p, 1);
        }
      }
      const double slack = 1e-12;
      CHECK(m.log_z2() >= 2 * m.log_z() - slack);
      CHECK(m.log_x2_total() >= 2 * m.log_x_total() - slack);
      for (std::size_t q = 0; q < m.size(); ++q) {
        CHECK(m.log_x2(q) >= 2 * m.log_x(q) - slack);
        if (m.log_zp(q) != kNegInf) CHECK(m.log_zp2(q) >= 2 * m.log_zp(q) - slack);
      }
    }
  }
}

TEST_CASE("moments agree with a Monte Carlo simulation of the volume process") {
  // Two kills, a split into {3, 2}, then kills in both parts. Each kill
  // shrinks its cluster by the largest of n uniforms; a split divides the
  // volume with Dirichlet(n_1, n_2) fractions.
  const std::vector<double> ll_before{0.5, -0.2};
  const std::vector<std::pair<int, double>> after{{0, 1.0}, {1, 0.7}, {0, 0.1}, {1, -0.4}};
  ClusterMoments m(5);
  for (double l : ll_before) {
    m.kill(0, l);
    m.add_points(0, 1);
  }
  m.split(0, std::vector<long>{3, 2});
  for (auto [p, l] : after) {
    m.kill(p, l);
    m.add_points(p, 1);
  }

  Rng rng(7);
  std::uniform_real_distribution<double> u01;
  std::gamma_distribution<double> g3(3.0), g2(2.0);
  const int reps = 400000;
  double sz = 0, sz2 = 0, sx0 = 0, sx1 = 0, sx01 = 0, szx0 = 0;
  for (int r = 0; r < reps; ++r) {
    double x = 1, z = 0;
    for (double l : ll_before) {
      const double nx = x * std::pow(u01(rng), 1.0 / 5);
      z += (x - nx) * std::exp(l);
      x = nx;
    }
    const double a = g3(rng), b = g2(rng);
    double xs[2] = {x * a / (a + b), x * b / (a + b)};
    const int ns[2] = {3, 2};
    for (auto [p, l] : after) {
      const double nx = xs[p] * std::pow(u01(rng), 1.0 / ns[p]);
      z += (xs[p] - nx) * std::exp(l);
      xs[p] = nx;
    }
    sz += z;
    sz2 += z * z;
    sx0 += xs[0];
    sx1 += xs[1];
    sx01 += xs[0] * xs[1];
    szx0 += z * xs[0];
  }
  auto near = [&](double log_moment, double mc_sum, double rel) {
    CHECK(std::exp(log_moment) == doctest::Approx(mc_sum / reps).epsilon(rel));
  };
  near(m.log_z(), sz, 0.005);
  near(m.log_z2(), sz2, 0.01);
  near(m.log_x(0), sx0, 0.005);
  near(m.log_x(1), sx1, 0.005);
  near(m.log_xx(0, 1), sx01, 0.01);
  near(m.log_zx(0), szx0, 0.01);
}

TEST_CASE("spawn allocation follows the volumes") {
  ClusterMoments m(200);
  m.split(0, std::vector<long>{180, 20});
  Rng rng(8);
  const auto picks = spawn_allocation(m, 10000, rng);
  const double frac0 = std::count(picks.begin(), picks.end(), 0u) / 10000.0;
  CHECK(std::abs(frac0 - 0.9) <= 3 * std::sqrt(0.09 / 10000));

  ClusterMoments e(20);
  e.split(0, std::vector<long>{19, 1});
  e.kill(1, 0.0);
  CHECK(e.count(1) == 0);
  for (auto p : spawn_allocation(e, 1000, rng)) CHECK(p == 0u);
}
