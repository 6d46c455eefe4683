#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "ggns/engine.hpp"
#include "ggns/logmath.hpp"
#include "oracles.hpp"

using namespace ggns;

namespace {

NSConfig seeded(std::uint64_t seed) {
  NSConfig c;
  c.seed = seed;
  return c;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("configuration validation") {
  NSConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto edit) {
    NSConfig x;
    edit(x);
    CHECK_THROWS_AS(x.validate(), std::invalid_argument);
  };
  bad([](NSConfig& x) { x.n_live = 1; });
  bad([](NSConfig& x) { x.tol = 0.0; });
  bad([](NSConfig& x) { x.tol = 1.0; });
  bad([](NSConfig& x) { x.min_ref = 3; });
  bad([](NSConfig& x) { x.delta_p = -0.1; });
  bad([](NSConfig& x) { x.dt_ini = 0.0; });
  bad([](NSConfig& x) { x.kill_fraction = 0.7; });
  bad([](NSConfig& x) { x.fixed_steps = 0; });
}

TEST_CASE("configuration text round trip") {
  NSConfig c;
  set_config_value(c, "n_live", "123");
  set_config_value(c, "clustering", "false");
  set_config_value(c, "termination", "legacy_remaining_mass");
  set_config_value(c, "termination_like", "live_max");
  set_config_value(c, "delta_p", "0.05");
  set_config_value(c, "fixed_steps", "20");
  set_config_value(c, "batch_mode", "independent");
  set_config_value(c, "momentum_noise", "per_component");
  const auto m = config_to_map(c);
  NSConfig d;
  for (const auto& [k, v] : m) set_config_value(d, k, v);
  CHECK(config_to_map(d) == m);
  CHECK(m.at("delta_p") == "0.05");
  CHECK(d.n_live == 123);
  CHECK_FALSE(d.clustering_enabled);
  CHECK(d.fixed_steps == 20);
  CHECK_THROWS_AS(set_config_value(c, "no_such_key", "1"), std::invalid_argument);
  CHECK_THROWS_AS(set_config_value(c, "n_live", "many"), std::invalid_argument);
  CHECK_THROWS_AS(set_config_value(c, "termination", "sometimes"), std::invalid_argument);
}

TEST_CASE("termination test") {
  CHECK(termination_check(TerminationMode::PeakRelative, 0.01, 0.0, 0.0, 5.0));
  CHECK_FALSE(termination_check(TerminationMode::PeakRelative, 0.01, -1.0, 3.0, 2.0));
  for (double v = 0; v < 10; v += 0.5)  // rising branch: current value is the running max
    CHECK_FALSE(termination_check(TerminationMode::PeakRelative, 0.01, -v, 2 * v, v));
  CHECK(termination_check(TerminationMode::LegacyRemainingMass, 0.01, -5.0, 0.0, 10.0));
  CHECK_FALSE(termination_check(TerminationMode::LegacyRemainingMass, 0.01, -1.0, 0.0, 10.0));
}

TEST_CASE("flat density: exact evidence, prior weights, geometric volumes") {
  auto flat = make_flat(3, 3.0);
  const auto r = run(*flat, seeded(1));
  CHECK(r.stop_reason == "converged");
  CHECK(r.log_z == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(std::abs(r.log_z - 3.0) <= 3 * r.log_z_err_moments + 1e-3);
  CHECK(r.d_kl == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
  CHECK(r.dead.front().log_x == doctest::Approx(std::log(200.0 / 201)).epsilon(1e-14));
  for (std::size_t i = 1; i < r.dead.size(); ++i) CHECK(r.dead[i].log_x < r.dead[i - 1].log_x);
  const auto p = posterior_weights(r);
  double wsum = 0;
  for (const auto& d : r.dead) wsum += std::exp(d.log_w);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(std::exp(r.dead[i].log_w) / wsum).epsilon(1e-12));
}

TEST_CASE("run bookkeeping on a gaussian") {
  auto g = make_gaussian(8);
  std::vector<IterationDiagnostics> seen;
  const auto r = run(*g, seeded(3), [&](const IterationDiagnostics& d) { seen.push_back(d); });
  CHECK(seen.size() == static_cast<std::size_t>(r.iterations));
  CHECK(r.trace.size() == seen.size());
  CHECK(r.dead.size() == static_cast<std::size_t>(r.iterations) * 100 + 200);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(seen[i].log_delta_xl <= 0.0);
    CHECK(seen[i].iteration == static_cast<std::int64_t>(i + 1));
    if (i) CHECK(seen[i].n_like_calls >= seen[i - 1].n_like_calls);
  }
  const auto p = posterior_weights(r);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  // the moment accumulator and the archive sum describe the same evidence
  std::vector<double> terms;
  for (const auto& d : r.dead) terms.push_back(d.log_like + d.log_w);
  CHECK(log_sum_exp(terms) == doctest::Approx(r.log_z).epsilon(1e-9));
  CHECK(r.log_z_err_kl == doctest::Approx(std::sqrt(r.d_kl / 200)).epsilon(1e-12));
  CHECK(r.log_z_err_moments > 0.0);
  CHECK(r.n_like_calls == r.hss_totals.like_calls + 200);
  CHECK(effective_sample_size(r) > 100.0);
}

TEST_CASE("full runs are reproducible and independent of the worker count") {
  auto g = make_gaussian(6);
  NSConfig a = seeded(11), b = seeded(11), c = seeded(12);
  b.workers = 3;
  const auto ra = run(*g, a), rb = run(*g, b), rc = run(*g, c);
  REQUIRE(ra.dead.size() == rb.dead.size());
  for (std::size_t i = 0; i < ra.dead.size(); ++i) {
    CHECK(ra.dead[i].theta == rb.dead[i].theta);
    CHECK(ra.dead[i].log_w == rb.dead[i].log_w);
  }
  CHECK(ra.log_z == rb.log_z);
  CHECK(ra.n_like_calls == rb.n_like_calls);
  CHECK(ra.log_z != rc.log_z);
}

TEST_CASE("cluster evidences add up on the mixture") {
  auto m = make_problem("mixture9", {});
  const auto r = run(*m, seeded(2));
  std::vector<double> parts;
  for (const auto& [id, lz] : r.cluster_log_z) parts.push_back(lz);
  CHECK(r.cluster_log_z.size() > 1);
  CHECK(log_sum_exp(parts) == doctest::Approx(r.log_z).epsilon(1e-9));
}

TEST_CASE("gaussian d=16 evidence is unbiased over ten seeds" * doctest::test_suite("statistical")) {
  auto g = make_gaussian(16);
  const double truth = oracle::gaussian_log_z(16);
  double bias = 0, sigma = 0;
  std::vector<double> lz, sk;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto r = run(*g, seeded(s));
    lz.push_back(r.log_z);
    sk.push_back(r.log_z_err_kl);
    bias += (r.log_z - truth) / 10;
    sigma += r.log_z_err_kl / 10;
  }
  CHECK(std::abs(bias) <= 3 * sigma);
  // independent pairs of seeds agree within five error bars
  for (std::size_t i = 0; i + 1 < lz.size(); i += 2) CHECK(std::abs(lz[i] - lz[i + 1]) < 5 * sk[i]);
}

TEST_CASE("information grows with dimension on the gaussian and falls on the torus" * doctest::test_suite("statistical")) {
  std::vector<double> ld, kl;
  for (std::size_t d : {4, 8, 16, 32}) {
    const auto r = run(*make_gaussian(d), seeded(1));
    ld.push_back(static_cast<double>(d));
    kl.push_back(r.d_kl);
  }
  CHECK(slope(ld, kl) > 0.0);
  double prev = INFINITY;
  for (std::size_t n : {2, 4, 8}) {
    const auto r = run(*make_torus(n), seeded(1));
    CHECK(r.d_kl < prev);
    prev = r.d_kl;
  }
}

TEST_CASE("non-finite densities stop the run") {
  auto nan = make_custom("nan", {-1}, {1}, [](std::span<const double> x) { return x[0] > 0.5 ? NAN : 0.0; });
  CHECK_THROWS_AS(run(*nan, seeded(1)), NumericalError);
}

TEST_CASE("posterior summaries and resampling") {
  auto g = make_gaussian(2);
  const auto r = run(*g, seeded(4));
  const auto w = posterior_weights(r);
  const auto mean = posterior_mean(r);
  Rng rng(9);
  const auto draws = resample_equal(r, 100000, rng);
  CHECK(resample_equal(r, 2715, rng).size() == 2715);
  for (std::size_t j = 0; j < 2; ++j) {
    double var = 0, m = 0;
    for (std::size_t i = 0; i < w.size(); ++i) var += w[i] * std::pow(r.dead[i].theta[j] - mean[j], 2);
    for (const auto& x : draws) m += x[j];
    m /= draws.size();
    CHECK(std::abs(m - mean[j]) <= 3 * std::sqrt(var / draws.size()));
  }
  CHECK_THROWS_AS(resample_equal(r, 0, rng), std::invalid_argument);

  NSResult one;
  one.dim = 1;
  one.n_live = 2;
  one.dead = {{{1.0}, kNegInf, -1, -1, 0}, {{2.0}, 0.0, -2, -1, 0}, {{3.0}, kNegInf, -3, -1, 0}};
  for (const auto& x : resample_equal(one, 50, rng)) CHECK(x[0] == 2.0);
}

TEST_CASE("mode coverage counting") {
  auto m = make_problem("mixture9", {});
  const auto centres = m->mode_centers();
  CHECK(mode_coverage(centres, centres, 0.3) == 9);
  std::vector<Point> far{{100, 100}, {2.5, 2.5}};
  CHECK(mode_coverage(far, centres, 0.3) == 0);
  CHECK_THROWS_AS(mode_coverage(far, centres, 0.0), std::invalid_argument);
}
