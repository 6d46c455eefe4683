#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "ggns/problems.hpp"
#include "oracles.hpp"

using namespace ggns;

TEST_CASE("gaussian density and score at simple points") {
  auto g = make_gaussian(2);
  CHECK(g->log_like(std::vector<double>{0, 0}) == doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(1e-14));
  std::vector<double> out(2);
  g->grad(std::vector<double>{1, 0}, out);
  CHECK(out[0] == doctest::Approx(-1.0));
  CHECK(out[1] == doctest::Approx(0.0));
}

TEST_CASE("torus density and score by substitution") {
  auto t = make_torus(1, 1.0, 3.0, 3.0);
  CHECK(t->log_like(std::vector<double>{std::numbers::pi / 2}) == doctest::Approx(3 * std::log(4.0)).epsilon(1e-14));
  std::vector<double> out(1);
  t->grad(std::vector<double>{0.0}, out);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("funnel density matches a direct evaluation") {
  auto f = make_funnel(10);
  std::vector<double> theta(10, 0.0);
  // v ~ N(0, 9) at v = 0 and nine x_i ~ N(0, 1) at 0.
  const double expected = -0.5 * std::log(2 * std::numbers::pi * 9.0) - 4.5 * std::log(2 * std::numbers::pi);
  CHECK(f->log_like(theta) == doctest::Approx(expected).epsilon(1e-14));
  theta = {1.0, 0.5, -0.5, 0, 0, 0, 0, 0, 0, 0.25};
  const double r2 = 0.25 + 0.25 + 0.0625;
  const double direct = -0.5 * std::log(2 * std::numbers::pi * 9.0) - 1.0 / 18.0 +
                        9 * (-0.5 * std::log(2 * std::numbers::pi * std::exp(1.0))) - 0.5 * r2 / std::exp(1.0);
  CHECK(f->log_like(theta) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("torus normalization: closed form and quadrature") {
  CHECK(std::exp(torus_log_norm(1, 2, 3, 1.0)) == doctest::Approx(5 * std::numbers::pi).epsilon(1e-12));
  CHECK(std::exp(torus_log_norm(2, 2, 3, 1.0)) == doctest::Approx(16 * std::numbers::pi * std::numbers::pi).epsilon(1e-12));
  CHECK(std::exp(torus_log_norm(1, 2, 3, 2.0)) == doctest::Approx(22 * std::numbers::pi).epsilon(1e-12));
  for (std::size_t n : {1, 2, 4, 8, 16}) {
    auto t = make_torus(n);
    CHECK(*t->analytic_log_z() == doctest::Approx(oracle::torus_log_z(n, n + 1.0)).epsilon(1e-12));
  }
  auto c2 = make_torus(1, 1.0, 3.0, 2.0);
  CHECK(oracle::torus_log_z_trapezoid(*c2) == doctest::Approx(*c2->analytic_log_z()).epsilon(1e-12));
  for (std::size_t n : {1, 2}) {
    auto t = make_torus(n);
    CHECK(oracle::torus_log_z_trapezoid(*t) == doctest::Approx(*t->analytic_log_z()).epsilon(1e-12));
  }
}

TEST_CASE("gaussian and mixture evidence against quadrature") {
  for (std::size_t d : {1, 4, 64})
    CHECK(*make_gaussian(d)->analytic_log_z() == doctest::Approx(oracle::gaussian_log_z(d)).epsilon(1e-12));
  auto m = make_problem("mixture9", {});
  CHECK(*m->analytic_log_z() == doctest::Approx(oracle::grid_log_z_2d(*m, 1000)).epsilon(1e-8));
  CHECK(m->mode_centers().size() == 9);
}

TEST_CASE("funnel evidence against nested quadrature") {
  for (std::size_t d : {2, 10}) {
    auto f = make_funnel(d);
    CHECK(*f->analytic_log_z() == doctest::Approx(oracle::funnel_log_z(d)).epsilon(1e-7));
  }
}

TEST_CASE("linear-gaussian evidence by three routes") {
  for (std::size_t d : {16, 64}) {
    LinearGaussianOptions o;
    o.dim = d;
    auto lg = make_linear_gaussian(o);
    const auto fit = oracle::quadratic_fit(*lg, std::vector<double>(d, o.prior_mean));
    CHECK(*lg->analytic_log_z() == doctest::Approx(lg->log_z_from_marginal()).epsilon(1e-9));
    CHECK(*lg->analytic_log_z() == doctest::Approx(fit.log_z).epsilon(1e-7));
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(lg->posterior_mean()[i] == doctest::Approx(fit.mean[i]).epsilon(1e-6));
      CHECK(lg->posterior_std()[i] == doctest::Approx(fit.sd[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("scores match finite differences for every built-in") {
  std::mt19937_64 rng(7);
  for (const auto& name : builtin_problem_names()) {
    auto p = make_problem(name, {});
    std::vector<double> theta(p->dim()), g(p->dim()), fd(p->dim());
    for (int trial = 0; trial < 5; ++trial) {
      for (std::size_t i = 0; i < p->dim(); ++i) {
        const double lo = p->lower()[i], hi = p->upper()[i];
        // stay in the bulk so the finite-difference error is not dominated by huge curvature
        theta[i] = lo + (hi - lo) * std::uniform_real_distribution<double>(0.3, 0.7)(rng);
      }
      if (name == "funnel") theta[0] = std::uniform_real_distribution<double>(-1.0, 2.0)(rng);
      p->grad(theta, g);
      finite_difference_grad([&](std::span<const double> x) { return p->log_like(x); }, theta, fd);
      double num = 0, den = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        num += (g[i] - fd[i]) * (g[i] - fd[i]);
        den += g[i] * g[i];
      }
      INFO(name);
      CHECK(std::sqrt(num) <= 1e-4 * std::max(1.0, std::sqrt(den)));
    }
  }
}

TEST_CASE("registry rejects unknown names and parameters") {
  CHECK_THROWS_AS(make_problem("nosuch", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("gaussian", {{"bogus", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_torus(2, 2.0, 3.0, 1.0), std::invalid_argument);
  CHECK(make_problem("gaussian", {{"dim", 7}})->dim() == 7);
}

TEST_CASE("custom problem uses the finite-difference fallback") {
  auto p = make_custom("quad", {-1, -1}, {1, 1}, [](std::span<const double> x) { return -x[0] * x[0] - 3 * x[1]; });
  std::vector<double> g(2);
  p->grad(std::vector<double>{0.5, 0.0}, g);
  CHECK(g[0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(-3.0).epsilon(1e-8));
  CHECK_FALSE(p->analytic_log_z().has_value());
  CHECK_THROWS_AS(make_custom("bad", {0}, {0}, [](std::span<const double>) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("prior samples stay in the box and have uniform moments") {
  Rng rng(3);
  auto sq = make_custom("sq", {0, 0}, {1, 1}, [](std::span<const double>) { return 0.0; });
  for (const auto& x : sample_prior(*sq, 4, rng))
    for (double v : x) CHECK((v >= 0.0 && v <= 1.0));
  auto line = make_flat(1, 0.0, 10.0);
  const std::size_t n = 100000;
  double mean = 0;
  for (const auto& x : sample_prior(*line, n, rng)) mean += x[0];
  mean /= n;
  CHECK(std::abs(mean) <= 3 * 20 / std::sqrt(12.0 * n));
  Rng a(11), b(11);
  CHECK(sample_prior(*line, 1, a) == sample_prior(*line, 1, b));
}
