#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "ggns/ggns.h"

namespace fs = std::filesystem;

namespace {

struct Problem {
  ggns_problem* p = nullptr;
  ~Problem() { ggns_problem_destroy(p); }
};
struct Config {
  ggns_config* c = nullptr;
  Config() { REQUIRE(ggns_config_create(&c) == GGNS_OK); }
  ~Config() { ggns_config_destroy(c); }
};
struct Result {
  ggns_result* r = nullptr;
  ~Result() { ggns_result_destroy(r); }
};

double quadratic(const double* theta, size_t dim, void* user) {
  const double scale = *static_cast<double*>(user);
  double s = 0;
  for (size_t i = 0; i < dim; ++i) s += theta[i] * theta[i];
  return -0.5 * s / (scale * scale);
}

void quadratic_grad(const double* theta, size_t dim, double* out, void* user) {
  const double scale = *static_cast<double*>(user);
  for (size_t i = 0; i < dim; ++i) out[i] = -theta[i] / (scale * scale);
}

void count_iterations(const ggns_iteration* info, void* user) {
  auto* seen = static_cast<std::vector<ggns_iteration>*>(user);
  seen->push_back(*info);
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(ggns_version()).size() > 0);
  CHECK(std::string(ggns_status_string(GGNS_OK)) != std::string(ggns_status_string(GGNS_ERR_IO)));
}

TEST_CASE("built-in problems through the C interface") {
  Problem g;
  const char* keys[] = {"dim"};
  const double values[] = {2};
  REQUIRE(ggns_problem_create("gaussian", keys, values, 1, &g.p) == GGNS_OK);
  CHECK(ggns_problem_dim(g.p) == 2);
  const double zero[] = {0, 0};
  double ll = 0;
  REQUIRE(ggns_problem_log_like(g.p, zero, &ll) == GGNS_OK);
  CHECK(ll == doctest::Approx(-std::log(2 * std::numbers::pi)));
  const double x[] = {1, 0};
  double grad[2];
  REQUIRE(ggns_problem_grad(g.p, x, grad) == GGNS_OK);
  CHECK(grad[0] == doctest::Approx(-1.0));
  double lz = 0;
  CHECK(ggns_problem_analytic_log_z(g.p, &lz) == GGNS_OK);
  CHECK(lz == doctest::Approx(2 * std::log(std::erf(10 / std::numbers::sqrt2) / 20)));

  Problem m;
  REQUIRE(ggns_problem_create("mixture9", nullptr, nullptr, 0, &m.p) == GGNS_OK);
  CHECK(ggns_problem_mode_count(m.p) == 9);
  double c[2];
  CHECK(ggns_problem_mode_center(m.p, 8, c) == GGNS_OK);
  CHECK(c[0] == doctest::Approx(5.0));
  CHECK(ggns_problem_mode_center(m.p, 9, c) == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(ggns_problem_mode_radius(m.p) == doctest::Approx(0.3));

  double z = 0;
  CHECK(ggns_torus_log_norm(1, 2, 3, 1.0, &z) == GGNS_OK);
  CHECK(std::exp(z) == doctest::Approx(5 * std::numbers::pi));
}

TEST_CASE("errors are reported with codes and messages") {
  Problem p;
  CHECK(ggns_problem_create("nosuch", nullptr, nullptr, 0, &p.p) == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(p.p == nullptr);
  CHECK(std::string(ggns_last_error()).find("nosuch") != std::string::npos);
  const char* keys[] = {"dimm"};
  const double values[] = {3};
  CHECK(ggns_problem_create("gaussian", keys, values, 1, &p.p) == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(ggns_problem_create(nullptr, nullptr, nullptr, 0, &p.p) == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(ggns_problem_create("gaussian", nullptr, nullptr, 0, nullptr) == GGNS_ERR_INVALID_ARGUMENT);

  Problem flat;
  REQUIRE(ggns_problem_create("flat", nullptr, nullptr, 0, &flat.p) == GGNS_OK);
  double lz;
  CHECK(ggns_problem_analytic_log_z(flat.p, &lz) == GGNS_OK);
  CHECK(ggns_torus_log_norm(2, 2, 3, -1.0, &lz) == GGNS_ERR_INVALID_ARGUMENT);

  Config cfg;
  CHECK(ggns_config_set(cfg.c, "n_live", "abc") == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(ggns_config_set(cfg.c, "bogus", "1") == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ggns_last_error()).find("bogus") != std::string::npos);
  // rejected values leave the configuration untouched
  char buf[32];
  REQUIRE(ggns_config_get(cfg.c, "n_live", buf, sizeof buf, nullptr) == GGNS_OK);
  CHECK(std::string(buf) == "200");
  CHECK(ggns_config_validate(cfg.c) == GGNS_OK);
  // cross-field rules are checked by validate and by run
  REQUIRE(ggns_config_set(cfg.c, "min_ref", "5") == GGNS_OK);
  CHECK(ggns_config_validate(cfg.c) == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ggns_last_error()).find("min_ref") != std::string::npos);
  Problem g;
  REQUIRE(ggns_problem_create("gaussian", nullptr, nullptr, 0, &g.p) == GGNS_OK);
  Result none;
  CHECK(ggns_run(g.p, cfg.c, nullptr, nullptr, &none.r) == GGNS_ERR_INVALID_ARGUMENT);
  CHECK(none.r == nullptr);
  REQUIRE(ggns_config_set(cfg.c, "min_ref", "1") == GGNS_OK);

  // a NaN density is a numerical failure, not a crash
  Problem bad;
  double lo = -1, hi = 1;
  REQUIRE(ggns_problem_create_custom(
              "nan", 1, &lo, &hi, 0, [](const double*, size_t, void*) -> double { return NAN; }, nullptr, nullptr, &bad.p) ==
          GGNS_OK);
  Result r;
  CHECK(ggns_run(bad.p, cfg.c, nullptr, nullptr, &r.r) == GGNS_ERR_NUMERICAL);
  CHECK(r.r == nullptr);

  // messages are per thread
  std::string other;
  std::thread t([&] { other = ggns_last_error(); });
  t.join();
  CHECK(other.empty());
}

TEST_CASE("config get reports the needed length") {
  Config cfg;
  REQUIRE(ggns_config_set(cfg.c, "termination_mode", "legacy_remaining_mass") == GGNS_OK);
  size_t needed = 0;
  char tiny[4];
  REQUIRE(ggns_config_get(cfg.c, "termination_mode", tiny, sizeof tiny, &needed) == GGNS_OK);
  CHECK(needed == std::string("legacy_remaining_mass").size() + 1);
  CHECK(std::string(tiny) == "leg");
  CHECK(ggns_config_get(cfg.c, "nope", tiny, sizeof tiny, &needed) == GGNS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("custom problem run, observer, result accessors and artifacts") {
  double scale = 0.5;
  const double lo[] = {-5, -5, -5}, hi[] = {5, 5, 5};
  Problem p;
  REQUIRE(ggns_problem_create_custom("quad", 3, lo, hi, 0, quadratic, quadratic_grad, &scale, &p.p) == GGNS_OK);
  Config cfg;
  REQUIRE(ggns_config_set(cfg.c, "seed", "5") == GGNS_OK);
  std::vector<ggns_iteration> seen;
  Result r;
  REQUIRE(ggns_run(p.p, cfg.c, count_iterations, &seen, &r.r) == GGNS_OK);
  CHECK(static_cast<int64_t>(seen.size()) == ggns_result_iterations(r.r));
  CHECK(std::string(ggns_result_stop_reason(r.r)) == "converged");

  // integral of exp(-|x|^2 / (2 s^2)) over the cube divided by its volume
  const double truth = 3 * std::log(scale * std::sqrt(2 * std::numbers::pi) * std::erf(5 / (scale * std::numbers::sqrt2)) / 10);
  const double sigma = ggns_result_log_z_err_kl(r.r);
  CHECK(sigma == doctest::Approx(std::sqrt(ggns_result_d_kl(r.r) / 200)));
  CHECK(std::abs(ggns_result_log_z(r.r) - truth) <= 4 * sigma);
  CHECK(ggns_result_dim(r.r) == 3);
  CHECK(ggns_result_n_like_calls(r.r) > 0);
  CHECK(ggns_result_n_clusters(r.r) >= 1);

  const size_t n = ggns_result_n_dead(r.r);
  REQUIRE(n > 200);
  double theta[3], ll, lx, lw;
  int32_t cl;
  REQUIRE(ggns_result_dead_point(r.r, 0, theta, &ll, &lx, &lw, &cl) == GGNS_OK);
  CHECK(lx == doctest::Approx(std::log(200.0 / 201)));
  CHECK(ll == doctest::Approx(quadratic(theta, 3, &scale)));
  CHECK(ggns_result_dead_point(r.r, n, theta, nullptr, nullptr, nullptr, nullptr) == GGNS_ERR_INVALID_ARGUMENT);

  double mean[3], ess = 0;
  REQUIRE(ggns_result_posterior_mean(r.r, mean) == GGNS_OK);
  for (double m : mean) CHECK(std::abs(m) < 0.2);
  REQUIRE(ggns_result_effective_sample_size(r.r, &ess) == GGNS_OK);
  CHECK(ess > 100);
  std::vector<double> draws(2715 * 3), again(2715 * 3);
  REQUIRE(ggns_result_resample(r.r, 2715, 1, draws.data()) == GGNS_OK);
  REQUIRE(ggns_result_resample(r.r, 2715, 1, again.data()) == GGNS_OK);
  CHECK(draws == again);
  CHECK(ggns_result_resample(r.r, 0, 1, draws.data()) == GGNS_ERR_INVALID_ARGUMENT);

  const fs::path dir = fs::temp_directory_path() / "ggns_capi_test";
  fs::remove_all(dir);
  REQUIRE(ggns_result_write(r.r, dir.c_str()) == GGNS_OK);
  for (const char* f : {"dead_points.csv", "diagnostics.csv", "summary.json"}) CHECK(fs::exists(dir / f));
  std::ifstream csv(dir / "dead_points.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "weight,log_like,log_X,cluster,theta_1,theta_2,theta_3");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == n);
  fs::remove_all(dir);

  // an existing file where the directory should go is an I/O failure
  std::ofstream(dir.string()) << "x";
  CHECK(ggns_result_write(r.r, (dir / "sub").c_str()) == GGNS_ERR_IO);
  fs::remove_all(dir);
}

TEST_CASE("mode coverage through the C interface") {
  const double centres[] = {0, 0, 5, 5};
  const double samples[] = {0.1, 0.0, 9, 9};
  int found = -1;
  REQUIRE(ggns_mode_coverage(samples, 2, 2, centres, 2, 0.3, &found) == GGNS_OK);
  CHECK(found == 1);
  CHECK(ggns_mode_coverage(samples, 2, 2, centres, 2, -1.0, &found) == GGNS_ERR_INVALID_ARGUMENT);
}
