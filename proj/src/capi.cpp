#include "ggns/ggns.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggns/engine.hpp"
#include "ggns/evidence.hpp"
#include "ggns/io.hpp"
#include "ggns/problems.hpp"

struct ggns_problem {
  ggns::ProblemPtr problem;
};

struct ggns_config {
  ggns::NSConfig cfg;
};

struct ggns_result {
  ggns::NSResult result;
  ggns::ProblemPtr problem;
  ggns::NSConfig cfg;
};

namespace {

thread_local std::string g_last_error;

ggns_status fail(ggns_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps the exception in flight to a status code.
ggns_status translate() {
  try {
    throw;
  } catch (const ggns::NumericalError& e) {
    return fail(GGNS_ERR_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GGNS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(GGNS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GGNS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GGNS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GGNS_ERR_INTERNAL, "unknown error");
  }
}

template <typename Fn>
ggns_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (...) {
    return translate();
  }
}

#define GGNS_REQUIRE(ptr) \
  if (!(ptr)) return fail(GGNS_ERR_INVALID_ARGUMENT, std::string(__func__) + ": " #ptr " is NULL")

}  // namespace

extern "C" {

const char* ggns_version(void) { return "1.0.0"; }

const char* ggns_last_error(void) { return g_last_error.c_str(); }

const char* ggns_status_string(ggns_status status) {
  switch (status) {
    case GGNS_OK: return "ok";
    case GGNS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GGNS_ERR_NUMERICAL: return "numerical error";
    case GGNS_ERR_IO: return "i/o error";
    case GGNS_ERR_UNAVAILABLE: return "unavailable";
    case GGNS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- problems ----

ggns_status ggns_problem_create(const char* name, const char* const* keys, const double* values,
                                size_t n_params, ggns_problem** out) {
  GGNS_REQUIRE(name);
  GGNS_REQUIRE(out);
  if (n_params > 0 && (!keys || !values))
    return fail(GGNS_ERR_INVALID_ARGUMENT, "ggns_problem_create: parameters given without keys or values");
  return guarded([&] {
    std::map<std::string, double> params;
    for (size_t i = 0; i < n_params; ++i) {
      if (!keys[i]) return fail(GGNS_ERR_INVALID_ARGUMENT, "ggns_problem_create: NULL parameter key");
      params[keys[i]] = values[i];
    }
    auto problem = ggns::make_problem(name, params);
    *out = new ggns_problem{std::move(problem)};
    return GGNS_OK;
  });
}

ggns_status ggns_problem_create_custom(const char* name, size_t dim, const double* lower,
                                       const double* upper, int periodic, ggns_log_like_fn log_like,
                                       ggns_grad_fn grad, void* user, ggns_problem** out) {
  GGNS_REQUIRE(lower);
  GGNS_REQUIRE(upper);
  GGNS_REQUIRE(log_like);
  GGNS_REQUIRE(out);
  if (dim == 0) return fail(GGNS_ERR_INVALID_ARGUMENT, "ggns_problem_create_custom: dim must be >= 1");
  return guarded([&] {
    ggns::LogLikeFn f = [log_like, user](std::span<const double> t) { return log_like(t.data(), t.size(), user); };
    ggns::GradFn g;
    if (grad)
      g = [grad, user](std::span<const double> t, std::span<double> o) { grad(t.data(), t.size(), o.data(), user); };
    auto problem = ggns::make_custom(name ? name : "custom", std::vector<double>(lower, lower + dim),
                                     std::vector<double>(upper, upper + dim), std::move(f), std::move(g),
                                     periodic != 0);
    *out = new ggns_problem{std::move(problem)};
    return GGNS_OK;
  });
}

void ggns_problem_destroy(ggns_problem* problem) { delete problem; }

size_t ggns_problem_dim(const ggns_problem* problem) { return problem ? problem->problem->dim() : 0; }

ggns_status ggns_problem_log_like(const ggns_problem* problem, const double* theta, double* out) {
  GGNS_REQUIRE(problem);
  GGNS_REQUIRE(theta);
  GGNS_REQUIRE(out);
  return guarded([&] {
    *out = problem->problem->log_like({theta, problem->problem->dim()});
    return GGNS_OK;
  });
}

ggns_status ggns_problem_grad(const ggns_problem* problem, const double* theta, double* out) {
  GGNS_REQUIRE(problem);
  GGNS_REQUIRE(theta);
  GGNS_REQUIRE(out);
  return guarded([&] {
    const auto d = problem->problem->dim();
    problem->problem->grad({theta, d}, {out, d});
    return GGNS_OK;
  });
}

ggns_status ggns_problem_analytic_log_z(const ggns_problem* problem, double* out) {
  GGNS_REQUIRE(problem);
  GGNS_REQUIRE(out);
  const auto value = problem->problem->analytic_log_z();
  if (!value) return fail(GGNS_ERR_UNAVAILABLE, "problem '" + problem->problem->name() + "' has no closed-form evidence");
  *out = *value;
  return GGNS_OK;
}

size_t ggns_problem_mode_count(const ggns_problem* problem) {
  return problem ? problem->problem->mode_centers().size() : 0;
}

ggns_status ggns_problem_mode_center(const ggns_problem* problem, size_t index, double* out) {
  GGNS_REQUIRE(problem);
  GGNS_REQUIRE(out);
  const auto centers = problem->problem->mode_centers();
  if (index >= centers.size()) return fail(GGNS_ERR_INVALID_ARGUMENT, "ggns_problem_mode_center: index out of range");
  std::copy(centers[index].begin(), centers[index].end(), out);
  return GGNS_OK;
}

double ggns_problem_mode_radius(const ggns_problem* problem) {
  return problem ? problem->problem->mode_radius() : 0.0;
}

ggns_status ggns_torus_log_norm(size_t n, double alpha, double beta, double c, double* out) {
  GGNS_REQUIRE(out);
  return guarded([&] {
    *out = ggns::torus_log_norm(n, alpha, beta, c);
    return GGNS_OK;
  });
}

// ---- configuration ----

ggns_status ggns_config_create(ggns_config** out) {
  GGNS_REQUIRE(out);
  return guarded([&] {
    *out = new ggns_config{};
    return GGNS_OK;
  });
}

void ggns_config_destroy(ggns_config* config) { delete config; }

ggns_status ggns_config_set(ggns_config* config, const char* key, const char* value) {
  GGNS_REQUIRE(config);
  GGNS_REQUIRE(key);
  GGNS_REQUIRE(value);
  return guarded([&] {
    ggns::NSConfig trial = config->cfg;
    ggns::set_config_value(trial, key, value);
    config->cfg = trial;
    return GGNS_OK;
  });
}

ggns_status ggns_config_get(const ggns_config* config, const char* key, char* buf, size_t buf_len,
                            size_t* needed) {
  GGNS_REQUIRE(config);
  GGNS_REQUIRE(key);
  return guarded([&] {
    const auto map = ggns::config_to_map(config->cfg);
    const auto it = map.find(key);
    if (it == map.end()) return fail(GGNS_ERR_INVALID_ARGUMENT, std::string("config: unknown key '") + key + "'");
    const std::string& text = it->second;
    if (needed) *needed = text.size() + 1;
    if (buf && buf_len > 0) {
      const size_t n = std::min(buf_len - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
    return GGNS_OK;
  });
}

ggns_status ggns_config_validate(const ggns_config* config) {
  GGNS_REQUIRE(config);
  return guarded([&] {
    config->cfg.validate();
    return GGNS_OK;
  });
}

// ---- runs ----

ggns_status ggns_run(const ggns_problem* problem, const ggns_config* config, ggns_iteration_fn observer,
                     void* user, ggns_result** out) {
  GGNS_REQUIRE(problem);
  GGNS_REQUIRE(config);
  GGNS_REQUIRE(out);
  return guarded([&] {
    ggns::IterationObserver obs;
    if (observer)
      obs = [observer, user](const ggns::IterationDiagnostics& d) {
        const ggns_iteration info{d.iteration, d.n_clusters, d.dt,    d.out_frac,    d.log_delta_xl,
                                  d.n_like_calls, d.log_x,   d.barrier, d.max_log_like};
        observer(&info, user);
      };
    auto r = std::make_unique<ggns_result>();
    r->result = ggns::run(*problem->problem, config->cfg, obs);
    r->problem = problem->problem;
    r->cfg = config->cfg;
    *out = r.release();
    return GGNS_OK;
  });
}

void ggns_result_destroy(ggns_result* result) { delete result; }

double ggns_result_log_z(const ggns_result* r) { return r ? r->result.log_z : 0.0; }
double ggns_result_log_z_err_kl(const ggns_result* r) { return r ? r->result.log_z_err_kl : 0.0; }
double ggns_result_log_z_err_moments(const ggns_result* r) { return r ? r->result.log_z_err_moments : 0.0; }
double ggns_result_d_kl(const ggns_result* r) { return r ? r->result.d_kl : 0.0; }
uint64_t ggns_result_n_like_calls(const ggns_result* r) { return r ? r->result.n_like_calls : 0; }
int64_t ggns_result_iterations(const ggns_result* r) { return r ? r->result.iterations : 0; }
double ggns_result_wall_seconds(const ggns_result* r) { return r ? r->result.wall_seconds : 0.0; }
size_t ggns_result_dim(const ggns_result* r) { return r ? r->result.dim : 0; }
size_t ggns_result_n_dead(const ggns_result* r) { return r ? r->result.dead.size() : 0; }
size_t ggns_result_n_clusters(const ggns_result* r) { return r ? r->result.cluster_log_z.size() : 0; }
const char* ggns_result_stop_reason(const ggns_result* r) { return r ? r->result.stop_reason.c_str() : ""; }

ggns_status ggns_result_dead_point(const ggns_result* result, size_t index, double* theta, double* log_like,
                                   double* log_x, double* log_w, int32_t* cluster) {
  GGNS_REQUIRE(result);
  if (index >= result->result.dead.size())
    return fail(GGNS_ERR_INVALID_ARGUMENT, "ggns_result_dead_point: index out of range");
  const auto& p = result->result.dead[index];
  if (theta) std::copy(p.theta.begin(), p.theta.end(), theta);
  if (log_like) *log_like = p.log_like;
  if (log_x) *log_x = p.log_x;
  if (log_w) *log_w = p.log_w;
  if (cluster) *cluster = p.cluster;
  return GGNS_OK;
}

ggns_status ggns_result_posterior_mean(const ggns_result* result, double* out) {
  GGNS_REQUIRE(result);
  GGNS_REQUIRE(out);
  return guarded([&] {
    const auto mean = ggns::posterior_mean(result->result);
    std::copy(mean.begin(), mean.end(), out);
    return GGNS_OK;
  });
}

ggns_status ggns_result_effective_sample_size(const ggns_result* result, double* out) {
  GGNS_REQUIRE(result);
  GGNS_REQUIRE(out);
  return guarded([&] {
    *out = ggns::effective_sample_size(result->result);
    return GGNS_OK;
  });
}

ggns_status ggns_result_resample(const ggns_result* result, size_t count, uint64_t seed, double* out) {
  GGNS_REQUIRE(result);
  GGNS_REQUIRE(out);
  return guarded([&] {
    ggns::Rng rng(seed);
    const auto draws = ggns::resample_equal(result->result, count, rng);
    for (const auto& p : draws) out = std::copy(p.begin(), p.end(), out);
    return GGNS_OK;
  });
}

ggns_status ggns_result_write(const ggns_result* result, const char* dir) {
  GGNS_REQUIRE(result);
  GGNS_REQUIRE(dir);
  try {
    ggns::write_run_artifacts(result->result, *result->problem, result->cfg, dir);
    return GGNS_OK;
  } catch (const std::exception& e) {
    return fail(GGNS_ERR_IO, e.what());
  }
}

ggns_status ggns_mode_coverage(const double* samples, size_t n_samples, size_t dim, const double* centers,
                               size_t n_centers, double radius, int* out) {
  GGNS_REQUIRE(centers);
  GGNS_REQUIRE(out);
  if (n_samples > 0 && !samples) return fail(GGNS_ERR_INVALID_ARGUMENT, "ggns_mode_coverage: samples is NULL");
  return guarded([&] {
    std::vector<ggns::Point> s(n_samples), c(n_centers);
    for (size_t i = 0; i < n_samples; ++i) s[i].assign(samples + i * dim, samples + (i + 1) * dim);
    for (size_t i = 0; i < n_centers; ++i) c[i].assign(centers + i * dim, centers + (i + 1) * dim);
    *out = ggns::mode_coverage(s, c, radius);
    return GGNS_OK;
  });
}

}  // extern "C"
