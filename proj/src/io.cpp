#include "ggns/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ggns {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinities; those become null.
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_dead_points_csv(const NSResult& result, std::ostream& os) {
  os << "weight,log_like,log_X,cluster";
  for (std::size_t j = 0; j < result.dim; ++j) os << ",theta_" << j + 1;
  os << '\n';
  for (const auto& p : result.dead) {
    os << num(std::exp(p.log_w)) << ',' << num(p.log_like) << ',' << num(p.log_x) << ',' << p.cluster;
    for (double t : p.theta) os << ',' << num(t);
    os << '\n';
  }
}

void write_diagnostics_csv(const NSResult& result, std::ostream& os) {
  os << "iteration,n_clusters,dt,out_frac,log_delta_xl,n_like_calls,log_X,barrier,max_log_like\n";
  for (const auto& d : result.trace)
    os << d.iteration << ',' << d.n_clusters << ',' << num(d.dt) << ',' << num(d.out_frac) << ','
       << num(d.log_delta_xl) << ',' << d.n_like_calls << ',' << num(d.log_x) << ',' << num(d.barrier)
       << ',' << num(d.max_log_like) << '\n';
}

std::string summary_json(const NSResult& result, const Problem& problem, const NSConfig& cfg) {
  nlohmann::json j;
  j["problem"] = problem.name();
  j["dim"] = result.dim;
  j["log_z"] = finite_or_null(result.log_z);
  j["log_z_err_kl"] = result.log_z_err_kl;
  j["log_z_err_moments"] = result.log_z_err_moments;
  j["d_kl"] = result.d_kl;
  if (auto a = problem.analytic_log_z()) {
    j["analytic_log_z"] = *a;
    j["log_z_bias"] = result.log_z - *a;
  }
  j["n_like_calls"] = result.n_like_calls;
  j["iterations"] = result.iterations;
  j["n_dead"] = result.dead.size();
  j["stop_reason"] = result.stop_reason;
  j["final_dt"] = result.final_dt;
  j["seed"] = cfg.seed;
  j["wall_seconds"] = result.wall_seconds;
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& [id, lz] : result.cluster_log_z) clusters.push_back({{"id", id}, {"log_z", finite_or_null(lz)}});
  j["cluster_log_z"] = clusters;
  const auto& h = result.hss_totals;
  j["hss"] = {{"in_steps", h.in_steps},       {"out_steps", h.out_steps},
              {"reflections", h.reflections}, {"wall_hits", h.wall_hits},
              {"zero_gradients", h.zero_gradients}, {"prunes", h.prunes},
              {"restarts", h.restarts}};
  j["config"] = config_to_map(cfg);
  return j.dump(2) + "\n";
}

void write_run_artifacts(const NSResult& result, const Problem& problem, const NSConfig& cfg,
                         const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
  std::ostringstream dead, diag;
  write_dead_points_csv(result, dead);
  write_diagnostics_csv(result, diag);
  write_file(fs::path(dir) / "dead_points.csv", dead.str());
  write_file(fs::path(dir) / "diagnostics.csv", diag.str());
  write_file(fs::path(dir) / "summary.json", summary_json(result, problem, cfg));
}

}  // namespace ggns
