// Experiment driver over the C interface of libggns.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ggns/ggns.h"
#include "plot.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutEnv = "GGNS_OUT_ROOT";

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ggns_status s, const std::string& what) {
  if (s != GGNS_OK) throw CliError(what + ": " + ggns_last_error());
}

struct ProblemDeleter {
  void operator()(ggns_problem* p) const { ggns_problem_destroy(p); }
};
struct ConfigDeleter {
  void operator()(ggns_config* c) const { ggns_config_destroy(c); }
};
struct ResultDeleter {
  void operator()(ggns_result* r) const { ggns_result_destroy(r); }
};
using ProblemHandle = std::unique_ptr<ggns_problem, ProblemDeleter>;
using ConfigHandle = std::unique_ptr<ggns_config, ConfigDeleter>;
using ResultHandle = std::unique_ptr<ggns_result, ResultDeleter>;

ProblemHandle make_problem(const std::string& name, const std::map<std::string, double>& params) {
  std::vector<const char*> keys;
  std::vector<double> values;
  for (const auto& [k, v] : params) {
    keys.push_back(k.c_str());
    values.push_back(v);
  }
  ggns_problem* p = nullptr;
  check(ggns_problem_create(name.c_str(), keys.data(), values.data(), keys.size(), &p), "problem '" + name + "'");
  return ProblemHandle(p);
}

ConfigHandle make_config(const std::map<std::string, std::string>& settings) {
  ggns_config* c = nullptr;
  check(ggns_config_create(&c), "config");
  ConfigHandle h(c);
  for (const auto& [k, v] : settings) check(ggns_config_set(c, k.c_str(), v.c_str()), "config");
  check(ggns_config_validate(c), "config");
  return h;
}

std::string config_value(const ggns_config* c, const char* key) {
  size_t needed = 0;
  check(ggns_config_get(c, key, nullptr, 0, &needed), "config");
  std::string out(needed, '\0');
  check(ggns_config_get(c, key, out.data(), out.size(), nullptr), "config");
  out.resize(needed - 1);
  return out;
}

std::optional<double> analytic_log_z(const ggns_problem* p) {
  double v = 0.0;
  if (ggns_problem_analytic_log_z(p, &v) == GGNS_OK) return v;
  return std::nullopt;
}

// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CliError(path + ":" + std::to_string(lineno) + ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::pair<std::string, std::string> split_pair(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw CliError("expected key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw CliError("parameter '" + key + "' expects a number, got '" + text + "'");
}

std::string fmt(double v, int precision = 6) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

struct Stats {
  double mean = 0.0;
  std::optional<double> sd;  // absent with fewer than two values
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double m2 = 0.0;
    for (double x : xs) m2 += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(m2 / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::string sd_text(const Stats& s) { return s.sd ? fmt(*s.sd) : ""; }

// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- shared options -------------------------------------------------------

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  bool force = false;
  std::string config_file;
  std::vector<std::string> sets;
  unsigned workers = 1;
  bool plot = false;
  bool quiet = false;
};

std::map<std::string, std::string> base_settings(const Common& c) {
  std::map<std::string, std::string> s;
  if (!c.config_file.empty()) s = read_config_file(c.config_file);
  for (const auto& kv : c.sets) {
    auto [k, v] = split_pair(kv);
    s[k] = v;
  }
  if (!s.count("workers")) s["workers"] = std::to_string(c.workers);
  return s;
}

// Resolves and prepares the output directory, refusing to reuse a non-empty
// one unless forced.
fs::path prepare_out(const Common& c, const std::string& subcommand) {
  fs::path dir;
  if (!c.out.empty()) {
    dir = c.out;
  } else {
    const char* root = std::getenv(kOutEnv);
    dir = fs::path(root && *root ? root : "ggns_out") / subcommand;
  }
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw CliError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !c.force)
      throw CliError("output directory " + dir.string() + " is not empty (use --force to overwrite)");
  }
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CliError("cannot write " + path.string());
  return os;
}

struct RunOutcome {
  double log_z = 0.0;
  double sigma_kl = 0.0;
  double d_kl = 0.0;
  std::uint64_t calls = 0;
  double seconds = 0.0;
  std::optional<double> truth;
  ResultHandle result;
};

RunOutcome run_one(const ggns_problem* problem, std::map<std::string, std::string> settings, std::uint64_t seed) {
  settings["seed"] = std::to_string(seed);
  auto cfg = make_config(settings);
  ggns_result* r = nullptr;
  check(ggns_run(problem, cfg.get(), nullptr, nullptr, &r), "run");
  RunOutcome o;
  o.result.reset(r);
  o.log_z = ggns_result_log_z(r);
  o.sigma_kl = ggns_result_log_z_err_kl(r);
  o.d_kl = ggns_result_d_kl(r);
  o.calls = ggns_result_n_like_calls(r);
  o.seconds = ggns_result_wall_seconds(r);
  o.truth = analytic_log_z(problem);
  return o;
}

void progress(const Common& c, const std::string& text) {
  if (!c.quiet) std::cerr << text << std::endl;
}

void write_text(const fs::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string problem;
  std::optional<int> dim;
  std::vector<std::string> params;
};

int cmd_run(const Common& c, const RunArgs& a) {
  std::map<std::string, double> params;
  for (const auto& kv : a.params) {
    auto [k, v] = split_pair(kv);
    params[k] = to_double(k, v);
  }
  if (a.dim) params["dim"] = *a.dim;
  auto problem = make_problem(a.problem, params);
  auto settings = base_settings(c);
  settings["seed"] = std::to_string(c.seed);
  auto cfg = make_config(settings);
  const auto dir = prepare_out(c, "run");

  ggns_result* raw = nullptr;
  auto observer = [](const ggns_iteration* info, void* user) {
    if (*static_cast<bool*>(user)) return;
    if (info->iteration % 20 == 0)
      std::fprintf(stderr, "iter %lld  clusters %d  dt %.3g  out_frac %.3f  log X %.2f\n",
                   static_cast<long long>(info->iteration), info->n_clusters, info->dt, info->out_frac,
                   info->log_x);
  };
  bool quiet = c.quiet;
  check(ggns_run(problem.get(), cfg.get(), observer, &quiet, &raw), "run");
  ResultHandle result(raw);
  check(ggns_result_write(result.get(), dir.string().c_str()), "write");

  std::printf("log Z = %.6f +- %.6f (kl)  +- %.6f (moments)\n", ggns_result_log_z(raw),
              ggns_result_log_z_err_kl(raw), ggns_result_log_z_err_moments(raw));
  if (auto t = analytic_log_z(problem.get()))
    std::printf("analytic log Z = %.6f  bias = %.6f\n", *t, ggns_result_log_z(raw) - *t);
  std::printf("D_KL = %.4f  likelihood calls = %llu  iterations = %lld  stop = %s\n", ggns_result_d_kl(raw),
              static_cast<unsigned long long>(ggns_result_n_like_calls(raw)),
              static_cast<long long>(ggns_result_iterations(raw)), ggns_result_stop_reason(raw));
  std::printf("artifacts in %s\n", dir.string().c_str());
  return 0;
}

// ---- scaling / ablate -----------------------------------------------------

struct SweepRow {
  std::string config;
  int dim = 0;
  std::uint64_t seed = 0;
  RunOutcome run;
};

struct SweepSummary {
  std::string config;
  int dim = 0;
  double mean_calls = 0.0;
  Stats bias;
  double mean_abs_bias = 0.0;
  double mean_sigma_kl = 0.0;
};

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SweepSummary& s) { return s.config == row.config && s.dim == row.dim; });
    if (it == out.end()) {
      out.push_back({row.config, row.dim, 0, {}, 0, 0});
    }
  }
  for (auto& s : out) {
    std::vector<double> biases;
    double calls = 0, sk = 0, ab = 0;
    for (const auto& row : rows) {
      if (row.config != s.config || row.dim != s.dim) continue;
      const double b = row.run.log_z - *row.run.truth;
      biases.push_back(b);
      calls += static_cast<double>(row.run.calls);
      sk += row.run.sigma_kl;
      ab += std::abs(b);
    }
    const double n = static_cast<double>(biases.size());
    s.mean_calls = calls / n;
    s.bias = stats(biases);
    s.mean_abs_bias = ab / n;
    s.mean_sigma_kl = sk / n;
  }
  return out;
}

void write_sweep(const fs::path& dir, const std::string& stem, const std::vector<SweepRow>& rows,
                 const std::vector<SweepSummary>& summary) {
  auto runs = open_out(dir / (stem + "_runs.csv"));
  runs << "config,dim,seed,n_like_calls,log_z,analytic_log_z,bias,sigma_kl,d_kl,wall_seconds\n";
  for (const auto& r : rows)
    runs << r.config << ',' << r.dim << ',' << r.seed << ',' << r.run.calls << ',' << fmt(r.run.log_z, 10) << ','
         << fmt(*r.run.truth, 10) << ',' << fmt(r.run.log_z - *r.run.truth, 10) << ',' << fmt(r.run.sigma_kl) << ','
         << fmt(r.run.d_kl) << ',' << fmt(r.run.seconds, 4) << '\n';
  auto sum = open_out(dir / (stem + ".csv"));
  sum << "config,dim,n_runs,mean_n_like_calls,mean_bias,std_bias,mean_abs_bias,mean_sigma_kl,within_3sigma\n";
  for (const auto& s : summary) {
    std::size_t n = 0;
    for (const auto& r : rows) n += (r.config == s.config && r.dim == s.dim) ? 1 : 0;
    sum << s.config << ',' << s.dim << ',' << n << ',' << fmt(s.mean_calls, 8) << ',' << fmt(s.bias.mean) << ','
        << sd_text(s.bias) << ',' << fmt(s.mean_abs_bias) << ',' << fmt(s.mean_sigma_kl) << ','
        << (std::abs(s.bias.mean) <= 3.0 * s.mean_sigma_kl ? "yes" : "no") << '\n';
  }
}

std::vector<SweepRow> sweep(const Common& c, const std::string& label, const std::map<std::string, std::string>& settings,
                            const std::vector<int>& dims, int n_seeds) {
  std::vector<SweepRow> rows;
  for (int d : dims) {
    auto problem = make_problem("gaussian", {{"dim", static_cast<double>(d)}});
    for (int k = 0; k < n_seeds; ++k) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(k);
      SweepRow row{label, d, seed, run_one(problem.get(), settings, seed)};
      progress(c, label + " d=" + std::to_string(d) + " seed=" + std::to_string(seed) +
                      " bias=" + fmt(row.run.log_z - *row.run.truth, 4) + " calls=" + std::to_string(row.run.calls));
      row.run.result.reset();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct ScalingArgs {
  std::vector<int> dims;
  int seeds = 5;
  bool full = false;
};

int cmd_scaling(const Common& c, ScalingArgs a) {
  if (a.dims.empty()) a.dims = a.full ? std::vector<int>{4, 8, 16, 32, 64, 128} : std::vector<int>{4, 8, 16, 32, 64};
  if (a.full) a.seeds = std::max(a.seeds, 10);
  auto settings = base_settings(c);
  settings["n_live"] = "200";
  make_config(settings);
  const auto dir = prepare_out(c, "scaling");
  const auto rows = sweep(c, "baseline", settings, a.dims, a.seeds);
  const auto summary = summarize(rows);
  write_sweep(dir, "scaling", rows, summary);

  std::vector<double> lx, ly;
  for (const auto& s : summary) {
    lx.push_back(std::log(s.dim));
    ly.push_back(std::log(s.mean_calls));
  }
  std::ostringstream rep;
  rep << "Diagonal Gaussian, n_live = 200, " << a.seeds << " seeds per dimension\n\n";
  rep << "dim  mean_calls  mean_bias  std_bias  mean_sigma_kl  |bias|<=3sigma\n";
  for (const auto& s : summary)
    rep << s.dim << "  " << fmt(s.mean_calls) << "  " << fmt(s.bias.mean, 4) << "  " << (s.bias.sd ? fmt(*s.bias.sd, 4) : "-")
        << "  " << fmt(s.mean_sigma_kl, 4) << "  " << (std::abs(s.bias.mean) <= 3.0 * s.mean_sigma_kl ? "yes" : "no")
        << '\n';
  if (summary.size() >= 2) rep << "\nslope of log n_like_calls vs log d: " << fmt(slope(lx, ly), 4) << '\n';
  rep << "\nReference (published figure): near-linear log-log scaling of likelihood calls and unbiased log Z up to d = 128.\n";
  write_text(dir / "report.txt", rep.str());
  std::cout << rep.str();

  if (c.plot) {
    Plot calls("log d", "log n_like_calls");
    Plot bias("d", "mean bias of log Z");
    Series sc{"baseline", {}, {}, {}}, sb{"baseline", {}, {}, {}};
    for (const auto& s : summary) {
      sc.x.push_back(std::log(s.dim));
      sc.y.push_back(std::log(s.mean_calls));
      sb.x.push_back(s.dim);
      sb.y.push_back(s.bias.mean);
      sb.err.push_back(3.0 * s.mean_sigma_kl);
    }
    calls.add(sc);
    bias.add(sb);
    write_text(dir / "scaling_calls.svg", calls.svg());
    write_text(dir / "scaling_bias.svg", bias.svg());
  }
  return 0;
}

struct AblateArgs {
  std::vector<int> dims;
  int seeds = 5;
  bool full = false;
};

int cmd_ablate(const Common& c, AblateArgs a) {
  if (a.dims.empty()) a.dims = a.full ? std::vector<int>{4, 8, 16, 32, 64} : std::vector<int>{32};
  const auto base = base_settings(c);
  make_config(base);
  const std::vector<std::pair<std::string, std::map<std::string, std::string>>> variants = {
      {"baseline", {}},
      {"fixed_dt_0.5", {{"adaptive_dt", "false"}, {"dt_ini", "0.5"}}},
      {"fixed_dt_0.1", {{"adaptive_dt", "false"}, {"dt_ini", "0.1"}}},
      {"fixed_steps_20", {{"fixed_steps", "20"}}},
      {"fixed_steps_200", {{"fixed_steps", "200"}}},
      {"delta_p_0", {{"delta_p", "0"}}},
      {"legacy_termination", {{"termination_mode", "legacy_remaining_mass"}}},
  };
  const auto dir = prepare_out(c, "ablate");
  std::vector<SweepRow> rows;
  for (const auto& [label, overrides] : variants) {
    auto s = base;
    for (const auto& [k, v] : overrides) s[k] = v;
    auto part = sweep(c, label, s, a.dims, a.seeds);
    for (auto& r : part) rows.push_back(std::move(r));
  }
  const auto summary = summarize(rows);
  write_sweep(dir, "ablation", rows, summary);

  std::ostringstream rep;
  rep << "Ablations on the diagonal Gaussian, " << a.seeds << " seeds\n\n";
  rep << "config  dim  mean_calls  mean_bias  mean_abs_bias  larger_than_baseline\n";
  for (const auto& s : summary) {
    const auto base_it = std::find_if(summary.begin(), summary.end(),
                                      [&](const SweepSummary& b) { return b.config == "baseline" && b.dim == s.dim; });
    rep << s.config << "  " << s.dim << "  " << fmt(s.mean_calls) << "  " << fmt(s.bias.mean, 4) << "  "
        << fmt(s.mean_abs_bias, 4) << "  "
        << (s.config == "baseline" ? "-" : (s.mean_abs_bias > base_it->mean_abs_bias ? "yes" : "no")) << '\n';
  }
  rep << "\nReference (published ablations): fixed dt, fixed-length trajectories, no momentum noise and the\n"
         "remaining-mass termination each bias log Z; removing noise also lowers the call count.\n";
  write_text(dir / "report.txt", rep.str());
  std::cout << rep.str();
  return 0;
}

// ---- table ----------------------------------------------------------------

int cmd_table(const Common& c, int seeds) {
  const auto settings = base_settings(c);
  auto cfg = make_config(settings);
  const auto dir = prepare_out(c, "table");
  const std::vector<std::pair<std::string, std::string>> problems = {{"mixture9", "Gaussian mixture"},
                                                                     {"funnel", "Funnel"}};
  auto runs = open_out(dir / "table_runs.csv");
  runs << "problem,seed,log_z,reference_log_z,bias,sigma_kl,n_like_calls\n";
  auto table = open_out(dir / "table.csv");
  table << "problem,n_runs,mean_bias,std_bias,mean_sigma_kl\n";
  std::ostringstream rep;
  rep << "Log-evidence bias over " << seeds << " runs (n_live = " << config_value(cfg.get(), "n_live")
      << ", tol = " << config_value(cfg.get(), "tol") << "; run settings are not stated for the published table,\n"
      << "so the default hyperparameters are assumed)\n\n";
  rep << "problem  mean_bias  std_bias\n";
  for (const auto& [name, title] : problems) {
    auto problem = make_problem(name, {});
    std::vector<double> biases;
    double sk = 0;
    for (int k = 0; k < seeds; ++k) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(k);
      auto o = run_one(problem.get(), settings, seed);
      const double b = o.log_z - *o.truth;
      biases.push_back(b);
      sk += o.sigma_kl;
      runs << name << ',' << seed << ',' << fmt(o.log_z, 10) << ',' << fmt(*o.truth, 10) << ',' << fmt(b, 10) << ','
           << fmt(o.sigma_kl) << ',' << o.calls << '\n';
      progress(c, name + " seed=" + std::to_string(seed) + " bias=" + fmt(b, 4));
    }
    const auto s = stats(biases);
    table << name << ',' << seeds << ',' << fmt(s.mean) << ',' << sd_text(s) << ',' << fmt(sk / seeds) << '\n';
    rep << title << "  " << fmt(s.mean, 4) << "  " << (s.sd ? fmt(*s.sd, 4) : "-") << '\n';
  }
  rep << "\nReference values (published, not executed here):\n"
         "method                      Gaussian mixture     Funnel\n"
         "HMC                         -1.876 +- 0.527      -0.835 +- 0.257\n"
         "SMC                         -0.362 +- 0.293      -0.216 +- 0.157\n"
         "On-policy PIS-NN            -1.192 +- 0.482      -0.018 +- 0.020\n"
         "Off-policy GFlowNet TB      -0.003 +- 0.011      -0.026 +- 0.020\n"
         "On-policy GFlowNet TB       -1.301 +- 0.434      -0.012 +- 0.108\n"
         "GGNS (published)             0.029 +- 0.132      -0.051 +- 0.353\n";
  write_text(dir / "report.txt", rep.str());
  std::cout << rep.str();
  return 0;
}

// ---- torus ----------------------------------------------------------------

// Trapezoid rule on the periodic interval, box-normalized.
double torus_quadrature_1d(const ggns_problem* problem) {
  const int n = 20000;
  const double h = 2.0 * std::numbers::pi / n;
  double m = -INFINITY;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    check(ggns_problem_log_like(problem, &x, &v[i]), "torus density");
    m = std::max(m, v[i]);
  }
  double s = 0.0;
  for (double l : v) s += std::exp(l - m);
  return m + std::log(s / n);
}

struct TorusArgs {
  std::vector<int> dims{2, 4, 8, 16};
  int seeds = 5;
};

int cmd_torus(const Common& c, const TorusArgs& a) {
  auto settings = base_settings(c);
  settings["n_live"] = settings.count("n_live") ? settings["n_live"] : "200";
  make_config(settings);
  const auto dir = prepare_out(c, "torus");
  auto runs = open_out(dir / "torus_runs.csv");
  runs << "n,seed,log_z,analytic_log_z,bias,sigma_kl,d_kl,n_like_calls\n";
  auto table = open_out(dir / "torus.csv");
  table << "n,n_runs,mean_bias,std_bias,mean_sigma_kl,mean_d_kl,within_3sigma,quadrature_log_z\n";
  std::ostringstream rep;
  rep << "Torus density (sin/cos sum + c)^3 with alpha = 2, beta = 3, c = n + 1, " << a.seeds << " seeds\n\n";
  rep << "n  mean_bias  std_bias  mean_sigma_kl  mean_d_kl  |bias|<=3sigma\n";
  Series sb{"torus", {}, {}, {}};

  std::vector<int> dims = a.dims;
  if (std::find(dims.begin(), dims.end(), 1) == dims.end()) dims.insert(dims.begin(), 1);
  for (int n : dims) {
    auto problem = make_problem("torus", {{"dim", static_cast<double>(n)}});
    std::vector<double> biases;
    double sk = 0, dk = 0;
    for (int k = 0; k < a.seeds; ++k) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(k);
      auto o = run_one(problem.get(), settings, seed);
      const double b = o.log_z - *o.truth;
      biases.push_back(b);
      sk += o.sigma_kl;
      dk += o.d_kl;
      runs << n << ',' << seed << ',' << fmt(o.log_z, 10) << ',' << fmt(*o.truth, 10) << ',' << fmt(b, 10) << ','
           << fmt(o.sigma_kl) << ',' << fmt(o.d_kl) << ',' << o.calls << '\n';
      progress(c, "torus n=" + std::to_string(n) + " seed=" + std::to_string(seed) + " bias=" + fmt(b, 4));
    }
    const auto s = stats(biases);
    const double msk = sk / a.seeds;
    const std::string quad = n == 1 ? fmt(torus_quadrature_1d(problem.get()), 12) : "";
    table << n << ',' << a.seeds << ',' << fmt(s.mean) << ',' << sd_text(s) << ',' << fmt(msk) << ','
          << fmt(dk / a.seeds) << ',' << (std::abs(s.mean) <= 3.0 * msk ? "yes" : "no") << ',' << quad << '\n';
    rep << n << "  " << fmt(s.mean, 4) << "  " << (s.sd ? fmt(*s.sd, 4) : "-") << "  " << fmt(msk, 4) << "  "
        << fmt(dk / a.seeds, 4) << "  " << (std::abs(s.mean) <= 3.0 * msk ? "yes" : "no") << '\n';
    if (n == 1) rep << "   (n = 1 quadrature log Z = " << quad << ", analytic " << fmt(*analytic_log_z(problem.get()), 12) << ")\n";
    sb.x.push_back(n);
    sb.y.push_back(s.mean);
    sb.err.push_back(3.0 * msk);
  }
  rep << "\nReference (published figure): consistent normalization estimates across n; D_KL falls with n.\n";
  write_text(dir / "report.txt", rep.str());
  std::cout << rep.str();
  if (c.plot) {
    Plot p("n", "mean bias of log Z");
    p.add(sb);
    write_text(dir / "torus.svg", p.svg());
  }
  return 0;
}

// ---- modes ----------------------------------------------------------------

struct ModesArgs {
  std::vector<int> n_lives{20, 50, 100, 200};
  int seeds = 10;
  int samples = 2715;
};

int cmd_modes(const Common& c, const ModesArgs& a) {
  const auto base = base_settings(c);
  make_config(base);
  const auto dir = prepare_out(c, "modes");
  auto problem = make_problem("mixture9", {});
  const size_t n_modes = ggns_problem_mode_count(problem.get());
  const size_t dim = ggns_problem_dim(problem.get());
  std::vector<double> centers(n_modes * dim);
  for (size_t i = 0; i < n_modes; ++i) check(ggns_problem_mode_center(problem.get(), i, &centers[i * dim]), "centres");
  const double radius = ggns_problem_mode_radius(problem.get());

  auto runs = open_out(dir / "modes_runs.csv");
  runs << "n_live,clustering,seed,modes_found\n";
  auto table = open_out(dir / "modes.csv");
  table << "n_live,clustering,n_runs,mean_modes,std_modes\n";
  std::map<std::pair<int, bool>, double> means;
  for (bool clustering : {false, true}) {
    for (int n_live : a.n_lives) {
      auto s = base;
      s["n_live"] = std::to_string(n_live);
      s["clustering_enabled"] = clustering ? "true" : "false";
      std::vector<double> found;
      for (int k = 0; k < a.seeds; ++k) {
        const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(k);
        auto o = run_one(problem.get(), s, seed);
        std::vector<double> draws(static_cast<size_t>(a.samples) * dim);
        check(ggns_result_resample(o.result.get(), a.samples, seed, draws.data()), "resample");
        int count = 0;
        check(ggns_mode_coverage(draws.data(), a.samples, dim, centers.data(), n_modes, radius, &count), "coverage");
        found.push_back(count);
        runs << n_live << ',' << (clustering ? 1 : 0) << ',' << seed << ',' << count << '\n';
        progress(c, "modes n_live=" + std::to_string(n_live) + " clustering=" + (clustering ? "on" : "off") +
                        " seed=" + std::to_string(seed) + " found=" + std::to_string(count));
      }
      const auto st = stats(found);
      means[{n_live, clustering}] = st.mean;
      table << n_live << ',' << (clustering ? 1 : 0) << ',' << a.seeds << ',' << fmt(st.mean) << ',' << sd_text(st) << '\n';
    }
  }
  std::ostringstream rep;
  rep << "Modes found on the 9-component mixture (a mode counts when one of " << a.samples
      << " equally weighted draws lies within sigma of its centre), " << a.seeds << " seeds\n\n";
  rep << "clustering";
  for (int n : a.n_lives) rep << "  n_live=" << n;
  rep << '\n';
  for (bool clustering : {false, true}) {
    rep << (clustering ? "on " : "off");
    for (int n : a.n_lives) rep << "  " << fmt(means[{n, clustering}], 3);
    rep << '\n';
  }
  rep << "\nReference (published table):\n"
         "off  3.6  6.4  8.2  8.9   (n_live = 20, 50, 100, 200)\n"
         "on   4.1  6.4  8.4  9\n";
  write_text(dir / "report.txt", rep.str());
  std::cout << rep.str();
  return 0;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CliError("expected a comma-separated list of positive integers, got '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-guided nested sampling experiments"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "base seed; multi-run commands use seed, seed+1, ...");
  app.add_option("--out", common.out, std::string("output directory (default $") + kOutEnv + "/<command> or ggns_out/<command>)");
  app.add_flag("--force", common.force, "write into a non-empty output directory");
  app.add_option("--config", common.config_file, "key=value file of sampler settings");
  app.add_option("--set", common.sets, "sampler setting key=value (overrides --config)");
  app.add_option("--workers", common.workers, "threads per batch");
  app.add_flag("--plot", common.plot, "also write SVG plots");
  app.add_flag("--quiet", common.quiet, "no progress output");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "one run with full artifacts");
  run->add_option("--problem", run_args.problem, "problem name")->required();
  run->add_option("--dim", run_args.dim, "dimension");
  run->add_option("--param", run_args.params, "problem parameter key=value");

  ScalingArgs scaling_args;
  std::string scaling_dims;
  auto* scaling = app.add_subcommand("scaling", "likelihood calls and bias against dimension");
  scaling->add_option("--dims", scaling_dims, "comma-separated dimensions");
  scaling->add_option("--seeds", scaling_args.seeds, "seeds per dimension");
  scaling->add_flag("--full", scaling_args.full, "dimensions up to 128 with 10 seeds");

  int table_seeds = 10;
  auto* table = app.add_subcommand("table", "evidence bias on the mixture and funnel");
  table->add_option("--seeds", table_seeds, "runs per problem");

  TorusArgs torus_args;
  std::string torus_dims;
  auto* torus = app.add_subcommand("torus", "torus normalization error against n");
  torus->add_option("--dims", torus_dims, "comma-separated n");
  torus->add_option("--seeds", torus_args.seeds, "seeds per n");

  ModesArgs modes_args;
  std::string modes_nlive;
  auto* modes = app.add_subcommand("modes", "modes found with and without clustering");
  modes->add_option("--n-live", modes_nlive, "comma-separated live point counts");
  modes->add_option("--seeds", modes_args.seeds, "seeds per setting");
  modes->add_option("--samples", modes_args.samples, "equally weighted draws per run");

  AblateArgs ablate_args;
  std::string ablate_dims;
  auto* ablate = app.add_subcommand("ablate", "ablation sweep");
  ablate->add_option("--dims", ablate_dims, "comma-separated dimensions");
  ablate->add_option("--seeds", ablate_args.seeds, "seeds per dimension");
  ablate->add_flag("--full", ablate_args.full, "dimensions 4 to 64");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(common, run_args);
    if (scaling->parsed()) {
      if (!scaling_dims.empty()) scaling_args.dims = parse_int_list(scaling_dims);
      return cmd_scaling(common, scaling_args);
    }
    if (table->parsed()) return cmd_table(common, table_seeds);
    if (torus->parsed()) {
      if (!torus_dims.empty()) torus_args.dims = parse_int_list(torus_dims);
      return cmd_torus(common, torus_args);
    }
    if (modes->parsed()) {
      if (!modes_nlive.empty()) modes_args.n_lives = parse_int_list(modes_nlive);
      return cmd_modes(common, modes_args);
    }
    if (ablate->parsed()) {
      if (!ablate_dims.empty()) ablate_args.dims = parse_int_list(ablate_dims);
      return cmd_ablate(common, ablate_args);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
