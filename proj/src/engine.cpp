#include "ggns/engine.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ggns/clusters.hpp"
#include "ggns/hss.hpp"
#include "ggns/logmath.hpp"

namespace ggns {

void NSConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("invalid config: " + m); };
  if (n_live < 2) fail("n_live must be >= 2");
  if (!(tol > 0.0 && tol < 1.0)) fail("tol must lie in (0, 1)");
  if (min_ref < 1) fail("min_ref must be >= 1");
  if (!(min_ref < max_ref)) fail("min_ref must be below max_ref");
  if (!(delta_p >= 0.0)) fail("delta_p must be >= 0");
  if (!(dt_ini > 0.0)) fail("dt_ini must be positive");
  if (!(kill_fraction > 0.0 && kill_fraction <= 0.5)) fail("kill_fraction must lie in (0, 0.5]");
  if (prune_patience < 0) fail("prune_patience must be >= 0");
  if (fixed_steps && *fixed_steps < 1) fail("fixed_steps must be >= 1");
  if (max_restarts < 0) fail("max_restarts must be >= 0");
  if (cluster_k_cap < 1) fail("cluster_k_cap must be >= 1");
  if (max_iterations < 1) fail("max_iterations must be >= 1");
}

std::string to_string(TerminationMode mode) {
  return mode == TerminationMode::PeakRelative ? "peak_relative" : "legacy_remaining_mass";
}

std::string to_string(TerminationLike like) {
  return like == TerminationLike::Barrier ? "barrier" : "live_max";
}

std::string to_string(MomentumNoise noise) {
  return noise == MomentumNoise::Isotropic ? "isotropic" : "per_component";
}

std::string to_string(BatchMode mode) {
  switch (mode) {
    case BatchMode::Independent: return "independent";
    case BatchMode::Synchronized: return "synchronized";
    case BatchMode::Pooled: return "pooled";
  }
  return "independent";
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is not reliable on every toolchain yet
    std::size_t used = 0;
    try {
      value = static_cast<T>(std::stod(text, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + text + "'");
  } else {
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
      throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + text + "'");
}

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void set_config_value(NSConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_live") cfg.n_live = parse_number<long>(key, value);
  else if (key == "tol") cfg.tol = parse_number<double>(key, value);
  else if (key == "min_ref") cfg.min_ref = parse_number<int>(key, value);
  else if (key == "max_ref") cfg.max_ref = parse_number<int>(key, value);
  else if (key == "delta_p") cfg.delta_p = parse_number<double>(key, value);
  else if (key == "dt_ini" || key == "dt") cfg.dt_ini = parse_number<double>(key, value);
  else if (key == "kill_fraction") cfg.kill_fraction = parse_number<double>(key, value);
  else if (key == "prune_patience") cfg.prune_patience = parse_number<int>(key, value);
  else if (key == "clustering_enabled" || key == "clustering") cfg.clustering_enabled = parse_bool(key, value);
  else if (key == "adaptive_dt") cfg.adaptive_dt = parse_bool(key, value);
  else if (key == "termination_mode" || key == "termination") {
    if (value == "peak_relative") cfg.termination_mode = TerminationMode::PeakRelative;
    else if (value == "legacy_remaining_mass" || value == "legacy") cfg.termination_mode = TerminationMode::LegacyRemainingMass;
    else throw std::invalid_argument("config: unknown termination mode '" + value + "'");
  } else if (key == "termination_like") {
    if (value == "barrier") cfg.termination_like = TerminationLike::Barrier;
    else if (value == "live_max") cfg.termination_like = TerminationLike::LiveMax;
    else throw std::invalid_argument("config: unknown termination likelihood '" + value + "'");
  } else if (key == "fixed_steps") {
    const int n = parse_number<int>(key, value);
    cfg.fixed_steps = n > 0 ? std::optional<int>(n) : std::nullopt;
  } else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "max_restarts") cfg.max_restarts = parse_number<int>(key, value);
  else if (key == "cluster_k_cap") cfg.cluster_k_cap = parse_number<int>(key, value);
  else if (key == "max_iterations") cfg.max_iterations = parse_number<std::int64_t>(key, value);
  else if (key == "workers") cfg.workers = parse_number<unsigned>(key, value);
  else if (key == "batch_mode") {
    if (value == "independent") cfg.batch_mode = BatchMode::Independent;
    else if (value == "synchronized") cfg.batch_mode = BatchMode::Synchronized;
    else if (value == "pooled") cfg.batch_mode = BatchMode::Pooled;
    else throw std::invalid_argument("config: unknown batch mode '" + value + "'");
  } else if (key == "momentum_noise") {
    if (value == "isotropic") cfg.momentum_noise = MomentumNoise::Isotropic;
    else if (value == "per_component") cfg.momentum_noise = MomentumNoise::PerComponent;
    else throw std::invalid_argument("config: unknown momentum noise '" + value + "'");
  }
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> config_to_map(const NSConfig& cfg) {
  return {
      {"n_live", std::to_string(cfg.n_live)},
      {"tol", fmt_double(cfg.tol)},
      {"min_ref", std::to_string(cfg.min_ref)},
      {"max_ref", std::to_string(cfg.max_ref)},
      {"delta_p", fmt_double(cfg.delta_p)},
      {"dt_ini", fmt_double(cfg.dt_ini)},
      {"kill_fraction", fmt_double(cfg.kill_fraction)},
      {"prune_patience", std::to_string(cfg.prune_patience)},
      {"clustering_enabled", cfg.clustering_enabled ? "true" : "false"},
      {"adaptive_dt", cfg.adaptive_dt ? "true" : "false"},
      {"termination_mode", to_string(cfg.termination_mode)},
      {"termination_like", to_string(cfg.termination_like)},
      {"fixed_steps", std::to_string(cfg.fixed_steps.value_or(0))},
      {"seed", std::to_string(cfg.seed)},
      {"max_restarts", std::to_string(cfg.max_restarts)},
      {"cluster_k_cap", std::to_string(cfg.cluster_k_cap)},
      {"max_iterations", std::to_string(cfg.max_iterations)},
      {"workers", std::to_string(cfg.workers)},
      {"batch_mode", to_string(cfg.batch_mode)},
      {"momentum_noise", to_string(cfg.momentum_noise)},
  };
}

bool termination_check(TerminationMode mode, double tol, double log_x, double log_like,
                       double log_xl_max) {
  const double log_xl = log_x + log_like;
  if (mode == TerminationMode::PeakRelative) return log_xl - log_xl_max < std::log(tol);
  return log_xl < std::log(tol);
}

namespace {

struct LivePoint {
  Point theta;
  double log_like;
  int cluster;
  std::uint64_t order;  // insertion counter, breaks likelihood ties
};

void require_finite(double log_like, std::span<const double> theta) {
  if (std::isfinite(log_like)) return;
  std::ostringstream os;
  os << "non-finite log-likelihood " << log_like << " at live point (";
  for (std::size_t i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
  os << ")";
  throw NumericalError(os.str());
}

}  // namespace

NSResult run(const Problem& problem, const NSConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  NSResult result;
  result.dim = problem.dim();
  result.n_live = cfg.n_live;

  Rng rng(derive_seed(cfg.seed, 0x6d617374ULL));
  std::uint64_t order = 0;
  std::vector<LivePoint> live;
  live.reserve(static_cast<std::size_t>(cfg.n_live));
  for (auto& theta : sample_prior(problem, static_cast<std::size_t>(cfg.n_live), rng)) {
    const double ll = problem.log_like(theta);
    require_finite(ll, theta);
    live.push_back({std::move(theta), ll, 0, order++});
  }
  result.n_like_calls = static_cast<std::uint64_t>(cfg.n_live);

  ClusterMoments moments(cfg.n_live);
  std::vector<KillRecord> kills;

  HssSettings hss;
  hss.min_ref = cfg.min_ref;
  hss.max_ref = cfg.max_ref;
  hss.delta_p = cfg.delta_p;
  hss.prune_patience = cfg.prune_patience;
  hss.max_restarts = cfg.max_restarts;
  hss.fixed_steps = cfg.fixed_steps.value_or(0);
  hss.batch_mode = cfg.batch_mode;
  hss.noise = cfg.momentum_noise;

  const auto n_kill = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(cfg.n_live) * cfg.kill_fraction)));
  double dt = cfg.dt_ini;
  double log_xl_max = kNegInf;

  for (std::int64_t iteration = 1;; ++iteration) {
    // Mode separation: split any cluster whose points form several k-NN components.
    if (cfg.clustering_enabled) {
      const std::size_t n_before = moments.size();
      for (std::size_t p = 0; p < n_before; ++p) {
        const int id = moments.id(p);
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < live.size(); ++i)
          if (live[i].cluster == id) members.push_back(i);
        if (members.size() < 2) continue;
        std::vector<Point> pts;
        pts.reserve(members.size());
        for (auto i : members) pts.push_back(live[i].theta);
        const auto labels = find_clusters(pts, cfg.cluster_k_cap);
        const int parts = count_clusters(labels);
        if (parts < 2) continue;
        std::vector<long> sizes(static_cast<std::size_t>(parts), 0);
        for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
        const auto new_ids = moments.split(p, sizes);
        for (std::size_t k = 0; k < members.size(); ++k)
          live[members[k]].cluster = new_ids[static_cast<std::size_t>(labels[k])];
      }
    }

    // Kill the lowest points one at a time.
    std::sort(live.begin(), live.end(), [](const LivePoint& a, const LivePoint& b) {
      return a.log_like < b.log_like || (a.log_like == b.log_like && a.order < b.order);
    });
    double barrier = kNegInf;
    for (std::size_t j = 0; j < n_kill; ++j) {
      LivePoint& victim = live[j];
      const std::size_t p = moments.index_of(victim.cluster);
      kills.push_back({moments.log_x(p), moments.count(p)});
      moments.kill(p, victim.log_like);
      result.dead.push_back({std::move(victim.theta), victim.log_like, 0.0, 0.0, victim.cluster});
      if (moments.count(p) == 0) moments.remove(p);
      barrier = victim.log_like;
    }
    live.erase(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(n_kill));

    // Spawn: pick clusters by volume, then a surviving member of each as start.
    const auto alloc = spawn_allocation(moments, n_kill, rng);
    std::vector<std::vector<std::size_t>> members(moments.size());
    for (std::size_t i = 0; i < live.size(); ++i) members[moments.index_of(live[i].cluster)].push_back(i);
    std::vector<Point> starts;
    std::vector<double> start_ll;
    std::vector<int> start_cluster;
    starts.reserve(n_kill);
    for (auto p : alloc) {
      const auto& pool = members[p];
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const auto& src = live[pool[pick(rng)]];
      starts.push_back(src.theta);
      start_ll.push_back(src.log_like);
      start_cluster.push_back(src.cluster);
    }

    auto evolved = evolve_batch(starts, start_ll, barrier, problem, hss, dt,
                                derive_seed(cfg.seed, 0x68737300ULL, static_cast<std::uint64_t>(iteration)),
                                cfg.workers);
    result.n_like_calls += evolved.counters.like_calls;
    result.hss_totals += evolved.counters;
    for (std::size_t i = 0; i < evolved.points.size(); ++i) {
      require_finite(evolved.log_likes[i], evolved.points[i]);
      moments.add_points(moments.index_of(start_cluster[i]), 1);
      live.push_back({std::move(evolved.points[i]), evolved.log_likes[i], start_cluster[i], order++});
    }
    if (cfg.adaptive_dt) dt = adapt_dt(dt, evolved.out_frac);

    double max_ll = kNegInf;
    for (const auto& lp : live) max_ll = std::max(max_ll, lp.log_like);
    const double log_x = moments.log_x_total();
    const double stop_ll = cfg.termination_mode == TerminationMode::PeakRelative &&
                                   cfg.termination_like == TerminationLike::Barrier
                               ? barrier
                               : max_ll;
    log_xl_max = std::max(log_xl_max, log_x + stop_ll);

    IterationDiagnostics diag;
    diag.iteration = iteration;
    diag.n_clusters = static_cast<int>(moments.size());
    diag.dt = dt;
    diag.out_frac = evolved.out_frac;
    diag.log_delta_xl = log_x + stop_ll - log_xl_max;
    diag.n_like_calls = result.n_like_calls;
    diag.log_x = log_x;
    diag.barrier = barrier;
    diag.max_log_like = max_ll;
    result.trace.push_back(diag);
    if (observer) observer(diag);
    result.iterations = iteration;

    if (termination_check(cfg.termination_mode, cfg.tol, log_x, stop_ll, log_xl_max)) {
      result.stop_reason = "converged";
      break;
    }
    if (iteration >= cfg.max_iterations) {
      result.stop_reason = "max_iterations";
      break;
    }
  }

  // Per-cluster evidence found so far, then the final sweep over the live
  // points with one shared volume; n counts the points still live.
  std::map<int, double> cluster_z;
  for (const auto& [id, lz] : moments.retired()) cluster_z[id] = log_add_exp(cluster_z.count(id) ? cluster_z[id] : kNegInf, lz);
  for (std::size_t p = 0; p < moments.size(); ++p) cluster_z[moments.id(p)] = moments.log_zp(p);

  double lz = moments.log_z(), lz2 = moments.log_z2();
  double lx = moments.log_x_total(), lx2 = moments.log_x2_total(), lzx = moments.log_zx_total();
  const double log2 = std::log(2.0);
  std::sort(live.begin(), live.end(), [](const LivePoint& a, const LivePoint& b) {
    return a.log_like < b.log_like || (a.log_like == b.log_like && a.order < b.order);
  });
  long remaining = static_cast<long>(live.size());
  for (auto& lp : live) {
    const double n = static_cast<double>(remaining);
    const double ln = std::log(n), ln1 = std::log(n + 1.0), ln2 = std::log(n + 2.0);
    const double L = lp.log_like;
    kills.push_back({lx, remaining});
    const double shell = lx + L - ln1;
    cluster_z[lp.cluster] = log_add_exp(cluster_z.count(lp.cluster) ? cluster_z[lp.cluster] : kNegInf, shell);
    const double nz2 = log_add_exp(lz2, log_add_exp(log2 + lzx + L - ln1, log2 + lx2 + 2.0 * L - ln1 - ln2));
    const double nzx = log_add_exp(ln + lzx - ln1, ln + lx2 + L - ln1 - ln2);
    lz = log_add_exp(lz, shell);
    lz2 = nz2;
    lzx = nzx;
    lx = ln + lx - ln1;
    lx2 = ln + lx2 - ln2;
    --remaining;
    result.dead.push_back({std::move(lp.theta), L, 0.0, 0.0, lp.cluster});
  }
  assign_dead_volumes(result.dead, kills);

  result.log_z = lz;
  result.log_z2 = lz2;
  result.cluster_log_z.assign(cluster_z.begin(), cluster_z.end());
  result.final_dt = dt;
  finalize_evidence(result);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace ggns
