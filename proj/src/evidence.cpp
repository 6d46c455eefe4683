#include "ggns/evidence.hpp"

#include <cmath>
#include <stdexcept>

#include "ggns/logmath.hpp"

namespace ggns {

void assign_dead_volumes(std::span<DeadPoint> dead, std::span<const KillRecord> kills) {
  if (dead.size() != kills.size())
    throw std::invalid_argument("assign_dead_volumes: archive and kill records differ in length");
  for (std::size_t i = 0; i < dead.size(); ++i) {
    const double n = static_cast<double>(kills[i].n);
    dead[i].log_x = kills[i].log_x_before + std::log(n) - std::log(n + 1.0);
    dead[i].log_w = kills[i].log_x_before - std::log(n + 1.0);
  }
}

namespace {

double archive_log_z(const NSResult& r) {
  std::vector<double> terms(r.dead.size());
  for (std::size_t i = 0; i < r.dead.size(); ++i) terms[i] = r.dead[i].log_like + r.dead[i].log_w;
  return log_sum_exp(terms);
}

}  // namespace

std::vector<double> posterior_weights(const NSResult& result) {
  if (result.dead.empty()) throw std::invalid_argument("posterior_weights: empty archive");
  const double lz = archive_log_z(result);
  if (!std::isfinite(lz)) throw std::invalid_argument("posterior_weights: all weights are zero");
  std::vector<double> w(result.dead.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::exp(result.dead[i].log_like + result.dead[i].log_w - lz);
  return w;
}

double kl_divergence(const NSResult& result) {
  const auto w = posterior_weights(result);
  const double lz = archive_log_z(result);
  double kl = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) kl += w[i] * (result.dead[i].log_like - lz);
  return kl;
}

LogEvidence log_evidence(const NSResult& result) {
  if (result.dead.empty()) throw std::invalid_argument("log_evidence: empty archive");
  if (!std::isfinite(result.log_z)) throw std::invalid_argument("log_evidence: zero evidence");
  LogEvidence e;
  e.log_z = result.log_z;
  // Var(Z) / Z^2 = E[Z^2] / E[Z]^2 - 1
  const double rel_var = std::expm1(result.log_z2 - 2.0 * result.log_z);
  e.sigma_moments = std::sqrt(std::max(0.0, rel_var));
  e.sigma_kl = std::sqrt(std::max(0.0, result.d_kl) / static_cast<double>(result.n_live));
  return e;
}

void finalize_evidence(NSResult& result) {
  result.d_kl = kl_divergence(result);
  const auto e = log_evidence(result);
  result.log_z_err_moments = e.sigma_moments;
  result.log_z_err_kl = e.sigma_kl;
}

double effective_sample_size(const NSResult& result) {
  const auto w = posterior_weights(result);
  double s2 = 0.0;
  for (double x : w) s2 += x * x;
  return 1.0 / s2;
}

Point posterior_mean(const NSResult& result) {
  const auto w = posterior_weights(result);
  Point mean(result.dim, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < result.dim; ++j) mean[j] += w[i] * result.dead[i].theta[j];
  return mean;
}

std::vector<Point> resample_equal(const NSResult& result, std::size_t count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("resample_equal: count must be >= 1");
  const auto w = posterior_weights(result);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(result.dead[pick(rng)].theta);
  return out;
}

int mode_coverage(std::span<const Point> samples, std::span<const Point> centers, double radius) {
  if (centers.empty()) throw std::invalid_argument("mode_coverage: no centres");
  if (!(radius > 0.0)) throw std::invalid_argument("mode_coverage: radius must be positive");
  const double r2 = radius * radius;
  int found = 0;
  for (const auto& c : centers) {
    for (const auto& s : samples) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) d2 += (s[j] - c[j]) * (s[j] - c[j]);
      if (d2 <= r2) {
        ++found;
        break;
      }
    }
  }
  return found;
}

}  // namespace ggns
