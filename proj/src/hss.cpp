#include "ggns/hss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ggns/parallel.hpp"

namespace ggns {

void TrajectoryBuffer::add(std::span<const double> position, double log_like) {
  if (log_likes_.empty()) dim_ = position.size();
  positions_.insert(positions_.end(), position.begin(), position.end());
  log_likes_.push_back(log_like);
}

void TrajectoryBuffer::clear() {
  positions_.clear();
  log_likes_.clear();
}

std::span<const double> TrajectoryBuffer::position(std::size_t i) const {
  return {positions_.data() + i * dim_, dim_};
}

std::size_t TrajectoryBuffer::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, log_likes_.size() - 1);
  return pick(rng);
}

StepCounters& StepCounters::operator+=(const StepCounters& o) {
  in_steps += o.in_steps;
  out_steps += o.out_steps;
  like_calls += o.like_calls;
  reflections += o.reflections;
  wall_hits += o.wall_hits;
  zero_gradients += o.zero_gradients;
  prunes += o.prunes;
  restarts += o.restarts;
  return *this;
}

double StepCounters::out_frac() const {
  const auto total = in_steps + out_steps;
  return total == 0 ? 0.0 : static_cast<double>(out_steps) / static_cast<double>(total);
}

bool reflect(std::span<double> momentum, std::span<const double> grad) {
  double norm2 = 0.0;
  for (double g : grad) norm2 += g * g;
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  double pn = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) pn += momentum[i] * grad[i] * inv;
  for (std::size_t i = 0; i < grad.size(); ++i) momentum[i] -= 2.0 * pn * grad[i] * inv;
  return true;
}

void draw_momentum(std::span<double> momentum, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& p : momentum) p = normal(rng);
}

namespace {

// Moves x by p*dt inside the box. Non-periodic walls reflect specularly and
// flip the matching momentum component. Returns true if a wall was hit.
bool advance_in_box(std::span<double> x, std::span<double> p, double dt, const Problem& problem) {
  bool hit = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = problem.lower()[i], hi = problem.upper()[i];
    const double width = hi - lo;
    double xi = x[i] + p[i] * dt;
    if (problem.periodic()) {
      xi = lo + std::fmod(xi - lo, width);
      if (xi < lo) xi += width;
      if (xi >= hi) xi = lo;
    } else {
      while (xi < lo || xi > hi) {
        hit = true;
        xi = xi < lo ? 2.0 * lo - xi : 2.0 * hi - xi;
        p[i] = -p[i];
      }
    }
    x[i] = xi;
  }
  return hit;
}

}  // namespace

void step_particle(Particle& particle, const Problem& problem, double barrier, double dt,
                   double delta_p, MomentumNoise noise, Rng& rng, StepCounters& counters,
                   std::span<double> scratch) {
  if (advance_in_box(particle.position, particle.momentum, dt, problem)) {
    ++particle.num_reflections;
    ++counters.wall_hits;
  }

  particle.log_like = problem.log_like(particle.position);
  ++counters.like_calls;
  if (std::isnan(particle.log_like))
    throw NumericalError("likelihood returned NaN during slice sampling");
  particle.outside = particle.log_like < barrier;

  if (particle.outside) {
    ++counters.out_steps;
    ++particle.steps_outside;
    problem.grad(particle.position, scratch);
    if (reflect(particle.momentum, scratch)) {
      ++particle.num_reflections;
      ++counters.reflections;
    } else {
      ++counters.zero_gradients;
    }
  } else {
    ++counters.in_steps;
    particle.steps_outside = 0;
  }

  if (delta_p != 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    if (noise == MomentumNoise::Isotropic) {
      double norm2 = 0.0;
      for (double p : particle.momentum) norm2 += p * p;
      const double scale = delta_p * std::sqrt(norm2 / static_cast<double>(particle.momentum.size()));
      for (double& p : particle.momentum) p += scale * normal(rng);
    } else {
      for (double& p : particle.momentum) p *= 1.0 + normal(rng) * delta_p;
    }
  }
}

bool prune(Particle& particle, int patience, Rng& rng) {
  if (particle.steps_outside <= patience) return false;
  particle.position = particle.origin;
  draw_momentum(particle.momentum, rng);
  particle.steps_outside = 0;
  particle.outside = false;
  return true;
}

std::size_t prune(std::span<Particle> particles, int patience, std::span<Rng> rngs) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < particles.size(); ++i) n += prune(particles[i], patience, rngs[i]) ? 1 : 0;
  return n;
}

namespace {

// One particle of a batch together with its private stream and buffer.
struct Walker {
  Particle particle;
  Rng rng;
  TrajectoryBuffer buffer;
  StepCounters counters;
  std::vector<double> scratch;
  double start_log_like = 0.0;
  std::int64_t steps = 0;
  int attempts = 0;
  Point last;          // fixed-steps mode: last in-slice position
  double last_ll = 0.0;
};

void launch(Walker& w) {
  w.particle.position = w.particle.origin;
  w.particle.log_like = w.start_log_like;
  w.particle.num_reflections = 0;
  w.particle.outside = false;
  w.particle.steps_outside = 0;
  draw_momentum(w.particle.momentum, w.rng);
  w.buffer.clear();
  w.steps = 0;
}

void advance(Walker& w, const Problem& problem, double barrier, const HssSettings& s, double dt) {
  step_particle(w.particle, problem, barrier, dt, s.delta_p, s.noise, w.rng, w.counters, w.scratch);
  ++w.steps;
  if (!w.particle.outside && w.particle.num_reflections >= s.min_ref)
    w.buffer.add(w.particle.position, w.particle.log_like);
  if (prune(w.particle, s.prune_patience, w.rng)) ++w.counters.prunes;
}

// Runs until max_ref reflections (or the step cap), restarting while the
// buffer stays empty.
void run_to_max_ref(Walker& w, std::size_t index, const Problem& problem, double barrier,
                    const HssSettings& s, double dt) {
  for (;;) {
    while (w.particle.num_reflections < s.max_ref && w.steps < s.max_steps)
      advance(w, problem, barrier, s, dt);
    if (!w.buffer.empty()) return;
    if (w.attempts >= s.max_restarts)
      throw NumericalError("slice sampler: particle " + std::to_string(index) +
                           " stored no in-slice points after " + std::to_string(w.attempts) +
                           " restarts");
    ++w.attempts;
    ++w.counters.restarts;
    launch(w);
  }
}

void run_fixed(Walker& w, const Problem& problem, double barrier, const HssSettings& s, double dt) {
  w.last = w.particle.origin;
  w.last_ll = w.start_log_like;
  for (int k = 0; k < s.fixed_steps; ++k) {
    step_particle(w.particle, problem, barrier, dt, s.delta_p, s.noise, w.rng, w.counters, w.scratch);
    if (!w.particle.outside) {
      w.last = w.particle.position;
      w.last_ll = w.particle.log_like;
    }
    if (prune(w.particle, s.prune_patience, w.rng)) ++w.counters.prunes;
  }
}

}  // namespace

EvolveResult evolve_batch(std::span<const Point> starts, std::span<const double> start_log_likes,
                          double barrier, const Problem& problem, const HssSettings& settings,
                          double dt, std::uint64_t stream_seed, unsigned workers) {
  if (starts.size() != start_log_likes.size())
    throw std::invalid_argument("evolve_batch: starts and log-likelihoods differ in length");
  if (settings.fixed_steps <= 0 && !(settings.min_ref < settings.max_ref))
    throw std::invalid_argument("evolve_batch: min_ref must be below max_ref");
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_batch: dt must be positive");

  const std::size_t n = starts.size();
  const std::size_t d = problem.dim();
  std::vector<Walker> walkers(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& w = walkers[i];
    w.rng = make_stream(stream_seed, i);
    w.particle.origin.assign(starts[i].begin(), starts[i].end());
    w.particle.momentum.resize(d);
    w.scratch.resize(d);
    w.start_log_like = start_log_likes[i];
  }

  EvolveResult result;
  result.points.reserve(n);
  result.log_likes.reserve(n);

  if (settings.fixed_steps > 0) {
    parallel_for(n, workers, [&](std::size_t i) {
      launch(walkers[i]);
      run_fixed(walkers[i], problem, barrier, settings, dt);
    });
    for (auto& w : walkers) {
      result.points.push_back(std::move(w.last));
      result.log_likes.push_back(w.last_ll);
      result.counters += w.counters;
    }
    result.out_frac = result.counters.out_frac();
    return result;
  }

  parallel_for(n, workers, [&](std::size_t i) {
    launch(walkers[i]);
    run_to_max_ref(walkers[i], i, problem, barrier, settings, dt);
  });

  if (settings.batch_mode != BatchMode::Independent) {
    // Every particle keeps moving until the slowest one has finished.
    std::int64_t horizon = 0;
    for (const auto& w : walkers) horizon = std::max(horizon, w.steps);
    parallel_for(n, workers, [&](std::size_t i) {
      auto& w = walkers[i];
      while (w.steps < horizon) advance(w, problem, barrier, settings, dt);
    });
  }

  if (settings.batch_mode == BatchMode::Pooled) {
    std::size_t total = 0;
    for (const auto& w : walkers) total += w.buffer.size();
    for (auto& w : walkers) {
      std::uniform_int_distribution<std::size_t> pick(0, total - 1);
      std::size_t k = pick(w.rng);
      const TrajectoryBuffer* src = nullptr;
      for (const auto& v : walkers) {
        if (k < v.buffer.size()) {
          src = &v.buffer;
          break;
        }
        k -= v.buffer.size();
      }
      const auto pos = src->position(k);
      result.points.emplace_back(pos.begin(), pos.end());
      result.log_likes.push_back(src->log_like(k));
    }
  } else {
    for (auto& w : walkers) {
      const std::size_t k = w.buffer.sample(w.rng);
      const auto pos = w.buffer.position(k);
      result.points.emplace_back(pos.begin(), pos.end());
      result.log_likes.push_back(w.buffer.log_like(k));
    }
  }
  for (const auto& w : walkers) result.counters += w.counters;
  result.out_frac = result.counters.out_frac();
  return result;
}

double adapt_dt(double dt, double out_frac) {
  if (out_frac > 0.15) return dt * 0.9;
  if (out_frac < 0.05) return dt * 1.1;
  return dt;
}

}  // namespace ggns
