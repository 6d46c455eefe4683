#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ggns/problems.hpp"
#include "ggns/random.hpp"

namespace ggns {

/// How a batch of particles is run and read out.
enum class BatchMode {
  Independent,   // each particle stops at its own max_ref and returns a point of its own trajectory
  Synchronized,  // all particles run until the slowest reaches max_ref; own trajectory
  Pooled,        // synchronized, and every output is drawn from the union of all trajectories
};

/// Per-step momentum perturbation.
enum class MomentumNoise {
  Isotropic,     // p += delta_p |p| / sqrt(d) * xi, xi ~ N(0, I)
  PerComponent,  // p_i *= 1 + delta_p eps_i, eps_i ~ N(0, 1)
};

/// Knobs of one batch of slice-sampling trajectories.
struct HssSettings {
  int min_ref = 1;           // trajectory points are kept once this many reflections happened
  int max_ref = 3;           // a particle stops after this many reflections
  double delta_p = 0.05;     // momentum noise scale per step
  MomentumNoise noise = MomentumNoise::Isotropic;
  int prune_patience = 20;   // consecutive outside steps before a reset to the origin
  int max_restarts = 100;    // empty-buffer restarts before giving up on a particle
  int fixed_steps = 0;       // > 0: run exactly this many steps and keep the last in-slice point
  BatchMode batch_mode = BatchMode::Pooled;
  std::int64_t max_steps = 10000;  // hard cap on steps of one trajectory attempt
};

struct Particle {
  Point position;
  Point momentum;
  double log_like = 0.0;
  int num_reflections = 0;
  bool outside = false;
  int steps_outside = 0;
  Point origin;
};

/// In-slice positions visited by one particle after its min_ref-th reflection.
class TrajectoryBuffer {
 public:
  void add(std::span<const double> position, double log_like);
  void clear();
  bool empty() const { return log_likes_.empty(); }
  std::size_t size() const { return log_likes_.size(); }
  std::span<const double> position(std::size_t i) const;
  double log_like(std::size_t i) const { return log_likes_[i]; }
  /// Index of a uniformly chosen stored point.
  std::size_t sample(Rng& rng) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> positions_;
  std::vector<double> log_likes_;
};

struct StepCounters {
  std::uint64_t in_steps = 0;
  std::uint64_t out_steps = 0;
  std::uint64_t like_calls = 0;
  std::uint64_t reflections = 0;  // iso-likelihood reflections
  std::uint64_t wall_hits = 0;    // prior-box wall reflections
  std::uint64_t zero_gradients = 0;
  std::uint64_t prunes = 0;
  std::uint64_t restarts = 0;

  StepCounters& operator+=(const StepCounters& o);
  double out_frac() const;
};

/// Specular reflection p - 2 (p.n) n with n = grad / |grad|, in place.
/// Returns false, leaving p untouched, when grad has zero (or non-finite) norm.
bool reflect(std::span<double> momentum, std::span<const double> grad);

/// Fresh N(0, 1) momentum per component.
void draw_momentum(std::span<double> momentum, Rng& rng);

/// One position update: x += p dt, box walls (or periodic wrap), likelihood
/// evaluation, reflection when outside the slice, then momentum noise. Walls
/// count as reflections. Each call is one likelihood call. `scratch` must have
/// size dim.
void step_particle(Particle& particle, const Problem& problem, double barrier, double dt,
                   double delta_p, MomentumNoise noise, Rng& rng, StepCounters& counters,
                   std::span<double> scratch);

/// Resets the particle to its origin with fresh momentum if it has spent more
/// than `patience` consecutive steps outside. Reflection count is kept.
bool prune(Particle& particle, int patience, Rng& rng);

/// Batch form; particle i uses rngs[i]. Returns the number of resets.
std::size_t prune(std::span<Particle> particles, int patience, std::span<Rng> rngs);

struct EvolveResult {
  std::vector<Point> points;
  std::vector<double> log_likes;
  StepCounters counters;
  double out_frac = 0.0;
};

/// Evolves one particle per start against the barrier and returns one new
/// in-slice point per start. Particle i draws from the stream
/// derive_seed(stream_seed, i), so output is independent of `workers`.
/// Throws NumericalError when a particle exhausts its restarts.
EvolveResult evolve_batch(std::span<const Point> starts, std::span<const double> start_log_likes,
                          double barrier, const Problem& problem, const HssSettings& settings,
                          double dt, std::uint64_t stream_seed, unsigned workers = 1);

/// Step-size controller: shrink by 0.9 above 15% outside steps, grow by 1.1
/// below 5%.
double adapt_dt(double dt, double out_frac);

}  // namespace ggns
