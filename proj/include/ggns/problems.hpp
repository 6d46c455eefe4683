#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggns/random.hpp"

namespace ggns {

using Point = std::vector<double>;

/// Raised when a density returns a non-finite value where a finite one is
/// required, or a run cannot continue for numerical reasons.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A target density over a uniform box base measure.
///
/// The "likelihood" here is the full unnormalized density: any non-uniform
/// prior is folded into it, so the evidence is
///     Z = (1 / Vol(box)) * integral over the box of exp(log_like(theta)).
/// Implementations are immutable after construction and safe to evaluate
/// from many threads at once.
class Problem {
 public:
  Problem(std::string name, std::vector<double> lower, std::vector<double> upper,
          bool periodic = false);
  virtual ~Problem() = default;

  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return lower_.size(); }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }
  /// Coordinates wrap modulo the box width instead of reflecting off walls.
  bool periodic() const { return periodic_; }
  double log_volume() const { return log_volume_; }

  virtual double log_like(std::span<const double> theta) const = 0;
  /// Score of the density, written into `out` (size dim()).
  virtual void grad(std::span<const double> theta, std::span<double> out) const = 0;

  /// log of the box-normalized evidence, when it is known in closed form.
  virtual std::optional<double> analytic_log_z() const { return std::nullopt; }
  /// Mode centres for mode-coverage counting (empty when not meaningful).
  virtual std::vector<Point> mode_centers() const { return {}; }
  /// Radius used to decide whether a mode was found.
  virtual double mode_radius() const { return 0.0; }

  bool contains(std::span<const double> theta) const;

 private:
  std::string name_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  bool periodic_;
  double log_volume_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// Central differences with h_i = 1e-5 * (1 + |theta_i|).
void finite_difference_grad(const std::function<double(std::span<const double>)>& f,
                            std::span<const double> theta, std::span<double> out);

// --- built-in problems ------------------------------------------------------

/// Isotropic normal N(0, sigma^2 I) restricted to [-half_width, half_width]^d.
ProblemPtr make_gaussian(std::size_t dim, double sigma = 1.0, double half_width = 10.0);

/// Neal's funnel: v ~ N(0, v_sigma^2), x_i | v ~ N(0, e^v), on a cube.
/// The evidence is computed by one-dimensional quadrature over v after
/// integrating the x_i analytically.
ProblemPtr make_funnel(std::size_t dim = 10, double v_sigma = 3.0, double half_width = 10.0);

/// Equal-weight mixture of isotropic 2-D normals on a square grid of
/// `per_axis` x `per_axis` centres with the given spacing, centred at 0.
ProblemPtr make_gaussian_mixture(int per_axis, double spacing, double sigma,
                                 double half_width);

/// (sum_{even i} sin(alpha x_i) + sum_{odd j} cos(beta x_j) + c)^3 on [0, 2pi)^n
/// with periodic coordinates (0-based indices). Requires c > n and non-zero
/// integer frequencies.
ProblemPtr make_torus(std::size_t n, double alpha = 2.0, double beta = 3.0,
                      std::optional<double> c = std::nullopt);

/// Constant density exp(level) on [-half_width, half_width]^d.
ProblemPtr make_flat(std::size_t dim, double level = 0.0, double half_width = 1.0);

struct LinearGaussianOptions {
  std::size_t dim = 64;            // unknowns, laid out as a square image when possible
  std::size_t n_obs = 0;           // 0 means n_obs = dim
  double noise_sigma = 0.1;
  double prior_sigma = 1.0;
  double prior_mean = 0.5;
  double length_scale = 1.5;       // squared-exponential prior correlation, in pixels
  double blur_width = 1.0;         // Gaussian blur of the forward operator, in pixels
  double half_width = 8.0;         // box is prior_mean +- half_width per coordinate
  std::uint64_t data_seed = 2024;
};

/// y = A theta + eps with eps ~ N(0, noise^2 I) and a correlated Gaussian
/// prior folded into the density. Posterior and evidence are Gaussian and
/// known exactly.
class LinearGaussianProblem final : public Problem {
 public:
  explicit LinearGaussianProblem(const LinearGaussianOptions& options);
  ~LinearGaussianProblem() override;

  double log_like(std::span<const double> theta) const override;
  void grad(std::span<const double> theta, std::span<double> out) const override;
  std::optional<double> analytic_log_z() const override { return log_z_; }

  const std::vector<double>& posterior_mean() const { return post_mean_; }
  const std::vector<double>& posterior_std() const { return post_std_; }
  const std::vector<double>& truth() const { return truth_; }

  /// Evidence via the marginal of y, N(y; A mu0, A S0 A^T + noise^2 I),
  /// computed independently of the posterior route.
  double log_z_from_marginal() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double log_z_ = 0.0;
  std::vector<double> post_mean_;
  std::vector<double> post_std_;
  std::vector<double> truth_;
};

std::shared_ptr<const LinearGaussianProblem> make_linear_gaussian(
    const LinearGaussianOptions& options = {});

using LogLikeFn = std::function<double(std::span<const double>)>;
using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

/// User-supplied density; without a gradient the finite-difference fallback
/// is used (d extra pairs of evaluations per gradient).
ProblemPtr make_custom(std::string name, std::vector<double> lower, std::vector<double> upper,
                       LogLikeFn log_like, GradFn grad = {}, bool periodic = false);

/// Built-in problem by name with a key=value parameter table.
/// Names: gaussian, funnel, mixture9, mixture25, torus, linear_gaussian, flat.
/// Throws std::invalid_argument for unknown names or parameters.
ProblemPtr make_problem(const std::string& name, const std::map<std::string, double>& params);

std::vector<std::string> builtin_problem_names();

/// log Z_n for the torus density via the recursion
/// Z_n = 2 pi Z_{n-1} + 3 pi c (2 pi)^{n-1}, Z_1 = 2 pi c^3 + 3 pi c.
double torus_log_norm(std::size_t n, double alpha, double beta, double c);

std::vector<Point> sample_prior(const Problem& problem, std::size_t count, Rng& rng);

}  // namespace ggns
