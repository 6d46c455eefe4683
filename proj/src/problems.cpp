#include "ggns/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "ggns/logmath.hpp"

namespace ggns {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLogTwoPi = 1.8378770664093453;  // log(2 pi)

std::vector<double> filled(std::size_t n, double v) { return std::vector<double>(n, v); }

// P(a < Z < b) for a standard normal, accurate in both tails.
double normal_interval(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
  return 1.0 - 0.5 * std::erfc(-a / std::numbers::sqrt2) - 0.5 * std::erfc(b / std::numbers::sqrt2);
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// --- Gaussian -----------------------------------------------------------------

class GaussianProblem final : public Problem {
 public:
  GaussianProblem(std::size_t dim, double sigma, double half_width)
      : Problem("gaussian", filled(dim, -half_width), filled(dim, half_width)),
        sigma_(sigma),
        inv_var_(1.0 / (sigma * sigma)),
        norm_(-0.5 * static_cast<double>(dim) * (kLogTwoPi + 2.0 * std::log(sigma))),
        log_z_(static_cast<double>(dim) *
                   std::log(normal_interval(-half_width / sigma, half_width / sigma)) -
               log_volume()) {}

  double log_like(std::span<const double> theta) const override {
    double r2 = 0.0;
    for (double t : theta) r2 += t * t;
    return norm_ - 0.5 * r2 * inv_var_;
  }
  void grad(std::span<const double> theta, std::span<double> out) const override {
    for (std::size_t i = 0; i < theta.size(); ++i) out[i] = -theta[i] * inv_var_;
  }
  std::optional<double> analytic_log_z() const override { return log_z_; }
  std::vector<Point> mode_centers() const override { return {Point(dim(), 0.0)}; }
  double mode_radius() const override { return sigma_; }

 private:
  double sigma_;
  double inv_var_;
  double norm_;
  double log_z_;
};

// --- Funnel -------------------------------------------------------------------

class FunnelProblem final : public Problem {
 public:
  FunnelProblem(std::size_t dim, double v_sigma, double half_width)
      : Problem("funnel", filled(dim, -half_width), filled(dim, half_width)),
        v_sigma_(v_sigma) {
    log_z_ = quadrature_log_z(half_width) - log_volume();
  }

  double log_like(std::span<const double> theta) const override {
    const double v = theta[0];
    const double nx = static_cast<double>(theta.size() - 1);
    double r2 = 0.0;
    for (std::size_t i = 1; i < theta.size(); ++i) r2 += theta[i] * theta[i];
    const double log_pv = -0.5 * (kLogTwoPi + 2.0 * std::log(v_sigma_)) - 0.5 * v * v / (v_sigma_ * v_sigma_);
    return log_pv - 0.5 * nx * (kLogTwoPi + v) - 0.5 * r2 * std::exp(-v);
  }
  void grad(std::span<const double> theta, std::span<double> out) const override {
    const double v = theta[0];
    const double ev = std::exp(-v);
    const double nx = static_cast<double>(theta.size() - 1);
    double r2 = 0.0;
    for (std::size_t i = 1; i < theta.size(); ++i) {
      r2 += theta[i] * theta[i];
      out[i] = -theta[i] * ev;
    }
    out[0] = -v / (v_sigma_ * v_sigma_) - 0.5 * nx + 0.5 * r2 * ev;
  }
  std::optional<double> analytic_log_z() const override { return log_z_; }

 private:
  // log of the integral of the density over the box: the x_i integrate to
  // erf(h / sqrt(2 e^v)) each, leaving a smooth 1-D integral over v.
  double quadrature_log_z(double h) const {
    const int intervals = 20000;  // composite Simpson, even
    const double a = -h, b = h;
    const double step = (b - a) / intervals;
    const double nx = static_cast<double>(dim() - 1);
    auto f = [&](double v) {
      const double pv = std::exp(-0.5 * v * v / (v_sigma_ * v_sigma_)) /
                        (v_sigma_ * std::sqrt(kTwoPi));
      const double px = std::erf(h / (std::numbers::sqrt2 * std::exp(0.5 * v)));
      return pv * std::pow(px, nx);
    };
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * step) * ((i % 2 == 1) ? 4.0 : 2.0);
    return std::log(s * step / 3.0);
  }

  double v_sigma_;
  double log_z_ = 0.0;
};

// --- Gaussian mixture ---------------------------------------------------------

class MixtureProblem final : public Problem {
 public:
  MixtureProblem(int per_axis, double spacing, double sigma, double half_width)
      : Problem(per_axis == 3 ? "mixture9" : per_axis == 5 ? "mixture25" : "mixture",
                filled(2, -half_width), filled(2, half_width)),
        sigma_(sigma),
        inv_var_(1.0 / (sigma * sigma)) {
    const double offset = 0.5 * (per_axis - 1) * spacing;
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        centers_.push_back({i * spacing - offset, j * spacing - offset});
    const double k = static_cast<double>(centers_.size());
    log_norm_ = -std::log(k) - (kLogTwoPi + 2.0 * std::log(sigma));

    double mass = 0.0;
    for (const auto& c : centers_) {
      double m = 1.0;
      for (std::size_t d = 0; d < 2; ++d)
        m *= normal_interval((-half_width - c[d]) / sigma, (half_width - c[d]) / sigma);
      mass += m / k;
    }
    log_z_ = std::log(mass) - log_volume();
  }

  double log_like(std::span<const double> theta) const override {
    std::array<double, 64> terms;
    const std::span<double> t(terms.data(), centers_.size());
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      const double dx = theta[0] - centers_[k][0];
      const double dy = theta[1] - centers_[k][1];
      t[k] = -0.5 * (dx * dx + dy * dy) * inv_var_;
    }
    return log_norm_ + log_sum_exp(t);
  }

  void grad(std::span<const double> theta, std::span<double> out) const override {
    double m = kNegInf;
    std::array<double, 64> t;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      const double dx = theta[0] - centers_[k][0];
      const double dy = theta[1] - centers_[k][1];
      t[k] = -0.5 * (dx * dx + dy * dy) * inv_var_;
      m = std::max(m, t[k]);
    }
    double wsum = 0.0, gx = 0.0, gy = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      const double w = std::exp(t[k] - m);
      wsum += w;
      gx += w * (centers_[k][0] - theta[0]);
      gy += w * (centers_[k][1] - theta[1]);
    }
    out[0] = gx * inv_var_ / wsum;
    out[1] = gy * inv_var_ / wsum;
  }

  std::optional<double> analytic_log_z() const override { return log_z_; }
  std::vector<Point> mode_centers() const override { return centers_; }
  double mode_radius() const override { return sigma_; }

 private:
  double sigma_;
  double inv_var_;
  double log_norm_ = 0.0;
  double log_z_ = 0.0;
  std::vector<Point> centers_;
};

// --- Torus --------------------------------------------------------------------

class TorusProblem final : public Problem {
 public:
  TorusProblem(std::size_t n, double alpha, double beta, double c)
      : Problem("torus", filled(n, 0.0), filled(n, kTwoPi), /*periodic=*/true),
        alpha_(alpha),
        beta_(beta),
        c_(c),
        log_z_(torus_log_norm(n, alpha, beta, c) - log_volume()) {}

  double log_like(std::span<const double> theta) const override { return 3.0 * std::log(base(theta)); }

  void grad(std::span<const double> theta, std::span<double> out) const override {
    const double s = 3.0 / base(theta);
    for (std::size_t i = 0; i < theta.size(); ++i)
      out[i] = (i % 2 == 0) ? s * alpha_ * std::cos(alpha_ * theta[i])
                            : -s * beta_ * std::sin(beta_ * theta[i]);
  }

  std::optional<double> analytic_log_z() const override { return log_z_; }

 private:
  double base(std::span<const double> theta) const {
    double s = c_;
    for (std::size_t i = 0; i < theta.size(); ++i)
      s += (i % 2 == 0) ? std::sin(alpha_ * theta[i]) : std::cos(beta_ * theta[i]);
    return s;
  }

  double alpha_, beta_, c_;
  double log_z_;
};

// --- Flat ---------------------------------------------------------------------

class FlatProblem final : public Problem {
 public:
  FlatProblem(std::size_t dim, double level, double half_width)
      : Problem("flat", filled(dim, -half_width), filled(dim, half_width)), level_(level) {}

  double log_like(std::span<const double>) const override { return level_; }
  void grad(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
  std::optional<double> analytic_log_z() const override { return level_; }

 private:
  double level_;
};

// --- Custom -------------------------------------------------------------------

class CustomProblem final : public Problem {
 public:
  CustomProblem(std::string name, std::vector<double> lower, std::vector<double> upper,
                LogLikeFn log_like, GradFn grad, bool periodic)
      : Problem(std::move(name), std::move(lower), std::move(upper), periodic),
        log_like_(std::move(log_like)),
        grad_(std::move(grad)) {
    require(static_cast<bool>(log_like_), "custom problem needs a log-likelihood");
  }

  double log_like(std::span<const double> theta) const override { return log_like_(theta); }
  void grad(std::span<const double> theta, std::span<double> out) const override {
    if (grad_)
      grad_(theta, out);
    else
      finite_difference_grad(log_like_, theta, out);
  }

 private:
  LogLikeFn log_like_;
  GradFn grad_;
};

}  // namespace

// --- Problem base -------------------------------------------------------------

Problem::Problem(std::string name, std::vector<double> lower, std::vector<double> upper,
                 bool periodic)
    : name_(std::move(name)), lower_(std::move(lower)), upper_(std::move(upper)), periodic_(periodic) {
  require(!lower_.empty(), "problem dimension must be positive");
  require(lower_.size() == upper_.size(), "prior box bounds differ in length");
  log_volume_ = 0.0;
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    require(std::isfinite(lower_[i]) && std::isfinite(upper_[i]) && lower_[i] < upper_[i],
            "prior box needs finite bounds with lower < upper");
    log_volume_ += std::log(upper_[i] - lower_[i]);
  }
}

bool Problem::contains(std::span<const double> theta) const {
  if (theta.size() != dim()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (!(theta[i] >= lower_[i] && theta[i] <= upper_[i])) return false;
  return true;
}

void finite_difference_grad(const std::function<double(std::span<const double>)>& f,
                            std::span<const double> theta, std::span<double> out) {
  std::vector<double> x(theta.begin(), theta.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(theta[i]));
    x[i] = theta[i] + h;
    const double fp = f(x);
    x[i] = theta[i] - h;
    const double fm = f(x);
    x[i] = theta[i];
    out[i] = (fp - fm) / (2.0 * h);
  }
}

ProblemPtr make_gaussian(std::size_t dim, double sigma, double half_width) {
  require(dim >= 1, "gaussian: dim must be >= 1");
  require(sigma > 0 && half_width > 0, "gaussian: sigma and half_width must be positive");
  return std::make_shared<GaussianProblem>(dim, sigma, half_width);
}

ProblemPtr make_funnel(std::size_t dim, double v_sigma, double half_width) {
  require(dim >= 2, "funnel: dim must be >= 2");
  require(v_sigma > 0 && half_width > 0, "funnel: v_sigma and half_width must be positive");
  return std::make_shared<FunnelProblem>(dim, v_sigma, half_width);
}

ProblemPtr make_gaussian_mixture(int per_axis, double spacing, double sigma, double half_width) {
  require(per_axis >= 1 && per_axis <= 8, "mixture: per_axis must be in [1, 8]");
  require(spacing > 0 && sigma > 0 && half_width > 0, "mixture: parameters must be positive");
  return std::make_shared<MixtureProblem>(per_axis, spacing, sigma, half_width);
}

ProblemPtr make_torus(std::size_t n, double alpha, double beta, std::optional<double> c) {
  require(n >= 1, "torus: n must be >= 1");
  const double cv = c.value_or(static_cast<double>(n) + 1.0);
  require(cv > static_cast<double>(n), "torus: offset c must exceed n");
  auto is_int = [](double x) { return x != 0.0 && std::round(x) == x; };
  require(is_int(alpha) && is_int(beta),
          "torus: closed-form normalization needs non-zero integer frequencies");
  return std::make_shared<TorusProblem>(n, alpha, beta, cv);
}

ProblemPtr make_flat(std::size_t dim, double level, double half_width) {
  require(dim >= 1 && half_width > 0, "flat: dim >= 1 and half_width > 0 required");
  return std::make_shared<FlatProblem>(dim, level, half_width);
}

ProblemPtr make_custom(std::string name, std::vector<double> lower, std::vector<double> upper,
                       LogLikeFn log_like, GradFn grad, bool periodic) {
  return std::make_shared<CustomProblem>(std::move(name), std::move(lower), std::move(upper),
                                         std::move(log_like), std::move(grad), periodic);
}

double torus_log_norm(std::size_t n, double /*alpha*/, double /*beta*/, double c) {
  require(n >= 1, "torus_log_norm: n must be >= 1");
  require(c > 0.0, "torus_log_norm: c must be positive");
  // Run the recursion on z_n = Z_n / (2 pi)^n so large n cannot overflow:
  // z_n = z_{n-1} + 3c/2, z_1 = c^3 + 3c/2.
  double z = c * c * c + 1.5 * c;
  for (std::size_t k = 2; k <= n; ++k) z += 1.5 * c;
  return static_cast<double>(n) * std::log(kTwoPi) + std::log(z);
}

std::vector<Point> sample_prior(const Problem& problem, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out(count, Point(problem.dim()));
  for (auto& p : out)
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = problem.lower()[i] + (problem.upper()[i] - problem.lower()[i]) * u(rng);
  return out;
}

// --- Linear-Gaussian ----------------------------------------------------------

struct LinearGaussianProblem::Impl {
  Eigen::MatrixXd precision;  // posterior precision
  Eigen::VectorXd mean;       // posterior mean
  double log_peak = 0.0;      // log density at the posterior mean
  Eigen::MatrixXd forward;
  Eigen::VectorXd data;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;
  double noise_sigma = 0.0;
};

namespace {

double log_normal_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                          const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const Eigen::VectorXd r = llt.matrixL().solve(x - mu);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLogTwoPi + log_det + r.squaredNorm());
}

std::vector<std::array<double, 2>> pixel_grid(std::size_t n) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  std::vector<std::array<double, 2>> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (side * side == n)
      pos[i] = {static_cast<double>(i % side), static_cast<double>(i / side)};
    else
      pos[i] = {static_cast<double>(i), 0.0};
  }
  return pos;
}

}  // namespace

LinearGaussianProblem::LinearGaussianProblem(const LinearGaussianOptions& o)
    : Problem("linear_gaussian", filled(o.dim, o.prior_mean - o.half_width),
              filled(o.dim, o.prior_mean + o.half_width)),
      impl_(std::make_unique<Impl>()) {
  require(o.noise_sigma > 0 && o.prior_sigma > 0 && o.length_scale > 0 && o.blur_width > 0,
          "linear_gaussian: scales must be positive");
  const auto d = static_cast<Eigen::Index>(o.dim);
  const auto m = static_cast<Eigen::Index>(o.n_obs == 0 ? o.dim : o.n_obs);
  const auto pix = pixel_grid(o.dim);

  Eigen::MatrixXd prior_cov(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double dx = pix[i][0] - pix[j][0], dy = pix[i][1] - pix[j][1];
      prior_cov(i, j) = o.prior_sigma * o.prior_sigma *
                        std::exp(-0.5 * (dx * dx + dy * dy) / (o.length_scale * o.length_scale));
    }
  prior_cov.diagonal().array() += 1e-3 * o.prior_sigma * o.prior_sigma;

  // Row-normalized Gaussian blur; observation k samples pixel k mod d.
  Eigen::MatrixXd forward(m, d);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& c = pix[static_cast<std::size_t>(k % d)];
    double row = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double dx = c[0] - pix[j][0], dy = c[1] - pix[j][1];
      forward(k, j) = std::exp(-0.5 * (dx * dx + dy * dy) / (o.blur_width * o.blur_width));
      row += forward(k, j);
    }
    forward.row(k) /= row;
  }

  Rng rng(o.data_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
  const Eigen::VectorXd mu0 = Eigen::VectorXd::Constant(d, o.prior_mean);
  Eigen::LLT<Eigen::MatrixXd> prior_llt(prior_cov);
  const Eigen::VectorXd truth = mu0 + prior_llt.matrixL() * z;
  Eigen::VectorXd y = forward * truth;
  for (Eigen::Index k = 0; k < m; ++k) y(k) += o.noise_sigma * normal(rng);

  const Eigen::MatrixXd prior_prec = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const double inv_noise2 = 1.0 / (o.noise_sigma * o.noise_sigma);
  Eigen::MatrixXd precision = forward.transpose() * forward * inv_noise2 + prior_prec;
  precision = 0.5 * (precision + precision.transpose());
  Eigen::LLT<Eigen::MatrixXd> post_llt(precision);
  if (post_llt.info() != Eigen::Success) throw NumericalError("linear_gaussian: singular posterior");
  const Eigen::VectorXd mean =
      post_llt.solve(forward.transpose() * y * inv_noise2 + prior_prec * mu0);
  const Eigen::MatrixXd post_cov = post_llt.solve(Eigen::MatrixXd::Identity(d, d));

  impl_->precision = precision;
  impl_->mean = mean;
  impl_->forward = forward;
  impl_->data = y;
  impl_->prior_mean = mu0;
  impl_->prior_cov = prior_cov;
  impl_->noise_sigma = o.noise_sigma;
  impl_->log_peak =
      log_normal_density(y, forward * mean, Eigen::MatrixXd::Identity(m, m) / inv_noise2) +
      log_normal_density(mean, mu0, prior_cov);

  // Posterior route: the density is exactly log_peak - q/2 with q the
  // precision quadratic form, so its integral is Gaussian.
  const double log_det_prec = 2.0 * post_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  log_z_ = impl_->log_peak + 0.5 * static_cast<double>(d) * kLogTwoPi - 0.5 * log_det_prec -
           log_volume();

  post_mean_.assign(mean.data(), mean.data() + d);
  post_std_.resize(o.dim);
  truth_.assign(truth.data(), truth.data() + d);
  for (Eigen::Index i = 0; i < d; ++i) {
    post_std_[i] = std::sqrt(post_cov(i, i));
    // The closed form ignores the box; make sure truncation is negligible.
    require(std::abs(mean(i) - o.prior_mean) + 10.0 * post_std_[i] < o.half_width,
            "linear_gaussian: box too small for the posterior");
  }
}

LinearGaussianProblem::~LinearGaussianProblem() = default;

double LinearGaussianProblem::log_like(std::span<const double> theta) const {
  const auto d = static_cast<Eigen::Index>(theta.size());
  const Eigen::Map<const Eigen::VectorXd> x(theta.data(), d);
  const Eigen::VectorXd r = x - impl_->mean;
  return impl_->log_peak - 0.5 * r.dot(impl_->precision * r);
}

void LinearGaussianProblem::grad(std::span<const double> theta, std::span<double> out) const {
  const auto d = static_cast<Eigen::Index>(theta.size());
  const Eigen::Map<const Eigen::VectorXd> x(theta.data(), d);
  Eigen::Map<Eigen::VectorXd> g(out.data(), d);
  g.noalias() = -(impl_->precision * (x - impl_->mean));
}

double LinearGaussianProblem::log_z_from_marginal() const {
  const auto& im = *impl_;
  const Eigen::Index m = im.data.size();
  const Eigen::MatrixXd cov = im.forward * im.prior_cov * im.forward.transpose() +
                              im.noise_sigma * im.noise_sigma * Eigen::MatrixXd::Identity(m, m);
  return log_normal_density(im.data, im.forward * im.prior_mean, cov) - log_volume();
}

std::shared_ptr<const LinearGaussianProblem> make_linear_gaussian(const LinearGaussianOptions& options) {
  require(options.dim >= 1, "linear_gaussian: dim must be >= 1");
  return std::make_shared<LinearGaussianProblem>(options);
}

// --- Registry -----------------------------------------------------------------

namespace {

class Params {
 public:
  Params(std::string problem, const std::map<std::string, double>& p) : problem_(std::move(problem)), p_(p) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = p_.find(key);
    return it == p_.end() ? fallback : it->second;
  }
  std::optional<double> maybe(const std::string& key) {
    used_.insert(key);
    auto it = p_.find(key);
    if (it == p_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t count(const std::string& key, double fallback) {
    const double v = get(key, fallback);
    require(v >= 1 && std::round(v) == v, problem_ + ": " + key + " must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  void finish() const {
    for (const auto& [k, v] : p_)
      require(used_.count(k) > 0, problem_ + ": unknown parameter '" + k + "'");
  }

 private:
  std::string problem_;
  const std::map<std::string, double>& p_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<std::string> builtin_problem_names() {
  return {"gaussian", "funnel", "mixture9", "mixture25", "torus", "linear_gaussian", "flat"};
}

ProblemPtr make_problem(const std::string& name, const std::map<std::string, double>& params) {
  Params p(name, params);
  ProblemPtr out;
  if (name == "gaussian") {
    const auto dim = p.count("dim", 2);
    out = make_gaussian(dim, p.get("sigma", 1.0), p.get("half_width", 10.0));
  } else if (name == "funnel") {
    const auto dim = p.count("dim", 10);
    out = make_funnel(dim, p.get("v_sigma", 3.0), p.get("half_width", 10.0));
  } else if (name == "mixture9") {
    out = make_gaussian_mixture(3, p.get("spacing", 5.0), p.get("sigma", 0.3), p.get("half_width", 10.0));
  } else if (name == "mixture25") {
    out = make_gaussian_mixture(5, p.get("spacing", 5.0), p.get("sigma", std::sqrt(0.3)),
                                p.get("half_width", 15.0));
  } else if (name == "torus") {
    const auto n = p.count("dim", 2);
    out = make_torus(n, p.get("alpha", 2.0), p.get("beta", 3.0), p.maybe("c"));
  } else if (name == "linear_gaussian") {
    LinearGaussianOptions o;
    o.dim = p.count("dim", 64);
    o.n_obs = static_cast<std::size_t>(p.get("n_obs", 0.0));
    o.noise_sigma = p.get("noise_sigma", o.noise_sigma);
    o.prior_sigma = p.get("prior_sigma", o.prior_sigma);
    o.prior_mean = p.get("prior_mean", o.prior_mean);
    o.length_scale = p.get("length_scale", o.length_scale);
    o.blur_width = p.get("blur_width", o.blur_width);
    o.half_width = p.get("half_width", o.half_width);
    o.data_seed = static_cast<std::uint64_t>(p.get("data_seed", static_cast<double>(o.data_seed)));
    out = make_linear_gaussian(o);
  } else if (name == "flat") {
    const auto dim = p.count("dim", 2);
    out = make_flat(dim, p.get("level", 0.0), p.get("half_width", 1.0));
  } else {
    throw std::invalid_argument("unknown problem '" + name + "'");
  }
  p.finish();
  return out;
}

}  // namespace ggns
