#include "hfvol/simulator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "hfvol/constants.hpp"
#include "hfvol/errors.hpp"

namespace hfvol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void validate_volatility(const VolatilityModel& vol) {
  std::visit(Overloaded{
                 [](const ConstantVol& v) {
                   if (!(v.level >= 0.0)) fail(ErrorCode::ConstraintViolation, "constant volatility c >= 0");
                 },
                 [](const SinusoidVol& v) {
                   if (!(v.base > std::abs(v.amplitude)))
                     fail(ErrorCode::ConstraintViolation, "sinusoid volatility needs base > |amplitude|");
                   if (!std::isfinite(v.frequency) || !std::isfinite(v.phase))
                     fail(ErrorCode::ConstraintViolation, "sinusoid frequency and phase finite");
                 },
                 [](const OuFieldVol& v) {
                   if (!(v.theta > 0.0)) fail(ErrorCode::ConstraintViolation, "OU field theta > 0");
                   if (!(v.eta >= 0.0)) fail(ErrorCode::ConstraintViolation, "OU field eta >= 0");
                   if (!(v.mean > 0.0)) fail(ErrorCode::ConstraintViolation, "OU field mean > 0");
                   if (!(v.length > 0.0)) fail(ErrorCode::ConstraintViolation, "OU field length > 0");
                 },
                 [](const TanhOfYVol& v) {
                   if (!(v.base > std::abs(v.amplitude)))
                     fail(ErrorCode::ConstraintViolation, "bounded volatility needs base > |amplitude|");
                 },
             },
             vol);
}

std::string volatility_kind(const VolatilityModel& vol) {
  return std::visit(Overloaded{
                        [](const ConstantVol&) { return std::string("constant"); },
                        [](const SinusoidVol&) { return std::string("sinusoid"); },
                        [](const OuFieldVol&) { return std::string("ou_field"); },
                        [](const TanhOfYVol&) { return std::string("bounded_of_y"); },
                    },
                    vol);
}

bool is_deterministic(const VolatilityModel& vol) {
  return std::holds_alternative<ConstantVol>(vol) || std::holds_alternative<SinusoidVol>(vol);
}

std::optional<double> deterministic_integrated_vol(const VolatilityModel& vol, double horizon, double w) {
  if (const auto* c = std::get_if<ConstantVol>(&vol)) return std::pow(c->level, w) * horizon;
  if (const auto* s = std::get_if<SinusoidVol>(&vol)) {
    auto f = [&](double t) {
      return std::pow(std::abs(s->base + s->amplitude * std::sin(2.0 * std::numbers::pi * s->frequency * t + s->phase)), w);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, horizon, 20, 1e-14);
  }
  return std::nullopt;
}

double InitialCondition::operator()(double x) const {
  if (is_zero()) return 0.0;
  const double z = (x - centre) / width;
  return amplitude * std::exp(-0.5 * z * z);
}

namespace {

std::size_t fine_steps_per_obs(double delta, double dt) {
  const double ratio = delta / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * ratio) fail(ErrorCode::StabilityViolation, "delta / dt must be an integer");
  return static_cast<std::size_t>(nearest);
}

// (1 - phi^k) / (1 - phi^2) for phi = 1 - u.
double ar1_increment_factor(double u, std::size_t k) {
  const double kk = static_cast<double>(k);
  if (u < 1e-12) return 0.5 * kk * (1.0 - 0.5 * (kk - 1.0) * u);
  const double phi = 1.0 - u;
  const double one_minus_phik = u < 1.0 ? -std::expm1(kk * std::log1p(-u)) : 1.0 - std::pow(phi, kk);
  return one_minus_phik / (u * (1.0 + phi));
}

double lattice_rate(const ModelParams& p, double dx, double xi) {
  const double s = std::sin(0.5 * xi * dx);
  return p.lambda + 2.0 * p.kappa / (dx * dx) * s * s;
}

}  // namespace

double fd_lattice_increment_variance(const ModelParams& p, double delta, double dt, double dx) {
  const std::size_t k = fine_steps_per_obs(delta, dt);
  auto integrand = [&](double xi) { return 2.0 * dt * ar1_increment_factor(dt * lattice_rate(p, dx, xi), k); };
  const double upper = std::numbers::pi / dx;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 25, 1e-13) /
         std::numbers::pi;
}

double fd_lattice_increment_autocovariance(const ModelParams& p, double delta, double dt, double dx, std::size_t r) {
  if (r == 0) return fd_lattice_increment_variance(p, delta, dt, dx);
  const std::size_t k = fine_steps_per_obs(delta, dt);
  auto integrand = [&](double xi) {
    const double u = dt * lattice_rate(p, dx, xi);
    const double phi = 1.0 - u;
    const double phik = std::pow(phi, static_cast<double>(k));
    const double lagged = std::pow(phi, static_cast<double>((r - 1) * k));
    return -dt * lagged * (1.0 - phik) * (1.0 - phik) / (u * (1.0 + phi));
  };
  const double upper = std::numbers::pi / dx;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 25, 1e-13) /
         std::numbers::pi;
}

double fd_unbiased_mesh_ratio(const ModelParams& p, double delta, double dt) {
  const double target = tau_sq_exact(p, delta);
  auto bias = [&](double ratio) {
    const double dx = std::sqrt(p.kappa * dt / ratio);
    return fd_lattice_increment_variance(p, delta, dt, dx) - target;
  };
  double lo = 0.02;
  double hi = 0.5;
  double f_lo = bias(lo);
  const double f_hi = bias(hi);
  if ((f_lo > 0.0) == (f_hi > 0.0)) return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = bias(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

FdGridConfig default_fd_grid(const ModelParams& p, const SamplingScheme& scheme, double burn_in) {
  FdGridConfig g;
  g.dt = scheme.delta() / 16.0;
  g.burn_in = burn_in;
  const double ratio = fd_unbiased_mesh_ratio(p, scheme.delta(), g.dt);
  double dx = std::sqrt(p.kappa * g.dt / ratio);
  if (scheme.num_sites() > 1) {
    double gap = INFINITY;
    for (std::size_t m = 1; m < scheme.num_sites(); ++m) gap = std::min(gap, scheme.site_x(m) - scheme.site_x(m - 1));
    dx = gap / std::max(1.0, std::round(gap / dx));
  }
  g.dx = dx;
  const double span = scheme.site_x(scheme.num_sites() - 1) - scheme.site_x(0);
  g.domain_length = std::max(20.0 * std::sqrt(p.kappa * (scheme.horizon() + burn_in)), 4.0 / 3.0 * span + 4.0 * dx);
  return g;
}

namespace {

struct Geometry {
  std::vector<double> x;
  std::vector<std::size_t> site_nodes;
};

Geometry build_geometry(const SamplingScheme& scheme, const FdGridConfig& grid) {
  const double s0 = scheme.site_x(0);
  const double s1 = scheme.site_x(scheme.num_sites() - 1);
  const double centre = 0.5 * (s0 + s1);
  const auto left = static_cast<std::size_t>(std::llround((s0 - (centre - 0.5 * grid.domain_length)) / grid.dx));
  const auto right = static_cast<std::size_t>(std::llround(((centre + 0.5 * grid.domain_length) - s1) / grid.dx));
  const auto inner = static_cast<std::size_t>(std::llround((s1 - s0) / grid.dx));
  Geometry g;
  const std::size_t count = left + inner + right + 1;
  g.x.resize(count);
  for (std::size_t j = 0; j < count; ++j) g.x[j] = s0 + (static_cast<double>(j) - static_cast<double>(left)) * grid.dx;
  for (std::size_t m = 0; m < scheme.num_sites(); ++m) {
    const double pos = (scheme.site_x(m) - s0) / grid.dx;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) > 1e-6) {
      fail(ErrorCode::StabilityViolation, "site x=" + fmt(scheme.site_x(m)) + " does not lie on the spatial grid");
    }
    g.site_nodes.push_back(left + static_cast<std::size_t>(nearest));
  }
  return g;
}

}  // namespace

void validate_fd_grid(const ModelParams& p, const SamplingScheme& scheme, const FdGridConfig& grid) {
  validate_params_allow_zero_lambda(p);
  if (p.noise_kind != NoiseKind::WhiteNoise || p.dim != 1)
    fail(ErrorCode::UnsupportedSpec, "the finite-difference simulator supports d = 1 white noise only");
  if (scheme.site_dim() != 1) fail(ErrorCode::UnsupportedSpec, "the finite-difference simulator needs sites on a line");
  if (!(grid.dt > 0.0) || !(grid.dx > 0.0) || !(grid.domain_length > 0.0))
    fail(ErrorCode::StabilityViolation, "dt, dx and domain_length must be > 0");
  if (!(grid.burn_in >= 0.0)) fail(ErrorCode::StabilityViolation, "burn_in >= 0");
  if (grid.dt > scheme.delta() / 8.0 * (1.0 + 1e-12)) fail(ErrorCode::StabilityViolation, "dt <= delta / 8");
  fine_steps_per_obs(scheme.delta(), grid.dt);
  const double ratio = p.kappa * grid.dt / (grid.dx * grid.dx);
  if (ratio > 0.5 + 1e-12)
    fail(ErrorCode::StabilityViolation, "kappa * dt / dx^2 <= 1/2 violated (" + fmt(ratio) + ")");
  const Geometry geo = build_geometry(scheme, grid);
  if (grid.boundary == Boundary::Dirichlet) {
    const double margin = grid.domain_length / 8.0;
    for (std::size_t m = 0; m < scheme.num_sites(); ++m) {
      const double xm = scheme.site_x(m);
      if (xm - geo.x.front() < margin - 1e-9 || geo.x.back() - xm < margin - 1e-9)
        fail(ErrorCode::StabilityViolation,
             "site x=" + fmt(xm) + " closer than domain_length/8 to a Dirichlet boundary");
    }
  }
  if (geo.x.size() < 3) fail(ErrorCode::StabilityViolation, "spatial grid needs at least 3 nodes");
}

// ---------------------------------------------------------------- exact ----

namespace {

struct Embedding {
  std::size_t size = 0;                // circulant size 2n
  std::vector<double> sqrt_eigen;      // sqrt(lambda_j / size)
  std::vector<double> autocovariance;  // c_0..c_{n-1}, for the sequential fallback
  bool use_levinson = false;
};

class FftPlans {
 public:
  // FFTW's planner is not reentrant, so plans are created under a lock;
  // executing a plan on fresh buffers is thread-safe.
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan forward(std::size_t n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

std::shared_ptr<const Embedding> build_embedding(const ModelParams& p, double delta, std::size_t n) {
  auto e = std::make_shared<Embedding>();
  std::vector<double> c(n + 1);
  const double tau2 = tau_sq_exact(p, delta);
  for (std::size_t r = 0; r <= n; ++r) c[r] = tau2 * gamma_weight_n(p.alpha, p.lambda, delta, r);
  e->autocovariance.assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n));
  const std::size_t m = 2 * n;
  e->size = m;
  FftwBuffer in(m), out(m);
  for (std::size_t j = 0; j < m; ++j) {
    in.data[j][0] = j <= n ? c[j] : c[m - j];
    in.data[j][1] = 0.0;
  }
  fftw_execute_dft(FftPlans::instance().forward(m), in.data, out.data);
  e->sqrt_eigen.resize(m);
  double most_negative = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double lambda = out.data[j][0];
    if (lambda < 0.0) {
      most_negative = std::min(most_negative, lambda);
      if (lambda > -1e-10) lambda = 0.0;
    }
    e->sqrt_eigen[j] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
  }
  if (most_negative <= -1e-10) {
    if (n > (std::size_t{1} << 15))
      fail(ErrorCode::EmbeddingNotPSD, "circulant spectrum has entries below -1e-10 and n exceeds 2^15");
    e->use_levinson = true;
  }
  return e;
}

std::shared_ptr<const Embedding> cached_embedding(const ModelParams& p, double delta, std::size_t n) {
  using Key = std::tuple<double, double, double, int, int, double, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Embedding>> cache;
  const Key key{p.kappa, p.lambda, p.alpha, p.dim, static_cast<int>(p.noise_kind), delta, n};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto e = build_embedding(p, delta, n);
  std::lock_guard lock(mutex);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(key, std::move(e)).first->second;
}

// Durbin-Levinson: exact sequential draw from a stationary autocovariance.
std::vector<double> draw_levinson(const std::vector<double>& c, RandomStream& stream) {
  const std::size_t n = c.size();
  StandardNormal normal;
  std::vector<double> x(n), phi(n), prev(n);
  double v = c[0];
  x[0] = std::sqrt(v) * normal(stream);
  for (std::size_t k = 1; k < n; ++k) {
    double acc = c[k];
    for (std::size_t j = 1; j < k; ++j) acc -= prev[j] * c[k - j];
    const double a = acc / v;
    phi[k] = a;
    for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - a * prev[k - j];
    v *= (1.0 - a * a);
    if (!(v > 0.0)) fail(ErrorCode::EmbeddingNotPSD, "autocovariance is not positive definite");
    double mean = 0.0;
    for (std::size_t j = 1; j <= k; ++j) mean += phi[j] * x[k - j];
    x[k] = mean + std::sqrt(v) * normal(stream);
    std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k + 1), prev.begin());
  }
  return x;
}

}  // namespace

std::vector<double> draw_stationary_increments(const ModelParams& p, double delta, std::size_t n, double scale,
                                               RandomStream& stream) {
  validate_params(p);
  if (n == 0) return {};
  const auto e = cached_embedding(p, delta, n);
  std::vector<double> x;
  if (e->use_levinson) {
    x = draw_levinson(e->autocovariance, stream);
  } else {
    const std::size_t m = e->size;
    StandardNormal normal;
    FftwBuffer in(m), out(m);
    for (std::size_t j = 0; j < m; ++j) {
      in.data[j][0] = e->sqrt_eigen[j] * normal(stream);
      in.data[j][1] = e->sqrt_eigen[j] * normal(stream);
    }
    fftw_execute_dft(FftPlans::instance().forward(m), in.data, out.data);
    x.resize(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = out.data[k][0];
  }
  for (double& v : x) v *= scale;
  return x;
}

ObservedPath simulate_exact_stationary(const ModelParams& p, const SamplingScheme& scheme, const VolatilityModel& sigma,
                                       const SeedSpec& seed) {
  validate_params(p);
  validate_volatility(sigma);
  const auto* c = std::get_if<ConstantVol>(&sigma);
  if (!c) fail(ErrorCode::UnsupportedSpec, "the exact simulator needs constant volatility");
  if (scheme.num_sites() != 1) fail(ErrorCode::UnsupportedSpec, "the exact simulator draws a single site");
  RandomStream stream = derive_stream(seed);
  const std::size_t n = scheme.num_increments();
  const auto inc = draw_stationary_increments(p, scheme.delta(), n, c->level, stream);
  Matrix levels(n + 1, 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) levels(i + 1, 0) = levels(i, 0) + inc[i];
  return ObservedPath(scheme, std::move(levels));
}

// ------------------------------------------------------------------- FD ----

std::vector<double> FdSimulation::realized_integrated_vol(double w) const {
  std::vector<double> out(sigma_record.cols(), 0.0);
  for (std::size_t c = 0; c < sigma_record.cols(); ++c) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t r = 0; r < sigma_record.rows(); ++r) {
      const double y = std::pow(std::abs(sigma_record(r, c)), w) - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    out[c] = sum * dt;
  }
  return out;
}

namespace {

// Coarse OU nodes smoothed with a variance-preserving Gaussian kernel and
// interpolated linearly to the fine grid.
class OuField {
 public:
  OuField(const OuFieldVol& v, const std::vector<double>& fine_x, double dt, RandomStream& stream)
      : v_(v), spacing_(v.length / 4.0) {
    const double lo = fine_x.front() - 4.0 * v.length;
    const double hi = fine_x.back() + 4.0 * v.length;
    origin_ = lo;
    const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / spacing_)) + 1;
    z_.resize(count);
    smooth_.resize(count);
    const double sd = v.eta / std::sqrt(2.0 * v.theta);
    StandardNormal normal;
    for (double& z : z_) z = sd * normal(stream);
    decay_ = std::exp(-v.theta * dt);
    shock_ = v.eta * std::sqrt(-std::expm1(-2.0 * v.theta * dt) / (2.0 * v.theta));
    radius_ = 16;
    double norm = 0.0;
    for (int d = -radius_; d <= radius_; ++d) {
      const double u = d * spacing_ / v.length;
      const double w = std::exp(-0.5 * u * u);
      kernel_.push_back(w);
      norm += w * w;
    }
    for (double& w : kernel_) w /= std::sqrt(norm);
    for (double x : fine_x) {
      const double pos = (x - origin_) / spacing_;
      const auto i = static_cast<std::size_t>(std::floor(pos));
      cell_.push_back(i);
      frac_.push_back(pos - static_cast<double>(i));
    }
    offset_ = v.eta * v.eta / (4.0 * v.theta);
    refresh();
  }

  double sigma(std::size_t fine_index) const {
    const std::size_t i = cell_[fine_index];
    const double f = frac_[fine_index];
    const double s = (1.0 - f) * smooth_[i] + f * smooth_[i + 1];
    return v_.mean * std::exp(s - offset_);
  }

  void advance(RandomStream& stream) {
    StandardNormal normal;
    for (double& z : z_) z = decay_ * z + shock_ * normal(stream);
    refresh();
  }

 private:
  void refresh() {
    const auto n = static_cast<long>(z_.size());
    for (long i = 0; i < n; ++i) {
      double s = 0.0;
      for (int d = -radius_; d <= radius_; ++d) {
        long j = i + d;
        // Reflect at the ends of the coarse grid, which lie far outside the
        // observation window.
        if (j < 0) j = -j;
        if (j >= n) j = 2 * (n - 1) - j;
        s += kernel_[static_cast<std::size_t>(d + radius_)] * z_[static_cast<std::size_t>(j)];
      }
      smooth_[static_cast<std::size_t>(i)] = s;
    }
  }

  OuFieldVol v_;
  double spacing_;
  double origin_ = 0.0;
  double decay_ = 1.0;
  double shock_ = 0.0;
  double offset_ = 0.0;
  int radius_ = 16;
  std::vector<double> z_, smooth_, kernel_;
  std::vector<std::size_t> cell_;
  std::vector<double> frac_;
};

}  // namespace

FdSimulation simulate_fd_recorded(const ModelParams& p, const SamplingScheme& scheme, const VolatilityModel& sigma,
                                  const FdGridConfig& grid, const SeedSpec& seed) {
  validate_volatility(sigma);
  validate_fd_grid(p, scheme, grid);
  const Geometry geo = build_geometry(scheme, grid);
  const std::size_t nodes = geo.x.size();
  const std::size_t per_obs = fine_steps_per_obs(scheme.delta(), grid.dt);
  const std::size_t n = scheme.num_increments();
  const std::size_t obs_steps = n * per_obs;
  const auto burn_steps = static_cast<std::size_t>(std::llround(grid.burn_in / grid.dt));
  const std::size_t num_sites = scheme.num_sites();
  const bool periodic = grid.boundary == Boundary::Periodic;

  RandomStream stream = derive_stream(seed);
  StandardNormal normal;

  std::vector<double> y(nodes), next(nodes), sig(nodes, 1.0);
  for (std::size_t j = 0; j < nodes; ++j) y[j] = grid.initial_condition(geo.x[j]);
  if (!periodic) y.front() = y.back() = 0.0;

  std::unique_ptr<OuField> field;
  if (const auto* ou = std::get_if<OuFieldVol>(&sigma)) field = std::make_unique<OuField>(*ou, geo.x, grid.dt, stream);

  FdSimulation sim{ObservedPath(scheme, Matrix(n + 1, num_sites, 0.0)), Matrix(obs_steps, num_sites), grid.dt};
  Matrix levels(n + 1, num_sites);

  const double diffusion = 0.5 * p.kappa * grid.dt / (grid.dx * grid.dx);
  const double damping = 1.0 - grid.dt * p.lambda - 2.0 * diffusion;
  const double noise_scale = std::sqrt(grid.dt / grid.dx);
  const std::size_t first = periodic ? 0 : 1;
  const std::size_t last = periodic ? nodes : nodes - 1;

  auto record_levels = [&](std::size_t row) {
    for (std::size_t m = 0; m < num_sites; ++m) {
      const double v = y[geo.site_nodes[m]];
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite level at observation row " << row << ", site " << m;
        fail(ErrorCode::NonFiniteState, os.str());
      }
      levels(row, m) = v;
    }
  };

  const std::size_t total = burn_steps + obs_steps;
  for (std::size_t k = 0; k < total; ++k) {
    const bool observing = k >= burn_steps;
    const std::size_t local = k - (observing ? burn_steps : 0);
    const double t = (static_cast<double>(k) - static_cast<double>(burn_steps)) * grid.dt;
    if (observing && local % per_obs == 0) record_levels(local / per_obs);

    std::visit(Overloaded{
                   [&](const ConstantVol& v) { std::fill(sig.begin(), sig.end(), v.level); },
                   [&](const SinusoidVol& v) {
                     std::fill(sig.begin(), sig.end(),
                               v.base + v.amplitude * std::sin(2.0 * std::numbers::pi * v.frequency * t + v.phase));
                   },
                   [&](const OuFieldVol&) {
                     for (std::size_t j = 0; j < nodes; ++j) sig[j] = field->sigma(j);
                   },
                   [&](const TanhOfYVol& v) {
                     for (std::size_t j = 0; j < nodes; ++j) sig[j] = v.base + v.amplitude * std::tanh(y[j]);
                   },
               },
               sigma);
    if (observing)
      for (std::size_t m = 0; m < num_sites; ++m) sim.sigma_record(local, m) = sig[geo.site_nodes[m]];

    for (std::size_t j = first; j < last; ++j) {
      const double left = j == 0 ? y[nodes - 1] : y[j - 1];
      const double right = j + 1 == nodes ? y[0] : y[j + 1];
      next[j] = damping * y[j] + diffusion * (left + right) + sig[j] * noise_scale * normal(stream);
    }
    if (!periodic) next.front() = next.back() = 0.0;
    y.swap(next);
    if (field) field->advance(stream);
  }
  record_levels(n);
  sim.path = ObservedPath(scheme, std::move(levels));
  return sim;
}

ObservedPath simulate_fd(const ModelParams& p, const SamplingScheme& scheme, const VolatilityModel& sigma,
                         const FdGridConfig& grid, const SeedSpec& seed) {
  return simulate_fd_recorded(p, scheme, sigma, grid, seed).path;
}

}  // namespace hfvol
