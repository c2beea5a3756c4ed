#include "wonham/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "wonham/errors.hpp"

namespace wonham {

TimeGrid TimeGrid::make(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
  const double steps = std::round(horizon / dt);
  if (std::abs(steps * dt - horizon) > 1e-12 * std::max(1.0, horizon)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "horizon " << horizon << " is not a multiple of dt " << dt;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  return TimeGrid{horizon, dt, static_cast<std::size_t>(steps)};
}

// ---------------------------------------------------------------- signal

StatePath sample_ctmc_from(const Generator& gen, std::size_t x0, const TimeGrid& grid, RngStream& rng) {
  const std::size_t d = gen.dim();
  if (x0 >= d) fail(ErrorCode::InvalidArgument, "initial state out of range");
  StatePath path(grid.n_steps + 1);
  std::vector<double> jump(d);
  std::size_t x = x0;
  double t = 0.0;
  auto next_jump = [&]() {
    const double rate = -gen(x, x);
    return rate > 0.0 ? t + rng.exponential(rate) : std::numeric_limits<double>::infinity();
  };
  double t_jump = next_jump();
  for (std::size_t k = 0; k <= grid.n_steps; ++k) {
    const double tk = grid.time(k);
    while (t_jump <= tk) {
      for (std::size_t j = 0; j < d; ++j) jump[j] = j == x ? 0.0 : gen(x, j);
      x = rng.categorical(jump);
      t = t_jump;
      t_jump = next_jump();
    }
    path[k] = x;
  }
  return path;
}

StatePath sample_ctmc(const Generator& gen, const Simplex& prior, const TimeGrid& grid, RngStream& rng) {
  if (prior.size() != gen.dim()) fail(ErrorCode::DimensionMismatch, "prior length differs from state count");
  const Vector& w = prior.weights();
  const std::size_t x0 = rng.categorical(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
  return sample_ctmc_from(gen, x0, grid, rng);
}

namespace {

void draw_increment(const Matrix& h, std::size_t x, double dt, RngStream& rng, Vector& dz) {
  const double sqrt_dt = std::sqrt(dt);
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    dz(j) = h(static_cast<Eigen::Index>(x), j) * dt + sqrt_dt * rng.normal();
  }
}

}  // namespace

Matrix sample_observations(const FiniteHmm& model, const StatePath& x_path, const TimeGrid& grid,
                           RngStream& rng) {
  if (x_path.size() != grid.n_steps + 1) fail(ErrorCode::DimensionMismatch, "state path length differs from grid");
  const auto m = static_cast<Eigen::Index>(model.obs_dim());
  Matrix dz(static_cast<Eigen::Index>(grid.n_steps), m);
  Vector row(m);
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    draw_increment(model.observation(), x_path[k], grid.dt, rng, row);
    dz.row(static_cast<Eigen::Index>(k)) = row.transpose();
  }
  return dz;
}

// ---------------------------------------------------------------- filter

FilterKernel::FilterKernel(const FiniteHmm& model, double dt, FilterScheme scheme)
    : model_(&model), dt_(dt), scheme_(scheme) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be positive");
  const Matrix& a = model.rates();
  const double max_exit = (-a.diagonal()).maxCoeff();
  if (dt * max_exit > 1.0) {
    std::ostringstream msg;
    msg << "dt * max exit rate = " << dt * max_exit << " exceeds 1; prediction step would lose positivity";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  const auto d = static_cast<Eigen::Index>(model.dim());
  prediction_ = (Matrix::Identity(d, d) + dt * a).transpose();
  dz_ = Vector::Zero(static_cast<Eigen::Index>(model.obs_dim()));
  psi_ = Vector::Ones(d);
  scratch_ = Vector::Zero(d);
}

void FilterKernel::prepare(const Vector& dz) {
  dz_ = dz;
  if (scheme_ != FilterScheme::ZakaiSplit) return;
  const Matrix& h = model_->observation();
  psi_ = h * dz - 0.5 * dt_ * h.rowwise().squaredNorm();
  psi_ = (psi_.array() - psi_.maxCoeff()).exp().matrix();
}

void FilterKernel::advance(Vector& pi) const {
  scratch_.noalias() = prediction_ * pi;
  if (scheme_ == FilterScheme::ZakaiSplit) {
    pi = scratch_.cwiseProduct(psi_);
  } else {
    const Matrix& h = model_->observation();
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      const double mean_h = pi.dot(h.col(j));
      const double innovation = dz_(j) - mean_h * dt_;
      scratch_.array() += pi.array() * (h.col(j).array() - mean_h) * innovation;
    }
    pi = scratch_.cwiseMax(0.0);
  }
  const double total = pi.sum();
  if (!(total > 1e-300) || !std::isfinite(total)) {
    fail(ErrorCode::DegenerateFilter, "filter normalizer collapsed");
  }
  pi /= total;
}

Simplex filter_step(const FiniteHmm& model, const Simplex& pi, const Vector& dz, double dt, FilterScheme scheme) {
  if (pi.size() != model.dim()) fail(ErrorCode::DimensionMismatch, "filter state length differs from state count");
  if (static_cast<std::size_t>(dz.size()) != model.obs_dim()) {
    fail(ErrorCode::DimensionMismatch, "observation increment length differs from m");
  }
  FilterKernel kernel(model, dt, scheme);
  kernel.prepare(dz);
  Vector out = pi.weights();
  kernel.advance(out);
  return Simplex::normalized(out);
}

LikelihoodRatio likelihood_ratio(const Vector& pi_mu, const Vector& pi_nu, double floor) {
  LikelihoodRatio out;
  out.gamma = Vector::Zero(pi_nu.size());
  double mass = 0.0;
  for (Eigen::Index i = 0; i < pi_nu.size(); ++i) {
    if (pi_nu(i) < floor) {
      if (pi_mu(i) > 0.0) ++out.floor_hits;
      continue;
    }
    out.gamma(i) = pi_mu(i) / pi_nu(i);
    mass += pi_nu(i) * out.gamma(i);
  }
  if (mass > 0.0) out.gamma /= mass;
  return out;
}

void require_absolutely_continuous(const Simplex& mu, const Simplex& nu) {
  if (mu.size() != nu.size()) fail(ErrorCode::DimensionMismatch, "priors have different lengths");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] > 0.0 && !(nu[i] > 0.0)) {
      std::ostringstream msg;
      msg << "mu(" << i << ") = " << mu[i] << " but nu(" << i << ") = 0";
      fail(ErrorCode::PriorNotAbsolutelyContinuous, msg.str());
    }
  }
}

// ---------------------------------------------------------------- twin filters

namespace {

PathBundle twin_from_path(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                          StatePath x_path, RngStream& rng, FilterScheme scheme) {
  PathBundle b;
  b.grid = grid;
  b.seed = rng.id();
  b.x_path = std::move(x_path);
  b.dz = sample_observations(model, b.x_path, grid, rng);
  const auto d = static_cast<Eigen::Index>(model.dim());
  const auto n = static_cast<Eigen::Index>(grid.n_steps);
  b.pi_mu.resize(n + 1, d);
  b.pi_nu.resize(n + 1, d);
  Vector pm = mu.weights();
  Vector pn = nu.weights();
  b.pi_mu.row(0) = pm.transpose();
  b.pi_nu.row(0) = pn.transpose();
  FilterKernel kernel(model, grid.dt, scheme);
  Vector dz(static_cast<Eigen::Index>(model.obs_dim()));
  for (Eigen::Index k = 0; k < n; ++k) {
    dz = b.dz.row(k).transpose();
    kernel.prepare(dz);
    kernel.advance(pm);
    kernel.advance(pn);
    b.pi_mu.row(k + 1) = pm.transpose();
    b.pi_nu.row(k + 1) = pn.transpose();
  }
  LikelihoodRatio ratio = likelihood_ratio(pm, pn);
  b.gamma_T = std::move(ratio.gamma);
  b.floor_hits = ratio.floor_hits;
  return b;
}

void check_priors(const FiniteHmm& model, const Simplex& mu, const Simplex& nu) {
  if (mu.size() != model.dim() || nu.size() != model.dim()) {
    fail(ErrorCode::DimensionMismatch, "prior length differs from state count");
  }
  require_absolutely_continuous(mu, nu);
}

}  // namespace

PathBundle run_twin_filters(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                            const Simplex& sampling_prior, RngStream& rng, FilterScheme scheme) {
  check_priors(model, mu, nu);
  StatePath x = sample_ctmc(model.generator(), sampling_prior, grid, rng);
  return twin_from_path(model, mu, nu, grid, std::move(x), rng, scheme);
}

PathBundle run_twin_filters_from(const FiniteHmm& model, const Simplex& mu, const Simplex& nu,
                                 const TimeGrid& grid, std::size_t x0, RngStream& rng, FilterScheme scheme) {
  check_priors(model, mu, nu);
  StatePath x = sample_ctmc_from(model.generator(), x0, grid, rng);
  return twin_from_path(model, mu, nu, grid, std::move(x), rng, scheme);
}

TwinEnd continue_twin(const FiniteHmm& model, FilterKernel& kernel, Vector pi_mu, Vector pi_nu, std::size_t x0,
                      std::size_t n_steps, RngStream& rng) {
  TwinEnd out;
  if (n_steps == 0) {
    out.pi_mu = std::move(pi_mu);
    out.pi_nu = std::move(pi_nu);
    out.x_T = x0;
    return out;
  }
  const TimeGrid grid{static_cast<double>(n_steps) * kernel.dt(), kernel.dt(), n_steps};
  const StatePath x = sample_ctmc_from(model.generator(), x0, grid, rng);
  Vector dz(static_cast<Eigen::Index>(model.obs_dim()));
  for (std::size_t k = 0; k < n_steps; ++k) {
    draw_increment(model.observation(), x[k], grid.dt, rng, dz);
    kernel.prepare(dz);
    kernel.advance(pi_mu);
    kernel.advance(pi_nu);
  }
  out.pi_mu = std::move(pi_mu);
  out.pi_nu = std::move(pi_nu);
  out.x_T = x[n_steps];
  return out;
}

void write_path_csv(std::ostream& out, const PathBundle& b) {
  const Eigen::Index m = b.dz.cols();
  const Eigen::Index d = b.pi_mu.cols();
  out << "t,x";
  for (Eigen::Index j = 0; j < m; ++j) out << ",dz_" << j + 1;
  for (Eigen::Index i = 0; i < d; ++i) out << ",pi_mu_" << i + 1;
  for (Eigen::Index i = 0; i < d; ++i) out << ",pi_nu_" << i + 1;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t k = 0; k <= b.grid.n_steps; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out << b.grid.time(k) << ',' << b.x_path[k];
    for (Eigen::Index j = 0; j < m; ++j) {
      out << ',';
      if (k < b.grid.n_steps) out << b.dz(r, j);
    }
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << b.pi_mu(r, i);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << b.pi_nu(r, i);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace wonham
