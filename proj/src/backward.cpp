#include "wonham/backward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wonham/errors.hpp"
#include "wonham/parallel.hpp"
#include "wonham/stability.hpp"

namespace wonham {

namespace {

// Sub-stream selectors under StreamTag::Backward.
enum : std::uint64_t {
  kY0Stream = 0,
  kTerminalStream = 1,
  kChi2Stream = 2,
  kOuterStream = 3,
  kWitnessPathStream = 6,
};

Estimate mean_estimate(const std::vector<double>& samples) {
  Estimate e;
  const std::size_t n = samples.size();
  if (n == 0) return e;
  double sum = 0.0;
  for (double s : samples) sum += s;
  e.value = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - e.value) * (s - e.value);
    e.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return e;
}

std::size_t draw_state(const Simplex& prior, RngStream& rng) {
  const Vector& w = prior.weights();
  return rng.categorical(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

// Absolute slack for comparisons whose two sides agree to machine precision
// (witness priors make every path identical, so standard errors are roundoff).
constexpr double kRoundoffSlack = 1e-12;

void check_inputs(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, std::size_t n) {
  if (mu.size() != model.dim() || nu.size() != model.dim()) {
    fail(ErrorCode::DimensionMismatch, "prior length differs from state count");
  }
  require_absolutely_continuous(mu, nu);
  if (n == 0) fail(ErrorCode::InvalidArgument, "sample count must be at least 1");
}

}  // namespace

// ---------------------------------------------------------------- y0

BackwardMapEstimate estimate_y0(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                                std::size_t n_per_state, const McOptions& options) {
  check_inputs(model, mu, nu, n_per_state);
  const std::size_t d = model.dim();
  std::vector<double> samples(d * n_per_state);
  std::vector<std::size_t> hits(d * n_per_state, 0);
  parallel_for(d * n_per_state, options.workers, [&](std::size_t task) {
    const std::size_t x = task / n_per_state;
    const std::size_t i = task % n_per_state;
    RngStream rng(options.seed, {tag(StreamTag::Backward), kY0Stream, x, i});
    FilterKernel kernel(model, grid.dt, options.scheme);
    const TwinEnd end = continue_twin(model, kernel, mu.weights(), nu.weights(), x, grid.n_steps, rng);
    const LikelihoodRatio ratio = likelihood_ratio(end.pi_mu, end.pi_nu);
    samples[task] = ratio.gamma(static_cast<Eigen::Index>(end.x_T));
    hits[task] = ratio.floor_hits;
  });

  BackwardMapEstimate est;
  est.horizon = grid.horizon;
  est.inner_paths = n_per_state;
  est.nu = nu.weights();
  est.y0 = Vector::Zero(static_cast<Eigen::Index>(d));
  est.std_error = Vector::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t x = 0; x < d; ++x) {
    std::vector<double> row(samples.begin() + static_cast<std::ptrdiff_t>(x * n_per_state),
                            samples.begin() + static_cast<std::ptrdiff_t>((x + 1) * n_per_state));
    const Estimate e = mean_estimate(row);
    est.y0(static_cast<Eigen::Index>(x)) = e.value;
    est.std_error(static_cast<Eigen::Index>(x)) = e.std_error;
  }
  for (std::size_t h : hits) est.floor_hits += h;
  return est;
}

double variance_y0(const BackwardMapEstimate& est, const Simplex& nu) {
  if (static_cast<std::size_t>(est.y0.size()) != nu.size()) {
    fail(ErrorCode::DimensionMismatch, "y0 length differs from prior length");
  }
  return nu.weights().dot((est.y0.array() - 1.0).square().matrix());
}

Estimate variance_y0_estimate(const BackwardMapEstimate& est, const Simplex& nu) {
  Estimate e{variance_y0(est, nu), 0.0};
  const Vector grad = 2.0 * nu.weights().cwiseProduct(est.y0 - Vector::Ones(est.y0.size()));
  e.std_error = grad.cwiseProduct(est.std_error).norm();
  return e;
}

Estimate nu_mean_y0(const BackwardMapEstimate& est, const Simplex& nu) {
  return {nu.expect(est.y0), nu.weights().cwiseProduct(est.std_error).norm()};
}

// ---------------------------------------------------------------- terminal quantities

Estimate terminal_variance(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                           std::size_t n_paths, const McOptions& options) {
  check_inputs(model, mu, nu, n_paths);
  std::vector<double> samples(n_paths);
  parallel_for(n_paths, options.workers, [&](std::size_t i) {
    RngStream rng(options.seed, {tag(StreamTag::Backward), kTerminalStream, i});
    FilterKernel kernel(model, grid.dt, options.scheme);
    const std::size_t x0 = draw_state(nu, rng);
    const TwinEnd end = continue_twin(model, kernel, mu.weights(), nu.weights(), x0, grid.n_steps, rng);
    const double g = likelihood_ratio(end.pi_mu, end.pi_nu).gamma(static_cast<Eigen::Index>(end.x_T));
    samples[i] = (g - 1.0) * (g - 1.0);
  });
  return mean_estimate(samples);
}

Estimate expected_terminal_chi2(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                                std::size_t n_paths, const McOptions& options) {
  check_inputs(model, mu, nu, n_paths);
  std::vector<double> samples(n_paths);
  parallel_for(n_paths, options.workers, [&](std::size_t i) {
    RngStream rng(options.seed, {tag(StreamTag::Backward), kChi2Stream, i});
    FilterKernel kernel(model, grid.dt, options.scheme);
    const std::size_t x0 = draw_state(mu, rng);
    const TwinEnd end = continue_twin(model, kernel, mu.weights(), nu.weights(), x0, grid.n_steps, rng);
    samples[i] = chi_square_floored(end.pi_mu, end.pi_nu).value;
  });
  return mean_estimate(samples);
}

// ---------------------------------------------------------------- checks

JensenResult jensen_from(const Estimate& var_y0, const Estimate& var_gamma) {
  JensenResult r{var_y0, var_gamma, false};
  r.pass = var_y0.value <= var_gamma.value + 3.0 * combined(var_y0.std_error, var_gamma.std_error) + kRoundoffSlack;
  return r;
}

IdentityResult identity_from(const Estimate& expected_chi2, const BackwardMapEstimate& est, const Simplex& mu) {
  IdentityResult r;
  r.lhs = expected_chi2;
  r.rhs = {mu.expect(est.y0) - 1.0, mu.weights().cwiseProduct(est.std_error).norm()};
  const double se = combined(r.lhs.std_error, r.rhs.std_error);
  const double gap = std::abs(r.lhs.value - r.rhs.value);
  // Gaps at roundoff level are agreement, whatever the (roundoff-sized) error bar.
  if (gap <= kRoundoffSlack) {
    r.z_score = 0.0;
  } else {
    r.z_score = se > 0.0 ? gap / se : std::numeric_limits<double>::infinity();
  }
  return r;
}

CauchySchwarzResult cauchy_schwarz_from(const Estimate& expected_chi2, const Estimate& var_y0, double prior_chi2) {
  CauchySchwarzResult r;
  r.lhs_squared = expected_chi2.value * expected_chi2.value;
  r.bound = var_y0.value * prior_chi2;
  const double rel_lhs = expected_chi2.value != 0.0 ? 2.0 * expected_chi2.std_error / std::abs(expected_chi2.value) : 0.0;
  const double rel_var = var_y0.value != 0.0 ? var_y0.std_error / var_y0.value : 0.0;
  r.relative_error = combined(rel_lhs, rel_var);
  r.pass = r.lhs_squared <= r.bound * (1.0 + 3.0 * r.relative_error) + kRoundoffSlack;
  return r;
}

JensenResult jensen_check(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                          std::size_t n_paths, const McOptions& options) {
  const BackwardMapEstimate est = estimate_y0(model, mu, nu, grid, n_paths, options);
  return jensen_from(variance_y0_estimate(est, nu), terminal_variance(model, mu, nu, grid, n_paths, options));
}

IdentityResult chisq_identity_check(const FiniteHmm& model, const Simplex& mu, const Simplex& nu,
                                    const TimeGrid& grid, std::size_t n_paths, const McOptions& options) {
  const BackwardMapEstimate est = estimate_y0(model, mu, nu, grid, n_paths, options);
  return identity_from(expected_terminal_chi2(model, mu, nu, grid, n_paths, options), est, mu);
}

CauchySchwarzResult cauchy_schwarz_check(const FiniteHmm& model, const Simplex& mu, const Simplex& nu,
                                         const TimeGrid& grid, std::size_t n_paths, const McOptions& options) {
  const BackwardMapEstimate est = estimate_y0(model, mu, nu, grid, n_paths, options);
  return cauchy_schwarz_from(expected_terminal_chi2(model, mu, nu, grid, n_paths, options),
                             variance_y0_estimate(est, nu), chi_square(mu, nu));
}

// ---------------------------------------------------------------- nested Monte Carlo

namespace {

std::vector<std::size_t> checkpoint_indices(const TimeGrid& grid, const std::vector<double>& times) {
  std::vector<double> wanted = times;
  if (wanted.empty()) {
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) wanted.push_back(q * grid.horizon);
  }
  std::vector<std::size_t> idx;
  const double slack = 1e-9 * std::max(1.0, grid.horizon);
  const bool snap = times.empty();
  for (double t : wanted) {
    if (t < -slack || t > grid.horizon + slack) {
      std::ostringstream msg;
      msg << "checkpoint " << t << " lies outside [0, " << grid.horizon << "]";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    const double k = std::round(t / grid.dt);
    if (!snap && std::abs(k * grid.dt - t) > slack) {
      std::ostringstream msg;
      msg << "checkpoint " << t << " is not a grid time";
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    idx.push_back(static_cast<std::size_t>(k));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

}  // namespace

NestedResult nested_Yt(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                       const NestedMcSpec& spec, const McOptions& options) {
  check_inputs(model, mu, nu, spec.outer_paths);
  if (spec.inner_paths == 0) fail(ErrorCode::InvalidArgument, "inner path count must be at least 1");
  const std::vector<std::size_t> idx = checkpoint_indices(grid, spec.checkpoint_times);
  const std::size_t d = model.dim();
  const std::size_t n_ck = idx.size();
  const std::size_t big_n = spec.outer_paths;
  const std::size_t big_m = spec.inner_paths;

  double cost = 0.0;
  for (std::size_t k : idx) {
    cost += static_cast<double>(grid.n_steps - k) * static_cast<double>(k == 0 ? d : 1);
  }
  cost *= static_cast<double>(big_n) * static_cast<double>(big_m);
  if (cost > spec.budget) {
    std::ostringstream msg;
    msg << "nested Monte Carlo needs " << cost << " filter steps, budget is " << spec.budget;
    fail(ErrorCode::BudgetExceeded, msg.str());
  }

  NestedResult result;
  result.terms.assign(big_n, std::vector<double>(n_ck, 0.0));
  std::vector<std::vector<double>> raw(big_n, std::vector<double>(n_ck, 0.0));
  // t = 0 continuations, per outer path and state: sum and sum of squares.
  std::vector<Matrix> zero_moments(big_n, Matrix::Zero(static_cast<Eigen::Index>(d), 2));

  parallel_for(big_n, options.workers, [&](std::size_t n) {
    RngStream rng(options.seed, {tag(StreamTag::Backward), kOuterStream, n});
    FilterKernel kernel(model, grid.dt, options.scheme);
    const std::size_t x0 = draw_state(nu, rng);
    const StatePath x_path = sample_ctmc_from(model.generator(), x0, grid, rng);
    const Matrix dz = sample_observations(model, x_path, grid, rng);

    Vector pm = mu.weights();
    Vector pn = nu.weights();
    std::size_t step = 0;
    for (std::size_t c = 0; c < n_ck; ++c) {
      const std::size_t k_c = idx[c];
      for (; step < k_c; ++step) {
        kernel.prepare(dz.row(static_cast<Eigen::Index>(step)).transpose());
        kernel.advance(pm);
        kernel.advance(pn);
      }
      const std::size_t remaining = grid.n_steps - k_c;
      if (remaining == 0) {
        const double g = likelihood_ratio(pm, pn).gamma(static_cast<Eigen::Index>(x_path[k_c]));
        raw[n][c] = result.terms[n][c] = (g - 1.0) * (g - 1.0);
        continue;
      }
      const std::size_t x_t = x_path[k_c];
      const std::size_t first = k_c == 0 ? 0 : x_t;
      const std::size_t last = k_c == 0 ? d : x_t + 1;
      FilterKernel inner_kernel(model, grid.dt, options.scheme);
      for (std::size_t x = first; x < last; ++x) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < big_m; ++i) {
          RngStream inner(options.seed, {tag(StreamTag::Inner), n, c, x, i});
          const TwinEnd end = continue_twin(model, inner_kernel, pm, pn, x, remaining, inner);
          const double g = likelihood_ratio(end.pi_mu, end.pi_nu).gamma(static_cast<Eigen::Index>(end.x_T));
          sum += g;
          sum_sq += g * g;
        }
        if (k_c == 0) {
          zero_moments[n](static_cast<Eigen::Index>(x), 0) = sum;
          zero_moments[n](static_cast<Eigen::Index>(x), 1) = sum_sq;
        }
        if (x != x_t) continue;
        const double m = static_cast<double>(big_m);
        const double mean = sum / m;
        const double dev = (mean - 1.0) * (mean - 1.0);
        double correction = 0.0;
        if (big_m > 1) correction = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0)) / m;
        raw[n][c] = dev;
        result.terms[n][c] = dev - correction;
      }
    }
  });

  for (std::size_t c = 0; c < n_ck; ++c) {
    std::vector<double> column(big_n), raw_column(big_n);
    for (std::size_t n = 0; n < big_n; ++n) {
      column[n] = result.terms[n][c];
      raw_column[n] = raw[n][c];
    }
    result.checkpoints.push_back({grid.time(idx[c]), mean_estimate(column), mean_estimate(raw_column).value});
  }

  if (!idx.empty() && idx.front() == 0 && grid.n_steps > 0) {
    const auto dd = static_cast<Eigen::Index>(d);
    Matrix total = Matrix::Zero(dd, 2);
    for (const Matrix& z : zero_moments) total += z;
    const double count = static_cast<double>(big_n * big_m);
    result.y0_at_zero = total.col(0) / count;
    result.y0_at_zero_std_error = Vector::Zero(dd);
    if (count > 1.0) {
      for (Eigen::Index x = 0; x < dd; ++x) {
        const double mean = result.y0_at_zero(x);
        const double var = std::max(0.0, (total(x, 1) - count * mean * mean) / (count - 1.0));
        result.y0_at_zero_std_error(x) = std::sqrt(var / count);
      }
    }
  }
  return result;
}

Estimate integrated_energy(const NestedResult& result) {
  if (result.checkpoints.size() < 2 || result.checkpoints.front().t != 0.0) {
    fail(ErrorCode::InvalidArgument, "integrated energy needs checkpoints at t = 0 and t = T");
  }
  const std::size_t last = result.checkpoints.size() - 1;
  std::vector<double> diffs;
  diffs.reserve(result.terms.size());
  for (const auto& row : result.terms) diffs.push_back(row[last] - row[0]);
  return mean_estimate(diffs);
}

bool checkpoints_monotone(const NestedResult& result, double sigmas) {
  for (std::size_t c = 1; c < result.checkpoints.size(); ++c) {
    const Estimate& prev = result.checkpoints[c - 1].variance;
    const Estimate& cur = result.checkpoints[c].variance;
    if (cur.value < prev.value - sigmas * combined(prev.std_error, cur.std_error) - kRoundoffSlack) return false;
  }
  return true;
}

// ---------------------------------------------------------------- rate bound

Estimate empirical_rate_bound(const Estimate& var_gamma, const Estimate& var_y0, double horizon) {
  auto distinguishable = [](const Estimate& e) { return e.value > 0.0 && e.value > 3.0 * e.std_error; };
  if (!distinguishable(var_gamma) || !distinguishable(var_y0)) {
    std::ostringstream msg;
    msg << "var(gamma_T) = " << var_gamma.value << " +- " << var_gamma.std_error << ", var(y0) = " << var_y0.value
        << " +- " << var_y0.std_error;
    fail(ErrorCode::VarianceIndistinguishableFromZero, msg.str());
  }
  Estimate e;
  e.value = std::log(var_gamma.value / var_y0.value) / horizon;
  e.std_error = combined(var_gamma.std_error / var_gamma.value, var_y0.std_error / var_y0.value) / horizon;
  return e;
}

Estimate empirical_rate_bound(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                              std::size_t n_paths, const McOptions& options) {
  const BackwardMapEstimate est = estimate_y0(model, mu, nu, grid, n_paths, options);
  return empirical_rate_bound(terminal_variance(model, mu, nu, grid, n_paths, options),
                              variance_y0_estimate(est, nu), grid.horizon);
}

// ---------------------------------------------------------------- witness paths

std::vector<WitnessPathPoint> witness_path_statistic(const FiniteHmm& model, const Witness& witness, const TimeGrid& grid,
                                          const std::vector<double>& checkpoint_times, std::size_t n_paths,
                                          const McOptions& options) {
  if (n_paths == 0) fail(ErrorCode::InvalidArgument, "sample count must be at least 1");
  const std::vector<std::size_t> idx = checkpoint_indices(grid, checkpoint_times);
  const Matrix obs = observable_space(model).basis;
  const auto n_basis = static_cast<std::size_t>(obs.cols());
  const Matrix weights = witness.f.asDiagonal() * obs;  // column j is f g_j
  // samples[i][c * n_basis + j]
  std::vector<std::vector<double>> samples(n_paths, std::vector<double>(idx.size() * n_basis));
  parallel_for(n_paths, options.workers, [&](std::size_t i) {
    RngStream rng(options.seed, {tag(StreamTag::Backward), kWitnessPathStream, i});
    FilterKernel kernel(model, grid.dt, options.scheme);
    const StatePath x_path = sample_ctmc(model.generator(), witness.rho, grid, rng);
    const Matrix dz = sample_observations(model, x_path, grid, rng);
    Vector pi = witness.rho.weights();
    std::size_t step = 0;
    for (std::size_t c = 0; c < idx.size(); ++c) {
      for (; step < idx[c]; ++step) {
        kernel.prepare(dz.row(static_cast<Eigen::Index>(step)).transpose());
        kernel.advance(pi);
      }
      const Vector moments = weights.transpose() * pi;
      for (std::size_t j = 0; j < n_basis; ++j) samples[i][c * n_basis + j] = moments(static_cast<Eigen::Index>(j));
    }
  });
  std::vector<WitnessPathPoint> out;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    WitnessPathPoint p{grid.time(idx[c]), {}};
    for (std::size_t j = 0; j < n_basis; ++j) {
      std::vector<double> column(n_paths);
      for (std::size_t i = 0; i < n_paths; ++i) column[i] = samples[i][c * n_basis + j];
      p.moments.push_back(mean_estimate(column));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace wonham
