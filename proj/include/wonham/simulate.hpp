#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wonham/model.hpp"
#include "wonham/rng.hpp"

namespace wonham {

enum class FilterScheme {
  // Prediction with I + dt A^T, then multiplicative likelihood update. Keeps
  // the filter on the simplex without clipping.
  ZakaiSplit,
  // Explicit Euler on the Kushner-Stratonovich equation, clipped and renormalized.
  KsEuler,
};

struct TimeGrid {
  double horizon = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;

  // n_steps = round(T / dt); rejects T, dt that do not tile exactly.
  static TimeGrid make(double horizon, double dt);

  double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt; }
};

using StatePath = std::vector<std::size_t>;

// Exact jump-time simulation read out on the grid (n_steps + 1 entries).
StatePath sample_ctmc(const Generator& gen, const Simplex& prior, const TimeGrid& grid, RngStream& rng);
StatePath sample_ctmc_from(const Generator& gen, std::size_t x0, const TimeGrid& grid, RngStream& rng);

// Row k holds dZ_k = h(X_{t_k}) dt + sqrt(dt) xi_k, xi_k ~ N(0, I_m).
Matrix sample_observations(const FiniteHmm& model, const StatePath& x_path, const TimeGrid& grid,
                           RngStream& rng);

/// One-step filter update with precomputed prediction matrix.
class FilterKernel {
 public:
  FilterKernel(const FiniteHmm& model, double dt, FilterScheme scheme);

  // Per-step likelihood weights, shared by every filter driven by the same dz.
  void prepare(const Vector& dz);
  // Advances pi in place using the weights from the last prepare().
  void advance(Vector& pi) const;

  double dt() const noexcept { return dt_; }
  FilterScheme scheme() const noexcept { return scheme_; }

 private:
  const FiniteHmm* model_;
  double dt_;
  FilterScheme scheme_;
  Matrix prediction_;  // (I + dt A)^T
  Vector dz_;
  Vector psi_;
  mutable Vector scratch_;
};

Simplex filter_step(const FiniteHmm& model, const Simplex& pi, const Vector& dz, double dt,
                    FilterScheme scheme = FilterScheme::ZakaiSplit);

inline constexpr double kRatioFloor = 1e-12;

struct LikelihoodRatio {
  Vector gamma;
  std::size_t floor_hits = 0;
};

// gamma = pi_mu / pi_nu on {pi_nu >= floor}, 0 elsewhere, rescaled so that
// pi_nu(gamma) = 1.
LikelihoodRatio likelihood_ratio(const Vector& pi_mu, const Vector& pi_nu, double floor = kRatioFloor);

// Throws PriorNotAbsolutelyContinuous unless mu(x) > 0 implies nu(x) > 0.
void require_absolutely_continuous(const Simplex& mu, const Simplex& nu);

struct PathBundle {
  TimeGrid grid;
  StatePath x_path;
  Matrix dz;     // n_steps x m
  Matrix pi_mu;  // (n_steps + 1) x d
  Matrix pi_nu;  // (n_steps + 1) x d
  FunctionVector gamma_T;
  std::size_t floor_hits = 0;
  std::uint64_t seed = 0;
};

/// Both filters run on the same observation path; X_0 ~ sampling_prior.
PathBundle run_twin_filters(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                            const Simplex& sampling_prior, RngStream& rng,
                            FilterScheme scheme = FilterScheme::ZakaiSplit);

// Same as above with X_0 = x0. Filters still start at mu and nu.
PathBundle run_twin_filters_from(const FiniteHmm& model, const Simplex& mu, const Simplex& nu,
                                 const TimeGrid& grid, std::size_t x0, RngStream& rng,
                                 FilterScheme scheme = FilterScheme::ZakaiSplit);

struct TwinEnd {
  Vector pi_mu;
  Vector pi_nu;
  std::size_t x_T = 0;
};

// Continues twin filters from (pi_mu, pi_nu) with the signal at x0 for
// kernel-dt sized steps, drawing fresh signal and noise. Stores nothing.
TwinEnd continue_twin(const FiniteHmm& model, FilterKernel& kernel, Vector pi_mu, Vector pi_nu, std::size_t x0,
                      std::size_t n_steps, RngStream& rng);

// Columns: t, x, dz_1..dz_m, pi_mu_1..pi_mu_d, pi_nu_1..pi_nu_d. The dz
// fields of the final row are empty.
void write_path_csv(std::ostream& out, const PathBundle& bundle);

}  // namespace wonham
