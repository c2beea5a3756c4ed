#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wonham/linalg.hpp"

namespace wonham {

// A function on the finite state space, one entry per state.
using FunctionVector = Vector;

/// Probability vector on {0, ..., d-1}.
///
/// Construction validates non-negativity and unit mass (tolerance 1e-10);
/// the stored weights are renormalized exactly.
class Simplex {
 public:
  static constexpr double kTol = 1e-10;

  explicit Simplex(Vector weights);

  // Normalizes any non-negative vector with positive mass.
  static Simplex normalized(const Vector& weights);
  static Simplex uniform(std::size_t d);
  static Simplex point_mass(std::size_t d, std::size_t state);

  const Vector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }

  // Expectation rho(f).
  double expect(const FunctionVector& f) const;

 private:
  Vector weights_;
};

/// Validated rate matrix: non-negative off-diagonal entries, zero row sums.
/// Rows index the state a transition leaves from.
class Generator {
 public:
  static constexpr double kRowSumTol = 1e-12;

  explicit Generator(Matrix rates);

  const Matrix& rates() const noexcept { return rates_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rates_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return rates_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix rates_;
};

Generator validate_generator(const Matrix& rates);

/// Finite-state HMM (A, H) with white-noise observations dZ = h(X) dt + dW.
class FiniteHmm {
 public:
  FiniteHmm(Generator generator, Matrix observation);
  FiniteHmm(const Matrix& rates, const Matrix& observation);

  const Generator& generator() const noexcept { return generator_; }
  const Matrix& rates() const noexcept { return generator_.rates(); }
  // d x m, column j is the j-th observation channel.
  const Matrix& observation() const noexcept { return observation_; }
  std::size_t dim() const noexcept { return generator_.dim(); }
  std::size_t obs_dim() const noexcept { return static_cast<std::size_t>(observation_.cols()); }

 private:
  Generator generator_;
  Matrix observation_;
};

// Gamma(f, g) = A(fg) - f Ag - g Af, entrywise.
FunctionVector carre_du_champ(const Generator& gen, const FunctionVector& f, const FunctionVector& g);

// exp(tA), via Pade scaling-and-squaring.
Matrix transition_matrix(const Generator& gen, double t);

// (P_t f)(x) = E^x f(X_t).
FunctionVector semigroup_apply(const Generator& gen, double t, const FunctionVector& f);

struct RecurrentClasses {
  std::vector<std::vector<std::size_t>> classes;  // closed communicating classes, sorted
  std::vector<std::size_t> transient;
};

// Closed strongly connected components of the digraph i -> j iff A(i,j) > 0.
// Classes are ordered by their smallest state.
RecurrentClasses recurrent_classes(const Generator& gen);

struct InvariantMeasure {
  std::vector<std::size_t> states;
  Simplex measure;
};

// One invariant measure per closed recurrent class, supported on that class.
std::vector<InvariantMeasure> invariant_measures(const Generator& gen);

// Probability, from each state, of eventual absorption into `target` (a closed class).
// Lies in the kernel of A and equals the class indicator on recurrent states.
FunctionVector absorption_probabilities(const Generator& gen, const RecurrentClasses& rc,
                                        std::size_t target);

double classical_variance(const Simplex& measure, const FunctionVector& f);

// Throws NotInvariantMeasure when |mu^T A| exceeds 1e-8.
void require_invariant(const Generator& gen, const Simplex& measure, double tol = 1e-8);

// mu(Gamma f) for an invariant mu.
double classical_energy(const Generator& gen, const Simplex& measure, const FunctionVector& f);

// Max over t of |d/dt V(P_t f) + E(P_t f)|, derivative by central difference
// with step `delta`. The residual is O(delta^2).
double dissipation_check(const Generator& gen, const Simplex& measure, const FunctionVector& f,
                         std::span<const double> times, double delta = 1e-4);

// Largest c with E(f) >= c V(f) for all f, restricted to supp(measure).
// Returns 0 when the chain is not ergodic on the support, +inf when the
// support is a single state.
double classical_poincare_constant(const Generator& gen, const Simplex& measure);

}  // namespace wonham
