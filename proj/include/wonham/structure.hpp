#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "wonham/model.hpp"

namespace wonham {

struct SubspaceBasis {
  Matrix basis;  // d x k, orthonormal columns
  double tol = kZeroTol;
  // Singular values seen by the last rank decision. Near-degenerate models show
  // up here as a value just under or over the threshold.
  std::vector<double> spectrum;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis.cols()); }
  bool contains(const Vector& v) const;
};

struct ErgodicDecomposition {
  std::vector<std::vector<std::size_t>> recurrent_classes;
  std::vector<std::size_t> transient_states;
  std::vector<Simplex> class_measures;
};

struct StructureReport {
  SubspaceBasis observable_space;
  SubspaceBasis null_space;
  ErgodicDecomposition decomposition;
  bool is_observable = false;
  bool is_ergodic = false;
  bool is_detectable = false;
};

/// Smallest subspace containing the constants and closed under g -> Ag and
/// g -> diag(H^j) g, built by closure iteration with re-orthonormalization.
SubspaceBasis observable_space(const FiniteHmm& model, double tol = kZeroTol);

// Dimension after each closure step, starting from span{1}.
std::vector<std::size_t> observable_closure_trace(const FiniteHmm& model, double tol = kZeroTol);

// Kernel of A.
SubspaceBasis null_eigenfunctions(const Generator& gen, double tol = kZeroTol);

ErgodicDecomposition ergodic_partition(const Generator& gen);

bool is_observable(const FiniteHmm& model);
bool is_ergodic(const Generator& gen);
bool is_detectable(const FiniteHmm& model);

StructureReport analyze_structure(const FiniteHmm& model, double tol = kZeroTol);

struct Witness {
  Simplex rho;
  FunctionVector f;
};

/// Prior and null eigenfunction certifying non-detectability: rho(f^2) > 0,
/// rho(f g) = 0 for every observable g, Af = 0 and rho(f) = 0.
///
/// Pairs of recurrent classes (k, l) are tried in lexicographic order; the
/// first pair whose difference of absorption probabilities is not observable
/// and satisfies the orthogonality condition gives rho = (mu_k + mu_l) / 2 and
/// f = a_k - a_l. If no pair qualifies a combination over all classes is
/// taken from the null space of the class-by-observable moment matrix.
///
/// Throws ModelIsDetectable when no witness exists.
Witness undetectable_witness(const FiniteHmm& model, double tol = kZeroTol);

// Priors (mu, nu) = (rho (1 + amplitude f), rho) for which the likelihood
// ratio stays equal to 1 + amplitude f for all time. Requires |amplitude| < 1
// and f taking values in [-1, 1].
std::pair<Simplex, Simplex> witness_priors(const Witness& witness, double amplitude = 0.5);

}  // namespace wonham
