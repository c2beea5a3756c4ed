#include "wonham/structure.hpp"

#include <algorithm>
#include <cmath>

#include "wonham/errors.hpp"

namespace wonham {

namespace {

Matrix closure_candidates(const FiniteHmm& model, const Matrix& basis) {
  const Matrix& a = model.rates();
  const Matrix& h = model.observation();
  const Eigen::Index k = basis.cols();
  const auto m = static_cast<Eigen::Index>(model.obs_dim());
  Matrix out(basis.rows(), k * (2 + m));
  out.leftCols(k) = basis;
  out.middleCols(k, k) = a * basis;
  for (Eigen::Index j = 0; j < m; ++j) {
    out.middleCols(k * (2 + j), k) = h.col(j).asDiagonal() * basis;
  }
  return out;
}

template <typename Visit>
SubspaceBasis run_closure(const FiniteHmm& model, double tol, Visit&& visit) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  SubspaceBasis current;
  current.tol = tol;
  current.basis = Vector::Ones(d).normalized();
  current.spectrum = {std::sqrt(static_cast<double>(d))};
  visit(current.dim());
  for (Eigen::Index iter = 0; iter <= d; ++iter) {
    OrthonormalSpan next = orthonormal_span(closure_candidates(model, current.basis), tol);
    const bool grew = next.basis.cols() > current.basis.cols();
    current.basis = std::move(next.basis);
    current.spectrum = std::move(next.singular_values);
    if (!grew) break;
    visit(current.dim());
  }
  return current;
}

}  // namespace

bool SubspaceBasis::contains(const Vector& v) const {
  return projection_residual(basis, v) <= tol * std::max(1.0, v.norm());
}

SubspaceBasis observable_space(const FiniteHmm& model, double tol) {
  return run_closure(model, tol, [](std::size_t) {});
}

std::vector<std::size_t> observable_closure_trace(const FiniteHmm& model, double tol) {
  std::vector<std::size_t> dims;
  run_closure(model, tol, [&](std::size_t k) { dims.push_back(k); });
  return dims;
}

SubspaceBasis null_eigenfunctions(const Generator& gen, double tol) {
  OrthonormalSpan k = kernel(gen.rates(), tol);
  SubspaceBasis out;
  out.basis = std::move(k.basis);
  out.tol = tol;
  out.spectrum = std::move(k.singular_values);
  return out;
}

ErgodicDecomposition ergodic_partition(const Generator& gen) {
  RecurrentClasses rc = recurrent_classes(gen);
  ErgodicDecomposition out;
  for (auto& m : invariant_measures(gen)) out.class_measures.push_back(std::move(m.measure));
  out.recurrent_classes = std::move(rc.classes);
  out.transient_states = std::move(rc.transient);
  return out;
}

bool is_observable(const FiniteHmm& model) { return observable_space(model).dim() == model.dim(); }

bool is_ergodic(const Generator& gen) { return null_eigenfunctions(gen).dim() == 1; }

namespace {

bool detectable_given(const SubspaceBasis& observable, const SubspaceBasis& null_space) {
  for (Eigen::Index c = 0; c < null_space.basis.cols(); ++c) {
    if (!observable.contains(null_space.basis.col(c))) return false;
  }
  return true;
}

}  // namespace

bool is_detectable(const FiniteHmm& model) {
  return detectable_given(observable_space(model), null_eigenfunctions(model.generator()));
}

StructureReport analyze_structure(const FiniteHmm& model, double tol) {
  StructureReport r;
  r.observable_space = observable_space(model, tol);
  r.null_space = null_eigenfunctions(model.generator(), tol);
  r.decomposition = ergodic_partition(model.generator());
  r.is_observable = r.observable_space.dim() == model.dim();
  r.is_ergodic = r.null_space.dim() == 1;
  r.is_detectable = detectable_given(r.observable_space, r.null_space);
  return r;
}

namespace {

double max_cross_moment(const Simplex& rho, const Vector& f, const Matrix& basis) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    worst = std::max(worst, std::abs(rho.expect(f.cwiseProduct(basis.col(c)))));
  }
  return worst;
}

}  // namespace

Witness undetectable_witness(const FiniteHmm& model, double tol) {
  const SubspaceBasis obs = observable_space(model, tol);
  const SubspaceBasis null_space = null_eigenfunctions(model.generator(), tol);
  if (detectable_given(obs, null_space)) {
    fail(ErrorCode::ModelIsDetectable, "S0 is contained in the observable space");
  }
  const RecurrentClasses rc = recurrent_classes(model.generator());
  const auto measures = invariant_measures(model.generator());
  const std::size_t n = rc.classes.size();
  std::vector<Vector> absorb;
  for (std::size_t k = 0; k < n; ++k) absorb.push_back(absorption_probabilities(model.generator(), rc, k));

  constexpr double kOrthTol = 1e-10;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      Vector f = absorb[k] - absorb[l];
      if (obs.contains(f)) continue;
      Simplex rho = Simplex::normalized(0.5 * measures[k].measure.weights() + 0.5 * measures[l].measure.weights());
      if (max_cross_moment(rho, f, obs.basis) <= kOrthTol) return {std::move(rho), std::move(f)};
    }
  }

  // General case: v with sum_k v_k mu_k(g) = 0 for all observable g.
  Matrix moments(static_cast<Eigen::Index>(n), obs.basis.cols());
  for (std::size_t k = 0; k < n; ++k) {
    moments.row(static_cast<Eigen::Index>(k)) = measures[k].measure.weights().transpose() * obs.basis;
  }
  const OrthonormalSpan left = kernel(moments.transpose(), tol);
  if (left.basis.cols() > 0) {
    const Vector v = left.basis.col(0);
    Vector w = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
    Vector f = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
    for (std::size_t k = 0; k < n; ++k) {
      const double vk = v(static_cast<Eigen::Index>(k));
      if (std::abs(vk) <= tol) continue;
      w += std::abs(vk) * measures[k].measure.weights();
      f += (vk > 0 ? 1.0 : -1.0) * absorb[k];
    }
    Simplex rho = Simplex::normalized(w);
    if (max_cross_moment(rho, f, obs.basis) <= kOrthTol) return {std::move(rho), std::move(f)};
  }
  fail(ErrorCode::ModelIsDetectable, "no witness satisfies the orthogonality conditions");
}

std::pair<Simplex, Simplex> witness_priors(const Witness& witness, double amplitude) {
  if (!(std::abs(amplitude) < 1.0)) fail(ErrorCode::InvalidArgument, "witness amplitude must lie in (-1, 1)");
  const Vector& rho = witness.rho.weights();
  Vector mu = rho.cwiseProduct((Vector::Ones(rho.size()) + amplitude * witness.f));
  return {Simplex::normalized(mu), witness.rho};
}

}  // namespace wonham
