#include "wonham/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "wonham/errors.hpp"

namespace wonham {

namespace {

void require_dim(std::size_t expected, Eigen::Index got, const char* what) {
  if (static_cast<Eigen::Index>(expected) != got) {
    std::ostringstream msg;
    msg << what << ": expected length " << expected << ", got " << got;
    fail(ErrorCode::DimensionMismatch, msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------- Simplex

Simplex::Simplex(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) fail(ErrorCode::InvalidArgument, "empty probability vector");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_(i)) || weights_(i) < 0.0) {
      std::ostringstream msg;
      msg << "probability vector entry " << i << " is " << weights_(i);
      fail(ErrorCode::InvalidArgument, msg.str());
    }
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probability vector sums to " << total;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  weights_ /= total;
}

Simplex Simplex::normalized(const Vector& weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    fail(ErrorCode::InvalidArgument, "cannot normalize a vector without positive mass");
  }
  return Simplex(weights / total);
}

Simplex Simplex::uniform(std::size_t d) {
  return Simplex(Vector::Constant(static_cast<Eigen::Index>(d), 1.0 / static_cast<double>(d)));
}

Simplex Simplex::point_mass(std::size_t d, std::size_t state) {
  Vector w = Vector::Zero(static_cast<Eigen::Index>(d));
  w(static_cast<Eigen::Index>(state)) = 1.0;
  return Simplex(std::move(w));
}

double Simplex::expect(const FunctionVector& f) const {
  require_dim(size(), f.size(), "expectation");
  return weights_.dot(f);
}

// ---------------------------------------------------------------- Generator

Generator::Generator(Matrix rates) : rates_(std::move(rates)) {
  if (rates_.rows() != rates_.cols()) {
    fail(ErrorCode::DimensionMismatch, "rate matrix must be square");
  }
  if (rates_.rows() == 0) fail(ErrorCode::InvalidArgument, "rate matrix is empty");
  if (!rates_.allFinite()) fail(ErrorCode::InvalidArgument, "rate matrix has non-finite entries");
  const Eigen::Index d = rates_.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j && rates_(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "A(" << i << "," << j << ") = " << rates_(i, j);
        fail(ErrorCode::NegativeOffDiagonal, msg.str());
      }
    }
  }
  Eigen::Index worst = 0;
  double worst_residual = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double r = std::abs(rates_.row(i).sum());
    if (r > worst_residual) {
      worst_residual = r;
      worst = i;
    }
  }
  if (worst_residual > kRowSumTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "row " << worst << " sums to " << rates_.row(worst).sum() << " (residual "
        << worst_residual << ")";
    fail(ErrorCode::RowSumNonZero, msg.str());
  }
}

Generator validate_generator(const Matrix& rates) { return Generator(rates); }

FiniteHmm::FiniteHmm(Generator generator, Matrix observation)
    : generator_(std::move(generator)), observation_(std::move(observation)) {
  if (generator_.dim() < 2) fail(ErrorCode::InvalidArgument, "model needs at least two states");
  require_dim(generator_.dim(), observation_.rows(), "observation matrix rows");
  if (observation_.cols() < 1) fail(ErrorCode::InvalidArgument, "observation matrix has no columns");
  if (!observation_.allFinite()) {
    fail(ErrorCode::InvalidArgument, "observation matrix has non-finite entries");
  }
}

FiniteHmm::FiniteHmm(const Matrix& rates, const Matrix& observation)
    : FiniteHmm(Generator(rates), observation) {}

// ---------------------------------------------------------------- algebra

FunctionVector carre_du_champ(const Generator& gen, const FunctionVector& f, const FunctionVector& g) {
  require_dim(gen.dim(), f.size(), "carre_du_champ f");
  require_dim(gen.dim(), g.size(), "carre_du_champ g");
  // Difference form: exact zero on constants, no cancellation against row sums.
  const Matrix& a = gen.rates();
  FunctionVector out = FunctionVector::Zero(f.size());
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    for (Eigen::Index y = 0; y < f.size(); ++y) {
      if (y != x) out(x) += a(x, y) * (f(y) - f(x)) * (g(y) - g(x));
    }
  }
  return out;
}

Matrix transition_matrix(const Generator& gen, double t) {
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "semigroup time must be non-negative");
  const Matrix scaled = t * gen.rates();
  return scaled.exp();
}

FunctionVector semigroup_apply(const Generator& gen, double t, const FunctionVector& f) {
  require_dim(gen.dim(), f.size(), "semigroup_apply");
  if (t == 0.0) return f;
  return transition_matrix(gen, t) * f;
}

// ---------------------------------------------------------------- classes

RecurrentClasses recurrent_classes(const Generator& gen) {
  const std::size_t d = gen.dim();
  // Tarjan's SCC.
  std::vector<int> index(d, -1), low(d, 0), comp(d, -1);
  std::vector<bool> on_stack(d, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  int n_comp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < d; ++w) {
      if (w == v || !(gen(v, w) > 0.0)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = n_comp;
      } while (w != v);
      ++n_comp;
    }
  };
  for (std::size_t v = 0; v < d; ++v) {
    if (index[v] < 0) visit(v);
  }

  std::vector<bool> closed(static_cast<std::size_t>(n_comp), true);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j && gen(i, j) > 0.0 && comp[i] != comp[j]) closed[static_cast<std::size_t>(comp[i])] = false;
    }
  }

  RecurrentClasses out;
  std::vector<int> class_of_comp(static_cast<std::size_t>(n_comp), -1);
  for (std::size_t i = 0; i < d; ++i) {
    const auto c = static_cast<std::size_t>(comp[i]);
    if (!closed[c]) {
      out.transient.push_back(i);
      continue;
    }
    if (class_of_comp[c] < 0) {
      class_of_comp[c] = static_cast<int>(out.classes.size());
      out.classes.emplace_back();
    }
    out.classes[static_cast<std::size_t>(class_of_comp[c])].push_back(i);
  }
  return out;
}

std::vector<InvariantMeasure> invariant_measures(const Generator& gen) {
  const RecurrentClasses rc = recurrent_classes(gen);
  std::vector<InvariantMeasure> out;
  out.reserve(rc.classes.size());
  const auto d = static_cast<Eigen::Index>(gen.dim());
  for (const auto& cls : rc.classes) {
    const auto n = static_cast<Eigen::Index>(cls.size());
    // [A_C^T; 1^T] m = [0; 1], least squares.
    Matrix system(n + 1, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        system(r, c) = gen(cls[static_cast<std::size_t>(c)], cls[static_cast<std::size_t>(r)]);
      }
    }
    system.row(n).setOnes();
    Vector rhs = Vector::Zero(n + 1);
    rhs(n) = 1.0;
    Vector local = system.completeOrthogonalDecomposition().solve(rhs);
    local = local.cwiseMax(0.0);
    Vector full = Vector::Zero(d);
    for (Eigen::Index k = 0; k < n; ++k) full(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(k)])) = local(k);
    out.push_back({cls, Simplex::normalized(full)});
  }
  return out;
}

FunctionVector absorption_probabilities(const Generator& gen, const RecurrentClasses& rc,
                                        std::size_t target) {
  const auto d = static_cast<Eigen::Index>(gen.dim());
  Vector out = Vector::Zero(d);
  for (std::size_t s : rc.classes.at(target)) out(static_cast<Eigen::Index>(s)) = 1.0;
  const auto nt = static_cast<Eigen::Index>(rc.transient.size());
  if (nt == 0) return out;
  // A_TT a_T = -A_T,target 1 on the transient block.
  Matrix att(nt, nt);
  Vector rhs = Vector::Zero(nt);
  for (Eigen::Index r = 0; r < nt; ++r) {
    const std::size_t i = rc.transient[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < nt; ++c) att(r, c) = gen(i, rc.transient[static_cast<std::size_t>(c)]);
    for (std::size_t s : rc.classes[target]) rhs(r) -= gen(i, s);
  }
  const Vector at = att.partialPivLu().solve(rhs);
  for (Eigen::Index r = 0; r < nt; ++r) out(static_cast<Eigen::Index>(rc.transient[static_cast<std::size_t>(r)])) = at(r);
  return out;
}

// ---------------------------------------------------------------- variance / energy

double classical_variance(const Simplex& measure, const FunctionVector& f) {
  require_dim(measure.size(), f.size(), "classical_variance");
  const double mean = measure.expect(f);
  return measure.weights().dot((f.array() - mean).square().matrix());
}

void require_invariant(const Generator& gen, const Simplex& measure, double tol) {
  require_dim(gen.dim(), static_cast<Eigen::Index>(measure.size()), "measure");
  const double residual = (measure.weights().transpose() * gen.rates()).cwiseAbs().maxCoeff();
  if (residual > tol) {
    std::ostringstream msg;
    msg << "mu^T A has residual " << residual;
    fail(ErrorCode::NotInvariantMeasure, msg.str());
  }
}

double classical_energy(const Generator& gen, const Simplex& measure, const FunctionVector& f) {
  require_invariant(gen, measure);
  return std::max(0.0, measure.expect(carre_du_champ(gen, f, f)));
}

double dissipation_check(const Generator& gen, const Simplex& measure, const FunctionVector& f,
                         std::span<const double> times, double delta) {
  require_invariant(gen, measure);
  require_dim(gen.dim(), f.size(), "dissipation_check");
  if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "difference step must be positive");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) fail(ErrorCode::InvalidArgument, "time grid must be strictly increasing");
  }
  const Matrix& a = gen.rates();
  // exp(+-delta A) lets the stencil straddle t = 0.
  const Matrix forward = (delta * a).exp();
  const Matrix backward = (-delta * a).exp();
  double worst = 0.0;
  for (double t : times) {
    if (t < 0.0) fail(ErrorCode::InvalidArgument, "negative time in grid");
    const Vector pt = semigroup_apply(gen, t, f);
    const double v_plus = classical_variance(measure, forward * pt);
    const double v_minus = classical_variance(measure, backward * pt);
    const double derivative = (v_plus - v_minus) / (2.0 * delta);
    const double energy = measure.expect(carre_du_champ(gen, pt, pt));
    worst = std::max(worst, std::abs(derivative + energy));
  }
  return worst;
}

double classical_poincare_constant(const Generator& gen, const Simplex& measure) {
  require_invariant(gen, measure);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (measure[i] > 0.0) support.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(support.size());
  if (n <= 1) return std::numeric_limits<double>::infinity();

  // Energy quadratic form on the support: sum_x mu(x) sum_y A(x,y) (f(y) - f(x))^2.
  Matrix form = Matrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t x = support[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t y = support[static_cast<std::size_t>(c)];
      if (x == y) continue;
      const double w = measure[x] * gen(x, y);
      form(r, r) += w;
      form(c, c) += w;
      form(r, c) -= w;
      form(c, r) -= w;
    }
  }
  // Symmetric reduction in the mu-weighted inner product.
  Vector sqrt_mu(n);
  for (Eigen::Index r = 0; r < n; ++r) sqrt_mu(r) = std::sqrt(measure[support[static_cast<std::size_t>(r)]]);
  const Matrix scaled = sqrt_mu.cwiseInverse().asDiagonal() * form * sqrt_mu.cwiseInverse().asDiagonal();
  // Orthogonal complement of sqrt(mu), i.e. f with mu(f) = 0.
  Eigen::HouseholderQR<Matrix> qr(sqrt_mu.normalized());
  const Matrix q = qr.householderQ();
  const Matrix complement = q.rightCols(n - 1);
  const Matrix reduced = complement.transpose() * scaled * complement;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.transpose()), Eigen::EigenvaluesOnly);
  const double c = eig.eigenvalues()(0);
  if (c < scaled_tol(gen.rates())) return 0.0;
  return c;
}

}  // namespace wonham
