#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "wonham/stability.hpp"
#include "wonham/structure.hpp"

using namespace wonham;

TEST_CASE("five reference models get the expected verdicts") {
  for (const Table1Case& c : table1_cases()) {
    const FiniteHmm model = table1_model(c.epsilon, c.h_index);
    const StructureReport r = analyze_structure(model);
    CAPTURE(c.epsilon);
    CAPTURE(c.h_name);
    CHECK(table1_property(model, r) == c.reference_property);
    CHECK(r.is_ergodic == (c.epsilon > 0.0));
    CHECK(r.is_detectable == (c.reference_rate > 0.0));
  }
}

TEST_CASE("observable space dimensions for the block example") {
  // h1 is block-symmetric: O holds the functions that are equal across blocks.
  CHECK(observable_space(table1_model(0.0, 1)).dim() == 2);
  CHECK(observable_space(table1_model(0.0, 3)).dim() == 4);
  const FiniteHmm h2 = table1_model(0.0, 2);
  const SubspaceBasis o = observable_space(h2);
  CHECK(o.dim() == 3);
  CHECK_FALSE(is_observable(h2));
  CHECK(is_detectable(h2));
  // Both class indicators are observable.
  CHECK(o.contains((Vector(4) << 1, 1, 0, 0).finished()));
  CHECK(o.contains((Vector(4) << 0, 0, 1, 1).finished()));
  CHECK(null_eigenfunctions(Generator(table1_rates(0.0))).dim() == 2);
  CHECK(null_eigenfunctions(Generator(table1_rates(0.1))).dim() == 1);
}

TEST_CASE("closure trace grows to the final dimension") {
  const FiniteHmm model = table1_model(0.0, 3);
  const auto trace = observable_closure_trace(model);
  REQUIRE_FALSE(trace.empty());
  CHECK(trace.front() == 1);
  CHECK(trace.back() == observable_space(model).dim());
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
}

TEST_CASE("observable space is invariant under A and H on random models") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + rep % 5;
    const Matrix a = rep % 2 == 0 ? testkit::random_ergodic_rates(gen, d)
                                  : testkit::random_reducible_rates(gen, 1 + rep % 2, 1 + rep % 3, rep % 2);
    const int dd = static_cast<int>(a.rows());
    Matrix h = Matrix::Zero(dd, 1);
    // Some channels coincide on several states to keep O proper.
    for (int i = 0; i < dd; ++i) h(i, 0) = static_cast<double>(i % 2);
    const FiniteHmm model(a, h);
    const SubspaceBasis o = observable_space(model);
    CHECK(o.contains(Vector::Ones(dd)));
    for (Eigen::Index k = 0; k < o.basis.cols(); ++k) {
      const Vector g = o.basis.col(k);
      CHECK(o.contains(a * g));
      CHECK(o.contains(h.col(0).cwiseProduct(g)));
    }
    // Detectable iff S0 is inside O.
    const SubspaceBasis s0 = null_eigenfunctions(model.generator());
    bool inside = true;
    for (Eigen::Index k = 0; k < s0.basis.cols(); ++k) inside = inside && o.contains(s0.basis.col(k));
    CHECK(is_detectable(model) == inside);
  }
}

TEST_CASE("two-state verdicts over a parameter grid") {
  const std::vector<double> rates{0.0, 0.3, 1.0, 2.5};
  const std::vector<double> obs{-1.0, 0.0, 0.5, 2.0};
  for (double l12 : rates) {
    for (double l21 : rates) {
      for (double h1 : obs) {
        for (double h2 : obs) {
          const FiniteHmm model((Matrix(2, 2) << -l12, l12, l21, -l21).finished(), (Matrix(2, 1) << h1, h2).finished());
          const StructureReport r = analyze_structure(model);
          CHECK(r.is_observable == (h1 != h2));
          CHECK(r.is_ergodic == (l12 + l21 > 0.0));
        }
      }
    }
  }
}

TEST_CASE("witness for the undetectable example") {
  const FiniteHmm model = table1_model(0.0, 1);
  const Witness w = undetectable_witness(model);
  const Vector rho = (Vector(4) << 1.0 / 3, 1.0 / 6, 1.0 / 3, 1.0 / 6).finished();
  const Vector f = (Vector(4) << 1, 1, -1, -1).finished();
  CHECK((w.rho.weights() - rho).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w.f - f).cwiseAbs().maxCoeff() < 1e-12);
  const SubspaceBasis o = observable_space(model);
  for (Eigen::Index k = 0; k < o.basis.cols(); ++k) {
    CHECK(std::abs(w.rho.expect(w.f.cwiseProduct(o.basis.col(k)))) <= 1e-10);
  }
  CHECK((model.rates() * w.f).norm() < 1e-12);

  const auto [mu, nu] = witness_priors(w);
  CHECK((mu.weights() - rho.cwiseProduct((Vector::Ones(4) + 0.5 * f))).norm() < 1e-12);
  CHECK((nu.weights() - rho).norm() < 1e-12);
  CHECK_THROWS_CODE(witness_priors(w, 1.0), ErrorCode::InvalidArgument);
}

TEST_CASE("detectable models have no witness") {
  for (const Table1Case& c : table1_cases()) {
    if (c.reference_rate == 0.0) continue;
    CHECK_THROWS_CODE(undetectable_witness(table1_model(c.epsilon, c.h_index)), ErrorCode::ModelIsDetectable);
  }
}

TEST_CASE("witness with a transient state stays in the null space") {
  // Two copies of the block chain plus state 4 leaking into both, h blind to the copy.
  Matrix a = Matrix::Zero(5, 5);
  a.topLeftCorner(4, 4) = table1_rates(0.0);
  a(4, 0) = 0.5;
  a(4, 2) = 1.5;
  a(4, 4) = -2.0;
  const Matrix h = (Matrix(5, 1) << 2, 0, 2, 0, 1).finished();
  const FiniteHmm model(a, h);
  REQUIRE_FALSE(is_detectable(model));
  const Witness w = undetectable_witness(model);
  CHECK((a * w.f).norm() < 1e-12);
  CHECK(std::abs(w.rho.expect(w.f)) < 1e-12);
  CHECK(w.rho.expect(w.f.cwiseProduct(w.f)) > 0.1);
  const SubspaceBasis o = observable_space(model);
  for (Eigen::Index k = 0; k < o.basis.cols(); ++k) {
    CHECK(std::abs(w.rho.expect(w.f.cwiseProduct(o.basis.col(k)))) <= 1e-10);
  }
}

TEST_CASE("near-degenerate coupling shows up in the reported spectrum") {
  // With a 1e-12 coupling the second null direction sits below the rank threshold.
  const StructureReport r = analyze_structure(table1_model(1e-12, 3));
  REQUIRE_FALSE(r.null_space.spectrum.empty());
  CHECK(r.null_space.spectrum.back() < 1e-10);
}
