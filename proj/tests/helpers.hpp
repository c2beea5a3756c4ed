#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wonham/model.hpp"

namespace testkit {

using wonham::Matrix;
using wonham::Vector;

// Dense rate matrix with off-diagonal rates uniform in [lo, hi].
inline Matrix random_ergodic_rates(std::mt19937_64& gen, int d, double lo = 0.1, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j) a(i, j) = u(gen);
    }
    a(i, i) = -a.row(i).sum();
  }
  return a;
}

// Two closed classes of sizes k1, k2 plus `transient` states leaking into both.
inline Matrix random_reducible_rates(std::mt19937_64& gen, int k1, int k2, int transient) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const int d = k1 + k2 + transient;
  Matrix a = Matrix::Zero(d, d);
  auto fill_block = [&](int start, int size) {
    for (int i = start; i < start + size; ++i) {
      for (int j = start; j < start + size; ++j) {
        if (i != j) a(i, j) = u(gen);
      }
    }
  };
  fill_block(0, k1);
  fill_block(k1, k2);
  for (int t = k1 + k2; t < d; ++t) {
    for (int j = 0; j < d; ++j) {
      if (j != t) a(t, j) = u(gen);
    }
  }
  for (int i = 0; i < d; ++i) a(i, i) = -(a.row(i).sum() - a(i, i));
  return a;
}

inline Vector random_simplex(std::mt19937_64& gen, int d, double min_mass = 0.0) {
  std::exponential_distribution<double> e(1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = e(gen) + min_mass;
  return v / v.sum();
}

inline Vector random_function(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = n(gen);
  return v;
}

// Stationary law of an irreducible chain: null vector of A^T, normalized.
inline Vector stationary(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  Matrix m(d + 1, d);
  m.topRows(d) = a.transpose();
  m.row(d).setOnes();
  Vector rhs = Vector::Zero(d + 1);
  rhs(d) = 1.0;
  return m.colPivHouseholderQr().solve(rhs);
}

// Energy and variance bilinear forms straight from their definitions, used as
// an oracle independent of the library's matrix reduction.
inline double energy_form(const Matrix& a, const Vector& mu, const Vector& f, const Vector& g) {
  double e = 0.0;
  for (int x = 0; x < a.rows(); ++x) {
    for (int y = 0; y < a.cols(); ++y) {
      if (x != y) e += mu(x) * a(x, y) * (f(y) - f(x)) * (g(y) - g(x));
    }
  }
  return e;
}

inline double variance_form(const Vector& mu, const Vector& f, const Vector& g) {
  return mu.dot(f.cwiseProduct(g)) - mu.dot(f) * mu.dot(g);
}

// Minimum of E(f) / V(f): random scan for a start, then repeated exact
// minimization over two-dimensional subspaces span{f, direction}.
inline double rayleigh_scan_min(const Matrix& a, const Vector& mu, std::mt19937_64& gen, int scan = 500,
                                int sweeps = 300) {
  const int d = static_cast<int>(a.rows());
  auto centered = [&](Vector v) { return Vector(v.array() - mu.dot(v)); };
  auto quotient = [&](const Vector& f) { return energy_form(a, mu, f, f) / variance_form(mu, f, f); };
  Vector best = centered(random_function(gen, d));
  double best_q = quotient(best);
  for (int i = 0; i < scan; ++i) {
    const Vector f = centered(random_function(gen, d));
    const double q = quotient(f);
    if (q < best_q) {
      best_q = q;
      best = f;
    }
  }
  Vector f = best / std::sqrt(variance_form(mu, best, best));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int k = 0; k < 2 * d; ++k) {
      Vector g = k < d ? Vector(Vector::Unit(d, k)) : random_function(gen, d);
      g = centered(g);
      g -= variance_form(mu, f, g) * f;  // V-orthogonal to f
      const double gn = variance_form(mu, g, g);
      if (gn < 1e-14) continue;
      g /= std::sqrt(gn);
      // f, g are V-orthonormal: minimize over the 2x2 symmetric energy matrix.
      const double e11 = energy_form(a, mu, f, f), e22 = energy_form(a, mu, g, g), e12 = energy_form(a, mu, f, g);
      const double mean = 0.5 * (e11 + e22);
      const double rad = std::sqrt(0.25 * (e11 - e22) * (e11 - e22) + e12 * e12);
      const double lam = mean - rad;
      // Take the eigenvector from whichever row is better conditioned; near
      // convergence e12 and lam - e11 are both at roundoff level.
      const double a1 = e22 - lam, b1 = -e12;
      const double a2 = e12, b2 = lam - e11;
      const Vector next = std::hypot(a1, b1) >= std::hypot(a2, b2) ? Vector(a1 * f + b1 * g) : Vector(a2 * f + b2 * g);
      const double nn = variance_form(mu, next, next);
      if (nn > 0.0) f = next / std::sqrt(nn);
    }
  }
  return quotient(f);
}

}  // namespace testkit

#include "wonham/errors.hpp"

// Asserts that `expr` throws wonham::Error with the given code.
#define CHECK_THROWS_CODE(expr, expected_code)                       \
  do {                                                               \
    bool thrown_ = false;                                            \
    try {                                                            \
      (void)(expr);                                                  \
    } catch (const wonham::Error& e_) {                              \
      thrown_ = true;                                                \
      CHECK(e_.code() == (expected_code));                           \
    }                                                                \
    CHECK_MESSAGE(thrown_, "expected wonham::Error from " #expr);    \
  } while (false)
