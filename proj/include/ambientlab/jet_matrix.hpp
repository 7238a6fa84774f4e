#pragma once
#include <vector>

#include "ambientlab/jet.hpp"

namespace ambientlab {

// Square matrix of jets, row-major. The thin wrapper exists for metric blocks
// and power-series-in-one-variable manipulation; tensor calculus proper lives
// in tensor.hpp.
struct JetMatrix {
  int n = 0;
  std::vector<Jet> m;

  JetMatrix() = default;
  JetMatrix(int n_, const JetBasis& b) : n(n_), m(n_ * n_, Jet(b)) {}

  Jet& at(int i, int j) { return m[i * n + j]; }
  const Jet& at(int i, int j) const { return m[i * n + j]; }
  const JetBasis& basis() const { return m.front().basis(); }
};

JetMatrix jm_identity(const JetBasis& b, int n);
JetMatrix jm_add(const JetMatrix& a, const JetMatrix& b);
JetMatrix jm_sub(const JetMatrix& a, const JetMatrix& b);
JetMatrix jm_scale(const JetMatrix& a, double s);
JetMatrix jm_scale(const JetMatrix& a, const Jet& s);
JetMatrix jm_mul(const JetMatrix& a, const JetMatrix& b);
Jet jm_trace(const JetMatrix& a);
JetMatrix jm_transpose(const JetMatrix& a);
double jm_max_abs(const JetMatrix& a);

// Truncates every entry to the given order.
JetMatrix jm_truncated(const JetMatrix& a, int order);

// Inverse through the nilpotent series around the constant-term inverse;
// exact to the operand's order. Requires an invertible constant term.
JetMatrix jm_inverse(const JetMatrix& a);

// Determinant by LU elimination with constant-term partial pivoting.
Jet jm_det(const JetMatrix& a);

// Plain double-matrix helpers for constant terms.
std::vector<double> dm_inverse(const std::vector<double>& a, int n);
// Smallest eigenvalue sign probe: true iff symmetric part is positive
// definite (Cholesky succeeds).
bool dm_sym_positive_definite(const std::vector<double>& a, int n);

}  // namespace ambientlab
