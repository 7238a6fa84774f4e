#include "ambientlab/jet_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace ambientlab {

JetMatrix jm_identity(const JetBasis& b, int n) {
  JetMatrix r(n, b);
  for (int i = 0; i < n; ++i) r.at(i, i) = Jet::constant(b, 1.0);
  return r;
}

JetMatrix jm_add(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix r = a;
  for (int i = 0; i < a.n * a.n; ++i) r.m[i] += b.m[i];
  return r;
}

JetMatrix jm_sub(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix r = a;
  for (int i = 0; i < a.n * a.n; ++i) r.m[i] -= b.m[i];
  return r;
}

JetMatrix jm_scale(const JetMatrix& a, double s) {
  JetMatrix r = a;
  for (auto& e : r.m) e *= s;
  return r;
}

JetMatrix jm_scale(const JetMatrix& a, const Jet& s) {
  JetMatrix r = a;
  for (auto& e : r.m) e = e * s;
  return r;
}

JetMatrix jm_mul(const JetMatrix& a, const JetMatrix& b) {
  int order = std::min(a.basis().order(), b.basis().order());
  JetMatrix r(a.n, jet_basis(a.basis().n_vars(), order));
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      for (int k = 0; k < a.n; ++k)
        jet_mul_acc(r.at(i, j), a.at(i, k), b.at(k, j));
  return r;
}

Jet jm_trace(const JetMatrix& a) {
  Jet t(a.basis());
  for (int i = 0; i < a.n; ++i) t += a.at(i, i);
  return t;
}

JetMatrix jm_transpose(const JetMatrix& a) {
  JetMatrix r = a;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) r.at(i, j) = a.at(j, i);
  return r;
}

double jm_max_abs(const JetMatrix& a) {
  double m = 0.0;
  for (const auto& e : a.m) m = std::max(m, e.max_abs());
  return m;
}

JetMatrix jm_truncated(const JetMatrix& a, int order) {
  JetMatrix r;
  r.n = a.n;
  r.m.reserve(a.m.size());
  for (const auto& e : a.m) r.m.push_back(jet_truncated(e, order));
  return r;
}

JetMatrix jm_inverse(const JetMatrix& a) {
  const int n = a.n;
  const JetBasis& b = a.basis();
  std::vector<double> a0(n * n);
  for (int i = 0; i < n * n; ++i) a0[i] = a.m[i].value();
  std::vector<double> inv0 = dm_inverse(a0, n);

  JetMatrix m0inv(n, b);
  for (int i = 0; i < n * n; ++i) m0inv.m[i] = Jet::constant(b, inv0[i]);

  // E = M0^-1 * A - I has no constant term, so the Neumann series for
  // (I + E)^-1 terminates at the jet order; Horner keeps it to order muls.
  JetMatrix e = jm_mul(m0inv, a);
  for (int i = 0; i < n; ++i) e.at(i, i) -= Jet::constant(b, 1.0);
  JetMatrix x = jm_identity(b, n);
  for (int step = 0; step < b.order(); ++step) {
    JetMatrix ex = jm_mul(e, x);
    x = jm_identity(b, n);
    for (int i = 0; i < n * n; ++i) x.m[i] -= ex.m[i];
  }
  return jm_mul(x, m0inv);
}

Jet jm_det(const JetMatrix& a) {
  const int n = a.n;
  JetMatrix w = a;
  Jet det = Jet::constant(a.basis(), 1.0);
  double sign = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(w.at(col, col).value());
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(w.at(r, col).value());
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) throw SingularInputError("jm_det: singular constant term");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(w.at(col, c), w.at(pivot, c));
      sign = -sign;
    }
    det = det * w.at(col, col);
    Jet inv_piv = jet_inverse(w.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      Jet f = w.at(r, col) * inv_piv;
      for (int c = col; c < n; ++c) w.at(r, c) -= f * w.at(col, c);
    }
  }
  return det * sign;
}

std::vector<double> dm_inverse(const std::vector<double>& a, int n) {
  std::vector<double> w = a, inv(n * n, 0.0);
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(w[col * n + col]);
    for (int r = col + 1; r < n; ++r)
      if (std::abs(w[r * n + col]) > best) {
        best = std::abs(w[r * n + col]);
        pivot = r;
      }
    if (best < 1e-300)
      throw SingularInputError("dm_inverse: matrix numerically singular");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(w[col * n + c], w[pivot * n + c]);
        std::swap(inv[col * n + c], inv[pivot * n + c]);
      }
    double piv = w[col * n + col];
    for (int c = 0; c < n; ++c) {
      w[col * n + c] /= piv;
      inv[col * n + c] /= piv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = w[r * n + col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        w[r * n + c] -= f * w[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

bool dm_sym_positive_definite(const std::vector<double>& a, int n) {
  std::vector<double> c(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.5 * (a[i * n + j] + a[j * n + i]);
      for (int k = 0; k < j; ++k) s -= c[i * n + k] * c[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        c[i * n + i] = std::sqrt(s);
      } else {
        c[i * n + j] = s / c[j * n + j];
      }
    }
  }
  return true;
}

}  // namespace ambientlab
