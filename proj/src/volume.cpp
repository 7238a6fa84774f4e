#include "ambientlab/volume.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ambientlab/errors.hpp"

namespace ambientlab {
namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

double binomial(int m, int j) {
  double b = 1.0;
  for (int i = 0; i < j; ++i) b = b * (m - i) / (i + 1);
  return b;
}

JetMatrix rank2_matrix(const TensorJet& t) {
  JetMatrix m(t.dim, t.basis());
  for (int i = 0; i < t.dim; ++i)
    for (int j = 0; j < t.dim; ++j) m.at(i, j) = t.at({i, j});
  return m;
}

// tr(a b) without forming the product matrix.
Jet trace_of_product(const JetMatrix& a, const JetMatrix& b) {
  const int order = std::min(a.basis().order(), b.basis().order());
  Jet t(jet_basis(a.basis().n_vars(), order));
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) jet_mul_acc(t, a.at(i, j), b.at(j, i));
  return t;
}

// How many v_k the series determines: K as solved, except that the
// even-dimensional trace record extends reach to the obstructed order n/2.
int determined_count(const RhoSeries& series) {
  if (series.has_even_trace) return series.n / 2;
  return static_cast<int>(series.coeffs.size()) - 1;
}

int resolve_count(const RhoSeries& series, int count, const char* who) {
  const int max_count = determined_count(series);
  if (count == -1) count = max_count;
  if (count < 1) {
    std::ostringstream os;
    os << who << ": need at least one coefficient, got count " << count;
    throw UsageError(os.str());
  }
  if (count > max_count) {
    std::ostringstream os;
    os << who << ": series determines " << max_count
       << " coefficient(s), requested " << count;
    throw CapabilityError(os.str());
  }
  return count;
}

// Series-normalized endomorphism coefficients S_m = g0^{-1} coeffs[m] / m!
// for the materialized slots m = 0..top.
std::vector<JetMatrix> normalized_endo(const RhoSeries& series, int top) {
  std::vector<JetMatrix> s;
  s.reserve(top + 1);
  s.push_back(jm_identity(series.g0_inv.basis(), series.n));
  for (int m = 1; m <= top; ++m)
    s.push_back(jm_scale(jm_mul(series.g0_inv, rank2_matrix(series.coeffs[m])),
                         1.0 / factorial(m)));
  return s;
}

// Order-by-order inverse of I + sum_{m>=1} S_m rho^m through rho^top.
std::vector<JetMatrix> endo_inverse_series(const std::vector<JetMatrix>& s,
                                           int n, int top) {
  std::vector<JetMatrix> inv;
  inv.reserve(top + 1);
  inv.push_back(jm_identity(s.front().basis(), n));
  for (int m = 1; m <= top; ++m) {
    JetMatrix acc(n, s.front().basis());
    for (int b = 1; b <= m && b < static_cast<int>(s.size()); ++b)
      acc = jm_add(acc, jm_mul(inv[m - b], s[b]));
    inv.push_back(jm_scale(acc, -1.0));
  }
  return inv;
}

// ---- scalar truncated power series, for the determinant cross-route ----

using Ser = std::vector<double>;  // coefficient m of rho^m; fixed length

Ser ser_mul(const Ser& a, const Ser& b) {
  Ser r(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size() && j < b.size(); ++j)
      r[i + j] += a[i] * b[j];
  return r;
}

Ser ser_inv(const Ser& a) {
  Ser r(a.size(), 0.0);
  r[0] = 1.0 / a[0];
  for (std::size_t m = 1; m < a.size(); ++m) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j) acc += a[j] * r[m - j];
    r[m] = -acc / a[0];
  }
  return r;
}

Ser ser_sqrt(const Ser& a) {
  Ser r(a.size(), 0.0);
  r[0] = std::sqrt(a[0]);
  for (std::size_t m = 1; m < a.size(); ++m) {
    double acc = 0.0;
    for (std::size_t j = 1; j < m; ++j) acc += r[j] * r[m - j];
    r[m] = (a[m] - acc) / (2.0 * r[0]);
  }
  return r;
}

double value_of(const Jet& j) { return j[0]; }

}  // namespace

VolumeSeries volume_coefficients(const RhoSeries& series, int count) {
  count = resolve_count(series, count, "volume_coefficients");
  const int n = series.n;
  const int have = static_cast<int>(series.coeffs.size()) - 1;
  const int top = std::min(count, have);

  const std::vector<JetMatrix> s = normalized_endo(series, top);
  const std::vector<JetMatrix> inv = endo_inverse_series(s, n, count - 1);

  // t_m = coefficient m of tr(g^{-1} g') = sum_a tr(inv_a (m-a+1) S_{m-a+1}).
  const JetBasis& base = series.g0_inv.basis();
  std::vector<Jet> t(count, Jet(base));
  for (int m = 0; m < count; ++m)
    for (int a = 0; a <= m; ++a) {
      const int b = m - a + 1;
      if (b <= top) t[m] += (double)b * trace_of_product(inv[a], s[b]);
    }
  // The even-dimensional top slot is not materialized, but it enters this
  // trace series only through its own g-trace, which the record supplies.
  if (count > have) {
    if (!series.has_even_trace)
      throw ConsistencyError("volume_coefficients: count outran the series");
    t[count - 1] += series.even_trace * (count / factorial(count));
  }

  // v = exp(psi) with psi' = tr(g^{-1} g')/2, solved order by order.
  std::vector<Jet> e(count + 1, Jet(base));
  e[0] = Jet::constant(base, 1.0);
  for (int m = 1; m <= count; ++m) {
    Jet acc(base);
    for (int j = 1; j <= m; ++j) acc += t[j - 1] * e[m - j] * 0.5;
    e[m] = acc * (1.0 / m);
  }

  VolumeSeries out;
  out.n = n;
  out.count = count;
  out.v.assign(e.begin() + 1, e.end());
  const JetBasis& rb = jet_basis(1, count);
  out.v_of_rho = Jet(rb);
  out.v_of_rho[0] = 1.0;
  for (int k = 1; k <= count; ++k)
    out.v_of_rho[rb.find(static_cast<uint64_t>(k))] = value_of(e[k]);
  return out;
}

std::vector<double> volume_series_by_determinant(const RhoSeries& series,
                                                 int count) {
  count = resolve_count(series, count, "volume_series_by_determinant");
  const int n = series.n;
  const int have = static_cast<int>(series.coeffs.size()) - 1;
  const int len = count + 1;

  // Base-point values of g0^{-1} and of each normalized coefficient.
  std::vector<std::vector<Ser>> m(n, std::vector<Ser>(n, Ser(len, 0.0)));
  for (int i = 0; i < n; ++i) m[i][i][0] = 1.0;
  for (int mm = 1; mm <= std::min(count, have); ++mm) {
    const double f = 1.0 / factorial(mm);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          acc += value_of(series.g0_inv.at(i, k)) *
                 value_of(series.coeffs[mm].at({k, j}));
        m[i][j][mm] = acc * f;
      }
  }
  // A determinant sees the top slot only through its g-trace, so any
  // representative with the recorded trace gives the same series here.
  if (count > have) {
    const double tr = value_of(series.even_trace);
    for (int i = 0; i < n; ++i)
      m[i][i][count] = tr / (n * factorial(count));
  }

  // det(I + N) by elimination over the truncated series ring; pivots are
  // units since the constant term is the identity.
  Ser det(len, 0.0);
  det[0] = 1.0;
  for (int c = 0; c < n; ++c) {
    const Ser piv_inv = ser_inv(m[c][c]);
    for (int r = c + 1; r < n; ++r) {
      const Ser f = ser_mul(m[r][c], piv_inv);
      for (int j = c; j < n; ++j) {
        const Ser sub = ser_mul(f, m[c][j]);
        for (int q = 0; q < len; ++q) m[r][j][q] -= sub[q];
      }
    }
    det = ser_mul(det, m[c][c]);
  }
  return ser_sqrt(det);
}

std::vector<JetMatrix> inverse_metric_derivatives(const RhoSeries& series,
                                                  int m_max) {
  if (m_max < 0)
    throw UsageError("inverse_metric_derivatives: negative derivative count");
  const int have = static_cast<int>(series.coeffs.size()) - 1;
  if (m_max > have) {
    std::ostringstream os;
    os << "inverse_metric_derivatives: derivative " << m_max
       << " needs a materialized coefficient; the series carries " << have
       << (series.has_even_trace ? " plus a trace-only top slot" : "");
    throw CapabilityError(os.str());
  }
  const int n = series.n;
  std::vector<JetMatrix> h;
  h.reserve(m_max + 1);
  h.push_back(series.g0_inv);
  for (int m = 1; m <= m_max; ++m) {
    JetMatrix acc(n, series.g0_inv.basis());
    for (int j = 0; j < m; ++j)
      acc = jm_add(acc, jm_scale(jm_mul(h[j], rank2_matrix(series.coeffs[m - j])),
                                 binomial(m, j)));
    h.push_back(jm_scale(jm_mul(acc, series.g0_inv), -1.0));
  }
  return h;
}

SymmetricFunctionValue sigma_and_newton(const JetMatrix& a,
                                        const JetMatrix& ginv) {
  const int n = a.n;
  if (n < 1) throw UsageError("sigma_and_newton: empty endomorphism");
  if (ginv.n != n)
    throw UsageError("sigma_and_newton: metric dimension mismatch");
  SymmetricFunctionValue out;
  out.n = n;
  out.a = a;

  // Power sums, then Newton's identities for the sigma_k.
  std::vector<Jet> p(n + 1, Jet(a.basis()));
  JetMatrix pw = a;
  p[1] = jm_trace(pw);
  for (int j = 2; j <= n; ++j) {
    pw = jm_mul(pw, a);
    p[j] = jm_trace(pw);
  }
  out.sigma.assign(n + 1, Jet(a.basis()));
  out.sigma[0] = Jet::constant(a.basis(), 1.0);
  for (int k = 1; k <= n; ++k) {
    Jet acc(a.basis());
    for (int i = 1; i <= k; ++i) {
      const Jet term = out.sigma[k - i] * p[i];
      acc += (i % 2 == 1) ? term : term * -1.0;
    }
    out.sigma[k] = acc * (1.0 / k);
  }

  // Adjugate-series recursion T_(k) = sigma_k I - A T_(k-1).
  out.t_endo.reserve(n);
  out.t_endo.push_back(jm_identity(a.basis(), n));
  for (int k = 1; k < n; ++k)
    out.t_endo.push_back(
        jm_sub(jm_scale(jm_identity(a.basis(), n), out.sigma[k]),
               jm_mul(a, out.t_endo[k - 1])));

  out.t_up.reserve(n);
  for (int k = 0; k < n; ++k) {
    JetMatrix up = jm_mul(out.t_endo[k], ginv);
    TensorJet t(n, 2, up.basis(), +1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t.at({i, j}) = up.at(i, j);
    out.t_up.push_back(std::move(t));
  }
  return out;
}

SymmetricFunctionValue sigma_and_newton(const JetMatrix& a) {
  return sigma_and_newton(a, jm_identity(a.basis(), a.n));
}

double newton_generating_residual(const SymmetricFunctionValue& s) {
  const int n = s.n;
  std::vector<std::vector<double>> ad(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ad[i][j] = value_of(s.a.at(i, j));

  auto mat_mul = [n](const std::vector<std::vector<double>>& x,
                     const std::vector<std::vector<double>>& y) {
    std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) r[i][j] += x[i][k] * y[k][j];
    return r;
  };

  // Geometric inverse series and log-det exponential on values; neither
  // touches the Newton recursions being checked.
  std::vector<std::vector<std::vector<double>>> inv;
  std::vector<std::vector<double>> eye(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) eye[i][i] = 1.0;
  inv.push_back(eye);
  std::vector<double> q(n + 1, 0.0);  // power sums of the value matrix
  {
    std::vector<std::vector<double>> pw = eye;
    for (int m = 1; m <= n; ++m) {
      pw = mat_mul(ad, pw);
      if (m < n) {
        auto neg = pw;
        for (auto& row : neg)
          for (double& x : row) x *= (m % 2 == 1) ? -1.0 : 1.0;
        inv.push_back(neg);
      }
      for (int i = 0; i < n; ++i) q[m] += pw[i][i];
    }
  }
  std::vector<double> det(n, 0.0);
  det[0] = 1.0;
  for (int m = 1; m < n; ++m) {
    double acc = 0.0;
    for (int j = 1; j <= m; ++j)
      acc += ((j % 2 == 1) ? 1.0 : -1.0) * q[j] * det[m - j];
    det[m] = acc / m;
  }

  double worst = 0.0, scale = 1e-30;
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double lhs = 0.0;
        for (int a = 0; a <= m; ++a) lhs += det[a] * inv[m - a][i][j];
        const double rhs = value_of(s.t_endo[m].at(i, j));
        worst = std::max(worst, std::abs(lhs - rhs));
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
      }
  }
  return worst / scale;
}

LTensor linearization_coefficients(const RhoSeries& series, int k) {
  if (k < 1) throw UsageError("linearization_coefficients: k must be >= 1");
  resolve_count(series, k, "linearization_coefficients");
  const int n = series.n;
  const VolumeSeries vols = volume_coefficients(series, k);
  auto vk = [&](int j) {
    return j == 0 ? Jet::constant(series.g0_inv.basis(), 1.0) : vols.vk(j);
  };

  // Route one: Leibniz on the k-th rho-derivative of v(rho) * int_0^rho
  // g^{ij}(u) du, with inverse-metric derivatives from the g^{-1}g = I
  // recursion. The integral's m-th derivative at 0 is the (m-1)-st of g^{ij}.
  const std::vector<JetMatrix> h = inverse_metric_derivatives(series, k - 1);
  JetMatrix r1(n, series.g0_inv.basis());
  for (int j = 0; j < k; ++j)
    r1 = jm_add(r1, jm_scale(h[k - j - 1],
                             vk(j) * (-binomial(k, j) * factorial(j) /
                                      factorial(k))));

  // Route two: the expanded sum -sum_l (1/l!) v_{k-l} d^{l-1} g^{ij}, with
  // the inverse built instead by series inversion of g0^{-1} g_rho.
  const std::vector<JetMatrix> s = normalized_endo(series, std::min(k - 1, (int)series.coeffs.size() - 1));
  const std::vector<JetMatrix> inv = endo_inverse_series(s, n, k - 1);
  JetMatrix r2(n, series.g0_inv.basis());
  for (int l = 1; l <= k; ++l) {
    JetMatrix hd = jm_mul(inv[l - 1], series.g0_inv);  // series coeff of g^{ij}
    r2 = jm_add(r2, jm_scale(hd, vk(k - l) * (-1.0 / l)));
  }

  const double scale = std::max({jm_max_abs(r1), jm_max_abs(r2), 1e-30});
  if (jm_max_abs(jm_sub(r1, r2)) > 1e-10 * scale)
    throw ConsistencyError(
        "linearization_coefficients: product and expanded-sum routes "
        "disagree beyond 1e-10");

  LTensor out;
  out.k = k;
  TensorJet t(n, 2, r1.basis(), +1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.at({i, j}) = r1.at(i, j);
  out.l = t_symmetrize2(t, 0, 1);
  return out;
}

// ---- tabulated closed forms ----

namespace {

// Words list factors: 0 = Schouten, l >= 1 = l-th extended obstruction.
// Table k holds the full coefficient d^k/drho^k g|_0, i.e. twice the
// half-coefficient lists, with (i j)-symmetrization implied per chain.
const std::array<std::vector<ChainTerm>, 5> kGTables = {{
    {{2.0, {0}}},
    {{2.0, {1}}, {2.0, {0, 0}}},
    {{2.0, {2}}, {8.0, {0, 1}}},
    {{2.0, {3}}, {12.0, {0, 2}}, {8.0, {1, 1}}, {8.0, {0, 1, 0}}},
    {{2.0, {4}},
     {16.0, {0, 3}},
     {28.0, {2, 1}},
     {20.0, {0, 2, 0}},
     {32.0, {0, 1, 1}}},
}};

// Scalar tables for v_k: products of traces of the same kind of chain.
// Rows k = 1, 2 are the first two elementary symmetric polynomials; the
// obstruction corrections start at k = 3.
const std::array<std::vector<TraceTerm>, 4> kVTables = {{
    {{1.0, {{0}}}},
    {{0.5, {{0}, {0}}}, {-0.5, {{0, 0}}}},
    {{1.0 / 3.0, {{0, 0, 0}}},
     {-0.5, {{0}, {0, 0}}},
     {1.0 / 6.0, {{0}, {0}, {0}}},
     {-1.0 / 3.0, {{0, 1}}}},
    {{-0.25, {{0, 0, 0, 0}}},
     {1.0 / 3.0, {{0}, {0, 0, 0}}},
     {0.125, {{0, 0}, {0, 0}}},
     {-0.25, {{0}, {0}, {0, 0}}},
     {1.0 / 24.0, {{0}, {0}, {0}, {0}}},
     {1.0 / 3.0, {{0, 0, 1}}},
     {-1.0 / 3.0, {{0}, {0, 1}}},
     {-1.0 / 12.0, {{0, 2}}},
     {-1.0 / 12.0, {{1, 1}}}},
}};

int word_weight(const std::vector<int>& w) {
  int s = 0;
  for (int e : w) s += e + 1;
  return s;
}

// Every stored monomial must carry total weight k; anything else is a
// transcription bug, so fail loudly at first use.
void validate_tables() {
  static const bool checked = [] {
    for (int k = 1; k <= 5; ++k)
      for (const ChainTerm& term : kGTables[k - 1])
        if (word_weight(term.word) != k)
          throw ConsistencyError("building-block table: weight mismatch");
    for (int k = 1; k <= 4; ++k)
      for (const TraceTerm& term : kVTables[k - 1]) {
        int w = 0;
        for (const auto& tr : term.traces) w += word_weight(tr);
        if (w != k)
          throw ConsistencyError("volume table: weight mismatch");
      }
    return true;
  }();
  (void)checked;
}

}  // namespace

const std::vector<ChainTerm>& coefficient_table(int k) {
  if (k < 1) throw UsageError("coefficient_table: k must be >= 1");
  if (k > 5)
    throw CapabilityError("coefficient_table: tabulated only through k = 5");
  validate_tables();
  return kGTables[k - 1];
}

const std::vector<TraceTerm>& volume_table(int k) {
  if (k < 1) throw UsageError("volume_table: k must be >= 1");
  if (k > 4)
    throw CapabilityError("volume_table: tabulated only through k = 4");
  validate_tables();
  return kVTables[k - 1];
}

BuildingBlockForms building_block_forms(const TensorJet& p,
                                        const std::vector<TensorJet>& omegas,
                                        const JetMatrix& ginv, int k) {
  if (k < 1) throw UsageError("building_block_forms: k must be >= 1");
  if (k > 5)
    throw CapabilityError("building_block_forms: tabulated only through k = 5");
  const int n = p.dim;
  if (ginv.n != n)
    throw UsageError("building_block_forms: metric dimension mismatch");

  const int reach = static_cast<int>(omegas.size());
  auto factor = [&](int e) -> JetMatrix {
    if (e == 0) return rank2_matrix(p);
    return rank2_matrix(omegas[e - 1]);
  };

  BuildingBlockForms out;
  out.k = k;
  if (reach < k - 1 && (k > 4 || reach < k - 2))
    throw UsageError(
        "building_block_forms: obstruction list too short for either form");

  if (reach >= k - 1) {
    JetMatrix acc(n, p.basis());
    for (const ChainTerm& term : coefficient_table(k)) {
      JetMatrix chain = factor(term.word.front());
      for (std::size_t f = 1; f < term.word.size(); ++f)
        chain = jm_mul(jm_mul(chain, ginv), factor(term.word[f]));
      chain = jm_scale(jm_add(chain, jm_transpose(chain)), 0.5 * term.coeff);
      acc = jm_add(acc, chain);
    }
    TensorJet g_form(n, 2, acc.basis(), -1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g_form.at({i, j}) = acc.at(i, j);
    out.g_form = std::move(g_form);
  }

  if (k <= 4 && reach >= k - 2) {
    Jet v(p.basis());
    for (const TraceTerm& term : volume_table(k)) {
      Jet prod = Jet::constant(p.basis(), term.coeff);
      for (const auto& word : term.traces) {
        JetMatrix chain = jm_mul(ginv, factor(word.front()));
        for (std::size_t f = 1; f < word.size(); ++f)
          chain = jm_mul(chain, jm_mul(ginv, factor(word[f])));
        Jet tr = jm_trace(chain);
        prod = jet_truncated(prod, tr.order()) * tr;
      }
      v += prod;
    }
    out.v_form = std::move(v);
  }
  return out;
}

}  // namespace ambientlab
