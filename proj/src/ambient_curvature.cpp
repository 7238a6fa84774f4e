#include "ambientlab/ambient_curvature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ambientlab/chart_geometry.hpp"

namespace ambientlab {

namespace {

std::size_t pow_size(int base, int e) {
  std::size_t s = 1;
  while (e-- > 0) s *= static_cast<std::size_t>(base);
  return s;
}

struct ConeChain {
  AmbientMetricJet amb;  // truncated copy
  JetMatrix ginv;
  ConnectionJet gamma;
  TensorJet rm;  // order = truncation order - 2
};

ConeChain build_chain(const AmbientMetricJet& ambient, int order,
                      const char* who) {
  if (ambient.g.dim != ambient.n + 2)
    throw UsageError(std::string(who) + ": malformed cone metric");
  if (ambient.g.order() < order)
    throw InsufficientOrderError(std::string(who) + ": cone metric order " +
                                 std::to_string(ambient.g.order()) +
                                 ", need at least " + std::to_string(order));
  ConeChain c;
  c.amb.n = ambient.n;
  c.amb.g.dim = ambient.n + 2;
  c.amb.g.g = jm_truncated(ambient.g.g, order);
  c.ginv = ambient_inverse(c.amb);
  c.gamma = levi_civita(c.amb.g, c.ginv);
  c.rm = riemann_lowered(c.amb.g, c.ginv, c.gamma);
  return c;
}

void attach_base_metric(CurvatureTable& tb, const ConeChain& chain) {
  const int n = tb.n;
  tb.g0.resize(static_cast<std::size_t>(n) * n);
  tb.g0_inv.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      tb.g0[i * n + j] = chain.amb.g.g.at(1 + i, 1 + j).value();
      tb.g0_inv[i * n + j] = chain.ginv.at(1 + i, 1 + j).value();
    }
}

CurvatureTable values_table(const TensorJet& t, int n, int r) {
  CurvatureTable tb;
  tb.n = n;
  tb.r = r;
  tb.entries.resize(t.comps.size());
  for (std::size_t f = 0; f < t.comps.size(); ++f)
    tb.entries[f] = t.comps[f].value();
  return tb;
}

// One more covariant derivative of `cur`, evaluated at the base point and
// written straight into doubles. Avoids materializing the highest-rank jet
// tensor, whose component count dominates everything else here.
CurvatureTable stream_last_derivative(const TensorJet& cur,
                                      const ConnectionJet& gamma, int n,
                                      int r) {
  const int D = n + 2;
  const int R = cur.rank;
  const JetBasis& b = cur.basis();
  std::vector<int> lin(D);
  for (int v = 0; v < D; ++v)
    lin[v] = b.find(static_cast<uint64_t>(1) << (4 * v));

  const std::size_t N = cur.comps.size();
  std::vector<double> val(N);
  for (std::size_t f = 0; f < N; ++f) val[f] = cur.comps[f].value();

  std::vector<double> gam(static_cast<std::size_t>(D) * D * D);
  for (int a = 0; a < D; ++a)
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        gam[(static_cast<std::size_t>(a) * D + i) * D + j] =
            gamma.get(a, i, j).value();

  CurvatureTable tb;
  tb.n = n;
  tb.r = r;
  tb.entries.assign(N * D, 0.0);

  std::vector<std::size_t> stride(R);
  stride[R - 1] = 1;
  for (int s = R - 2; s >= 0; --s) stride[s] = stride[s + 1] * D;

  std::vector<int> c(R, 0);
  for (std::size_t f = 0; f < N; ++f) {
    const Jet& jf = cur.comps[f];
    const bool jz = jf.known_zero();
    for (int M = 0; M < D; ++M) {
      double acc = jz ? 0.0 : jf[lin[M]];
      for (int s = 0; s < R; ++s) {
        const std::size_t base = f - static_cast<std::size_t>(c[s]) * stride[s];
        for (int B = 0; B < D; ++B) {
          const double gv = gam[(static_cast<std::size_t>(B) * D + M) * D + c[s]];
          if (gv != 0.0) acc -= gv * val[base + B * stride[s]];
        }
      }
      tb.entries[f * D + M] = acc;
    }
    for (int s = R - 1; s >= 0; --s) {
      if (++c[s] < D) break;
      c[s] = 0;
    }
  }
  return tb;
}

void validate_extraction(const MetricJet& g, int k, bool strict_even,
                         bool allow_heavy, const char* who) {
  if (k < 1) throw UsageError(std::string(who) + ": k must be at least 1");
  if (k > 4)
    throw CapabilityError(std::string(who) +
                          ": k beyond 4 is outside the desk-scale range");
  if (k == 4 && !allow_heavy)
    throw CapabilityError(std::string(who) +
                          ": k = 4 builds a rank-7 table; it must be enabled "
                          "explicitly");
  const int n = g.dim;
  if (n % 2 == 0) {
    const bool ok = strict_even ? n > 2 * (k + 1) : n >= 2 * (k + 1);
    if (!ok)
      throw CapabilityError(
          std::string(who) + ": not defined for even dimension " +
          std::to_string(n) + " at k = " + std::to_string(k));
  }
  const int need = 2 * k + 4;
  if (g.order() < need)
    throw InsufficientOrderError(
        std::string(who) + ": metric order " + std::to_string(g.order()) +
        ", need " + std::to_string(need) + " for k = " + std::to_string(k));
}

}  // namespace

double CurvatureTable::at(const AmbientIndex& index) const {
  if (static_cast<int>(index.size()) != rank())
    throw UsageError("CurvatureTable: index length " +
                     std::to_string(index.size()) + ", table rank " +
                     std::to_string(rank()));
  const int D = dim();
  std::size_t f = 0;
  for (int v : index) {
    if (v < 0 || v >= D)
      throw UsageError("CurvatureTable: index entry out of range");
    f = f * D + static_cast<std::size_t>(v);
  }
  return entries[f];
}

double CurvatureTable::at(std::initializer_list<int> index) const {
  return at(AmbientIndex(index));
}

double CurvatureTable::max_abs() const {
  double m = 0.0;
  for (double v : entries) m = std::max(m, std::abs(v));
  return m;
}

CurvatureTable ambient_curvature_derivatives(const AmbientMetricJet& ambient,
                                             int r) {
  if (r < 0)
    throw UsageError("ambient_curvature_derivatives: negative derivative count");
  const int n = ambient.n;
  const int D = n + 2;
  if (pow_size(D, 4 + r) > (static_cast<std::size_t>(1) << 27))
    throw CapabilityError(
        "ambient_curvature_derivatives: rank-" + std::to_string(4 + r) +
        " table in cone dimension " + std::to_string(D) +
        " exceeds the desk-scale memory budget");
  ConeChain chain = build_chain(ambient, r + 2, "ambient_curvature_derivatives");
  CurvatureTable tb;
  if (r == 0) {
    tb = values_table(chain.rm, n, 0);
  } else {
    TensorJet cur = std::move(chain.rm);
    for (int m = 1; m < r; ++m) cur = covariant_derivative(cur, chain.gamma);
    tb = stream_last_derivative(cur, chain.gamma, n, r);
  }
  attach_base_metric(tb, chain);
  return tb;
}

TensorJet obstruction_from_table(const CurvatureTable& table) {
  const int n = table.n;
  const int TR = n + 1;
  TensorJet om(n, 2, jet_basis(n, 0));
  AmbientIndex idx(static_cast<std::size_t>(table.rank()), TR);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      idx[1] = 1 + i;
      idx[2] = 1 + j;
      om.at({i, j})[0] = table.at(idx);
    }
  return om;
}

TensorJet cotton_from_table(const CurvatureTable& table) {
  const int n = table.n;
  const int TR = n + 1;
  const int r = table.r;
  TensorJet ct(n, 3, jet_basis(n, 0));
  AmbientIndex idx(static_cast<std::size_t>(table.rank()), TR);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        // both orderings of the symmetrized pair in the tangential-fourth-slot
        // component
        idx[3] = 1 + l;
        idx[1] = 1 + i;
        idx[2] = 1 + j;
        v += table.at(idx);
        idx[1] = 1 + j;
        idx[2] = 1 + i;
        v += table.at(idx);
        // one tangential derivative slot, every placement
        idx[1] = 1 + i;
        idx[2] = 1 + j;
        idx[3] = TR;
        for (int s = 0; s < r; ++s) {
          idx[4 + s] = 1 + l;
          v += table.at(idx);
          idx[4 + s] = TR;
        }
        ct.at({i, j, l})[0] = v;
      }
  return ct;
}

TensorJet extended_obstruction(const MetricJet& g, int k, bool allow_heavy) {
  validate_extraction(g, k, /*strict_even=*/true, allow_heavy,
                      "extended_obstruction");
  RhoSeries series = solve_expansion(g, k + 1, 0);
  AmbientMetricJet amb = assemble_ambient(series, k + 1);
  CurvatureTable tb = ambient_curvature_derivatives(amb, k - 1);
  return obstruction_from_table(tb);
}

TensorJet higher_cotton(const MetricJet& g, int k, bool allow_heavy) {
  validate_extraction(g, k, /*strict_even=*/false, allow_heavy, "higher_cotton");
  RhoSeries series = solve_expansion(g, k + 1, 0);
  AmbientMetricJet amb = assemble_ambient(series, k + 1);
  CurvatureTable tb = ambient_curvature_derivatives(amb, k - 1);
  return cotton_from_table(tb);
}

ConformalCurvatureSet conformal_curvatures(const MetricJet& g, int k_max,
                                           bool allow_heavy) {
  validate_extraction(g, k_max, /*strict_even=*/true, allow_heavy,
                      "conformal_curvatures");
  RhoSeries series = solve_expansion(g, k_max + 1, 0);
  AmbientMetricJet amb = assemble_ambient(series, k_max + 1);
  ConformalCurvatureSet set;
  set.n = g.dim;
  set.k_max = k_max;
  for (int k = 1; k <= k_max; ++k) {
    CurvatureTable tb = ambient_curvature_derivatives(amb, k - 1);
    set.obstructions.push_back(obstruction_from_table(tb));
    set.cottons.push_back(cotton_from_table(tb));
  }
  return set;
}

TensorJet transverse_derivative_slice(const AmbientMetricJet& ambient, int k) {
  if (k < 1)
    throw UsageError("transverse_derivative_slice: k must be at least 1");
  ConeChain chain = build_chain(ambient, ambient.g.order(),
                                "transverse_derivative_slice");
  if (chain.rm.basis().order() < k - 1)
    throw InsufficientOrderError(
        "transverse_derivative_slice: cone order " +
        std::to_string(ambient.g.order()) + " leaves no room for " +
        std::to_string(k - 1) + " transverse derivatives");
  const int D = ambient.n + 2;
  const int RHO = ambient.n + 1;
  TensorJet s = std::move(chain.rm);
  for (int m = 1; m < k; ++m) {
    // Covariant derivative in the transverse direction only. The
    // transverse-transverse connection row vanishes for cone metrics, so
    // suppressed (already transverse) derivative slots pick up no correction
    // terms; the check below keeps that assumption honest.
    for (int a = 0; a < D; ++a)
      if (!chain.gamma.get(a, RHO, RHO).known_zero() &&
          chain.gamma.get(a, RHO, RHO).max_abs() > 0.0)
        throw ConsistencyError(
            "transverse_derivative_slice: transverse-transverse connection "
            "row is not zero");
    TensorJet nx(D, 4, jet_basis(s.basis().n_vars(), s.basis().order() - 1));
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c)
          for (int d = 0; d < D; ++d) {
            Jet v = jet_truncated(jet_partial(s.at({a, b, c, d}), RHO),
                                  nx.basis().order());
            for (int e = 0; e < D; ++e) {
              jet_mul_acc(v, chain.gamma.get(e, RHO, a), s.at({e, b, c, d}),
                          -1.0);
              jet_mul_acc(v, chain.gamma.get(e, RHO, b), s.at({a, e, c, d}),
                          -1.0);
              jet_mul_acc(v, chain.gamma.get(e, RHO, c), s.at({a, b, e, d}),
                          -1.0);
              jet_mul_acc(v, chain.gamma.get(e, RHO, d), s.at({a, b, c, e}),
                          -1.0);
            }
            v.scan_zero();
            nx.at({a, b, c, d}) = std::move(v);
          }
    s = std::move(nx);
  }
  return s;
}

RhoFamily lambda_series(const RhoSeries& series, int k) {
  if (k < 1) throw UsageError("lambda_series: k must be at least 1");
  const int n = series.n;
  int usable = series.K;
  for (int m = 0; m < static_cast<int>(series.coeffs.size()); ++m)
    usable = std::min(usable, series.payload(m) + m);
  if (series.has_even_trace)
    usable = std::min(usable, series.even_trace.order() + series.K);
  const int J = usable - (k + 1);
  if (J < 0)
    throw InsufficientOrderError(
        "lambda_series: series supports cone order " + std::to_string(usable) +
        ", need " + std::to_string(k + 1) + " for k = " + std::to_string(k));
  AmbientMetricJet amb = assemble_ambient(series, usable);
  TensorJet s = transverse_derivative_slice(amb, k);

  const int RHO = n + 1;
  const JetBasis& sb = s.basis();
  const JetBasis& b0 = jet_basis(n, 0);
  RhoFamily fam;
  fam.n = n;
  fam.k = k;
  fam.length = J;
  double fact = 1.0;
  for (int m = 0; m <= J; ++m) {
    const int id = sb.find(static_cast<uint64_t>(m) << (4 * RHO));
    TensorJet cm(n, 2, b0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet& comp = s.at({RHO, 1 + i, 1 + j, RHO});
        if (!comp.known_zero()) cm.at({i, j})[0] = fact * comp[id];
      }
    fam.coeffs.push_back(std::move(cm));
    fact *= (m + 1);
  }
  return fam;
}

double cotractor_transport(const CurvatureTable& table,
                           const ConformalFactor& factor,
                           const AmbientIndex& target) {
  const int n = table.n;
  const int D = n + 2;
  const int TR = n + 1;
  if (static_cast<int>(target.size()) != table.rank())
    throw UsageError("cotractor_transport: target length " +
                     std::to_string(target.size()) + ", table rank " +
                     std::to_string(table.rank()));
  int s_M = 0, s_tr = 0;
  for (int v : target) {
    if (v < 0 || v > TR)
      throw UsageError("cotractor_transport: target index out of range");
    if (v == TR)
      ++s_tr;
    else if (v >= 1)
      ++s_M;
  }
  if (n % 2 == 0 && s_M + 2 * s_tr > n + 1)
    throw CapabilityError(
        "cotractor_transport: slot budget " + std::to_string(s_M) + " + 2*" +
        std::to_string(s_tr) + " exceeds " + std::to_string(n + 1) +
        " in even dimension " + std::to_string(n));
  const Jet& w = factor.omega;
  if (!w.valid() || w.n_vars() < n)
    throw UsageError("cotractor_transport: factor does not cover the chart");

  std::vector<double> wl(n, 0.0);
  for (int v = 0; v < n; ++v) {
    const int id = w.basis().find(static_cast<uint64_t>(1) << (4 * v));
    if (id >= 0 && !w.known_zero()) wl[v] = w[id];
  }
  std::vector<double> wu(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) wu[i] += table.g0_inv[i * n + j] * wl[j];
  double w2 = 0.0;
  for (int i = 0; i < n; ++i) w2 += wl[i] * wu[i];

  // Upper-triangular rescaling matrix, rows = unhatted slot, columns =
  // hatted slot; indices on the gradient are raised with the unhatted base
  // metric.
  std::vector<double> p(static_cast<std::size_t>(D) * D, 0.0);
  p[0 * D + 0] = 1.0;
  for (int i = 0; i < n; ++i) p[0 * D + (1 + i)] = wl[i];
  p[0 * D + TR] = -0.5 * w2;
  for (int a = 0; a < n; ++a) {
    p[(1 + a) * D + (1 + a)] = 1.0;
    p[(1 + a) * D + TR] = -wu[a];
  }
  p[static_cast<std::size_t>(TR) * D + TR] = 1.0;

  struct Walk {
    const CurvatureTable* tb;
    const double* p;
    const AmbientIndex* tg;
    int D;
    double acc = 0.0;
    void go(int s, std::size_t f, double weight) {
      if (s == static_cast<int>(tg->size())) {
        acc += weight * tb->entries[f];
        return;
      }
      const int I = (*tg)[s];
      for (int A = 0; A < D; ++A) {
        const double pv = p[static_cast<std::size_t>(A) * D + I];
        if (pv != 0.0) go(s + 1, f * D + A, weight * pv);
      }
    }
  };
  Walk walk{&table, p.data(), &target, D};
  walk.go(0, 0, 1.0);
  return walk.acc;
}

}  // namespace ambientlab
