#include "ambientlab/chart_geometry.hpp"

#include <vector>

#include "ambientlab/errors.hpp"

namespace ambientlab {

JetMatrix metric_inverse(const MetricJet& g) {
  JetMatrix inv = jm_inverse(g.g);
  for (int i = 0; i < inv.n; ++i)
    for (int j = i + 1; j < inv.n; ++j) {
      Jet s = (inv.at(i, j) + inv.at(j, i)) * 0.5;
      inv.at(i, j) = s;
      inv.at(j, i) = s;
    }
  for (auto& e : inv.m) e.scan_zero();
  return inv;
}

ConnectionJet levi_civita(const MetricJet& g, const JetMatrix& ginv) {
  const int n = g.dim;
  if (g.order() < 1)
    throw InsufficientOrderError("levi_civita: metric carries no derivative orders");
  const JetBasis& gb = jet_basis(g.basis().n_vars(), g.order() - 1);
  ConnectionJet gamma(n, gb);
  std::vector<Jet> paren(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      for (int m = 0; m < n; ++m) {
        paren[m] = jet_partial(g.g.at(j, m), i);
        paren[m] += jet_partial(g.g.at(i, m), j);
        paren[m] -= jet_partial(g.g.at(i, j), m);
        paren[m].scan_zero();
      }
      for (int a = 0; a < n; ++a) {
        Jet& out = gamma.ref(a, i, j);
        for (int m = 0; m < n; ++m)
          jet_mul_acc(out, ginv.at(a, m), paren[m], 0.5);
        out.scan_zero();
      }
    }
  return gamma;
}

TensorJet riemann_lowered(const MetricJet& g, const JetMatrix& ginv,
                          const ConnectionJet& gamma) {
  (void)ginv;
  const int n = g.dim;
  if (gamma.basis().order() < 1)
    throw InsufficientOrderError("riemann_lowered: connection order too low");
  const JetBasis& rb = jet_basis(g.basis().n_vars(), gamma.basis().order() - 1);

  // Upper-index tensor first, exploiting skewness in the derivative pair.
  TensorJet up(n, 4, rb);  // R^a_{jkl} stored at [a,j,k,l]
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          Jet r = jet_partial(gamma.get(a, l, j), k);
          r -= jet_partial(gamma.get(a, k, j), l);
          for (int b = 0; b < n; ++b) {
            jet_mul_acc(r, gamma.get(a, k, b), gamma.get(b, l, j));
            jet_mul_acc(r, gamma.get(a, l, b), gamma.get(b, k, j), -1.0);
          }
          r.scan_zero();
          up.at({a, j, l, k}) = -r;
          up.at({a, j, k, l}) = std::move(r);
        }

  TensorJet low(n, 4, rb);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          Jet& out = low.at({i, j, k, l});
          for (int a = 0; a < n; ++a)
            jet_mul_acc(out, g.g.at(i, a), up.at({a, j, k, l}));
          out.scan_zero();
          low.at({i, j, l, k}) = -out;
        }
  return low;
}

TensorJet ricci_direct(const ConnectionJet& gamma) {
  const int n = gamma.dim;
  if (gamma.basis().order() < 1)
    throw InsufficientOrderError("ricci_direct: connection order too low");
  const JetBasis& rb = jet_basis(gamma.basis().n_vars(), gamma.basis().order() - 1);

  std::vector<Jet> trg(n, Jet(gamma.basis()));  // trGamma_j = Gamma^a_{aj}
  for (int j = 0; j < n; ++j) {
    for (int a = 0; a < n; ++a) trg[j] += gamma.get(a, a, j);
    trg[j].scan_zero();
  }

  TensorJet ric(n, 2, rb);
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      Jet r(rb);
      for (int a = 0; a < n; ++a) {
        if (!gamma.get(a, l, j).known_zero()) r += jet_partial(gamma.get(a, l, j), a);
      }
      r -= jet_partial(trg[j], l);
      for (int b = 0; b < n; ++b) jet_mul_acc(r, trg[b], gamma.get(b, l, j));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          jet_mul_acc(r, gamma.get(a, l, b), gamma.get(b, a, j), -1.0);
      r.scan_zero();
      ric.at({l, j}) = r;
      ric.at({j, l}) = std::move(r);
    }
  return ric;
}

Jet scalar_curvature(const TensorJet& ricci, const JetMatrix& ginv) {
  return trace2(ricci, ginv);
}

Jet trace2(const TensorJet& t, const JetMatrix& ginv) {
  if (t.rank != 2) throw UsageError("trace2: rank-2 tensor expected");
  Jet s(t.basis());
  for (int i = 0; i < t.dim; ++i)
    for (int j = 0; j < t.dim; ++j)
      jet_mul_acc(s, ginv.at(i, j), t.at({i, j}));
  return s;
}

TensorJet schouten(const MetricJet& g, const JetMatrix& ginv, const TensorJet& ricci) {
  const int n = g.dim;
  if (n < 3) throw CapabilityError("schouten: requires dimension >= 3");
  Jet scal = trace2(ricci, ginv);
  TensorJet p(n, 2, ricci.basis());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet e = ricci.at({i, j});
      jet_mul_acc(e, scal, g.g.at(i, j), -1.0 / (2.0 * (n - 1)));
      p.at({i, j}) = e * (1.0 / (n - 2));
    }
  return p;
}

TensorJet weyl(const MetricJet& g, const TensorJet& rm, const TensorJet& p) {
  const int n = g.dim;
  TensorJet w = rm;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet& out = w.at({i, j, k, l});
          jet_mul_acc(out, g.g.at(i, k), p.at({j, l}), -1.0);
          jet_mul_acc(out, g.g.at(j, l), p.at({i, k}), -1.0);
          jet_mul_acc(out, g.g.at(i, l), p.at({j, k}), 1.0);
          jet_mul_acc(out, g.g.at(j, k), p.at({i, l}), 1.0);
        }
  return w;
}

TensorJet cotton(const TensorJet& p, const ConnectionJet& gamma) {
  TensorJet dp = covariant_derivative(p, gamma);
  const int n = p.dim;
  TensorJet c(n, 3, dp.basis());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        c.at({i, j, k}) = dp.at({i, j, k}) - dp.at({i, k, j});
  return c;
}

TensorJet bach(const MetricJet& g, const JetMatrix& ginv, const TensorJet& p,
               const TensorJet& w, const ConnectionJet& gamma) {
  const int n = g.dim;
  TensorJet dp = covariant_derivative(p, gamma);      // P_{ij,k}
  TensorJet ddp = covariant_derivative(dp, gamma);    // P_{ij,kl}
  TensorJet b(n, 2, ddp.basis());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet& out = b.at({i, j});
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet term = ddp.at({i, j, k, l}) - ddp.at({i, k, j, l});
          jet_mul_acc(out, ginv.at(k, l), term);
        }
      // - P^{kl} W_{kijl}
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet pkl(ddp.basis());
          for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c) {
              if (ginv.at(k, a).known_zero() || ginv.at(l, c).known_zero()) continue;
              Jet t = ginv.at(k, a) * ginv.at(l, c);
              jet_mul_acc(pkl, t, p.at({a, c}));
            }
          jet_mul_acc(out, pkl, w.at({k, i, j, l}), -1.0);
        }
      out.scan_zero();
    }
  return b;
}

TensorJet covariant_derivative(const TensorJet& t, const ConnectionJet& gamma) {
  const int n = t.dim;
  if (t.basis().order() < 1)
    throw InsufficientOrderError("covariant_derivative: no jet orders left to spend");
  const JetBasis& rb = jet_basis(t.basis().n_vars(), t.basis().order() - 1);
  TensorJet out(n, t.rank + 1, rb);
  out.variance = t.variance;
  out.variance.push_back(-1);

  std::vector<int> idx(t.rank, 0);
  const std::size_t ncomp = t.comps.size();
  std::vector<std::size_t> stride(t.rank, 1);
  for (int s = t.rank - 2; s >= 0; --s) stride[s] = stride[s + 1] * n;

  for (std::size_t f = 0; f < ncomp; ++f) {
    std::size_t rem = f;
    for (int s = 0; s < t.rank; ++s) {
      idx[s] = static_cast<int>(rem / stride[s]);
      rem %= stride[s];
    }
    for (int m = 0; m < n; ++m) {
      Jet r = t.comps[f].known_zero() ? Jet(rb) : jet_partial(t.comps[f], m);
      for (int s = 0; s < t.rank; ++s) {
        const int as = idx[s];
        const std::size_t base = f - as * stride[s];
        if (t.variance[s] < 0) {
          for (int bidx = 0; bidx < n; ++bidx)
            jet_mul_acc(r, gamma.get(bidx, m, as), t.comps[base + bidx * stride[s]],
                        -1.0);
        } else {
          for (int bidx = 0; bidx < n; ++bidx)
            jet_mul_acc(r, gamma.get(as, m, bidx), t.comps[base + bidx * stride[s]],
                        1.0);
        }
      }
      r.scan_zero();
      out.comps[f * n + m] = std::move(r);
    }
  }
  return out;
}

TensorJet contract_ginv(const TensorJet& t, int slot1, int slot2,
                        const JetMatrix& ginv) {
  if (slot1 > slot2) std::swap(slot1, slot2);
  const int n = t.dim;
  const int out_rank = t.rank - 2;
  TensorJet out(n, out_rank, t.basis());
  for (int s = 0, d = 0; s < t.rank; ++s) {
    if (s == slot1 || s == slot2) continue;
    out.variance[d++] = t.variance[s];
  }
  std::vector<int> oidx(out_rank, 0), idx(t.rank, 0);
  const std::size_t nout = out.comps.size();
  for (std::size_t f = 0; f < nout; ++f) {
    std::size_t rem = f;
    for (int s = out_rank - 1; s >= 0; --s) {
      oidx[s] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int s = 0, d = 0; s < t.rank; ++s)
      if (s != slot1 && s != slot2) idx[s] = oidx[d++];
    Jet& acc = out.comps[f];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (ginv.at(a, b).known_zero()) continue;
        idx[slot1] = a;
        idx[slot2] = b;
        std::size_t g = 0;
        for (int s = 0; s < t.rank; ++s) g = g * n + idx[s];
        jet_mul_acc(acc, ginv.at(a, b), t.comps[g]);
      }
    acc.scan_zero();
  }
  return out;
}

TensorJet raise_slot(const TensorJet& t, int slot, const JetMatrix& ginv) {
  const int n = t.dim;
  TensorJet out(n, t.rank, t.basis());
  out.variance = t.variance;
  out.variance[slot] = +1;
  std::vector<int> idx(t.rank, 0);
  std::vector<std::size_t> stride(t.rank, 1);
  for (int s = t.rank - 2; s >= 0; --s) stride[s] = stride[s + 1] * n;
  const std::size_t ncomp = t.comps.size();
  for (std::size_t f = 0; f < ncomp; ++f) {
    std::size_t rem = f;
    for (int s = 0; s < t.rank; ++s) {
      idx[s] = static_cast<int>(rem / stride[s]);
      rem %= stride[s];
    }
    const int a = idx[slot];
    const std::size_t base = f - a * stride[slot];
    Jet& acc = out.comps[f];
    for (int b = 0; b < n; ++b) {
      if (ginv.at(a, b).known_zero()) continue;
      jet_mul_acc(acc, ginv.at(a, b), t.comps[base + b * stride[slot]]);
    }
    acc.scan_zero();
  }
  return out;
}

}  // namespace ambientlab
