#include "ambientlab/fg_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "ambientlab/errors.hpp"

namespace ambientlab {
namespace {

// Ambient variable layout: slot 0 = t about 1, slots 1..n = base chart,
// slot n+1 = rho about 0, slots n+2.. = parameter variables carried along.

std::vector<int> base_to_ambient_map(int n, int extra) {
  std::vector<int> m(n + extra);
  for (int i = 0; i < n; ++i) m[i] = i + 1;
  for (int e = 0; e < extra; ++e) m[n + e] = n + 2 + e;
  return m;
}

// Drops the t and rho slots of an ambient jet whose t/rho powers have already
// been stripped, landing in the base-chart basis at the given order.
Jet to_x_basis(const Jet& ambient_jet, int n, int extra, int payload) {
  Jet a = jet_truncated(ambient_jet, payload);
  const JetBasis& mid = jet_basis(n + 1 + extra, payload);
  std::vector<int> drop_t(n + 2 + extra);
  drop_t[0] = -1;
  for (int v = 1; v <= n; ++v) drop_t[v] = v - 1;
  drop_t[n + 1] = n;
  for (int e = 0; e < extra; ++e) drop_t[n + 2 + e] = n + 1 + e;
  a = jet_remove_var(a, 0, mid, drop_t);
  const JetBasis& xb = jet_basis(n + extra, payload);
  std::vector<int> drop_rho(n + 1 + extra);
  for (int v = 0; v < n; ++v) drop_rho[v] = v;
  drop_rho[n] = -1;
  for (int e = 0; e < extra; ++e) drop_rho[n + 1 + e] = n + e;
  return jet_remove_var(a, n, xb, drop_rho);
}

// 1/t as a pure-(t-1) series.
Jet reciprocal_t(const JetBasis& b) {
  Jet r(b);
  for (int s = 0; s <= b.order(); ++s) {
    int idx = b.find(static_cast<uint64_t>(s));
    if (idx >= 0) r[idx] = (s % 2 == 0) ? 1.0 : -1.0;
  }
  r.scan_zero();
  return r;
}

// -2 rho / t^2 as an explicit series.
Jet minus_two_rho_over_t2(const JetBasis& b, int rho_var) {
  Jet r(b);
  for (int s = 0; s + 1 <= b.order(); ++s) {
    uint64_t p = static_cast<uint64_t>(s) |
                 (uint64_t{1} << (4 * rho_var));
    int idx = b.find(p);
    if (idx >= 0) r[idx] = -2.0 * (s + 1) * ((s % 2 == 0) ? 1.0 : -1.0);
  }
  r.scan_zero();
  return r;
}

// Multiplies by t^{-2} = sum_s (s+1)(1-t)^s using exponent shifts only.
Jet apply_reciprocal_t2(const Jet& f) {
  Jet acc = f;
  for (int s = 1; s <= f.order(); ++s)
    acc += jet_var_shift(f, 0, s, (s % 2 == 0 ? 1.0 : -1.0) * (s + 1));
  return acc;
}

// Builds the cone metric 2t dt drho + 2rho dt^2 + t^2 g_rho at the given
// truncation order. terms[k] supplies the k-th rho-derivative coefficient
// (nullptr = zero); factorials are folded in here.
MetricJet assemble_cone(const std::vector<const TensorJet*>& terms, int n,
                        int extra, int frame_order) {
  const JetBasis& b = jet_basis(n + 2 + extra, frame_order);
  MetricJet m;
  m.dim = n + 2;
  m.g = JetMatrix(n + 2, b);
  Jet t = Jet::variable(b, 0, 1.0);
  Jet rho = Jet::variable(b, n + 1, 0.0);
  m.g.at(0, 0) = 2.0 * rho;
  m.g.at(0, n + 1) = t;
  m.g.at(n + 1, 0) = t;
  const auto vmap = base_to_ambient_map(n, extra);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet acc(b);
      double inv_fact = 1.0;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        if (k > 0) inv_fact /= static_cast<double>(k);
        if (!terms[k] || static_cast<int>(k) > frame_order) continue;
        Jet e = jet_embed(terms[k]->at({i, j}), b, vmap);
        acc += jet_var_shift(e, n + 1, static_cast<int>(k), inv_fact);
      }
      // times t^2 = 1 + 2(t-1) + (t-1)^2
      Jet gij = acc + jet_var_shift(acc, 0, 1, 2.0) + jet_var_shift(acc, 0, 2, 1.0);
      m.g.at(i + 1, j + 1) = gij;
      if (i != j) m.g.at(j + 1, i + 1) = gij;
    }
  return m;
}

// Fills in the closed-form corner of the cone inverse around a tangential
// block (which already includes the t^{-2} factor).
JetMatrix pack_cone_inverse(const JetMatrix& tangential_inv, int n,
                            const JetBasis& b) {
  JetMatrix inv(n + 2, b);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.at(i + 1, j + 1) = tangential_inv.at(i, j);
  Jet rt = reciprocal_t(b);
  inv.at(0, n + 1) = rt;
  inv.at(n + 1, 0) = rt;
  inv.at(n + 1, n + 1) = minus_two_rho_over_t2(b, n + 1);
  return inv;
}

// rho-series inverse ladder: given series coefficients Gser (factorials
// folded, Gser[0] = constant term) and H0 = Gser[0]^{-1} at generous order,
// returns series coefficients of the inverse through rho^upto, with H[m]
// exact to base order A - m.
std::vector<JetMatrix> inverse_series(const JetMatrix& h0,
                                      const std::vector<JetMatrix>& gser,
                                      int upto, int a_order) {
  const int n = h0.n;
  std::vector<JetMatrix> h;
  h.reserve(upto + 1);
  h.push_back(jm_truncated(h0, std::min(a_order, h0.basis().order())));
  for (int m = 1; m <= upto; ++m) {
    const int ord = std::max(a_order - m, 0);
    const JetBasis& xb = jet_basis(h0.basis().n_vars(), ord);
    JetMatrix acc(n, xb);
    bool any = false;
    for (int l = 1; l <= m && l < static_cast<int>(gser.size()); ++l) {
      acc = jm_add(acc, jm_truncated(jm_mul(gser[l], h[m - l]), ord));
      any = true;
    }
    if (!any) {
      h.push_back(acc);  // stays zero
      continue;
    }
    h.push_back(jm_truncated(jm_scale(jm_mul(h[0], acc), -1.0), ord));
  }
  return h;
}

// Tangential block of the cone inverse from the series ladder.
JetMatrix cone_inverse_from_ladder(const std::vector<JetMatrix>& h_x, int n,
                                   int extra, const JetBasis& b) {
  JetMatrix tang(n, b);
  const auto vmap = base_to_ambient_map(n, extra);
  const int rho_var = n + 1;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet acc(b);
      for (int m = 0; m < static_cast<int>(h_x.size()) && m <= b.order(); ++m)
        acc += jet_var_shift(jet_embed(h_x[m].at(i, j), b, vmap), rho_var, m, 1.0);
      Jet e = apply_reciprocal_t2(acc);
      tang.at(i, j) = e;
      if (i != j) tang.at(j, i) = e;
    }
  return pack_cone_inverse(tang, n, b);
}

TensorJet cone_ricci(const MetricJet& amb, const JetMatrix& ginv) {
  ConnectionJet gamma = levi_civita(amb, ginv);
  return ricci_direct(gamma);
}

// Coefficient of rho^{k-1} of the tangential Ricci block at t = 1, as
// base-chart jets truncated to `payload`.
TensorJet extract_tangential(const TensorJet& ric, int n, int extra, int k,
                             int payload) {
  const JetBasis& xb = jet_basis(n + extra, payload);
  TensorJet out(n, 2, xb, -1);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet row = ric.at({i + 1, j + 1});
      row = jet_extract_power(row, n + 1, k - 1);
      row = jet_extract_power(row, 0, 0);
      Jet x = to_x_basis(row, n, extra, payload);
      out.at({i, j}) = x;
      if (i != j) out.at({j, i}) = x;
    }
  return out;
}

// Coefficient of rho^{k-2} of the rho-rho Ricci component at t = 1. This row
// carries pure trace information and takes over when the trace part of the
// tangential row degenerates (step k = n in odd dimension).
Jet extract_rho_rho(const TensorJet& ric, int n, int extra, int k, int payload) {
  Jet row = ric.at({n + 1, n + 1});
  row = jet_extract_power(row, n + 1, k - 2);
  row = jet_extract_power(row, 0, 0);
  return to_x_basis(row, n, extra, payload);
}

double frob(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct ProbeVals {
  std::vector<double> tang;  // n*n tangential row values
  double rr = 0.0;           // rho-rho row value (k >= 2 only)
};

// Residual values at the base point with candidate top coefficient S.
ProbeVals probe_residual(const std::vector<TensorJet>& coeffs,
                         const TensorJet* s_cand, int k, int n, int extra) {
  std::vector<const TensorJet*> terms(k + 1, nullptr);
  for (int m = 0; m < static_cast<int>(coeffs.size()) && m < k; ++m)
    terms[m] = &coeffs[m];
  terms[k] = s_cand;
  MetricJet amb = assemble_cone(terms, n, extra, k + 1);
  JetMatrix sub(n, amb.basis());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub.at(i, j) = amb.g.at(i + 1, j + 1);
  JetMatrix ginv = pack_cone_inverse(jm_inverse(sub), n, amb.basis());
  TensorJet ric = cone_ricci(amb, ginv);
  TensorJet row = extract_tangential(ric, n, extra, k, 0);
  ProbeVals out;
  out.tang.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.tang[i * n + j] = row.at({i, j}).value();
  if (k >= 2) out.rr = extract_rho_rho(ric, n, extra, k, 0).value();
  return out;
}

TensorJet constant_tensor(const std::vector<double>& vals, int n, int extra) {
  TensorJet t(n, 2, jet_basis(n + extra, 0), -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      t.at({i, j}) = Jet::constant(t.basis(), vals[i * n + j]);
  return t;
}

struct SolveExtras {
  bool has_leftover = false;
  TensorJet leftover_tf;  // trace-free leftover of the degenerate step
};

RhoSeries solve_core(const MetricJet& g, int K, int terminal, SolveExtras* ex) {
  const int n = g.dim;
  if (n < 3)
    throw CapabilityError("expansion solve needs base dimension >= 3");
  if (K < 1) throw UsageError("expansion solve: requested order must be >= 1");
  if (n % 2 == 0 && K > n / 2)
    throw CapabilityError(
        "obstructed order: in even dimension n the expansion is determined "
        "only through rho-order n/2");
  const int e0 = g.order();
  if (e0 < 2 * K + 2) {
    std::ostringstream os;
    os << "expansion solve to order " << K << " needs metric jets of order "
       << 2 * K + 2 << ", got " << e0;
    throw InsufficientOrderError(os.str());
  }
  if (terminal < 0) terminal = e0 - 2 * K;
  if (terminal > e0 - 2 * K) {
    std::ostringstream os;
    os << "requested terminal payload " << terminal
       << " exceeds what metric order " << e0 << " affords at rho-order " << K;
    throw InsufficientOrderError(os.str());
  }
  const int extra = g.basis().n_vars() - n;
  auto payload = [&](int k) { return terminal + 2 * (K - k); };

  RhoSeries s;
  s.n = n;
  s.K = K;

  TensorJet g0(n, 2, jet_basis(n + extra, payload(0)), -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g0.at({i, j}) = jet_truncated(g.g.at(i, j), payload(0));
  s.coeffs.push_back(g0);

  MetricJet gtr;
  gtr.dim = n;
  gtr.g = jm_truncated(g.g, payload(0));
  JetMatrix h0 = metric_inverse(gtr);
  s.g0_inv = h0;

  std::vector<double> g0v(n * n), g0iv(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g0v[i * n + j] = g0.at({i, j}).value();
      g0iv[i * n + j] = h0.at(i, j).value();
    }

  // series coefficients with factorials folded, for the inverse ladder
  std::vector<JetMatrix> gser;
  {
    JetMatrix m0(n, g0.basis());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m0.at(i, j) = g0.at({i, j});
    gser.push_back(m0);
  }
  double inv_fact = 1.0;

  for (int k = 1; k <= K; ++k) {
    const bool degenerate = (n % 2 == 0 && k == n / 2);
    // At step k = n (odd n) the trace part of the tangential row degenerates
    // and the rho-rho row supplies the trace instead.
    const bool trace_from_rr = (n % 2 == 1 && k == n);
    const int p = payload(k);

    // --- recover the step constants by probing at the base point ---
    ProbeVals r0 = probe_residual(s.coeffs, nullptr, k, n, extra);

    std::vector<double> s1(n * n, 0.0);  // trace-free direction
    s1[0] = 1.0;
    for (int i = 0; i < n * n; ++i) s1[i] -= g0iv[0] / n * g0v[i];
    ProbeVals r1;
    {
      TensorJet t1 = constant_tensor(s1, n, extra);
      r1 = probe_residual(s.coeffs, &t1, k, n, extra);
    }
    std::vector<double> d1(n * n);
    for (int i = 0; i < n * n; ++i) d1[i] = r1.tang[i] - r0.tang[i];
    const double a = dot(d1, s1) / dot(s1, s1);

    ProbeVals r2;
    {
      TensorJet t2 = constant_tensor(g0v, n, extra);
      r2 = probe_residual(s.coeffs, &t2, k, n, extra);
    }
    std::vector<double> d2(n * n);
    for (int i = 0; i < n * n; ++i) d2[i] = r2.tang[i] - r0.tang[i];
    const double a_plus_nb = dot(d2, g0v) / dot(g0v, g0v);
    const double b = (a_plus_nb - a) / n;
    // rho-rho row responds to the trace alone
    const double c_rr = (k >= 2) ? (r2.rr - r0.rr) / n : 0.0;

    // third, random direction: the model must reproduce it exactly
    std::vector<double> s3(n * n);
    {
      std::mt19937_64 rng(0x51D3C0DEULL + 977u * k + 31u * n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = uniform_pm1(rng);
          s3[i * n + j] = v;
          s3[j * n + i] = v;
        }
    }
    ProbeVals r3;
    {
      TensorJet t3 = constant_tensor(s3, n, extra);
      r3 = probe_residual(s.coeffs, &t3, k, n, extra);
    }
    double tr_s3 = 0.0;
    for (int i = 0; i < n * n; ++i) tr_s3 += g0iv[i] * s3[i];
    std::vector<double> pred(n * n);
    for (int i = 0; i < n * n; ++i)
      pred[i] = r0.tang[i] + a * s3[i] + b * tr_s3 * g0v[i];
    std::vector<double> dev(n * n);
    for (int i = 0; i < n * n; ++i) dev[i] = r3.tang[i] - pred[i];
    const double pred_rr = r0.rr + c_rr * tr_s3;
    const double dev_rr = (k >= 2) ? r3.rr - pred_rr : 0.0;
    const double scale =
        std::max({frob(r3.tang), frob(pred), std::abs(a) * frob(s3),
                  std::abs(r3.rr), std::abs(pred_rr), 1e-30});
    if (std::sqrt(dot(dev, dev) + dev_rr * dev_rr) > 1e-10 * scale) {
      std::ostringstream os;
      os << "step " << k
         << ": residual is not affine in the top coefficient (deviation "
         << std::sqrt(dot(dev, dev) + dev_rr * dev_rr) / scale << " relative)";
      throw ConsistencyError(os.str());
    }
    s.probe_a.push_back(a);
    s.probe_b.push_back(b);

    const double a_ref = std::abs(s.probe_a.front());
    if (!degenerate && std::abs(a) < 1e-8 * a_ref)
      throw ConsistencyError("unexpected degeneracy of a determined step");
    if (trace_from_rr) {
      if (std::abs(a + n * b) > 1e-8 * std::max(a_ref, std::abs(a)))
        throw ConsistencyError(
            "expected trace degeneracy at step n is absent");
      if (std::abs(c_rr) < 1e-8 * a_ref)
        throw ConsistencyError("rho-rho trace carrier vanished");
    } else if (std::abs(a + n * b) < 1e-8 * std::max(a_ref, std::abs(a))) {
      throw ConsistencyError("step trace equation is degenerate");
    }

    // --- full-payload residual with the top coefficient off ---
    const int frame = p + k + 1;
    std::vector<const TensorJet*> terms;
    for (const TensorJet& c : s.coeffs) terms.push_back(&c);
    MetricJet amb = assemble_cone(terms, n, extra, frame);
    std::vector<JetMatrix> ladder = inverse_series(h0, gser, frame, frame);
    JetMatrix ginv = cone_inverse_from_ladder(ladder, n, extra, amb.basis());
    TensorJet ric_full = cone_ricci(amb, ginv);
    TensorJet res0 = extract_tangential(ric_full, n, extra, k, p);

    JetMatrix h0p = jm_truncated(h0, p);
    Jet tr_res(res0.basis());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tr_res += h0p.at(i, j) * res0.at({i, j});
    Jet tr_top = trace_from_rr
                     ? extract_rho_rho(ric_full, n, extra, k, p) * (-1.0 / c_rr)
                     : tr_res * (-1.0 / (a + n * b));

    TensorJet g0p = t_truncated(g0, p);
    TensorJet top(n, 2, res0.basis(), -1);
    if (!degenerate) {
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Jet v = (res0.at({i, j}) + b * (tr_top * g0p.at({i, j}))) * (-1.0 / a);
          top.at({i, j}) = v;
          if (i != j) top.at({j, i}) = v;
        }
      s.coeffs.push_back(top);
      inv_fact /= k;
      JetMatrix mk(n, top.basis());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mk.at(i, j) = top.at({i, j}) * inv_fact;
      gser.push_back(mk);
    } else {
      // Determined part is the trace alone; trace-free part is normalized to
      // zero and the leftover is the invariant residual of this order.
      s.has_even_trace = true;
      s.even_trace = tr_top;
      if (ex) {
        TensorJet leftover(n, 2, res0.basis(), -1);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            leftover.at({i, j}) =
                res0.at({i, j}) + (a / n + b) * (tr_top * g0p.at({i, j}));
        Jet tr_left(res0.basis());
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            tr_left += h0p.at(i, j) * leftover.at({i, j});
        TensorJet tf(n, 2, res0.basis(), -1);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            tf.at({i, j}) =
                leftover.at({i, j}) - (1.0 / n) * (tr_left * g0p.at({i, j}));
        ex->leftover_tf = tf;
        ex->has_leftover = true;
      }
    }
  }
  return s;
}

}  // namespace

RhoSeries solve_expansion(const MetricJet& g, int K, int terminal_payload) {
  return solve_core(g, K, terminal_payload, nullptr);
}

AmbientMetricJet assemble_ambient(const RhoSeries& series, int ambient_order) {
  if (series.n < 3 || series.coeffs.empty())
    throw UsageError("assemble: series is empty");
  if (ambient_order < 0) throw UsageError("assemble: negative order");
  const int n = series.n;
  const int extra = series.coeffs.front().basis().n_vars() - n;
  std::vector<const TensorJet*> terms;
  for (int k = 0; k < static_cast<int>(series.coeffs.size()) && k <= ambient_order;
       ++k) {
    if (series.payload(k) < ambient_order - k) {
      std::ostringstream os;
      os << "assemble: coefficient " << k << " carries base order "
         << series.payload(k) << ", need " << ambient_order - k
         << " for truncation order " << ambient_order;
      throw InsufficientOrderError(os.str());
    }
    terms.push_back(&series.coeffs[k]);
  }
  TensorJet trace_term;
  if (series.has_even_trace && n / 2 <= ambient_order) {
    const int ord = series.even_trace.order();
    if (ord < ambient_order - n / 2)
      throw InsufficientOrderError(
          "assemble: stored trace record is too short for this truncation");
    trace_term = TensorJet(n, 2, jet_basis(n + extra, ord), -1);
    const Jet tr_over_n = series.even_trace * (1.0 / n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        trace_term.at({i, j}) =
            tr_over_n * jet_truncated(series.coeffs.front().at({i, j}), ord);
    terms.push_back(&trace_term);
  }
  AmbientMetricJet out;
  out.n = n;
  out.g = assemble_cone(terms, n, extra, ambient_order);
  return out;
}

JetMatrix ambient_inverse(const AmbientMetricJet& ambient) {
  const int n = ambient.n;
  if (ambient.g.dim != n + 2) throw UsageError("ambient inverse: bad dimensions");
  JetMatrix sub(n, ambient.g.basis());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub.at(i, j) = ambient.g.g.at(i + 1, j + 1);
  return pack_cone_inverse(jm_inverse(sub), n, ambient.g.basis());
}

ObstructionReport obstruction_residual(const MetricJet& g) {
  const int n = g.dim;
  if (n % 2 != 0)
    throw CapabilityError(
        "the obstructed order exists only in even base dimension");
  if (g.order() < n + 2) {
    std::ostringstream os;
    os << "obstruction residual needs metric jets of order " << n + 2
       << ", got " << g.order();
    throw InsufficientOrderError(os.str());
  }
  SolveExtras ex;
  RhoSeries s = solve_core(g, n / 2, -1, &ex);
  if (!ex.has_leftover)
    throw ConsistencyError("degenerate step did not report its leftover");
  ObstructionReport r;
  r.n = n;
  r.residual = ex.leftover_tf;
  if (n == 4) {
    // compare against the conformally invariant rank-2 tensor of dimension 4
    JetMatrix ginv = metric_inverse(g);
    ConnectionJet gamma = levi_civita(g, ginv);
    TensorJet ric = ricci_direct(gamma);
    TensorJet p = schouten(g, ginv, ric);
    TensorJet rm = riemann_lowered(g, ginv, gamma);
    TensorJet w = weyl(g, rm, p);
    TensorJet bt = bach(g, ginv, p, w, gamma);
    const int ord = std::min(r.residual.basis().order(), bt.basis().order());
    TensorJet res_t = t_truncated(r.residual, ord);
    TensorJet bach_t = t_truncated(bt, ord);
    double rb = 0.0, bb = 0.0, rr = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet& x = res_t.at({i, j});
        const Jet& y = bach_t.at({i, j});
        for (int c = 0; c < x.basis().size(); ++c) {
          rb += x[c] * y[c];
          bb += y[c] * y[c];
          rr += x[c] * x[c];
        }
      }
    r.has_bach_fit = true;
    r.bach_scale = bb > 0.0 ? rb / bb : 0.0;
    double dev2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet& x = res_t.at({i, j});
        const Jet& y = bach_t.at({i, j});
        for (int c = 0; c < x.basis().size(); ++c) {
          double d = x[c] - r.bach_scale * y[c];
          dev2 += d * d;
        }
      }
    r.bach_rel_dev =
        std::sqrt(dev2) / std::max({std::sqrt(rr), std::sqrt(bb), 1e-30});
  }
  return r;
}

RhoSeries closed_form_series(const MetricJet& g, int K) {
  const int n = g.dim;
  if (n < 3) throw CapabilityError("closed-form series needs dimension >= 3");
  if (K < 1) throw UsageError("closed-form series: order must be >= 1");
  if (n % 2 == 0 && K > n / 2)
    throw CapabilityError(
        "obstructed order: in even dimension n the expansion is determined "
        "only through rho-order n/2");
  const int e0 = g.order();
  if (e0 < 2) throw InsufficientOrderError("closed-form series needs order >= 2");
  const int extra = g.basis().n_vars() - n;

  JetMatrix ginv = metric_inverse(g);
  ConnectionJet gamma = levi_civita(g, ginv);
  TensorJet ric = ricci_direct(gamma);
  TensorJet p = schouten(g, ginv, ric);
  TensorJet praised = raise_slot(p, 0, ginv);
  const int pord = p.basis().order();
  TensorJet pp(n, 2, p.basis(), -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet acc(p.basis());
      for (int k = 0; k < n; ++k) acc += p.at({i, k}) * praised.at({k, j});
      pp.at({i, j}) = jet_truncated(acc, pord);
    }

  RhoSeries s;
  s.n = n;
  s.K = K;
  s.g0_inv = ginv;
  {
    TensorJet g0(n, 2, g.basis(), -1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g0.at({i, j}) = g.g.at(i, j);
    s.coeffs.push_back(g0);
  }
  const int tensor_top = (n % 2 == 0 && K == n / 2) ? K - 1 : K;
  if (tensor_top >= 1) s.coeffs.push_back(t_scale(p, 2.0));
  if (tensor_top >= 2) s.coeffs.push_back(t_scale(pp, 2.0));
  for (int k = 3; k <= tensor_top; ++k) {
    const int ord = std::max(std::min(e0 - 2 * k, pord), 0);
    s.coeffs.push_back(TensorJet(n, 2, jet_basis(n + extra, ord), -1));
  }
  if (n % 2 == 0 && K == n / 2) {
    s.has_even_trace = true;
    if (K == 1) {
      s.even_trace = trace2(s.coeffs.front(), ginv);  // unused in practice (n=2 excluded)
    } else if (K == 2) {
      s.even_trace = 2.0 * trace2(pp, ginv);
    } else {
      s.even_trace = Jet(jet_basis(n + extra, std::max(pord, 0)));
    }
  }
  return s;
}

}  // namespace ambientlab
