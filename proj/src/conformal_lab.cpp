#include "ambientlab/conformal_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ambientlab/chart_geometry.hpp"
#include "ambientlab/parallel.hpp"

namespace ambientlab {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRelFloor = 1e-30;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::vector<int> identity_map(int n) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  return m;
}

VariationReport make_report(std::string name, double lhs_scale,
                            double rhs_scale, double abs_err, double tol) {
  VariationReport r;
  r.identity = std::move(name);
  r.lhs_scale = lhs_scale;
  r.rhs_scale = rhs_scale;
  r.abs_err = abs_err;
  r.rel_err = abs_err / std::max({lhs_scale, rhs_scale, kRelFloor});
  r.tolerance = tol;
  r.pass = r.rel_err < tol;
  return r;
}

void require_chart(const MetricJet& g, const ConformalFactor& factor) {
  if (!factor.omega.valid())
    throw UsageError("conformal factor holds no jet");
  if (factor.omega.n_vars() != g.basis().n_vars())
    throw UsageError("conformal factor chart does not match the metric");
}

void require_pure_chart(const MetricJet& g, const char* who) {
  if (g.basis().n_vars() != g.dim) {
    std::ostringstream os;
    os << who << " expects a metric without parameter variables";
    throw UsageError(os.str());
  }
}

// exp(2 t omega) g with t a fresh first-order deformation variable appended
// after the chart variables.
MetricJet parameter_family(const MetricJet& g, const Jet& omega) {
  const int nv = g.basis().n_vars();
  const JetBasis& fb = jet_basis(nv + 1, g.order());
  const std::vector<int> up = identity_map(nv);
  Jet om = jet_embed(omega, fb, up);
  Jet t = Jet::variable(fb, nv, 0.0);
  Jet scale = jet_exp(om * 2.0 * t);
  MetricJet fam;
  fam.dim = g.dim;
  fam.g = JetMatrix(g.dim, fb);
  for (int i = 0; i < g.dim; ++i)
    for (int j = i; j < g.dim; ++j) {
      Jet e = jet_embed(g.g.at(i, j), fb, up) * scale;
      fam.g.at(i, j) = e;
      if (i != j) fam.g.at(j, i) = e;
    }
  return fam;
}

// Gradient of omega with the index raised by ginv.
std::vector<Jet> raised_gradient(const Jet& omega, const JetMatrix& ginv) {
  const int n = ginv.n;
  std::vector<Jet> dom(n), up(n);
  for (int j = 0; j < n; ++j) dom[j] = jet_partial(omega, j);
  for (int k = 0; k < n; ++k) {
    Jet a = ginv.at(k, 0) * dom[0];
    for (int m = 1; m < n; ++m) a += ginv.at(k, m) * dom[m];
    up[k] = a;
  }
  return up;
}

TensorJet value_tensor(int n, int nv,
                       const std::function<double(int, int)>& entry) {
  const JetBasis& b0 = jet_basis(nv, 0);
  TensorJet out(n, 2, b0, -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.at({i, j}) = Jet::constant(b0, entry(i, j));
  return out;
}

TensorJet law_schouten_hat(const MetricJet& g, const ConformalFactor& f) {
  MetricJet gh = conformal_rescale(g, f);
  JetMatrix ginv = metric_inverse(gh);
  ConnectionJet gam = levi_civita(gh, ginv);
  return schouten(gh, ginv, ricci_direct(gam));
}

TensorJet law_schouten_formula(const MetricJet& g, const ConformalFactor& f) {
  JetMatrix ginv = metric_inverse(g);
  ConnectionJet gam = levi_civita(g, ginv);
  TensorJet p = schouten(g, ginv, ricci_direct(gam));
  const int n = g.dim;
  TensorJet dom(n, 1, jet_basis(g.basis().n_vars(), g.order() - 1), -1);
  for (int j = 0; j < n; ++j) dom.at({j}) = jet_partial(f.omega, j);
  TensorJet hess = covariant_derivative(dom, gam);
  std::vector<Jet> wup = raised_gradient(f.omega, ginv);
  Jet norm2 = wup[0] * dom.at({0});
  for (int k = 1; k < n; ++k) norm2 += wup[k] * dom.at({k});
  TensorJet out = t_sub(p, hess);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet& a = out.at({i, j});
      a += dom.at({i}) * dom.at({j});
      a -= norm2 * g.g.at(i, j) * 0.5;
    }
  return out;
}

TensorJet law_bach_hat(const MetricJet& g, const ConformalFactor& f) {
  MetricJet gh = conformal_rescale(g, f);
  TensorJet om = obstruction_jets(gh, 1, g.order() - 4);
  return t_scale(om, jet_exp(f.omega * 2.0));
}

TensorJet law_bach_formula(const MetricJet& g, const ConformalFactor& f) {
  const int n = g.dim;
  JetMatrix ginv = metric_inverse(g);
  ConnectionJet gam = levi_civita(g, ginv);
  TensorJet rm = riemann_lowered(g, ginv, gam);
  TensorJet ric = ricci_direct(gam);
  TensorJet p = schouten(g, ginv, ric);
  TensorJet w = weyl(g, rm, p);
  TensorJet c = cotton(p, gam);
  std::vector<Jet> wup = raised_gradient(f.omega, ginv);
  TensorJet out = obstruction_jets(g, 1, g.order() - 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet& a = out.at({i, j});
      for (int k = 0; k < n; ++k) {
        a -= wup[k] * (c.at({i, j, k}) + c.at({j, i, k}));
        for (int l = 0; l < n; ++l)
          a += wup[k] * wup[l] * w.at({k, i, j, l});
      }
    }
  return out;
}

TensorJet law_omega_full_hat(const MetricJet& g, const ConformalFactor& f,
                             int k) {
  MetricJet gh = conformal_rescale(g, f);
  gh.g = jm_truncated(gh.g, 2 * k + 4);
  TensorJet om = extended_obstruction(gh, k);
  const double s = std::exp(2.0 * k * f.omega.value());
  return value_tensor(g.dim, g.basis().n_vars(), [&](int i, int j) {
    return s * om.at({i, j}).value();
  });
}

TensorJet law_omega_full_formula(const MetricJet& g, const ConformalFactor& f,
                                 int k) {
  const int n = g.dim;
  MetricJet gt;
  gt.dim = n;
  gt.g = jm_truncated(g.g, 2 * k + 4);
  RhoSeries series = solve_expansion(gt, k + 1);
  AmbientMetricJet amb = assemble_ambient(series, k + 1);
  CurvatureTable table = ambient_curvature_derivatives(amb, k - 1);
  return value_tensor(n, g.basis().n_vars(), [&](int i, int j) {
    AmbientIndex target = {n + 1, 1 + i, 1 + j, n + 1};
    for (int s = 1; s < k; ++s) target.push_back(n + 1);
    return cotractor_transport(table, f, target);
  });
}

TensorJet law_omega_linear_hat(const MetricJet& g, const ConformalFactor& f,
                               int k) {
  const int n = g.dim;
  const int nv = g.basis().n_vars();
  MetricJet gt;
  gt.dim = n;
  gt.g = jm_truncated(g.g, 2 * k + 4);
  Jet om = jet_truncated(f.omega, 2 * k + 4);
  MetricJet fam = parameter_family(gt, om);
  TensorJet omf = obstruction_jets(fam, k, 1);
  const double w0 = f.omega.value();
  return value_tensor(n, nv, [&](int i, int j) {
    const Jet& e = omf.at({i, j});
    double v1 = jet_extract_power(e, nv, 1).value();
    return v1 + 2.0 * k * w0 * e.value();
  });
}

TensorJet law_omega_linear_formula(const MetricJet& g,
                                   const ConformalFactor& f, int k) {
  const int n = g.dim;
  MetricJet gt;
  gt.dim = n;
  gt.g = jm_truncated(g.g, 2 * k + 4);
  TensorJet c = higher_cotton(gt, k);
  JetMatrix ginv = metric_inverse(gt);
  std::vector<Jet> wup = raised_gradient(jet_truncated(f.omega, 2 * k + 4), ginv);
  return value_tensor(n, g.basis().n_vars(), [&](int i, int j) {
    double total = 0.0;
    for (int l = 0; l < n; ++l)
      total -= wup[l].value() * c.at({i, j, l}).value();
    return total;
  });
}

// Contracts one contravariant against one covariant slot by a plain index
// sum; chart_geometry only offers the ginv-weighted pairings.
Jet mixed_trace(const TensorJet& t, int slot_up, int slot_down) {
  const int n = t.dim;
  std::vector<int> idx(t.rank, 0);
  Jet acc(t.basis());
  for (int a = 0; a < n; ++a) {
    idx[slot_up] = a;
    idx[slot_down] = a;
    std::size_t f = 0;
    for (int s = 0; s < t.rank; ++s) f = f * n + idx[s];
    acc += t.comps[f];
  }
  return acc;
}

struct TorusAccumulator {
  double integral = 0.0;
  double absolute = 0.0;
};

int torus_dimension(const TorusSpec& spec, int k, const char* who) {
  const int n = spec.metric.dimension;
  if (n < 3) throw UsageError("torus checks need dimension at least 3");
  if (!spec.omega) throw UsageError("torus spec carries no conformal factor");
  if (spec.grid < 2) throw UsageError("grid must have at least 2 nodes per axis");
  if (k < 1) throw UsageError("coefficient index must be at least 1");
  if (n % 2 == 0 && k > n / 2) {
    std::ostringstream os;
    os << who << ": coefficient " << k
       << " is not defined in even dimension " << n << " (k exceeds n/2)";
    throw CapabilityError(os.str());
  }
  double nodes = std::pow(static_cast<double>(spec.grid), n);
  if (nodes > double(1 << 22))
    throw UsageError("grid has too many nodes for a desk-scale run");
  double drift = torus_periodicity_error(spec);
  if (drift > 1e-10) {
    std::ostringstream os;
    os << who << ": expressions are not 2 pi periodic "
       << "(largest sampled deviation " << drift << ")";
    throw InputError(os.str());
  }
  return n;
}

std::vector<double> node_point(const TorusSpec& spec, std::size_t index,
                               int extra) {
  const int n = spec.metric.dimension;
  std::vector<double> x(n + extra, 0.0);
  std::size_t rest = index;
  for (int a = n - 1; a >= 0; --a) {
    x[a] = (2.0 * kPi * static_cast<double>(rest % spec.grid)) / spec.grid;
    rest /= spec.grid;
  }
  return x;
}

JetMatrix node_metric(const TorusSpec& spec, const JetBasis& b,
                      const std::vector<double>& pt) {
  const int n = spec.metric.dimension;
  JetMatrix gx(n, b);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet e = expr_eval_jet(spec.metric.components[i][j], b, pt);
      gx.at(i, j) = e;
      if (i != j) gx.at(j, i) = e;
    }
  return gx;
}

double node_cell_weight(const JetMatrix& gx, double cell) {
  double det = jm_det(jm_truncated(gx, 0)).value();
  if (!(det > 0.0)) return std::nan("");
  return std::sqrt(det) * cell;
}

}  // namespace

MetricJet conformal_rescale(const MetricJet& g, const ConformalFactor& factor) {
  require_chart(g, factor);
  MetricJet out;
  out.dim = g.dim;
  out.g = jm_scale(g.g, jet_exp(factor.omega * 2.0));
  return out;
}

const std::vector<TransformationLaw>& transformation_laws() {
  static const std::vector<TransformationLaw> laws = [] {
    std::vector<TransformationLaw> v;
    v.push_back({"schouten", 3, 1e-10, law_schouten_hat, law_schouten_formula});
    v.push_back({"bach", 6, 1e-9, law_bach_hat, law_bach_formula});
    for (int k = 1; k <= 2; ++k)
      v.push_back({"omega_full:" + std::to_string(k), 2 * k + 4, 1e-9,
                   [k](const MetricJet& g, const ConformalFactor& f) {
                     return law_omega_full_hat(g, f, k);
                   },
                   [k](const MetricJet& g, const ConformalFactor& f) {
                     return law_omega_full_formula(g, f, k);
                   }});
    for (int k = 1; k <= 3; ++k)
      v.push_back({"omega_linear:" + std::to_string(k), 2 * k + 4, 1e-8,
                   [k](const MetricJet& g, const ConformalFactor& f) {
                     return law_omega_linear_hat(g, f, k);
                   },
                   [k](const MetricJet& g, const ConformalFactor& f) {
                     return law_omega_linear_formula(g, f, k);
                   }});
    return v;
  }();
  return laws;
}

VariationReport transformation_law_check(const MetricJet& g,
                                         const ConformalFactor& factor,
                                         const std::string& law) {
  require_chart(g, factor);
  for (const TransformationLaw& entry : transformation_laws()) {
    if (entry.name != law) continue;
    if (g.order() < entry.min_order) {
      std::ostringstream os;
      os << "law '" << law << "' needs metric jets of order "
         << entry.min_order << ", got " << g.order();
      throw InsufficientOrderError(os.str());
    }
    TensorJet lhs = entry.hatted(g, factor);
    TensorJet rhs = entry.formula(g, factor);
    double abs_err = t_max_abs(t_sub(lhs, rhs));
    return make_report("transformation:" + law, t_max_abs(lhs),
                       t_max_abs(rhs), abs_err, entry.tolerance);
  }
  throw UsageError("unknown transformation law '" + law + "'");
}

VariationReport variation_of_expansion(const MetricJet& g,
                                       const ConformalFactor& factor, int K) {
  const int n = g.dim;
  require_pure_chart(g, "expansion variation");
  require_chart(g, factor);
  if (K < 1) throw UsageError("transverse order must be at least 1");
  if (n % 2 == 0 && K > n / 2 - 1)
    throw CapabilityError(
        "tensor-level variation in even dimension stops at transverse order "
        "n/2 - 1");
  const int O = g.order();
  if (O < 2 * K + 4) {
    std::ostringstream os;
    os << "expansion variation to transverse order " << K
       << " needs metric jets of order " << 2 * K + 4 << ", got " << O;
    throw InsufficientOrderError(os.str());
  }
  const int q = O - 2 * K - 1;

  // Left side: t-linear slice of the deformed expansion.
  RhoSeries pert = solve_expansion(parameter_family(g, factor.omega), K);

  // Right side: rho rides as one more jet variable, so chart-only covariant
  // derivatives of the series metric are derivatives at fixed rho.
  RhoSeries base = solve_expansion(g, K);
  const JetBasis& rb = jet_basis(n + 1, q + K + 2);
  const std::vector<int> up = identity_map(n);
  JetMatrix G(n, rb);
  for (int m = 0; m <= K; ++m) {
    const double inv_fact = 1.0 / factorial(m);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Jet& c = base.coeffs[m].at({i, j});
        Jet e = jet_embed(jet_truncated(c, std::min(q + 1, c.order())), rb, up);
        e = jet_var_shift(e, n, m, inv_fact);
        G.at(i, j) += e;
        if (i != j) G.at(j, i) += e;
      }
  }
  MetricJet gm;
  gm.dim = n;
  gm.g = G;
  JetMatrix ginv = metric_inverse(gm);
  ConnectionJet gam = levi_civita(gm, ginv);

  Jet omr = jet_embed(factor.omega, rb, up);
  std::vector<Jet> dom(n);
  for (int j = 0; j < n; ++j) dom[j] = jet_partial(omr, j);

  std::vector<Jet> y(n);
  for (int i = 0; i < n; ++i) {
    Jet acc = jet_antiderivative(ginv.at(i, 0), n) * dom[0];
    for (int j = 1; j < n; ++j)
      acc += jet_antiderivative(ginv.at(i, j), n) * dom[j];
    y[i] = -acc;
  }
  std::vector<Jet> ylow(n);
  for (int j = 0; j < n; ++j) {
    Jet acc = G.at(0, j) * y[0];
    for (int i = 1; i < n; ++i) acc += G.at(i, j) * y[i];
    ylow[j] = acc;
  }
  TensorJet ylow_t(n, 1, ylow[0].basis(), -1);
  for (int j = 0; j < n; ++j) ylow_t.at({j}) = ylow[j];
  TensorJet sym_grad = t_symmetrize2(covariant_derivative(ylow_t, gam), 0, 1);

  double abs_err = 0.0, lhs_scale = 0.0, rhs_scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet d_rho = jet_partial(G.at(i, j), n);
      Jet r = (G.at(i, j) - jet_var_shift(d_rho, n, 1, 1.0)) * omr * 2.0;
      r += sym_grad.at({i, j}) * 2.0;
      for (int m = 0; m <= K; ++m) {
        Jet lhs = jet_truncated(
            jet_extract_power(pert.coeffs[m].at({i, j}), n, 1), q);
        Jet rhs = jet_truncated(jet_extract_power(r, n, m) * factorial(m), q);
        abs_err = std::max(abs_err, (lhs - rhs).max_abs());
        lhs_scale = std::max(lhs_scale, lhs.max_abs());
        rhs_scale = std::max(rhs_scale, rhs.max_abs());
      }
    }

  std::ostringstream name;
  name << "expansion-variation K=" << K;
  VariationReport rep =
      make_report(name.str(), lhs_scale, rhs_scale, abs_err, 1e-9);
  for (int m = 0; m <= K + 1; ++m) {
    Jet probe = jet_extract_power(y[0], n, m);
    const JetBasis& xb = jet_basis(n, probe.order());
    TensorJet ym(n, 1, xb, +1);
    const std::vector<int> down = identity_map(n + 1);
    for (int i = 0; i < n; ++i)
      ym.at({i}) = jet_remove_var(jet_extract_power(y[i], n, m) * factorial(m),
                                  n, xb, down);
    rep.y_series.push_back(std::move(ym));
  }
  return rep;
}

VariationReport variation_of_volume_coefficients(const MetricJet& g,
                                                 const ConformalFactor& factor,
                                                 int k) {
  const int n = g.dim;
  require_pure_chart(g, "volume coefficient variation");
  require_chart(g, factor);
  if (k < 1) throw UsageError("coefficient index must be at least 1");
  if (n % 2 == 0 && k > n / 2)
    throw CapabilityError(
        "volume coefficients in even dimension stop at k = n/2");
  const int O = g.order();
  if (O < 2 * k + 2) {
    std::ostringstream os;
    os << "variation of coefficient " << k << " needs metric jets of order "
       << 2 * k + 2 << ", got " << O;
    throw InsufficientOrderError(os.str());
  }
  const int q = O - 2 * k - 1;

  RhoSeries pert = solve_expansion(parameter_family(g, factor.omega), k);
  VolumeSeries pv = volume_coefficients(pert, k);
  const JetBasis& xb = jet_basis(n, q);
  Jet lhs = jet_remove_var(
      jet_truncated(jet_extract_power(pv.vk(k), n, 1), q), n, xb,
      identity_map(n + 1));

  RhoSeries base = solve_expansion(g, k);
  VolumeSeries bv = volume_coefficients(base, k);
  LTensor lt = linearization_coefficients(base, k);
  ConnectionJet gam = levi_civita(g, base.g0_inv);
  std::vector<Jet> dom(n);
  for (int j = 0; j < n; ++j) dom[j] = jet_partial(factor.omega, j);
  TensorJet flux(n, 1, lt.l.basis(), +1);
  for (int i = 0; i < n; ++i) {
    Jet acc = lt.l.at({i, 0}) * dom[0];
    for (int j = 1; j < n; ++j) acc += lt.l.at({i, j}) * dom[j];
    flux.at({i}) = acc;
  }
  Jet rhs = mixed_trace(covariant_derivative(flux, gam), 0, 1);
  rhs -= factor.omega * bv.vk(k) * (2.0 * k);
  rhs = jet_truncated(rhs, q);

  std::ostringstream name;
  name << "volume-coefficient-variation k=" << k;
  return make_report(name.str(), lhs.max_abs(), rhs.max_abs(),
                     (lhs - rhs).max_abs(), 1e-8);
}

VariationReport second_jet_dependence_check(const MetricJet& g,
                                            const ConformalFactor& factor,
                                            int k, int trials, uint64_t seed,
                                            int min_degree) {
  const int n = g.dim;
  require_pure_chart(g, "second-jet dependence");
  require_chart(g, factor);
  if (k < 1) throw UsageError("coefficient index must be at least 1");
  if (trials < 2) throw UsageError("need at least 2 trials to measure spread");
  if (min_degree < 0) throw UsageError("min_degree must be nonnegative");
  if (n % 2 == 0 && k > n / 2)
    throw CapabilityError(
        "volume coefficients in even dimension stop at k = n/2");
  if (g.order() < 2 * k + 2) {
    std::ostringstream os;
    os << "second-jet dependence at coefficient " << k
       << " needs metric jets of order " << 2 * k + 2 << ", got " << g.order();
    throw InsufficientOrderError(os.str());
  }
  if (factor.omega.order() < min_degree)
    throw UsageError(
        "conformal factor jet is too short to carry randomized coefficients");
  const bool check_coeff = (n % 2 == 1) || (k <= n / 2 - 1);

  std::mt19937_64 rng(seed);
  const JetBasis& wb = factor.omega.basis();
  std::vector<double> values;
  std::vector<std::vector<double>> coeff_values;
  for (int trial = 0; trial < trials; ++trial) {
    Jet w = factor.omega;
    for (int idx = 0; idx < wb.size(); ++idx) {
      int d = wb.degree_of(idx);
      if (d >= min_degree)
        w[idx] = uniform_pm1(rng) * 0.3 / factorial(d);
    }
    ConformalFactor wf;
    wf.omega = w;
    RhoSeries s = solve_expansion(conformal_rescale(g, wf), k, 0);
    VolumeSeries vs = volume_coefficients(s, k);
    values.push_back(vs.vk(k).value());
    if (check_coeff) {
      std::vector<double> c;
      c.reserve(s.coeffs[k].comps.size());
      for (const Jet& e : s.coeffs[k].comps) c.push_back(e.value());
      coeff_values.push_back(std::move(c));
    }
  }

  double scale = std::abs(values[0]);
  if (check_coeff)
    for (double c : coeff_values[0]) scale = std::max(scale, std::abs(c));
  double spread = 0.0;
  for (int trial = 1; trial < trials; ++trial) {
    spread = std::max(spread, std::abs(values[trial] - values[0]));
    if (check_coeff)
      for (std::size_t i = 0; i < coeff_values[0].size(); ++i)
        spread = std::max(
            spread, std::abs(coeff_values[trial][i] - coeff_values[0][i]));
  }

  std::ostringstream name;
  name << "second-jet-dependence k=" << k;
  if (min_degree < 3) name << " control(min_degree=" << min_degree << ")";
  return make_report(name.str(), scale, scale, spread, 1e-11);
}

TorusSpec standard_torus(int n, uint64_t seed, double amplitude, int grid) {
  if (n < 3) throw UsageError("torus instances need dimension at least 3");
  TorusSpec spec;
  BuiltinParams params;
  params.seed = seed;
  params.amplitude = amplitude;
  spec.metric = builtin_spec("torus_perturbed", params, n);
  spec.grid = grid;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto angle = [&](int v) {
    ExprPtr x = expr_var(v, spec.metric.variables[v]);
    return (rng() & 1) ? expr_unary("sin", x) : expr_unary("cos", x);
  };
  ExprPtr omega;
  for (int term = 0; term < 3; ++term) {
    int a = static_cast<int>(rng() % n);
    int b = static_cast<int>(rng() % n);
    ExprPtr prod = expr_binary(
        '*', expr_number(amplitude * uniform_pm1(rng)),
        expr_binary('*', angle(a), angle(b)));
    omega = omega ? expr_binary('+', omega, prod) : prod;
  }
  spec.omega = omega;
  return spec;
}

double torus_periodicity_error(const TorusSpec& spec) {
  const int n = spec.metric.dimension;
  std::vector<ExprPtr> exprs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) exprs.push_back(spec.metric.components[i][j]);
  if (spec.omega) exprs.push_back(spec.omega);
  std::mt19937_64 rng(424242);
  double worst = 0.0;
  for (int sample = 0; sample < 8; ++sample) {
    std::vector<double> x(n);
    for (int a = 0; a < n; ++a) x[a] = (uniform_pm1(rng) + 1.0) * kPi;
    for (const ExprPtr& e : exprs) {
      double f0 = expr_eval(e, x);
      for (int a = 0; a < n; ++a) {
        std::vector<double> shifted = x;
        shifted[a] += 2.0 * kPi;
        double f1 = expr_eval(e, shifted);
        worst = std::max(worst,
                         std::abs(f1 - f0) / std::max(1.0, std::abs(f0)));
      }
    }
  }
  return worst;
}

std::vector<TorusNodeSample> torus_samples(const TorusSpec& spec, int k) {
  const int n = torus_dimension(spec, k, "torus samples");
  std::size_t nodes = 1;
  for (int a = 0; a < n; ++a) nodes *= static_cast<std::size_t>(spec.grid);
  const JetBasis& fb = jet_basis(n + 1, 2 * k + 2);
  const double cell = std::pow(2.0 * kPi / spec.grid, n);
  std::vector<TorusNodeSample> out(nodes);
  std::vector<std::string> failures(nodes);
  parallel_for_each(nodes, [&](std::size_t node) {
    try {
      std::vector<double> pt = node_point(spec, node, 1);
      JetMatrix gx = node_metric(spec, fb, pt);
      Jet w = expr_eval_jet(spec.omega, fb, pt);
      Jet t = Jet::variable(fb, n, 0.0);
      Jet scale = jet_exp(w * 2.0 * t);
      MetricJet fam;
      fam.dim = n;
      fam.g = jm_scale(gx, scale);
      RhoSeries series = solve_expansion(fam, k, 1);
      VolumeSeries vols = volume_coefficients(series, k);
      const Jet& vk = vols.vk(k);
      TorusNodeSample& s = out[node];
      s.x.assign(pt.begin(), pt.begin() + n);
      s.v_k = vk.value();
      s.delta_v_k = jet_extract_power(vk, n, 1).value();
      s.omega = w.value();
      s.weight = node_cell_weight(gx, cell);
    } catch (const std::exception& e) {
      failures[node] = e.what();
    }
  });
  for (std::size_t node = 0; node < nodes; ++node) {
    if (!failures[node].empty())
      throw InputError("torus node evaluation failed: " + failures[node]);
    if (!std::isfinite(out[node].weight))
      throw SingularInputError(
          "metric determinant is not positive at a torus node");
  }
  return out;
}

VariationReport functional_gradient_check(const TorusSpec& spec, int k) {
  std::vector<TorusNodeSample> samples = torus_samples(spec, k);
  const int n = spec.metric.dimension;
  TorusAccumulator delta, cross;
  for (const TorusNodeSample& s : samples) {
    delta.integral += s.delta_v_k * s.weight;
    delta.absolute += std::abs(s.delta_v_k) * s.weight;
    cross.integral += s.v_k * s.omega * s.weight;
    cross.absolute += std::abs(s.v_k * s.omega) * s.weight;
  }
  const double lhs = delta.integral;
  const double rhs = -2.0 * k * cross.integral;
  std::ostringstream name;
  if (n % 2 == 0 && k == n / 2)
    name << "integral-invariance k=" << k;
  else
    name << "volume-gradient-integral k=" << k;
  return make_report(name.str(), delta.absolute, 2.0 * k * cross.absolute,
                     std::abs(lhs - rhs), 1e-6);
}

VariationReport divergence_integral_check(const TorusSpec& spec, int k) {
  const int n = torus_dimension(spec, k, "divergence integral");
  std::size_t nodes = 1;
  for (int a = 0; a < n; ++a) nodes *= static_cast<std::size_t>(spec.grid);
  const JetBasis& xb = jet_basis(n, 2 * k + 2);
  const double cell = std::pow(2.0 * kPi / spec.grid, n);
  std::vector<double> value(nodes), absolute(nodes);
  std::vector<std::string> failures(nodes);
  parallel_for_each(nodes, [&](std::size_t node) {
    try {
      std::vector<double> pt = node_point(spec, node, 0);
      JetMatrix gx = node_metric(spec, xb, pt);
      MetricJet gm;
      gm.dim = n;
      gm.g = gx;
      RhoSeries series = solve_expansion(gm, k);
      LTensor lt = linearization_coefficients(series, k);
      Jet w = expr_eval_jet(spec.omega, xb, pt);
      std::vector<Jet> dom(n);
      for (int j = 0; j < n; ++j) dom[j] = jet_partial(w, j);
      TensorJet flux(n, 1, lt.l.basis(), +1);
      for (int i = 0; i < n; ++i) {
        Jet acc = lt.l.at({i, 0}) * dom[0];
        for (int j = 1; j < n; ++j) acc += lt.l.at({i, j}) * dom[j];
        flux.at({i}) = acc;
      }
      ConnectionJet gam = levi_civita(gm, series.g0_inv);
      double div = mixed_trace(covariant_derivative(flux, gam), 0, 1).value();
      double weight = node_cell_weight(gx, cell);
      value[node] = div * weight;
      absolute[node] = std::abs(div) * weight;
    } catch (const std::exception& e) {
      failures[node] = e.what();
    }
  });
  double lhs = 0.0, scale = 0.0;
  for (std::size_t node = 0; node < nodes; ++node) {
    if (!failures[node].empty())
      throw InputError("torus node evaluation failed: " + failures[node]);
    if (!std::isfinite(value[node]))
      throw SingularInputError(
          "metric determinant is not positive at a torus node");
    lhs += value[node];
    scale += absolute[node];
  }
  std::ostringstream name;
  name << "divergence-integral k=" << k;
  return make_report(name.str(), scale, 0.0, std::abs(lhs), 1e-8);
}

}  // namespace ambientlab
