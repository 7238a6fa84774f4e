#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ambientlab/chart_geometry.hpp"
#include "ambientlab/metric_zoo.hpp"

using namespace ambientlab;

namespace {

struct Curvature {
  MetricJet g;
  JetMatrix ginv;
  ConnectionJet gamma;
  TensorJet rm, ric, p, w, c, b;
  Jet scal, j;
};

Curvature chain(const MetricJet& m, bool with_bach = true) {
  Curvature out;
  out.g = m;
  out.ginv = metric_inverse(m);
  out.gamma = levi_civita(m, out.ginv);
  out.rm = riemann_lowered(m, out.ginv, out.gamma);
  out.ric = ricci_direct(out.gamma);
  out.scal = scalar_curvature(out.ric, out.ginv);
  out.p = schouten(m, out.ginv, out.ric);
  out.j = trace2(out.p, out.ginv);
  out.w = weyl(m, out.rm, out.p);
  out.c = cotton(out.p, out.gamma);
  if (with_bach) out.b = bach(m, out.ginv, out.p, out.w, out.gamma);
  return out;
}

TensorJet metric_tensor(const MetricJet& m) {
  TensorJet t(m.dim, 2, m.basis());
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) t.at({i, j}) = m.g.at(i, j);
  return t;
}

double rel_spread(const TensorJet& a, const TensorJet& b) {
  double scale = std::max({a.max_abs(), b.max_abs(), 1e-30});
  int ord = std::min(a.basis().order(), b.basis().order());
  return t_max_abs(t_sub(t_truncated(a, ord), t_truncated(b, ord))) / scale;
}

// --- independent double-precision Ricci oracle (no jets involved) ---

struct FdOracle {
  const MetricSpec& spec;
  int n;
  double h = 1e-3;

  double g_at(int i, int j, const std::vector<double>& x) const {
    return expr_eval(spec.components[i][j], x);
  }
  // Gamma^a_{ij} at x via central differences of g
  std::vector<double> gamma_at(const std::vector<double>& x) const {
    std::vector<double> gmat(n * n), dg(n * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gmat[i * n + j] = g_at(i, j, x);
    std::vector<double> ginv = dm_inverse(gmat, n);
    for (int k = 0; k < n; ++k) {
      std::vector<double> up = x, dn = x;
      up[k] += h;
      dn[k] -= h;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dg[(k * n + i) * n + j] = (g_at(i, j, up) - g_at(i, j, dn)) / (2 * h);
    }
    std::vector<double> gam(n * n * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0;
          for (int m = 0; m < n; ++m)
            s += ginv[a * n + m] * (dg[(i * n + j) * n + m] + dg[(j * n + i) * n + m] -
                                    dg[(m * n + i) * n + j]);
          gam[(a * n + i) * n + j] = 0.5 * s;
        }
    return gam;
  }
  // Ric_{jl} = d_a Gamma^a_{lj} - d_l Gamma^a_{aj}
  //          + Gamma^a_{ab} Gamma^b_{lj} - Gamma^a_{lb} Gamma^b_{aj}
  std::vector<double> ricci_at(const std::vector<double>& x) const {
    std::vector<std::vector<double>> gp(n), gm(n);
    for (int k = 0; k < n; ++k) {
      std::vector<double> up = x, dn = x;
      up[k] += h;
      dn[k] -= h;
      gp[k] = gamma_at(up);
      gm[k] = gamma_at(dn);
    }
    std::vector<double> gam = gamma_at(x);
    auto G = [&](const std::vector<double>& t, int a, int i, int j) {
      return t[(a * n + i) * n + j];
    };
    std::vector<double> ric(n * n);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        double s = 0;
        for (int a = 0; a < n; ++a) {
          s += (G(gp[a], a, l, j) - G(gm[a], a, l, j)) / (2 * h);
          s -= (G(gp[l], a, a, j) - G(gm[l], a, a, j)) / (2 * h);
          for (int b = 0; b < n; ++b)
            s += G(gam, a, a, b) * G(gam, b, l, j) - G(gam, a, l, b) * G(gam, b, a, j);
        }
        ric[j * n + l] = s;
      }
    return ric;
  }
};

}  // namespace

TEST_CASE("flat space: connection and curvature vanish") {
  MetricJet m = builtin_metric("flat", BuiltinParams{}, {0.1, 0.2, 0.3}, 4);
  Curvature c = chain(m);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(c.gamma.get(k, i, j).max_abs() == 0.0);
  CHECK(c.rm.max_abs() == 0.0);
  CHECK(c.ric.max_abs() == 0.0);
  CHECK(c.scal.max_abs() == 0.0);
}

TEST_CASE("round sphere is Einstein with the expected sign and constants") {
  const int n = 4;
  MetricJet m = builtin_metric("sphere_stereographic", BuiltinParams{},
                               {0.2, -0.3, 0.5, 0.1}, 4);
  Curvature c = chain(m);
  // Ric = (n-1) g as a field: every jet coefficient agrees
  TensorJet target = metric_tensor(m);
  target = t_scale(target, double(n - 1));
  CHECK(rel_spread(c.ric, target) < 1e-10);
  // scalar curvature n(n-1)
  CHECK(c.scal.value() == doctest::Approx(12.0).epsilon(1e-10));
  Jet scal_rest = c.scal;
  scal_rest[0] -= 12.0;
  CHECK(scal_rest.max_abs() < 1e-9);
  // P = g/2, J = n/2
  CHECK(rel_spread(c.p, t_scale(metric_tensor(m), 0.5)) < 1e-10);
  CHECK(c.j.value() == doctest::Approx(2.0).epsilon(1e-12));
  // locally conformally flat: W, C, B all vanish
  double gs = metric_tensor(m).max_abs();
  CHECK(c.w.max_abs() < 1e-9 * gs);
  CHECK(c.c.max_abs() < 1e-9 * gs);
  CHECK(c.b.max_abs() < 1e-9 * gs);
}

TEST_CASE("Ricci values agree with a jet-free finite-difference oracle") {
  SUBCASE("sphere chart") {
    MetricSpec spec = builtin_spec("sphere_stereographic", BuiltinParams{}, 4);
    std::vector<double> x = {0.2, -0.3, 0.5, 0.1};
    Curvature c = chain(instantiate_jets(spec, x, 3), false);
    FdOracle fd{spec, 4};
    std::vector<double> ric = fd.ricci_at(x);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(c.ric.at({i, j}).value() - ric[i * 4 + j]) < 1e-4);
  }
  SUBCASE("generic periodic metric") {
    BuiltinParams params;
    params.seed = 2;
    params.amplitude = 0.3;
    MetricSpec spec = builtin_spec("torus_perturbed", params, 3);
    std::vector<double> x = {0.4, 1.1, -0.6};
    Curvature c = chain(instantiate_jets(spec, x, 3), false);
    FdOracle fd{spec, 3};
    std::vector<double> ric = fd.ricci_at(x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(c.ric.at({i, j}).value() - ric[i * 3 + j]) < 1e-4);
  }
}

TEST_CASE("curvature tensor symmetries on a generic metric") {
  const int n = 5;
  MetricJet m = random_jet_metric(n, 1, 0.05, 6);
  Curvature c = chain(m);
  double scale = c.rm.max_abs();
  REQUIRE(scale > 1e-6);  // the instance is genuinely curved

  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          auto R = [&](int a, int b, int cc, int d) { return c.rm.at({a, b, cc, d}); };
          Jet anti1 = R(i, j, k, l) + R(j, i, k, l);
          Jet anti2 = R(i, j, k, l) + R(i, j, l, k);
          Jet pair = R(i, j, k, l) - R(k, l, i, j);
          Jet bianchi = R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k);
          worst = std::max({worst, anti1.max_abs(), anti2.max_abs(), pair.max_abs(),
                            bianchi.max_abs()});
        }
  CHECK(worst < 1e-12 * scale);

  // Ricci is the (1,3) trace of the lowered tensor
  TensorJet tr = contract_ginv(c.rm, 0, 2, c.ginv);
  CHECK(rel_spread(tr, c.ric) < 1e-12);
  // scalar curvature from either route
  Jet s2 = trace2(c.ric, c.ginv);
  Jet ds = s2 - c.scal;
  CHECK(ds.max_abs() < 1e-12 * std::max(1.0, c.scal.max_abs()));
}

TEST_CASE("metric is parallel and second Bianchi identity holds") {
  const int n = 4;
  MetricJet m = random_jet_metric(n, 3, 0.05, 6);
  Curvature c = chain(m);
  TensorJet nabla_g = covariant_derivative(metric_tensor(m), c.gamma);
  CHECK(nabla_g.max_abs() < 1e-13 * metric_tensor(m).max_abs());

  TensorJet dr = covariant_derivative(c.rm, c.gamma);
  double scale = dr.max_abs();
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int mm = 0; mm < n; ++mm) {
            Jet cyc = dr.at({i, j, k, l, mm});
            cyc += dr.at({i, j, l, mm, k});
            cyc += dr.at({i, j, mm, k, l});
            worst = std::max(worst, cyc.max_abs());
          }
  CHECK(worst < 1e-11 * std::max(scale, 1e-30));
}

TEST_CASE("commuting covariant derivatives produces the curvature") {
  const int n = 4;
  MetricJet m = random_jet_metric(n, 5, 0.05, 5);
  Curvature c = chain(m);
  std::mt19937_64 rng(17);
  TensorJet omega(n, 1, m.basis());
  for (int i = 0; i < n; ++i) omega.at({i}) = jet_random(m.basis(), rng, 1.0);

  TensorJet ddo = covariant_derivative(covariant_derivative(omega, c.gamma), c.gamma);
  TensorJet rup = raise_slot(c.rm, 0, c.ginv);  // R^b_{ikl}
  double worst = 0, scale = ddo.max_abs();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Jet lhs = ddo.at({i, k, l}) - ddo.at({i, l, k});
        Jet rhs(jet_basis(n, lhs.order()));
        for (int b = 0; b < n; ++b)
          jet_mul_acc(rhs, jet_truncated(rup.at({b, i, k, l}), lhs.order()),
                      jet_truncated(omega.at({b}), lhs.order()));
        worst = std::max(worst, (lhs - rhs).max_abs());
      }
  CHECK(worst < 1e-11 * std::max(scale, 1.0));
}

TEST_CASE("Weyl tensor is totally trace-free and conformally covariant") {
  const int n = 5;
  MetricJet m = random_jet_metric(n, 9, 0.05, 5);
  Curvature c = chain(m);
  double scale = std::max(c.w.max_abs(), 1e-30);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      TensorJet tr = contract_ginv(c.w, a, b, c.ginv);
      CHECK(tr.max_abs() < 1e-11 * scale);
    }

  // hat g = exp(2 phi) g  =>  lowered Weyl scales by exp(2 phi)
  std::mt19937_64 rng(23);
  Jet phi = jet_random(m.basis(), rng, 0.3);
  Jet factor = jet_exp(phi * 2.0);
  MetricJet mh = m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mh.g.at(i, j) = factor * m.g.at(i, j);
  Curvature ch = chain(mh);
  TensorJet expect = c.w;
  for (auto& comp : expect.comps) comp = factor * comp;
  CHECK(rel_spread(ch.w, expect) < 1e-10);
}

TEST_CASE("Cotton tensor algebraic identities") {
  const int n = 5;
  MetricJet m = random_jet_metric(n, 11, 0.05, 5);
  Curvature c = chain(m);
  double scale = std::max(c.c.max_abs(), 1e-30);
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet anti = c.c.at({i, j, k}) + c.c.at({i, k, j});
        Jet cyc = c.c.at({i, j, k});
        cyc += c.c.at({j, k, i});
        cyc += c.c.at({k, i, j});
        worst = std::max({worst, anti.max_abs(), cyc.max_abs()});
      }
  CHECK(worst < 1e-12 * scale);
  TensorJet tr1 = contract_ginv(c.c, 0, 1, c.ginv);
  CHECK(tr1.max_abs() < 1e-11 * scale);
  TensorJet tr2 = contract_ginv(c.c, 1, 2, c.ginv);
  CHECK(tr2.max_abs() < 1e-11 * scale);

  // contracted Bianchi for the Schouten tensor: div P = dJ
  TensorJet dp = covariant_derivative(c.p, c.gamma);
  TensorJet divp = contract_ginv(dp, 1, 2, c.ginv);
  double worst2 = 0;
  for (int i = 0; i < n; ++i) {
    Jet lhs = divp.at({i});
    Jet rhs = jet_partial(c.j, i);  // scalar: covariant = partial
    worst2 = std::max(worst2, (lhs - rhs).max_abs());
  }
  CHECK(worst2 < 1e-11 * std::max(1.0, c.p.max_abs()));
}

TEST_CASE("Bach tensor: symmetry, vanishing trace, divergence identity") {
  const int n = 5;
  MetricJet m = random_jet_metric(n, 13, 0.05, 6);
  Curvature c = chain(m);
  double scale = std::max(c.b.max_abs(), 1e-30);
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      worst = std::max(worst, (c.b.at({i, j}) - c.b.at({j, i})).max_abs());
  CHECK(worst < 1e-10 * scale);
  CHECK(trace2(c.b, c.ginv).max_abs() < 1e-10 * scale);

  // div B_i = (n-4) P^{jk} C_{jki}
  TensorJet db = covariant_derivative(c.b, c.gamma);
  TensorJet divb = contract_ginv(db, 1, 2, c.ginv);
  TensorJet pup = raise_slot(raise_slot(c.p, 0, c.ginv), 1, c.ginv);
  const int ord = divb.basis().order();
  double worst2 = 0;
  for (int i = 0; i < n; ++i) {
    Jet rhs(jet_basis(n, ord));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        jet_mul_acc(rhs, jet_truncated(pup.at({j, k}), ord),
                    jet_truncated(c.c.at({j, k, i}), ord), double(n - 4));
    worst2 = std::max(worst2, (divb.at({i}) - rhs).max_abs());
  }
  CHECK(worst2 < 1e-10 * std::max(scale, 1.0));
}

TEST_CASE("conformally flat metrics have vanishing W, C, B") {
  BuiltinParams params;
  params.phi = "sin(x1)*x2 + x3*x4/3";
  MetricJet m = builtin_metric("conf_flat", params, {0.3, -0.2, 0.5, 0.4, 0.1}, 6);
  Curvature c = chain(m);
  double gs = metric_tensor(m).max_abs();
  CHECK(c.w.max_abs() < 1e-10 * gs);
  CHECK(c.c.max_abs() < 1e-10 * gs);
  CHECK(c.b.max_abs() < 1e-10 * gs);
  CHECK(c.ric.max_abs() > 1e-3);  // but it is genuinely curved
}

TEST_CASE("dimension-four Bach tensor is conformally invariant") {
  const int n = 4;
  MetricJet m = random_jet_metric(n, 19, 0.05, 6);
  Curvature c = chain(m);
  std::mt19937_64 rng(29);
  Jet phi = jet_random(m.basis(), rng, 0.3);
  Jet factor = jet_exp(phi * 2.0);
  MetricJet mh = m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mh.g.at(i, j) = factor * m.g.at(i, j);
  Curvature ch = chain(mh);
  // lowered Bach has conformal weight -2 in dimension 4
  TensorJet expect = c.b;
  Jet inv_factor = jet_inverse(factor);
  for (auto& comp : expect.comps) comp = inv_factor * comp;
  CHECK(rel_spread(ch.b, expect) < 1e-9);
}

TEST_CASE("capability guards") {
  MetricJet m = random_jet_metric(2, 1, 0.05, 4);
  JetMatrix ginv = metric_inverse(m);
  TensorJet ric = ricci_direct(levi_civita(m, ginv));
  CHECK_THROWS_AS(schouten(m, ginv, ric), CapabilityError);
}
