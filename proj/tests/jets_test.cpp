#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "ambientlab/jet.hpp"
#include "ambientlab/jet_matrix.hpp"

using namespace ambientlab;

namespace {

std::vector<int> exponents_of(const JetBasis& b, int idx) {
  std::vector<int> e(b.n_vars());
  for (int v = 0; v < b.n_vars(); ++v) e[v] = b.exponent(idx, v);
  return e;
}

// Product by exponent-vector bookkeeping that never touches the cached
// multiplication table; the oracle for jet multiplication.
Jet brute_force_product(const Jet& a, const Jet& b) {
  const JetBasis& bb = a.basis();
  std::map<std::vector<int>, int> lookup;
  for (int i = 0; i < bb.size(); ++i) lookup[exponents_of(bb, i)] = i;
  Jet r(bb);
  for (int i = 0; i < bb.size(); ++i)
    for (int j = 0; j < bb.size(); ++j) {
      if (bb.degree_of(i) + bb.degree_of(j) > bb.order()) continue;
      std::vector<int> e = exponents_of(bb, i);
      std::vector<int> f = exponents_of(bb, j);
      for (int v = 0; v < bb.n_vars(); ++v) e[v] += f[v];
      r[lookup.at(e)] += a[i] * b[j];
    }
  return r;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("basis enumeration is graded with nested prefixes") {
  const JetBasis& b = jet_basis(3, 4);
  CHECK(b.size() == 35);  // C(3+4,4)
  // degree blocks ascend
  for (int i = 1; i < b.size(); ++i)
    CHECK(b.degree_of(i) >= b.degree_of(i - 1));
  // lower-order basis is a coefficient prefix
  const JetBasis& lo = jet_basis(3, 2);
  for (int i = 0; i < lo.size(); ++i)
    CHECK(lo.packed_exponents(i) == b.packed_exponents(i));
}

TEST_CASE("geometric series closed form times (1 - x - y) is one") {
  const JetBasis& b = jet_basis(2, 9);
  // 1/(1-x-y): coefficient of x^a y^c is C(a+c, a) - an independent oracle.
  Jet geo(b);
  for (int i = 0; i < b.size(); ++i) {
    int a = b.exponent(i, 0), c = b.exponent(i, 1);
    geo[i] = binom(a + c, a);
  }
  Jet lin = Jet::constant(b, 1.0);
  lin -= Jet::variable(b, 0, 0.0);
  lin -= Jet::variable(b, 1, 0.0);
  Jet prod = geo * lin;
  CHECK(prod.value() == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 1; i < b.size(); ++i)
    CHECK(std::abs(prod[i]) < 1e-12);
  // and division reproduces the closed form
  Jet quot = Jet::constant(b, 1.0) / lin;
  for (int i = 0; i < b.size(); ++i)
    CHECK(quot[i] == doctest::Approx(geo[i]).epsilon(1e-12));
}

TEST_CASE("cached multiplication matches brute-force convolution") {
  std::mt19937_64 rng(12345);
  for (int n_vars : {1, 2, 3}) {
    for (int order : {2, 4, 5}) {
      const JetBasis& b = jet_basis(n_vars, order);
      Jet a = jet_random(b, rng, 1.5);
      Jet c = jet_random(b, rng, 0.7);
      Jet fast = a * c;
      Jet slow = brute_force_product(a, c);
      for (int i = 0; i < b.size(); ++i)
        CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("mixed-order arithmetic truncates to the minimum order") {
  const JetBasis& b5 = jet_basis(2, 5);
  std::mt19937_64 rng(7);
  Jet a = jet_random(b5, rng, 1.0);
  Jet c = jet_random(b5, rng, 1.0);
  Jet c3 = jet_truncated(c, 3);
  Jet p = a * c3;
  CHECK(p.order() == 3);
  Jet full = jet_truncated(a * c, 3);
  for (int i = 0; i < p.basis().size(); ++i)
    CHECK(p[i] == doctest::Approx(full[i]).epsilon(1e-14));
  Jet s = a + c3;
  CHECK(s.order() == 3);
}

TEST_CASE("analytic identities") {
  const JetBasis& b = jet_basis(3, 6);
  std::mt19937_64 rng(99);
  Jet f = jet_random(b, rng, 0.4);

  SUBCASE("exp(f) * exp(-f) = 1") {
    Jet p = jet_exp(f) * jet_exp(-f);
    CHECK(std::abs(p.value() - 1.0) < 1e-14);
    for (int i = 1; i < b.size(); ++i) CHECK(std::abs(p[i]) < 1e-13);
  }
  SUBCASE("log(exp(f)) = f") {
    Jet l = jet_log(jet_exp(f));
    for (int i = 0; i < b.size(); ++i)
      CHECK(l[i] == doctest::Approx(f[i]).epsilon(1e-11));
  }
  SUBCASE("sqrt(g)^2 = g for positive leading part") {
    Jet g = f + 2.0;
    Jet s = jet_sqrt(g);
    Jet p = s * s;
    for (int i = 0; i < b.size(); ++i)
      CHECK(p[i] == doctest::Approx(g[i]).epsilon(1e-12));
  }
  SUBCASE("sin^2 + cos^2 = 1") {
    Jet p = jet_sin(f) * jet_sin(f) + jet_cos(f) * jet_cos(f);
    CHECK(std::abs(p.value() - 1.0) < 1e-14);
    for (int i = 1; i < b.size(); ++i) CHECK(std::abs(p[i]) < 1e-13);
  }
  SUBCASE("pow(g, 2) matches g*g") {
    Jet g = f + 1.5;
    Jet p = jet_pow(g, 2.0);
    Jet q = g * g;
    for (int i = 0; i < b.size(); ++i)
      CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
  }
  SUBCASE("integer power by squaring matches repeated multiplication") {
    Jet p = jet_int_pow(f, 5);
    Jet q = f * f * f * f * f;
    for (int i = 0; i < b.size(); ++i)
      CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
  }
  SUBCASE("inverse: f_pos * inv(f_pos) = 1") {
    Jet g = f + 3.0;
    Jet p = g * jet_inverse(g);
    CHECK(std::abs(p.value() - 1.0) < 1e-14);
    for (int i = 1; i < b.size(); ++i) CHECK(std::abs(p[i]) < 1e-13);
  }
}

TEST_CASE("partial derivatives: Leibniz rule and commutation") {
  const JetBasis& b = jet_basis(3, 6);
  std::mt19937_64 rng(4242);
  Jet f = jet_random(b, rng, 1.0);
  Jet g = jet_random(b, rng, 1.0);

  Jet lhs = jet_partial(f * g, 1);
  Jet rhs = jet_partial(f, 1) * jet_truncated(g, 5) + jet_truncated(f, 5) * jet_partial(g, 1);
  CHECK(lhs.order() == 5);
  for (int i = 0; i < lhs.basis().size(); ++i)
    CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13));

  Jet ab = jet_partial(jet_partial(f, 0), 2);
  Jet ba = jet_partial(jet_partial(f, 2), 0);
  for (int i = 0; i < ab.basis().size(); ++i)
    CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-14));
}

TEST_CASE("antiderivative inverts the partial derivative") {
  const JetBasis& b = jet_basis(2, 5);
  std::mt19937_64 rng(11);
  Jet f = jet_random(b, rng, 1.0);
  Jet intf = jet_antiderivative(f, 0);
  CHECK(intf.order() == 6);
  Jet back = jet_partial(intf, 0);
  for (int i = 0; i < b.size(); ++i)
    CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-14));
  // vanishes at the base point in the integrated variable
  CHECK(intf.value() == 0.0);
}

TEST_CASE("evaluation consistency for composed functions") {
  const JetBasis& b = jet_basis(2, 8);
  std::mt19937_64 rng(5);
  Jet f = jet_random(b, rng, 0.5);
  Jet sf = jet_sin(f);
  std::vector<double> h = {0.03, -0.02};
  double jet_value = jet_eval(sf, h);
  double direct = std::sin(jet_eval(f, h));
  // truncation error ~ |h|^(order+1)
  CHECK(std::abs(jet_value - direct) < 1e-11);
}

TEST_CASE("embedding and extraction round-trip") {
  const JetBasis& small = jet_basis(2, 4);
  const JetBasis& big = jet_basis(4, 6);
  std::mt19937_64 rng(3);
  Jet f = jet_random(small, rng, 1.0);
  Jet e = jet_embed(f, big, {1, 3});
  // extract power 0 of the unused variables and remove them
  Jet back = jet_remove_var(
      jet_remove_var(jet_extract_power(jet_extract_power(e, 0, 0), 2, 0), 0,
                     jet_basis(3, 6), {-1, 0, 1, 2}),
      1, jet_basis(2, 6), {0, -1, 1});
  for (int i = 0; i < small.size(); ++i)
    CHECK(jet_truncated(back, 4)[i] == doctest::Approx(f[i]).epsilon(1e-15));
}

TEST_CASE("power extraction picks Taylor coefficients") {
  const JetBasis& b = jet_basis(2, 5);
  // f = (1 + x)^2 * y^2
  Jet x = Jet::variable(b, 0, 0.0);
  Jet y = Jet::variable(b, 1, 0.0);
  Jet f = (x + 1.0) * (x + 1.0) * y * y;
  Jet c2 = jet_extract_power(f, 1, 2);  // coefficient of y^2 = (1+x)^2
  CHECK(c2.order() == 3);
  CHECK(c2.value() == doctest::Approx(1.0));
  Jet dx = jet_partial(c2, 0);
  CHECK(dx.value() == doctest::Approx(2.0));
  Jet c1 = jet_extract_power(f, 1, 1);
  CHECK(c1.max_abs() == 0.0);
}

TEST_CASE("jet matrix inverse and determinant") {
  const JetBasis& b = jet_basis(3, 4);
  std::mt19937_64 rng(21);
  int n = 4;
  JetMatrix m(n, b);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.at(i, j) = jet_random(b, rng, 0.3);
      if (i == j) m.at(i, j) += 2.0;
    }
  JetMatrix inv = jm_inverse(m);
  JetMatrix prod = jm_mul(m, inv);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double target = i == j ? 1.0 : 0.0;
      CHECK(std::abs(prod.at(i, j).value() - target) < 1e-13);
      Jet off = prod.at(i, j);
      off[0] -= target;
      CHECK(off.max_abs() < 1e-12);
    }

  // determinant against the 2x2 closed form
  JetMatrix m2(2, b);
  m2.at(0, 0) = jet_random(b, rng, 0.4) + 1.5;
  m2.at(0, 1) = jet_random(b, rng, 0.4);
  m2.at(1, 0) = jet_random(b, rng, 0.4);
  m2.at(1, 1) = jet_random(b, rng, 0.4) + 2.0;
  Jet det = jm_det(m2);
  Jet closed = m2.at(0, 0) * m2.at(1, 1) - m2.at(0, 1) * m2.at(1, 0);
  for (int i = 0; i < b.size(); ++i)
    CHECK(det[i] == doctest::Approx(closed[i]).epsilon(1e-12));
}

TEST_CASE("random jets are deterministic and degree-damped") {
  const JetBasis& b = jet_basis(3, 5);
  std::mt19937_64 r1(77), r2(77);
  Jet a = jet_random(b, r1, 0.05);
  Jet c = jet_random(b, r2, 0.05);
  for (int i = 0; i < b.size(); ++i) CHECK(a[i] == c[i]);  // bitwise
  double fact = 1.0;
  for (int i = 0; i < b.size(); ++i) {
    int d = b.degree_of(i);
    fact = 1.0;
    for (int k = 2; k <= d; ++k) fact *= k;
    CHECK(std::abs(a[i]) <= 0.05 / fact + 1e-18);
  }
}

TEST_CASE("zero flag is conservative and skips work") {
  const JetBasis& b = jet_basis(2, 3);
  Jet z = Jet::zero(b);
  CHECK(z.known_zero());
  std::mt19937_64 rng(1);
  Jet f = jet_random(b, rng, 1.0);
  Jet p = z * f;
  CHECK(p.known_zero());
  CHECK(p.max_abs() == 0.0);
  Jet s = f - f;
  CHECK_FALSE(s.known_zero());  // conservative: flag does not claim exactness
  CHECK(s.scan_zero());
}

TEST_CASE("guards reject misuse") {
  const JetBasis& b = jet_basis(2, 3);
  Jet f = Jet::constant(b, -1.0);
  CHECK_THROWS_AS(jet_log(f), SingularInputError);
  CHECK_THROWS_AS(jet_sqrt(f), SingularInputError);
  Jet z = Jet::zero(b);
  CHECK_THROWS_AS(jet_inverse(z), SingularInputError);
  const JetBasis& other = jet_basis(3, 3);
  Jet g = Jet::constant(other, 1.0);
  CHECK_THROWS_AS(f * g, UsageError);
  Jet o0 = Jet::constant(jet_basis(2, 0), 1.0);
  CHECK_THROWS_AS(jet_partial(o0, 0), InsufficientOrderError);
}
