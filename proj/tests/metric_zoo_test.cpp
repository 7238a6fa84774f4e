#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ambientlab/metric_zoo.hpp"

using namespace ambientlab;

namespace {

void check_roundtrip(const ExprPtr& e, const std::vector<std::string>& vars) {
  std::string text = expr_print(e);
  CAPTURE(text);
  ExprPtr back = parse_expression(text, vars);
  CHECK(expr_equal(e, back));
}

void check_spec_roundtrip(const MetricSpec& spec) {
  for (int i = 0; i < spec.dimension; ++i)
    for (int j = 0; j <= i; ++j) check_roundtrip(spec.components[i][j], spec.variables);
  MetricSpec back = parse_metric_spec(metric_spec_to_json(spec));
  CHECK(back.dimension == spec.dimension);
  for (int i = 0; i < spec.dimension; ++i)
    for (int j = 0; j < spec.dimension; ++j)
      CHECK(expr_equal(back.components[i][j], spec.components[i][j]));
}

// central finite differences of a component function, compared against the
// order <= 2 jet coefficients
void check_fd_consistency(const MetricJet& m,
                          const std::function<double(int, int, const std::vector<double>&)>& f,
                          const std::vector<double>& point) {
  const double h = 1e-4;
  const int n = m.dim;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet& c = m.g.at(i, j);
      const JetBasis& b = c.basis();
      CHECK(std::abs(c.value() - f(i, j, point)) < 1e-12);
      for (int v = 0; v < n; ++v) {
        std::vector<double> up = point, dn = point;
        up[v] += h;
        dn[v] -= h;
        double fd = (f(i, j, up) - f(i, j, dn)) / (2 * h);
        uint64_t key = uint64_t{1} << (4 * v);
        double jc = c[b.find(key)];
        CHECK(std::abs(jc - fd) < 1e-6 * std::max(1.0, std::abs(jc)));
        // pure second derivative: coefficient is f'' / 2
        double f2 = (f(i, j, up) - 2 * f(i, j, point) + f(i, j, dn)) / (h * h);
        double jc2 = c[b.find(key * 2)];
        CHECK(std::abs(jc2 - f2 / 2) < 1e-6 * std::max(1.0, std::abs(jc2)));
      }
      for (int v = 0; v < n; ++v)
        for (int w = v + 1; w < n; ++w) {
          std::vector<double> pp = point, pm = point, mp = point, mm = point;
          pp[v] += h; pp[w] += h;
          pm[v] += h; pm[w] -= h;
          mp[v] -= h; mp[w] += h;
          mm[v] -= h; mm[w] -= h;
          double fd = (f(i, j, pp) - f(i, j, pm) - f(i, j, mp) + f(i, j, mm)) / (4 * h * h);
          double jc = c[b.find((uint64_t{1} << (4 * v)) | (uint64_t{1} << (4 * w)))];
          CHECK(std::abs(jc - fd) < 1e-6 * std::max(1.0, std::abs(jc)));
        }
    }
}

}  // namespace

TEST_CASE("expression parsing produces the documented tree") {
  ExprPtr e = parse_expression("1/(1+x1^2)", {"x1"});
  REQUIRE(e->kind == ExprNode::Kind::Binary);
  CHECK(e->op == '/');
  CHECK(e->a->kind == ExprNode::Kind::Number);
  CHECK(e->a->number == 1.0);
  REQUIRE(e->b->kind == ExprNode::Kind::Binary);
  CHECK(e->b->op == '+');
  CHECK(e->b->a->number == 1.0);
  REQUIRE(e->b->b->op == '^');
  CHECK(e->b->b->ipow == 2);
  CHECK(e->b->b->a->kind == ExprNode::Kind::Var);
  CHECK(e->b->b->a->var == 0);
}

TEST_CASE("parse errors carry positions and names") {
  CHECK_THROWS_WITH_AS(parse_expression("sin(x1", {"x1"}),
                       "expected ')' at column 7", InputError);
  try {
    parse_expression("exp(2*phi)", {"x1"});
    FAIL("expected an error");
  } catch (const InputError& ex) {
    CHECK(std::string(ex.what()).find("phi") != std::string::npos);
    CHECK(std::string(ex.what()).find("column 7") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expression("1 + ", {"x1"}), InputError);
  CHECK_THROWS_AS(parse_expression("x1 x1", {"x1"}), InputError);
  CHECK_THROWS_AS(parse_expression("x1^x1", {"x1"}), InputError);
  CHECK_THROWS_AS(parse_expression("", {"x1"}), InputError);
}

TEST_CASE("evaluation agrees between doubles and jets") {
  std::vector<std::string> vars = {"x1", "x2"};
  ExprPtr e = parse_expression("exp(sin(x1)*x2) / (1 + x1^2) - pi*x2^3 + sqrt(4+x1)",
                               vars);
  std::vector<double> p = {0.3, -0.7};
  double direct = expr_eval(e, p);
  Jet j = expr_eval_jet(e, jet_basis(2, 4), p);
  CHECK(j.value() == doctest::Approx(direct).epsilon(1e-14));
  // derivative vs finite difference
  double h = 1e-5;
  std::vector<double> up = {p[0] + h, p[1]}, dn = {p[0] - h, p[1]};
  double fd = (expr_eval(e, up) - expr_eval(e, dn)) / (2 * h);
  const JetBasis& b = j.basis();
  CHECK(j[b.find(1)] == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("negative powers and folded negative literals") {
  std::vector<std::string> vars = {"u"};
  ExprPtr e = parse_expression("-2.5*u^-2", vars);
  std::vector<double> p = {2.0};
  CHECK(expr_eval(e, p) == doctest::Approx(-2.5 / 4.0));
  check_roundtrip(e, vars);
  check_roundtrip(parse_expression("(0 - u) + (-3)", vars), vars);
  check_roundtrip(parse_expression("(1+u)^3 * pi - u/(u+2)", vars), vars);
}

TEST_CASE("metric documents parse, mirror, and round-trip") {
  std::string doc = R"json({
    "dimension": 2,
    "variables": ["u", "v"],
    "components": [["1+u^2"], ["u*v", "exp(v)"]],
    "description": "demo"
  })json";
  MetricSpec spec = parse_metric_spec(doc);
  CHECK(spec.dimension == 2);
  CHECK(spec.description == "demo");
  CHECK(expr_equal(spec.components[0][1], spec.components[1][0]));
  check_spec_roundtrip(spec);

  // full matrix allowed when symmetric
  MetricSpec full = parse_metric_spec(R"json({
    "dimension": 2, "variables": ["u", "v"],
    "components": [["1", "u*v"], ["u*v", "1"]]})json");
  CHECK(expr_equal(full.components[0][1], full.components[1][0]));
}

TEST_CASE("metric document error paths") {
  CHECK_THROWS_AS(parse_metric_spec("not json"), InputError);
  CHECK_THROWS_AS(parse_metric_spec(R"json({"variables":[],"components":[]})json"), InputError);
  CHECK_THROWS_AS(parse_metric_spec(R"json({"dimension":2,"variables":["u","v"],
    "components":[["1"],["0"]]})json"), InputError);  // short second row
  CHECK_THROWS_AS(parse_metric_spec(R"json({"dimension":2,"variables":["u","v"],
    "components":[["1","u"],["v","1"]]})json"), InputError);  // not symmetric
  CHECK_THROWS_AS(parse_metric_spec(R"json({"dimension":2,"variables":["u","u"],
    "components":[["1"],["0","1"]]})json"), InputError);  // duplicate variable
  CHECK_THROWS_AS(parse_metric_spec(R"json({"dimension":1,"variables":["sin"],
    "components":[["1"]]})json"), InputError);  // reserved name
  try {
    parse_metric_spec(R"json({"dimension":2,"variables":["u","v"],
      "components":[["1"],["q", "1"]]})json");
    FAIL("expected an error");
  } catch (const InputError& ex) {
    CHECK(std::string(ex.what()).find("component (2,1)") != std::string::npos);
  }
}

TEST_CASE("flat instantiation is the identity jet") {
  BuiltinParams params;
  MetricJet m = builtin_metric("flat", params, {0.4, -1.0, 2.0}, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(m.g.at(i, j).value() == (i == j ? 1.0 : 0.0));
      Jet rest = m.g.at(i, j);
      rest[0] = 0.0;
      CHECK(rest.max_abs() == 0.0);
    }
}

TEST_CASE("sphere chart at the origin has constant term 4 delta") {
  BuiltinParams params;
  MetricJet m = builtin_metric("sphere_stereographic", params, {0, 0, 0, 0}, 6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(m.g.at(i, j).value() == doctest::Approx(i == j ? 4.0 : 0.0));
}

TEST_CASE("builtin expression corpus round-trips through the printer") {
  BuiltinParams params;
  params.phi = "sin(x1)*x2 + x3^2/4";
  params.seed = 11;
  for (const std::string& name :
       {std::string("flat"), std::string("sphere_stereographic"),
        std::string("conf_flat"), std::string("torus_perturbed")}) {
    CAPTURE(name);
    CHECK(builtin_has_spec(name));
    check_spec_roundtrip(builtin_spec(name, params, 3));
  }
  CHECK_FALSE(builtin_has_spec("random_jet"));
}

TEST_CASE("jet coefficients match finite differences of the expressions") {
  BuiltinParams params;
  params.phi = "sin(x1)*x2";
  params.seed = 3;
  params.amplitude = 0.1;
  std::vector<double> p = {0.2, -0.4, 0.15};
  for (const std::string& name :
       {std::string("sphere_stereographic"), std::string("conf_flat"),
        std::string("torus_perturbed")}) {
    CAPTURE(name);
    MetricSpec spec = builtin_spec(name, params, 3);
    MetricJet m = instantiate_jets(spec, p, 2);
    check_fd_consistency(
        m,
        [&](int i, int j, const std::vector<double>& q) {
          return expr_eval(spec.components[i][j], q);
        },
        p);
  }
  // random_jet has no expression form; its own polynomial evaluation is the
  // reference function
  MetricJet r = random_jet_metric(3, 7, 0.05, 6);
  MetricJet r2 = random_jet_metric(3, 7, 0.05, 2);
  check_fd_consistency(
      r2,
      [&](int i, int j, const std::vector<double>& q) {
        std::vector<double> off(3);
        for (int v = 0; v < 3; ++v) off[v] = q[v] - p[v];
        return jet_eval(r.g.at(i, j), off);
      },
      p);
}

TEST_CASE("torus metrics are 2 pi periodic") {
  BuiltinParams params;
  params.seed = 5;
  params.amplitude = 0.1;
  MetricSpec spec = builtin_spec("torus_perturbed", params, 3);
  std::vector<double> p = {0.7, 2.1, -0.3};
  const double two_pi = 2 * 3.14159265358979323846;
  for (int d = 0; d < 3; ++d) {
    std::vector<double> q = p;
    q[d] += two_pi;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j)
        CHECK(std::abs(expr_eval(spec.components[i][j], p) -
                       expr_eval(spec.components[i][j], q)) < 1e-12);
  }
}

TEST_CASE("seeded families are deterministic and order-consistent") {
  MetricJet a = random_jet_metric(5, 7, 0.05, 4);
  MetricJet b = random_jet_metric(5, 7, 0.05, 4);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < a.basis().size(); ++k)
        CHECK(a.g.at(i, j)[k] == b.g.at(i, j)[k]);  // bitwise

  // raising the order extends the family without changing low coefficients
  MetricJet c = random_jet_metric(5, 7, 0.05, 6);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < a.basis().size(); ++k)
        CHECK(a.g.at(i, j)[k] == c.g.at(i, j)[k]);

  BuiltinParams params;
  params.seed = 9;
  MetricSpec t1 = builtin_spec("torus_perturbed", params, 3);
  MetricSpec t2 = builtin_spec("torus_perturbed", params, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(expr_equal(t1.components[i][j], t2.components[i][j]));
}

TEST_CASE("random_jet stays positive definite at the standard amplitude") {
  for (uint64_t seed : {1ull, 7ull, 42ull, 1234ull})
    CHECK_NOTHROW(random_jet_metric(5, seed, 0.05, 4));
}

TEST_CASE("degenerate constant terms are rejected") {
  MetricSpec bad = parse_metric_spec(R"json({
    "dimension": 2, "variables": ["u", "v"],
    "components": [["1"], ["0", "(-1)"]]})json");
  CHECK_THROWS_AS(instantiate_jets(bad, {0, 0}, 2), SingularInputError);

  MetricSpec domain = parse_metric_spec(R"json({
    "dimension": 1, "variables": ["u"], "components": [["log(u)"]]})json");
  CHECK_THROWS_AS(instantiate_jets(domain, {-2.0}, 2), SingularInputError);

  CHECK_THROWS_AS(builtin_metric("no_such_family", BuiltinParams{}, {0.0}, 2),
                  InputError);
}
