#include "ambientlab/metric_zoo.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ambientlab/jet_matrix.hpp"

namespace ambientlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

const char* kFuncs[] = {"exp", "log", "sin", "cos", "sqrt"};

bool is_func_name(const std::string& s) {
  for (const char* f : kFuncs)
    if (s == f) return true;
  return false;
}
}  // namespace

ExprPtr expr_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Number;
  n->number = v;
  return n;
}

ExprPtr expr_pi() {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Pi;
  return n;
}

ExprPtr expr_var(int index, const std::string& name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Var;
  n->var = index;
  n->name = name;
  return n;
}

ExprPtr expr_unary(const std::string& func, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->name = func;
  n->a = std::move(a);
  return n;
}

ExprPtr expr_binary(char op, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

ExprPtr expr_ipow(ExprPtr a, int exponent) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = '^';
  n->ipow = exponent;
  n->a = std::move(a);
  return n;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprNode::Kind::Number: return a->number == b->number;
    case ExprNode::Kind::Pi: return true;
    case ExprNode::Kind::Var: return a->var == b->var && a->name == b->name;
    case ExprNode::Kind::Unary:
      return a->name == b->name && expr_equal(a->a, b->a);
    case ExprNode::Kind::Binary:
      return a->op == b->op && a->ipow == b->ipow && expr_equal(a->a, b->a) &&
             expr_equal(a->b, b->b);
  }
  return false;
}

std::string expr_print(const ExprPtr& e) {
  switch (e->kind) {
    case ExprNode::Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e->number);
      // negative literals need parentheses to survive re-parsing as operands
      if (e->number < 0) return std::string("(") + buf + ")";
      return buf;
    }
    case ExprNode::Kind::Pi: return "pi";
    case ExprNode::Kind::Var: return e->name;
    case ExprNode::Kind::Unary: return e->name + "(" + expr_print(e->a) + ")";
    case ExprNode::Kind::Binary: {
      if (e->op == '^') {
        bool simple = e->a->kind == ExprNode::Kind::Var ||
                      e->a->kind == ExprNode::Kind::Pi ||
                      (e->a->kind == ExprNode::Kind::Number && e->a->number >= 0);
        std::string base = simple ? expr_print(e->a) : "(" + expr_print(e->a) + ")";
        return base + "^" + std::to_string(e->ipow);
      }
      return "(" + expr_print(e->a) + " " + e->op + " " + expr_print(e->b) + ")";
    }
  }
  return "";
}

namespace {

struct Parser {
  const std::string& s;
  const std::vector<std::string>& vars;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    std::ostringstream os;
    os << msg << " at column " << (at + 1);
    throw InputError(os.str());
  }
  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool peek(char c) {
    skip_ws();
    return pos < s.size() && s[pos] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c)
      fail(std::string("expected '") + c + "'", pos);
    ++pos;
  }

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos != s.size()) fail("unexpected trailing input", pos);
    return e;
  }

  ExprPtr expr() {
    ExprPtr e;
    if (accept('-')) {
      ExprPtr t = term();
      // fold a negated literal so printing round-trips exactly
      if (t->kind == ExprNode::Kind::Number)
        e = expr_number(-t->number);
      else
        e = expr_binary('-', expr_number(0.0), std::move(t));
    } else {
      accept('+');
      e = term();
    }
    for (;;) {
      if (accept('+'))
        e = expr_binary('+', std::move(e), term());
      else if (accept('-'))
        e = expr_binary('-', std::move(e), term());
      else
        return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      if (accept('*'))
        e = expr_binary('*', std::move(e), factor());
      else if (accept('/'))
        e = expr_binary('/', std::move(e), factor());
      else
        return e;
    }
  }

  ExprPtr factor() {
    ExprPtr e = base();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos;
      bool neg = pos < s.size() && s[pos] == '-';
      if (neg) ++pos;
      std::size_t digits = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == digits) fail("expected integer exponent", start);
      long v = std::strtol(s.c_str() + start, nullptr, 10);
      if (v > 64 || v < -64) fail("exponent out of range", start);
      e = expr_ipow(std::move(e), static_cast<int>(v));
    }
    return e;
  }

  ExprPtr base() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of expression", pos);
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s.c_str() + pos;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin || !std::isfinite(v)) fail("invalid number", pos);
      pos += static_cast<std::size_t>(end - begin);
      return expr_number(v);
    }
    if (c == '(') {
      ++pos;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      std::string ident = s.substr(start, pos - start);
      if (ident == "pi") return expr_pi();
      if (is_func_name(ident)) {
        expect('(');
        ExprPtr arg = expr();
        expect(')');
        return expr_unary(ident, std::move(arg));
      }
      for (std::size_t v = 0; v < vars.size(); ++v)
        if (vars[v] == ident) return expr_var(static_cast<int>(v), ident);
      fail("unknown identifier '" + ident + "'", start);
    }
    fail("unexpected character", pos);
  }
};

}  // namespace

ExprPtr parse_expression(const std::string& text,
                         const std::vector<std::string>& variables) {
  Parser p{text, variables};
  return p.parse();
}

Jet expr_eval_jet(const ExprPtr& e, const JetBasis& b,
                  const std::vector<double>& point) {
  switch (e->kind) {
    case ExprNode::Kind::Number: return Jet::constant(b, e->number);
    case ExprNode::Kind::Pi: return Jet::constant(b, kPi);
    case ExprNode::Kind::Var:
      return Jet::variable(b, e->var, point.at(e->var));
    case ExprNode::Kind::Unary: {
      Jet a = expr_eval_jet(e->a, b, point);
      if (e->name == "exp") return jet_exp(a);
      if (e->name == "log") return jet_log(a);
      if (e->name == "sin") return jet_sin(a);
      if (e->name == "cos") return jet_cos(a);
      if (e->name == "sqrt") return jet_sqrt(a);
      throw UsageError("unknown function node '" + e->name + "'");
    }
    case ExprNode::Kind::Binary: {
      Jet a = expr_eval_jet(e->a, b, point);
      switch (e->op) {
        case '+': return a + expr_eval_jet(e->b, b, point);
        case '-': return a - expr_eval_jet(e->b, b, point);
        case '*': return a * expr_eval_jet(e->b, b, point);
        case '/': return a / expr_eval_jet(e->b, b, point);
        case '^':
          return e->ipow >= 0 ? jet_int_pow(a, e->ipow)
                              : jet_int_pow(jet_inverse(a), -e->ipow);
        default: throw UsageError("unknown operator node");
      }
    }
  }
  throw UsageError("malformed expression node");
}

double expr_eval(const ExprPtr& e, const std::vector<double>& point) {
  switch (e->kind) {
    case ExprNode::Kind::Number: return e->number;
    case ExprNode::Kind::Pi: return kPi;
    case ExprNode::Kind::Var: return point.at(e->var);
    case ExprNode::Kind::Unary: {
      double a = expr_eval(e->a, point);
      if (e->name == "exp") return std::exp(a);
      if (e->name == "log") {
        if (!(a > 0)) throw SingularInputError("log of a nonpositive value");
        return std::log(a);
      }
      if (e->name == "sin") return std::sin(a);
      if (e->name == "cos") return std::cos(a);
      if (e->name == "sqrt") {
        if (!(a > 0)) throw SingularInputError("sqrt of a nonpositive value");
        return std::sqrt(a);
      }
      throw UsageError("unknown function node '" + e->name + "'");
    }
    case ExprNode::Kind::Binary: {
      double a = expr_eval(e->a, point);
      switch (e->op) {
        case '+': return a + expr_eval(e->b, point);
        case '-': return a - expr_eval(e->b, point);
        case '*': return a * expr_eval(e->b, point);
        case '/': {
          double d = expr_eval(e->b, point);
          if (d == 0.0) throw SingularInputError("division by zero");
          return a / d;
        }
        case '^': {
          if (a == 0.0 && e->ipow < 0)
            throw SingularInputError("zero base with negative exponent");
          return std::pow(a, e->ipow);
        }
        default: throw UsageError("unknown operator node");
      }
    }
  }
  throw UsageError("malformed expression node");
}

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return !is_func_name(s) && s != "pi";
}

}  // namespace

MetricSpec parse_metric_spec(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw InputError(std::string("metric document: ") + ex.what());
  }
  if (!doc.is_object()) throw InputError("metric document: expected a JSON object");

  MetricSpec spec;
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw InputError("metric document: integer field 'dimension' required");
  spec.dimension = doc["dimension"].get<int>();
  if (spec.dimension < 1 || spec.dimension > 14)
    throw InputError("metric document: dimension must be between 1 and 14");
  const int n = spec.dimension;

  if (!doc.contains("variables") || !doc["variables"].is_array() ||
      static_cast<int>(doc["variables"].size()) != n)
    throw InputError("metric document: 'variables' must list one name per dimension");
  for (const auto& v : doc["variables"]) {
    if (!v.is_string() || !valid_identifier(v.get<std::string>()))
      throw InputError("metric document: invalid variable name");
    spec.variables.push_back(v.get<std::string>());
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (spec.variables[i] == spec.variables[j])
        throw InputError("metric document: duplicate variable name '" +
                         spec.variables[i] + "'");

  if (!doc.contains("components") || !doc["components"].is_array() ||
      static_cast<int>(doc["components"].size()) != n)
    throw InputError("metric document: 'components' must have one row per dimension");
  spec.components.assign(n, std::vector<ExprPtr>(n));
  auto parse_entry = [&](int i, int j, const nlohmann::json& cell) {
    if (!cell.is_string())
      throw InputError("metric document: component entries must be expression strings");
    try {
      return parse_expression(cell.get<std::string>(), spec.variables);
    } catch (const InputError& ex) {
      std::ostringstream os;
      os << "component (" << i + 1 << "," << j + 1 << "): " << ex.what();
      throw InputError(os.str());
    }
  };
  for (int i = 0; i < n; ++i) {
    const auto& row = doc["components"][i];
    if (!row.is_array() || static_cast<int>(row.size()) < i + 1 ||
        static_cast<int>(row.size()) > n)
      throw InputError("metric document: row length must cover the lower triangle");
    for (int j = 0; j <= i; ++j) {
      spec.components[i][j] = parse_entry(i, j, row[j]);
      spec.components[j][i] = spec.components[i][j];
    }
  }
  // a fully written matrix must agree with its mirror
  for (int i = 0; i < n; ++i) {
    const auto& row = doc["components"][i];
    for (int j = i + 1; j < static_cast<int>(row.size()); ++j)
      if (!expr_equal(parse_entry(i, j, row[j]), spec.components[i][j]))
        throw InputError("metric document: components are not symmetric");
  }

  if (doc.contains("description")) {
    if (!doc["description"].is_string())
      throw InputError("metric document: 'description' must be a string");
    spec.description = doc["description"].get<std::string>();
  }
  return spec;
}

std::string metric_spec_to_json(const MetricSpec& spec) {
  nlohmann::ordered_json doc;
  doc["dimension"] = spec.dimension;
  doc["variables"] = spec.variables;
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < spec.dimension; ++i) {
    std::vector<std::string> row;
    for (int j = 0; j <= i; ++j) row.push_back(expr_print(spec.components[i][j]));
    rows.push_back(std::move(row));
  }
  doc["components"] = rows;
  doc["description"] = spec.description;
  return doc.dump(2);
}

namespace {

void check_positive_definite(const MetricJet& m, const char* what) {
  const int n = m.dim;
  std::vector<double> c(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c[i * n + j] = m.g.at(i, j).value();
  if (!dm_sym_positive_definite(c, n))
    throw SingularInputError(std::string(what) +
                             ": constant term is not positive definite");
}

}  // namespace

MetricJet instantiate_jets(const MetricSpec& spec,
                           const std::vector<double>& point, int order) {
  if (static_cast<int>(point.size()) != spec.dimension)
    throw UsageError("instantiate_jets: point length does not match dimension");
  const JetBasis& b = jet_basis(spec.dimension, order);
  MetricJet m;
  m.dim = spec.dimension;
  m.g = JetMatrix(spec.dimension, b);
  for (int i = 0; i < spec.dimension; ++i)
    for (int j = 0; j <= i; ++j) {
      Jet v = expr_eval_jet(spec.components[i][j], b, point);
      v.scan_zero();
      m.g.at(i, j) = v;
      if (j < i) m.g.at(j, i) = v;
    }
  check_positive_definite(m, "metric");
  return m;
}

std::vector<std::string> builtin_names() {
  return {"flat", "sphere_stereographic", "conf_flat", "torus_perturbed",
          "random_jet"};
}

bool builtin_has_spec(const std::string& name) { return name != "random_jet"; }

namespace {

std::vector<std::string> default_variables(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

std::mt19937_64 component_stream(uint64_t seed, int i, int j) {
  return std::mt19937_64(seed ^ (0x9E3779B97F4A7C15ULL * (16u * i + j + 1u)));
}

}  // namespace

MetricSpec builtin_spec(const std::string& name, const BuiltinParams& params,
                        int n) {
  if (n < 1 || n > 14) throw InputError("builtin metric: unsupported dimension");
  MetricSpec spec;
  spec.dimension = n;
  spec.variables = default_variables(n);
  spec.components.assign(n, std::vector<ExprPtr>(n));
  ExprPtr zero = expr_number(0.0);
  ExprPtr one = expr_number(1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) spec.components[i][j] = i == j ? one : zero;

  if (name == "flat") {
    spec.description = "flat euclidean metric";
  } else if (name == "sphere_stereographic") {
    // 4 (1+|x|^2)^-2 delta: the round unit sphere in stereographic projection
    ExprPtr s = one;
    for (int i = 0; i < n; ++i)
      s = expr_binary('+', s, expr_ipow(expr_var(i, spec.variables[i]), 2));
    ExprPtr diag = expr_binary('/', expr_number(4.0), expr_ipow(s, 2));
    for (int i = 0; i < n; ++i) spec.components[i][i] = diag;
    spec.description = "round unit sphere, stereographic chart";
  } else if (name == "conf_flat") {
    if (params.phi.empty())
      throw InputError("conf_flat: missing conformal factor expression");
    ExprPtr phi = parse_expression(params.phi, spec.variables);
    ExprPtr diag =
        expr_unary("exp", expr_binary('*', expr_number(2.0), std::move(phi)));
    for (int i = 0; i < n; ++i) spec.components[i][i] = diag;
    spec.description = "conformally flat metric exp(2 phi) delta";
  } else if (name == "torus_perturbed") {
    // delta + seeded trigonometric perturbation, 2 pi periodic in each variable
    const int terms = 3;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        std::mt19937_64 rng = component_stream(params.seed, i, j);
        ExprPtr sum = i == j ? one : nullptr;
        for (int m = 0; m < terms; ++m) {
          double c = uniform_pm1(rng) * params.amplitude / terms;
          ExprPtr t = expr_number(c);
          int factors = 1 + (m % 2);
          for (int f = 0; f < factors; ++f) {
            int v = static_cast<int>(rng() % static_cast<uint64_t>(n));
            const char* func = (rng() & 1) ? "sin" : "cos";
            double phase = kPi * (uniform_pm1(rng) + 1.0);
            ExprPtr arg = expr_binary('+', expr_var(v, spec.variables[v]),
                                      expr_number(phase));
            t = expr_binary('*', std::move(t), expr_unary(func, std::move(arg)));
          }
          sum = sum ? expr_binary('+', std::move(sum), std::move(t)) : std::move(t);
        }
        spec.components[i][j] = sum;
        spec.components[j][i] = spec.components[i][j];
      }
    spec.description = "flat torus with a periodic perturbation";
  } else if (name == "random_jet") {
    throw UsageError("random_jet has no expression form; use builtin_metric");
  } else {
    throw InputError("unknown builtin metric '" + name + "'");
  }
  return spec;
}

MetricJet random_jet_metric(int n, uint64_t seed, double amplitude, int order) {
  if (n < 1 || n > 14) throw InputError("builtin metric: unsupported dimension");
  const JetBasis& b = jet_basis(n, order);
  MetricJet m;
  m.dim = n;
  m.g = JetMatrix(n, b);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::mt19937_64 rng = component_stream(seed, i, j);
      Jet p = jet_random(b, rng, amplitude);
      if (i == j) p += 1.0;
      m.g.at(i, j) = p;
      if (i != j) m.g.at(j, i) = p;
    }
  check_positive_definite(m, "random_jet");
  return m;
}

MetricJet builtin_metric(const std::string& name, const BuiltinParams& params,
                         const std::vector<double>& point, int order) {
  const int n = static_cast<int>(point.size());
  if (name == "random_jet")
    return random_jet_metric(n, params.seed, params.amplitude, order);
  return instantiate_jets(builtin_spec(name, params, n), point, order);
}

}  // namespace ambientlab
