#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ambientlab/tensor.hpp"

namespace ambientlab {

// Arithmetic expression trees for metric components. Evaluation happens in
// jet arithmetic, so a parsed metric automatically carries exact derivatives
// of every order the caller asks for.
//
// Grammar (whitespace insensitive):
//   expr   := ("+" | "-")? term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := base ("^" integer)?
//   base   := number | ident | "(" expr ")" | func "(" expr ")"
// func is one of exp, log, sin, cos, sqrt; "pi" is a constant; any other
// identifier must be a declared chart variable. Powers are integer literals
// only (use exp/log for general exponents).

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Number, Pi, Var, Unary, Binary };
  Kind kind = Kind::Number;
  double number = 0.0;  // Number
  int var = -1;         // Var: index into the declared variable list
  std::string name;     // Var: variable name; Unary: function name
  char op = 0;          // Binary: one of + - * / ^
  int ipow = 0;         // Binary '^': the integer exponent (b stays null)
  ExprPtr a, b;
};

ExprPtr expr_number(double v);
ExprPtr expr_pi();
ExprPtr expr_var(int index, const std::string& name);
ExprPtr expr_unary(const std::string& func, ExprPtr a);
ExprPtr expr_binary(char op, ExprPtr a, ExprPtr b);
ExprPtr expr_ipow(ExprPtr a, int exponent);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Canonical text form; parsing it back yields a structurally identical tree.
std::string expr_print(const ExprPtr& e);

// Parses one expression over the named variables. Errors carry a 1-based
// column position.
ExprPtr parse_expression(const std::string& text,
                         const std::vector<std::string>& variables);

Jet expr_eval_jet(const ExprPtr& e, const JetBasis& b,
                  const std::vector<double>& point);
double expr_eval(const ExprPtr& e, const std::vector<double>& point);

// A symmetric matrix of component expressions over a coordinate chart.
struct MetricSpec {
  int dimension = 0;
  std::vector<std::string> variables;
  // Full n x n matrix; (i,j) and (j,i) share the same node.
  std::vector<std::vector<ExprPtr>> components;
  std::string description;
};

// Document format: {"dimension": n, "variables": [..], "components": [[..]..],
// "description": ".."}. Rows may give the lower triangle only; the upper
// triangle is mirrored.
MetricSpec parse_metric_spec(const std::string& json_text);
std::string metric_spec_to_json(const MetricSpec& spec);

// Evaluates every component about the point. Verifies the constant term is
// symmetric positive definite.
MetricJet instantiate_jets(const MetricSpec& spec,
                           const std::vector<double>& point, int order);

struct BuiltinParams {
  std::string phi;        // conf_flat: conformal factor exponent expression
  uint64_t seed = 1;      // torus_perturbed, random_jet
  double amplitude = 0.05;
};

std::vector<std::string> builtin_names();
// True when the family has an expression form (everything except random_jet,
// whose jet coefficients are drawn directly).
bool builtin_has_spec(const std::string& name);
MetricSpec builtin_spec(const std::string& name, const BuiltinParams& params,
                        int n);
MetricJet builtin_metric(const std::string& name, const BuiltinParams& params,
                         const std::vector<double>& point, int order);

// delta + symmetric random polynomial with degree-d coefficients bounded by
// amplitude/d!, drawn about the given point. Coefficients at a fixed seed are
// stable under raising the order (the lower-order jet is a prefix).
MetricJet random_jet_metric(int n, uint64_t seed, double amplitude, int order);

}  // namespace ambientlab
