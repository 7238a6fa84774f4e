#pragma once
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ambientlab/errors.hpp"

namespace ambientlab {

// Dense truncated multivariate Taylor expansion ("jet") about a base point.
//
// Coefficient layout: multi-indices enumerated by total degree, then
// lexicographically within a degree (earlier variables dominant, exponents
// descending).  Entry alpha stores the Taylor coefficient
// (d^alpha f)(base) / alpha!, so degree-truncated arithmetic on jets computes
// exact Taylor coefficients of the corresponding operations on functions.
//
// Exponents are packed 4 bits per variable into a uint64, which caps the
// supported scales at 16 variables and total order 15 - comfortably above
// every instance this library is asked to handle.

class JetBasis;

// Shared registry of bases; pointers stay valid for the process lifetime.
// Construction of a basis (and of its multiplication table) happens at most
// once per (n_vars, order) under an internal lock.
const JetBasis& jet_basis(int n_vars, int order);

class JetBasis {
 public:
  int n_vars() const { return n_vars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(packed_.size()); }

  // First coefficient index of the given total degree block.
  int degree_offset(int degree) const { return deg_offset_[degree]; }
  int degree_of(int index) const { return degree_of_[index]; }
  uint64_t packed_exponents(int index) const { return packed_[index]; }
  int exponent(int index, int var) const {
    return static_cast<int>((packed_[index] >> (4 * var)) & 0xF);
  }
  // Index of packed exponents, or -1 when outside the basis.
  int find(uint64_t packed) const;

  struct MulTable {
    std::vector<uint32_t> offset;  // size() + 1 entries
    std::vector<uint32_t> lhs, rhs;
  };
  const MulTable& mul_table() const;

  struct PartialTable {
    std::vector<int32_t> src;      // coefficient pulled from (or -1)
    std::vector<double> factor;    // exponent+1 multiplier
  };
  const PartialTable& partial_table(int var) const;

 private:
  friend const JetBasis& jet_basis(int, int);
  JetBasis(int n_vars, int order);

  int n_vars_, order_;
  std::vector<uint64_t> packed_;
  std::vector<int> deg_offset_;
  std::vector<int16_t> degree_of_;
  std::vector<std::pair<uint64_t, int32_t>> rank_;  // sorted by packed key
  mutable std::vector<PartialTable> partials_;      // built lazily per var
  mutable MulTable mul_;
  mutable bool mul_built_ = false;
  void build_mul() const;
};

class Jet {
 public:
  Jet() : basis_(nullptr) {}
  explicit Jet(const JetBasis& b, double constant = 0.0)
      : basis_(&b), c_(b.size(), 0.0), zero_(constant == 0.0) {
    c_[0] = constant;
  }

  static Jet zero(const JetBasis& b) { return Jet(b); }
  static Jet constant(const JetBasis& b, double v) { return Jet(b, v); }
  // base_value + unit first-order coefficient in the given variable.
  static Jet variable(const JetBasis& b, int var, double base_value);

  bool valid() const { return basis_ != nullptr; }
  const JetBasis& basis() const { return *basis_; }
  int n_vars() const { return basis_->n_vars(); }
  int order() const { return basis_->order(); }
  double value() const { return c_[0]; }
  double& operator[](int i) { zero_ = false; return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  const std::vector<double>& coefficients() const { return c_; }

  // Conservative flag: true implies every coefficient is exactly zero.
  bool known_zero() const { return zero_; }
  // Upgrades the flag by scanning; returns the (possibly new) flag.
  bool scan_zero();

  double max_abs() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    c_[0] += s;
    zero_ = zero_ && s == 0.0;
    return *this;
  }
  Jet& operator-=(double s) { return *this += -s; }

 private:
  const JetBasis* basis_;
  std::vector<double> c_;
  bool zero_ = true;
  friend Jet operator*(const Jet&, const Jet&);
  friend void jet_mul_acc(Jet&, const Jet&, const Jet&, double);
  friend Jet jet_truncated(const Jet&, int);
};

// Arithmetic. Operands must share n_vars; mixed orders truncate to the
// minimum order, which the result records.
Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, double s);
Jet operator*(double s, const Jet& a);
Jet operator+(const Jet& a, double s);
Jet operator-(const Jet& a, double s);
Jet operator/(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, double s);

// acc += sign * a * b, truncated to acc's order (which must not exceed the
// operands'). The workhorse of every contraction loop.
void jet_mul_acc(Jet& acc, const Jet& a, const Jet& b, double sign = 1.0);

// Copy into the basis with the same variables and the given order; padding
// with zeros when raising the order (the new coefficients are *not* claimed
// exact by anything - callers own that bookkeeping).
Jet jet_truncated(const Jet& a, int order);

// d/d(var); result order drops by one.
Jet jet_partial(const Jet& a, int var);
// Antiderivative in var vanishing at the base point; result order rises by one.
Jet jet_antiderivative(const Jet& a, int var);

// Composition with an analytic function given the value-derivative ladder:
// series[m] must hold f^(m)(a.value())/m!.
Jet jet_analytic(const Jet& a, const std::vector<double>& series);
Jet jet_exp(const Jet& a);
Jet jet_log(const Jet& a);     // requires a.value() > 0
Jet jet_sqrt(const Jet& a);    // requires a.value() > 0
Jet jet_sin(const Jet& a);
Jet jet_cos(const Jet& a);
Jet jet_pow(const Jet& a, double exponent);  // requires a.value() > 0
Jet jet_inverse(const Jet& a);               // requires a.value() != 0
Jet jet_int_pow(const Jet& a, int exponent); // repeated squaring; exponent >= 0

// Moves a jet into a larger-variable basis. var_map[v] gives the target slot
// of source variable v; the map must be injective.
Jet jet_embed(const Jet& a, const JetBasis& target, const std::vector<int>& var_map);

// Taylor coefficient of var^power as a jet in the same variables (with the
// var-exponent removed); result order = a.order() - power.
Jet jet_extract_power(const Jet& a, int var, int power);

// scale * var^power * a in the same basis, by exponent shifting (no product
// table); terms pushed past the truncation order are dropped.
Jet jet_var_shift(const Jet& a, int var, int power, double scale);

// Drops a variable the jet does not actually use (every stored coefficient
// with a nonzero exponent on it must vanish). var_map as in jet_embed but
// from surviving source variables to target slots.
Jet jet_remove_var(const Jet& a, int var, const JetBasis& target,
                   const std::vector<int>& var_map);

// Evaluates the truncated polynomial at the given offsets from the base point.
double jet_eval(const Jet& a, const std::vector<double>& offset);

// Uniform draw in [-1, 1) that does not depend on the standard library's
// distribution implementation.
double uniform_pm1(std::mt19937_64& rng);

// Random polynomial jet whose degree-d coefficients are bounded by
// amplitude / d!.
Jet jet_random(const JetBasis& b, std::mt19937_64& rng, double amplitude);

std::string jet_debug_string(const Jet& a, int max_terms = 12);

}  // namespace ambientlab
