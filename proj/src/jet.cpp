#include "ambientlab/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace ambientlab {

namespace {

void enumerate_rec(int var, int n_vars, int remaining, uint64_t packed,
                   std::vector<uint64_t>& out) {
  if (var == n_vars - 1) {
    out.push_back(packed | (static_cast<uint64_t>(remaining) << (4 * var)));
    return;
  }
  for (int e = remaining; e >= 0; --e)
    enumerate_rec(var + 1, n_vars, remaining - e,
                  packed | (static_cast<uint64_t>(e) << (4 * var)), out);
}

int packed_degree(uint64_t p, int n_vars) {
  int d = 0;
  for (int v = 0; v < n_vars; ++v) d += static_cast<int>((p >> (4 * v)) & 0xF);
  return d;
}

std::mutex g_registry_mutex;
std::map<std::pair<int, int>, std::unique_ptr<JetBasis>>& registry() {
  static std::map<std::pair<int, int>, std::unique_ptr<JetBasis>> r;
  return r;
}

}  // namespace

const JetBasis& jet_basis(int n_vars, int order) {
  if (n_vars < 1 || n_vars > 16 || order < 0 || order > 15)
    throw UsageError("jet_basis: supported ranges are 1..16 variables, order 0..15");
  std::lock_guard<std::mutex> lock(g_registry_mutex);
  auto& slot = registry()[{n_vars, order}];
  if (!slot) slot.reset(new JetBasis(n_vars, order));
  return *slot;
}

JetBasis::JetBasis(int n_vars, int order) : n_vars_(n_vars), order_(order) {
  deg_offset_.resize(order + 2, 0);
  for (int d = 0; d <= order; ++d) {
    deg_offset_[d] = static_cast<int>(packed_.size());
    enumerate_rec(0, n_vars, d, 0, packed_);
  }
  deg_offset_[order + 1] = static_cast<int>(packed_.size());
  degree_of_.resize(packed_.size());
  for (std::size_t i = 0; i < packed_.size(); ++i)
    degree_of_[i] = static_cast<int16_t>(packed_degree(packed_[i], n_vars));
  rank_.reserve(packed_.size());
  for (std::size_t i = 0; i < packed_.size(); ++i)
    rank_.emplace_back(packed_[i], static_cast<int32_t>(i));
  std::sort(rank_.begin(), rank_.end());
  partials_.resize(n_vars);
}

int JetBasis::find(uint64_t packed) const {
  auto it = std::lower_bound(rank_.begin(), rank_.end(),
                             std::make_pair(packed, int32_t{-1}));
  if (it == rank_.end() || it->first != packed) return -1;
  return it->second;
}

void JetBasis::build_mul() const {
  const int n = size();
  // Count pairs per output, then fill; amounts to a counting sort keyed by
  // the output index, giving a fixed accumulation order in the kernel.
  std::vector<uint32_t> count(n, 0);
  for (int da = 0; da <= order_; ++da)
    for (int db = 0; db + da <= order_; ++db)
      for (int i = deg_offset_[da]; i < deg_offset_[da + 1]; ++i)
        for (int j = deg_offset_[db]; j < deg_offset_[db + 1]; ++j)
          ++count[find(packed_[i] + packed_[j])];
  mul_.offset.resize(n + 1);
  mul_.offset[0] = 0;
  for (int k = 0; k < n; ++k) mul_.offset[k + 1] = mul_.offset[k] + count[k];
  const uint32_t total = mul_.offset[n];
  mul_.lhs.resize(total);
  mul_.rhs.resize(total);
  std::vector<uint32_t> cursor(mul_.offset.begin(), mul_.offset.end() - 1);
  for (int da = 0; da <= order_; ++da)
    for (int db = 0; db + da <= order_; ++db)
      for (int i = deg_offset_[da]; i < deg_offset_[da + 1]; ++i)
        for (int j = deg_offset_[db]; j < deg_offset_[db + 1]; ++j) {
          int out = find(packed_[i] + packed_[j]);
          uint32_t& c = cursor[out];
          mul_.lhs[c] = static_cast<uint32_t>(i);
          mul_.rhs[c] = static_cast<uint32_t>(j);
          ++c;
        }
}

const JetBasis::MulTable& JetBasis::mul_table() const {
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  if (!mul_built_) {
    build_mul();
    mul_built_ = true;
  }
  return mul_;
}

const JetBasis::PartialTable& JetBasis::partial_table(int var) const {
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  PartialTable& t = partials_[var];
  if (t.src.empty() && order_ >= 1) {
    const int n_out = deg_offset_[order_];  // indices of degree <= order-1
    t.src.resize(n_out);
    t.factor.resize(n_out);
    const uint64_t unit = uint64_t{1} << (4 * var);
    for (int i = 0; i < n_out; ++i) {
      int src = find(packed_[i] + unit);
      t.src[i] = src;
      t.factor[i] = static_cast<double>(exponent(src, var));
    }
  }
  return t;
}

Jet Jet::variable(const JetBasis& b, int var, double base_value) {
  if (b.order() < 1) throw UsageError("Jet::variable needs order >= 1");
  Jet j(b, base_value);
  j.c_[b.find(uint64_t{1} << (4 * var))] = 1.0;
  j.zero_ = false;
  return j;
}

bool Jet::scan_zero() {
  if (zero_) return true;
  for (double v : c_)
    if (v != 0.0) return false;
  zero_ = true;
  return true;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void check_compatible(const Jet& a, const Jet& b) {
  if (!a.valid() || !b.valid()) throw UsageError("operation on an empty jet");
  if (a.n_vars() != b.n_vars())
    throw UsageError("jet operands live on different variable sets");
}

// Bases with equal n_vars nest: lower order is a coefficient prefix.
const JetBasis& min_basis(const Jet& a, const Jet& b) {
  return a.order() <= b.order() ? a.basis() : b.basis();
}

}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(*this, o);
  if (o.order() < order()) *this = jet_truncated(*this, o.order());
  const int n = basis().size();
  for (int i = 0; i < n; ++i) c_[i] += o.c_[i];
  zero_ = zero_ && o.zero_;
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(*this, o);
  if (o.order() < order()) *this = jet_truncated(*this, o.order());
  const int n = basis().size();
  for (int i = 0; i < n; ++i) c_[i] -= o.c_[i];
  zero_ = zero_ && o.zero_;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r = jet_truncated(a, min_basis(a, b).order());
  r += b;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = jet_truncated(a, min_basis(a, b).order());
  r -= b;
  return r;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  r *= -1.0;
  return r;
}

Jet operator*(const Jet& a, double s) {
  Jet r = a;
  r *= s;
  return r;
}

Jet operator*(double s, const Jet& a) { return a * s; }

Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r[0] += s;
  return r;
}

Jet operator-(const Jet& a, double s) { return a + (-s); }

Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  Jet r(min_basis(a, b));
  jet_mul_acc(r, a, b, 1.0);
  return r;
}

void jet_mul_acc(Jet& acc, const Jet& a, const Jet& b, double sign) {
  check_compatible(a, b);
  if (!acc.valid()) throw UsageError("jet_mul_acc into an empty jet");
  if (acc.order() > a.order() || acc.order() > b.order())
    throw UsageError("jet_mul_acc: accumulator order exceeds an operand's");
  if (a.known_zero() || b.known_zero()) return;
  const JetBasis::MulTable& t = acc.basis().mul_table();
  const double* pa = a.coefficients().data();
  const double* pb = b.coefficients().data();
  const int n = acc.basis().size();
  for (int out = 0; out < n; ++out) {
    double s = 0.0;
    for (uint32_t p = t.offset[out]; p < t.offset[out + 1]; ++p)
      s += pa[t.lhs[p]] * pb[t.rhs[p]];
    acc.c_[out] += sign * s;
  }
  acc.zero_ = false;
}

Jet jet_truncated(const Jet& a, int order) {
  if (order == a.order()) return a;
  Jet r(jet_basis(a.n_vars(), order));
  const int n = std::min(r.basis().size(), a.basis().size());
  for (int i = 0; i < n; ++i) r.c_[i] = a[i];
  r.zero_ = a.known_zero();
  return r;
}

Jet jet_partial(const Jet& a, int var) {
  if (a.order() < 1)
    throw InsufficientOrderError("jet_partial: operand carries no orders to spend");
  if (var < 0 || var >= a.n_vars()) throw UsageError("jet_partial: bad variable");
  Jet r(jet_basis(a.n_vars(), a.order() - 1));
  if (a.known_zero()) return r;
  const auto& t = a.basis().partial_table(var);
  const int n = r.basis().size();
  for (int i = 0; i < n; ++i) r[i] = a[t.src[i]] * t.factor[i];
  r.scan_zero();
  return r;
}

Jet jet_antiderivative(const Jet& a, int var) {
  if (var < 0 || var >= a.n_vars()) throw UsageError("jet_antiderivative: bad variable");
  const JetBasis& target = jet_basis(a.n_vars(), a.order() + 1);
  Jet r(target);
  if (a.known_zero()) return r;
  const uint64_t unit = uint64_t{1} << (4 * var);
  const int n = a.basis().size();
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    int dst = target.find(a.basis().packed_exponents(i) + unit);
    r[dst] = a[i] / static_cast<double>(target.exponent(dst, var));
  }
  r.scan_zero();
  return r;
}

Jet jet_analytic(const Jet& a, const std::vector<double>& series) {
  if (static_cast<int>(series.size()) < a.order() + 1)
    throw UsageError("jet_analytic: derivative ladder shorter than the jet order");
  Jet h = a;
  h[0] = 0.0;
  h.scan_zero();
  Jet r = Jet::constant(a.basis(), series[a.order()]);
  for (int m = a.order() - 1; m >= 0; --m) {
    Jet next(a.basis(), series[m]);
    jet_mul_acc(next, r, h, 1.0);
    r = std::move(next);
  }
  return r;
}

Jet jet_exp(const Jet& a) {
  std::vector<double> s(a.order() + 1);
  double e = std::exp(a.value());
  double f = 1.0;
  for (int m = 0; m <= a.order(); ++m) {
    s[m] = e / f;
    f *= (m + 1);
  }
  return jet_analytic(a, s);
}

Jet jet_log(const Jet& a) {
  if (!(a.value() > 0.0))
    throw SingularInputError("jet_log: leading value must be positive");
  std::vector<double> s(a.order() + 1);
  s[0] = std::log(a.value());
  for (int m = 1; m <= a.order(); ++m)
    s[m] = (m % 2 == 1 ? 1.0 : -1.0) / (m * std::pow(a.value(), m));
  return jet_analytic(a, s);
}

Jet jet_pow(const Jet& a, double exponent) {
  if (!(a.value() > 0.0))
    throw SingularInputError("jet_pow: leading value must be positive");
  std::vector<double> s(a.order() + 1);
  s[0] = std::pow(a.value(), exponent);
  for (int m = 1; m <= a.order(); ++m)
    s[m] = s[m - 1] * (exponent - (m - 1)) / (m * a.value());
  return jet_analytic(a, s);
}

Jet jet_sqrt(const Jet& a) { return jet_pow(a, 0.5); }

Jet jet_sin(const Jet& a) {
  std::vector<double> s(a.order() + 1);
  double f = 1.0;
  for (int m = 0; m <= a.order(); ++m) {
    switch (m % 4) {
      case 0: s[m] = std::sin(a.value()); break;
      case 1: s[m] = std::cos(a.value()); break;
      case 2: s[m] = -std::sin(a.value()); break;
      default: s[m] = -std::cos(a.value()); break;
    }
    s[m] /= f;
    f *= (m + 1);
  }
  return jet_analytic(a, s);
}

Jet jet_cos(const Jet& a) {
  std::vector<double> s(a.order() + 1);
  double f = 1.0;
  for (int m = 0; m <= a.order(); ++m) {
    switch (m % 4) {
      case 0: s[m] = std::cos(a.value()); break;
      case 1: s[m] = -std::sin(a.value()); break;
      case 2: s[m] = -std::cos(a.value()); break;
      default: s[m] = std::sin(a.value()); break;
    }
    s[m] /= f;
    f *= (m + 1);
  }
  return jet_analytic(a, s);
}

Jet jet_inverse(const Jet& a) {
  if (a.value() == 0.0)
    throw SingularInputError("jet_inverse: leading value vanishes");
  std::vector<double> s(a.order() + 1);
  s[0] = 1.0 / a.value();
  for (int m = 1; m <= a.order(); ++m) s[m] = -s[m - 1] / a.value();
  return jet_analytic(a, s);
}

Jet operator/(const Jet& a, const Jet& b) { return a * jet_inverse(b); }

Jet jet_int_pow(const Jet& a, int exponent) {
  if (exponent < 0) throw UsageError("jet_int_pow: negative exponent");
  Jet r = Jet::constant(a.basis(), 1.0);
  Jet base = a;
  int e = exponent;
  while (e > 0) {
    if (e & 1) r = r * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return r;
}

Jet jet_embed(const Jet& a, const JetBasis& target, const std::vector<int>& var_map) {
  if (static_cast<int>(var_map.size()) != a.n_vars())
    throw UsageError("jet_embed: var_map size mismatch");
  Jet r(target);
  if (a.known_zero()) return r;
  const int n = a.basis().size();
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    uint64_t p = 0;
    for (int v = 0; v < a.n_vars(); ++v) {
      int e = a.basis().exponent(i, v);
      if (e) p |= static_cast<uint64_t>(e) << (4 * var_map[v]);
    }
    int dst = target.find(p);
    if (dst >= 0) r[dst] = a[i];
  }
  r.scan_zero();
  return r;
}

Jet jet_extract_power(const Jet& a, int var, int power) {
  if (power < 0 || power > a.order())
    throw UsageError("jet_extract_power: power out of range");
  Jet r(jet_basis(a.n_vars(), a.order() - power));
  if (a.known_zero()) return r;
  const uint64_t shift = static_cast<uint64_t>(power) << (4 * var);
  const int n = r.basis().size();
  for (int i = 0; i < n; ++i) {
    if (r.basis().exponent(i, var) != 0) continue;
    int src = a.basis().find(r.basis().packed_exponents(i) + shift);
    r[i] = a[src];
  }
  r.scan_zero();
  return r;
}

Jet jet_var_shift(const Jet& a, int var, int power, double scale) {
  if (var < 0 || var >= a.n_vars()) throw UsageError("jet_var_shift: bad variable");
  if (power < 0) throw UsageError("jet_var_shift: negative power");
  Jet r(a.basis());
  if (a.known_zero() || scale == 0.0) return r;
  const uint64_t shift = static_cast<uint64_t>(power) << (4 * var);
  const int n = r.basis().size();
  for (int i = 0; i < n; ++i) {
    int e = r.basis().exponent(i, var);
    if (e < power) continue;
    int src = a.basis().find(r.basis().packed_exponents(i) - shift);
    if (src >= 0) r[i] = scale * a[src];
  }
  r.scan_zero();
  return r;
}

Jet jet_remove_var(const Jet& a, int var, const JetBasis& target,
                   const std::vector<int>& var_map) {
  Jet r(target);
  if (a.known_zero()) return r;
  const int n = a.basis().size();
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    if (a.basis().exponent(i, var) != 0)
      throw ConsistencyError("jet_remove_var: jet still depends on the variable");
    uint64_t p = 0;
    for (int v = 0; v < a.n_vars(); ++v) {
      if (v == var) continue;
      int e = a.basis().exponent(i, v);
      if (e) p |= static_cast<uint64_t>(e) << (4 * var_map[v]);
    }
    int dst = target.find(p);
    if (dst >= 0) r[dst] = a[i];
  }
  r.scan_zero();
  return r;
}

double jet_eval(const Jet& a, const std::vector<double>& offset) {
  if (static_cast<int>(offset.size()) != a.n_vars())
    throw UsageError("jet_eval: offset size mismatch");
  double total = 0.0;
  const int n = a.basis().size();
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    double term = a[i];
    for (int v = 0; v < a.n_vars(); ++v)
      for (int e = 0; e < a.basis().exponent(i, v); ++e) term *= offset[v];
    total += term;
  }
  return total;
}

double uniform_pm1(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

Jet jet_random(const JetBasis& b, std::mt19937_64& rng, double amplitude) {
  Jet r(b);
  double fact = 1.0;
  int deg = 0;
  const int n = b.size();
  for (int i = 0; i < n; ++i) {
    while (b.degree_of(i) > deg) {
      ++deg;
      fact *= deg;
    }
    r[i] = uniform_pm1(rng) * amplitude / fact;
  }
  r.scan_zero();
  return r;
}

std::string jet_debug_string(const Jet& a, int max_terms) {
  std::ostringstream os;
  os.precision(10);
  int emitted = 0;
  const int n = a.basis().size();
  for (int i = 0; i < n && emitted < max_terms; ++i) {
    if (a[i] == 0.0 && i > 0) continue;
    if (emitted) os << " + ";
    os << a[i];
    for (int v = 0; v < a.n_vars(); ++v) {
      int e = a.basis().exponent(i, v);
      if (e) {
        os << "*u" << v;
        if (e > 1) os << "^" << e;
      }
    }
    ++emitted;
  }
  if (emitted == max_terms) os << " + ...";
  return os.str();
}

}  // namespace ambientlab
