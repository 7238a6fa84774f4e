#include "ambientlab/tensor.hpp"

#include <algorithm>

namespace ambientlab {

TensorJet::TensorJet(int dim_, int rank_, const JetBasis& b, int8_t var)
    : dim(dim_), rank(rank_), variance(rank_, var) {
  std::size_t n = 1;
  for (int r = 0; r < rank_; ++r) n *= dim_;
  comps.assign(n, Jet(b));
}

double TensorJet::max_abs() const {
  double m = 0.0;
  for (const auto& c : comps) m = std::max(m, c.max_abs());
  return m;
}

TensorJet t_add(const TensorJet& a, const TensorJet& b) {
  TensorJet r = a;
  for (std::size_t i = 0; i < r.comps.size(); ++i) r.comps[i] += b.comps[i];
  return r;
}

TensorJet t_sub(const TensorJet& a, const TensorJet& b) {
  TensorJet r = a;
  for (std::size_t i = 0; i < r.comps.size(); ++i) r.comps[i] -= b.comps[i];
  return r;
}

TensorJet t_scale(const TensorJet& a, double s) {
  TensorJet r = a;
  for (auto& c : r.comps) c *= s;
  return r;
}

TensorJet t_scale(const TensorJet& a, const Jet& s) {
  TensorJet r = a;
  for (auto& c : r.comps) c = c * s;
  return r;
}

TensorJet t_symmetrize2(const TensorJet& a, int slot1, int slot2) {
  TensorJet r = a;
  std::vector<int> idx(a.rank, 0);
  const std::size_t n = a.comps.size();
  for (std::size_t f = 0; f < n; ++f) {
    // decode
    std::size_t rem = f;
    for (int s = a.rank - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % a.dim);
      rem /= a.dim;
    }
    std::vector<int> sw = idx;
    std::swap(sw[slot1], sw[slot2]);
    std::size_t g = 0;
    for (int s = 0; s < a.rank; ++s) g = g * a.dim + sw[s];
    r.comps[f] = (a.comps[f] + a.comps[g]) * 0.5;
  }
  return r;
}

double t_max_abs(const TensorJet& a) { return a.max_abs(); }

TensorJet t_truncated(const TensorJet& a, int order) {
  if (order == a.basis().order()) return a;
  TensorJet r(a.dim, a.rank, jet_basis(a.basis().n_vars(), order));
  r.variance = a.variance;
  for (std::size_t i = 0; i < a.comps.size(); ++i)
    r.comps[i] = jet_truncated(a.comps[i], order);
  return r;
}

ConnectionJet::ConnectionJet(int dim_, const JetBasis& b) : dim(dim_) {
  store.assign(static_cast<std::size_t>(dim_) * npairs(), Jet(b));
}

}  // namespace ambientlab
