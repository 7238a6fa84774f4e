#pragma once
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "ambientlab/jet.hpp"
#include "ambientlab/jet_matrix.hpp"

namespace ambientlab {

// Dense tensor of jet components. `dim` is the geometric index range; the
// jets themselves may carry more variables than dim (trailing slots are
// parameters, e.g. a conformal deformation direction). Geometric direction d
// always corresponds to jet variable d.
struct TensorJet {
  int dim = 0;
  int rank = 0;
  std::vector<int8_t> variance;  // -1 covariant slot, +1 contravariant slot
  std::vector<Jet> comps;        // dim^rank, row-major (last slot fastest)

  TensorJet() = default;
  TensorJet(int dim_, int rank_, const JetBasis& b, int8_t var = -1);

  std::size_t flat(std::initializer_list<int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * dim + i;
    return f;
  }
  Jet& at(std::initializer_list<int> idx) { return comps[flat(idx)]; }
  const Jet& at(std::initializer_list<int> idx) const { return comps[flat(idx)]; }

  const JetBasis& basis() const { return comps.front().basis(); }
  double max_abs() const;
};

TensorJet t_add(const TensorJet& a, const TensorJet& b);
TensorJet t_sub(const TensorJet& a, const TensorJet& b);
TensorJet t_scale(const TensorJet& a, double s);
TensorJet t_scale(const TensorJet& a, const Jet& s);

// Symmetrizes over two slots with weight 1/2.
TensorJet t_symmetrize2(const TensorJet& a, int slot1, int slot2);

// Largest absolute coefficient over components; the scale used by checks.
double t_max_abs(const TensorJet& a);

// Truncates every component to the given order.
TensorJet t_truncated(const TensorJet& a, int order);

// Metric on a chart. The jets may carry extra parameter variables beyond the
// geometric ones; `dim` tells the curvature machinery where geometry stops.
struct MetricJet {
  int dim = 0;
  JetMatrix g;

  const JetBasis& basis() const { return g.basis(); }
  int order() const { return basis().order(); }
};

// Levi-Civita connection coefficients; symmetric lower pair stored once.
struct ConnectionJet {
  int dim = 0;
  std::vector<Jet> store;  // [k][i<=j] blocks

  ConnectionJet() = default;
  ConnectionJet(int dim_, const JetBasis& b);
  // flat layout: k * npairs + pair_index(i, j)
  int npairs() const { return dim * (dim + 1) / 2; }
  int pair_offset(int i, int j) const { return i * dim - i * (i - 1) / 2 + (j - i); }
  const Jet& get(int k, int i, int j) const {
    if (i > j) std::swap(i, j);
    return store[k * npairs() + pair_offset(i, j)];
  }
  Jet& ref(int k, int i, int j) {
    if (i > j) std::swap(i, j);
    return store[k * npairs() + pair_offset(i, j)];
  }
  const JetBasis& basis() const { return store.front().basis(); }
};

}  // namespace ambientlab
