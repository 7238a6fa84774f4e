#pragma once
#include <initializer_list>

#include "ambientlab/fg_expansion.hpp"

namespace ambientlab {

// Components of the cone curvature and its covariant derivatives carry
// indices over the alphabet {0, 1..n, n+1}: value 0 is the scaling direction
// (the jet variable t about 1), values 1..n are the base chart directions,
// and value n+1 is the transverse direction (rho). An index list has length
// 4 + r: four curvature slots followed by r derivative slots, the first
// derivative taken first.
using AmbientIndex = std::vector<int>;

// Dense table of the r-th covariant derivative of the cone curvature,
// evaluated at the base point (t = 1, chart origin, rho = 0). Also keeps the
// base metric values so index raising is self-contained downstream.
struct CurvatureTable {
  int n = 0;  // base dimension; the cone has n + 2 directions
  int r = 0;
  std::vector<double> entries;  // (n+2)^(4+r), last slot fastest
  std::vector<double> g0;       // base metric values, n x n row-major
  std::vector<double> g0_inv;

  int rank() const { return 4 + r; }
  int dim() const { return n + 2; }
  double at(const AmbientIndex& index) const;
  double at(std::initializer_list<int> index) const;
  double max_abs() const;
};

// A conformal rescaling exponent: an x-jet on the base chart about the base
// point. Rescaling the metric means replacing g by exp(2 omega) g.
struct ConformalFactor {
  Jet omega;
};

// Symmetric 2-tensor family parametrized by rho: transverse curvature
// components of the cone restricted to t = 1, as rho-derivatives at 0.
// coeffs[m] holds the m-th derivative (no 1/m! folded in); each entry is a
// rank-2 tensor of base-point values.
struct RhoFamily {
  int n = 0;
  int k = 0;       // which family member
  int length = 0;  // highest stored derivative
  std::vector<TensorJet> coeffs;
};

// Obstruction-type and Cotton-type curvature components extracted from one
// expansion of the metric: obstructions[k-1] is rank 2, cottons[k-1] rank 3.
struct ConformalCurvatureSet {
  int n = 0;
  int k_max = 0;
  std::vector<TensorJet> obstructions;
  std::vector<TensorJet> cottons;
};

// Tabulates the r-th covariant derivative of the curvature of the assembled
// cone metric at the base point. Requires ambient order >= r + 2; the input
// is truncated to exactly that order internally, so passing a deeper jet
// costs nothing extra.
CurvatureTable ambient_curvature_derivatives(const AmbientMetricJet& ambient,
                                             int r);

// Reads the rank-2 component with transverse outer slots and all-transverse
// derivative slots out of a table with r = k - 1.
TensorJet obstruction_from_table(const CurvatureTable& table);

// Assembles the rank-3 combination of one-tangential-slot components from a
// table with r = k - 1.
TensorJet cotton_from_table(const CurvatureTable& table);

// k-th extended obstruction tensor of g: solves the expansion to depth k+1,
// assembles the cone, and extracts. Defined for n odd, or n even with
// n > 2(k+1). Requires g.order() >= 2k + 4. k = 4 is costly (rank-7 tables)
// and must be enabled explicitly.
TensorJet extended_obstruction(const MetricJet& g, int k,
                               bool allow_heavy = false);

// k-th higher Cotton tensor of g. Defined for n odd, or n even with
// n >= 2(k+1); same order requirement as extended_obstruction.
TensorJet higher_cotton(const MetricJet& g, int k, bool allow_heavy = false);

// k-th extended obstruction carried as jets rather than base-point values:
// the result keeps the chart variables and any trailing parameter variables
// of g to total order `payload`. Goes through the rank-4 transverse slice, so
// it is far cheaper than the dense tables and is the route to use when a
// deformation parameter must survive the extraction. Requires
// g.order() >= max(payload + 2k + 2, 2k + 4).
TensorJet extended_obstruction_jets(const MetricJet& g, int k, int payload);

// Both families for 1 <= k <= k_max from a single expansion of g.
ConformalCurvatureSet conformal_curvatures(const MetricJet& g, int k_max,
                                           bool allow_heavy = false);

// The (k-1)-th covariant derivative of the cone curvature with every
// derivative slot transverse, restricted to its (outer-transverse, i, j,
// outer-transverse) components would be the obstruction family; this returns
// the full rank-4 slice as ambient jets with derivative slots suppressed.
// Because the transverse-transverse connection row vanishes, the recursion
// never leaves rank 4, so this stays cheap where dense tables are not.
TensorJet transverse_derivative_slice(const AmbientMetricJet& ambient, int k);

// The k-th transverse family along rho, to the derivative length the stored
// series supports (length = K - k - 1 for a depth-K expansion with full
// payloads). At rho = 0 it reproduces the k-th extended obstruction when the
// series solves the expansion equations.
RhoFamily lambda_series(const RhoSeries& series, int k);

// Predicts the conformally rescaled table component at `target` by
// contracting table entries with the upper-triangular rescaling matrix built
// from the 1-jet of omega. The return value equals
// exp(2 (s_inf - 1) omega) * (component for exp(2 omega) g), where s_inf
// counts transverse slots in `target`. For n even the slot counts must obey
// s_M + 2 s_inf <= n + 1.
double cotractor_transport(const CurvatureTable& table,
                           const ConformalFactor& factor,
                           const AmbientIndex& target);

}  // namespace ambientlab
