#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ambientlab/ambient_curvature.hpp"
#include "ambientlab/metric_zoo.hpp"
#include "ambientlab/volume.hpp"

namespace ambientlab {

// Conformal transformation and variation checks. Every check evaluates its
// two sides by independent routes and reports the largest coefficient
// deviation. Infinitesimal variations are computed exactly by threading a
// first-order parameter variable through the whole expansion pipeline;
// finite differencing appears only as an extra oracle in the test suite.

struct VariationReport {
  std::string identity;
  // Largest absolute coefficient (or absolute-value integral, for the torus
  // checks) of each side, used as the comparison scale.
  double lhs_scale = 0.0;
  double rhs_scale = 0.0;
  double abs_err = 0.0;
  // abs_err / max(lhs_scale, rhs_scale, 1e-30); the floor keeps identities
  // whose both sides vanish from dividing by zero.
  double rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  // Filled by variation_of_expansion: m-th transverse derivative at 0 of the
  // compensating vector field Y^i, m = 0 .. K+1, as contravariant rank-1
  // base-chart jets.
  std::vector<TensorJet> y_series;
};

// Pointwise multiplication of the metric by exp(2 omega), coefficient-exact.
MetricJet conformal_rescale(const MetricJet& g, const ConformalFactor& factor);

// A named conformal transformation law. `hatted` evaluates the left side
// from the rescaled metric exp(2 omega) g; `formula` predicts the same
// quantity from unrescaled data. Both return tensors over the base chart
// (full jets where the law is pointwise-exact, base-point values where the
// prediction is value-level).
struct TransformationLaw {
  std::string name;
  int min_order = 0;  // metric jet order the evaluators need
  double tolerance = 0.0;
  std::function<TensorJet(const MetricJet&, const ConformalFactor&)> hatted;
  std::function<TensorJet(const MetricJet&, const ConformalFactor&)> formula;
};

// Registry: "schouten", "bach", "omega_full:1".."omega_full:2",
// "omega_linear:1".."omega_linear:3".
const std::vector<TransformationLaw>& transformation_laws();

VariationReport transformation_law_check(const MetricJet& g,
                                         const ConformalFactor& factor,
                                         const std::string& law);

// First variation of the transverse expansion of g under
// g -> exp(2 t omega) g. Left side: t-linear slice of the expansion solved
// for the deformed family. Right side: scaling term 2 omega (1 - rho d_rho)
// g_rho plus twice the symmetrized gradient of the compensating field
// Y^i(rho) = -(int_0^rho g^{ij}(u) du) d_j omega, with covariant derivatives
// taken in g_rho at fixed rho (rho rides as a jet variable). Agreement is
// aggregated over transverse orders 0..K. Needs g.order() >= 2K + 4; in even
// dimension the tensor-level comparison stops at K = n/2 - 1.
VariationReport variation_of_expansion(const MetricJet& g,
                                       const ConformalFactor& factor, int K);

// First variation of the k-th renormalized volume coefficient. Left side:
// t-linear slice of v_k for the deformed family. Right side:
// -2k omega v_k + div(L grad omega) with the divergence taken in g. The
// right side is also the linearization of omega -> v_k(exp(2 omega) g) at 0,
// so this check covers both readings. Needs g.order() >= 2k + 2; k <= n/2
// for n even.
VariationReport variation_of_volume_coefficients(const MetricJet& g,
                                                 const ConformalFactor& factor,
                                                 int k);

// Redraws every omega coefficient of total degree >= min_degree across
// `trials` trials while the lower jet stays fixed, then rescales by each
// trial factor and recomputes v_k (and, where the full tensor is determined,
// the k-th transverse coefficient) at the base point. The spread across
// trials is the reported error: the transformed values may depend on at most
// two derivatives of omega, so with min_degree = 3 the spread must vanish.
// min_degree <= 2 turns the same machinery into a power control whose spread
// must NOT vanish.
VariationReport second_jet_dependence_check(const MetricJet& g,
                                            const ConformalFactor& factor,
                                            int k, int trials,
                                            uint64_t seed = 1,
                                            int min_degree = 3);

// A flat-torus-chart instance: every expression must be 2 pi periodic in
// every variable, checked by sampling before any grid work starts. The
// quadrature is the uniform product rule, whose error for smooth periodic
// integrands decays faster than any power of the spacing.
struct TorusSpec {
  MetricSpec metric;
  ExprPtr omega;
  int grid = 8;  // nodes per axis
};

// Perturbed-torus instance with a seeded low-frequency conformal factor of
// the given amplitude; the standard input of the torus suites.
TorusSpec standard_torus(int n, uint64_t seed, double amplitude, int grid);

// Largest sampled relative deviation from 2 pi periodicity over all metric
// components and omega; the grid checks demand < 1e-10.
double torus_periodicity_error(const TorusSpec& spec);

struct TorusNodeSample {
  std::vector<double> x;
  double v_k = 0.0;        // volume coefficient value at the node
  double delta_v_k = 0.0;  // its first conformal variation value
  double omega = 0.0;
  double weight = 0.0;     // sqrt(det g) times the cell volume
};

// Per-node values over the full grid, ordered row-major over the axes (last
// axis fastest). Nodes are evaluated concurrently but the ordering, and
// therefore every reduction done in index order, is reproducible for any
// worker count.
std::vector<TorusNodeSample> torus_samples(const TorusSpec& spec, int k);

// integral of delta v_k  vs  -2k integral of v_k omega (volume elements of
// the node metric). For n even and k = n/2 the same residual is the first
// variation of the conformally invariant integral of v_{n/2}, which must
// vanish.
VariationReport functional_gradient_check(const TorusSpec& spec, int k);

// integral of div(L grad omega): a pure divergence, so the integral must
// vanish against the integral of its absolute value as scale.
VariationReport divergence_integral_check(const TorusSpec& spec, int k);

}  // namespace ambientlab
