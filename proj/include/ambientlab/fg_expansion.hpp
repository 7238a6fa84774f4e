#pragma once
#include <vector>

#include "ambientlab/chart_geometry.hpp"

namespace ambientlab {

// Order-by-order formal solution of the Ricci-flat condition for the cone-type
// metric 2t dt drho + 2rho dt^2 + t^2 g_rho built over a base metric g.
//
// Variable layout for the (n+2)-dimensional jets: slot 0 = t (about 1),
// slots 1..n = base chart directions, slot n+1 = rho (about 0). When the base
// metric carries extra parameter variables beyond its dimension (e.g. a
// first-order variation parameter), those map to ambient slots n+2, ... and
// ride along untouched.
//
// Derivative bookkeeping: producing the k-th rho-derivative coefficient exact
// to spatial order p consumes the (k-1)-st tangential Ricci coefficient to
// order p, which in turn needs earlier coefficients to order p+2 each step
// down. Hence the precondition g.order >= 2K + 2 and the per-step payloads
// p_k = terminal + 2(K - k).

struct RhoSeries {
  int n = 0;
  int K = 0;
  // coeffs[k] = k-th rho-derivative of g_rho at rho=0 (derivative convention,
  // not series coefficients); rank-2 covariant x-jets. coeffs[0] is the input
  // metric. For n even and K = n/2 the top slot is omitted: the determined
  // trace lives in even_trace and the trace-free part is normalized to zero.
  std::vector<TensorJet> coeffs;

  bool has_even_trace = false;
  Jet even_trace;  // g^{ij} (d/drho)^{n/2} g_ij at rho=0, as an x-jet

  // Inverse of coeffs[0], reused by downstream consumers.
  JetMatrix g0_inv;

  // Per-step recursion constants recovered by probing (index k-1 for step k);
  // the obstructed step of an even dimension shows a_k ~ 0.
  std::vector<double> probe_a, probe_b;

  int payload(int k) const { return coeffs.at(k).basis().order(); }
};

struct AmbientMetricJet {
  int n = 0;       // base dimension; the metric itself has dimension n+2
  MetricJet g;     // jets about (t, x, rho) = (1, base point, 0)
};

struct ObstructionReport {
  int n = 0;                   // even
  TensorJet residual;          // trace-free part of the obstructed equation
  bool has_bach_fit = false;   // n == 4 only
  double bach_scale = 0.0;     // fitted c in residual ~ c * Bach
  double bach_rel_dev = 0.0;   // relative deviation of that fit
};

// Solves for the rho-derivative coefficients through order K.
// terminal_payload caps the spatial order of the top coefficient (default -1:
// use everything the input order affords, p_K = g.order - 2K). Requesting
// more than that is an error; lower caps shrink every frame and buy speed.
RhoSeries solve_expansion(const MetricJet& g, int K, int terminal_payload = -1);

// Builds the (n+2)-dimensional metric jets at the given truncation order.
// Every stored coefficient must cover ambient_order (payload(k) + k >=
// ambient_order), and rho-degrees beyond K are dropped.
AmbientMetricJet assemble_ambient(const RhoSeries& series, int ambient_order);

// Closed-form inverse of the assembled metric: the t/rho corner is constant
// in the base directions and the tangential block inverts as a rho-series.
JetMatrix ambient_inverse(const AmbientMetricJet& ambient);

// The unremovable trace-free residual of the order-n/2 equation (n even).
ObstructionReport obstruction_residual(const MetricJet& g);

// Terminating series g + 2P rho + P.P rho^2, valid when g is Einstein or
// locally conformally flat; shaped exactly like solve_expansion output
// (even-dimensional trace record included).
RhoSeries closed_form_series(const MetricJet& g, int K);

}  // namespace ambientlab
