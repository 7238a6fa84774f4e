#pragma once
#include <optional>
#include <vector>

#include "ambientlab/fg_expansion.hpp"

namespace ambientlab {

// Renormalized volume coefficients: the square-rooted determinant ratio
// expands as (det g_rho / det g0)^{1/2} = 1 + sum_k v_k rho^k. The v_k are
// produced by a log-derivative accumulation (trace of g^{-1} g' integrated,
// exponentiated, square-rooted in jet arithmetic); a direct determinant
// expansion lives in volume_series_by_determinant as an independent check.
struct VolumeSeries {
  int n = 0;
  int count = 0;           // coefficients stored: v_1 .. v_count
  std::vector<Jet> v;      // v[k-1] = v_k as an x-jet at the base point
  Jet v_of_rho;            // one-variable jet in rho: [0] = 1, [k] = value of v_k

  const Jet& vk(int k) const { return v.at(k - 1); }
};

// Elementary symmetric functions and Newton tensors of an endomorphism A.
// sigma_k is the k-th coefficient of det(I + rho A); the Newton tensors
// T_(0..n-1) are the coefficients of the adjugate series
// det(I + rho A)(I + rho A)^{-1} and satisfy d sigma_k = tr(T_(k-1) dA).
// sigma_k for k > n vanishes identically and is not stored.
struct SymmetricFunctionValue {
  int n = 0;
  JetMatrix a;                    // the endomorphism itself, A^i_j
  std::vector<Jet> sigma;         // sigma[k], k = 0..n; sigma[0] = 1
  std::vector<JetMatrix> t_endo;  // T_(k) as endomorphisms, k = 0..n-1
  std::vector<TensorJet> t_up;    // T^{ij}_(k), lower slot raised with ginv
};

// Principal part of the conformal linearization of v_k: the contravariant
// symmetric pair L^{ij}_(k) with  delta v_k = -2k omega v_k
// + div_i(L^{ij}_(k) grad_j omega).
struct LTensor {
  int k = 0;
  TensorJet l;  // rank 2, contravariant, symmetric
};

// Dimension-independent closed forms for the expansion coefficients
// d^k/drho^k g|_0 (rank-2 table, k <= 5) and for v_k (scalar table, k <= 4),
// evaluated on the Schouten tensor and the extended obstruction tensors.
// Each form is present when its table exists and the obstruction list
// reaches far enough: the rank-2 form consumes entries up to k-1, the
// scalar one up to k-2. (At the even-dimensional boundary k = n/2 the
// scalar form is still meaningful while the rank-2 one is not.)
struct BuildingBlockForms {
  int k = 0;
  std::optional<TensorJet> g_form;  // equals coeffs[k] of the solved expansion
  std::optional<Jet> v_form;        // equals v_k; absent for k = 5
};

// One monomial of a rank-2 table entry: coeff times the symmetrized
// alternating chain F1 ginv F2 ginv ... with word entries 0 = Schouten,
// l >= 1 = l-th extended obstruction.
struct ChainTerm {
  double coeff;
  std::vector<int> word;
};

// One monomial of a scalar table entry: coeff times a product of traces,
// each trace taken over such an alternating chain.
struct TraceTerm {
  double coeff;
  std::vector<std::vector<int>> traces;
};

// Extracts v_1..v_count from a solved expansion. count = -1 takes everything
// the series determines. In even dimension the top coefficient n/2 is only
// determined up to trace, but the determinant ratio depends on it through the
// trace alone, so the stored trace record completes v_{n/2}.
VolumeSeries volume_coefficients(const RhoSeries& series, int count = -1);

// Independent values-only route: expands det(g0^{-1} g_rho) as a scalar
// rho-polynomial by Gaussian elimination over truncated series and takes the
// square-root series. Returns coefficients [0..count] with entry 0 = 1. The
// even-dimensional top slot enters a determinant only through its g-trace,
// so a pure-trace representative built from the trace record substitutes.
std::vector<double> volume_series_by_determinant(const RhoSeries& series,
                                                 int count = -1);

// rho-derivatives of the inverse metric at rho = 0 via iterated
// differentiation of g^{-1} g = I: out[m] = d^m/drho^m g^{ij}|_0, m <= m_max.
std::vector<JetMatrix> inverse_metric_derivatives(const RhoSeries& series,
                                                  int m_max);

// sigma_k and Newton tensors of A; the raised form T^{ij} uses ginv (pass
// the inverse metric when A = g^{-1}P; the overload without it raises with
// the identity, i.e. reads A's frame as orthonormal).
SymmetricFunctionValue sigma_and_newton(const JetMatrix& a,
                                        const JetMatrix& ginv);
SymmetricFunctionValue sigma_and_newton(const JetMatrix& a);

// Largest relative deviation, over rho-orders 0..n-1, between the adjugate
// series det(I + rho A)(I + rho A)^{-1} built by series arithmetic (log-det
// exponential times geometric inverse, on base-point values) and the stored
// Newton tensors. Exercised by the suite at 1e-11.
double newton_generating_residual(const SymmetricFunctionValue& s);

// L^{ij}_(k) by two routes: the k-th rho-derivative of v(rho) * int_0^rho
// g^{ij}(u) du (Leibniz on derivative-convention data) and the expanded sum
// -sum_l (1/l!) v_{k-l} d^{l-1} g^{ij} (series-inversion data). The routes
// must agree to 1e-10 relative or a ConsistencyError is thrown; the first is
// returned, exactly symmetrized.
LTensor linearization_coefficients(const RhoSeries& series, int k);

// Evaluates the tabulated closed forms on Schouten p and extended
// obstructions omegas (omegas[l-1] is the l-th). Contractions use ginv.
// Throws UsageError when the list supports neither form.
BuildingBlockForms building_block_forms(const TensorJet& p,
                                        const std::vector<TensorJet>& omegas,
                                        const JetMatrix& ginv, int k);

// Read-only access to the tables behind building_block_forms; every word
// carries weight k (Schouten counts 1, the l-th obstruction counts l+1),
// which the accessors verify once at first use.
const std::vector<ChainTerm>& coefficient_table(int k);  // k = 1..5
const std::vector<TraceTerm>& volume_table(int k);       // k = 1..4

}  // namespace ambientlab
