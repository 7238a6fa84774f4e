#pragma once
#include "ambientlab/tensor.hpp"

namespace ambientlab {

// Curvature conventions, pinned by the conventions self-test in the suite:
//   Gamma^a_{ij} = (1/2) g^{am} (d_i g_{jm} + d_j g_{im} - d_m g_{ij})
//   R^a_{jkl}    = d_k Gamma^a_{lj} - d_l Gamma^a_{kj}
//                  + Gamma^a_{kb} Gamma^b_{lj} - Gamma^a_{lb} Gamma^b_{kj}
//   R_{ijkl}     = g_{ia} R^a_{jkl}     (trace slots: 1 and 3)
//   Ric_{jl}     = R^a_{jal},  Scal = g^{jl} Ric_{jl}
// With these signs the round unit sphere has Ric = +(n-1) g.
//
// Every operation consumes jet orders exactly as it differentiates: the
// connection sits one order below the metric, curvature two below, and each
// covariant derivative one more. Mixed-order arithmetic truncates to the
// minimum automatically, so intermediate results are always held in the
// smallest basis that is still exact.

// Inverse metric jets, symmetrized, with exact-zero entries flagged.
JetMatrix metric_inverse(const MetricJet& g);

ConnectionJet levi_civita(const MetricJet& g, const JetMatrix& ginv);

TensorJet riemann_lowered(const MetricJet& g, const JetMatrix& ginv,
                          const ConnectionJet& gamma);

// Ricci assembled straight from the connection, skipping the rank-4 tensor.
TensorJet ricci_direct(const ConnectionJet& gamma);

Jet scalar_curvature(const TensorJet& ricci, const JetMatrix& ginv);

// g^{ij} t_{ij} for a rank-2 tensor.
Jet trace2(const TensorJet& t, const JetMatrix& ginv);

// Schouten tensor P = (Ric - Scal/(2(n-1)) g)/(n-2); requires dim >= 3.
TensorJet schouten(const MetricJet& g, const JetMatrix& ginv, const TensorJet& ricci);

// Weyl tensor W = Rm - (Kulkarni-Nomizu product of g and P), same slot
// convention as riemann_lowered.
TensorJet weyl(const MetricJet& g, const TensorJet& rm, const TensorJet& p);

// Cotton tensor C_{ijk} = P_{ij,k} - P_{ik,j}.
TensorJet cotton(const TensorJet& p, const ConnectionJet& gamma);

// Bach tensor B_{ij} = P_{ij,k}{}^k - P_{ik,j}{}^k - P^{kl} W_{kijl};
// symmetric and trace-free in every dimension >= 3 (checked by the suite).
TensorJet bach(const MetricJet& g, const JetMatrix& ginv, const TensorJet& p,
               const TensorJet& w, const ConnectionJet& gamma);

// Appends the derivative slot last: (nabla t)_{A...,M}. Handles any slot
// variance; result order drops by one.
TensorJet covariant_derivative(const TensorJet& t, const ConnectionJet& gamma);

// Contracts two covariant slots with the inverse metric; rank drops by two.
TensorJet contract_ginv(const TensorJet& t, int slot1, int slot2,
                        const JetMatrix& ginv);

// Raises one covariant slot.
TensorJet raise_slot(const TensorJet& t, int slot, const JetMatrix& ginv);

}  // namespace ambientlab
