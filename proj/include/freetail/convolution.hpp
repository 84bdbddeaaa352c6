#pragma once

#include "freetail/inversion.hpp"
#include "freetail/measure.hpp"
#include "freetail/transforms.hpp"

// Free convolutions by analytic subordination. Everything runs on Cauchy
// transform evaluators, so closed forms, measure transforms, and the
// Levy-Khintchine route compose freely; the Measure level wrappers invert
// the resulting transform on a caller supplied grid.
//
// Additive: omega_1, omega_2 solve F_1(omega_1) = F_2(omega_2) = F(z) with
// omega_1 + omega_2 = z + F(z); iterating
//   omega_1 <- z + h_2(z + h_1(omega_1)),   h_j(w) = F_j(w) - w,
// stays in the upper half plane (each h_j is Nevanlinna) and contracts.
//
// Multiplicative, for measures on [0, inf): in the reciprocal chart
// zeta = 1/z the eta transform eta(zeta) = psi/(1 + psi) with
// psi(zeta) = G(1/zeta)/zeta - 1 subordinates as
//   eta(zeta) = eta_1(omega_1) = eta_2(omega_2),
//   omega_1 omega_2 = zeta eta(zeta),
// which gives the alternating update omega_2 = zeta eta_1(omega_1)/omega_1
// and back. No moments are used anywhere, so heavy tails are fine.

namespace freetail {

struct SubordinationPair {
    cplx omega1;
    cplx omega2;
};

// Additive subordination points at z, Im z > 0. warm, when given, seeds the
// fixed point search from a neighboring solution; the fixed point is unique
// in the upper half plane, so any seed there is legal and a stale one only
// costs iterations.
SubordinationPair subordination_add(const CauchyEval& g1, const CauchyEval& g2,
                                    cplx z, double tol = 1e-12,
                                    const cplx* warm = nullptr);

// G of the free additive convolution, G(z) = g1(omega_1(z))
cplx free_add_cauchy(const CauchyEval& g1, const CauchyEval& g2, cplx z,
                     double tol = 1e-12);

// multiplicative subordination points in the zeta = 1/z chart, Im z > 0;
// warm seeds in that chart (lower half plane)
SubordinationPair subordination_multiply(const CauchyEval& g1,
                                         const CauchyEval& g2, cplx z,
                                         double tol = 1e-12,
                                         const cplx* warm = nullptr);

// G of the free multiplicative convolution of two laws on [0, inf)
cplx free_multiply_cauchy(const CauchyEval& g1, const CauchyEval& g2, cplx z,
                          double tol = 1e-12);

// Measure level wrappers: subordinate, then Stieltjes invert on cfg's grid.
// Point mass factors short circuit to exact shifts and dilations.
Measure free_add(const Measure& a, const Measure& b,
                 const InversionConfig& cfg);

// Both factors must be probability measures on [0, inf); a centered factor
// fails with mean_zero (square it first, see wigner_product_square), and
// delta_0 absorbs everything.
Measure free_multiply(const Measure& a, const Measure& b,
                      const InversionConfig& cfg);

// The symmetric law mu with G_mu(z) = z G_{mu^2}(z^2) where mu^2 is the free
// multiplicative convolution of the rate 1 square law (Catalan moments) with
// rho. This is the spectral law of a centered element multiplied by rho on
// both sides symmetrically; rho = delta_a gives back the semicircle with
// variance a. cfg's grid covers x > 0, the result is folded symmetric.
Measure wigner_product_square(const Measure& rho, const InversionConfig& cfg);

} // namespace freetail
