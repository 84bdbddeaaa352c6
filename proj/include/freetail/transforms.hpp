// Analytic transform layer on top of Measure: the reciprocal Cauchy
// transform F, its inverse, the Voiculescu transform phi, the free cumulant
// transform C, and the Laurent remainders of G and phi after subtracting
// their leading expansion terms.
//
// The remainders are never formed by subtraction. The finite identity
//   1/(z-t) = sum_{j=0}^{p} t^j z^-(j+1) + t^(p+1) / (z^(p+1) (z-t))
// turns the G remainder into the absolutely convergent integral
//   r_G(z) = int t^(p+1)/(z-t) dmu(t),
// which stays finite for tail index alpha > p even when the (p+1)-th moment
// diverges, and costs no cancellation at large |z|.
#pragma once

#include <functional>
#include <vector>

#include "freetail/measure.hpp"

namespace freetail {

// evaluation cone |Re z| < eta Im z together with |z| > radius
struct ConeRegion {
    double eta = 1.0;
    double radius = 4.0;

    bool contains(cplx z) const;
    // radius 4 (1 + m1 + sqrt(m2)); throws moment_diverges when mu has no
    // second moment, in which case pick an explicit cone instead
    static ConeRegion for_measure(const Measure& mu, double eta = 1.0);
};

// Cauchy transform evaluator on the upper half plane; the common currency
// between the transform, inversion, and convolution layers.
using CauchyEval = std::function<cplx(cplx)>;

cplx cauchy(const Measure& mu, cplx z);            // Im z > 0
cplx reciprocal_cauchy(const Measure& mu, cplx z); // F = 1/G

// Solve h(z) = w for the branch of h^{-1} that is the identity far above the
// real axis. h must map C+ into C+ with h(z) = z + o(z) high up, which covers
// both F and F^{-1} = z + phi. Plain Newton from z = w can land on a spurious
// preimage (h is many-to-one low in the half plane), so the solve continues
// vertically from w + iT with T large, where the equation is well posed,
// halving T toward zero with warm starts and locally capped steps. A caller
// supplied warm start is tried first and is only trusted when its residual is
// already small, so marching along a grid row reuses the previous solution
// while a jump to a distant target falls back to the full descent. tol is
// absolute: the result z satisfies |h(z) - w| <= tol.
cplx invert_nevanlinna(const std::function<cplx(cplx)>& h,
                       const std::function<cplx(cplx)>& hp, cplx w, double tol,
                       const cplx* warm = nullptr);

// F^{-1}(w) by the continuation above, |F(z) - w| <= rel_tol |w|
cplx invert_reciprocal(const Measure& mu, cplx w, double rel_tol = 1e-10);

// phi(z) = F^{-1}(z) - z
cplx voiculescu(const Measure& mu, cplx z, double rel_tol = 1e-10);

// C(z) = z phi(1/z) on the lower half plane chart
cplx free_cumulant_transform(const Measure& mu, cplx z, double rel_tol = 1e-10);

// r_G(z) = z^(p+1) (G(z) - sum_{j=1}^{p+1} m_{j-1} z^-j), p >= 0
cplx remainder_cauchy(const Measure& mu, int p, cplx z);

// r_phi(z) = z^(p-1) (phi(z) - sum_{j=0}^{p-1} kappa_{j+1} z^-j), p >= 0
// (the p = 0 sum is empty, leaving phi(z) / z);
// formed with a tight inversion tolerance so the subtraction keeps enough
// digits at cone heights around 1e3
cplx remainder_voiculescu(const Measure& mu, int p, cplx z, double rel_tol = 1e-13);

// m_0..m_p read off a circular contour |z| = radius by the midpoint rule,
// m_j = (1/pi) int_0^pi Re(z^(j+1) G(z)) dtheta. The integrand is analytic
// and periodic, so the rule converges geometrically: with the support inside
// the contour the values are exact to roundoff, which the moment identities
// downstream rely on. The caller must pick radius beyond the support; m_0
// near 1 is the cheap check that it did.
std::vector<double> contour_moments(const CauchyEval& g, int p,
                                    double radius = 16.0, int nodes = 256);

// m_1..m_p as a vector (throws moment_diverges like Measure::moment)
std::vector<double> moment_sequence(const Measure& mu, int p);

// free cumulants kappa_1..kappa_p from moments m_1..m_p and back, through
// the non-crossing partition recursion M = 1 + sum_s kappa_s x^s M^s;
// capped at order 12
std::vector<double> moments_to_free_cumulants(const std::vector<double>& m);
std::vector<double> free_cumulants_to_moments(const std::vector<double>& k);

} // namespace freetail
