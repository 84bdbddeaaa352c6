// Free Levy-Khintchine representations and the free regular subclass.
//
// A freely infinitely divisible law is carried here in two equivalent
// parametrizations:
//
//   FreeLK        (gamma, sigma):  phi(z) = gamma + int (1 + t z)/(z - t) dsigma(t)
//   FreeRegularRep (eta', nu):     C(z)   = eta' z + int (1/(1 - z t) - 1) dnu(t)
//
// with dsigma = t^2/(1+t^2) dnu and gamma = eta' + int t/(1+t^2) dnu. The
// reduced (eta', nu) form exists exactly for the free regular laws: no
// semicircular part, eta' >= 0, and nu a Levy measure concentrated on
// (0, inf). Conversions between the two stay exact on atoms and on power
// tails through the weighted ParetoTail variants; grid parts are reweighted
// pointwise after one midpoint refinement.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "freetail/measure.hpp"

namespace freetail {

class Rng;

struct FreeLK {
    double gamma = 0.0;
    Measure sigma;

    // phi(z) = gamma - m0(sigma) z + (1 + z^2) G_sigma(z) on Im z > 0;
    // the rational split of the integrand keeps this exact for the cell
    // and tail closed forms
    cplx phi(cplx z) const;
    cplx phi_derivative(cplx z) const;
    // same value, but cross-checked against direct quadrature of the
    // defining integral to 1e-9 relative; throws no_convergence on drift
    cplx phi_checked(cplx z) const;

    // kappa_1 = gamma + m1(sigma), kappa_p = m_{p-2}(sigma) + m_p(sigma)
    double free_cumulant(int p) const;
};

struct FreeRegularRep {
    double eta_prime = 0.0;
    Measure nu;

    // gates: eta' >= 0 (negative_drift), nu concentrated on (0, inf) with
    // no atom at zero (not_levy_measure)
    static FreeRegularRep from_levy(double eta_prime, Measure nu);

    // inverse conversion; gamma >= m_{-1}(sigma) is exactly free
    // regularity, anything else throws not_free_regular
    static FreeRegularRep from_sigma(double gamma, const Measure& sigma);

    // the drift-free choice gamma = m_{-1}(sigma)
    static FreeRegularRep from_sigma_auto(const Measure& sigma);

    FreeLK to_lk() const;

    // C(z) on the Im z < 0 chart
    cplx cumulant_transform(cplx z) const;

    // kappa_1 = eta' + m1(nu), kappa_p = m_p(nu) for p >= 2
    double free_cumulant(int p) const;
};

// pi(rate, jump): free compound Poisson, eta' = 0 and nu = rate * jump;
// jump is normalized to a probability law first. pi(1, delta_1) is the
// Marchenko-Pastur law.
FreeRegularRep compound_free_poisson(double rate, const Measure& jump);

// classical to free correspondence on Levy triples; a gaussian part has no
// free regular image (its image is semicircular), so a != 0 throws
FreeRegularRep bercovici_pata(double gaussian_part, double eta_prime, Measure nu);

// n draws of sum_{i<=N} X_i with N ~ Poisson(rate), X_i ~ jump i.i.d.
std::vector<double> classical_compound_poisson_sample(double rate, const Measure& jump,
                                                      std::size_t n, Rng& rng);

// phi of the strictly free stable law: phi(z) = -exp(i pi alpha rho) z^(1-alpha)
// (principal branch). alpha = 2, rho = 1/2 is the semicircle phi(z) = 1/z.
std::function<cplx(cplx)> free_stable_phi(double alpha, double rho);

} // namespace freetail
