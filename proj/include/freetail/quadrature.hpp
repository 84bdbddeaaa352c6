// Complex-valued adaptive quadrature. Everything downstream (Cauchy
// transforms of tail components, Levy integrals) funnels through these two
// entry points, so tolerances here set the noise floor for the whole library.
#pragma once

#include <complex>
#include <functional>

namespace freetail {

using cplx = std::complex<double>;

// Single Gauss-Kronrod 7/15 panel. Exposed for tests; library code should
// call integrate().
struct PanelResult {
    cplx value;
    double error;
};
PanelResult gk15_panel(const std::function<cplx(double)>& f, double a, double b);

// Globally adaptive integral of f over [a, b]. Throws errc::no_convergence
// if the interval budget is exhausted before reaching
//   total_error <= max(abs_tol, rel_tol * |value|).
cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               double rel_tol = 1e-12, double abs_tol = 0.0);

// Integral of f over [a, inf) for integrands decaying at least like a power.
// Works in dyadic blocks [a 2^k, a 2^(k+1)]; stops once several consecutive
// blocks are negligible against the running sum. Requires a > 0.
cplx integrate_tail(const std::function<cplx(double)>& f, double a,
                    double rel_tol = 1e-12);

} // namespace freetail
