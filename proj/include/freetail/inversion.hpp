#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "freetail/measure.hpp"

// Stieltjes inversion: rebuild a Measure from an evaluator of its Cauchy
// transform on the upper half plane, or from an evaluator of its Voiculescu
// transform.
//
// The density comes from G on the three-step ladder of heights eps, with the
// Richardson weights (1/3, -2, 8/3) on (eps, eps/2, eps/4). The weights kill
// the eps and eps^2 terms of the boundary expansion, so wherever the density
// is smooth the error is O(eps^3); near kinks and jumps the combination can
// ring slightly negative, which is what the clip accounting below measures.
// On nonneg support the evaluation is edge reflected, g(x) + g(-x), so the
// mass a density edge at the origin smears across 0 is folded back onto the
// grid instead of being lost; symmetric support needs no correction because
// the two sided smearing balances at the origin by itself.
//
// Atoms show up as Lorentzian spikes whose height scales like 1/eps. They
// are found in two stages: coarse-row local maxima seed candidates (the
// widest kernel tolerates knots missing the atom by the grid pitch), the
// peak is then localized off grid and the ladder ratio is evaluated right
// at it. A point mass gives the full ladder ratio 4 there, while even an
// integrable x^(-1/2) edge stays near 2, so 2.4 separates the two. The
// weight is read off from eps * Im G extrapolated linearly in eps, and the
// atom's ladder response is subtracted from the density before composing
// the result. Small atoms buried under an O(1) ambient density are not
// resolved; the mass floor documents the intended detection scale.

namespace freetail {

struct InversionConfig {
    std::vector<double> grid;                    // strictly increasing knots
    std::array<double, 3> ladder{1e-2, 5e-3, 2.5e-3};
    Support support = Support::nonneg;           // symmetric: grid on x >= 0,
                                                 // result folded to |X|
    double expected_mass = 1.0;                  // 0 disables the deficit gate
    double mass_floor = 0.99;                    // gate: mass >= floor * expected
    double clip_tol = 1e-4;                      // max clipped negative mass
    bool detect_atoms = true;
    double atom_mass_floor = 0.01;
    bool fit_tail = false;                       // power fit on the last decade
    double slope_var_tol = 0.01;                 // max variance of the fitted slope
    double phi_rel_tol = 1e-12;                  // Newton tolerance on the phi route

    static InversionConfig linear(double lo, double hi, std::size_t cells);
    static InversionConfig logarithmic(double lo, double hi, std::size_t cells);
};

// Recover a measure from g ~ its Cauchy transform. g is called row by row,
// one ladder height at a time with the real part ascending, so evaluators
// with internal warm starts see neighboring arguments in sequence.
//
// Fails with negative_density when more than clip_tol of mass had to be
// clipped away outside atom windows, mass_deficit when the recovered mass
// falls short of mass_floor * expected_mass, window_too_short when a tail fit
// was requested but the last decade does not determine a slope, and
// tail_vanishes when the fitted slope has no power tail in it.
Measure stieltjes_invert(const std::function<cplx(cplx)>& g,
                         const InversionConfig& cfg);

// G(w) for the measure whose Voiculescu transform is phi: solves
// z + phi(z) = w along the identity branch and returns 1/z. warm, when
// given, seeds the solve from a neighboring solution.
cplx cauchy_from_phi(const std::function<cplx(cplx)>& phi,
                     const std::function<cplx(cplx)>& phi_derivative, cplx w,
                     double rel_tol = 1e-12, const cplx* warm = nullptr);

// stieltjes_invert on the Cauchy transform induced by phi, with warm starts
// carried along each grid row.
Measure invert_from_phi(const std::function<cplx(cplx)>& phi,
                        const std::function<cplx(cplx)>& phi_derivative,
                        const InversionConfig& cfg);

} // namespace freetail
