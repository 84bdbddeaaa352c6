// Tail diagnostics: power law index estimation, tail comparison between
// measures, and the remainder asymptotics check that ties tail decay to
// the Laurent remainders of G and phi along the imaginary axis.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "freetail/measure.hpp"

namespace freetail {

// Shared output of estimate_tail_index and tail_ratio. x and tail hold the
// grid rows actually used (positive x, tail above the floor). Index fits
// fill index, band (95 percent, from the regression residuals) and the
// half-open window [window_begin, window_end) of rows the fit used; hill
// is added when the measure carries an empirical sample. Ratios fill
// ratio = tail_a / tail_b pointwise, terminal = its mean over the last
// half decade, and reuse the window fields for the rows that average
// covered.
struct TailReport {
    std::vector<double> x;
    std::vector<double> tail;
    std::vector<double> ratio;
    double index = 0.0;
    double band = 0.0;
    std::size_t window_begin = 0;
    std::size_t window_end = 0;
    double terminal = 0.0;
    std::optional<double> hill;
};

// Least squares slope of log tail against log x, fitted over the widest
// contiguous run of rows whose local slopes keep variance below 0.01 and
// which spans at least one decade. Rows where the tail has collapsed to
// zero are dropped first (they form a suffix, tails are monotone).
// Throws window_too_short when the grid has fewer than 10 usable rows or
// no qualifying window exists, tail_vanishes when the tail is gone on
// most of the grid.
TailReport estimate_tail_index(const Measure& mu, const std::vector<double>& x);

// Hill estimator for an empirical sample: the median over k in
// [n^0.45, n^0.65] of the classical k-upper-order-statistics estimate.
// Needs at least 50 sample points and a positive upper tail.
double hill_index(const Measure& sample);

// Pointwise tail_a(x, inf) / tail_b(x, inf). Rows where either tail falls
// below 1e-12 are dropped; fewer than two surviving rows is tail_vanishes.
TailReport tail_ratio(const Measure& a, const Measure& b, const std::vector<double>& x);

// Settings for check_remainder_asymptotics. p is the moment class the
// measure lives in, alpha the tail index with p <= alpha <= p + 1, beta
// in (0, 1/2) fixes the envelope exponents reported in the boundary case
// alpha = p + 1, and y the evaluation heights (positive, increasing).
struct RemainderCheckConfig {
    int p = 0;
    double alpha = 1.0;
    double beta = 0.25;
    std::vector<double> y;
};

// Remainder-to-tail ratio series. im_g / re_g are the parts of
// r_G(iy) / (y^p mu(y, inf)), im_phi / re_phi the same for r_phi.
// im_constant / re_constant are the limits these ratios approach:
//
//   Im: -(alpha pi / 2) / cos(pi (alpha - p) / 2)   for alpha in [p, p+1)
//   Re: -(alpha pi / 2) / sin(pi (alpha - p) / 2)   for alpha in (p, p+1]
//
// with Re -> -1 in the alpha = p = 0 case. Where the ratio instead grows
// like log y (Im at alpha = p + 1, Re at alpha = p > 0) the constant is
// NaN. boundary marks alpha = p + 1; there window_lo = |Im r_G(iy)| y and
// window_hi = |Im r_G(iy)| y^(1 - beta/2) trace the envelope sandwich
// (lo grows, hi decays). im_terminal / re_terminal average the G-ratios
// over the last half decade of y.
struct RemainderReport {
    std::vector<double> y;
    std::vector<double> im_g, re_g;
    std::vector<double> im_phi, re_phi;
    double im_constant = 0.0;
    double re_constant = 0.0;
    bool boundary = false;
    double im_terminal = 0.0;
    double re_terminal = 0.0;
    std::vector<double> window_lo, window_hi;
};

RemainderReport check_remainder_asymptotics(const Measure& mu, const RemainderCheckConfig& cfg);

// Moment class of a measure. p is the largest order with a finite absolute
// moment, p_infinite true for compact support (grids, atoms, samples).
// alpha carries the power tail index when one is attached; boundary marks
// integer alpha, where alpha = p + 1 exactly.
struct MpClass {
    int p = 0;
    bool p_infinite = false;
    std::optional<double> alpha;
    bool boundary = false;
};

MpClass classify_mp(const Measure& mu);

} // namespace freetail
