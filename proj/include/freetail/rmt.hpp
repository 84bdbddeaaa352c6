// Monte Carlo harness for sample covariance products. One trial draws an
// M x N matrix X with i.i.d. standard complex Gaussian entries (E|X_ij|^2
// = 1), forms W = X^* X / M, an independent diagonal Y of draws from rho,
// and takes the spectrum of Y^(1/2) W Y^(1/2). That matrix is similar to
// W Y, so its eigenvalues are the product spectrum, but the symmetrized
// form is Hermitian and positive and keeps the solver in the self adjoint
// path. Pooled across trials the cloud approximates mp boxtimes rho once
// N / M is near 1; a diagonal Y is enough because the Gaussian ensemble is
// unitarily invariant, so conjugating Y into general position changes
// nothing in distribution.
#pragma once

#include <cstdint>
#include <optional>

#include "freetail/measure.hpp"
#include "freetail/tails.hpp"

namespace freetail {

struct RmtConfig {
    std::size_t n = 500;      // dimension of W; hard cap 2000, see below
    std::size_t m = 500;      // samples per trial, N / M -> lambda
    std::size_t trials = 50;
    Measure rho;              // population law, nonnegative support, mass > 0
    std::uint64_t seed = 1;
};

// Pooled eigenvalue cloud over all trials, as an empirical Measure of mass
// one with N * trials points. Each trial runs on its own Rng seeded from
// (config.seed, trial index), so the pool is reproducible and independent
// of any future reordering or farming out of trials. Eigenvalues in
// [-1e-10, 0) are rounding debris from the positive product and are
// clipped to zero; pass `clipped` to get their count. Anything below
// -1e-10, or a solver breakdown, throws eig_failure naming the trial.
//
// N and M are capped at 2000: one trial is already ~minutes of dense
// eigensolver time there, and pooling trials is the intended way to grow
// the cloud, not inflating the dimension.
Measure sample_product_spectrum(const RmtConfig& config, std::size_t* clipped = nullptr);

// Empirical cloud against a reference law. `ks` is the exact
// Kolmogorov-Smirnov distance between the sample's step CDF and the
// normalized theory CDF, computed over the sample part of `sample` only
// and correct in the presence of ties and theory atoms. `tail` compares
// the two upper tails on the sample's resolvable tail window, from the
// 5% tail quantile out to the 30th largest point; it is left empty when
// that window is degenerate or either tail has already died there, which
// is the normal outcome for a compactly supported theory.
struct TheoryComparison {
    double ks = 0.0;
    std::optional<TailReport> tail;
};

TheoryComparison compare_to_theory(const Measure& sample, const Measure& theory);

} // namespace freetail
