#include "freetail/rmt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "freetail/errors.hpp"
#include "freetail/rng.hpp"

namespace freetail {

namespace {

// splitmix64 finalizer; spreads (seed, trial) pairs into well separated
// engine seeds so neighbouring base seeds do not share trial streams
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Measure sample_product_spectrum(const RmtConfig& config, std::size_t* clipped) {
    require(config.n >= 1 && config.m >= 1, errc::domain_error, "need n >= 1 and m >= 1");
    require(config.n <= 2000 && config.m <= 2000, errc::domain_error,
            "n and m are capped at 2000; grow the pool with trials instead");
    require(config.trials >= 1, errc::domain_error, "need at least one trial");
    require(config.rho.mass() > 0.0, errc::domain_error, "rho has no mass to sample");
    require(config.rho.min_support() >= 0.0, errc::not_nonneg,
            "rho must live on [0, inf) so Y^(1/2) exists");

    const Eigen::Index n = Eigen::Index(config.n);
    const Eigen::Index m = Eigen::Index(config.m);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    std::size_t clip_count = 0;

    std::vector<double> pool;
    pool.reserve(config.n * config.trials);

    Eigen::MatrixXcd x(m, n);
    Eigen::VectorXd rt(n);
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
        Rng rng(mix(config.seed + trial));

        // draw order (Y, then X column-major) is part of the reproducibility
        // contract; reordering it would silently change every seeded run
        std::vector<double> y = config.rho.draws(rng, config.n);
        for (Eigen::Index col = 0; col < n; ++col)
            for (Eigen::Index row = 0; row < m; ++row) {
                double re = rng.gaussian() * inv_rt2;
                double im = rng.gaussian() * inv_rt2;
                x(row, col) = cplx(re, im);
            }
        for (Eigen::Index i = 0; i < n; ++i) rt[i] = std::sqrt(y[std::size_t(i)]);

        Eigen::MatrixXcd w = (x.adjoint() * x) / double(config.m);
        Eigen::MatrixXcd a = rt.asDiagonal() * w * rt.asDiagonal();

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            fail(errc::eig_failure, "eigensolver failed in trial " + std::to_string(trial));

        for (Eigen::Index i = 0; i < n; ++i) {
            double ev = es.eigenvalues()[i];
            if (ev < -1e-10)
                fail(errc::eig_failure,
                     "eigenvalue " + std::to_string(ev) + " below -1e-10 in trial " +
                         std::to_string(trial));
            if (ev < 0.0) {
                ev = 0.0;
                ++clip_count;
            }
            pool.push_back(ev);
        }
    }

    if (clipped) *clipped = clip_count;
    return Measure::empirical(std::move(pool), Support::nonneg, 1.0);
}

TheoryComparison compare_to_theory(const Measure& sample, const Measure& theory) {
    const std::vector<double>& xs = sample.sample();
    require(!xs.empty(), errc::domain_error, "sample has no empirical part");
    const double tm = theory.mass();
    require(tm > 0.0, errc::domain_error, "theory has no mass");

    TheoryComparison out;

    // exact two sided KS: compare the step CDF against the theory CDF and
    // its left limit at every distinct sample value. The left limit is taken
    // one ulp below the point, which is exact for atoms and sample ties and
    // a rounding error for continuous parts.
    const double n = double(xs.size());
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        double f = theory.cdf(xs[i]) / tm;
        double fl = theory.cdf(std::nextafter(xs[i], -std::numeric_limits<double>::infinity())) / tm;
        out.ks = std::max(out.ks, std::abs(f - double(j) / n));
        out.ks = std::max(out.ks, std::abs(fl - double(i) / n));
        i = j;
    }

    // tail window: 5% tail quantile out to the 30th largest point, so every
    // row keeps at least 30 points above it. Skipped when the window is
    // degenerate (light tails pile those quantiles onto one spot).
    if (xs.size() >= 40) {
        std::size_t lo_back = std::max<std::size_t>(xs.size() / 20, 31);
        double lo = xs[xs.size() - lo_back];
        double hi = xs[xs.size() - 31];
        if (lo > 0.0 && hi > lo * (1.0 + 1e-9)) {
            const int cells = 24;
            std::vector<double> grid;
            grid.reserve(cells + 1);
            for (int k = 0; k <= cells; ++k)
                grid.push_back(lo * std::pow(hi / lo, double(k) / cells));
            try {
                out.tail = tail_ratio(sample, theory, grid);
            } catch (const Error& e) {
                if (e.code() != errc::tail_vanishes) throw;
            }
        }
    }
    return out;
}

} // namespace freetail
