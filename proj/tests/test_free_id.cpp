#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "freetail/errors.hpp"
#include "freetail/free_id.hpp"
#include "freetail/measure.hpp"
#include "freetail/rng.hpp"

using namespace freetail;

namespace {

double cdist(cplx a, cplx b) { return std::abs(a - b); }

} // namespace

TEST_SUITE("free_id") {

TEST_CASE("free poisson with unit jump is Marchenko-Pastur") {
    FreeRegularRep rep = compound_free_poisson(1.0, Measure::point_mass(1.0));
    CHECK(rep.eta_prime == 0.0);
    CHECK(rep.nu.mass() == doctest::Approx(1.0).epsilon(1e-14));

    FreeLK lk = rep.to_lk();
    CHECK(lk.gamma == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lk.sigma.mass() == doctest::Approx(0.5).epsilon(1e-13));

    // phi(z) = z / (z - 1) and C(z) = z / (1 - z), both exactly
    for (cplx z : {cplx{2.0, 1.0}, cplx{0.5, 3.0}, cplx{-1.0, 0.4}}) {
        CAPTURE(z.real());
        cplx want = z / (z - 1.0);
        CHECK(cdist(lk.phi(z), want) < 1e-12 * std::abs(want));
        CHECK(cdist(lk.phi_checked(z), want) < 1e-12 * std::abs(want));
        cplx dwant = -1.0 / ((z - 1.0) * (z - 1.0));
        CHECK(cdist(lk.phi_derivative(z), dwant) < 1e-10 * std::abs(dwant));
    }
    const cplx zc{0.3, -0.2};
    CHECK(cdist(rep.cumulant_transform(zc), zc / (1.0 - zc)) < 1e-12);

    for (int p = 1; p <= 8; ++p) {
        CHECK(rep.free_cumulant(p) == doctest::Approx(1.0).epsilon(1e-12));
        if (p <= 6)
            CHECK(lk.free_cumulant(p) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pareto sigma with automatic drift") {
    Measure sigma = Measure::pareto(1.5, 1.0, 1.0);
    FreeRegularRep rep = FreeRegularRep::from_sigma_auto(sigma);
    CHECK(rep.eta_prime == 0.0);

    // m_{-1} of the plain tail is alpha c / (alpha + 1) = 0.6
    REQUIRE(rep.nu.has_tail());
    const ParetoTail& nt = *rep.nu.power_tail();
    CHECK(nt.weight == ParetoTail::Weight::levy_of_sigma);
    CHECK(nt.alpha == doctest::Approx(1.5));
    CHECK(nt.x0 == doctest::Approx(1.0));
    CHECK(nt.c == doctest::Approx(1.0));

    FreeLK lk = rep.to_lk();
    CHECK(lk.gamma == doctest::Approx(0.6).epsilon(1e-10));
    REQUIRE(lk.sigma.has_tail());
    const ParetoTail& st = *lk.sigma.power_tail();
    CHECK(st.weight == ParetoTail::Weight::plain);
    CHECK(st.alpha == doctest::Approx(1.5));
    CHECK(st.c == doctest::Approx(1.0));
    // exact round trip of the tail mass
    CHECK(lk.sigma.tail(2.0) == doctest::Approx(sigma.tail(2.0)).epsilon(1e-13));

    CHECK_NOTHROW(lk.phi_checked({0.0, 2.0}));
    CHECK_NOTHROW(lk.phi_checked({1.0, 1.5}));
}

TEST_CASE("phi cross-check on composite and symmetric sigma") {
    Measure sigma = Measure::compose({{2.0, 0.3}}, {0.5, 1.0, 1.5},
                                     {0.2, 0.4, 0.1}, ParetoTail{1.5, 2.5, 0.4},
                                     {}, 0.0, Support::nonneg);
    FreeLK lk{0.7, sigma};
    for (cplx z : {cplx{0.0, 2.0}, cplx{1.0, 1.5}, cplx{-0.5, 0.8}}) {
        CAPTURE(z.real());
        CHECK(cdist(lk.phi_checked(z), lk.phi(z)) == 0.0);
    }

    FreeLK sym{0.3, Measure::semicircle(1.0).scaled(0.5)};
    CHECK_NOTHROW(sym.phi_checked({0.0, 1.2}));
    CHECK_NOTHROW(sym.phi_checked({0.5, 2.0}));

    CHECK_THROWS_AS(lk.phi({0.0, -1.0}), Error);
}

TEST_CASE("free regularity gates") {
    // uniform density on [0, 2]: freely infinitely divisible as a sigma,
    // but m_{-1} = inf means the drift part is -inf
    Measure uniform = Measure::gridded({0.0, 2.0}, {0.5, 0.5});
    try {
        FreeRegularRep::from_sigma(1.0, uniform);
        FAIL("expected not_free_regular");
    } catch (const Error& e) {
        CHECK(e.code() == errc::not_free_regular);
    }

    // gamma below m_{-1}(sigma) = 0.6
    try {
        FreeRegularRep::from_sigma(0.5, Measure::pareto(1.5, 1.0, 1.0));
        FAIL("expected not_free_regular");
    } catch (const Error& e) {
        CHECK(e.code() == errc::not_free_regular);
    }

    // sigma mass at the origin is a free Cauchy component
    try {
        FreeRegularRep::from_sigma(1.0, Measure::atomic({{0.0, 0.3}, {1.0, 0.7}}));
        FAIL("expected not_free_regular");
    } catch (const Error& e) {
        CHECK(e.code() == errc::not_free_regular);
    }

    // grid touching zero with vanishing density: free regular, but the levy
    // density ~ 1/t^2 cannot be materialized on a linear grid
    try {
        FreeRegularRep::from_sigma(2.0, Measure::gridded({0.0, 1.0}, {0.0, 1.0}));
        FAIL("expected moment_diverges");
    } catch (const Error& e) {
        CHECK(e.code() == errc::moment_diverges);
    }

    try {
        FreeRegularRep::from_levy(-0.1, Measure::point_mass(1.0));
        FAIL("expected negative_drift");
    } catch (const Error& e) {
        CHECK(e.code() == errc::negative_drift);
    }

    try {
        FreeRegularRep::from_levy(0.0, Measure::atomic({{0.0, 0.5}, {1.0, 0.5}}));
        FAIL("expected not_levy_measure");
    } catch (const Error& e) {
        CHECK(e.code() == errc::not_levy_measure);
    }

    try {
        FreeRegularRep::from_levy(0.0, Measure::semicircle(1.0));
        FAIL("expected not_levy_measure");
    } catch (const Error& e) {
        CHECK(e.code() == errc::not_levy_measure);
    }

    try {
        bercovici_pata(0.5, 0.0, Measure::point_mass(1.0));
        FAIL("expected gaussian_part_present");
    } catch (const Error& e) {
        CHECK(e.code() == errc::gaussian_part_present);
    }
    FreeRegularRep ok = bercovici_pata(0.0, 0.2, Measure::point_mass(1.0));
    CHECK(ok.eta_prime == doctest::Approx(0.2));
}

TEST_CASE("cumulant identity links the two parametrizations") {
    // kappa_p(mu) = m_p(nu) = m_{p-2}(sigma) + m_p(sigma)
    FreeRegularRep rep = compound_free_poisson(1.0, Measure::pareto(2.5, 1.0, 1.0));
    FreeLK lk = rep.to_lk();
    CHECK(rep.free_cumulant(1) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(lk.free_cumulant(1) == doctest::Approx(5.0 / 3.0).epsilon(1e-9));
    CHECK(rep.free_cumulant(2) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(lk.free_cumulant(2) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK_THROWS_AS(rep.free_cumulant(3), Error);
    CHECK_THROWS_AS(lk.free_cumulant(3), Error);

    // C(z) = z phi(1/z) across the two charts
    for (cplx z : {cplx{0.3, -0.4}, cplx{-0.2, -0.1}}) {
        CAPTURE(z.real());
        cplx via_phi = z * lk.phi(1.0 / z);
        CHECK(cdist(rep.cumulant_transform(z), via_phi) <
              1e-9 * std::max(1.0, std::abs(via_phi)));
    }

    // jump normalization folds the total mass into the rate
    FreeRegularRep scaled = compound_free_poisson(2.0, Measure::point_mass(1.0).scaled(3.0));
    CHECK(scaled.nu.mass() == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("classical compound poisson sampler") {
    Measure jump = Measure::point_mass(1.0);
    Rng a(11), b(11);
    std::vector<double> xs = classical_compound_poisson_sample(1.0, jump, 20000, a);
    std::vector<double> ys = classical_compound_poisson_sample(1.0, jump, 20000, b);
    CHECK(xs == ys);

    double mean = 0.0;
    std::size_t zeros = 0;
    for (double x : xs) {
        mean += x;
        if (x == 0.0) ++zeros;
        CHECK(x == std::floor(x)); // unit jumps give integer sums
    }
    mean /= static_cast<double>(xs.size());
    CHECK(std::abs(mean - 1.0) < 0.04);
    CHECK(std::abs(static_cast<double>(zeros) / static_cast<double>(xs.size()) -
                   std::exp(-1.0)) < 0.02);
}

TEST_CASE("free stable phi closed forms") {
    auto semi = free_stable_phi(2.0, 0.5);
    for (cplx z : {cplx{0.0, 2.0}, cplx{1.0, 1.0}})
        CHECK(cdist(semi(z), 1.0 / z) < 1e-12);

    auto half = free_stable_phi(0.5, 1.0);
    const cplx zi{0.0, 1.0};
    // -i sqrt(i) = exp(-i pi / 4)
    CHECK(cdist(half(zi), std::polar(1.0, -M_PI / 4.0)) < 1e-12);
    CHECK(half(zi).imag() <= 0.0);

    CHECK_THROWS_AS(free_stable_phi(2.5, 0.5), Error);
    CHECK_THROWS_AS(free_stable_phi(0.5, -0.1), Error);
    CHECK_THROWS_AS(half({0.0, -1.0}), Error);
}

} // TEST_SUITE
