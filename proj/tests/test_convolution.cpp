#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "doctest.h"
#include "freetail/convolution.hpp"
#include "freetail/errors.hpp"
#include "freetail/free_id.hpp"
#include "freetail/inversion.hpp"
#include "freetail/measure.hpp"
#include "freetail/transforms.hpp"

using namespace freetail;

namespace {

double l1_against(const Measure& m, const std::function<double(double)>& ref,
                  double lo, double hi) {
    const std::vector<double>& k = m.knots();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        if (k[i] < lo || k[i + 1] > hi) continue;
        const double a = std::abs(m.density(k[i]) - ref(k[i]));
        const double b = std::abs(m.density(k[i + 1]) - ref(k[i + 1]));
        acc += 0.5 * (a + b) * (k[i + 1] - k[i]);
    }
    return acc;
}

bool code_is(const Error& e, errc c) { return e.code() == c; }

// arcsine law on [-2, 2]; the factored square root keeps Im G < 0 upstairs
cplx arcsine_cauchy(cplx z) {
    return 1.0 / (std::sqrt(z - 2.0) * std::sqrt(z + 2.0));
}

// a spread of cone points plus rows grazing the support, where the
// subordination solver earns its keep
std::vector<cplx> test_points() {
    std::vector<cplx> pts;
    for (double y : {2.0, 5.0, 9.0, 40.0, 150.0})
        for (double t : {-0.7, 0.0, 0.6}) pts.push_back(cplx(t * y, y));
    for (double x : {-2.4, -0.3, 0.0, 1.1, 2.0, 2.44}) pts.push_back(cplx(x, 0.05));
    for (double x : {0.0, 1.0, 2.0, 2.4, 2.45, 2.5}) pts.push_back(cplx(x, 2.5e-3));
    return pts;
}

} // namespace

TEST_SUITE("convolution") {

TEST_CASE("semicircle variances add under the additive convolution") {
    auto g1 = [](cplx z) { return semicircle_cauchy(z, 1.0); };
    auto g2 = [](cplx z) { return semicircle_cauchy(z, 0.5); };
    for (cplx z : test_points()) {
        CAPTURE(z.real());
        CAPTURE(z.imag());
        const cplx got = free_add_cauchy(g1, g2, z);
        const cplx want = semicircle_cauchy(z, 1.5);
        CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
    }
}

TEST_CASE("free Bernoulli pair gives the arcsine law") {
    auto gb = [](cplx z) { return 0.5 / (z + 1.0) + 0.5 / (z - 1.0); };
    for (cplx z : test_points()) {
        CAPTURE(z.real());
        CAPTURE(z.imag());
        const cplx got = free_add_cauchy(gb, gb, z);
        const cplx want = arcsine_cauchy(z);
        CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
    }
}

TEST_CASE("additive subordination pair satisfies both defining identities") {
    Measure sc = Measure::semicircle(1.0, 300);
    Measure mp = Measure::marchenko_pastur(800);
    auto g1 = [&](cplx w) { return sc.cauchy(w); };
    auto g2 = [&](cplx w) { return mp.cauchy(w); };
    for (cplx z : {cplx(0.5, 0.05), cplx(-1.0, 0.01), cplx(2.0, 1.0),
                   cplx(3.0, 2.5e-3)}) {
        CAPTURE(z.real());
        CAPTURE(z.imag());
        const SubordinationPair s = subordination_add(g1, g2, z);
        const cplx f1 = 1.0 / g1(s.omega1);
        const cplx f2 = 1.0 / g2(s.omega2);
        const double scale = 1.0 + std::abs(z);
        CHECK(std::abs(f1 - f2) <= 1e-9 * scale);
        CHECK(std::abs(s.omega1 + s.omega2 - z - f1) <= 1e-10 * scale);
    }
}

TEST_CASE("multiplicative subordination pair in the reciprocal chart") {
    Measure mp = Measure::marchenko_pastur(800);
    Measure u = Measure::gridded({0.5, 1.5}, {1.0, 1.0});
    auto g1 = [&](cplx w) { return mp.cauchy(w); };
    auto g2 = [&](cplx w) { return u.cauchy(w); };
    auto eta = [](const std::function<cplx(cplx)>& g, cplx zeta) {
        const cplx psi = g(1.0 / zeta) / zeta - 1.0;
        return psi / (psi + 1.0);
    };
    for (cplx z : {cplx(0.5, 0.05), cplx(2.0, 0.01), cplx(5.0, 2.5e-3)}) {
        CAPTURE(z.real());
        CAPTURE(z.imag());
        const SubordinationPair s = subordination_multiply(g1, g2, z);
        const cplx zeta = 1.0 / z;
        const cplx e1 = eta(g1, s.omega1);
        const cplx e2 = eta(g2, s.omega2);
        CHECK(std::abs(e1 - e2) <= 1e-9);
        CHECK(std::abs(s.omega1 * s.omega2 - zeta * e1) <= 1e-10 * std::abs(zeta));
    }
}

TEST_CASE("subordination identities across the cone") {
    // closed form factors keep a hundred point sweep cheap
    auto gsc = [](cplx w) { return semicircle_cauchy(w, 1.0); };
    auto gmp = [](cplx w) { return mp_cauchy(w); };
    auto gd2 = [](cplx w) { return 1.0 / (w - 2.0); };
    auto eta = [](const std::function<cplx(cplx)>& g, cplx zeta) {
        const cplx psi = g(1.0 / zeta) / zeta - 1.0;
        return psi / (psi + 1.0);
    };
    for (double y : {3.0, 7.0, 15.0, 33.0, 70.0, 150.0, 330.0, 700.0, 1.5e3, 3e3}) {
        for (double t : {-0.9, -0.7, -0.45, -0.2, 0.0, 0.2, 0.45, 0.6, 0.75, 0.9}) {
            const cplx z(t * y, y);
            CAPTURE(z.real());
            CAPTURE(z.imag());

            const SubordinationPair a = subordination_add(gsc, gmp, z);
            const double scale = 1.0 + std::abs(z);
            CHECK(std::abs(1.0 / gsc(a.omega1) - 1.0 / gmp(a.omega2)) <= 1e-9 * scale);
            CHECK(std::abs(a.omega1 + a.omega2 - z - 1.0 / gsc(a.omega1)) <= 1e-10 * scale);

            const SubordinationPair m = subordination_multiply(gmp, gd2, z);
            const cplx zeta = 1.0 / z;
            CHECK(std::abs(eta(gmp, m.omega1) - eta(gd2, m.omega2)) <= 1e-9);
            CHECK(std::abs(m.omega1 * m.omega2 - zeta * eta(gmp, m.omega1)) <=
                  1e-10 * std::abs(zeta));
        }
    }
}

TEST_CASE("voiculescu transforms add at cone points") {
    Measure sc = Measure::semicircle(1.0, 300);
    Measure sc2 = Measure::semicircle(0.5, 300);
    Measure bern = Measure::atomic({{-1.0, 0.5}, {1.0, 0.5}}, Support::real);
    // headroom is the measured slack for exact fixtures; the pareto pair
    // runs on tail quadrature, so it only gets the contract budget
    auto check_pair = [](const Measure& a, const Measure& b, double headroom) {
        auto g1 = [&a](cplx w) { return a.cauchy(w); };
        auto g2 = [&b](cplx w) { return b.cauchy(w); };
        for (double y : {5.0, 9.0, 17.0, 40.0}) {
            for (double t : {-0.7, 0.0, 0.6}) {
                const cplx z(t * y, y);
                CAPTURE(z.real());
                CAPTURE(z.imag());
                const cplx w = z + voiculescu(a, z) + voiculescu(b, z);
                const cplx gsum = free_add_cauchy(g1, g2, w);
                // phi additivity: w = F_plus^{-1}(z), so 1/G at w returns z
                CHECK(std::abs(1.0 / gsum - z) <= 1e-7 * std::abs(z));
                CHECK(std::abs(1.0 / gsum - z) <= headroom * std::abs(z));
            }
        }
    };
    check_pair(sc, bern, 1e-9);
    check_pair(sc, sc2, 1e-9);
    check_pair(Measure::marchenko_pastur(800), bern, 1e-9);
    check_pair(sc, Measure::pareto(2.5, 1.0, 1.0), 1e-7);
}

TEST_CASE("point masses shift the other factor exactly") {
    InversionConfig cfg = InversionConfig::linear(0.0, 1.0, 16); // unused
    Measure d = free_add(Measure::point_mass(1.5), Measure::point_mass(-0.5), cfg);
    REQUIRE(d.atoms().size() == 1);
    CHECK(d.atoms()[0].location == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.atoms()[0].weight == doctest::Approx(1.0).epsilon(1e-14));

    Measure sc = Measure::semicircle(1.0, 300);
    Measure moved = free_add(sc, Measure::point_mass(3.0), cfg);
    const cplx z(0.8, 0.4);
    CHECK(std::abs(moved.cauchy(z + 3.0) - sc.cauchy(z)) < 1e-12);

    // m boxplus delta_1: support moves off [0, 4], nothing lands below 1
    Measure mp = Measure::marchenko_pastur(800);
    Measure lifted = free_add(mp, Measure::point_mass(1.0), cfg);
    CHECK(lifted.tail(0.9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lifted.tail(0.9) == lifted.tail(0.999));
    const cplx z2(2.3, 0.7);
    CHECK(std::abs(lifted.cauchy(z2) - mp.cauchy(z2 - 1.0)) < 1e-12);
}

TEST_CASE("point mass factors dilate under the multiplicative convolution") {
    // closed form evaluators first
    auto gmp = [](cplx z) { return mp_cauchy(z); };
    auto gd2 = [](cplx z) { return 1.0 / (z - 2.0); };
    for (cplx z : {cplx(1.5, 5.0), cplx(0.01, 2.5e-3), cplx(7.9, 2.5e-3)}) {
        CAPTURE(z.real());
        CAPTURE(z.imag());
        const cplx got = free_multiply_cauchy(gmp, gd2, z);
        const cplx want = 0.5 * mp_cauchy(0.5 * z);
        CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
    }

    // measure level short circuit is the same dilation
    Measure mp = Measure::marchenko_pastur(800);
    InversionConfig cfg = InversionConfig::linear(0.0, 1.0, 16); // unused
    Measure rec = free_multiply(mp, Measure::point_mass(2.0), cfg);
    const cplx z(1.0, 0.3);
    CHECK(std::abs(rec.cauchy(z) - 0.5 * mp.cauchy(0.5 * z)) < 1e-12);

    // delta_0 absorbs
    Measure zero = free_multiply(mp, Measure::point_mass(0.0), cfg);
    REQUIRE(zero.atoms().size() == 1);
    CHECK(zero.atoms()[0].location == 0.0);
    CHECK(zero.atoms()[0].weight == 1.0);
}

TEST_CASE("free poisson squared has fuss-catalan moments") {
    auto gmp = [](cplx z) { return mp_cauchy(z); };
    auto gff = [&](cplx z) { return free_multiply_cauchy(gmp, gmp, z); };
    const std::vector<double> m = contour_moments(gff, 4);
    const double want[] = {1.0, 1.0, 3.0, 12.0, 55.0};
    for (int j = 0; j <= 4; ++j) {
        CAPTURE(j);
        CHECK(std::abs(m[j] - want[j]) <= 1e-10 * want[j]);
    }
}

TEST_CASE("product route agrees with the levy-khintchine route") {
    // the free compound poisson with rate 1 and jump law rho is the free
    // multiplicative convolution of the rate 1 free poisson with rho; run
    // the same law through both pipelines and compare G on the cone
    Measure par = Measure::pareto(2.5, 1.0, 1.0);
    auto gmp = [](cplx z) { return mp_cauchy(z); };
    auto gpar = [&par](cplx w) { return par.cauchy(w); };
    FreeRegularRep rep = compound_free_poisson(1.0, par);
    FreeLK lk = rep.to_lk();
    auto phi = [&lk](cplx z) { return lk.phi(z); };
    auto dphi = [&lk](cplx z) { return lk.phi_derivative(z); };
    for (double y : {5.0, 9.0, 17.0, 40.0, 150.0}) {
        for (double t : {-0.7, 0.0, 0.6}) {
            const cplx z(t * y, y);
            CAPTURE(z.real());
            CAPTURE(z.imag());
            const cplx ga = free_multiply_cauchy(gmp, gpar, z);
            const cplx gb = cauchy_from_phi(phi, dphi, z);
            CHECK(std::abs(ga - gb) <= 1e-6);  // the downstream budget
            CHECK(std::abs(ga - gb) <= 1e-11); // measured headroom
        }
    }
}

TEST_CASE("measure level free_add recovers the doubled semicircle") {
    Measure s1 = Measure::semicircle(1.0, 300);
    InversionConfig cfg = InversionConfig::linear(0.0, 3.0, 500);
    cfg.support = Support::symmetric;
    Measure rec = free_add(s1, s1, cfg);

    CHECK(rec.is_symmetric());
    CHECK(rec.atoms().empty());
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(rec.moment(1) == 0.0);
    CHECK(rec.moment(2) == doctest::Approx(2.0).epsilon(1e-3));

    const double l1 = l1_against(
        rec, [](double t) { return semicircle_density(t, 2.0); }, 0.0, 3.0);
    CHECK(l1 < 1e-3);  // the round trip budget
    CHECK(l1 < 5e-5);  // measured headroom, keep the regression visible
}

TEST_CASE("measure level free_multiply matches the mixed moment identities") {
    Measure mp = Measure::marchenko_pastur(800);
    Measure u = Measure::gridded({0.5, 1.5}, {1.0, 1.0});
    InversionConfig cfg = InversionConfig::logarithmic(1e-4, 6.2, 400);
    Measure rec = free_multiply(mp, u, cfg);

    CHECK(rec.atoms().empty());
    CHECK(rec.mass() > 0.995);
    // m1 multiplies; m2 obeys m2(a) m1(b)^2 + m1(a)^2 m2(b) - (m1(a) m1(b))^2
    CHECK(rec.moment(1) == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(rec.moment(2) == doctest::Approx(25.0 / 12.0).epsilon(5e-3));
}

TEST_CASE("wigner product square of a point mass is a semicircle") {
    InversionConfig cfg = InversionConfig::linear(1e-3, 3.0, 100);
    cfg.support = Support::symmetric;
    Measure rec = wigner_product_square(Measure::point_mass(2.0), cfg);
    CHECK(rec.is_symmetric());
    CHECK(rec.moment(1) == 0.0);
    CHECK(rec.moment(2) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(rec.moment(4) == doctest::Approx(8.0).epsilon(1e-3));
}

TEST_CASE("wigner product square through the subordination path") {
    Measure u = Measure::gridded({0.5, 1.5}, {1.0, 1.0});
    InversionConfig cfg = InversionConfig::logarithmic(1e-3, 2.9, 600);
    cfg.support = Support::symmetric;
    Measure rec = wigner_product_square(u, cfg);

    CHECK(rec.is_symmetric());
    CHECK(rec.atoms().empty());
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(rec.moment(1) == 0.0);
    CHECK(rec.moment(3) == 0.0);
    // even moments of mu are the moments of mu^2 = poisson x uniform
    CHECK(rec.moment(2) == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(rec.moment(4) == doctest::Approx(25.0 / 12.0).epsilon(5e-3));
    CHECK(rec.moment(6) == doctest::Approx(5.5).epsilon(5e-3));

    // the evaluator behind the square law reproduces those moments exactly
    auto gmp = [](cplx z) { return mp_cauchy(z); };
    auto gu = [&u](cplx w) { return u.cauchy(w); };
    auto gsq = [&](cplx z) { return free_multiply_cauchy(gmp, gu, z); };
    const std::vector<double> m = contour_moments(gsq, 3);
    CHECK(std::abs(m[1] - 1.0) < 1e-10);
    CHECK(std::abs(m[2] - 25.0 / 12.0) < 1e-10);
    CHECK(std::abs(m[3] - 5.5) < 1e-10);

    // identical runs give identical grids
    Measure again = wigner_product_square(u, cfg);
    CHECK(again.knots() == rec.knots());
    CHECK(again.values() == rec.values());
}

TEST_CASE("validation gates") {
    auto g = [](cplx z) { return semicircle_cauchy(z); };
    try {
        subordination_add(g, g, cplx(1.0, -0.5));
        FAIL("half plane gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }
    try {
        subordination_add(g, g, cplx(1.0, 1.0), 0.0);
        FAIL("tolerance gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }
    try {
        subordination_multiply(g, g, cplx(1.0, -1.0));
        FAIL("half plane gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }

    InversionConfig cfg = InversionConfig::logarithmic(1e-3, 4.0, 64);
    Measure mp = Measure::marchenko_pastur(800);
    Measure sc = Measure::semicircle(1.0, 300);

    // centered factors have no multiplicative convolution on [0, inf)
    try {
        free_multiply(sc, mp, cfg);
        FAIL("support gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::mean_zero));
    }

    // factors must carry unit mass
    try {
        free_add(Measure::pareto(2.5, 1.0, 2.0), mp, cfg);
        FAIL("mass gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }

    // wigner jumps live on [0, inf) and want a symmetric output grid
    InversionConfig sym = InversionConfig::logarithmic(1e-3, 4.0, 64);
    sym.support = Support::symmetric;
    try {
        wigner_product_square(sc, sym);
        FAIL("jump support gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }
    try {
        wigner_product_square(mp, cfg);
        FAIL("output support gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }
    InversionConfig zero_start = InversionConfig::linear(0.0, 2.0, 64);
    zero_start.support = Support::symmetric;
    try {
        wigner_product_square(mp, zero_start);
        FAIL("grid origin gate did not fire");
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }
}

} // TEST_SUITE
