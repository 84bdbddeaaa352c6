#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "doctest.h"
#include "freetail/errors.hpp"
#include "freetail/inversion.hpp"
#include "freetail/free_id.hpp"
#include "freetail/measure.hpp"

using namespace freetail;

namespace {

// L1 distance between the recovered grid density and a reference density,
// trapezoid on the recovery knots
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

} // namespace

TEST_SUITE("inversion") {

TEST_CASE("marchenko-pastur density comes back from the closed form") {
    InversionConfig cfg = InversionConfig::logarithmic(1e-4, 4.2, 1400);
    Measure rec = stieltjes_invert([](cplx z) { return mp_cauchy(z); }, cfg);

    // the grid misses only the [0, 1e-4) sliver of the x^(-1/2) edge
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(8e-3));
    CHECK(rec.atoms().empty());

    const double l1 = l1_against(rec, [](double t) { return mp_density(t); },
                                 0.05, 3.95);
    CHECK(l1 < 2e-3);   // the round trip budget used everywhere downstream
    CHECK(l1 < 5e-4);   // measured headroom, do not let it regress quietly

    CHECK(rec.moment(1) == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(rec.moment(2) == doctest::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("semicircle on a two sided grid") {
    InversionConfig cfg = InversionConfig::linear(-2.5, 2.5, 1000);
    cfg.support = Support::real;
    Measure rec = stieltjes_invert(
        [](cplx z) { return semicircle_cauchy(z); }, cfg);
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(2e-3));
    const double l1 = l1_against(
        rec, [](double t) { return semicircle_density(t); }, -2.5, 2.5);
    CHECK(l1 < 1e-3);
    CHECK(std::abs(rec.moment(1)) < 1e-3);
    CHECK(rec.moment(2) == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("atom inside a continuous background is split off") {
    // 0.3 delta_1 + 0.7 semicircle, atom sits inside the bulk
    auto g = [](cplx z) {
        return 0.3 / (z - 1.0) + 0.7 * semicircle_cauchy(z);
    };
    InversionConfig cfg = InversionConfig::linear(-2.5, 2.5, 1000);
    cfg.support = Support::real;
    Measure rec = stieltjes_invert(g, cfg);

    REQUIRE(rec.atoms().size() == 1);
    CHECK(std::abs(rec.atoms()[0].location - 1.0) < 2e-3);
    CHECK(std::abs(rec.atoms()[0].weight - 0.3) < 1e-3);
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(3e-3));

    // after the Lorentzian subtraction the grid part is the semicircle again
    const double l1 = l1_against(
        rec, [](double t) { return 0.7 * semicircle_density(t); }, -2.5, 2.5);
    CHECK(l1 < 5e-3);
}

TEST_CASE("atom in an empty region and the pure ladder ratio") {
    auto g = [](cplx z) { return 0.2 / (z - 5.0) + 0.8 * mp_cauchy(z); };
    InversionConfig cfg = InversionConfig::logarithmic(1e-3, 6.0, 1200);
    Measure rec = stieltjes_invert(g, cfg);
    REQUIRE(rec.atoms().size() == 1);
    CHECK(std::abs(rec.atoms()[0].location - 5.0) < 1.5e-3);
    CHECK(std::abs(rec.atoms()[0].weight - 0.2) < 2e-4);
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("integrable edge singularity is not mistaken for an atom") {
    // x^(-1/2) edge of marchenko-pastur: ladder ratio stays near 2
    InversionConfig cfg = InversionConfig::logarithmic(1e-4, 4.2, 1400);
    Measure rec = stieltjes_invert([](cplx z) { return mp_cauchy(z); }, cfg);
    CHECK(rec.atoms().empty());
}

TEST_CASE("pareto tail is fitted from the last decade") {
    Measure mu = Measure::pareto(2.5, 1.0, 1.0);
    auto g = [&mu](cplx z) { return mu.cauchy(z); };
    InversionConfig cfg = InversionConfig::logarithmic(1.0, 1e3, 1200);
    cfg.fit_tail = true;
    Measure rec = stieltjes_invert(g, cfg);

    REQUIRE(rec.has_tail());
    // pure power density on the whole window: the fit is essentially exact
    CHECK(std::abs(rec.power_tail()->alpha - 2.5) < 1e-3);
    CHECK(rec.power_tail()->c == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(rec.power_tail()->x0 == doctest::Approx(1e3));

    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(1e-2));
    for (double q : {20.0, 100.0, 800.0, 5000.0})
        CHECK(rec.tail(q) == doctest::Approx(mu.tail(q)).epsilon(2e-2));
}

TEST_CASE("gates: deficit, negative density, bad windows") {
    // grid starting at 0.5 misses the heavy left shoulder of MP
    InversionConfig narrow = InversionConfig::linear(0.5, 3.95, 600);
    try {
        stieltjes_invert([](cplx z) { return mp_cauchy(z); }, narrow);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(code_is(e, errc::mass_deficit));
    }

    // a sign-flipped transform has negative density everywhere
    InversionConfig cfg = InversionConfig::linear(0.05, 3.95, 600);
    try {
        stieltjes_invert([](cplx z) { return -mp_cauchy(z); }, cfg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(code_is(e, errc::negative_density));
    }

    // tail fit on a compactly supported law: no positive densities out there
    InversionConfig wide = InversionConfig::logarithmic(1e-3, 400.0, 900);
    wide.fit_tail = true;
    try {
        stieltjes_invert([](cplx z) { return mp_cauchy(z); }, wide);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(code_is(e, errc::window_too_short));
    }

    // nonneg support cannot take a grid reaching below zero
    InversionConfig neg = InversionConfig::linear(-1.0, 1.0, 100);
    try {
        stieltjes_invert([](cplx z) { return mp_cauchy(z); }, neg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(code_is(e, errc::domain_error));
    }
}

TEST_CASE("phi route reproduces marchenko-pastur") {
    auto phi = [](cplx z) { return z / (z - 1.0); };
    auto dphi = [](cplx z) { return -1.0 / ((z - 1.0) * (z - 1.0)); };

    // pointwise against the closed form, including a point close to the axis
    for (cplx w : {cplx(2.0, 0.5), cplx(0.7, 1.0), cplx(3.9, 2.5e-3)}) {
        const cplx got = cauchy_from_phi(phi, dphi, w);
        const cplx want = mp_cauchy(w);
        CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
    }

    InversionConfig cfg = InversionConfig::logarithmic(1e-4, 4.2, 1400);
    Measure rec = invert_from_phi(phi, dphi, cfg);
    const double l1 = l1_against(rec, [](double t) { return mp_density(t); },
                                 0.05, 3.95);
    CHECK(l1 < 2e-3);
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(8e-3));
}

TEST_CASE("phi route reproduces the semicircle") {
    // phi(z) = 1/z is the variance one semicircle
    auto phi = [](cplx z) { return 1.0 / z; };
    auto dphi = [](cplx z) { return -1.0 / (z * z); };
    InversionConfig cfg = InversionConfig::linear(-2.5, 2.5, 1000);
    cfg.support = Support::real;
    Measure rec = invert_from_phi(phi, dphi, cfg);
    const double l1 = l1_against(
        rec, [](double t) { return semicircle_density(t); }, -2.5, 2.5);
    CHECK(l1 < 1e-3);
}

TEST_CASE("free levy khintchine pair feeds the phi route") {
    // sigma = delta_1 scaled to 1/2 with gamma = 1/2 is marchenko-pastur
    FreeLK lk{0.5, Measure::point_mass(1.0).scaled(0.5)};
    auto phi = [&lk](cplx z) { return lk.phi(z); };
    auto dphi = [&lk](cplx z) { return lk.phi_derivative(z); };
    InversionConfig cfg = InversionConfig::logarithmic(1e-4, 4.2, 1400);
    Measure rec = invert_from_phi(phi, dphi, cfg);
    const double l1 = l1_against(rec, [](double t) { return mp_density(t); },
                                 0.05, 3.95);
    CHECK(l1 < 2e-3);
    CHECK(rec.moment(1) == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("symmetric fold of the semicircle") {
    // recover on x >= 0 only and fold; moments and mass must match the
    // two sided law
    InversionConfig cfg = InversionConfig::linear(0.0, 2.5, 600);
    cfg.support = Support::symmetric;
    Measure rec = stieltjes_invert(
        [](cplx z) { return semicircle_cauchy(z); }, cfg);
    CHECK(rec.is_symmetric());
    CHECK(rec.mass() == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(std::abs(rec.moment(1)) < 1e-12);
    CHECK(rec.moment(2) == doctest::Approx(1.0).epsilon(5e-3));
    // density accessor reports the two sided value
    CHECK(rec.density(1.0) == doctest::Approx(semicircle_density(1.0)).epsilon(2e-3));
    CHECK(rec.density(-1.0) == doctest::Approx(semicircle_density(1.0)).epsilon(2e-3));
}

TEST_CASE("determinism: identical runs produce identical knots and values") {
    InversionConfig cfg = InversionConfig::logarithmic(1e-4, 4.2, 400);
    Measure a = stieltjes_invert([](cplx z) { return mp_cauchy(z); }, cfg);
    Measure b = stieltjes_invert([](cplx z) { return mp_cauchy(z); }, cfg);
    REQUIRE(a.values().size() == b.values().size());
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        CHECK(a.knots()[i] == b.knots()[i]);
        CHECK(a.values()[i] == b.values()[i]);
    }
}

} // TEST_SUITE
