#include "freetail/free_id.hpp"

#include <cmath>
#include <utility>

#include "freetail/errors.hpp"
#include "freetail/rng.hpp"

namespace freetail {

namespace {

// int f d(stored parts); the caller folds symmetric measures
cplx raw_integral(const Measure& m, const std::function<cplx(double)>& f) {
    cplx acc = 0.0;
    for (const Atom& a : m.atoms()) acc += a.weight * f(a.location);
    const std::vector<double>& k = m.knots();
    const std::vector<double>& v = m.values();
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        if (v[i] == 0.0 && v[i + 1] == 0.0) continue;
        const double t0 = k[i], d0 = v[i];
        const double s = (v[i + 1] - d0) / (k[i + 1] - t0);
        acc += integrate([&](double t) { return f(t) * (d0 + s * (t - t0)); },
                         k[i], k[i + 1], 1e-12);
    }
    if (m.has_tail()) {
        const ParetoTail& tl = *m.power_tail();
        acc += integrate_tail([&](double t) { return f(t) * tl.density(t); },
                              tl.x0, 1e-12);
    }
    if (!m.sample().empty()) {
        const double w = m.sample_mass() / static_cast<double>(m.sample().size());
        for (double x : m.sample()) acc += w * f(x);
    }
    return acc;
}

cplx measure_integral(const Measure& m, const std::function<cplx(double)>& f) {
    if (m.is_symmetric())
        return raw_integral(m, [&](double t) { return 0.5 * (f(t) + f(-t)); });
    return raw_integral(m, f);
}

// one midpoint refinement, then values multiplied by w(t); the grid stays
// piecewise linear, so the reweighting carries an O(h^2) model error
void reweight_grid(std::vector<double>& knots, std::vector<double>& values,
                   const std::function<double(double)>& w) {
    if (knots.empty()) return;
    std::vector<double> k2, v2;
    k2.reserve(2 * knots.size());
    v2.reserve(2 * knots.size());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        k2.push_back(knots[i]);
        v2.push_back(values[i]);
        k2.push_back(0.5 * (knots[i] + knots[i + 1]));
        v2.push_back(0.5 * (values[i] + values[i + 1]));
    }
    k2.push_back(knots.back());
    v2.push_back(values.back());
    for (std::size_t i = 0; i < k2.size(); ++i) v2[i] *= w(k2[i]);
    knots.swap(k2);
    values.swap(v2);
}

ParetoTail::Weight sigma_weight_of(ParetoTail::Weight w) {
    switch (w) {
    case ParetoTail::Weight::plain: return ParetoTail::Weight::sigma_of_levy;
    case ParetoTail::Weight::levy_of_sigma: return ParetoTail::Weight::plain;
    case ParetoTail::Weight::sigma_of_levy: break;
    }
    fail(errc::domain_error, "tail weight does not compose with t^2/(1+t^2)");
}

ParetoTail::Weight levy_weight_of(ParetoTail::Weight w) {
    switch (w) {
    case ParetoTail::Weight::plain: return ParetoTail::Weight::levy_of_sigma;
    case ParetoTail::Weight::sigma_of_levy: return ParetoTail::Weight::plain;
    case ParetoTail::Weight::levy_of_sigma: break;
    }
    fail(errc::domain_error, "tail weight does not compose with (1+t^2)/t^2");
}

} // namespace

cplx FreeLK::phi(cplx z) const {
    require(z.imag() > 0.0, errc::domain_error, "phi: need Im z > 0");
    return gamma - sigma.mass() * z + (1.0 + z * z) * sigma.cauchy(z);
}

cplx FreeLK::phi_derivative(cplx z) const {
    require(z.imag() > 0.0, errc::domain_error, "phi_derivative: need Im z > 0");
    return -sigma.mass() + 2.0 * z * sigma.cauchy(z) +
           (1.0 + z * z) * sigma.cauchy_derivative(z);
}

cplx FreeLK::phi_checked(cplx z) const {
    const cplx lemma = phi(z);
    const cplx direct =
        gamma + measure_integral(sigma, [&](double t) -> cplx {
            return (1.0 + t * z) / (z - t);
        });
    const double scale =
        std::max({std::abs(lemma), std::abs(direct), 1.0});
    require(std::abs(lemma - direct) <= 1e-9 * scale, errc::no_convergence,
            "phi evaluation drifted between the rational split and the "
            "defining integral");
    return lemma;
}

double FreeLK::free_cumulant(int p) const {
    require(p >= 1, errc::domain_error, "free_cumulant: need p >= 1");
    if (p == 1) return gamma + sigma.moment(1);
    return sigma.moment(p - 2) + sigma.moment(p);
}

FreeRegularRep FreeRegularRep::from_levy(double eta_prime, Measure nu) {
    require(eta_prime >= 0.0, errc::negative_drift,
            "free regular representation needs eta' >= 0");
    require(nu.mass() > 0.0, errc::not_levy_measure, "levy measure is empty");
    require(nu.min_support() >= 0.0, errc::not_levy_measure,
            "free regular levy measure lives on (0, inf)");
    require(nu.atom_at(0.0) == 0.0, errc::not_levy_measure,
            "levy measure cannot charge the origin");
    return FreeRegularRep{eta_prime, std::move(nu)};
}

FreeRegularRep FreeRegularRep::from_sigma(double gamma, const Measure& sigma) {
    double recip;
    try {
        recip = sigma.moment(-1);
    } catch (const Error& e) {
        if (e.code() == errc::moment_diverges)
            fail(errc::not_free_regular,
                 "sigma carries infinite 1/t mass, so eta' = -inf");
        throw;
    }
    const double eta = gamma - recip;
    require(eta >= -1e-12 * std::max(1.0, std::abs(gamma)), errc::not_free_regular,
            "gamma < m_{-1}(sigma) has a negative drift part");

    require(sigma.sample().empty(), errc::domain_error,
            "sample parts cannot be reweighted into a levy measure");
    std::vector<Atom> atoms;
    for (const Atom& a : sigma.atoms()) {
        require(a.location > 0.0, errc::not_free_regular,
                "sigma mass at the origin is a free Cauchy part");
        atoms.push_back({a.location, a.weight * (1.0 + a.location * a.location) /
                                         (a.location * a.location)});
    }
    std::vector<double> knots = sigma.knots();
    std::vector<double> values = sigma.values();
    if (!knots.empty())
        require(knots.front() > 0.0, errc::moment_diverges,
                "levy density ~ 1/t^2 at the origin is outside the grid "
                "representation");
    reweight_grid(knots, values,
                  [](double t) { return (1.0 + t * t) / (t * t); });
    std::optional<ParetoTail> tail;
    if (sigma.has_tail()) {
        ParetoTail tl = *sigma.power_tail();
        tl.weight = levy_weight_of(tl.weight);
        tail = tl;
    }
    Measure nu = Measure::compose(std::move(atoms), std::move(knots),
                                  std::move(values), tail, {}, 0.0,
                                  Support::nonneg);
    return FreeRegularRep{std::max(eta, 0.0), std::move(nu)};
}

FreeRegularRep FreeRegularRep::from_sigma_auto(const Measure& sigma) {
    return from_sigma(sigma.moment(-1), sigma);
}

FreeLK FreeRegularRep::to_lk() const {
    const double gamma =
        eta_prime + measure_integral(nu, [](double t) -> cplx {
                        return t / (1.0 + t * t);
                    }).real();

    require(nu.sample().empty(), errc::domain_error,
            "sample parts cannot be reweighted into sigma");
    std::vector<Atom> atoms;
    for (const Atom& a : nu.atoms())
        atoms.push_back({a.location, a.weight * a.location * a.location /
                                         (1.0 + a.location * a.location)});
    std::vector<double> knots = nu.knots();
    std::vector<double> values = nu.values();
    reweight_grid(knots, values,
                  [](double t) { return t * t / (1.0 + t * t); });
    std::optional<ParetoTail> tail;
    if (nu.has_tail()) {
        ParetoTail tl = *nu.power_tail();
        tl.weight = sigma_weight_of(tl.weight);
        tail = tl;
    }
    Measure sigma = Measure::compose(std::move(atoms), std::move(knots),
                                     std::move(values), tail, {}, 0.0,
                                     Support::nonneg);
    return FreeLK{gamma, std::move(sigma)};
}

cplx FreeRegularRep::cumulant_transform(cplx z) const {
    require(z.imag() < 0.0, errc::domain_error,
            "cumulant_transform: need Im z < 0");
    return eta_prime * z + measure_integral(nu, [&](double t) -> cplx {
               return z * t / (1.0 - z * t);
           });
}

double FreeRegularRep::free_cumulant(int p) const {
    require(p >= 1, errc::domain_error, "free_cumulant: need p >= 1");
    if (p == 1) return eta_prime + nu.moment(1);
    return nu.moment(p);
}

FreeRegularRep compound_free_poisson(double rate, const Measure& jump) {
    require(rate > 0.0, errc::domain_error, "compound_free_poisson: rate > 0");
    return FreeRegularRep::from_levy(0.0, jump.normalized().scaled(rate));
}

FreeRegularRep bercovici_pata(double gaussian_part, double eta_prime, Measure nu) {
    require(gaussian_part == 0.0, errc::gaussian_part_present,
            "a gaussian part maps to a semicircular one, which is not free "
            "regular");
    return FreeRegularRep::from_levy(eta_prime, std::move(nu));
}

std::vector<double> classical_compound_poisson_sample(double rate, const Measure& jump,
                                                      std::size_t n, Rng& rng) {
    const Measure law = jump.normalized();
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long k = rng.poisson(rate);
        double s = 0.0;
        if (k > 0)
            for (double x : law.draws(rng, static_cast<std::size_t>(k))) s += x;
        out.push_back(s);
    }
    return out;
}

std::function<cplx(cplx)> free_stable_phi(double alpha, double rho) {
    require(alpha > 0.0 && alpha <= 2.0, errc::domain_error,
            "free stable index lives in (0, 2]");
    require(rho >= 0.0 && rho <= 1.0, errc::domain_error,
            "free stable asymmetry lives in [0, 1]");
    const cplx front = -std::exp(cplx(0.0, M_PI * alpha * rho));
    return [front, alpha](cplx z) -> cplx {
        require(z.imag() > 0.0, errc::domain_error, "phi: need Im z > 0");
        return front * std::pow(z, 1.0 - alpha);
    };
}

} // namespace freetail
