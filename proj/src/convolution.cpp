#include "freetail/convolution.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>

#include "freetail/errors.hpp"

namespace freetail {

namespace {

cplx f_of(const CauchyEval& g, cplx w) {
    const cplx gw = g(w);
    require(std::isfinite(std::abs(gw)) && std::abs(gw) > 1e-300,
            errc::numerical_zero, "subordination: Cauchy transform vanished");
    return 1.0 / gw;
}

cplx eta_of(const CauchyEval& g, cplx zeta) {
    const cplx psi = g(1.0 / zeta) / zeta - 1.0;
    require(std::abs(psi + 1.0) > 1e-300, errc::numerical_zero,
            "subordination: psi at the pole");
    return psi / (psi + 1.0);
}

// Steffensen accelerated fixed point for the subordination maps. The plain
// iterate contracts in the hyperbolic metric, but the factor degrades to
// 1 - O(Im z) near the spectral edge, which is exactly where the inversion
// grid rows sit. Aitken extrapolation solves the local linear model outright,
// so those rows stay affordable. Extrapolated points must stay in the half
// plane of the iteration and must beat the plain double step on residual,
// otherwise the double step is kept; the plain step alone still converges,
// just slowly, so the guards cost robustness nothing.
cplx settle(const std::function<cplx(cplx)>& step, cplx start, bool upper,
            double tol, const char* who) {
    cplx w = start;
    cplx tw = step(w);
    double res = std::abs(tw - w);
    for (int it = 0; it < 200; ++it) {
        if (res <= tol) return tw;
        const cplx t2 = step(tw);
        const cplx d2 = t2 - tw;
        if (std::abs(d2) <= tol) return t2;
        const cplx d1 = tw - w;
        const cplx den = d2 - d1;
        if (std::abs(den) > 1e-300) {
            const cplx cand = w - d1 * d1 / den;
            if ((cand.imag() > 0.0) == upper) {
                // step may refuse an off track probe (the multiplicative map
                // only preserves its half plane near the actual orbit); a
                // refusal just rejects the candidate
                try {
                    const cplx tc = step(cand);
                    const double rc = std::abs(tc - cand);
                    if (rc < std::abs(d2)) {
                        w = cand;
                        tw = tc;
                        res = rc;
                        continue;
                    }
                } catch (const Error&) {
                }
            }
        }
        w = t2;
        tw = step(t2);
        res = std::abs(tw - w);
    }
    fail(errc::no_convergence, who);
}

// single point mass and nothing else
bool is_point(const Measure& m, double& at) {
    if (m.atoms().size() != 1 || !m.knots().empty() || m.has_tail() ||
        !m.sample().empty())
        return false;
    at = m.atoms()[0].location;
    return true;
}

void require_standard(const Measure& m, const char* who) {
    require(std::abs(m.mass() - 1.0) <= 1e-9, errc::domain_error, who);
}

} // namespace

SubordinationPair subordination_add(const CauchyEval& g1, const CauchyEval& g2,
                                    cplx z, double tol, const cplx* warm) {
    require(z.imag() > 0.0, errc::domain_error,
            "subordination_add: need Im z > 0");
    require(tol > 0.0, errc::domain_error, "subordination_add: bad tolerance");
    auto step = [&](cplx w1) {
        const cplx w2 = z + f_of(g1, w1) - w1;
        require(w2.imag() > 0.0, errc::no_convergence,
                "subordination_add: iterate left the upper half plane");
        return z + f_of(g2, w2) - w2;
    };
    const cplx start = warm && warm->imag() > 0.0 ? *warm : z;
    cplx w1;
    try {
        w1 = settle(step, start, true, tol * (1.0 + std::abs(z)),
                    "subordination_add: iteration did not settle");
    } catch (const Error&) {
        if (start == z) throw;
        // stale warm seed; the cold start is guaranteed to contract
        w1 = settle(step, z, true, tol * (1.0 + std::abs(z)),
                    "subordination_add: iteration did not settle");
    }
    // omega1 + omega2 = z + F(z) pins the partner transform
    return SubordinationPair{w1, z + f_of(g1, w1) - w1};
}

cplx free_add_cauchy(const CauchyEval& g1, const CauchyEval& g2, cplx z,
                     double tol) {
    return g1(subordination_add(g1, g2, z, tol).omega1);
}

SubordinationPair subordination_multiply(const CauchyEval& g1,
                                         const CauchyEval& g2, cplx z,
                                         double tol, const cplx* warm) {
    require(z.imag() > 0.0, errc::domain_error,
            "subordination_multiply: need Im z > 0");
    require(tol > 0.0, errc::domain_error,
            "subordination_multiply: bad tolerance");
    // work in the zeta = 1/z chart; Im z > 0 puts zeta in the lower half
    // plane and omega1 omega2 = zeta eta(zeta) ties the pair together
    const cplx zeta = 1.0 / z;
    auto step = [&](cplx w1) {
        require(std::abs(w1) > 1e-300, errc::numerical_zero,
                "subordination_multiply: omega collapsed");
        const cplx w2 = zeta * eta_of(g1, w1) / w1;
        require(w2.imag() < 0.0, errc::no_convergence,
                "subordination_multiply: iterate left the lower half plane");
        return zeta * eta_of(g2, w2) / w2;
    };
    const cplx start = warm && warm->imag() < 0.0 ? *warm : zeta;
    cplx w1;
    try {
        w1 = settle(step, start, false, tol * std::abs(zeta),
                    "subordination_multiply: iteration did not settle");
    } catch (const Error&) {
        if (start == zeta) throw;
        w1 = settle(step, zeta, false, tol * std::abs(zeta),
                    "subordination_multiply: iteration did not settle");
    }
    return SubordinationPair{w1, zeta * eta_of(g1, w1) / w1};
}

cplx free_multiply_cauchy(const CauchyEval& g1, const CauchyEval& g2, cplx z,
                          double tol) {
    const SubordinationPair s = subordination_multiply(g1, g2, z, tol);
    const cplx eta = eta_of(g1, s.omega1);
    require(std::abs(1.0 - eta) > 1e-300, errc::numerical_zero,
            "free_multiply_cauchy: eta at the pole");
    return (1.0 + eta / (1.0 - eta)) / z;
}

Measure free_add(const Measure& a, const Measure& b,
                 const InversionConfig& cfg) {
    require_standard(a, "free_add: left factor must be a probability measure");
    require_standard(b, "free_add: right factor must be a probability measure");
    double at = 0.0;
    if (is_point(a, at)) return b.shifted(at);
    if (is_point(b, at)) return a.shifted(at);
    auto g1 = [&a](cplx w) { return a.cauchy(w); };
    auto g2 = [&b](cplx w) { return b.cauchy(w); };
    // the inversion walks each grid row in order, so the previous omega1 is
    // one knot away and the warm started solve settles in a step or two
    cplx last;
    bool has_last = false;
    return stieltjes_invert(
        [&](cplx z) {
            const SubordinationPair s = subordination_add(
                g1, g2, z, 1e-12, has_last ? &last : nullptr);
            last = s.omega1;
            has_last = true;
            return g1(s.omega1);
        },
        cfg);
}

Measure free_multiply(const Measure& a, const Measure& b,
                      const InversionConfig& cfg) {
    require_standard(a,
                     "free_multiply: left factor must be a probability measure");
    require_standard(b,
                     "free_multiply: right factor must be a probability measure");
    require(a.support_type() == Support::nonneg &&
                b.support_type() == Support::nonneg,
            errc::mean_zero,
            "free_multiply: factors must live on [0, inf); symmetrize through "
            "the squared law instead");
    if (a.atom_at(0.0) == 1.0 || b.atom_at(0.0) == 1.0)
        return Measure::point_mass(0.0);
    double at = 0.0;
    if (is_point(a, at)) return b.dilated(1.0 / at);
    if (is_point(b, at)) return a.dilated(1.0 / at);
    auto g1 = [&a](cplx w) { return a.cauchy(w); };
    auto g2 = [&b](cplx w) { return b.cauchy(w); };
    cplx last;
    bool has_last = false;
    return stieltjes_invert(
        [&](cplx z) {
            const SubordinationPair s = subordination_multiply(
                g1, g2, z, 1e-12, has_last ? &last : nullptr);
            last = s.omega1;
            has_last = true;
            const cplx eta = eta_of(g1, s.omega1);
            require(std::abs(1.0 - eta) > 1e-300, errc::numerical_zero,
                    "free_multiply: eta at the pole");
            return (1.0 + eta / (1.0 - eta)) / z;
        },
        cfg);
}

Measure wigner_product_square(const Measure& rho, const InversionConfig& cfg) {
    require_standard(rho, "wigner_product_square: rho must be a probability "
                          "measure");
    require(rho.support_type() == Support::nonneg, errc::domain_error,
            "wigner_product_square: rho must live on [0, inf)");
    require(cfg.support == Support::symmetric, errc::domain_error,
            "wigner_product_square: configure a symmetric recovery grid");
    double at = 0.0;
    if (is_point(rho, at)) {
        require(at >= 0.0, errc::domain_error,
                "wigner_product_square: negative point mass location");
        if (at == 0.0) return Measure::point_mass(0.0);
        // mu^2 is then a dilated free Poisson, so mu is a semicircle again
        return Measure::semicircle(at);
    }
    // the symmetrized square root law satisfies G_mu(z) = z G_{mu^2}(z^2);
    // x > 0 keeps Im(z^2) = 2 x eps positive on every grid row
    require(cfg.grid.front() > 0.0, errc::domain_error,
            "wigner_product_square: grid must start above 0");
    auto g1 = [](cplx w) { return mp_cauchy(w); };
    auto g2 = [&rho](cplx w) { return rho.cauchy(w); };
    cplx last;
    bool has_last = false;
    auto gsq = [&](cplx z) {
        const SubordinationPair s = subordination_multiply(
            g1, g2, z, 1e-12, has_last ? &last : nullptr);
        last = s.omega1;
        has_last = true;
        const cplx eta = eta_of(g1, s.omega1);
        require(std::abs(1.0 - eta) > 1e-300, errc::numerical_zero,
                "wigner_product_square: eta at the pole");
        return (1.0 + eta / (1.0 - eta)) / z;
    };
    return stieltjes_invert([&gsq](cplx z) { return z * gsq(z * z); }, cfg);
}

} // namespace freetail
