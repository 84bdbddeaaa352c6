#include "freetail/transforms.hpp"

#include <cmath>
#include <cstddef>
#include <functional>

#include "freetail/errors.hpp"

namespace freetail {

namespace {

double ipow(double t, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= t;
    return r;
}

// int over one grid cell of t^(p+1) (d0 + s (t - t0)) / (z - t). A single
// GK15 panel is exact to rounding once |z| clears the cell by a few widths,
// which is the regime remainders are evaluated in; the adaptive fallback
// covers evaluation close to the support.
cplx cell_kernel(double t0, double t1, double d0, double d1, int p, cplx z) {
    const double s = (d1 - d0) / (t1 - t0);
    auto f = [&](double t) -> cplx {
        return ipow(t, p + 1) * (d0 + s * (t - t0)) / (z - t);
    };
    PanelResult pr = gk15_panel(f, t0, t1);
    if (pr.error <= 1e-12 * std::abs(pr.value) || pr.error < 1e-300) return pr.value;
    return integrate(f, t0, t1, 1e-12);
}

// int t^(p+1) d stored(t) / (z - t) over the stored parts, no folding
cplx kernel_raw(const Measure& mu, int p, cplx z) {
    cplx acc = 0.0;
    for (const Atom& a : mu.atoms())
        acc += a.weight * ipow(a.location, p + 1) / (z - a.location);
    const std::vector<double>& k = mu.knots();
    const std::vector<double>& v = mu.values();
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        if (v[i] == 0.0 && v[i + 1] == 0.0) continue;
        acc += cell_kernel(k[i], k[i + 1], v[i], v[i + 1], p, z);
    }
    if (mu.has_tail()) {
        const ParetoTail& tl = *mu.power_tail();
        auto f = [&](double t) -> cplx {
            return ipow(t, p + 1) * tl.density(t) / (z - t);
        };
        acc += integrate_tail(f, tl.x0, 1e-12);
    }
    if (!mu.sample().empty()) {
        const double w = mu.sample_mass() / static_cast<double>(mu.sample().size());
        for (double x : mu.sample()) acc += w * ipow(x, p + 1) / (z - x);
    }
    return acc;
}

// one damped Newton solve of h(z) = target from a warm start; step length
// is clamped so a warm iterate cannot tunnel to a spurious preimage across
// a region of small |h'|. Returns true once |h(z) - target| <= tol; spent
// counts against the caller's global budget.
bool newton_stage(const std::function<cplx(cplx)>& h,
                  const std::function<cplx(cplx)>& hp, cplx target, double tol,
                  double step_cap, cplx& z, int budget, int& spent) {
    cplx r = h(z) - target;
    double rn = std::abs(r);
    while (budget-- > 0) {
        if (rn <= tol) return true;
        ++spent;
        const cplx d = hp(z);
        cplx dir = (std::isfinite(std::abs(d)) && std::abs(d) > 1e-12) ? r / d : r;
        const double dn = std::abs(dir);
        if (dn > step_cap) dir *= step_cap / dn;
        bool moved = false;
        double lam = 1.0;
        for (int half = 0; half < 12; ++half, lam *= 0.5) {
            const cplx zc = z - lam * dir;
            if (zc.imag() <= 0.0) continue;
            const cplx rc = h(zc) - target;
            if (std::abs(rc) < rn) {
                z = zc;
                r = rc;
                rn = std::abs(rc);
                moved = true;
                break;
            }
        }
        if (!moved) return rn <= tol;
    }
    return rn <= tol;
}

} // namespace

bool ConeRegion::contains(cplx z) const {
    return z.imag() > 0.0 && std::abs(z.real()) < eta * z.imag() &&
           std::abs(z) > radius;
}

ConeRegion ConeRegion::for_measure(const Measure& mu, double eta) {
    require(eta > 0.0, errc::domain_error, "cone aperture must be positive");
    const double m1 = mu.moment(1);
    const double m2 = mu.moment(2);
    return ConeRegion{eta, 4.0 * (1.0 + m1 + std::sqrt(m2))};
}

cplx cauchy(const Measure& mu, cplx z) {
    require(z.imag() > 0.0, errc::domain_error, "cauchy: need Im z > 0");
    return mu.cauchy(z);
}

cplx reciprocal_cauchy(const Measure& mu, cplx z) {
    const cplx g = cauchy(mu, z);
    require(std::abs(g) > 1e-300, errc::numerical_zero,
            "reciprocal_cauchy: Cauchy transform vanished");
    return 1.0 / g;
}

cplx invert_nevanlinna(const std::function<cplx(cplx)>& h,
                       const std::function<cplx(cplx)>& hp, cplx w, double tol,
                       const cplx* warm) {
    require(w.imag() > 0.0, errc::domain_error, "invert_nevanlinna: need Im w > 0");
    require(tol > 0.0, errc::domain_error, "invert_nevanlinna: bad tolerance");

    // A warm start is trusted only when it already sits near the target's
    // preimage; otherwise branch locality is not guaranteed and the full
    // descent below is the safe route.
    if (warm != nullptr && warm->imag() > 0.0) {
        cplx z = *warm;
        const double r0 = std::abs(h(z) - w);
        if (r0 <= 0.2 * (1.0 + std::abs(w))) {
            const double cap = std::max(4.0 * r0, 0.05 * (1.0 + std::abs(z)));
            int spent = 0;
            if (newton_stage(h, hp, w, tol, cap, z, 40, spent)) return z;
        }
    }

    // h(z) = w can have several roots in the upper half plane; only the one
    // on the branch of h^{-1} that is the identity at infinity is wanted.
    // Descend the segment w + iT, T: T0 -> 0, warm starting each Newton
    // stage at the previous solution. Warm starts keep every step local, so
    // the iterate tracks the branch instead of dropping onto a spurious
    // preimage, and failed stages bisect the path.
    const double T0 = 4.0 * (1.0 + std::abs(w));
    const double t_floor = std::max(1e-4 * (1.0 + std::abs(w)), 0.02 * w.imag());
    int spent = 0;
    cplx z = w + cplx(0.0, T0);
    double solved_at = T0;
    double T = T0;
    bool have_base = false;

    while (spent < 200) {
        const cplx target = w + cplx(0.0, T);
        const double stage_tol = (T == 0.0) ? tol : std::max(tol, 1e-8 * (1.0 + T));
        const double dT = have_base ? solved_at - T : T0;
        const double step_cap = std::max(4.0 * dT, 0.05 * (1.0 + std::abs(z)));
        const cplx base = z;
        if (newton_stage(h, hp, target, stage_tol, step_cap, z, 200 - spent, spent)) {
            if (T == 0.0) return z;
            solved_at = T;
            have_base = true;
            T = (T <= t_floor) ? 0.0 : 0.5 * T;
        } else {
            z = base;
            if (!have_base)
                fail(errc::no_convergence,
                     "invert_nevanlinna: no convergence at the continuation start");
            const double retry = 0.5 * (solved_at + T);
            if (solved_at - retry <= 1e-6 * (1.0 + solved_at))
                fail(errc::no_convergence, "invert_nevanlinna: continuation stalled");
            T = retry;
        }
    }
    fail(errc::no_convergence, "invert_nevanlinna: no convergence in 200 damped steps");
}

cplx invert_reciprocal(const Measure& mu, cplx w, double rel_tol) {
    require(w.imag() > 0.0, errc::domain_error, "invert_reciprocal: need Im w > 0");
    require(rel_tol > 0.0, errc::domain_error, "invert_reciprocal: bad tolerance");
    auto f = [&mu](cplx z) { return 1.0 / mu.cauchy(z); };
    auto fp = [&mu](cplx z) {
        const cplx g = mu.cauchy(z);
        return -mu.cauchy_derivative(z) / (g * g);
    };
    return invert_nevanlinna(f, fp, w, rel_tol * std::abs(w));
}

std::vector<double> contour_moments(const CauchyEval& g, int p, double radius,
                                    int nodes) {
    require(p >= 0, errc::domain_error, "contour_moments: need p >= 0");
    require(radius > 0.0, errc::domain_error, "contour_moments: bad radius");
    require(nodes >= 16, errc::domain_error, "contour_moments: too few nodes");
    constexpr double pi = 3.14159265358979323846;
    std::vector<double> m(static_cast<std::size_t>(p) + 1, 0.0);
    for (int k = 0; k < nodes; ++k) {
        const double th = pi * (static_cast<double>(k) + 0.5) /
                          static_cast<double>(nodes);
        const cplx z = std::polar(radius, th);
        const cplx gz = g(z);
        cplx pw = z; // z^(j+1)
        for (int j = 0; j <= p; ++j) {
            m[static_cast<std::size_t>(j)] += (pw * gz).real();
            pw *= z;
        }
    }
    for (double& v : m) v /= static_cast<double>(nodes);
    return m;
}

cplx voiculescu(const Measure& mu, cplx z, double rel_tol) {
    return invert_reciprocal(mu, z, rel_tol) - z;
}

cplx free_cumulant_transform(const Measure& mu, cplx z, double rel_tol) {
    require(z.imag() < 0.0, errc::domain_error,
            "free_cumulant_transform: need Im z < 0");
    return z * voiculescu(mu, 1.0 / z, rel_tol);
}

cplx remainder_cauchy(const Measure& mu, int p, cplx z) {
    require(p >= 0, errc::domain_error, "remainder_cauchy: need p >= 0");
    require(z.imag() > 0.0, errc::domain_error, "remainder_cauchy: need Im z > 0");
    if (mu.has_tail())
        require(mu.power_tail()->alpha > p, errc::moment_diverges,
                "remainder_cauchy: kernel integral needs tail index > p");
    if (mu.is_symmetric()) {
        // int f d mu = (1/2) int (f(t) + f(-t)) d stored with
        // f(-t) = (-1)^p t^(p+1) / ((-z) - t)
        const cplx k1 = kernel_raw(mu, p, z);
        const cplx k2 = kernel_raw(mu, p, -z);
        return 0.5 * (p % 2 == 0 ? k1 + k2 : k1 - k2);
    }
    return kernel_raw(mu, p, z);
}

cplx remainder_voiculescu(const Measure& mu, int p, cplx z, double rel_tol) {
    require(p >= 0, errc::domain_error, "remainder_voiculescu: need p >= 0");
    require(z.imag() > 0.0, errc::domain_error,
            "remainder_voiculescu: need Im z > 0");
    const std::vector<double> kap =
        moments_to_free_cumulants(moment_sequence(mu, p));
    // subtraction loses about |kappa_1| / |r / z^(p-1)| in relative terms;
    // the tight default inversion tolerance keeps that affordable at cone
    // heights around 1e3
    cplx acc = voiculescu(mu, z, rel_tol);
    cplx zj = 1.0;
    for (int j = 0; j < p; ++j) {
        acc -= kap[static_cast<std::size_t>(j)] * zj;
        zj /= z;
    }
    cplx zp = 1.0;
    if (p == 0) zp = 1.0 / z;
    else for (int i = 0; i < p - 1; ++i) zp *= z;
    return zp * acc;
}

std::vector<double> moment_sequence(const Measure& mu, int p) {
    require(p >= 0, errc::domain_error, "moment_sequence: need p >= 0");
    std::vector<double> m;
    m.reserve(static_cast<std::size_t>(p));
    for (int j = 1; j <= p; ++j) m.push_back(mu.moment(j));
    return m;
}

std::vector<double> moments_to_free_cumulants(const std::vector<double>& m) {
    const int n = static_cast<int>(m.size());
    require(n <= 12, errc::order_too_large,
            "cumulant conversion is capped at order 12");
    if (n == 0) return {};

    // M(x) = 1 + sum m_j x^j is fully known, so build the truncated power
    // table up front; extraction is then triangular in kappa
    std::vector<double> mm(static_cast<std::size_t>(n) + 1, 0.0);
    mm[0] = 1.0;
    for (int j = 1; j <= n; ++j) mm[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j - 1)];
    std::vector<std::vector<double>> mpow(
        static_cast<std::size_t>(n) + 1,
        std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    mpow[0][0] = 1.0;
    for (int s = 1; s <= n; ++s)
        for (int a = 0; a <= n; ++a) {
            const double pa = mpow[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(a)];
            if (pa == 0.0) continue;
            for (int b = 0; a + b <= n; ++b)
                mpow[static_cast<std::size_t>(s)][static_cast<std::size_t>(a + b)] +=
                    pa * mm[static_cast<std::size_t>(b)];
        }

    // m_t = sum_{s=1}^t kappa_s [x^(t-s)] M^s and [x^0] M^t = 1
    std::vector<double> kap(static_cast<std::size_t>(n), 0.0);
    for (int t = 1; t <= n; ++t) {
        double acc = mm[static_cast<std::size_t>(t)];
        for (int s = 1; s < t; ++s)
            acc -= kap[static_cast<std::size_t>(s - 1)] *
                   mpow[static_cast<std::size_t>(s)][static_cast<std::size_t>(t - s)];
        kap[static_cast<std::size_t>(t - 1)] = acc;
    }
    return kap;
}

std::vector<double> free_cumulants_to_moments(const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    require(n <= 12, errc::order_too_large,
            "cumulant conversion is capped at order 12");
    if (n == 0) return {};

    std::vector<double> mm(static_cast<std::size_t>(n) + 1, 0.0);
    mm[0] = 1.0;
    for (int t = 1; t <= n; ++t) {
        // powers below read only the filled prefix mm[0 .. t-1]
        double acc = 0.0;
        for (int s = 1; s <= t; ++s) {
            std::vector<double> pw(static_cast<std::size_t>(t), 0.0);
            pw[0] = 1.0;
            for (int rep = 0; rep < s; ++rep) {
                std::vector<double> nx(static_cast<std::size_t>(t), 0.0);
                for (int a = 0; a < t; ++a) {
                    const double pa = pw[static_cast<std::size_t>(a)];
                    if (pa == 0.0) continue;
                    for (int b = 0; a + b < t; ++b)
                        nx[static_cast<std::size_t>(a + b)] += pa * mm[static_cast<std::size_t>(b)];
                }
                pw.swap(nx);
            }
            acc += k[static_cast<std::size_t>(s - 1)] * pw[static_cast<std::size_t>(t - s)];
        }
        mm[static_cast<std::size_t>(t)] = acc;
    }
    return std::vector<double>(mm.begin() + 1, mm.end());
}

} // namespace freetail
