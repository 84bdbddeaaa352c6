#include "freetail/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "freetail/errors.hpp"
#include "freetail/transforms.hpp"

namespace freetail {

namespace {

// Richardson weights for the ladder (eps, eps/2, eps/4): the unique
// combination with unit mass that cancels the eps and eps^2 terms.
constexpr double kw[3] = {1.0 / 3.0, -2.0, 8.0 / 3.0};

struct Rows {
    std::vector<double> dens;   // extrapolated density
    std::vector<double> coarse; // density at ladder[0]
    std::vector<double> fine;   // density at ladder[2]
};

// reflect: for a measure on [0, inf) the Poisson kernel leaks the mass of a
// density edge at 0 across the origin, where a one sided grid cannot see it.
// Adding the mirrored evaluation g(-x + i eps) folds that wing back: on the
// grid interior the Richardson weights cancel its leading term, so only the
// edge zone is affected, and the folded density integrates to the full mass.
// The reflected pass runs with the index descending so an evaluator with
// warm starts sees -x ascending, one continuous chain per row.
Rows evaluate_rows(const std::function<cplx(cplx)>& g,
                   const std::vector<double>& x,
                   const std::array<double, 3>& eps, bool reflect) {
    constexpr double pi = 3.14159265358979323846;
    Rows r;
    r.dens.assign(x.size(), 0.0);
    r.coarse.assign(x.size(), 0.0);
    r.fine.assign(x.size(), 0.0);
    for (int j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = -g(cplx(x[i], eps[j])).imag() / pi;
            r.dens[i] += kw[j] * d;
            if (j == 0) r.coarse[i] = d;
            if (j == 2) r.fine[i] = d;
        }
        if (!reflect) continue;
        for (std::size_t i = x.size(); i-- > 0;) {
            if (x[i] == 0.0) continue; // its own mirror image
            const double d = -g(cplx(-x[i], eps[j])).imag() / pi;
            r.dens[i] += kw[j] * d;
            if (j == 0) r.coarse[i] += d;
            if (j == 2) r.fine[i] += d;
        }
    }
    return r;
}

struct AtomFit {
    double location = 0.0;
    double weight = 0.0;
};

// Location from the argmax of the finest-ladder density on a local grid of
// pitch eps0/10, sharpened by a parabolic vertex through the top three
// samples (exact for the symmetric Lorentzian peak, and the later
// subtraction needs the location to much better than the sample pitch).
// Weight from w(eps) = eps * (-Im G) extrapolated to eps = 0 through the
// values at eps and 2 eps; the smooth background enters w(eps) linearly
// and drops out.
AtomFit refine_atom(const std::function<cplx(cplx)>& g, double seed, double lo,
                    const std::array<double, 3>& eps) {
    const double e0 = eps[0];
    const double ef = eps[2];
    const double a = std::max(lo, seed - 8.0 * e0);
    const double b = seed + 8.0 * e0;
    const double h = e0 / 10.0;
    const int n = static_cast<int>(std::floor((b - a) / h)) + 1;
    std::vector<double> d(static_cast<std::size_t>(n));
    int k = 0;
    for (int i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i)] =
            -g(cplx(a + h * static_cast<double>(i), ef)).imag();
        if (d[static_cast<std::size_t>(i)] > d[static_cast<std::size_t>(k)])
            k = i;
    }
    double loc = a + h * static_cast<double>(k);
    if (k > 0 && k + 1 < n) {
        const double dm = d[static_cast<std::size_t>(k - 1)];
        const double d0 = d[static_cast<std::size_t>(k)];
        const double dp = d[static_cast<std::size_t>(k + 1)];
        const double den = dm - 2.0 * d0 + dp;
        if (den < 0.0) loc += 0.5 * h * (dm - dp) / den;
    }
    const double w1 = ef * (-g(cplx(loc, ef)).imag());
    const double w2 = 2.0 * ef * (-g(cplx(loc, 2.0 * ef)).imag());
    return AtomFit{loc, 2.0 * w1 - w2};
}

// Ladder response of a point mass, to be subtracted from the extrapolated
// density once the atom is booked separately.
double atom_ladder_density(double weight, double dist,
                           const std::array<double, 3>& eps) {
    constexpr double pi = 3.14159265358979323846;
    double acc = 0.0;
    for (int j = 0; j < 3; ++j)
        acc += kw[j] * eps[j] / (dist * dist + eps[j] * eps[j]);
    return weight * acc / pi;
}

struct TailFit {
    double alpha = 0.0;
    double amplitude = 0.0; // density ~ amplitude * x^(-alpha - 1)
};

// Log-log least squares on the last decade of the grid. The variance of the
// slope estimate gates acceptance: a noisy or curved window does not
// determine a power.
TailFit fit_tail_window(const std::vector<double>& x,
                        const std::vector<double>& dens, double var_tol) {
    const double hi = x.back();
    const double lo = hi / 10.0;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo) continue;
        if (dens[i] <= 0.0) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(dens[i]));
    }
    require(lx.size() >= 8, errc::window_too_short,
            "tail fit: too few positive densities in the last decade");
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    require(sxx > 0.0, errc::window_too_short, "tail fit: degenerate window");
    const double slope = sxy / sxx;
    const double icept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - slope * lx[i] - icept;
        rss += r * r;
    }
    const double slope_var = rss / (n - 2.0) / sxx;
    require(slope_var <= var_tol, errc::window_too_short,
            "tail fit: slope not determined by the last decade");
    const double alpha = -slope - 1.0;
    require(alpha > 0.0, errc::tail_vanishes,
            "tail fit: fitted slope has no power tail");
    return TailFit{alpha, std::exp(icept)};
}

} // namespace

InversionConfig InversionConfig::linear(double lo, double hi,
                                        std::size_t cells) {
    require(hi > lo && cells >= 16, errc::domain_error,
            "inversion grid: need hi > lo and at least 16 cells");
    InversionConfig c;
    c.grid.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        c.grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                             static_cast<double>(cells);
    return c;
}

InversionConfig InversionConfig::logarithmic(double lo, double hi,
                                             std::size_t cells) {
    require(lo > 0.0 && hi > lo && cells >= 16, errc::domain_error,
            "inversion grid: need hi > lo > 0 and at least 16 cells");
    InversionConfig c;
    c.grid.resize(cells + 1);
    const double step = std::log(hi / lo) / static_cast<double>(cells);
    for (std::size_t i = 0; i <= cells; ++i)
        c.grid[i] = lo * std::exp(step * static_cast<double>(i));
    c.grid.back() = hi;
    return c;
}

Measure stieltjes_invert(const std::function<cplx(cplx)>& g,
                         const InversionConfig& cfg) {
    const std::vector<double>& x = cfg.grid;
    require(x.size() >= 16, errc::domain_error, "inversion: grid too small");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        require(x[i] < x[i + 1], errc::domain_error,
                "inversion: grid must be strictly increasing");
    require(cfg.ladder[0] > cfg.ladder[1] && cfg.ladder[1] > cfg.ladder[2] &&
                cfg.ladder[2] > 0.0,
            errc::domain_error, "inversion: ladder must descend to 0");
    const bool fold = cfg.support == Support::symmetric;
    if (cfg.support != Support::real)
        require(x.front() >= 0.0, errc::domain_error,
                "inversion: grid must start at x >= 0 for this support");

    const bool reflect = cfg.support == Support::nonneg;
    Rows rows = evaluate_rows(g, x, cfg.ladder, reflect);
    const double e0 = cfg.ladder[0];
    const double ef = cfg.ladder[2];

    // the evaluator the atom machinery sees must match the row convention
    std::function<cplx(cplx)> gr = g;
    if (reflect)
        gr = [&g](cplx z) {
            if (z.real() == 0.0) return g(z);
            return g(z) + g(cplx(-z.real(), z.imag()));
        };

    // Atom sweep, two stages. A knot can miss an atom by up to half the grid
    // pitch, which on coarse grids is wider than the finest ladder kernel,
    // so no single knot criterion is reliable. Stage one is a permissive
    // seed: a local maximum of the coarsest row (the widest kernel, hence
    // the most pitch tolerant) that dominates its 3 eps0 ring and whose
    // worst offset implied mass clears half the floor. Stage two refines the
    // peak location off grid and applies the ladder ratio there, where the
    // fine kernel is actually centered: a point mass shows the full ratio 4,
    // an integrable x^(-1/2) edge stays near 2, and 2.4 separates them.
    std::vector<Atom> atoms;
    if (cfg.detect_atoms) {
        constexpr double pi = 3.14159265358979323846;
        const double e1 = cfg.ladder[0];
        std::vector<double> seeds;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (2.0 * pi * e1 * rows.coarse[i] < 0.5 * cfg.atom_mass_floor)
                continue;
            if (i > 0 && rows.coarse[i] < rows.coarse[i - 1]) continue;
            if (i + 1 < x.size() && rows.coarse[i] <= rows.coarse[i + 1])
                continue;
            double ring = 0.0;
            for (std::size_t k = i; k-- > 0;)
                if (x[i] - x[k] >= 3.0 * e1) {
                    ring = std::max(ring, rows.coarse[k]);
                    break;
                }
            for (std::size_t k = i + 1; k < x.size(); ++k)
                if (x[k] - x[i] >= 3.0 * e1) {
                    ring = std::max(ring, rows.coarse[k]);
                    break;
                }
            if (rows.coarse[i] < 2.0 * ring) continue;
            seeds.push_back(x[i]);
        }
        const double lo_clamp =
            cfg.support == Support::real ? -1e308 : 0.0;
        std::vector<double> row_weights; // what the rows actually saw
        for (double s : seeds) {
            AtomFit fit = refine_atom(gr, s, lo_clamp, cfg.ladder);
            bool dup = false;
            for (const Atom& a : atoms)
                if (std::abs(fit.location - a.location) <= 3.0 * e1) dup = true;
            if (dup) continue;
            const double fine_at = -gr(cplx(fit.location, ef)).imag() / pi;
            const double coarse_at = -gr(cplx(fit.location, e1)).imag() / pi;
            if (fine_at <= 2.4 * coarse_at) continue; // continuous feature
            // an atom pinned at the origin is its own reflection: the rows
            // carry its spike twice, the measure books it once
            const bool mirrored = reflect && fit.location <= ef;
            const double booked = mirrored ? 0.5 * fit.weight : fit.weight;
            if (booked >= cfg.atom_mass_floor) {
                atoms.push_back(Atom{fit.location, booked});
                row_weights.push_back(fit.weight);
            }
        }
        for (std::size_t ai = 0; ai < atoms.size(); ++ai)
            for (std::size_t k = 0; k < x.size(); ++k)
                rows.dens[k] -= atom_ladder_density(
                    row_weights[ai], x[k] - atoms[ai].location, cfg.ladder);
    }

    // fold to the law of |X|: grid and atom mass double, an atom pinned at
    // the origin keeps its weight
    if (fold) {
        for (double& d : rows.dens) d *= 2.0;
        for (Atom& a : atoms)
            if (a.location > ef) a.weight *= 2.0;
    }

    // clip accounting outside +-6 eps0 atom windows; inside them the
    // Lorentzian subtraction is entitled to small negative residue
    double clipped = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rows.dens[i] >= 0.0) continue;
        bool shielded = false;
        for (const Atom& a : atoms)
            if (std::abs(x[i] - a.location) <= 6.0 * e0) shielded = true;
        if (!shielded && rows.dens[i] < -1e-8) {
            const double dl = i > 0 ? 0.5 * (x[i] - x[i - 1]) : 0.0;
            const double dr = i + 1 < x.size() ? 0.5 * (x[i + 1] - x[i]) : 0.0;
            clipped += -rows.dens[i] * (dl + dr);
        }
        rows.dens[i] = 0.0;
    }
    require(clipped <= cfg.clip_tol, errc::negative_density,
            "inversion: clipped negative mass above tolerance");

    std::optional<ParetoTail> tail;
    if (cfg.fit_tail) {
        const TailFit fit = fit_tail_window(x, rows.dens, cfg.slope_var_tol);
        ParetoTail t;
        t.x0 = x.back();
        t.alpha = fit.alpha;
        t.c = fit.amplitude / fit.alpha;
        tail = t;
    }

    Measure out = Measure::compose(atoms, x, rows.dens, tail, {}, 0.0,
                                   cfg.support);
    if (cfg.expected_mass > 0.0)
        require(out.mass() >= cfg.mass_floor * cfg.expected_mass,
                errc::mass_deficit, "inversion: recovered mass fell short");
    return out;
}

cplx cauchy_from_phi(const std::function<cplx(cplx)>& phi,
                     const std::function<cplx(cplx)>& phi_derivative, cplx w,
                     double rel_tol, const cplx* warm) {
    auto h = [&phi](cplx z) { return z + phi(z); };
    auto hp = [&phi_derivative](cplx z) { return 1.0 + phi_derivative(z); };
    const cplx z = invert_nevanlinna(h, hp, w, rel_tol * (1.0 + std::abs(w)), warm);
    return 1.0 / z;
}

Measure invert_from_phi(const std::function<cplx(cplx)>& phi,
                        const std::function<cplx(cplx)>& phi_derivative,
                        const InversionConfig& cfg) {
    cplx last;
    bool has_last = false;
    auto geval = [&](cplx w) -> cplx {
        auto h = [&phi](cplx z) { return z + phi(z); };
        auto hp = [&phi_derivative](cplx z) { return 1.0 + phi_derivative(z); };
        const cplx z = invert_nevanlinna(h, hp, w,
                                         cfg.phi_rel_tol * (1.0 + std::abs(w)),
                                         has_last ? &last : nullptr);
        last = z;
        has_last = true;
        return 1.0 / z;
    };
    return stieltjes_invert(geval, cfg);
}

} // namespace freetail
