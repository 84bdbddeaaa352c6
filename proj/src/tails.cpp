#include "freetail/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "freetail/errors.hpp"
#include "freetail/transforms.hpp"

namespace freetail {

namespace {

constexpr double pi = 3.14159265358979323846;

void require_grid(const std::vector<double>& x, const char* who) {
    require(!x.empty(), errc::domain_error, std::string(who) + ": empty grid");
    require(x.front() > 0.0, errc::domain_error,
            std::string(who) + ": grid must be positive");
    for (std::size_t i = 1; i < x.size(); ++i)
        require(x[i] > x[i - 1], errc::domain_error,
                std::string(who) + ": grid must be strictly increasing");
}

// rows in [begin, n) sit within the last half decade of xs
std::size_t half_decade_begin(const std::vector<double>& xs) {
    const double cut = xs.back() / std::sqrt(10.0);
    std::size_t b = 0;
    while (xs[b] < cut) ++b;
    return b;
}

} // namespace

TailReport estimate_tail_index(const Measure& mu, const std::vector<double>& x) {
    require_grid(x, "estimate_tail_index");
    require(x.size() >= 10, errc::window_too_short,
            "estimate_tail_index: need at least 10 grid rows");

    TailReport rep;
    for (double xi : x) {
        const double t = mu.tail(xi);
        if (t <= 1e-300) break; // tails are monotone, the rest of the grid is gone
        rep.x.push_back(xi);
        rep.tail.push_back(t);
    }
    require(rep.x.size() >= 10, errc::tail_vanishes,
            "estimate_tail_index: tail collapses over the grid");

    const std::size_t n = rep.x.size();
    std::vector<double> l(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
        l[i] = std::log(rep.x[i]);
        t[i] = std::log(rep.tail[i]);
    }

    // local slopes between neighbouring rows, with prefix sums so every
    // candidate window's slope variance is O(1) to evaluate
    std::vector<double> ps(n, 0.0), ps2(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double s = (t[i + 1] - t[i]) / (l[i + 1] - l[i]);
        ps[i + 1] = ps[i] + s;
        ps2[i + 1] = ps2[i] + s * s;
    }

    // widest window [a, b] with at least 10 rows, a decade of log-x extent
    // and local slope variance under 0.01
    const double min_extent = std::log(10.0);
    double best_ext = -1.0;
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t a = 0; a + 9 < n; ++a) {
        for (std::size_t b = a + 9; b < n; ++b) {
            const double ext = l[b] - l[a];
            if (ext < min_extent) continue;
            const double k = static_cast<double>(b - a);
            const double mean = (ps[b] - ps[a]) / k;
            const double var = (ps2[b] - ps2[a]) / k - mean * mean;
            if (var >= 0.01) continue;
            if (ext > best_ext) {
                best_ext = ext;
                best_a = a;
                best_b = b;
            }
        }
    }
    require(best_ext >= 0.0, errc::window_too_short,
            "estimate_tail_index: no stable window spans a decade");
    rep.window_begin = best_a;
    rep.window_end = best_b + 1;

    const std::size_t k = rep.window_end - rep.window_begin;
    double lm = 0.0, tm = 0.0;
    for (std::size_t i = best_a; i <= best_b; ++i) {
        lm += l[i];
        tm += t[i];
    }
    lm /= static_cast<double>(k);
    tm /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = best_a; i <= best_b; ++i) {
        const double dx = l[i] - lm;
        sxx += dx * dx;
        sxy += dx * (t[i] - tm);
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = best_a; i <= best_b; ++i) {
        const double r = t[i] - tm - slope * (l[i] - lm);
        ssr += r * r;
    }
    rep.index = -slope;
    rep.band = 1.96 * std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
    if (mu.sample().size() >= 50) rep.hill = hill_index(mu);
    return rep;
}

double hill_index(const Measure& sample) {
    const std::vector<double>& xs = sample.sample();
    require(!xs.empty(), errc::domain_error, "hill_index: needs an empirical sample");
    const std::size_t n = xs.size();
    require(n >= 50, errc::window_too_short, "hill_index: needs at least 50 points");

    const auto k_lo = static_cast<std::size_t>(std::pow(static_cast<double>(n), 0.45));
    const auto k_hi = std::min(n - 1, static_cast<std::size_t>(
                                          std::pow(static_cast<double>(n), 0.65)));

    // xs is sorted, so the top-k log sum grows incrementally with k
    std::vector<double> est;
    est.reserve(k_hi - k_lo + 1);
    double s = 0.0;
    for (std::size_t k = 1; k <= k_hi; ++k) {
        const double top = xs[n - k];
        if (!(top > 0.0)) break;
        s += std::log(top);
        if (k < k_lo) continue;
        const double th = xs[n - k - 1]; // threshold order statistic X_(n-k)
        if (!(th > 0.0)) break;
        const double h = s / static_cast<double>(k) - std::log(th);
        if (h > 0.0) est.push_back(1.0 / h);
    }
    require(!est.empty(), errc::tail_vanishes, "hill_index: no positive upper tail");
    std::sort(est.begin(), est.end());
    const std::size_t m = est.size();
    return m % 2 == 1 ? est[m / 2] : 0.5 * (est[m / 2 - 1] + est[m / 2]);
}

TailReport tail_ratio(const Measure& a, const Measure& b, const std::vector<double>& x) {
    require_grid(x, "tail_ratio");
    TailReport rep;
    for (double xi : x) {
        const double ta = a.tail(xi);
        const double tb = b.tail(xi);
        if (ta <= 1e-12 || tb <= 1e-12) continue;
        rep.x.push_back(xi);
        rep.tail.push_back(ta);
        rep.ratio.push_back(ta / tb);
    }
    require(rep.x.size() >= 2, errc::tail_vanishes,
            "tail_ratio: tails vanish over the grid");
    rep.window_begin = half_decade_begin(rep.x);
    rep.window_end = rep.x.size();
    double acc = 0.0;
    for (std::size_t i = rep.window_begin; i < rep.window_end; ++i) acc += rep.ratio[i];
    rep.terminal = acc / static_cast<double>(rep.window_end - rep.window_begin);
    return rep;
}

RemainderReport check_remainder_asymptotics(const Measure& mu,
                                            const RemainderCheckConfig& cfg) {
    require(cfg.p >= 0, errc::domain_error,
            "check_remainder_asymptotics: need p >= 0");
    require(cfg.alpha >= cfg.p && cfg.alpha <= cfg.p + 1, errc::domain_error,
            "check_remainder_asymptotics: need p <= alpha <= p + 1");
    require(cfg.beta > 0.0 && cfg.beta < 0.5, errc::domain_error,
            "check_remainder_asymptotics: need beta in (0, 1/2)");
    require_grid(cfg.y, "check_remainder_asymptotics");

    RemainderReport rep;
    const int p = cfg.p;
    const double al = cfg.alpha;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.boundary = al >= p + 1 - 1e-9;
    const bool at_p = al <= p + 1e-9;

    // the Im ratio picks up a log factor at alpha = p + 1, the Re ratio at
    // alpha = p > 0; neither approaches a constant there
    rep.im_constant = rep.boundary
                          ? nan
                          : -(al * pi / 2.0) / std::cos(pi * (al - p) / 2.0);
    rep.re_constant = at_p ? (p == 0 ? -1.0 : nan)
                           : -(al * pi / 2.0) / std::sin(pi * (al - p) / 2.0);

    for (double yv : cfg.y) {
        const double tl = mu.tail(yv);
        require(tl > 0.0, errc::tail_vanishes,
                "check_remainder_asymptotics: tail vanishes at a grid height");
        const cplx iy(0.0, yv);
        const cplx rg = remainder_cauchy(mu, p, iy);
        const cplx rp = remainder_voiculescu(mu, p, iy);
        const double den = std::pow(yv, p) * tl;
        rep.y.push_back(yv);
        rep.im_g.push_back(rg.imag() / den);
        rep.re_g.push_back(rg.real() / den);
        rep.im_phi.push_back(rp.imag() / den);
        rep.re_phi.push_back(rp.real() / den);
        if (rep.boundary) {
            rep.window_lo.push_back(std::abs(rg.imag()) * yv);
            rep.window_hi.push_back(std::abs(rg.imag()) *
                                    std::pow(yv, 1.0 - cfg.beta / 2.0));
        }
    }

    const std::size_t b = half_decade_begin(rep.y);
    double ia = 0.0, ra = 0.0;
    for (std::size_t i = b; i < rep.y.size(); ++i) {
        ia += rep.im_g[i];
        ra += rep.re_g[i];
    }
    const auto m = static_cast<double>(rep.y.size() - b);
    rep.im_terminal = ia / m;
    rep.re_terminal = ra / m;
    return rep;
}

MpClass classify_mp(const Measure& mu) {
    MpClass out;
    if (!mu.has_tail()) {
        // grids, atom lists and samples all have compact support
        out.p_infinite = true;
        return out;
    }
    const double al = mu.power_tail()->alpha;
    out.alpha = al;
    out.boundary = al == std::floor(al);
    // m_j is finite iff j < alpha, so the class is the last integer below
    // alpha; at integer alpha the moment m_alpha itself diverges (log)
    out.p = static_cast<int>(std::ceil(al)) - 1;
    return out;
}

} // namespace freetail
