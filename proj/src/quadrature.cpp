#include "freetail/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "freetail/errors.hpp"

namespace freetail {
namespace {

// Kronrod 15-point abscissae on [-1, 1]; the 7-point Gauss nodes are the
// odd-indexed entries.
constexpr double xgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};

constexpr double wgk[8] = {
    0.022935322010529224, 0.063092092629978553, 0.10479001032225018,
    0.14065325971552592,  0.16900472663926790,  0.19035057806478540,
    0.20443294007529889,  0.20948214108472782};

constexpr double wg[4] = {
    0.12948496616886969, 0.27970539148927664,
    0.38183005050511894, 0.41795918367346938};

struct Interval {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

Interval eval_panel(const std::function<cplx(double)>& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);

    cplx fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * xgk[i]);
        fv[14 - i] = f(c + h * xgk[i]);
    }
    fv[7] = f(c);

    cplx resk = wgk[7] * fv[7];
    cplx resg = wg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        resk += wgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) resg += wg[i / 2] * (fv[i] + fv[14 - i]);
    }
    resk *= h;
    resg *= h;

    // QUADPACK-style error model: scale the raw Kronrod-Gauss gap by the
    // panel's own variation so smooth panels are not over-refined.
    const cplx mean = resk / (b - a);
    double resasc = wgk[7] * std::abs(fv[7] - mean);
    for (int i = 0; i < 7; ++i)
        resasc += wgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
    resasc *= std::abs(h);

    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));

    return {a, b, resk, err};
}

} // namespace

PanelResult gk15_panel(const std::function<cplx(double)>& f, double a, double b) {
    Interval iv = eval_panel(f, a, b);
    return {iv.value, iv.error};
}

cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               double rel_tol, double abs_tol) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, rel_tol, abs_tol);

    constexpr int max_intervals = 4000;
    const double min_width = 1e-15 * (std::abs(a) + std::abs(b) + 1.0);

    std::priority_queue<Interval> active;
    active.push(eval_panel(f, a, b));
    cplx total = active.top().value;
    double total_err = active.top().error;

    // Panels narrower than min_width are at the resolution limit; their error
    // estimate is kept in the budget but they are no longer split.
    double frozen_err = 0.0;
    cplx frozen_val = 0.0;
    int n = 1;

    while (true) {
        double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (total_err + frozen_err <= tol) break;
        if (active.empty() || n >= max_intervals)
            fail(errc::no_convergence, "integrate: interval budget exhausted");

        Interval worst = active.top();
        active.pop();
        total -= worst.value;
        total_err -= worst.error;

        if (worst.b - worst.a < min_width) {
            frozen_val += worst.value;
            frozen_err += worst.error;
            if (frozen_err > std::max(abs_tol, rel_tol * std::abs(total + frozen_val)))
                fail(errc::no_convergence,
                     "integrate: tolerance unreachable at machine resolution");
            continue;
        }

        double m = 0.5 * (worst.a + worst.b);
        Interval left = eval_panel(f, worst.a, m);
        Interval right = eval_panel(f, m, worst.b);
        total += left.value + right.value;
        total_err += left.error + right.error;
        active.push(left);
        active.push(right);
        ++n;
    }
    return total + frozen_val;
}

cplx integrate_tail(const std::function<cplx(double)>& f, double a,
                    double rel_tol) {
    require(a > 0.0, errc::domain_error, "integrate_tail: need a > 0");

    constexpr int max_blocks = 4000;
    cplx sum = 0.0;
    int quiet = 0;
    double lo = a;
    for (int k = 0; k < max_blocks; ++k) {
        double hi = 2.0 * lo;
        // Per-block tolerance is anchored to the running sum so far-out blocks
        // are not resolved beyond what the total needs.
        double abs_tol = 0.125 * rel_tol * std::abs(sum);
        cplx block = integrate(f, lo, hi, 0.25 * rel_tol, abs_tol);
        sum += block;
        if (std::abs(block) <= 0.25 * rel_tol * std::abs(sum)) {
            if (++quiet >= 3) return sum;
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    fail(errc::no_convergence, "integrate_tail: block budget exhausted");
}

} // namespace freetail
