#include "freetail/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "freetail/rng.hpp"

namespace freetail {

const char* errc_name(errc c) {
    switch (c) {
    case errc::domain_error: return "domain_error";
    case errc::cone_violation: return "cone_violation";
    case errc::not_nonneg: return "not_nonneg";
    case errc::moment_diverges: return "moment_diverges";
    case errc::order_too_large: return "order_too_large";
    case errc::not_levy_measure: return "not_levy_measure";
    case errc::negative_drift: return "negative_drift";
    case errc::not_free_regular: return "not_free_regular";
    case errc::gaussian_part_present: return "gaussian_part_present";
    case errc::mean_zero: return "mean_zero";
    case errc::window_too_short: return "window_too_short";
    case errc::bad_spec: return "bad_spec";
    case errc::no_convergence: return "no_convergence";
    case errc::numerical_zero: return "numerical_zero";
    case errc::inversion_failure: return "inversion_failure";
    case errc::mass_deficit: return "mass_deficit";
    case errc::negative_density: return "negative_density";
    case errc::continuation_stuck: return "continuation_stuck";
    case errc::non_nevanlinna: return "non_nevanlinna";
    case errc::tail_vanishes: return "tail_vanishes";
    case errc::eig_failure: return "eig_failure";
    case errc::branch_cut: return "branch_cut";
    }
    return "unknown";
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double trapezoid_mass(const std::vector<double>& k, const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < k.size(); ++i)
        m += 0.5 * (v[i] + v[i + 1]) * (k[i + 1] - k[i]);
    return m;
}

// S1(w) = sum_{k>=0} w^k/(k+1), so that -log(1-w) = w S1(w)
cplx log_series_s1(cplx w) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= w;
        cplx add = term / double(k + 1);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// f(w) = w/(1-w) + log(1-w) = sum_{k>=2} w^k (k-1)/k
cplx geom_log_remainder(cplx w) {
    cplx wk = w * w, sum = 0.0;
    for (int k = 2; k < 64; ++k) {
        cplx add = wk * (double(k - 1) / double(k));
        sum += add;
        wk *= w;
        if (std::abs(add) < 1e-17 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

} // namespace

double pow_diff(double a, double b, int m) {
    if (a > 0.0) {
        double h = b - a;
        if (std::abs(h) < 0.5 * a)
            return std::pow(a, double(m)) * std::expm1(double(m) * std::log1p(h / a));
    }
    return std::pow(b, double(m)) - std::pow(a, double(m));
}

// integral of (d0 + s (t - t0)) / (z - t) over [t0, t1]; with u0 = z - t0,
// w = h/u0 this is d0 w S1(w) + s h (S1(w) - 1), and for |w| not small the
// direct form (d0 + s u0) log(u0/u1) - s h. The logs never straddle a branch
// cut: u0 and u1 share the sign of Im z, and share a real sign when z is
// real off the cell.
cplx cell_cauchy(double t0, double t1, double d0, double d1, cplx z) {
    double h = t1 - t0;
    double s = (d1 - d0) / h;
    cplx u0 = z - t0;
    cplx w = h / u0;
    if (std::abs(w) < 0.25) {
        cplx s1 = log_series_s1(w);
        return d0 * w * s1 + s * h * (s1 - 1.0);
    }
    cplx l = std::log(u0 / (z - t1));
    return (d0 + s * u0) * l - s * h;
}

// derivative in z of the cell integral above
cplx cell_cauchy_derivative(double t0, double t1, double d0, double d1, cplx z) {
    double h = t1 - t0;
    double s = (d1 - d0) / h;
    cplx u0 = z - t0, u1 = z - t1;
    cplx w = h / u0;
    if (std::abs(w) < 0.25)
        return -(d0 * h / (u0 * u1) + s * geom_log_remainder(w));
    cplx l = std::log(u0 / u1);
    return s * l - (d0 + s * u0) * h / (u0 * u1);
}

// ---------------------------------------------------------------------------
// ParetoTail

double ParetoTail::density(double t) const {
    if (t < x0) return 0.0;
    double base = c * alpha * std::pow(t, -alpha - 1.0);
    switch (weight) {
    case Weight::plain: return base;
    case Weight::sigma_of_levy: return base * (t * t) / (1.0 + t * t);
    case Weight::levy_of_sigma: return base * (1.0 + t * t) / (t * t);
    }
    return base;
}

double ParetoTail::density_derivative(double t) const {
    if (t < x0) return 0.0;
    double ca = c * alpha;
    switch (weight) {
    case Weight::plain:
        return -ca * (alpha + 1.0) * std::pow(t, -alpha - 2.0);
    case Weight::sigma_of_levy: {
        double q = 1.0 + t * t;
        return ca * std::pow(t, -alpha) * ((1.0 - alpha) - (1.0 + alpha) * t * t) / (q * q);
    }
    case Weight::levy_of_sigma:
        return ca * (-(alpha + 1.0) * std::pow(t, -alpha - 2.0)
                     - (alpha + 3.0) * std::pow(t, -alpha - 4.0));
    }
    return 0.0;
}

double ParetoTail::tail(double x) const {
    if (x < x0) x = x0;
    double plain = c * std::pow(x, -alpha);
    switch (weight) {
    case Weight::plain:
        return plain;
    case Weight::levy_of_sigma:
        return plain + c * alpha / (alpha + 2.0) * std::pow(x, -alpha - 2.0);
    case Weight::sigma_of_levy: {
        // plain minus c a int_x^inf t^(-a-1)/(1+t^2) dt
        if (x > 1.25) {
            double xm2 = 1.0 / (x * x), term = xm2, sum = 0.0;
            for (int k = 1; k <= 256; ++k) {
                double add = term / (alpha + 2.0 * k);
                sum += (k % 2 == 1) ? add : -add;
                term *= xm2;
                if (add < 1e-18 * (std::abs(sum) + 1.0)) break;
            }
            return plain - c * alpha * std::pow(x, -alpha) * sum;
        }
        double a = alpha;
        cplx rest = integrate_tail(
            [a](double t) -> cplx { return std::pow(t, -a - 1.0) / (1.0 + t * t); }, x, 1e-14);
        return plain - c * alpha * rest.real();
    }
    }
    return plain;
}

double ParetoTail::moment(int j) const {
    require(double(j) < alpha, errc::moment_diverges,
            "power tail has no finite moment at or above its index");
    double aj = alpha - double(j);
    double base = c * alpha;
    switch (weight) {
    case Weight::plain:
        return base * std::pow(x0, -aj) / aj;
    case Weight::levy_of_sigma:
        return base * (std::pow(x0, -aj) / aj + std::pow(x0, -aj - 2.0) / (aj + 2.0));
    case Weight::sigma_of_levy: {
        if (x0 > 1.25) {
            double p = std::pow(x0, -aj), x0m2 = 1.0 / (x0 * x0), sum = 0.0;
            for (int k = 0; k <= 256; ++k) {
                double add = p / (aj + 2.0 * k);
                sum += (k % 2 == 0) ? add : -add;
                p *= x0m2;
                if (add < 1e-18 * (std::abs(sum) + 1.0)) break;
            }
            return base * sum;
        }
        double a = alpha, jd = double(j);
        cplx v = integrate_tail(
            [a, jd](double t) -> cplx {
                return std::pow(t, jd - a - 1.0) * (t * t) / (1.0 + t * t);
            },
            x0, 1e-14);
        return base * v.real();
    }
    }
    return 0.0;
}

cplx ParetoTail::cauchy(cplx z) const {
    double x = z.real(), e = z.imag();
    auto f = [this, z](double t) -> cplx { return density(t) / (z - t); };
    if (x > x0 && std::abs(e) < 0.25 * (x - x0)) {
        // pole sits over the support: subtract the density value at Re z on a
        // window around it and integrate that piece in closed form
        double delta = std::min(0.5 * (x - x0), 0.25 * x);
        double rx = density(x);
        cplx left = integrate(f, x0, x - delta, 1e-12);
        double floor = 1e-15 * (std::abs(rx) + std::abs(density_derivative(x)) * delta) * delta;
        cplx mid = integrate(
            [this, z, rx](double t) -> cplx { return (density(t) - rx) / (z - t); },
            x - delta, x + delta, 1e-12, floor);
        cplx lg = rx * std::log((z - (x - delta)) / (z - (x + delta)));
        cplx right = integrate_tail(f, x + delta, 1e-12);
        return left + mid + lg + right;
    }
    return integrate_tail(f, x0, 1e-12);
}

cplx ParetoTail::cauchy_derivative(cplx z) const {
    double x = z.real(), e = z.imag();
    auto f = [this, z](double t) -> cplx {
        cplx u = z - t;
        return density(t) / (u * u);
    };
    if (x > x0 && std::abs(e) < 0.25 * (x - x0)) {
        double delta = std::min(0.5 * (x - x0), 0.25 * x);
        double rx = density(x), rpx = density_derivative(x);
        cplx ua = z - (x - delta), ub = z - (x + delta);
        cplx inv_piece = 1.0 / ub - 1.0 / ua;        // int dt/(z-t)^2
        cplx l = std::log(ua / ub);                  // int dt/(z-t)
        cplx lin_piece = -l + (z - x) * inv_piece;   // int (t-x)/(z-t)^2 dt
        cplx left = integrate(f, x0, x - delta, 1e-12);
        double floor = 1e-15 * (std::abs(rpx) * delta + std::abs(rx));
        cplx mid = integrate(
            [this, z, rx, rpx, x](double t) -> cplx {
                cplx u = z - t;
                return (density(t) - rx - rpx * (t - x)) / (u * u);
            },
            x - delta, x + delta, 1e-12, floor);
        cplx right = integrate_tail(f, x + delta, 1e-12);
        return -(left + mid + rx * inv_piece + rpx * lin_piece + right);
    }
    return -integrate_tail(f, x0, 1e-12);
}

// ---------------------------------------------------------------------------
// construction

void Measure::validate() const {
    for (const Atom& a : atoms_) {
        require(std::isfinite(a.location) && std::isfinite(a.weight), errc::domain_error,
                "atom with non finite data");
        require(a.weight >= 0.0, errc::domain_error, "negative atom weight");
    }
    require(knots_.size() == values_.size(), errc::domain_error,
            "knot and value arrays disagree in length");
    require(knots_.size() != 1, errc::domain_error, "a density grid needs at least two knots");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        require(std::isfinite(knots_[i]) && std::isfinite(values_[i]), errc::domain_error,
                "grid with non finite data");
        require(values_[i] >= 0.0, errc::domain_error, "negative density value");
        if (i > 0)
            require(knots_[i] > knots_[i - 1], errc::domain_error,
                    "grid knots must increase strictly");
    }
    if (tail_) {
        require(std::isfinite(tail_->x0) && std::isfinite(tail_->alpha) && std::isfinite(tail_->c),
                errc::domain_error, "power tail with non finite parameters");
        require(tail_->x0 > 0.0, errc::domain_error, "power tail must start at x0 > 0");
        require(tail_->alpha > 0.0, errc::domain_error,
                "power tail needs a positive index to carry finite mass");
        require(tail_->c > 0.0, errc::domain_error, "power tail needs a positive scale");
        if (!knots_.empty())
            require(tail_->x0 >= knots_.back() - 1e-9 * (std::abs(knots_.back()) + 1.0),
                    errc::domain_error, "power tail must continue beyond the grid");
    }
    for (double t : sample_)
        require(std::isfinite(t), errc::domain_error, "sample with non finite draw");
    require(sample_mass_ >= 0.0, errc::domain_error, "negative sample mass");
    require(sample_.empty() == (sample_mass_ == 0.0), errc::domain_error,
            "sample mass must accompany sample draws");
    if (support_ == Support::nonneg || support_ == Support::symmetric) {
        const char* msg = support_ == Support::nonneg
                              ? "measure declared nonnegative has support below zero"
                              : "symmetric storage must fold onto [0, inf)";
        require(raw_min_support() >= 0.0, errc::not_nonneg, msg);
    }
}

Measure Measure::compose(std::vector<Atom> atoms, std::vector<double> knots,
                         std::vector<double> values, std::optional<ParetoTail> tail,
                         std::vector<double> sample, double sample_mass, Support support) {
    Measure m;
    m.support_ = support;
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    for (const Atom& a : atoms) {
        if (a.weight == 0.0) continue;
        if (!m.atoms_.empty() && m.atoms_.back().location == a.location)
            m.atoms_.back().weight += a.weight;
        else
            m.atoms_.push_back(a);
    }
    m.knots_ = std::move(knots);
    m.values_ = std::move(values);
    m.tail_ = tail;
    std::sort(sample.begin(), sample.end());
    m.sample_ = std::move(sample);
    m.sample_mass_ = m.sample_.empty() ? 0.0 : sample_mass;
    m.validate();
    return m;
}

Measure Measure::point_mass(double location, double weight) {
    Support s = location >= 0.0 ? Support::nonneg : Support::real;
    return atomic({{location, weight}}, s);
}

Measure Measure::atomic(std::vector<Atom> atoms, Support support) {
    return compose(std::move(atoms), {}, {}, std::nullopt, {}, 0.0, support);
}

Measure Measure::gridded(std::vector<double> knots, std::vector<double> values, Support support,
                         std::optional<ParetoTail> tail) {
    return compose({}, std::move(knots), std::move(values), tail, {}, 0.0, support);
}

Measure Measure::pareto(double alpha, double x0, double c) {
    ParetoTail t;
    t.x0 = x0;
    t.alpha = alpha;
    t.c = c;
    return compose({}, {}, {}, t, {}, 0.0, Support::nonneg);
}

Measure Measure::empirical(std::vector<double> draws, Support support, double total_mass) {
    require(!draws.empty(), errc::domain_error, "empirical measure needs at least one draw");
    require(total_mass > 0.0, errc::domain_error, "empirical measure needs positive mass");
    return compose({}, {}, {}, std::nullopt, std::move(draws), total_mass, support);
}

// ---------------------------------------------------------------------------
// raw evaluators over the stored parts

double Measure::raw_mass() const {
    double m = sample_mass_;
    for (const Atom& a : atoms_) m += a.weight;
    m += trapezoid_mass(knots_, values_);
    if (tail_) m += tail_->mass();
    return m;
}

double Measure::raw_tail(double x) const {
    double m = 0.0;
    for (const Atom& a : atoms_)
        if (a.location > x) m += a.weight;
    if (!knots_.empty() && x < knots_.back()) {
        if (x < knots_.front()) {
            m += trapezoid_mass(knots_, values_);
        } else {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
            std::size_t i = std::size_t(it - knots_.begin()) - 1;
            double h = knots_[i + 1] - knots_[i];
            double fx = values_[i] + (values_[i + 1] - values_[i]) * (x - knots_[i]) / h;
            m += 0.5 * (fx + values_[i + 1]) * (knots_[i + 1] - x);
            for (std::size_t j = i + 1; j + 1 < knots_.size(); ++j)
                m += 0.5 * (values_[j] + values_[j + 1]) * (knots_[j + 1] - knots_[j]);
        }
    }
    if (tail_) m += tail_->tail(x);
    if (!sample_.empty()) {
        auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
        m += double(sample_.end() - it) * sample_mass_ / double(sample_.size());
    }
    return m;
}

double Measure::raw_density(double x) const {
    double d = 0.0;
    if (!knots_.empty() && x >= knots_.front() && x <= knots_.back()) {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        std::size_t i = it == knots_.end() ? knots_.size() - 2 : std::size_t(it - knots_.begin()) - 1;
        double h = knots_[i + 1] - knots_[i];
        d += values_[i] + (values_[i + 1] - values_[i]) * (x - knots_[i]) / h;
    }
    if (tail_) d += tail_->density(x);
    return d;
}

double Measure::raw_atom_at(double x) const {
    double w = 0.0;
    for (const Atom& a : atoms_)
        if (a.location == x) w += a.weight;
    return w;
}

double Measure::raw_moment(int j) const {
    require(j >= -1, errc::domain_error, "moments below order -1 are not provided");
    double m = 0.0;
    for (const Atom& a : atoms_) {
        if (j == -1)
            require(a.location != 0.0, errc::moment_diverges, "moment -1 with an atom at zero");
        m += a.weight * std::pow(a.location, double(j));
    }
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        double t0 = knots_[i], t1 = knots_[i + 1];
        double d0 = values_[i], d1 = values_[i + 1];
        if (d0 == 0.0 && d1 == 0.0) continue;
        double h = t1 - t0, s = (d1 - d0) / h;
        if (j == -1) {
            require(t0 > 0.0 || (t0 == 0.0 && d0 == 0.0), errc::moment_diverges,
                    "moment -1 of a density positive at zero");
            if (t0 == 0.0)
                m += s * t1;
            else
                m += (d0 - s * t0) * std::log(t1 / t0) + s * h;
        } else {
            m += (d0 - s * t0) * pow_diff(t0, t1, j + 1) / double(j + 1)
                 + s * pow_diff(t0, t1, j + 2) / double(j + 2);
        }
    }
    if (tail_) m += tail_->moment(j);
    if (!sample_.empty()) {
        double w = sample_mass_ / double(sample_.size());
        for (double t : sample_) {
            if (j == -1)
                require(t != 0.0, errc::moment_diverges, "moment -1 with a draw at zero");
            m += w * std::pow(t, double(j));
        }
    }
    return m;
}

cplx Measure::raw_cauchy(cplx z) const {
    cplx g = 0.0;
    for (const Atom& a : atoms_) g += a.weight / (z - a.location);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        if (values_[i] == 0.0 && values_[i + 1] == 0.0) continue;
        g += cell_cauchy(knots_[i], knots_[i + 1], values_[i], values_[i + 1], z);
    }
    if (tail_) g += tail_->cauchy(z);
    if (!sample_.empty()) {
        cplx s = 0.0;
        for (double t : sample_) s += 1.0 / (z - t);
        g += s * (sample_mass_ / double(sample_.size()));
    }
    return g;
}

cplx Measure::raw_cauchy_derivative(cplx z) const {
    cplx g = 0.0;
    for (const Atom& a : atoms_) {
        cplx u = z - a.location;
        g -= a.weight / (u * u);
    }
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        if (values_[i] == 0.0 && values_[i + 1] == 0.0) continue;
        g += cell_cauchy_derivative(knots_[i], knots_[i + 1], values_[i], values_[i + 1], z);
    }
    if (tail_) g += tail_->cauchy_derivative(z);
    if (!sample_.empty()) {
        cplx s = 0.0;
        for (double t : sample_) {
            cplx u = z - t;
            s -= 1.0 / (u * u);
        }
        g += s * (sample_mass_ / double(sample_.size()));
    }
    return g;
}

double Measure::raw_min_support() const {
    double m = std::numeric_limits<double>::infinity();
    if (!atoms_.empty()) m = std::min(m, atoms_.front().location);
    if (!knots_.empty()) m = std::min(m, knots_.front());
    if (!sample_.empty()) m = std::min(m, sample_.front());
    if (tail_) m = std::min(m, tail_->x0);
    return m;
}

double Measure::raw_max_support() const {
    if (tail_) return std::numeric_limits<double>::infinity();
    double m = -std::numeric_limits<double>::infinity();
    if (!atoms_.empty()) m = std::max(m, atoms_.back().location);
    if (!knots_.empty()) m = std::max(m, knots_.back());
    if (!sample_.empty()) m = std::max(m, sample_.back());
    return m;
}

// ---------------------------------------------------------------------------
// public evaluators; fold the stored |X| law when symmetric

double Measure::mass() const { return raw_mass(); }

double Measure::tail(double x) const {
    if (support_ != Support::symmetric) return raw_tail(x);
    if (x >= 0.0) return 0.5 * raw_tail(x);
    // mu((x, inf)) = mass - P(X <= x) = mass - P(|X| >= -x)/2
    return raw_mass() - 0.5 * (raw_tail(-x) + raw_atom_at(-x));
}

double Measure::density(double x) const {
    if (support_ != Support::symmetric) return raw_density(x);
    return 0.5 * raw_density(std::abs(x));
}

double Measure::atom_at(double x) const {
    if (support_ != Support::symmetric) return raw_atom_at(x);
    if (x == 0.0) return raw_atom_at(0.0);
    return 0.5 * raw_atom_at(std::abs(x));
}

double Measure::moment(int j) const {
    if (support_ != Support::symmetric) return raw_moment(j);
    require(j >= -1, errc::domain_error, "moments below order -1 are not provided");
    if (j == -1) {
        // vanishes by symmetry, but only certify absolute convergence
        require(raw_min_support() > 0.0, errc::moment_diverges,
                "moment -1 of a symmetric measure with mass near zero");
        return 0.0;
    }
    if (j % 2 == 1) return 0.0;
    return raw_moment(j);
}

double Measure::min_support() const {
    if (support_ != Support::symmetric) return raw_min_support();
    return -raw_max_support();
}

double Measure::max_support() const { return raw_max_support(); }

cplx Measure::cauchy(cplx z) const {
    if (support_ != Support::symmetric) return raw_cauchy(z);
    return 0.5 * (raw_cauchy(z) - raw_cauchy(-z));
}

cplx Measure::cauchy_derivative(cplx z) const {
    if (support_ != Support::symmetric) return raw_cauchy_derivative(z);
    return 0.5 * (raw_cauchy_derivative(z) + raw_cauchy_derivative(-z));
}

// ---------------------------------------------------------------------------
// maps

Measure Measure::dilated(double a) const {
    require(std::isfinite(a) && a != 0.0, errc::domain_error,
            "dilation scale must be finite and nonzero");
    Measure out = *this;
    if (support_ == Support::symmetric) a = std::abs(a);
    if (a < 0.0) {
        require(!tail_, errc::domain_error, "cannot reflect a power tail continuation");
        for (Atom& at : out.atoms_) at.location = -at.location;
        std::reverse(out.atoms_.begin(), out.atoms_.end());
        std::reverse(out.knots_.begin(), out.knots_.end());
        for (double& k : out.knots_) k = -k;
        std::reverse(out.values_.begin(), out.values_.end());
        for (double& t : out.sample_) t = -t;
        std::reverse(out.sample_.begin(), out.sample_.end());
        out.support_ = Support::real;
        a = -a;
    }
    for (Atom& at : out.atoms_) at.location /= a;
    for (double& k : out.knots_) k /= a;
    for (double& v : out.values_) v *= a;
    for (double& t : out.sample_) t /= a;
    if (out.tail_) {
        require(out.tail_->weight == ParetoTail::Weight::plain, errc::domain_error,
                "only plain power tails stay in the family under dilation");
        out.tail_->x0 /= a;
        out.tail_->c *= std::pow(a, -out.tail_->alpha);
    }
    return out;
}

Measure Measure::unfolded() const {
    if (support_ != Support::symmetric) return *this;
    require(!tail_, errc::domain_error, "a two sided power tail is not representable");
    std::vector<Atom> atoms;
    for (const Atom& a : atoms_) {
        if (a.location == 0.0) {
            atoms.push_back(a);
        } else {
            atoms.push_back({-a.location, 0.5 * a.weight});
            atoms.push_back({a.location, 0.5 * a.weight});
        }
    }
    std::vector<double> knots, values;
    if (!knots_.empty()) {
        bool shares_zero = knots_.front() == 0.0;
        for (std::size_t i = knots_.size(); i-- > 0;) {
            knots.push_back(-knots_[i]);
            values.push_back(0.5 * values_[i]);
        }
        std::size_t start = 0;
        if (shares_zero) {
            start = 1; // knot 0 already emitted
        } else {
            // bridge the gap through zero with a sliver of zero density
            double d = 1e-12 * (knots_.front() + 1.0);
            knots.push_back(-knots_.front() + d);
            values.push_back(0.0);
            knots.push_back(knots_.front() - d);
            values.push_back(0.0);
        }
        for (std::size_t i = start; i < knots_.size(); ++i) {
            knots.push_back(knots_[i]);
            values.push_back(0.5 * values_[i]);
        }
    }
    std::vector<double> sample;
    sample.reserve(2 * sample_.size());
    for (double t : sample_) {
        sample.push_back(-t);
        sample.push_back(t);
    }
    return compose(std::move(atoms), std::move(knots), std::move(values), std::nullopt,
                   std::move(sample), sample_mass_, Support::real);
}

Measure Measure::shifted(double b) const {
    require(std::isfinite(b), errc::domain_error, "shift must be finite");
    if (b == 0.0) return *this;
    require(!tail_, errc::domain_error, "cannot shift a power tail continuation");
    Measure out = (support_ == Support::symmetric) ? unfolded() : *this;
    for (Atom& a : out.atoms_) a.location += b;
    for (double& k : out.knots_) k += b;
    for (double& t : out.sample_) t += b;
    out.support_ = out.raw_min_support() >= 0.0 ? Support::nonneg : Support::real;
    return out;
}

Measure Measure::scaled(double factor) const {
    require(std::isfinite(factor) && factor > 0.0, errc::domain_error,
            "mass scale must be finite and positive");
    Measure out = *this;
    for (Atom& a : out.atoms_) a.weight *= factor;
    for (double& v : out.values_) v *= factor;
    if (out.tail_) out.tail_->c *= factor;
    out.sample_mass_ *= factor;
    return out;
}

Measure Measure::normalized() const {
    double m = mass();
    require(m > 1e-300, errc::numerical_zero, "cannot normalize a measure of zero mass");
    return scaled(1.0 / m);
}

void Measure::push_grid(std::vector<double>& knots, std::vector<double>& values,
                        double (*map)(double), double (*jacobian)(double)) {
    if (knots.empty()) return;
    // midpoint refinement is exact on the linear interpolant and halves the
    // model error the nonlinear knot map is about to introduce
    std::vector<double> k2, v2;
    k2.reserve(2 * knots.size());
    v2.reserve(2 * knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        k2.push_back(knots[i]);
        v2.push_back(values[i]);
        if (i + 1 < knots.size()) {
            k2.push_back(0.5 * (knots[i] + knots[i + 1]));
            v2.push_back(0.5 * (values[i] + values[i + 1]));
        }
    }
    double mass0 = trapezoid_mass(k2, v2);
    std::vector<double> k3(k2.size()), v3(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) {
        k3[i] = map(k2[i]);
        double j = jacobian(k2[i]);
        v3[i] = v2[i] / j;
        if (!std::isfinite(v3[i]) && i > 0) v3[i] = 0.0; // only the first knot may be singular
    }
    if (k3.size() > 1 && !std::isfinite(v3[0])) {
        // infinite endpoint density (e.g. the x^(-1/2) edge of a square):
        // pick the knot value that preserves the first cell mass instead
        double m1 = 0.5 * (v2[0] + v2[1]) * (k2[1] - k2[0]);
        v3[0] = std::max(0.0, 2.0 * m1 / (k3[1] - k3[0]) - v3[1]);
    }
    double mass1 = trapezoid_mass(k3, v3);
    if (mass1 > 0.0) {
        double f = mass0 / mass1;
        for (double& v : v3) v *= f;
    }
    knots = std::move(k3);
    values = std::move(v3);
}

Measure Measure::squared() const {
    require(support_ == Support::symmetric || raw_min_support() >= 0.0, errc::not_nonneg,
            "square needs a nonnegative or symmetric measure");
    Measure out = *this;
    out.support_ = Support::nonneg;
    for (Atom& a : out.atoms_) a.location *= a.location;
    for (double& t : out.sample_) t *= t;
    if (out.tail_) {
        require(out.tail_->weight == ParetoTail::Weight::plain, errc::domain_error,
                "only plain power tails stay in the family under squaring");
        out.tail_->x0 *= out.tail_->x0;
        out.tail_->alpha *= 0.5;
    }
    push_grid(out.knots_, out.values_, [](double t) { return t * t; },
              [](double t) { return 2.0 * t; });
    return out;
}

Measure Measure::sqrt_symmetric() const {
    require(support_ != Support::symmetric && raw_min_support() >= 0.0, errc::not_nonneg,
            "symmetric square root needs a measure on [0, inf)");
    Measure out = *this;
    out.support_ = Support::symmetric;
    for (Atom& a : out.atoms_) a.location = std::sqrt(a.location);
    for (double& t : out.sample_) t = std::sqrt(t);
    if (out.tail_) {
        require(out.tail_->weight == ParetoTail::Weight::plain, errc::domain_error,
                "only plain power tails stay in the family under square roots");
        out.tail_->x0 = std::sqrt(out.tail_->x0);
        out.tail_->alpha *= 2.0;
    }
    push_grid(out.knots_, out.values_, [](double t) { return std::sqrt(t); },
              [](double t) { return 0.5 / std::sqrt(t); });
    return out;
}

// ---------------------------------------------------------------------------
// sampling

std::vector<double> Measure::draws(Rng& rng, std::size_t n) const {
    double ma = 0.0;
    for (const Atom& a : atoms_) ma += a.weight;
    std::vector<double> cell_cum;
    double mg = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        mg += 0.5 * (values_[i] + values_[i + 1]) * (knots_[i + 1] - knots_[i]);
        cell_cum.push_back(mg);
    }
    double mt = tail_ ? tail_->mass() : 0.0;
    double total = ma + mg + mt + sample_mass_;
    require(total > 0.0, errc::numerical_zero, "cannot sample a measure of zero mass");

    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        double u = rng.uniform01() * total;
        double t;
        if (u < ma) {
            double acc = 0.0;
            t = atoms_.back().location;
            for (const Atom& a : atoms_) {
                acc += a.weight;
                if (u < acc) {
                    t = a.location;
                    break;
                }
            }
        } else if (u < ma + mg) {
            double r = u - ma;
            auto it = std::upper_bound(cell_cum.begin(), cell_cum.end(), r);
            std::size_t i = std::size_t(it - cell_cum.begin());
            if (i > 0) r -= cell_cum[i - 1];
            double t0 = knots_[i], h = knots_[i + 1] - t0;
            double d0 = values_[i], s = (values_[i + 1] - d0) / h;
            // invert d0 u + s u^2/2 = r on [0, h]
            double disc = d0 * d0 + 2.0 * s * r;
            double step = std::abs(s) * h > 1e-12 * (d0 + std::abs(s) * h)
                              ? (std::sqrt(std::max(0.0, disc)) - d0) / s
                              : r / d0;
            t = t0 + std::clamp(step, 0.0, h);
        } else if (u < ma + mg + mt) {
            const ParetoTail& pt = *tail_;
            for (;;) {
                t = rng.pareto(pt.alpha, pt.x0);
                if (pt.weight == ParetoTail::Weight::plain) break;
                double acc;
                if (pt.weight == ParetoTail::Weight::sigma_of_levy)
                    acc = (t * t) / (1.0 + t * t);
                else
                    acc = (1.0 + 1.0 / (t * t)) / (1.0 + 1.0 / (pt.x0 * pt.x0));
                if (rng.uniform01() < acc) break;
            }
        } else {
            std::size_t i = std::min(sample_.size() - 1,
                                     std::size_t(rng.uniform01() * double(sample_.size())));
            t = sample_[i];
        }
        if (support_ == Support::symmetric && rng.uniform01() < 0.5) t = -t;
        out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// fixtures and closed forms

double semicircle_density(double x, double variance) {
    double d = 4.0 * variance - x * x;
    return d > 0.0 ? std::sqrt(d) / (2.0 * kPi * variance) : 0.0;
}

cplx semicircle_cauchy(cplx z, double variance) {
    double r = 2.0 * std::sqrt(variance);
    // product of principal roots puts the cut exactly on [-r, r]
    cplx w = std::sqrt(z - r) * std::sqrt(z + r);
    return (z - w) / (2.0 * variance);
}

double mp_density(double x) {
    if (x <= 0.0 || x >= 4.0) return 0.0;
    return std::sqrt(x * (4.0 - x)) / (2.0 * kPi * x);
}

double mp_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 4.0) return 1.0;
    double theta = std::acos(1.0 - 0.5 * x); // x = 2 (1 - cos theta)
    return (theta + std::sin(theta)) / kPi;
}

cplx mp_cauchy(cplx z) {
    cplx w = std::sqrt(z) * std::sqrt(z - 4.0);
    return (z - w) / (2.0 * z);
}

Measure Measure::semicircle(double variance, std::size_t cells) {
    require(std::isfinite(variance) && variance > 0.0, errc::domain_error,
            "semicircle variance must be positive");
    require(cells >= 8, errc::domain_error, "fixture needs at least 8 cells");
    double r = 2.0 * std::sqrt(variance);
    std::vector<double> k(cells + 1), v(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        // edge graded knots keep the sqrt singularity of the slope resolved
        double phi = 0.5 * kPi * double(i) / double(cells);
        k[i] = r * std::sin(phi);
        v[i] = 2.0 * semicircle_density(k[i], variance); // folded law of |X|
    }
    double f = 1.0 / trapezoid_mass(k, v);
    for (double& x : v) x *= f;
    return gridded(std::move(k), std::move(v), Support::symmetric);
}

Measure Measure::marchenko_pastur(std::size_t cells) {
    require(cells >= 8, errc::domain_error, "fixture needs at least 8 cells");
    std::vector<double> k(cells + 1), v(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        double theta = kPi * double(i) / double(cells);
        k[i] = 2.0 * (1.0 - std::cos(theta));
        v[i] = mp_density(k[i]);
    }
    // the density blows up like x^(-1/2) at the left edge; pin the first
    // knot value so the first cell carries its true mass, which kills the
    // leading dipole error in the cell transforms
    v[0] = std::max(0.0, 2.0 * mp_cdf(k[1]) / (k[1] - k[0]) - v[1]);
    double f = 1.0 / trapezoid_mass(k, v);
    for (double& x : v) x *= f;
    return gridded(std::move(k), std::move(v), Support::nonneg);
}

} // namespace freetail
