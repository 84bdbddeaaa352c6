// Finite positive measures on the real line. A Measure is a sum of up to
// four parts: point atoms, a piecewise linear density on a knot grid, a
// Pareto-type continuation of the density beyond the grid, and an empirical
// sample cloud carrying equal weights. Any subset of parts may be populated;
// the file and CLI schemas name the single-part cases.
//
// Symmetric measures are stored folded: the parts describe the law of |X|
// at full mass, and every evaluator unfolds on the fly. Folding keeps the
// square and symmetric square root maps exact on atoms and power tails,
// which the multiplicative convolution pipeline depends on.
//
// Cauchy transforms of the grid part are evaluated cell by cell with closed
// forms for the linear interpolant, so the only error against the stored
// density is rounding. cauchy() is valid for Im z != 0 and for real z away
// from the support.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "freetail/quadrature.hpp"

namespace freetail {

class Rng;

enum class Support { nonneg, symmetric, real };

// Density weight(t) * c * alpha * t^(-alpha-1) on [x0, inf). The plain
// variant is the Pareto law scaled to tail mass c * x^(-alpha). The other
// two carry the exact density factors of the Levy <-> sigma conversions,
//   sigma_of_levy : t^2 / (1 + t^2)
//   levy_of_sigma : (1 + t^2) / t^2
// so those conversions stay closed under this representation instead of
// being smeared onto a grid.
struct ParetoTail {
    enum class Weight { plain, sigma_of_levy, levy_of_sigma };

    double x0 = 1.0;
    double alpha = 1.0;
    double c = 1.0;
    Weight weight = Weight::plain;

    double density(double t) const;       // 0 for t < x0
    double density_derivative(double t) const;
    double tail(double x) const;          // mass of (max(x, x0), inf)
    double mass() const { return tail(x0); }
    double moment(int j) const;           // finite iff j < alpha
    cplx cauchy(cplx z) const;
    cplx cauchy_derivative(cplx z) const;
};

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

class Measure {
public:
    Measure() = default;

    static Measure point_mass(double location, double weight = 1.0);
    static Measure atomic(std::vector<Atom> atoms, Support support = Support::nonneg);
    // knots strictly increasing, values >= 0, linear between knots
    static Measure gridded(std::vector<double> knots, std::vector<double> values,
                           Support support = Support::nonneg,
                           std::optional<ParetoTail> tail = std::nullopt);
    static Measure pareto(double alpha, double x0, double c);
    static Measure empirical(std::vector<double> draws, Support support = Support::nonneg,
                             double total_mass = 1.0);
    static Measure compose(std::vector<Atom> atoms, std::vector<double> knots,
                           std::vector<double> values, std::optional<ParetoTail> tail,
                           std::vector<double> sample, double sample_mass, Support support);

    // grid fixtures; their transforms also exist in closed form below
    static Measure semicircle(double variance = 1.0, std::size_t cells = 2000);
    static Measure marchenko_pastur(std::size_t cells = 4000);

    double mass() const;
    double moment(int j) const;          // j >= -1; throws moment_diverges when infinite
    double tail(double x) const;         // mu((x, inf))
    double cdf(double x) const { return mass() - tail(x); }
    double density(double x) const;      // continuous part only
    double atom_at(double x) const;

    double min_support() const;
    double max_support() const;          // +inf when a power tail is present

    cplx cauchy(cplx z) const;
    cplx cauchy_derivative(cplx z) const;

    // D_a mu (S) = mu(aS): locations scale by 1/a, tails obey
    // tail(dilated(a), x) = tail(a x)
    Measure dilated(double a) const;
    Measure shifted(double b) const;     // not available with a power tail
    Measure scaled(double factor) const; // total mass times factor
    Measure normalized() const;
    Measure squared() const;             // pushforward of t -> t^2 (nonneg or symmetric)
    Measure sqrt_symmetric() const;      // symmetric square root of a measure on [0, inf)

    std::vector<double> draws(Rng& rng, std::size_t n) const;

    Support support_type() const { return support_; }
    bool is_symmetric() const { return support_ == Support::symmetric; }
    bool has_tail() const { return tail_.has_value(); }
    const std::optional<ParetoTail>& power_tail() const { return tail_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& sample() const { return sample_; }
    double sample_mass() const { return sample_mass_; }

private:
    // part data; describes |X| at full mass when support_ == symmetric
    std::vector<Atom> atoms_;
    std::vector<double> knots_, values_;
    std::optional<ParetoTail> tail_;
    std::vector<double> sample_;
    double sample_mass_ = 0.0;
    Support support_ = Support::real;

    void validate() const;
    Measure unfolded() const;            // symmetric -> explicit two sided rep

    // evaluators over the stored parts, no folding
    double raw_mass() const;
    double raw_tail(double x) const;
    double raw_density(double x) const;
    double raw_moment(int j) const;
    double raw_atom_at(double x) const;
    cplx raw_cauchy(cplx z) const;
    cplx raw_cauchy_derivative(cplx z) const;
    double raw_min_support() const;
    double raw_max_support() const;

    // nonlinear pushforward of the grid part: midpoint refinement, knot map,
    // jacobian on values, then a mass-exact rescale of the values
    static void push_grid(std::vector<double>& knots, std::vector<double>& values,
                          double (*map)(double), double (*jacobian)(double));
};

// closed form transforms backing the fixtures and the reference tests
cplx semicircle_cauchy(cplx z, double variance = 1.0);
double semicircle_density(double x, double variance = 1.0);
cplx mp_cauchy(cplx z);
double mp_density(double x);
double mp_cdf(double x);

// exact closed forms for one grid cell with density d0 + s (t - t0); the
// series branch keeps full relative precision when |z - t0| >> t1 - t0
cplx cell_cauchy(double t0, double t1, double d0, double d1, cplx z);
cplx cell_cauchy_derivative(double t0, double t1, double d0, double d1, cplx z);

// b^m - a^m without cancellation for b near a > 0
double pow_diff(double a, double b, int m);

} // namespace freetail
