// Deterministic random draws. Distribution code is hand-rolled on top of
// mt19937_64 so that a fixed seed reproduces byte-identical streams across
// platforms and standard library versions; std::normal_distribution and
// friends do not guarantee that.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "freetail/errors.hpp"

namespace freetail {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on [0, 1), 53 bit resolution
    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1], safe under log and negative powers
    double uniform01_pos() { return 1.0 - uniform01(); }

    // Marsaglia polar method with a cached spare
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Knuth product method; fine for the moderate rates used here
    std::uint64_t poisson(double lambda) {
        require(lambda >= 0.0 && lambda < 64.0, errc::domain_error,
                "poisson rate out of the supported range [0, 64)");
        double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01_pos();
        } while (p > limit);
        return k - 1;
    }

    // inverse cdf of the Pareto law with tail x0^alpha x^(-alpha) on [x0, inf)
    double pareto(double alpha, double x0) {
        return x0 * std::pow(uniform01_pos(), -1.0 / alpha);
    }

    double exponential() { return -std::log(uniform01_pos()); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace freetail
