// Error taxonomy shared by every module. Each failure mode the library can
// signal has a stable code; the CLI maps validation codes to exit 2 and
// numerical codes to exit 3.
#pragma once

#include <stdexcept>
#include <string>

namespace freetail {

enum class errc {
    // validation: the request itself is malformed or out of domain
    domain_error,        // argument outside the documented domain (e.g. Im z <= 0)
    cone_violation,      // point not in the certified cone region
    not_nonneg,          // operation requires a measure on [0, inf)
    moment_diverges,     // requested moment order is not finite for this measure
    order_too_large,     // combinatorial conversion beyond the supported cap
    not_levy_measure,    // nu fails the Levy admissibility checks
    negative_drift,      // eta' < 0 requested where >= 0 is required
    not_free_regular,    // (gamma, sigma) pair falls outside the free regular cone
    gaussian_part_present, // classical triplet has a != 0, outside the handled class
    mean_zero,           // S-transform route needs a factor with nonzero mean
    window_too_short,    // tail fit window has too few points / spans < 1 decade
    bad_spec,            // unparseable measure/config specification

    // numerical: the request was valid but the computation could not certify a result
    no_convergence,      // iteration exceeded its budget
    numerical_zero,      // intermediate quantity vanished beyond recovery (e.g. |G| ~ 0)
    inversion_failure,   // Stieltjes inversion could not produce a usable density
    mass_deficit,        // recovered measure lost more mass than the tolerance allows
    negative_density,    // clipped negative density mass above tolerance
    continuation_stuck,  // Newton continuation path could not reach the target point
    non_nevanlinna,      // a transform value landed on the wrong side of the real axis
    tail_vanishes,       // tail is numerically zero where a fit was requested
    eig_failure,         // eigensolver did not converge
    branch_cut,          // complex path crossed a branch cut it must not cross
};

inline bool is_validation_error(errc c) {
    switch (c) {
    case errc::domain_error:
    case errc::cone_violation:
    case errc::not_nonneg:
    case errc::moment_diverges:
    case errc::order_too_large:
    case errc::not_levy_measure:
    case errc::negative_drift:
    case errc::not_free_regular:
    case errc::gaussian_part_present:
    case errc::mean_zero:
    case errc::window_too_short:
    case errc::bad_spec:
        return true;
    default:
        return false;
    }
}

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

} // namespace freetail
