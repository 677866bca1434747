#pragma once

#include <stdexcept>
#include <string>

namespace cpforce {

// Error taxonomy used across the library. All inherit std::runtime_error so
// callers that don't care about the category can catch one type.

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// position outside a profile's valid domain, frequency <= 0, ...
struct domain_error : error {
    using error::error;
};

// bad argument (theta out of range, t before t0, bad step size)
struct argument_error : error {
    using error::error;
};

// both Rabi frequency and detuning vanish: coupling angle undefined
struct degenerate_coupling_error : error {
    using error::error;
};

// fixed-point iteration for the self-consistent level shift did not settle
struct convergence_error : error {
    using error::error;
};

// adaptive quadrature failed to reach the requested tolerance
struct integration_error : error {
    double achieved_tolerance = 0.0;
    integration_error(const std::string& msg, double achieved)
        : error(msg), achieved_tolerance(achieved) {}
};

// closed-form expression evaluated outside its validity regime
struct regime_error : error {
    using error::error;
};

// frequency grid too coarse for the requested state or horizon
struct grid_error : error {
    using error::error;
};

// norm drift above tolerance during time evolution
struct instability_error : error {
    using error::error;
};

// kernel denominator collapsed onto the real axis
struct pole_error : error {
    using error::error;
};

}  // namespace cpforce
