#pragma once

#include "svem/assembly.hpp"

namespace svem {

/// The semilinear problem u_t - eps*Lap(u) + f(u) = g with homogeneous
/// Neumann data. `exact` is set for manufactured scenarios only.
struct ProblemSpec {
    ScalarFunction f;
    ScalarFunction f_prime;
    double lipschitz = 0.0;  // L_f (a local bound for locally Lipschitz f)
    double eps = 1.0;
    SpaceTimeFunction source;  // empty means g = 0
    SpatialFunction u0;
    SpaceTimeFunction exact;   // empty when not manufactured

    bool has_source() const { return static_cast<bool>(source); }
    bool has_exact() const { return static_cast<bool>(exact); }
};

}  // namespace svem
