#pragma once

#include <cstdlib>
#include <string>
#include <string_view>

#include "hypgrass/errors.hpp"

namespace hypgrass {

// Single tolerance profile shared by every module. Distances are in the
// sqrt(2)-normalised metric, angles in radians.
struct Tolerance {
  double eig = 1e-10;          // positive-definiteness margin, relative
  double clamp = 1e-8;         // allowed undershoot of sinh^2 below 0, relative
  double clamp_fail = 1e-6;    // beyond this the undershoot is a numerics error
  double angle_zero = 1e-9;    // principal angle treated as 0
  double isometry = 1e-8;      // form residual, relative to |M|^2
  double same_point = 1e-8;    // all angles below this => same point
  double cluster = 1e-7;       // eigenvalue multiplicity clusters
  double angle = 1e-4;         // angle checks (obtuse property etc.)
  double solver_step = 1e-9;   // projection solvers stop below this step
  double circum = 1e-12;       // circumcenter refinement stop
  double limit = 1e-6;         // successive estimates of a limit agree
  double drift = 1e-3;         // direction drift flag, radians
  int max_iter = 10000;

  Tolerance scaled(double factor) const {
    Tolerance t = *this;
    t.eig *= factor;
    t.clamp *= factor;
    t.clamp_fail *= factor;
    t.angle_zero *= factor;
    t.isometry *= factor;
    t.same_point *= factor;
    t.cluster *= factor;
    t.angle *= factor;
    t.solver_step *= factor;
    t.circum *= factor;
    t.limit *= factor;
    t.drift *= factor;
    return t;
  }
};

inline Tolerance tolerance_profile(std::string_view name) {
  if (name.empty() || name == "default") return Tolerance{};
  if (name == "strict") return Tolerance{}.scaled(0.01);
  if (name == "loose") return Tolerance{}.scaled(100.0);
  throw InvalidArgument("unknown tolerance profile '" + std::string(name) + "'");
}

// Profile from HYPGRASS_TOL_PROFILE, or default when unset.
inline std::string tolerance_profile_from_env() {
  const char* env = std::getenv("HYPGRASS_TOL_PROFILE");
  return env ? std::string(env) : std::string("default");
}

}  // namespace hypgrass
