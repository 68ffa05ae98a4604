#pragma once

#include <string>

#include <Eigen/Core>

#include "cellid/types.hpp"

namespace cellid {

/// Why a simulation stopped.
enum class Termination { profile_end, v_min, v_max, invalid };

const char* to_string(Termination t);
Termination termination_from_string(const std::string& s);

/// A named, uniformly sampled current input [A]. Positive current charges
/// the cell (lithiates the negative electrode).
struct CurrentProfile {
  std::string name;
  double dt = 1.0; // [s]
  Eigen::VectorXd current;

  Eigen::Index size() const { return current.size(); }
  void validate() const {
    if (!(dt > 0.0)) throw ValidationError("profile.dt: must be > 0");
    if (current.size() == 0) throw ValidationError("profile: must be non-empty");
  }
};

/// A simulated (or loaded) time/current/voltage record.
struct Trace {
  std::string profile_name;
  double dt = 1.0; // [s]
  Eigen::VectorXd time;    // [s], uniform spacing dt
  Eigen::VectorXd current; // [A]
  Eigen::VectorXd voltage; // [V]
  Termination termination = Termination::profile_end;

  Eigen::Index size() const { return time.size(); }
};

} // namespace cellid
