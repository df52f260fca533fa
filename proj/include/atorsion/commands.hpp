#pragma once

#include <ostream>
#include <string>

#include "atorsion/config.hpp"

namespace atorsion {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitTolerance = 3;

/// Runs one subcommand (spectrum, theta, zeta, torsion, anomaly, converge,
/// selftest) and returns the process exit code. Diagnostics go to log.
int run(const std::string& subcommand, const RunConfig& config, std::ostream& log);

}  // namespace atorsion
