#pragma once

#include <string>

#include "ptc/sim.hpp"

namespace ptc {

// Uniform-grid trajectory CSV (default 1 ms resolution, cubic-Hermite dense
// output) with the column layout
//   t,x0,x1,...,xn[,xi1,...,xin],u0,u,gamma,V
// Time carries 9 significant digits; values carry 15.
std::string trajectory_csv(const Trajectory& traj, double dt = 1e-3);

// Solver-native rows (one per accepted step), same columns.
std::string trajectory_csv_native(const Trajectory& traj);

// Creates parent directories as needed; throws std::runtime_error on I/O
// failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ptc
