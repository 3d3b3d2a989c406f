#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coordfeas/sim.hpp"

namespace coordfeas {

// Trajectory CSV column names in emission order: t, per-vehicle states
// (x_i, y_i, theta_i[, phi_i]), per-vehicle controls (u_i_1..u_i_l),
// per-constraint residuals (g_<k>_<label>), activation flags (a_<k>_<label>),
// then weight columns w_1..w_W with W the fleet's control-channel total.
std::vector<std::string> csv_columns(const Scenario& s);

// One row per sample; %.17g number cells, LF line endings, NaN as an empty
// cell. Open the stream in binary mode to keep the bytes platform-stable.
void write_csv(std::ostream& os, const Scenario& s, const TrajectoryLog& log);

// JSON run summary: completion status, per-side residual ranges, event
// counts, wall time, library version, and the scenario digest.
std::string report_json(const Scenario& s, const TrajectoryLog& log,
                        double wall_seconds, const std::string& digest);

}  // namespace coordfeas
