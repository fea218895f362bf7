#pragma once

#include "reachcert/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace reachcert {

/// Writes four SVG figures for one run into `dir`:
///   <prefix>_path.svg      Cartesian path, obstacles, lambda* boxes, violation segments
///   <prefix>_joint_step.svg  max |dtheta_i| per step against the bound
///   <prefix>_lambda_kappa.svg  lambda* and kappa(J) per step
///   <prefix>_distance.svg  distance to goal per step and sampled arm poses
/// Every data series is a <polyline> tagged with data-series and data-points.
std::vector<std::filesystem::path> emit_plots(const RunResult& result, const Scenario& scenario,
                                              const std::filesystem::path& dir,
                                              const std::string& prefix);

}  // namespace reachcert
