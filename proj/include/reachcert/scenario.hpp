#pragma once

#include "reachcert/planner.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reachcert {

struct ScenarioMetadata {
  double kappa0 = 0.0;
  double kappa_ratio = 0.0;  // max kappa along the line / kappa0
  double min_lambda = 0.0;   // smallest certified half-width along the line
  double est_steps = 0.0;    // ||goal - start|| / (alpha * min_lambda)
  std::uint64_t seed = 0;    // per-candidate RNG seed
};

struct Scenario {
  std::string id;
  RobotModel model{{1.0, 0.8, 0.6}};
  JointConfig theta0;
  CartesianPoint goal = CartesianPoint::Zero();
  std::vector<Obstacle> obstacles;
  double delta = 0.0;  // uniform per-step joint bound
  ScenarioMetadata meta;

  [[nodiscard]] JointBounds bounds() const { return JointBounds::uniform(model.dof(), delta); }
  [[nodiscard]] CartesianPoint start() const { return forward_kinematics(model, theta0); }
};

struct GeneratorConfig {
  double kappa0_min = 2.5;
  double kappa0_max = 8.0;
  double kappa_ratio_min = 1.6;
  double kappa_ratio_max = 2.0;  // sampler shaping; keeps paths off singular regions
  double est_steps_max = 500.0;
  int path_samples = 20;   // intervals along the line; samples = path_samples + 1
  int track_substeps = 8;  // first-order IK substeps between samples
  double goal_dist_min = 0.15;
  double goal_dist_max = 0.45;
  double obstacle_jitter = 0.01;
  double obstacle_radius = 0.015;
  double safety_margin = 0.008;
  double workspace_inner = 0.3;   // |z0| lower bound (m)
  double workspace_margin = 0.1;  // |z0| <= reach - margin
  double detour_offset = 0.01;   // detour arc radius beyond the inflated obstacle (m)
  double detour_spacing = 0.004; // arc sample spacing (m)
  int attempt_cap = 50000;
  int threads = 0;  // 0: hardware concurrency
  PlannerConfig planner;
};

/// Outcome of the five acceptance filters for one candidate.
struct FilterReport {
  bool kappa0_ok = false;
  bool ratio_ok = false;
  bool lambda_ok = false;
  bool steps_ok = false;
  bool vanilla_violates = false;
  ScenarioMetadata meta;

  [[nodiscard]] bool accepted() const {
    return kappa0_ok && ratio_ok && lambda_ok && steps_ok && vanilla_violates;
  }
};

/// Straight-line task path tracked with first-order IK steps. Returns the
/// configurations at the path_samples + 1 equispaced sample points, or an
/// empty vector if tracking hits a singularity.
std::vector<JointConfig> track_line(const RobotModel& model, const JointConfig& theta0,
                                    const CartesianPoint& goal, int samples, int substeps);

/// SplitMix64 finalizer; used to derive independent RNG streams from one seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Cartesian tracking residual above which a target counts as unreachable.
inline constexpr double kTrackTolerance = 1e-6;

/// Tracks the polyline theta0 -> targets[0] -> targets[1] ... with first-order
/// IK substeps no longer than `max_substep`. Returns one configuration per
/// target, or an empty vector on a singularity or a tracking residual above
/// kTrackTolerance.
std::vector<JointConfig> track_points(const RobotModel& model, const JointConfig& theta0,
                                      const std::vector<CartesianPoint>& targets, double max_substep);

/// Arc of the circle (center, radius) cut by the start-goal segment, traversed
/// from the entry point to the exit point in the given direction. Empty if the
/// segment misses the circle.
std::vector<CartesianPoint> detour_arc(const CartesianPoint& start, const CartesianPoint& goal,
                                       const CartesianPoint& center, double radius,
                                       Circulation circulation, double spacing);

/// Runs filters (i)-(iv) and, if `run_vanilla`, filter (v). Stops at the first
/// failing filter. Filter (iii) covers the line samples and the detour arc
/// around each obstacle the line crosses.
FilterReport evaluate_filters(const Scenario& s, const GeneratorConfig& cfg, bool run_vanilla = true);

struct GenerationResult {
  std::vector<Scenario> scenarios;
  int attempts = 0;
  bool shortfall = false;  // attempt cap hit before `count` acceptances
};

/// Rejection sampler. Candidate k draws from its own RNG stream derived from
/// (seed, k), so the output does not depend on the thread count.
GenerationResult generate_scenarios(const RobotModel& model, double delta, int count,
                                    std::uint64_t seed, const GeneratorConfig& cfg = {});

/// Draws candidate k of a stream (before filtering).
Scenario sample_candidate(const RobotModel& model, double delta, std::uint64_t seed,
                          std::uint64_t index, const GeneratorConfig& cfg);

void save_scenarios(const std::vector<Scenario>& scenarios, const std::filesystem::path& path);

/// Parses a scenario file. Invariant breaches (e.g. kappa0 outside the
/// acceptance band) are reported through `warnings`, not rejected.
std::vector<Scenario> load_scenarios(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr);

}  // namespace reachcert
