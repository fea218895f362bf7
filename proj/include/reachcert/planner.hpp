#pragma once

#include "reachcert/certifier.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reachcert {

struct Obstacle {
  CartesianPoint center = CartesianPoint::Zero();
  double radius = 0.015;
  double safety_margin = 0.008;

  [[nodiscard]] double inflated_radius() const { return radius + safety_margin; }
  [[nodiscard]] bool contains(const CartesianPoint& p, double extra = 0.0) const;
};

/// True iff the closed segment a-b touches the disc of radius r around c.
bool segment_hits_disc(const CartesianPoint& a, const CartesianPoint& b, const CartesianPoint& c,
                       double r);

enum class Mode { GoToGoal, BoundaryFollow };
enum class Circulation { CounterClockwise, Clockwise };
enum class Termination { Goal, Budget, Infeasible, Singular };

std::string to_string(Mode m);
std::string to_string(Termination t);
std::string to_string(Circulation c);

struct PlannerConfig {
  double alpha = 0.75;
  double eps_tol = 0.005;
  double eps_min = 1e-6;
  double rho0 = 0.008;
  int rho_retries = 3;
  int max_steps = 600;          // certified planner
  int vanilla_max_steps = 500;  // clipping baseline
  double fd_step = kDefaultFdStep;
  int bisect_iters = 50;
  int error_grid_side = kDefaultErrorGrid;
  double scaleback = 0.9;
  Circulation circulation = Circulation::CounterClockwise;
  FeasibilityOracle oracle = FeasibilityOracle::Exact;
  int oracle_grid_side = 21;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

struct StepRecord {
  int index = 0;
  Mode mode = Mode::GoToGoal;
  CartesianPoint z_before = CartesianPoint::Zero();
  CartesianPoint z_after = CartesianPoint::Zero();
  CartesianPoint requested_dz = CartesianPoint::Zero();
  Eigen::VectorXd applied_dtheta;
  double pre_adjust_max_dtheta = 0.0;
  double lambda_star = 0.0;  // 0 for the clipping baseline
  double kappa = 0.0;
  double epsilon = 0.0;
  double rho = 0.0;
  bool violation = false;  // pre-adjustment |dtheta_i| > delta_i for some i
  bool adjusted = false;   // clipped (baseline) or scaled back (certified)
  double cert_time_s = 0.0;

  /// Distance between where the step was aimed and where it landed.
  [[nodiscard]] double drift() const { return (z_after - (z_before + requested_dz)).norm(); }
};

struct RunResult {
  std::string planner;
  bool success = false;
  Termination reason = Termination::Budget;
  std::vector<StepRecord> steps;
  CartesianPoint start = CartesianPoint::Zero();
  CartesianPoint goal = CartesianPoint::Zero();
  JointConfig final_theta;
  double final_distance = 0.0;
  double path_length = 0.0;
  std::string detail;

  [[nodiscard]] int violation_count() const;
};

/// Bug2 mode logic shared by both planners. The m-line runs from the start
/// position to the goal.
class Bug2 {
 public:
  Bug2(CartesianPoint start, CartesianPoint goal, std::vector<Obstacle> obstacles,
       Circulation circulation = Circulation::CounterClockwise);

  struct Decision {
    Eigen::Vector2d direction;
    CartesianPoint dz;
    Mode mode;
  };

  /// Picks the unit direction for this step. `make_step` turns a unit
  /// direction into the Cartesian step the planner would take; a predicted
  /// collision of that step in go-to-goal mode switches to boundary following
  /// with the current position as hit point. `clearance` pads the obstacle
  /// radius in the collision prediction.
  Decision decide(const CartesianPoint& z,
                  const std::function<CartesianPoint(const Eigen::Vector2d&)>& make_step,
                  double clearance = 0.0);

  enum class Progress { Continue, LoopClosed };

  /// Updates the mode after moving from `from` to `to`. Leaves boundary
  /// following when the m-line is crossed strictly closer to the goal than
  /// the hit point.
  Progress advance(const CartesianPoint& from, const CartesianPoint& to, double step_length);

  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  [[nodiscard]] std::optional<CartesianPoint> hit_point() const { return hit_; }

  /// Tangent to the followed obstacle at z in the configured circulation.
  [[nodiscard]] Eigen::Vector2d tangent(const CartesianPoint& z, int obstacle) const;

  static constexpr double kCrossingTol = 1e-9;
  static constexpr int kMinLoopSteps = 10;
  static constexpr double kLoopRadiusSteps = 1.5;

 private:
  [[nodiscard]] int first_collision(const CartesianPoint& a, const CartesianPoint& b,
                                    double clearance) const;
  [[nodiscard]] double mline_side(const CartesianPoint& p) const;

  CartesianPoint start_;
  CartesianPoint goal_;
  std::vector<Obstacle> obstacles_;
  Circulation circulation_;
  Mode mode_ = Mode::GoToGoal;
  int followed_ = -1;
  std::optional<CartesianPoint> hit_;
  double hit_distance_ = 0.0;
  int bf_steps_ = 0;
};

/// Certified adaptive-step Bug2: per step builds the polynomial IK, bounds its
/// error, certifies lambda* and moves alpha * lambda* along the Bug2 direction.
RunResult plan_sos(const RobotModel& model, const JointConfig& theta0, const CartesianPoint& goal,
                   std::span<const Obstacle> obstacles, const JointBounds& bounds,
                   const PlannerConfig& cfg = {});

/// Fixed-step baseline: s = delta / kappa0, first-order pseudoinverse joint
/// step, each joint increment clipped to [-delta_i, delta_i].
RunResult plan_vanilla(const RobotModel& model, const JointConfig& theta0,
                       const CartesianPoint& goal, std::span<const Obstacle> obstacles,
                       const JointBounds& bounds, const PlannerConfig& cfg = {},
                       std::optional<double> kappa0 = std::nullopt);

/// Certificate for a single configuration with the rho-halving retry used by
/// the planner. Empty when no usable certificate exists after the retries.
struct CertifiedStep {
  PolyIkModel model;
  Certificate certificate;
};
std::optional<CertifiedStep> certify_configuration(const RobotModel& model, const JointConfig& theta,
                                                   const JointBounds& bounds,
                                                   const PlannerConfig& cfg);

}  // namespace reachcert
