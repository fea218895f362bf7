#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace reachcert {

using JointConfig = Eigen::VectorXd;
using CartesianPoint = Eigen::Vector2d;
using Jacobian = Eigen::Matrix<double, 2, Eigen::Dynamic>;
using PseudoInverse = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a Jacobian's smallest singular value falls below the cutoff.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Planar serial arm with revolute joints. Joint angles are absolute link
/// orientations, so FK is a plain vector sum of the links.
class RobotModel {
 public:
  explicit RobotModel(std::vector<double> link_lengths);

  [[nodiscard]] int dof() const { return static_cast<int>(lengths_.size()); }
  [[nodiscard]] const std::vector<double>& link_lengths() const { return lengths_; }
  [[nodiscard]] double reach() const;

  friend bool operator==(const RobotModel&, const RobotModel&) = default;

 private:
  std::vector<double> lengths_;
};

/// Per-step joint displacement bounds, all strictly positive.
class JointBounds {
 public:
  explicit JointBounds(Eigen::VectorXd delta);
  static JointBounds uniform(int n, double delta);

  [[nodiscard]] const Eigen::VectorXd& delta() const { return delta_; }
  [[nodiscard]] int size() const { return static_cast<int>(delta_.size()); }

 private:
  Eigen::VectorXd delta_;
};

/// Relative cutoff on singular values: sigma_min < kSingularCutoff * sigma_max
/// is treated as singular.
inline constexpr double kSingularCutoff = 1e-10;

CartesianPoint forward_kinematics(const RobotModel& model, const JointConfig& q);
Jacobian jacobian(const RobotModel& model, const JointConfig& q);

/// Moore-Penrose pseudoinverse via SVD. Throws SingularityError instead of damping.
PseudoInverse pseudoinverse(const Jacobian& J);

/// sigma_max / sigma_min of a 2 x n Jacobian.
double condition_number(const Jacobian& J);

/// Smallest singular value (0 for rank deficient input).
double min_singular_value(const Jacobian& J);

/// |q_next - q_curr| <= delta componentwise (closed set, raw differences).
bool within_bounds(const JointConfig& q_next, const JointConfig& q_curr, const JointBounds& b);

}  // namespace reachcert
