#pragma once

#include "reachcert/kinematics.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace reachcert {

/// Forward map plus its Jacobian. Lets the polynomial IK be built against
/// something other than the planar arm (tests use affine maps).
struct KinematicMap {
  int dof = 0;
  std::function<CartesianPoint(const JointConfig&)> fk;
  std::function<Jacobian(const JointConfig&)> jac;
};

KinematicMap kinematic_map(const RobotModel& model);

/// Local second-order IK around theta0:
///   theta_i(dz) = theta0_i + A_i . dz + dz^T B_i dz
/// B_i is stored as the symmetric 2x2 matrix [[b11, b12/2], [b12/2, b22]].
struct PolyIkModel {
  JointConfig theta0;
  CartesianPoint z0;
  PseudoInverse A;
  std::vector<Eigen::Matrix2d> B;
  double rho = 0.0;
  double epsilon = 0.0;
  double h = 0.0;

  [[nodiscard]] int dof() const { return static_cast<int>(theta0.size()); }
  [[nodiscard]] double b11(int i) const { return B[i](0, 0); }
  [[nodiscard]] double b12(int i) const { return 2.0 * B[i](0, 1); }
  [[nodiscard]] double b22(int i) const { return B[i](1, 1); }

  /// Quadratic form matrix Q_i over the monomials y = (1, dz1, dz2).
  [[nodiscard]] Eigen::Matrix3d q_matrix(int i) const;

  /// theta0 + A dz + quadratic terms, written out coefficient by coefficient.
  [[nodiscard]] JointConfig eval(const CartesianPoint& dz) const;
  /// Same polynomial evaluated as theta0_i + y^T Q_i y.
  [[nodiscard]] JointConfig eval_quadratic_form(const CartesianPoint& dz) const;
  /// eval(dz) - theta0
  [[nodiscard]] Eigen::VectorXd displacement(const CartesianPoint& dz) const;
};

/// Inverse of q_matrix: reads (A row i, B_i) back out of Q_i.
void read_back_q(const Eigen::Matrix3d& Q, Eigen::Vector2d& a_row, Eigen::Matrix2d& B);

inline constexpr double kDefaultFdStep = 1e-4;
inline constexpr int kDefaultErrorGrid = 7;

PolyIkModel build_poly_ik(const KinematicMap& map, const JointConfig& theta0, double rho,
                          double fd_step = kDefaultFdStep);
PolyIkModel build_poly_ik(const RobotModel& model, const JointConfig& theta0, double rho,
                          double fd_step = kDefaultFdStep);

/// Worst task-space residual ||FK(theta_hat(dz)) - (z0 + dz)|| over a uniform
/// grid_side x grid_side grid on [-rho, rho]^2.
double estimate_error(const PolyIkModel& m, const KinematicMap& map, int grid_side = kDefaultErrorGrid);
double estimate_error(const PolyIkModel& m, const RobotModel& model, int grid_side = kDefaultErrorGrid);

struct EffectiveBounds {
  Eigen::VectorXd delta_eff;
};

/// Some delta_i - epsilon <= 0: the approximation radius must shrink.
struct TooCoarse {
  double epsilon = 0.0;
  double worst = 0.0;  // min_i (delta_i - epsilon)
};

using EffectiveBoundsResult = std::variant<EffectiveBounds, TooCoarse>;

EffectiveBoundsResult effective_bounds(const JointBounds& b, double epsilon);

}  // namespace reachcert
