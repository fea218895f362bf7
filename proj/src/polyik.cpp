#include "reachcert/polyik.hpp"

#include <algorithm>
#include <cmath>

namespace reachcert {

KinematicMap kinematic_map(const RobotModel& model) {
  return KinematicMap{
      model.dof(),
      [model](const JointConfig& q) { return forward_kinematics(model, q); },
      [model](const JointConfig& q) { return jacobian(model, q); },
  };
}

Eigen::Matrix3d PolyIkModel::q_matrix(int i) const {
  Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
  Q(0, 1) = Q(1, 0) = 0.5 * A(i, 0);
  Q(0, 2) = Q(2, 0) = 0.5 * A(i, 1);
  Q.block<2, 2>(1, 1) = B[i];
  return Q;
}

void read_back_q(const Eigen::Matrix3d& Q, Eigen::Vector2d& a_row, Eigen::Matrix2d& B) {
  a_row = Eigen::Vector2d(2.0 * Q(0, 1), 2.0 * Q(0, 2));
  B = Q.block<2, 2>(1, 1);
}

JointConfig PolyIkModel::eval(const CartesianPoint& dz) const {
  const double x = dz.x();
  const double y = dz.y();
  JointConfig out(dof());
  for (int i = 0; i < dof(); ++i) {
    out[i] = theta0[i] + A(i, 0) * x + A(i, 1) * y + b11(i) * x * x + b12(i) * x * y +
             b22(i) * y * y;
  }
  return out;
}

JointConfig PolyIkModel::eval_quadratic_form(const CartesianPoint& dz) const {
  const Eigen::Vector3d y(1.0, dz.x(), dz.y());
  JointConfig out(dof());
  for (int i = 0; i < dof(); ++i) out[i] = theta0[i] + y.dot(q_matrix(i) * y);
  return out;
}

Eigen::VectorXd PolyIkModel::displacement(const CartesianPoint& dz) const {
  return eval(dz) - theta0;
}

PolyIkModel build_poly_ik(const KinematicMap& map, const JointConfig& theta0, double rho,
                          double fd_step) {
  if (!(rho > 0.0)) throw std::invalid_argument("approximation radius must be positive");
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (theta0.size() != map.dof) throw DimensionError("build_poly_ik: dimension mismatch");

  PolyIkModel m;
  m.theta0 = theta0;
  m.z0 = map.fk(theta0);
  m.A = pseudoinverse(map.jac(theta0));
  m.rho = rho;
  m.h = fd_step;

  // J^dagger at theta0 + A e_k h, k = 1, 2
  const PseudoInverse A1 = pseudoinverse(map.jac(theta0 + m.A.col(0) * fd_step));
  const PseudoInverse A2 = pseudoinverse(map.jac(theta0 + m.A.col(1) * fd_step));

  const int n = map.dof;
  m.B.resize(n);
  for (int i = 0; i < n; ++i) {
    const double b11 = (A1(i, 0) - m.A(i, 0)) / (2.0 * fd_step);
    const double b22 = (A2(i, 1) - m.A(i, 1)) / (2.0 * fd_step);
    const double b12 = (A1(i, 1) - m.A(i, 1)) / fd_step;
    m.B[i] << b11, 0.5 * b12, 0.5 * b12, b22;
  }
  return m;
}

PolyIkModel build_poly_ik(const RobotModel& model, const JointConfig& theta0, double rho,
                          double fd_step) {
  return build_poly_ik(kinematic_map(model), theta0, rho, fd_step);
}

double estimate_error(const PolyIkModel& m, const KinematicMap& map, int grid_side) {
  if (grid_side < 2) throw std::invalid_argument("error grid needs at least 2 points per side");
  double worst = 0.0;
  for (int a = 0; a < grid_side; ++a) {
    const double x = -m.rho + 2.0 * m.rho * a / (grid_side - 1);
    for (int b = 0; b < grid_side; ++b) {
      const double y = -m.rho + 2.0 * m.rho * b / (grid_side - 1);
      const CartesianPoint dz(x, y);
      const double err = (map.fk(m.eval(dz)) - (m.z0 + dz)).norm();
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double estimate_error(const PolyIkModel& m, const RobotModel& model, int grid_side) {
  return estimate_error(m, kinematic_map(model), grid_side);
}

EffectiveBoundsResult effective_bounds(const JointBounds& b, double epsilon) {
  Eigen::VectorXd eff = b.delta().array() - epsilon;
  const double worst = eff.minCoeff();
  if (worst <= 0.0) return TooCoarse{epsilon, worst};
  return EffectiveBounds{std::move(eff)};
}

}  // namespace reachcert
