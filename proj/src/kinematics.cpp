#include "reachcert/kinematics.hpp"

#include <cmath>
#include <numeric>

namespace reachcert {

namespace {

void check_dims(const RobotModel& model, const JointConfig& q) {
  if (q.size() != model.dof()) {
    throw DimensionError("joint configuration has " + std::to_string(q.size()) +
                         " entries, robot has " + std::to_string(model.dof()) + " joints");
  }
}

}  // namespace

RobotModel::RobotModel(std::vector<double> link_lengths) : lengths_(std::move(link_lengths)) {
  if (lengths_.size() < 2) throw std::invalid_argument("robot needs at least two links");
  for (double l : lengths_) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("link lengths must be finite and strictly positive");
    }
  }
}

double RobotModel::reach() const { return std::accumulate(lengths_.begin(), lengths_.end(), 0.0); }

JointBounds::JointBounds(Eigen::VectorXd delta) : delta_(std::move(delta)) {
  if (delta_.size() == 0) throw std::invalid_argument("joint bounds must not be empty");
  for (Eigen::Index i = 0; i < delta_.size(); ++i) {
    if (!(delta_[i] > 0.0) || !std::isfinite(delta_[i])) {
      throw std::invalid_argument("joint bounds must be finite and strictly positive");
    }
  }
}

JointBounds JointBounds::uniform(int n, double delta) {
  return JointBounds(Eigen::VectorXd::Constant(n, delta));
}

CartesianPoint forward_kinematics(const RobotModel& model, const JointConfig& q) {
  check_dims(model, q);
  CartesianPoint z = CartesianPoint::Zero();
  const auto& l = model.link_lengths();
  for (int i = 0; i < model.dof(); ++i) {
    z.x() += l[i] * std::cos(q[i]);
    z.y() += l[i] * std::sin(q[i]);
  }
  return z;
}

Jacobian jacobian(const RobotModel& model, const JointConfig& q) {
  check_dims(model, q);
  Jacobian J(2, model.dof());
  const auto& l = model.link_lengths();
  for (int i = 0; i < model.dof(); ++i) {
    J(0, i) = -l[i] * std::sin(q[i]);
    J(1, i) = l[i] * std::cos(q[i]);
  }
  return J;
}

PseudoInverse pseudoinverse(const Jacobian& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() < 2 || !(s[0] > 0.0) || s[1] < kSingularCutoff * s[0]) {
    throw SingularityError("Jacobian is singular (sigma_min below cutoff)");
  }
  const Eigen::Vector2d inv_s(1.0 / s[0], 1.0 / s[1]);
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

double min_singular_value(const Jacobian& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  return s.size() < 2 ? 0.0 : s[1];
}

double condition_number(const Jacobian& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  if (s.size() < 2 || s[1] <= 0.0) {
    throw SingularityError("condition number is infinite (sigma_min = 0)");
  }
  return s[0] / s[1];
}

bool within_bounds(const JointConfig& q_next, const JointConfig& q_curr, const JointBounds& b) {
  if (q_next.size() != q_curr.size() || q_next.size() != b.size()) {
    throw DimensionError("within_bounds: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < q_next.size(); ++i) {
    if (std::abs(q_next[i] - q_curr[i]) > b.delta()[i]) return false;
  }
  return true;
}

}  // namespace reachcert
