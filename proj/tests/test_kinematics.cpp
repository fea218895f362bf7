#include "doctest.h"
#include "reachcert/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace reachcert;

namespace {

const RobotModel kArm({1.0, 0.8, 0.6});

JointConfig random_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  JointConfig q(n);
  for (int i = 0; i < n; ++i) q[i] = u(rng);
  return q;
}

// Closed-form singular values of a 2 x n matrix from the 2x2 Gram matrix.
std::pair<double, double> gram_singular_values(const Eigen::MatrixXd& J) {
  const Eigen::Matrix2d G = J * J.transpose();
  const double tr = G.trace();
  const double det = G.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return {std::sqrt(tr / 2.0 + disc), std::sqrt(std::max(0.0, tr / 2.0 - disc))};
}

}  // namespace

TEST_CASE("robot model rejects bad link lengths") {
  CHECK_THROWS_AS(RobotModel({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RobotModel({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RobotModel({1.0, -0.5, 0.3}), std::invalid_argument);
  CHECK(kArm.dof() == 3);
  CHECK(kArm.reach() == doctest::Approx(2.4));
  CHECK_THROWS_AS(JointBounds(Eigen::Vector3d(0.03, 0.0, 0.03)), std::invalid_argument);
}

TEST_CASE("forward kinematics") {
  const auto z0 = forward_kinematics(kArm, Eigen::Vector3d::Zero());
  CHECK(z0.x() == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(std::abs(z0.y()) < 1e-15);

  const double h = std::numbers::pi / 2;
  const auto z1 = forward_kinematics(kArm, Eigen::Vector3d(h, h, h));
  CHECK(std::abs(z1.x()) < 1e-12);
  CHECK(z1.y() == doctest::Approx(2.4));

  CHECK_THROWS_AS(forward_kinematics(kArm, Eigen::Vector2d::Zero()), DimensionError);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const JointConfig q = random_config(rng, 3);
    // Chain the links head to tail.
    double px = 0.0;
    double py = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double l = kArm.link_lengths()[i];
      px += std::cos(q[i]) * l;
      py += std::sin(q[i]) * l;
    }
    const auto z = forward_kinematics(kArm, q);
    CHECK(std::abs(z.x() - px) < 1e-12);
    CHECK(std::abs(z.y() - py) < 1e-12);
  }
}

TEST_CASE("jacobian") {
  const Jacobian J0 = jacobian(kArm, Eigen::Vector3d::Zero());
  Eigen::Matrix<double, 2, 3> expected;
  expected << 0, 0, 0, 1.0, 0.8, 0.6;
  CHECK((J0 - expected).cwiseAbs().maxCoeff() < 1e-15);

  const Jacobian J1 = jacobian(kArm, Eigen::Vector3d(std::numbers::pi / 2, 0, 0));
  CHECK(J1(0, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(J1(1, 0)) < 1e-15);

  CHECK_THROWS_AS(jacobian(kArm, Eigen::VectorXd::Zero(4)), DimensionError);
}

TEST_CASE("jacobian matches central finite differences") {
  std::mt19937_64 rng(11);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointConfig q = random_config(rng, 3);
    const Jacobian J = jacobian(kArm, q);
    for (int k = 0; k < 3; ++k) {
      JointConfig qp = q;
      JointConfig qm = q;
      qp[k] += h;
      qm[k] -= h;
      const Eigen::Vector2d fd =
          (forward_kinematics(kArm, qp) - forward_kinematics(kArm, qm)) / (2.0 * h);
      CHECK((fd - J.col(k)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("forward difference error shrinks linearly in the step") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const JointConfig q = random_config(rng, 3);
    const Jacobian J = jacobian(kArm, q);
    for (int k = 0; k < 3; ++k) {
      double prev = 0.0;
      for (double h : {1e-4, 1e-5, 1e-6}) {
        JointConfig qh = q;
        qh[k] += h;
        const double err =
            ((forward_kinematics(kArm, qh) - forward_kinematics(kArm, q)) / h - J.col(k)).norm();
        // |second derivative| <= l_k <= 1, so the O(h) term is at most h/2.
        CHECK(err <= 0.5 * h * 1.0 + 1e-9);
        if (prev > 0.0 && prev > 1e-9) CHECK(err < prev);
        prev = err;
      }
    }
  }
}

TEST_CASE("pseudoinverse") {
  Eigen::Matrix<double, 2, 3> J;
  J << 1, 0, 0, 0, 1, 0;
  const PseudoInverse A = pseudoinverse(J);
  Eigen::Matrix<double, 3, 2> expected;
  expected << 1, 0, 0, 1, 0, 0;
  CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::Matrix<double, 2, 3> rank1;
  rank1 << 1, 2, 3, 2, 4, 6;
  CHECK_THROWS_AS(pseudoinverse(rank1), SingularityError);
  CHECK_THROWS_AS(pseudoinverse(jacobian(kArm, Eigen::Vector3d(0.4, 0.4, 0.4))), SingularityError);
}

TEST_CASE("pseudoinverse: Moore-Penrose identities and normal-equation oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    Eigen::Matrix<double, 2, 3> J;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) J(r, c) = g(rng);
    if (gram_singular_values(J).second < 1e-3) continue;
    const Eigen::MatrixXd A = pseudoinverse(J);
    CHECK((J * A * J - J).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((A * J * A - A).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::MatrixXd JA = J * A;
    const Eigen::MatrixXd AJ = A * J;
    CHECK((JA - JA.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((AJ - AJ.transpose()).cwiseAbs().maxCoeff() < 1e-9);

    // Full row rank: J^+ = J^T (J J^T)^{-1}.
    const Eigen::MatrixXd oracle = J.transpose() * (J * J.transpose()).inverse();
    const double scale = std::max(1.0, oracle.cwiseAbs().maxCoeff());
    CHECK((A - oracle).cwiseAbs().maxCoeff() < 1e-10 * scale);
    ++checked;
  }
}

TEST_CASE("condition number") {
  Eigen::Matrix2d D;
  D << 2, 0, 0, 1;
  CHECK(condition_number(D) == doctest::Approx(2.0).epsilon(1e-14));
  Eigen::Matrix<double, 2, 3> I;
  I << 0, 1, 0, 0, 0, 1;
  CHECK(condition_number(I) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::Matrix<double, 2, 3> zero_row = Eigen::Matrix<double, 2, 3>::Zero();
  zero_row(0, 0) = 1.0;
  CHECK_THROWS_AS(condition_number(zero_row), SingularityError);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const JointConfig q = random_config(rng, 3);
    const Jacobian J = jacobian(kArm, q);
    const auto [smax, smin] = gram_singular_values(J);
    if (smin < 1e-3) continue;
    CHECK(condition_number(J) == doctest::Approx(smax / smin).epsilon(1e-10));
    CHECK(min_singular_value(J) == doctest::Approx(smin).epsilon(1e-10));
  }
}

TEST_CASE("amplification bound ||J^+ dz|| <= ||dz|| / sigma_min") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const JointConfig q = random_config(rng, 3);
    const Jacobian J = jacobian(kArm, q);
    const double smin = gram_singular_values(J).second;
    if (smin < 1e-3) continue;
    const Eigen::Vector2d dz(g(rng), g(rng));
    CHECK((pseudoinverse(J) * dz).norm() <= dz.norm() / smin + 1e-12);
  }
}

TEST_CASE("within_bounds is a closed box on raw differences") {
  const auto b = JointBounds::uniform(3, 0.03);
  const Eigen::Vector3d q(0.1, -0.2, 3.1);
  CHECK(within_bounds(q, q, b));
  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  CHECK(within_bounds(Eigen::Vector3d(0.03, -0.03, 0.03), origin, b));
  CHECK_FALSE(within_bounds(Eigen::Vector3d(0.0, 0.03 + 1e-9, 0.0), origin, b));
  // No angle wrapping: 2*pi apart is a large displacement.
  CHECK_FALSE(within_bounds(q + Eigen::Vector3d(2 * std::numbers::pi, 0, 0), q, b));
  CHECK_THROWS_AS(within_bounds(Eigen::Vector2d::Zero(), q, b), DimensionError);
}
