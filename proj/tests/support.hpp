// Shared generators for the unit and acceptance suites.
#pragma once

#include "reachcert/certifier.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace reachcert::testing {

inline const RobotModel& default_arm() {
  static const RobotModel arm({1.0, 0.8, 0.6});
  return arm;
}

inline JointConfig random_pose(std::mt19937_64& rng, double kappa_lo, double kappa_hi) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (;;) {
    JointConfig q(3);
    for (int i = 0; i < 3; ++i) q[i] = u(rng);
    const double k = condition_number(jacobian(default_arm(), q));
    if (k >= kappa_lo && k <= kappa_hi) return q;
  }
}

inline Eigen::Matrix3d form(double a1, double a2, double b11, double b12, double b22) {
  Eigen::Matrix3d Q;
  Q << 0, a1 / 2, a2 / 2, a1 / 2, b11, b12 / 2, a2 / 2, b12 / 2, b22;
  return Q;
}

inline double eval(const Eigen::Matrix3d& Q, double x, double y) {
  const Eigen::Vector3d v(1, x, y);
  return v.dot(Q * v);
}

// Brute-force maximum over a (side x side) grid, written independently of grid_box_max.
inline double dense_grid_max(const Eigen::Matrix3d& Q, double lambda, int side) {
  double best = -1e300;
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      const double x = lambda * (2.0 * a / (side - 1) - 1.0);
      const double y = lambda * (2.0 * b / (side - 1) - 1.0);
      best = std::max(best, eval(Q, x, y));
    }
  }
  return best;
}

inline PolyIkModel linear_model(double a1, double a2) {
  PolyIkModel m;
  m.theta0 = Eigen::VectorXd::Zero(1);
  m.z0 = CartesianPoint::Zero();
  m.A = PseudoInverse(1, 2);
  m.A << a1, a2;
  m.B = {Eigen::Matrix2d::Zero()};
  m.rho = 1.0;
  return m;
}

/// Largest lambda with sigma * y^T Q y <= delta on the box, via exact maxima.
inline double single_constraint_boundary(const Eigen::Matrix3d& Q, int sigma, double delta,
                                         double hi = 1.0) {
  const Eigen::Matrix3d sQ = static_cast<double>(sigma) * Q;
  if (quad_box_max(sQ, hi) <= delta) return hi;
  double lo = 0.0;
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    (quad_box_max(sQ, mid) <= delta ? lo : hi) = mid;
  }
  return lo;
}

struct EquivalenceTally {
  int triples = 0;
  int constraint_checks = 0;
  int disagreements = 0;
  int unsound = 0;  // witness found where the exact maximum exceeds delta_eff
  int feasible_triples = 0;
};

/// Random (model, lambda, delta_eff) triples with lambda kept at least
/// `margin` away from every per-constraint feasibility boundary; compares
/// S-procedure witness existence against exact box maxima.
inline EquivalenceTally run_equivalence(std::uint64_t seed, int triples, double margin = 1e-4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.01, 0.05);
  std::uniform_real_distribution<double> uu(0.0, 1.0);
  EquivalenceTally t;
  while (t.triples < triples) {
    const PolyIkModel m = build_poly_ik(default_arm(), random_pose(rng, 2.0, 8.0), 0.008);
    const double delta = ud(rng);
    double top = 0.0;
    std::vector<double> bounds;
    for (int i = 0; i < m.dof(); ++i) {
      for (int sigma : {1, -1}) {
        bounds.push_back(single_constraint_boundary(m.q_matrix(i), sigma, delta));
        top = std::max(top, bounds.back());
      }
    }
    const double lambda = 1.5 * top * uu(rng);
    bool near = false;
    for (double b : bounds) near = near || std::abs(lambda - b) < margin;
    if (near) continue;

    bool all_exact = true;
    bool all_sproc = true;
    for (int i = 0; i < m.dof(); ++i) {
      const Eigen::Matrix3d Q = m.q_matrix(i);
      for (int sigma : {1, -1}) {
        const bool exact = quad_box_max(static_cast<double>(sigma) * Q, lambda) <= delta;
        const auto w = s_procedure_feasible(Q, delta, sigma, lambda);
        const bool sproc = w.has_value() && sylvester_psd(w->S);
        all_exact = all_exact && exact;
        all_sproc = all_sproc && sproc;
        ++t.constraint_checks;
        if (exact != sproc) ++t.disagreements;
        if (sproc && !exact) ++t.unsound;
      }
    }
    if (all_exact != all_sproc) ++t.disagreements;
    if (all_exact) ++t.feasible_triples;
    ++t.triples;
  }
  return t;
}

}  // namespace reachcert::testing
