#pragma once

#include "reachcert/polyik.hpp"

#include <Eigen/Dense>

#include <optional>

namespace reachcert {

/// Exact max of y^T Q y, y = (1, dz1, dz2), over dz in [-lambda, lambda]^2.
/// Enumerates the four vertices, the stationary point on each edge and the
/// interior stationary point.
double quad_box_max(const Eigen::Matrix3d& Q, double lambda);

/// Same maximum approximated on a side x side grid (side >= 2).
double grid_box_max(const Eigen::Matrix3d& Q, double lambda, int side);

enum class FeasibilityOracle { Exact, Grid };

struct CertifyOptions {
  int iterations = 50;
  FeasibilityOracle oracle = FeasibilityOracle::Exact;
  int grid_side = 21;
};

struct Certificate {
  double lambda_star = 0.0;
  double epsilon = 0.0;
  EffectiveBounds delta_eff;
  Eigen::VectorXd slack;  // delta_eff_i - max |dtheta_i| over the certified box
  int iterations = 0;
};

/// max_i over both signs of max |dtheta_i| on the box, per joint.
Eigen::VectorXd max_abs_displacement(const PolyIkModel& m, double lambda,
                                     const CertifyOptions& opts = {});

/// True iff every joint stays within delta_eff over [-lambda, lambda]^2.
bool box_feasible(const PolyIkModel& m, const EffectiveBounds& eff, double lambda,
                  const CertifyOptions& opts = {});

/// Largest lambda in [0, lambda_max] passing box_feasible, by bisection.
/// Returns lambda_max directly when it is feasible.
Certificate certify_bisection(const PolyIkModel& m, const EffectiveBounds& eff, double lambda_max,
                              const CertifyOptions& opts = {});

/// Multipliers certifying sigma * y^T Q y <= delta_eff on the box via
///   S = -sigma Q + delta_eff E11 - c1 G1(lambda) - c2 G2(lambda) >= 0
/// with G_k(lambda) the monomial-basis matrices of lambda^2 - dz_k^2.
struct SProcWitness {
  double c1 = 0.0;
  double c2 = 0.0;
  Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
  double min_eigenvalue = 0.0;
};

inline constexpr double kPsdTolerance = 1e-9;

Eigen::Matrix3d box_constraint_matrix(int axis, double lambda);
Eigen::Matrix3d s_procedure_matrix(const Eigen::Matrix3d& Q, double delta_eff, int sigma,
                                   double lambda, double c1, double c2);

/// Leading principal minors all >= -tol.
bool sylvester_psd(const Eigen::Matrix3d& S, double tol = kPsdTolerance);

/// Searches c1, c2 >= 0 maximizing the smallest eigenvalue of S. Returns a
/// witness iff that maximum is >= -kPsdTolerance. Validation tool only: a
/// witness always implies exact feasibility, but with an indefinite curvature
/// block the relaxation can be strictly conservative.
std::optional<SProcWitness> s_procedure_feasible(const Eigen::Matrix3d& Q, double delta_eff,
                                                 int sigma, double lambda);

}  // namespace reachcert
