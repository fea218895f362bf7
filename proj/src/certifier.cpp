#include "reachcert/certifier.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>

namespace reachcert {

namespace {

double eval_form(const Eigen::Matrix3d& Q, double x, double y) {
  return Q(0, 0) + 2.0 * Q(0, 1) * x + 2.0 * Q(0, 2) * y + Q(1, 1) * x * x +
         2.0 * Q(1, 2) * x * y + Q(2, 2) * y * y;
}

double min_eigenvalue(const Eigen::Matrix3d& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

double quad_box_max(const Eigen::Matrix3d& Q, double lambda) {
  assert(lambda >= 0.0);
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](double x, double y) { best = std::max(best, eval_form(Q, x, y)); };

  for (double x : {-lambda, lambda}) {
    for (double y : {-lambda, lambda}) consider(x, y);
  }

  // Edges: one coordinate pinned, 1-D quadratic in the other.
  for (double x : {-lambda, lambda}) {
    if (Q(2, 2) != 0.0) {
      const double y = -(Q(0, 2) + Q(1, 2) * x) / Q(2, 2);
      if (std::abs(y) <= lambda) consider(x, y);
    }
  }
  for (double y : {-lambda, lambda}) {
    if (Q(1, 1) != 0.0) {
      const double x = -(Q(0, 1) + Q(1, 2) * y) / Q(1, 1);
      if (std::abs(x) <= lambda) consider(x, y);
    }
  }

  // Interior stationary point.
  const double det = Q(1, 1) * Q(2, 2) - Q(1, 2) * Q(1, 2);
  if (det != 0.0) {
    const double x = (-Q(0, 1) * Q(2, 2) + Q(0, 2) * Q(1, 2)) / det;
    const double y = (-Q(0, 2) * Q(1, 1) + Q(0, 1) * Q(1, 2)) / det;
    if (std::abs(x) < lambda && std::abs(y) < lambda) consider(x, y);
  }
  return best;
}

double grid_box_max(const Eigen::Matrix3d& Q, double lambda, int side) {
  if (side < 2) throw std::invalid_argument("grid side must be at least 2");
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < side; ++a) {
    const double x = -lambda + 2.0 * lambda * a / (side - 1);
    for (int b = 0; b < side; ++b) {
      const double y = -lambda + 2.0 * lambda * b / (side - 1);
      best = std::max(best, eval_form(Q, x, y));
    }
  }
  return best;
}

Eigen::VectorXd max_abs_displacement(const PolyIkModel& m, double lambda,
                                     const CertifyOptions& opts) {
  Eigen::VectorXd out(m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    const Eigen::Matrix3d Q = m.q_matrix(i);
    if (opts.oracle == FeasibilityOracle::Exact) {
      out[i] = std::max(quad_box_max(Q, lambda), quad_box_max(-Q, lambda));
    } else {
      out[i] = std::max(grid_box_max(Q, lambda, opts.grid_side),
                        grid_box_max(-Q, lambda, opts.grid_side));
    }
  }
  return out;
}

bool box_feasible(const PolyIkModel& m, const EffectiveBounds& eff, double lambda,
                  const CertifyOptions& opts) {
  const Eigen::VectorXd worst = max_abs_displacement(m, lambda, opts);
  return (worst.array() <= eff.delta_eff.array()).all();
}

Certificate certify_bisection(const PolyIkModel& m, const EffectiveBounds& eff, double lambda_max,
                              const CertifyOptions& opts) {
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be positive");
  if (eff.delta_eff.size() != m.dof()) throw DimensionError("certify: bounds dimension mismatch");
  if (!(eff.delta_eff.array() > 0.0).all()) {
    throw std::invalid_argument("effective bounds must be strictly positive");
  }

  Certificate cert;
  cert.epsilon = m.epsilon;
  cert.delta_eff = eff;

  if (box_feasible(m, eff, lambda_max, opts)) {
    cert.lambda_star = lambda_max;
  } else {
    double lo = 0.0;
    double hi = lambda_max;
    for (int k = 0; k < opts.iterations; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (box_feasible(m, eff, mid, opts)) {
        lo = mid;
      } else {
        hi = mid;
      }
      ++cert.iterations;
    }
    cert.lambda_star = lo;
  }
  cert.slack = eff.delta_eff - max_abs_displacement(m, cert.lambda_star, opts);
  return cert;
}

Eigen::Matrix3d box_constraint_matrix(int axis, double lambda) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  G(0, 0) = lambda * lambda;
  G(axis + 1, axis + 1) = -1.0;
  return G;
}

Eigen::Matrix3d s_procedure_matrix(const Eigen::Matrix3d& Q, double delta_eff, int sigma,
                                   double lambda, double c1, double c2) {
  Eigen::Matrix3d S = -static_cast<double>(sigma) * Q;
  S(0, 0) += delta_eff;
  S -= c1 * box_constraint_matrix(0, lambda) + c2 * box_constraint_matrix(1, lambda);
  return S;
}

bool sylvester_psd(const Eigen::Matrix3d& S, double tol) {
  const double m1 = S(0, 0);
  const double m2 = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
  const double m3 = S.determinant();
  return m1 >= -tol && m2 >= -tol && m3 >= -tol;
}

std::optional<SProcWitness> s_procedure_feasible(const Eigen::Matrix3d& Q, double delta_eff,
                                                 int sigma, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (!(delta_eff > 0.0)) throw std::invalid_argument("delta_eff must be positive");
  if (sigma != 1 && sigma != -1) throw std::invalid_argument("sigma must be +1 or -1");

  const double c_max = 10.0 * (Q.norm() + delta_eff) / std::max(lambda * lambda, 1e-12);
  auto score = [&](double c1, double c2) {
    return min_eigenvalue(s_procedure_matrix(Q, delta_eff, sigma, lambda, c1, c2));
  };

  auto witness = [&](double c1, double c2, double min_eig) {
    SProcWitness w;
    w.c1 = c1;
    w.c2 = c2;
    w.S = s_procedure_matrix(Q, delta_eff, sigma, lambda, c1, c2);
    w.min_eigenvalue = min_eig;
    return w;
  };

  // Zero multipliers first: the simplest certificate when it already works.
  if (const double s0 = score(0.0, 0.0); s0 >= -kPsdTolerance) return witness(0.0, 0.0, s0);

  // Coarse log-spaced grid over [0, c_max]^2 (first node is exactly zero).
  constexpr int kGrid = 60;
  std::array<double, kGrid> nodes{};
  nodes[0] = 0.0;
  for (int k = 1; k < kGrid; ++k) {
    nodes[k] = c_max * std::pow(10.0, -9.0 + 9.0 * (k - 1) / (kGrid - 2));
  }
  int bi = 0;
  int bj = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double s = score(nodes[i], nodes[j]);
      if (s > best) {
        best = s;
        bi = i;
        bj = j;
      }
    }
  }

  // One linear refinement between the neighbouring nodes.
  const double lo1 = nodes[std::max(bi - 1, 0)];
  const double hi1 = nodes[std::min(bi + 1, kGrid - 1)];
  const double lo2 = nodes[std::max(bj - 1, 0)];
  const double hi2 = nodes[std::min(bj + 1, kGrid - 1)];
  double c1 = nodes[bi];
  double c2 = nodes[bj];
  for (int i = 0; i < kGrid; ++i) {
    const double x = lo1 + (hi1 - lo1) * i / (kGrid - 1);
    for (int j = 0; j < kGrid; ++j) {
      const double y = lo2 + (hi2 - lo2) * j / (kGrid - 1);
      const double s = score(x, y);
      if (s > best) {
        best = s;
        c1 = x;
        c2 = y;
      }
    }
  }

  // Pattern search along axes and diagonals; the objective is concave but
  // not smooth where eigenvalues cross, so pure coordinate moves can stall.
  static const std::array<std::array<double, 2>, 8> kDirs{{
      {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}};
  double step = std::max({hi1 - lo1, hi2 - lo2, 1e-12 * c_max});
  const double min_step = 1e-14 * std::max(c_max, 1.0);
  while (step > min_step && best < kPsdTolerance * 10.0) {
    bool moved = false;
    for (const auto& d : kDirs) {
      const double x = std::clamp(c1 + step * d[0], 0.0, c_max);
      const double y = std::clamp(c2 + step * d[1], 0.0, c_max);
      const double s = score(x, y);
      if (s > best) {
        best = s;
        c1 = x;
        c2 = y;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }

  if (best < -kPsdTolerance) return std::nullopt;
  return witness(c1, c2, best);
}

}  // namespace reachcert
