#include "reachcert/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace reachcert {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

Eigen::Vector2d unit_or_zero(const Eigen::Vector2d& v) {
  const double n = v.norm();
  return n > 0.0 ? Eigen::Vector2d(v / n) : Eigen::Vector2d::Zero();
}

void finish(RunResult& r, const CartesianPoint& z, const JointConfig& theta) {
  r.final_theta = theta;
  r.final_distance = (z - r.goal).norm();
  r.path_length = 0.0;
  for (const auto& s : r.steps) r.path_length += (s.z_after - s.z_before).norm();
}

}  // namespace

bool Obstacle::contains(const CartesianPoint& p, double extra) const {
  return (p - center).norm() < inflated_radius() + extra;
}

bool segment_hits_disc(const CartesianPoint& a, const CartesianPoint& b, const CartesianPoint& c,
                       double r) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (c - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - c).norm() <= r;
}

std::string to_string(Mode m) { return m == Mode::GoToGoal ? "GTG" : "BF"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Goal: return "goal";
    case Termination::Budget: return "budget";
    case Termination::Infeasible: return "infeasible";
    case Termination::Singular: return "singular";
  }
  return "unknown";
}

std::string to_string(Circulation c) { return c == Circulation::CounterClockwise ? "ccw" : "cw"; }

void PlannerConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  need(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  need(eps_tol > 0.0, "eps_tol must be positive");
  need(eps_min >= 0.0, "eps_min must be nonnegative");
  need(rho0 > 0.0, "rho0 must be positive");
  need(rho_retries >= 0, "rho_retries must be nonnegative");
  need(max_steps >= 1 && vanilla_max_steps >= 1, "step budgets must be at least 1");
  need(fd_step > 0.0, "fd_step must be positive");
  need(bisect_iters >= 1, "bisect_iters must be at least 1");
  need(error_grid_side >= 2, "error_grid_side must be at least 2");
  need(scaleback > 0.0 && scaleback <= 1.0, "scaleback must lie in (0, 1]");
  need(oracle_grid_side >= 2, "oracle_grid_side must be at least 2");
}

int RunResult::violation_count() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                        [](const StepRecord& s) { return s.violation; }));
}

// ---------------------------------------------------------------------------
// Bug2

Bug2::Bug2(CartesianPoint start, CartesianPoint goal, std::vector<Obstacle> obstacles,
           Circulation circulation)
    : start_(std::move(start)),
      goal_(std::move(goal)),
      obstacles_(std::move(obstacles)),
      circulation_(circulation) {}

int Bug2::first_collision(const CartesianPoint& a, const CartesianPoint& b, double clearance) const {
  int hit = -1;
  double nearest = 0.0;
  for (int k = 0; k < static_cast<int>(obstacles_.size()); ++k) {
    const auto& o = obstacles_[k];
    if (!segment_hits_disc(a, b, o.center, o.inflated_radius() + clearance)) continue;
    const double d = (o.center - a).norm() - o.inflated_radius();
    if (hit < 0 || d < nearest) {
      hit = k;
      nearest = d;
    }
  }
  return hit;
}

double Bug2::mline_side(const CartesianPoint& p) const { return cross(goal_ - start_, p - start_); }

Eigen::Vector2d Bug2::tangent(const CartesianPoint& z, int obstacle) const {
  Eigen::Vector2d n = unit_or_zero(z - obstacles_.at(obstacle).center);
  if (n.isZero()) n = unit_or_zero(start_ - obstacles_[obstacle].center);
  if (n.isZero()) n = Eigen::Vector2d(1.0, 0.0);
  return circulation_ == Circulation::CounterClockwise ? Eigen::Vector2d(-n.y(), n.x())
                                                       : Eigen::Vector2d(n.y(), -n.x());
}

Bug2::Decision Bug2::decide(const CartesianPoint& z,
                            const std::function<CartesianPoint(const Eigen::Vector2d&)>& make_step,
                            double clearance) {
  if (mode_ == Mode::GoToGoal) {
    const Eigen::Vector2d d = unit_or_zero(goal_ - z);
    const CartesianPoint dz = make_step(d);
    const int hit = first_collision(z, z + dz, clearance);
    if (hit < 0) return {d, dz, mode_};
    mode_ = Mode::BoundaryFollow;
    followed_ = hit;
    hit_ = z;
    hit_distance_ = (goal_ - z).norm();
    bf_steps_ = 0;
  }
  Eigen::Vector2d d = tangent(z, followed_);
  CartesianPoint dz = make_step(d);
  // Another obstacle in the way: follow that one instead.
  const int other = first_collision(z, z + dz, clearance);
  if (other >= 0 && other != followed_ && !obstacles_[followed_].contains(z, clearance)) {
    followed_ = other;
    d = tangent(z, followed_);
    dz = make_step(d);
  }
  return {d, dz, mode_};
}

Bug2::Progress Bug2::advance(const CartesianPoint& from, const CartesianPoint& to,
                             double step_length) {
  if (mode_ != Mode::BoundaryFollow) return Progress::Continue;
  ++bf_steps_;

  const double f0 = mline_side(from);
  const double f1 = mline_side(to);
  const bool crossed = (f0 <= kCrossingTol && f1 >= -kCrossingTol) ||
                       (f0 >= -kCrossingTol && f1 <= kCrossingTol);
  if (crossed && !(std::abs(f0) <= kCrossingTol && std::abs(f1) <= kCrossingTol)) {
    const double t = std::abs(f0 - f1) > 0.0 ? f0 / (f0 - f1) : 0.0;
    const CartesianPoint p = from + std::clamp(t, 0.0, 1.0) * (to - from);
    const Eigen::Vector2d line = goal_ - start_;
    const double u = line.squaredNorm() > 0.0 ? (p - start_).dot(line) / line.squaredNorm() : 0.0;
    const bool on_segment = u >= -kCrossingTol && u <= 1.0 + kCrossingTol;
    const bool closer = (goal_ - p).norm() < hit_distance_ - kCrossingTol;
    // Goal must lie on the free side of the followed obstacle.
    const bool clear = (goal_ - to).dot(to - obstacles_[followed_].center) > 0.0;
    if (on_segment && closer && clear) {
      mode_ = Mode::GoToGoal;
      followed_ = -1;
      hit_.reset();
      bf_steps_ = 0;
      return Progress::Continue;
    }
  }

  if (hit_ && bf_steps_ >= kMinLoopSteps && (to - *hit_).norm() < kLoopRadiusSteps * step_length) {
    return Progress::LoopClosed;
  }
  return Progress::Continue;
}

// ---------------------------------------------------------------------------
// Certified planner

std::optional<CertifiedStep> certify_configuration(const RobotModel& model, const JointConfig& theta,
                                                   const JointBounds& bounds,
                                                   const PlannerConfig& cfg) {
  CertifyOptions opts;
  opts.iterations = cfg.bisect_iters;
  opts.oracle = cfg.oracle;
  opts.grid_side = cfg.oracle_grid_side;

  double rho = cfg.rho0;
  for (int attempt = 0; attempt <= cfg.rho_retries; ++attempt, rho *= 0.5) {
    PolyIkModel m = build_poly_ik(model, theta, rho, cfg.fd_step);
    m.epsilon = estimate_error(m, model, cfg.error_grid_side);
    const auto eff = effective_bounds(bounds, m.epsilon);
    if (std::holds_alternative<TooCoarse>(eff)) continue;
    Certificate cert = certify_bisection(m, std::get<EffectiveBounds>(eff), rho, opts);
    if (cert.lambda_star >= cfg.eps_min && cert.lambda_star > 0.0) {
      return CertifiedStep{std::move(m), std::move(cert)};
    }
  }
  return std::nullopt;
}

RunResult plan_sos(const RobotModel& model, const JointConfig& theta0, const CartesianPoint& goal,
                   std::span<const Obstacle> obstacles, const JointBounds& bounds,
                   const PlannerConfig& cfg) {
  cfg.validate();
  if (bounds.size() != model.dof()) throw DimensionError("plan_sos: bounds dimension mismatch");

  RunResult r;
  r.planner = "sos";
  r.goal = goal;
  JointConfig theta = theta0;
  CartesianPoint z = forward_kinematics(model, theta);
  r.start = z;
  Bug2 bug(z, goal, {obstacles.begin(), obstacles.end()}, cfg.circulation);
  const Eigen::VectorXd& delta = bounds.delta();

  for (int t = 0;; ++t) {
    if ((z - goal).norm() < cfg.eps_tol) {
      r.success = true;
      r.reason = Termination::Goal;
      break;
    }
    if (t >= cfg.max_steps) {
      r.reason = Termination::Budget;
      break;
    }

    StepRecord rec;
    rec.index = t;
    rec.z_before = z;

    const auto t0 = std::chrono::steady_clock::now();
    std::optional<CertifiedStep> cs;
    try {
      cs = certify_configuration(model, theta, bounds, cfg);
    } catch (const SingularityError& e) {
      r.reason = Termination::Singular;
      r.detail = e.what();
      break;
    }
    rec.cert_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cs) {
      r.reason = Termination::Infeasible;
      r.detail = "certified half-width below eps_min after rho retries";
      break;
    }
    const double lam = cs->certificate.lambda_star;
    rec.lambda_star = lam;
    rec.epsilon = cs->model.epsilon;
    rec.rho = cs->model.rho;
    rec.kappa = condition_number(jacobian(model, theta));

    auto make_step = [&](const Eigen::Vector2d& d) -> CartesianPoint {
      return (cfg.alpha * lam * d).cwiseMax(-lam).cwiseMin(lam);
    };
    const auto decision = bug.decide(z, make_step, cs->model.epsilon);
    rec.mode = decision.mode;
    rec.requested_dz = decision.dz;

    Eigen::VectorXd dtheta = cs->model.eval(decision.dz) - theta;
    rec.pre_adjust_max_dtheta = dtheta.cwiseAbs().maxCoeff();
    rec.violation = (dtheta.cwiseAbs().array() > delta.array()).any();
    if (rec.violation) {
      const double factor = cfg.scaleback * (delta.array() / dtheta.cwiseAbs().array()).minCoeff();
      dtheta *= factor;
      rec.adjusted = true;
    }
    rec.applied_dtheta = dtheta;
    theta += dtheta;
    const CartesianPoint z_next = forward_kinematics(model, theta);
    rec.z_after = z_next;
    r.steps.push_back(rec);

    const auto progress = bug.advance(z, z_next, decision.dz.norm());
    z = z_next;
    if (progress == Bug2::Progress::LoopClosed) {
      r.reason = Termination::Infeasible;
      r.detail = "boundary following returned to the hit point";
      break;
    }
  }
  finish(r, z, theta);
  return r;
}

// ---------------------------------------------------------------------------
// Clipping baseline

RunResult plan_vanilla(const RobotModel& model, const JointConfig& theta0,
                       const CartesianPoint& goal, std::span<const Obstacle> obstacles,
                       const JointBounds& bounds, const PlannerConfig& cfg,
                       std::optional<double> kappa0) {
  cfg.validate();
  if (bounds.size() != model.dof()) throw DimensionError("plan_vanilla: bounds dimension mismatch");

  RunResult r;
  r.planner = "vanilla";
  r.goal = goal;
  JointConfig theta = theta0;
  CartesianPoint z = forward_kinematics(model, theta);
  r.start = z;
  const Eigen::VectorXd& delta = bounds.delta();

  double k0 = 0.0;
  try {
    k0 = kappa0.value_or(condition_number(jacobian(model, theta0)));
  } catch (const SingularityError& e) {
    r.reason = Termination::Singular;
    r.detail = e.what();
    finish(r, z, theta);
    return r;
  }
  const double step = delta.minCoeff() / k0;
  Bug2 bug(z, goal, {obstacles.begin(), obstacles.end()}, cfg.circulation);

  for (int t = 0;; ++t) {
    if ((z - goal).norm() < cfg.eps_tol) {
      r.success = true;
      r.reason = Termination::Goal;
      break;
    }
    if (t >= cfg.vanilla_max_steps) {
      r.reason = Termination::Budget;
      break;
    }

    StepRecord rec;
    rec.index = t;
    rec.z_before = z;
    PseudoInverse A;
    try {
      const Jacobian J = jacobian(model, theta);
      A = pseudoinverse(J);
      rec.kappa = condition_number(J);
    } catch (const SingularityError& e) {
      r.reason = Termination::Singular;
      r.detail = e.what();
      break;
    }

    const auto decision =
        bug.decide(z, [&](const Eigen::Vector2d& d) -> CartesianPoint { return step * d; });
    rec.mode = decision.mode;
    rec.requested_dz = decision.dz;

    Eigen::VectorXd dtheta = A * decision.dz;
    rec.pre_adjust_max_dtheta = dtheta.cwiseAbs().maxCoeff();
    rec.violation = (dtheta.cwiseAbs().array() > delta.array()).any();
    if (rec.violation) {
      dtheta = dtheta.cwiseMax(-delta).cwiseMin(delta);
      rec.adjusted = true;
    }
    rec.applied_dtheta = dtheta;
    theta += dtheta;
    const CartesianPoint z_next = forward_kinematics(model, theta);
    rec.z_after = z_next;
    r.steps.push_back(rec);

    const auto progress = bug.advance(z, z_next, step);
    z = z_next;
    if (progress == Bug2::Progress::LoopClosed) {
      r.reason = Termination::Infeasible;
      r.detail = "boundary following returned to the hit point";
      break;
    }
  }
  finish(r, z, theta);
  return r;
}

}  // namespace reachcert
