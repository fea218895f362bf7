#include "reachcert/scenario.hpp"

#include "reachcert/serialize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace reachcert {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

std::string format_id(double delta, std::uint64_t index) {
  std::ostringstream os;
  os << "d" << std::lround(delta * 1000.0) << "-c" << index;
  return os.str();
}

}  // namespace

std::vector<JointConfig> track_points(const RobotModel& model, const JointConfig& theta0,
                                      const std::vector<CartesianPoint>& targets, double max_substep) {
  if (!(max_substep > 0.0)) throw std::invalid_argument("max_substep must be positive");
  std::vector<JointConfig> out;
  out.reserve(targets.size());
  JointConfig theta = theta0;
  CartesianPoint from = forward_kinematics(model, theta0);
  try {
    for (const auto& to : targets) {
      const int n = std::max(1, static_cast<int>(std::ceil((to - from).norm() / max_substep)));
      for (int k = 1; k <= n; ++k) {
        const CartesianPoint target = from + (to - from) * (static_cast<double>(k) / n);
        // Two corrective iterations per substep keep the tracking error negligible.
        for (int it = 0; it < 2; ++it) {
          theta += pseudoinverse(jacobian(model, theta)) * (target - forward_kinematics(model, theta));
        }
      }
      if ((forward_kinematics(model, theta) - to).norm() > kTrackTolerance) return {};
      out.push_back(theta);
      from = to;
    }
  } catch (const SingularityError&) {
    return {};
  }
  return out;
}

std::vector<JointConfig> track_line(const RobotModel& model, const JointConfig& theta0,
                                    const CartesianPoint& goal, int samples, int substeps) {
  const CartesianPoint start = forward_kinematics(model, theta0);
  std::vector<CartesianPoint> targets;
  for (int k = 1; k <= samples; ++k) {
    targets.push_back(start + (goal - start) * (static_cast<double>(k) / samples));
  }
  const double sub = (goal - start).norm() / (static_cast<double>(samples) * substeps);
  auto path = track_points(model, theta0, targets, sub > 0.0 ? sub * (1.0 + 1e-9) : 1.0);
  if (path.empty() && samples > 0) return {};
  path.insert(path.begin(), theta0);
  return path;
}

std::vector<CartesianPoint> detour_arc(const CartesianPoint& start, const CartesianPoint& goal,
                                       const CartesianPoint& center, double radius,
                                       Circulation circulation, double spacing) {
  const Eigen::Vector2d d = goal - start;
  const Eigen::Vector2d f = start - center;
  const double a = d.squaredNorm();
  const double b = 2.0 * f.dot(d);
  const double c = f.squaredNorm() - radius * radius;
  const double disc = b * b - 4.0 * a * c;
  if (a == 0.0 || disc <= 0.0) return {};
  const double t1 = (-b - std::sqrt(disc)) / (2.0 * a);
  const double t2 = (-b + std::sqrt(disc)) / (2.0 * a);
  if (t2 < 0.0 || t1 > 1.0) return {};
  // An endpoint inside the circle: the detour starts or ends mid-arc.
  const CartesianPoint entry = start + std::max(t1, 0.0) * d;
  const CartesianPoint exit = start + std::min(t2, 1.0) * d;

  const double a1 = std::atan2(entry.y() - center.y(), entry.x() - center.x());
  const double a2 = std::atan2(exit.y() - center.y(), exit.x() - center.x());
  const double two_pi = 2.0 * std::numbers::pi;
  double sweep = std::fmod(a2 - a1 + 2.0 * two_pi, two_pi);
  if (circulation == Circulation::Clockwise) sweep -= two_pi;
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) * radius / spacing)));
  std::vector<CartesianPoint> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double ang = a1 + sweep * k / n;
    out.push_back(center + radius * Eigen::Vector2d(std::cos(ang), std::sin(ang)));
  }
  return out;
}

FilterReport evaluate_filters(const Scenario& s, const GeneratorConfig& cfg, bool run_vanilla) {
  FilterReport rep;
  const Jacobian J0 = jacobian(s.model, s.theta0);
  if (min_singular_value(J0) <= 0.0) return rep;
  rep.meta.kappa0 = condition_number(J0);
  rep.kappa0_ok = rep.meta.kappa0 >= cfg.kappa0_min && rep.meta.kappa0 <= cfg.kappa0_max;
  if (!rep.kappa0_ok) return rep;

  const auto path = track_line(s.model, s.theta0, s.goal, cfg.path_samples, cfg.track_substeps);
  if (path.empty()) return rep;
  double kmax = 0.0;
  for (const auto& q : path) {
    const Jacobian J = jacobian(s.model, q);
    if (min_singular_value(J) <= 0.0) return rep;
    kmax = std::max(kmax, condition_number(J));
  }
  rep.meta.kappa_ratio = kmax / rep.meta.kappa0;
  rep.ratio_ok = rep.meta.kappa_ratio >= cfg.kappa_ratio_min &&
                rep.meta.kappa_ratio <= cfg.kappa_ratio_max;
  if (!rep.ratio_ok) return rep;

  const JointBounds bounds = s.bounds();
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& q : path) {
    std::optional<CertifiedStep> cs;
    try {
      cs = certify_configuration(s.model, q, bounds, cfg.planner);
    } catch (const SingularityError&) {
      return rep;
    }
    if (!cs) return rep;
    lmin = std::min(lmin, cs->certificate.lambda_star);
  }
  // The Bug2 detour leaves the line; certify along the circulation arc too.
  for (const auto& o : s.obstacles) {
    auto arc = detour_arc(s.start(), s.goal, o.center, o.inflated_radius() + cfg.detour_offset,
                          cfg.planner.circulation, cfg.detour_spacing);
    if (arc.empty()) continue;
    const auto qs = track_points(s.model, s.theta0, arc, cfg.detour_spacing);
    if (qs.empty()) return rep;
    for (const auto& q : qs) {
      std::optional<CertifiedStep> cs;
      try {
        cs = certify_configuration(s.model, q, bounds, cfg.planner);
      } catch (const SingularityError&) {
        return rep;
      }
      if (!cs) return rep;
      lmin = std::min(lmin, cs->certificate.lambda_star);
    }
  }
  rep.meta.min_lambda = lmin;
  rep.lambda_ok = lmin > 0.0;
  if (!rep.lambda_ok) return rep;

  const double dist = (s.goal - s.start()).norm();
  rep.meta.est_steps = dist / (cfg.planner.alpha * lmin);
  rep.steps_ok = rep.meta.est_steps < cfg.est_steps_max;
  if (!rep.steps_ok || !run_vanilla) return rep;

  const RunResult v = plan_vanilla(s.model, s.theta0, s.goal, s.obstacles, bounds, cfg.planner,
                                   rep.meta.kappa0);
  rep.vanilla_violates = v.violation_count() >= 1;
  return rep;
}

Scenario sample_candidate(const RobotModel& model, double delta, std::uint64_t seed,
                          std::uint64_t index, const GeneratorConfig& cfg) {
  const std::uint64_t cseed = candidate_seed(seed, index);
  std::mt19937_64 rng(cseed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Scenario s;
  s.id = format_id(delta, index);
  s.model = model;
  s.delta = delta;
  s.meta.seed = cseed;

  const double outer = model.reach() - cfg.workspace_margin;
  s.theta0.resize(model.dof());
  for (;;) {
    for (int i = 0; i < model.dof(); ++i) s.theta0[i] = angle(rng);
    const double r = forward_kinematics(model, s.theta0).norm();
    if (r >= cfg.workspace_inner && r <= outer) break;
  }
  const CartesianPoint start = forward_kinematics(model, s.theta0);
  const double phi = angle(rng);
  const double dist = cfg.goal_dist_min + (cfg.goal_dist_max - cfg.goal_dist_min) * unit(rng);
  const Eigen::Vector2d dir(std::cos(phi), std::sin(phi));
  s.goal = start + dist * dir;

  Obstacle o;
  o.radius = cfg.obstacle_radius;
  o.safety_margin = cfg.safety_margin;
  const double jitter = cfg.obstacle_jitter * (2.0 * unit(rng) - 1.0);
  o.center = 0.5 * (start + s.goal) + jitter * Eigen::Vector2d(-dir.y(), dir.x());
  s.obstacles = {o};
  return s;
}

GenerationResult generate_scenarios(const RobotModel& model, double delta, int count,
                                    std::uint64_t seed, const GeneratorConfig& cfg) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  GenerationResult out;
  if (count <= 0) return out;

  const int threads = cfg.threads > 0 ? cfg.threads
                                      : std::max(1u, std::thread::hardware_concurrency());
  const int batch = std::max(16, 4 * threads);
  std::vector<FilterReport> reports(batch);
  std::vector<Scenario> candidates(batch);

  std::uint64_t next = 0;
  while (static_cast<int>(out.scenarios.size()) < count && next < static_cast<std::uint64_t>(cfg.attempt_cap)) {
    const int n = static_cast<int>(
        std::min<std::uint64_t>(batch, static_cast<std::uint64_t>(cfg.attempt_cap) - next));
    std::atomic<int> cursor{0};
    auto work = [&] {
      for (int k = cursor++; k < n; k = cursor++) {
        candidates[k] = sample_candidate(model, delta, seed, next + k, cfg);
        reports[k] = evaluate_filters(candidates[k], cfg);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(threads, n); ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    // Accept in candidate order so the result is independent of scheduling.
    for (int k = 0; k < n && static_cast<int>(out.scenarios.size()) < count; ++k) {
      out.attempts = static_cast<int>(next + k + 1);
      if (reports[k].accepted()) {
        Scenario s = candidates[k];
        const std::uint64_t cseed = s.meta.seed;
        s.meta = reports[k].meta;
        s.meta.seed = cseed;
        out.scenarios.push_back(std::move(s));
      }
    }
    next += n;
  }
  out.shortfall = static_cast<int>(out.scenarios.size()) < count;
  return out;
}

void save_scenarios(const std::vector<Scenario>& scenarios, const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : scenarios) j.push_back(to_json(s));
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  const nlohmann::json j = parse_with_context(buf.str(), path.string());
  if (!j.is_array()) throw ParseError(path.string() + ": expected a JSON array of scenarios");

  const GeneratorConfig limits;
  std::vector<Scenario> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    try {
      out.push_back(scenario_from_json(j[k]));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": scenario " + std::to_string(k) + ": " + e.what());
    }
    const auto& m = out.back().meta;
    if (warnings && (m.kappa0 < limits.kappa0_min || m.kappa0 > limits.kappa0_max)) {
      warnings->push_back("scenario " + out.back().id + ": kappa0 " + std::to_string(m.kappa0) +
                          " outside [" + std::to_string(limits.kappa0_min) + ", " +
                          std::to_string(limits.kappa0_max) + "]");
    }
    if (warnings && m.kappa_ratio > 0.0 && m.kappa_ratio < limits.kappa_ratio_min) {
      warnings->push_back("scenario " + out.back().id + ": kappa ratio below acceptance threshold");
    }
  }
  return out;
}

}  // namespace reachcert
