#include "reachcert/serialize.hpp"

#include <algorithm>

namespace reachcert {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
json point(const CartesianPoint& p) { return {p.x(), p.y()}; }

Eigen::VectorXd to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

CartesianPoint to_point(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw std::invalid_argument("point must have two coordinates");
  return {v[0], v[1]};
}

}  // namespace

json to_json(const PolyIkModel& m) {
  json A = json::array();
  for (int i = 0; i < m.A.rows(); ++i) A.push_back({m.A(i, 0), m.A(i, 1)});
  json B = json::array();
  for (int i = 0; i < m.dof(); ++i) B.push_back({{"b11", m.b11(i)}, {"b12", m.b12(i)}, {"b22", m.b22(i)}});
  return {{"theta0", vec(m.theta0)}, {"z0", point(m.z0)}, {"A", A},      {"B", B},
          {"rho", m.rho},            {"epsilon", m.epsilon}, {"h", m.h}};
}

json to_json(const Certificate& c) {
  return {{"lambda_star", c.lambda_star},
          {"epsilon", c.epsilon},
          {"delta_eff", vec(c.delta_eff.delta_eff)},
          {"slack", vec(c.slack)},
          {"iterations", c.iterations}};
}

json to_json(const StepRecord& s) {
  return {{"index", s.index},
          {"mode", to_string(s.mode)},
          {"z_before", point(s.z_before)},
          {"z_after", point(s.z_after)},
          {"requested_dz", point(s.requested_dz)},
          {"applied_dtheta", vec(s.applied_dtheta)},
          {"pre_adjust_max_dtheta", s.pre_adjust_max_dtheta},
          {"lambda_star", s.lambda_star},
          {"kappa", s.kappa},
          {"epsilon", s.epsilon},
          {"rho", s.rho},
          {"violation", s.violation},
          {"adjusted", s.adjusted},
          {"drift", s.drift()},
          {"cert_time_s", s.cert_time_s}};
}

json to_json(const RunResult& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(to_json(s));
  return {{"planner", r.planner},
          {"success", r.success},
          {"termination", to_string(r.reason)},
          {"detail", r.detail},
          {"start", point(r.start)},
          {"goal", point(r.goal)},
          {"final_theta", vec(r.final_theta)},
          {"final_distance", r.final_distance},
          {"path_length", r.path_length},
          {"violations", r.violation_count()},
          {"steps", steps}};
}

json to_json(const Obstacle& o) {
  return {{"center", point(o.center)}, {"radius", o.radius}, {"safety_margin", o.safety_margin}};
}

Obstacle obstacle_from_json(const json& j) {
  Obstacle o;
  o.center = to_point(j.at("center"));
  o.radius = j.at("radius").get<double>();
  o.safety_margin = j.value("safety_margin", 0.0);
  if (!(o.radius > 0.0) || o.safety_margin < 0.0) {
    throw std::invalid_argument("obstacle needs radius > 0 and margin >= 0");
  }
  return o;
}

json to_json(const Scenario& s) {
  json obs = json::array();
  for (const auto& o : s.obstacles) obs.push_back(to_json(o));
  return {{"id", s.id},
          {"link_lengths", s.model.link_lengths()},
          {"theta0", vec(s.theta0)},
          {"goal", point(s.goal)},
          {"obstacles", obs},
          {"delta", s.delta},
          {"metadata",
           {{"kappa0", s.meta.kappa0},
            {"kappa_ratio", s.meta.kappa_ratio},
            {"min_lambda", s.meta.min_lambda},
            {"est_steps", s.meta.est_steps},
            {"seed", s.meta.seed}}}};
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.id = j.at("id").get<std::string>();
  s.model = RobotModel(j.at("link_lengths").get<std::vector<double>>());
  s.theta0 = to_vec(j.at("theta0"));
  if (s.theta0.size() != s.model.dof()) throw std::invalid_argument("theta0 dimension mismatch");
  s.goal = to_point(j.at("goal"));
  for (const auto& o : j.at("obstacles")) s.obstacles.push_back(obstacle_from_json(o));
  s.delta = j.at("delta").get<double>();
  if (!(s.delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (j.contains("metadata")) {
    const auto& m = j.at("metadata");
    s.meta.kappa0 = m.value("kappa0", 0.0);
    s.meta.kappa_ratio = m.value("kappa_ratio", 0.0);
    s.meta.min_lambda = m.value("min_lambda", 0.0);
    s.meta.est_steps = m.value("est_steps", 0.0);
    s.meta.seed = m.value("seed", std::uint64_t{0});
  }
  return s;
}

json to_json(const PlannerConfig& c) {
  return {{"alpha", c.alpha},
          {"eps_tol", c.eps_tol},
          {"eps_min", c.eps_min},
          {"rho0", c.rho0},
          {"rho_retries", c.rho_retries},
          {"max_steps", c.max_steps},
          {"vanilla_max_steps", c.vanilla_max_steps},
          {"fd_step", c.fd_step},
          {"bisect_iters", c.bisect_iters},
          {"error_grid_side", c.error_grid_side},
          {"scaleback", c.scaleback},
          {"circulation", to_string(c.circulation)},
          {"oracle", c.oracle == FeasibilityOracle::Exact ? "exact" : "grid"},
          {"oracle_grid_side", c.oracle_grid_side}};
}

void apply_planner_json(const json& j, PlannerConfig& c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "eps_tol") c.eps_tol = value.get<double>();
    else if (key == "eps_min") c.eps_min = value.get<double>();
    else if (key == "rho0") c.rho0 = value.get<double>();
    else if (key == "rho_retries") c.rho_retries = value.get<int>();
    else if (key == "max_steps") c.max_steps = value.get<int>();
    else if (key == "vanilla_max_steps") c.vanilla_max_steps = value.get<int>();
    else if (key == "fd_step") c.fd_step = value.get<double>();
    else if (key == "bisect_iters") c.bisect_iters = value.get<int>();
    else if (key == "error_grid_side") c.error_grid_side = value.get<int>();
    else if (key == "scaleback") c.scaleback = value.get<double>();
    else if (key == "oracle_grid_side") c.oracle_grid_side = value.get<int>();
    else if (key == "circulation") {
      const auto v = value.get<std::string>();
      if (v == "ccw") c.circulation = Circulation::CounterClockwise;
      else if (v == "cw") c.circulation = Circulation::Clockwise;
      else throw std::invalid_argument("circulation must be ccw or cw");
    } else if (key == "oracle") {
      const auto v = value.get<std::string>();
      if (v == "exact") c.oracle = FeasibilityOracle::Exact;
      else if (v == "grid") c.oracle = FeasibilityOracle::Grid;
      else throw std::invalid_argument("oracle must be exact or grid");
    } else {
      throw std::invalid_argument("unknown planner setting '" + key + "'");
    }
  }
}

json parse_with_context(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = text.substr(0, std::min(e.byte, text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    const auto nl = upto.rfind('\n');
    const auto col = nl == std::string::npos ? upto.size() : upto.size() - nl - 1;
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                     e.what());
  }
}

}  // namespace reachcert
