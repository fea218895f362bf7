#include "reachcert/scenario.hpp"
#include "reachcert/serialize.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace reachcert;
using reachcert::testing::default_arm;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("reachcert_" + name);
}

const GenerationResult& pool() {
  static const GenerationResult g = [] {
    GeneratorConfig cfg;
    return generate_scenarios(default_arm(), 0.035, 5, 3, cfg);
  }();
  return g;
}

}  // namespace

TEST_CASE("generated scenarios re-pass the filters") {
  const auto& g = pool();
  REQUIRE(g.scenarios.size() == 5);
  CHECK_FALSE(g.shortfall);
  GeneratorConfig cfg;
  for (const auto& s : g.scenarios) {
    CHECK(s.meta.kappa0 >= 2.5);
    CHECK(s.meta.kappa0 <= 8.0);
    CHECK(s.meta.kappa_ratio >= 1.6);
    CHECK(s.meta.min_lambda > 0.0);
    CHECK(s.meta.est_steps < 500.0);
    const auto rep = evaluate_filters(s, cfg);
    CHECK(rep.accepted());
    CHECK(rep.meta.kappa0 == s.meta.kappa0);
  }
}

TEST_CASE("generated scenarios: vanilla violates, certified does not") {
  for (const auto& s : pool().scenarios) {
    const auto v = plan_vanilla(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), {}, s.meta.kappa0);
    const auto o = plan_sos(s.model, s.theta0, s.goal, s.obstacles, s.bounds());
    CHECK(v.violation_count() >= 1);
    CHECK(o.violation_count() == 0);
    CHECK(o.success);
  }
}

TEST_CASE("generation is seed-deterministic and thread-independent") {
  GeneratorConfig one;
  one.threads = 1;
  GeneratorConfig many;
  many.threads = 4;
  const auto a = generate_scenarios(default_arm(), 0.03, 3, 99, one);
  const auto b = generate_scenarios(default_arm(), 0.03, 3, 99, many);
  REQUIRE(a.scenarios.size() == b.scenarios.size());
  CHECK(a.attempts == b.attempts);
  for (std::size_t k = 0; k < a.scenarios.size(); ++k) {
    CHECK(a.scenarios[k].id == b.scenarios[k].id);
    CHECK(a.scenarios[k].theta0 == b.scenarios[k].theta0);
    CHECK(a.scenarios[k].goal == b.scenarios[k].goal);
    CHECK(a.scenarios[k].meta.min_lambda == b.scenarios[k].meta.min_lambda);
  }
}

TEST_CASE("attempt cap yields a partial result") {
  GeneratorConfig cfg;
  cfg.attempt_cap = 5;
  const auto g = generate_scenarios(default_arm(), 0.03, 10, 1, cfg);
  CHECK(g.shortfall);
  CHECK(g.attempts == 5);
  CHECK(g.scenarios.size() < 10);
  CHECK_THROWS_AS(generate_scenarios(default_arm(), 0.0, 1, 1), std::invalid_argument);
}

TEST_CASE("candidate geometry") {
  GeneratorConfig cfg;
  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto s = sample_candidate(default_arm(), 0.03, 5, k, cfg);
    const double r = s.start().norm();
    CHECK(r >= cfg.workspace_inner);
    CHECK(r <= default_arm().reach() - cfg.workspace_margin);
    const double dist = (s.goal - s.start()).norm();
    CHECK(dist >= cfg.goal_dist_min - 1e-12);
    CHECK(dist <= cfg.goal_dist_max + 1e-12);
    REQUIRE(s.obstacles.size() == 1);
    const CartesianPoint mid = 0.5 * (s.start() + s.goal);
    CHECK((s.obstacles[0].center - mid).norm() <= cfg.obstacle_jitter + 1e-12);
    CHECK(std::abs((s.obstacles[0].center - mid).dot(s.goal - s.start())) < 1e-12);
  }
}

TEST_CASE("line tracking follows the chord") {
  const JointConfig q0 = (JointConfig(3) << 0.3, 1.2, 2.0).finished();
  const CartesianPoint z0 = forward_kinematics(default_arm(), q0);
  const CartesianPoint goal = z0 + CartesianPoint(0.1, -0.2);
  const auto path = track_line(default_arm(), q0, goal, 20, 8);
  REQUIRE(path.size() == 21);
  CHECK(path.front() == q0);
  for (int k = 0; k <= 20; ++k) {
    const CartesianPoint want = z0 + (goal - z0) * (k / 20.0);
    CHECK((forward_kinematics(default_arm(), path[k]) - want).norm() < 1e-6);
  }
  // Beyond reach: tracking must report failure.
  CHECK(track_line(default_arm(), q0, CartesianPoint(5.0, 0.0), 20, 8).empty());
}

TEST_CASE("detour arc") {
  const CartesianPoint c(0.5, 0.0);
  const auto ccw = detour_arc({0, 0}, {1, 0}, c, 0.1, Circulation::CounterClockwise, 0.01);
  REQUIRE(ccw.size() >= 3);
  CHECK((ccw.front() - CartesianPoint(0.4, 0)).norm() < 1e-12);
  CHECK((ccw.back() - CartesianPoint(0.6, 0)).norm() < 1e-12);
  for (const auto& p : ccw) {
    CHECK((p - c).norm() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p.y() <= 1e-12);  // ccw from the west point passes south
  }
  const auto cw = detour_arc({0, 0}, {1, 0}, c, 0.1, Circulation::Clockwise, 0.01);
  for (const auto& p : cw) CHECK(p.y() >= -1e-12);
  CHECK(detour_arc({0, 0.2}, {1, 0.2}, c, 0.1, Circulation::CounterClockwise, 0.01).empty());
}

TEST_CASE("save and load round trip") {
  const auto path = temp_file("roundtrip.json");
  save_scenarios(pool().scenarios, path);
  std::vector<std::string> warnings;
  const auto back = load_scenarios(path, &warnings);
  CHECK(warnings.empty());
  REQUIRE(back.size() == pool().scenarios.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    const auto& a = pool().scenarios[k];
    const auto& b = back[k];
    CHECK(a.id == b.id);
    CHECK(a.model == b.model);
    CHECK(a.theta0 == b.theta0);
    CHECK(a.goal == b.goal);
    CHECK(a.delta == b.delta);
    CHECK(a.obstacles[0].center == b.obstacles[0].center);
    CHECK(a.meta.kappa0 == b.meta.kappa0);
    CHECK(a.meta.kappa_ratio == b.meta.kappa_ratio);
    CHECK(a.meta.min_lambda == b.meta.min_lambda);
    CHECK(a.meta.est_steps == b.meta.est_steps);
    CHECK(a.meta.seed == b.meta.seed);
  }
  std::filesystem::remove(path);
}

TEST_CASE("empty scenario list") {
  const auto path = temp_file("empty.json");
  save_scenarios({}, path);
  CHECK(load_scenarios(path).empty());
  std::filesystem::remove(path);
}

TEST_CASE("malformed file reports the line") {
  const auto path = temp_file("bad.json");
  {
    std::ofstream f(path);
    f << "[\n  {\"id\": \"x\",\n   \"delta\": 0.03,,\n  }\n]\n";
  }
  try {
    load_scenarios(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  {
    std::ofstream f(path);
    f << "[{\"id\": \"x\"}]";
  }
  CHECK_THROWS_AS(load_scenarios(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("hand-edited kappa0 outside the band warns") {
  auto s = pool().scenarios.front();
  s.meta.kappa0 = 9.5;
  const auto path = temp_file("warn.json");
  save_scenarios({s}, path);
  std::vector<std::string> warnings;
  const auto back = load_scenarios(path, &warnings);
  CHECK(back.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("kappa0") != std::string::npos);
  std::filesystem::remove(path);
}
