#include "doctest.h"
#include "reachcert/certifier.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace reachcert;

namespace {

using testing::dense_grid_max;
using testing::eval;
using testing::form;
using testing::linear_model;

const RobotModel kArm({1.0, 0.8, 0.6});

JointConfig well_conditioned_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (;;) {
    JointConfig q(3);
    for (int i = 0; i < 3; ++i) q[i] = u(rng);
    const double k = condition_number(jacobian(kArm, q));
    if (k > 2.0 && k < 8.0) return q;
  }
}

EffectiveBounds eff_of(const JointBounds& b, double eps) {
  return std::get<EffectiveBounds>(effective_bounds(b, eps));
}

}  // namespace

TEST_CASE("quad_box_max closed cases") {
  CHECK(quad_box_max(form(0, 0, 1, 0, 1), 0.1) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(quad_box_max(form(1, 0, 0, 0, 0), 0.05) == doctest::Approx(0.05).epsilon(1e-14));
  // Concave bowl with its peak inside the box.
  CHECK(quad_box_max(form(0.02, 0, -1, 0, -1), 0.1) == doctest::Approx(0.0001).epsilon(1e-12));
  // Saddle: maximum on an edge interior.
  const Eigen::Matrix3d saddle = form(0, 0.01, 1, 0, -1);
  CHECK(quad_box_max(saddle, 0.1) == doctest::Approx(0.01 + 0.000025).epsilon(1e-12));
  CHECK(quad_box_max(form(3, -2, 5, 1, 2), 0.0) == 0.0);
}

TEST_CASE("quad_box_max matches a 201x201 dense grid within resolution") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ul(0.001, 0.2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Matrix3d Q = form(g(rng), g(rng), 10 * g(rng), 10 * g(rng), 10 * g(rng));
    const double lambda = ul(rng);
    const double exact = quad_box_max(Q, lambda);
    const double grid = dense_grid_max(Q, lambda, 201);
    // Any box point is within spacing/sqrt(2) of a node; bound by gradient + curvature.
    const double spacing = 2 * lambda / 200;
    const double r = spacing / std::sqrt(2.0);
    const double grad = 2 * (std::hypot(Q(0, 1), Q(0, 2)) + Q.block<2, 2>(1, 1).norm() * lambda * std::sqrt(2.0));
    const double curv = Q.block<2, 2>(1, 1).norm();
    CHECK(grid <= exact + 1e-14);
    CHECK(exact - grid <= grad * r + curv * r * r + 1e-14);
  }
}

TEST_CASE("grid oracle agrees with the independent grid") {
  const Eigen::Matrix3d Q = form(0.3, -1.2, 4, 2, -3);
  CHECK(grid_box_max(Q, 0.05, 21) == doctest::Approx(dense_grid_max(Q, 0.05, 21)).epsilon(1e-14));
  CHECK(grid_box_max(Q, 0.05, 21) <= quad_box_max(Q, 0.05) + 1e-15);
  CHECK_THROWS_AS(grid_box_max(Q, 0.05, 1), std::invalid_argument);
}

TEST_CASE("linear-only model: closed form lambda* = delta / (|a1| + |a2|)") {
  const PolyIkModel m = linear_model(1.0, 1.0);
  const EffectiveBounds eff{Eigen::VectorXd::Constant(1, 0.03)};
  const Certificate c = certify_bisection(m, eff, 1.0);
  CHECK(std::abs(c.lambda_star - 0.015) <= std::ldexp(1.0, -50));
  CHECK(c.lambda_star <= 0.015);
  CHECK(c.iterations == 50);
  CHECK(c.slack[0] >= 0.0);

  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const double a1 = u(rng);
    const double a2 = u(rng);
    const Certificate ci = certify_bisection(linear_model(a1, a2), eff, 1.0);
    const double closed = 0.03 / (std::abs(a1) + std::abs(a2));
    CHECK(std::abs(ci.lambda_star - std::min(closed, 1.0)) <= std::ldexp(1.0, -49));

    // Scaling the model by s scales lambda* by 1/s.
    const double s = 2.5;
    const Certificate cs = certify_bisection(linear_model(s * a1, s * a2), eff, 1.0);
    CHECK(std::abs(cs.lambda_star - std::min(closed / s, 1.0)) <= std::ldexp(1.0, -49));
  }
}

TEST_CASE("certify_bisection caps at lambda_max and is monotone in the bounds") {
  const PolyIkModel m = linear_model(1.0, 1.0);
  const EffectiveBounds eff{Eigen::VectorXd::Constant(1, 0.03)};
  const Certificate capped = certify_bisection(m, eff, 0.008);
  CHECK(capped.lambda_star == 0.008);
  CHECK(capped.iterations == 0);

  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const PolyIkModel pm = build_poly_ik(kArm, well_conditioned_pose(rng), 0.05);
    const auto b = JointBounds::uniform(3, 0.03);
    const Certificate c1 = certify_bisection(pm, eff_of(b, 0.0), 0.05);
    const Certificate c2 = certify_bisection(pm, eff_of(JointBounds::uniform(3, 0.06), 0.0), 0.05);
    const Certificate c0 = certify_bisection(pm, eff_of(b, 0.01), 0.05);
    CHECK(c2.lambda_star >= c1.lambda_star);
    CHECK(c0.lambda_star <= c1.lambda_star);
  }
  CHECK_THROWS_AS(certify_bisection(m, eff, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(certify_bisection(m, EffectiveBounds{Eigen::VectorXd::Constant(1, 0.0)}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("bisection boundary: feasible at lambda*, infeasible just above") {
  std::mt19937_64 rng(34);
  int interior = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const PolyIkModel pm = build_poly_ik(kArm, well_conditioned_pose(rng), 0.1);
    const EffectiveBounds eff = eff_of(JointBounds::uniform(3, 0.035), 0.0);
    const Certificate c = certify_bisection(pm, eff, 0.1);
    CHECK(c.lambda_star > 0.0);
    CHECK(box_feasible(pm, eff, c.lambda_star));
    CHECK((c.slack.array() >= 0.0).all());
    if (c.lambda_star < 0.1) {
      ++interior;
      CHECK_FALSE(box_feasible(pm, eff, c.lambda_star * (1 + 1e-3)));
    }
  }
  CHECK(interior > 100);
}

TEST_CASE("soundness: sampled displacements inside the certified box respect delta_eff") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    PolyIkModel pm = build_poly_ik(kArm, well_conditioned_pose(rng), 0.008);
    pm.epsilon = estimate_error(pm, kArm);
    const EffectiveBounds eff = eff_of(JointBounds::uniform(3, 0.03), pm.epsilon);
    const Certificate c = certify_bisection(pm, eff, pm.rho);
    std::uniform_real_distribution<double> u(-c.lambda_star, c.lambda_star);
    for (int k = 0; k < 10000; ++k) {
      const Eigen::VectorXd d = pm.displacement(CartesianPoint(u(rng), u(rng)));
      CHECK((d.cwiseAbs().array() <= eff.delta_eff.array() + 1e-12).all());
    }
  }
}

TEST_CASE("grid feasibility oracle is never more conservative than exact") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 30; ++trial) {
    const PolyIkModel pm = build_poly_ik(kArm, well_conditioned_pose(rng), 0.1);
    const EffectiveBounds eff = eff_of(JointBounds::uniform(3, 0.035), 0.0);
    CertifyOptions grid;
    grid.oracle = FeasibilityOracle::Grid;
    const double exact = certify_bisection(pm, eff, 0.1).lambda_star;
    const double approx = certify_bisection(pm, eff, 0.1, grid).lambda_star;
    CHECK(approx >= exact * (1 - 1e-12));
    CHECK(approx <= exact * 1.05);
  }
}

TEST_CASE("s_procedure_matrix and Sylvester test") {
  const Eigen::Matrix3d G1 = box_constraint_matrix(0, 0.1);
  CHECK(G1(0, 0) == doctest::Approx(0.01));
  CHECK(G1(1, 1) == -1.0);
  CHECK(G1(2, 2) == 0.0);
  CHECK(sylvester_psd(Eigen::Vector3d(0.03, 0, 0).asDiagonal()));
  CHECK_FALSE(sylvester_psd(Eigen::Vector3d(0.03, -1, 0).asDiagonal()));
}

TEST_CASE("s_procedure_feasible examples") {
  {
    const auto w = s_procedure_feasible(Eigen::Matrix3d::Zero(), 0.03, 1, 0.2);
    REQUIRE(w.has_value());
    CHECK(w->c1 == 0.0);
    CHECK(w->c2 == 0.0);
    CHECK(w->S.isApprox(Eigen::Matrix3d(Eigen::Vector3d(0.03, 0, 0).asDiagonal())));
    CHECK(sylvester_psd(w->S));
  }
  const Eigen::Matrix3d Q = form(1, 1, 0, 0, 0);
  for (int sigma : {1, -1}) {
    const auto inside = s_procedure_feasible(Q, 0.03, sigma, 0.015 - 1e-4);
    REQUIRE(inside.has_value());
    CHECK(inside->c1 >= 0.0);
    CHECK(inside->c2 >= 0.0);
    CHECK(sylvester_psd(inside->S));
    CHECK_FALSE(s_procedure_feasible(Q, 0.03, sigma, 0.015 + 1e-4).has_value());
  }
  CHECK_THROWS_AS(s_procedure_feasible(Q, 0.0, 1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(s_procedure_feasible(Q, 0.03, 0, 0.01), std::invalid_argument);
}

TEST_CASE("witness S certifies the bound on sampled points") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const PolyIkModel pm = build_poly_ik(kArm, well_conditioned_pose(rng), 0.05);
    const Eigen::Matrix3d Q = pm.q_matrix(trial % 3);
    const auto w = s_procedure_feasible(Q, 0.03, 1, 0.002);
    REQUIRE(w.has_value());
    std::uniform_real_distribution<double> u(-0.002, 0.002);
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng);
      const double y = u(rng);
      const Eigen::Vector3d v(1, x, y);
      // y^T S y = delta - q - c1 g1 - c2 g2 >= 0 implies q <= delta on the box.
      CHECK(v.dot(w->S * v) >= -1e-9);
      CHECK(eval(Q, x, y) <= 0.03);
    }
  }
}

TEST_CASE("S-procedure witnesses are never unsound") {
  const auto t = reachcert::testing::run_equivalence(38, 100);
  MESSAGE("checked " << t.constraint_checks << " constraints, " << t.feasible_triples
                     << " feasible triples, " << t.disagreements << " disagreements");
  CHECK(t.unsound == 0);
  CHECK(t.feasible_triples > 10);
  CHECK(t.feasible_triples < 90);
}

TEST_CASE("diagonal multipliers are conservative on an indefinite form") {
  // Indefinite curvature block: the exact box maximum of -q is below delta,
  // but no (c1, c2) >= 0 makes S positive semidefinite.
  Eigen::Matrix3d Q;
  Q << 0, -0.454456, -0.448162, -0.454456, 5.63843, 8.13201, -0.448162, 8.13201, 7.69772;
  const double lambda = 0.0556949351;
  const double delta = 0.0337726862;
  CHECK(quad_box_max(-Q, lambda) <= delta - 5e-4);
  CHECK_FALSE(s_procedure_feasible(Q, delta, -1, lambda).has_value());
  // A looser bound above the relaxation value is certified.
  CHECK(s_procedure_feasible(Q, 0.0345, -1, lambda).has_value());
}
