#include "reachcert/cli.hpp"

#include "reachcert/bench.hpp"
#include "reachcert/plot.hpp"
#include "reachcert/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace reachcert::cli {

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_json(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << j.dump(2) << "\n";
}

int exit_code(const RunResult& r) {
  switch (r.reason) {
    case Termination::Goal: return kOk;
    case Termination::Budget: return kBudget;
    default: return kInfeasible;
  }
}

// Planner settings shared by every subcommand: defaults, then --config, then flags.
struct PlannerFlags {
  std::string config;
  PlannerConfig values;
  std::string circulation = "ccw";
  std::string oracle = "exact";
  std::vector<std::pair<CLI::Option*, std::function<void(PlannerConfig&)>>> overrides;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "JSON file with planner settings")->check(CLI::ExistingFile);
    add(app, "--alpha", values.alpha, "step fraction of lambda*", &PlannerConfig::alpha);
    add(app, "--eps-tol", values.eps_tol, "goal tolerance (m)", &PlannerConfig::eps_tol);
    add(app, "--eps-min", values.eps_min, "smallest usable lambda*", &PlannerConfig::eps_min);
    add(app, "--rho0", values.rho0, "initial error-estimation radius (m)", &PlannerConfig::rho0);
    add(app, "--rho-retries", values.rho_retries, "rho halvings before giving up",
        &PlannerConfig::rho_retries);
    add(app, "--max-steps", values.max_steps, "certified planner budget", &PlannerConfig::max_steps);
    add(app, "--vanilla-max-steps", values.vanilla_max_steps, "baseline budget",
        &PlannerConfig::vanilla_max_steps);
    add(app, "--fd-step", values.fd_step, "finite-difference step for the quadratic terms",
        &PlannerConfig::fd_step);
    add(app, "--bisect-iters", values.bisect_iters, "bisection iterations", &PlannerConfig::bisect_iters);
    add(app, "--error-grid", values.error_grid_side, "grid side for the error estimate",
        &PlannerConfig::error_grid_side);
    add(app, "--scaleback", values.scaleback, "scale-back factor", &PlannerConfig::scaleback);
    auto* c = app.add_option("--circulation", circulation, "boundary-following direction")
                  ->check(CLI::IsMember({"ccw", "cw"}));
    overrides.emplace_back(c, [this](PlannerConfig& p) {
      p.circulation = circulation == "cw" ? Circulation::Clockwise : Circulation::CounterClockwise;
    });
    auto* o = app.add_option("--oracle", oracle, "box-feasibility oracle")
                  ->check(CLI::IsMember({"exact", "grid"}));
    overrides.emplace_back(o, [this](PlannerConfig& p) {
      p.oracle = oracle == "grid" ? FeasibilityOracle::Grid : FeasibilityOracle::Exact;
    });
  }

  template <class T>
  void add(CLI::App& app, const std::string& name, T& slot, const std::string& help,
           T PlannerConfig::*member) {
    auto* opt = app.add_option(name, slot, help);
    overrides.emplace_back(opt, [&slot, member](PlannerConfig& p) { p.*member = slot; });
  }

  [[nodiscard]] PlannerConfig resolve() const {
    PlannerConfig p;
    if (!config.empty()) {
      const json j = parse_with_context(read_file(config), config);
      if (!j.is_object()) throw InputError(config + ": expected a JSON object");
      try {
        apply_planner_json(j, p);
      } catch (const json::exception& e) {
        throw InputError(config + ": " + e.what());
      }
    }
    for (const auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(p);
    }
    p.validate();
    return p;
  }
};

struct ScenarioInput {
  std::string file;
  int index = 0;
  std::string id;
  std::vector<double> links{1.0, 0.8, 0.6};
  std::vector<double> theta;
  std::vector<double> goal;
  std::vector<std::vector<double>> obstacles;
  double delta = 0.0;

  void attach(CLI::App& app) {
    app.add_option("--scenarios", file, "scenario JSON file")->check(CLI::ExistingFile);
    app.add_option("--index", index, "scenario index in the file");
    app.add_option("--id", id, "scenario id in the file (overrides --index)");
    app.add_option("--links", links, "link lengths (inline scenario)")->delimiter(',');
    app.add_option("--theta", theta, "start joint angles (inline scenario)")->delimiter(',');
    app.add_option("--goal", goal, "goal x,y (inline scenario)")->delimiter(',')->expected(2);
    app.add_option("--obstacle", obstacles, "obstacle cx,cy[,radius[,margin]]; repeatable")
        ->delimiter(',');
    app.add_option("--delta", delta, "uniform per-step joint bound (inline scenario)");
  }

  [[nodiscard]] Scenario resolve() const {
    if (!file.empty()) {
      const auto all = load_scenarios(file);
      if (!id.empty()) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const Scenario& s) { return s.id == id; });
        if (it == all.end()) throw InputError("no scenario with id '" + id + "' in " + file);
        return *it;
      }
      if (index < 0 || index >= static_cast<int>(all.size())) {
        throw InputError("scenario index " + std::to_string(index) + " out of range for " + file);
      }
      return all[index];
    }
    if (theta.empty() || goal.size() != 2 || !(delta > 0.0)) {
      throw InputError("inline scenario needs --theta, --goal x,y and --delta > 0 (or --scenarios)");
    }
    Scenario s;
    s.id = "inline";
    s.model = RobotModel(links);
    s.theta0 = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    if (s.theta0.size() != s.model.dof()) throw InputError("--theta needs one angle per link");
    s.goal = {goal[0], goal[1]};
    s.delta = delta;
    for (const auto& o : obstacles) {
      if (o.size() < 2 || o.size() > 4) throw InputError("--obstacle takes cx,cy[,radius[,margin]]");
      Obstacle ob;
      ob.center = {o[0], o[1]};
      if (o.size() > 2) ob.radius = o[2];
      if (o.size() > 3) ob.safety_margin = o[3];
      s.obstacles.push_back(ob);
    }
    s.meta.kappa0 = condition_number(jacobian(s.model, s.theta0));
    return s;
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified reachable boxes and SOS-verified Bug2 planning for planar arms", "reachcert"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  PlannerFlags planner;
  std::uint64_t seed = 1;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    planner.attach(*sub);
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
  };

  // certify
  auto* certify = app.add_subcommand("certify", "certify the reachable box at one configuration");
  std::vector<double> c_links{1.0, 0.8, 0.6};
  std::vector<double> c_theta;
  std::vector<double> c_delta;
  double c_rho = 0.008;
  std::string c_out;
  certify->add_option("--links", c_links, "link lengths")->delimiter(',');
  certify->add_option("--theta", c_theta, "joint angles")->delimiter(',')->required();
  certify->add_option("--delta", c_delta, "per-joint bound; one value applies to all joints")
      ->delimiter(',')
      ->required();
  certify->add_option("--rho", c_rho, "error-estimation radius (m)");
  certify->add_option("--out", c_out, "output JSON file ('-' for stdout)");
  planner.attach(*certify);

  // plan
  auto* plan = app.add_subcommand("plan", "run one planner on a scenario");
  ScenarioInput p_in;
  std::string p_planner = "sos";
  std::string p_out;
  std::string p_plots;
  p_in.attach(*plan);
  plan->add_option("--planner", p_planner, "planner")->check(CLI::IsMember({"sos", "vanilla"}));
  plan->add_option("--out", p_out, "run trace JSON file ('-' for stdout)");
  plan->add_option("--plots", p_plots, "directory for SVG plots");
  planner.attach(*plan);

  // gen
  auto* gen = app.add_subcommand("gen", "generate adversarial scenarios");
  double g_delta = 0.0;
  int g_count = 10;
  std::string g_out;
  gen->add_option("--delta", g_delta, "uniform per-step joint bound")->required();
  gen->add_option("--count", g_count, "scenarios to accept");
  gen->add_option("--out", g_out, "scenario JSON file")->required();
  add_common(gen);

  // bench
  auto* bench = app.add_subcommand("bench", "benchmark both planners over the delta settings");
  BenchConfig b_cfg;
  std::string b_out = "bench_out";
  std::string b_scenarios;
  bench->add_option("--deltas", b_cfg.deltas, "delta settings")->delimiter(',');
  bench->add_option("--per-delta", b_cfg.per_delta, "scenarios per delta");
  bench->add_option("--scenarios", b_scenarios, "benchmark a saved pool instead of generating")
      ->check(CLI::ExistingFile);
  bench->add_option("--out", b_out, "output directory");
  add_common(bench);

  // plot
  auto* plot = app.add_subcommand("plot", "run planners on a scenario and write SVG plots");
  ScenarioInput pl_in;
  std::string pl_planner = "both";
  std::string pl_out = "plots";
  pl_in.attach(*plot);
  plot->add_option("--planner", pl_planner, "planner")->check(CLI::IsMember({"sos", "vanilla", "both"}));
  plot->add_option("--out", pl_out, "output directory");
  planner.attach(*plot);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    const PlannerConfig pc = planner.resolve();

    if (*certify) {
      const RobotModel model(c_links);
      if (static_cast<int>(c_theta.size()) != model.dof()) throw InputError("--theta needs one angle per link");
      const JointConfig theta =
          Eigen::Map<const Eigen::VectorXd>(c_theta.data(), static_cast<Eigen::Index>(c_theta.size()));
      const JointBounds bounds = c_delta.size() == 1
                                     ? JointBounds::uniform(model.dof(), c_delta[0])
                                     : JointBounds(Eigen::Map<const Eigen::VectorXd>(
                                           c_delta.data(), static_cast<Eigen::Index>(c_delta.size())));
      if (bounds.size() != model.dof()) throw InputError("--delta needs one value or one per joint");

      PolyIkModel m = build_poly_ik(model, theta, c_rho, pc.fd_step);
      m.epsilon = estimate_error(m, model, pc.error_grid_side);
      json j{{"model", to_json(m)}, {"kappa", condition_number(jacobian(model, theta))}};
      const auto eff = effective_bounds(bounds, m.epsilon);
      if (const auto* tc = std::get_if<TooCoarse>(&eff)) {
        j["status"] = "too_coarse";
        j["epsilon"] = tc->epsilon;
        j["worst_joint"] = tc->worst;
        write_json(j, c_out, out);
        err << "model too coarse: epsilon " << fmt(m.epsilon) << " >= delta of joint " << tc->worst << "\n";
        return kInfeasible;
      }
      CertifyOptions opts;
      opts.iterations = pc.bisect_iters;
      opts.oracle = pc.oracle;
      opts.grid_side = pc.oracle_grid_side;
      const Certificate cert = certify_bisection(m, std::get<EffectiveBounds>(eff), c_rho, opts);
      j["certificate"] = to_json(cert);
      const bool ok = cert.lambda_star >= pc.eps_min && cert.lambda_star > 0.0;
      j["status"] = ok ? "certified" : "infeasible";
      write_json(j, c_out, out);
      if (!c_out.empty() && c_out != "-") {
        out << "lambda* = " << fmt(cert.lambda_star) << " m, epsilon = " << fmt(m.epsilon) << "\n";
      }
      return ok ? kOk : kInfeasible;
    }

    if (*plan) {
      const Scenario s = p_in.resolve();
      const RunResult r =
          p_planner == "sos"
              ? plan_sos(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), pc)
              : plan_vanilla(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), pc,
                             s.meta.kappa0 > 0.0 ? std::optional(s.meta.kappa0) : std::nullopt);
      if (!p_out.empty()) write_json(to_json(r), p_out, out);
      if (!p_plots.empty() && !r.steps.empty()) emit_plots(r, s, p_plots, s.id + "_" + r.planner);
      if (p_out != "-") {
        out << r.planner << ": " << to_string(r.reason) << " after " << r.steps.size()
            << " steps, violations " << r.violation_count() << ", final distance "
            << fmt(r.final_distance) << " m" << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
      }
      return exit_code(r);
    }

    if (*gen) {
      if (!(g_delta > 0.0)) throw InputError("--delta must be positive");
      GeneratorConfig gc;
      gc.planner = pc;
      gc.threads = threads;
      const auto g = generate_scenarios(RobotModel({1.0, 0.8, 0.6}), g_delta, g_count, seed, gc);
      save_scenarios(g.scenarios, g_out);
      if (g.shortfall) {
        err << "warning: only " << g.scenarios.size() << " of " << g_count << " scenarios after "
            << g.attempts << " attempts\n";
      }
      out << "accepted " << g.scenarios.size() << " scenarios in " << g.attempts << " attempts -> "
          << g_out << "\n";
      return kOk;
    }

    if (*bench) {
      b_cfg.seed = seed;
      b_cfg.threads = threads;
      b_cfg.generator.planner = pc;
      BenchResult res = b_scenarios.empty() ? run_benchmark(RobotModel({1.0, 0.8, 0.6}), b_cfg)
                                            : run_benchmark(load_scenarios(b_scenarios), b_cfg);
      for (const auto& w : res.warnings) err << "warning: " << w << "\n";
      std::filesystem::create_directories(b_out);
      write_raw_csv(res.runs, std::filesystem::path(b_out) / "runs.csv");
      write_tables(res.rows, b_out);
      out << format_tables(res.rows);
      out << "total time " << fmt(res.total_time_s) << " s; outputs in " << b_out << "\n";
      return kOk;
    }

    if (*plot) {
      const Scenario s = pl_in.resolve();
      int code = kOk;
      for (const std::string which : {"vanilla", "sos"}) {
        if (pl_planner != "both" && pl_planner != which) continue;
        const RunResult r =
            which == "sos"
                ? plan_sos(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), pc)
                : plan_vanilla(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), pc,
                               s.meta.kappa0 > 0.0 ? std::optional(s.meta.kappa0) : std::nullopt);
        if (r.steps.empty()) {
          out << which << ": start already within tolerance; nothing to plot\n";
          continue;
        }
        for (const auto& f : emit_plots(r, s, pl_out, s.id + "_" + which)) out << f.string() << "\n";
        code = std::max(code, exit_code(r));
      }
      return code;
    }
  } catch (const SingularityError& e) {
    err << "singular configuration: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace reachcert::cli
