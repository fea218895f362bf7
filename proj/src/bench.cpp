#include "reachcert/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace reachcert {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fixed(double x, int prec) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

std::string pm(const Stat& s, int prec) { return fixed(s.mean, prec) + " +/- " + fixed(s.std, prec); }

int worker_count(int requested, std::size_t jobs) {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  const int n = requested > 0 ? requested : hw;
  return std::max(1, std::min<int>(n, static_cast<int>(jobs)));
}

template <class F>
void parallel_for(std::size_t jobs, int threads, F&& body) {
  std::atomic<std::size_t> cursor{0};
  auto work = [&] {
    for (std::size_t k = cursor++; k < jobs; k = cursor++) body(k);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < worker_count(threads, jobs); ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

PlannerAggregate aggregate_planner(const std::vector<const RunRow*>& rows) {
  PlannerAggregate a;
  if (rows.empty()) return a;
  std::vector<double> viol, rate, fd, plr, steps, wall;
  double cert = 0.0, total_steps = 0.0, ok = 0.0;
  for (const RunRow* r : rows) {
    const auto& m = r->metrics;
    ok += m.success ? 1.0 : 0.0;
    viol.push_back(m.violation_count);
    rate.push_back(100.0 * m.violation_rate);
    fd.push_back(m.final_distance);
    plr.push_back(m.path_length_ratio);
    steps.push_back(m.steps);
    wall.push_back(m.wall_time_s);
    cert += m.cert_time_s;
    total_steps += m.steps;
  }
  a.success_rate = 100.0 * ok / static_cast<double>(rows.size());
  a.violations = summarize(viol);
  a.violation_rate = summarize(rate);
  a.final_distance = summarize(fd);
  a.path_length_ratio = summarize(plr);
  a.steps = summarize(steps);
  a.wall_time_s = summarize(wall);
  a.cert_ms_per_step = total_steps > 0.0 ? 1e3 * cert / total_steps : 0.0;
  return a;
}

BenchResult run_pool(std::vector<std::pair<double, std::vector<Scenario>>> pools,
                     std::vector<int> attempts, std::vector<bool> shortfall,
                     const BenchConfig& cfg, Clock::time_point t0, std::vector<std::string> warnings) {
  std::vector<const Scenario*> flat;
  for (const auto& [delta, list] : pools) {
    for (const auto& s : list) flat.push_back(&s);
  }
  std::vector<RunRow> runs(2 * flat.size());
  const PlannerConfig& pc = cfg.generator.planner;

  parallel_for(flat.size(), cfg.threads, [&](std::size_t k) {
    const Scenario& s = *flat[k];
    auto fill = [&](RunRow& row, const RunResult& r, double wall) {
      row.delta = s.delta;
      row.scenario = s.id;
      row.planner = r.planner;
      row.termination = to_string(r.reason);
      row.kappa0 = s.meta.kappa0;
      row.kappa_ratio = s.meta.kappa_ratio;
      row.min_lambda = s.meta.min_lambda;
      row.metrics = evaluate_run(r, s);
      row.metrics.wall_time_s = wall;
    };
    auto tv = Clock::now();
    const RunResult v = plan_vanilla(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), pc,
                                     s.meta.kappa0 > 0.0 ? std::optional(s.meta.kappa0) : std::nullopt);
    fill(runs[2 * k], v, seconds_since(tv));
    auto ts = Clock::now();
    const RunResult o = plan_sos(s.model, s.theta0, s.goal, s.obstacles, s.bounds(), pc);
    fill(runs[2 * k + 1], o, seconds_since(ts));
  });

  BenchResult out;
  out.warnings = std::move(warnings);
  std::size_t at = 0;
  for (std::size_t p = 0; p < pools.size(); ++p) {
    const std::size_t n = pools[p].second.size();
    std::vector<RunRow> slice(runs.begin() + 2 * at, runs.begin() + 2 * (at + n));
    at += n;
    if (n == 0) continue;
    AggregateRow row = aggregate(pools[p].first, slice);
    row.attempts = attempts[p];
    row.shortfall = shortfall[p];
    out.rows.push_back(row);
  }
  out.runs = std::move(runs);
  out.total_time_s = seconds_since(t0);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

const char* const kRawHeader =
    "delta,scenario,planner,termination,success,violations,steps,violation_rate,final_distance,"
    "path_length,straight_distance,path_length_ratio,wall_time_s,cert_time_s,kappa0,kappa_ratio,"
    "min_lambda";

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<Table> build_tables(const std::vector<AggregateRow>& rows, bool csv) {
  // CSV cells carry full precision; text cells are rounded for reading.
  auto cell = [csv](double x, int prec) { return csv ? num(x) : fixed(x, prec); };
  auto stat = [&](const Stat& s, int prec, std::vector<std::string>& out) {
    if (csv) {
      out.push_back(num(s.mean));
      out.push_back(num(s.std));
    } else {
      out.push_back(pm(s, prec));
    }
  };
  auto stat_head = [csv](const std::string& name, std::vector<std::string>& out) {
    if (csv) {
      out.push_back(name + "_mean");
      out.push_back(name + "_std");
    } else {
      out.push_back(name);
    }
  };

  std::vector<Table> t(4);
  t[0].title = "Table 1: accepted scenarios per delta";
  t[0].header = {"delta", "N", "attempts"};
  stat_head("kappa0", t[0].header);
  stat_head("kappa_ratio", t[0].header);
  stat_head("min_lambda", t[0].header);

  t[1].title = "Table 2: joint-limit violations";
  t[1].header = {"delta"};
  stat_head("vanilla_violations", t[1].header);
  stat_head("vanilla_rate_pct", t[1].header);
  stat_head("sos_violations", t[1].header);
  stat_head("sos_rate_pct", t[1].header);

  t[2].title = "Table 3: success rate, final distance, path length ratio";
  t[2].header = {"delta", "vanilla_success_pct", "sos_success_pct"};
  stat_head("vanilla_final_distance", t[2].header);
  stat_head("sos_final_distance", t[2].header);
  stat_head("vanilla_path_ratio", t[2].header);
  stat_head("sos_path_ratio", t[2].header);

  t[3].title = "Table 4: computation time";
  t[3].header = {"delta"};
  stat_head("vanilla_time_s", t[3].header);
  stat_head("sos_time_s", t[3].header);
  t[3].header.push_back("sos_cert_ms_per_step");
  stat_head("vanilla_steps", t[3].header);
  stat_head("sos_steps", t[3].header);

  for (const auto& r : rows) {
    std::vector<std::string> a{cell(r.delta, 3), std::to_string(r.n), std::to_string(r.attempts)};
    stat(r.kappa0, 2, a);
    stat(r.kappa_ratio, 2, a);
    stat(r.min_lambda, 5, a);
    t[0].rows.push_back(a);

    std::vector<std::string> b{cell(r.delta, 3)};
    stat(r.vanilla.violations, 1, b);
    stat(r.vanilla.violation_rate, 2, b);
    stat(r.sos.violations, 1, b);
    stat(r.sos.violation_rate, 2, b);
    t[1].rows.push_back(b);

    std::vector<std::string> c{cell(r.delta, 3), cell(r.vanilla.success_rate, 1),
                               cell(r.sos.success_rate, 1)};
    stat(r.vanilla.final_distance, 4, c);
    stat(r.sos.final_distance, 4, c);
    stat(r.vanilla.path_length_ratio, 2, c);
    stat(r.sos.path_length_ratio, 2, c);
    t[2].rows.push_back(c);

    std::vector<std::string> d{cell(r.delta, 3)};
    stat(r.vanilla.wall_time_s, 4, d);
    stat(r.sos.wall_time_s, 4, d);
    d.push_back(cell(r.sos.cert_ms_per_step, 3));
    stat(r.vanilla.steps, 1, d);
    stat(r.sos.steps, 1, d);
    t[3].rows.push_back(d);
  }
  return t;
}

std::string render_text(const Table& t) {
  std::vector<std::size_t> w(t.header.size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    w[c] = t.header[c].size();
    for (const auto& r : t.rows) w[c] = std::max(w[c], r[c].size());
  }
  std::ostringstream os;
  os << t.title << "  (mean +/- sample std, N-1)\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << (c ? "  " : "") << std::string(w[c] - cells[c].size(), ' ') << cells[c];
    }
    os << "\n";
  };
  line(t.header);
  std::size_t total = 0;
  for (auto x : w) total += x + 2;
  os << std::string(total - 2, '-') << "\n";
  for (const auto& r : t.rows) line(r);
  return os.str();
}

}  // namespace

RunMetrics evaluate_run(const RunResult& result, const Scenario& scenario) {
  RunMetrics m;
  m.success = result.success;
  m.steps = static_cast<int>(result.steps.size());
  m.violation_count = result.violation_count();
  m.violation_rate = m.steps > 0 ? static_cast<double>(m.violation_count) / m.steps : 0.0;
  m.final_distance = result.final_distance;
  for (const auto& s : result.steps) {
    m.path_length += (s.z_after - s.z_before).norm();
    m.cert_time_s += s.cert_time_s;
  }
  m.straight_distance = (scenario.goal - scenario.start()).norm();
  m.path_length_ratio = m.straight_distance > 0.0 ? m.path_length / m.straight_distance : 1.0;
  return m;
}

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return s;
}

AggregateRow aggregate(double delta, const std::vector<RunRow>& runs) {
  AggregateRow row;
  row.delta = delta;
  std::vector<const RunRow*> van, sos;
  std::vector<double> k0, kr, lm;
  for (const auto& r : runs) {
    if (r.planner == "vanilla") {
      van.push_back(&r);
      k0.push_back(r.kappa0);
      kr.push_back(r.kappa_ratio);
      lm.push_back(r.min_lambda);
    } else if (r.planner == "sos") {
      sos.push_back(&r);
    }
  }
  row.n = static_cast<int>(std::max(van.size(), sos.size()));
  row.kappa0 = summarize(k0);
  row.kappa_ratio = summarize(kr);
  row.min_lambda = summarize(lm);
  row.vanilla = aggregate_planner(van);
  row.sos = aggregate_planner(sos);
  return row;
}

std::uint64_t delta_seed(std::uint64_t seed, double delta) {
  return splitmix64(seed ^ static_cast<std::uint64_t>(std::llround(delta * 1e6)));
}

BenchResult run_benchmark(const RobotModel& model, const BenchConfig& cfg) {
  const auto t0 = Clock::now();
  std::vector<std::pair<double, std::vector<Scenario>>> pools;
  std::vector<int> attempts;
  std::vector<bool> shortfall;
  std::vector<std::string> warnings;
  GeneratorConfig gen = cfg.generator;
  if (gen.threads == 0) gen.threads = cfg.threads;
  for (double delta : cfg.deltas) {
    auto g = generate_scenarios(model, delta, cfg.per_delta, delta_seed(cfg.seed, delta), gen);
    if (g.shortfall) {
      warnings.push_back("delta " + fixed(delta, 3) + ": only " + std::to_string(g.scenarios.size()) +
                         " of " + std::to_string(cfg.per_delta) + " scenarios after " +
                         std::to_string(g.attempts) + " attempts");
    }
    attempts.push_back(g.attempts);
    shortfall.push_back(g.shortfall);
    pools.emplace_back(delta, std::move(g.scenarios));
  }
  return run_pool(std::move(pools), std::move(attempts), std::move(shortfall), cfg, t0,
                  std::move(warnings));
}

BenchResult run_benchmark(const std::vector<Scenario>& scenarios, const BenchConfig& cfg) {
  const auto t0 = Clock::now();
  std::map<double, std::vector<Scenario>> grouped;
  for (const auto& s : scenarios) grouped[s.delta].push_back(s);
  std::vector<std::pair<double, std::vector<Scenario>>> pools(grouped.begin(), grouped.end());
  std::vector<int> attempts(pools.size(), 0);
  std::vector<bool> shortfall(pools.size(), false);
  return run_pool(std::move(pools), std::move(attempts), std::move(shortfall), cfg, t0, {});
}

void write_raw_csv(const std::vector<RunRow>& runs, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << kRawHeader << "\n";
  for (const auto& r : runs) {
    const auto& m = r.metrics;
    f << num(r.delta) << ',' << r.scenario << ',' << r.planner << ',' << r.termination << ','
      << (m.success ? 1 : 0) << ',' << m.violation_count << ',' << m.steps << ','
      << num(m.violation_rate) << ',' << num(m.final_distance) << ',' << num(m.path_length) << ','
      << num(m.straight_distance) << ',' << num(m.path_length_ratio) << ',' << num(m.wall_time_s)
      << ',' << num(m.cert_time_s) << ',' << num(r.kappa0) << ',' << num(r.kappa_ratio) << ','
      << num(r.min_lambda) << "\n";
  }
}

std::vector<RunRow> read_raw_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != kRawHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<RunRow> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 17) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 17 columns");
    }
    RunRow r;
    r.delta = std::stod(c[0]);
    r.scenario = c[1];
    r.planner = c[2];
    r.termination = c[3];
    auto& m = r.metrics;
    m.success = c[4] == "1";
    m.violation_count = std::stoi(c[5]);
    m.steps = std::stoi(c[6]);
    m.violation_rate = std::stod(c[7]);
    m.final_distance = std::stod(c[8]);
    m.path_length = std::stod(c[9]);
    m.straight_distance = std::stod(c[10]);
    m.path_length_ratio = std::stod(c[11]);
    m.wall_time_s = std::stod(c[12]);
    m.cert_time_s = std::stod(c[13]);
    r.kappa0 = std::stod(c[14]);
    r.kappa_ratio = std::stod(c[15]);
    r.min_lambda = std::stod(c[16]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::filesystem::path> write_tables(const std::vector<AggregateRow>& rows,
                                                const std::filesystem::path& dir) {
  static const char* const names[] = {"table1_scenarios", "table2_violations",
                                      "table3_success_path", "table4_timing"};
  std::filesystem::create_directories(dir);
  const auto csv = build_tables(rows, true);
  const auto txt = build_tables(rows, false);
  std::vector<std::filesystem::path> written;
  for (int k = 0; k < 4; ++k) {
    const auto pc = dir / (std::string(names[k]) + ".csv");
    std::ofstream f(pc);
    if (!f) throw std::runtime_error("cannot write " + pc.string());
    for (std::size_t c = 0; c < csv[k].header.size(); ++c) f << (c ? "," : "") << csv[k].header[c];
    f << "\n";
    for (const auto& r : csv[k].rows) {
      for (std::size_t c = 0; c < r.size(); ++c) f << (c ? "," : "") << r[c];
      f << "\n";
    }
    const auto pt = dir / (std::string(names[k]) + ".txt");
    std::ofstream g(pt);
    if (!g) throw std::runtime_error("cannot write " + pt.string());
    g << render_text(txt[k]);
    written.push_back(pc);
    written.push_back(pt);
  }
  return written;
}

std::string format_tables(const std::vector<AggregateRow>& rows) {
  std::string out;
  for (const auto& t : build_tables(rows, false)) out += render_text(t) + "\n";
  return out;
}

}  // namespace reachcert
