#include "reachcert/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace reachcert {

namespace {

std::string f(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double x) {
    if (!std::isfinite(x)) return;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  void pad(double frac) {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    double span = hi - lo;
    if (span <= 0.0) span = std::max(std::abs(hi), 1.0) * 0.1;
    lo -= frac * span;
    hi += frac * span;
  }
};

// Axes box mapping data to pixels inside one SVG.
struct Panel {
  double x0, y0, w, h;
  Range xr, yr;

  [[nodiscard]] double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  [[nodiscard]] double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

class Svg {
 public:
  Svg(int width, int height) {
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "start",
            const std::string& extra = "") {
    os_ << "<text x=\"" << f(x) << "\" y=\"" << f(y) << "\" text-anchor=\"" << anchor << "\"" << extra
        << ">" << escape(s) << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    os_ << "<line x1=\"" << f(x1) << "\" y1=\"" << f(y1) << "\" x2=\"" << f(x2) << "\" y2=\"" << f(y2)
        << "\" " << style << "/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& style) {
    os_ << "<circle cx=\"" << f(cx) << "\" cy=\"" << f(cy) << "\" r=\"" << f(r) << "\" " << style << "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& style) {
    os_ << "<rect x=\"" << f(x) << "\" y=\"" << f(y) << "\" width=\"" << f(w) << "\" height=\"" << f(h)
        << "\" " << style << "/>\n";
  }

  void series(const std::string& name, const std::vector<std::pair<double, double>>& pts,
              const std::string& style) {
    os_ << "<polyline data-series=\"" << name << "\" data-points=\"" << pts.size() << "\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      os_ << (k ? " " : "") << f(pts[k].first) << ',' << f(pts[k].second);
    }
    os_ << "\" fill=\"none\" " << style << "/>\n";
  }

  void raw(const std::string& s) { os_ << s; }

  void legend(double x, double y, const std::vector<std::pair<std::string, std::string>>& items) {
    for (std::size_t k = 0; k < items.size(); ++k) {
      const double yy = y + 16.0 * static_cast<double>(k);
      line(x, yy - 4, x + 18, yy - 4, "stroke=\"" + items[k].second + "\" stroke-width=\"2\"");
      text(x + 24, yy, items[k].first);
    }
  }

  void axes(const Panel& p, const std::string& xlabel, const std::string& ylabel) {
    rect(p.x0, p.y0, p.w, p.h, "fill=\"none\" stroke=\"black\"");
    for (int k = 0; k <= 4; ++k) {
      const double xv = p.xr.lo + (p.xr.hi - p.xr.lo) * k / 4.0;
      const double yv = p.yr.lo + (p.yr.hi - p.yr.lo) * k / 4.0;
      line(p.px(xv), p.y0 + p.h, p.px(xv), p.y0 + p.h + 4, "stroke=\"black\"");
      text(p.px(xv), p.y0 + p.h + 16, g(xv), "middle");
      line(p.x0 - 4, p.py(yv), p.x0, p.py(yv), "stroke=\"black\"");
      text(p.x0 - 6, p.py(yv) + 4, g(yv), "end");
    }
    text(p.x0 + p.w / 2, p.y0 + p.h + 34, xlabel, "middle");
    text(p.x0 - 52, p.y0 + p.h / 2, ylabel, "middle",
         " transform=\"rotate(-90 " + f(p.x0 - 52) + ' ' + f(p.y0 + p.h / 2) + ")\"");
  }

  void save(const std::filesystem::path& path) {
    os_ << "</svg>\n";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << os_.str();
  }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  }

  std::ostringstream os_;
};

// Equal-scale panel for workspace drawings.
Panel workspace_panel(double x0, double y0, double size, Range xr, Range yr) {
  xr.pad(0.08);
  yr.pad(0.08);
  const double span = std::max(xr.hi - xr.lo, yr.hi - yr.lo);
  const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
  Panel p{x0, y0, size, size, {}, {}};
  p.xr = {cx - span / 2, cx + span / 2};
  p.yr = {cy - span / 2, cy + span / 2};
  return p;
}

std::vector<JointConfig> joint_trace(const RunResult& r, const Scenario& s) {
  std::vector<JointConfig> qs{s.theta0};
  for (const auto& st : r.steps) qs.push_back(qs.back() + st.applied_dtheta);
  return qs;
}

void draw_arm(Svg& svg, const Panel& p, const RobotModel& m, const JointConfig& q,
              const std::string& color, double opacity) {
  CartesianPoint a = CartesianPoint::Zero();
  std::vector<std::pair<double, double>> pts{{p.px(0), p.py(0)}};
  for (int i = 0; i < m.dof(); ++i) {
    a += m.link_lengths()[i] * CartesianPoint(std::cos(q[i]), std::sin(q[i]));
    pts.emplace_back(p.px(a.x()), p.py(a.y()));
  }
  std::ostringstream style;
  style << "stroke=\"" << color << "\" stroke-width=\"2\" stroke-opacity=\"" << opacity << "\"";
  svg.series("arm", pts, style.str());
}

std::filesystem::path plot_path(const RunResult& r, const Scenario& s, const std::filesystem::path& file) {
  Range xr, yr;
  xr.add(r.start.x()), yr.add(r.start.y());
  xr.add(r.goal.x()), yr.add(r.goal.y());
  for (const auto& st : r.steps) xr.add(st.z_after.x()), yr.add(st.z_after.y());
  for (const auto& o : s.obstacles) {
    xr.add(o.center.x() - o.inflated_radius()), xr.add(o.center.x() + o.inflated_radius());
    yr.add(o.center.y() - o.inflated_radius()), yr.add(o.center.y() + o.inflated_radius());
  }
  Svg svg(640, 620);
  const Panel p = workspace_panel(80, 40, 520, xr, yr);
  const double scale = p.w / (p.xr.hi - p.xr.lo);
  svg.text(320, 22, r.planner + " run on " + s.id + ", delta = " + g(s.delta), "middle");
  svg.axes(p, "x (m)", "y (m)");

  for (const auto& o : s.obstacles) {
    svg.circle(p.px(o.center.x()), p.py(o.center.y()), o.inflated_radius() * scale,
               "fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 3\"");
    svg.circle(p.px(o.center.x()), p.py(o.center.y()), o.radius * scale, "fill=\"#bbbbbb\" stroke=\"gray\"");
  }
  svg.line(p.px(r.start.x()), p.py(r.start.y()), p.px(r.goal.x()), p.py(r.goal.y()),
           "stroke=\"#999999\" stroke-dasharray=\"2 3\"");

  svg.raw("<g data-layer=\"boxes\">\n");
  for (const auto& st : r.steps) {
    if (st.lambda_star <= 0.0) continue;
    const double side = 2.0 * st.lambda_star * scale;
    svg.rect(p.px(st.z_before.x() - st.lambda_star), p.py(st.z_before.y() + st.lambda_star), side, side,
             "fill=\"#7b3fb5\" fill-opacity=\"0.06\" stroke=\"#7b3fb5\" stroke-opacity=\"0.35\"");
  }
  svg.raw("</g>\n");

  std::vector<std::pair<double, double>> path{{p.px(r.start.x()), p.py(r.start.y())}};
  for (const auto& st : r.steps) path.emplace_back(p.px(st.z_after.x()), p.py(st.z_after.y()));
  svg.series("path", path, "stroke=\"#1f5fbf\" stroke-width=\"1.5\"");

  svg.raw("<g data-layer=\"violations\">\n");
  for (const auto& st : r.steps) {
    if (!st.violation) continue;
    svg.line(p.px(st.z_before.x()), p.py(st.z_before.y()), p.px(st.z_after.x()), p.py(st.z_after.y()),
             "class=\"violation\" stroke=\"#d62728\" stroke-width=\"3\"");
  }
  svg.raw("</g>\n");

  svg.circle(p.px(r.start.x()), p.py(r.start.y()), 5, "fill=\"#2ca02c\"");
  svg.circle(p.px(r.goal.x()), p.py(r.goal.y()), 5, "fill=\"#d62728\"");
  svg.save(file);
  return file;
}

std::filesystem::path plot_joint_step(const RunResult& r, const Scenario& s,
                                      const std::filesystem::path& file) {
  Panel p{80, 40, 520, 300, {}, {}};
  p.xr.add(0), p.xr.add(std::max<double>(1.0, static_cast<double>(r.steps.size()) - 1.0));
  p.yr.add(0), p.yr.add(s.delta);
  std::vector<std::pair<double, double>> pre, applied;
  for (const auto& st : r.steps) p.yr.add(st.pre_adjust_max_dtheta);
  p.yr.pad(0.05);
  for (const auto& st : r.steps) {
    pre.emplace_back(p.px(st.index), p.py(st.pre_adjust_max_dtheta));
    const double a = st.applied_dtheta.size() ? st.applied_dtheta.cwiseAbs().maxCoeff() : 0.0;
    applied.emplace_back(p.px(st.index), p.py(a));
  }
  Svg svg(640, 400);
  svg.text(320, 22, "Max joint step per iteration (" + r.planner + ")", "middle");
  svg.axes(p, "iteration", "max |dtheta_i| (rad)");
  svg.line(p.x0, p.py(s.delta), p.x0 + p.w, p.py(s.delta), "stroke=\"#d62728\" stroke-dasharray=\"6 3\"");
  svg.text(p.x0 + p.w - 4, p.py(s.delta) - 4, "delta", "end");
  svg.series("requested", pre, "stroke=\"#ff7f0e\"");
  svg.series("applied", applied, "stroke=\"#1f5fbf\"");
  svg.legend(p.x0 + 10, p.y0 + 16, {{"requested", "#ff7f0e"}, {"applied", "#1f5fbf"}});
  svg.save(file);
  return file;
}

std::filesystem::path plot_lambda_kappa(const RunResult& r, const std::filesystem::path& file) {
  Panel pl{80, 40, 480, 300, {}, {}};
  Panel pk = pl;
  const double n = std::max<double>(1.0, static_cast<double>(r.steps.size()) - 1.0);
  pl.xr.add(0), pl.xr.add(n);
  pk.xr = pl.xr;
  pl.yr.add(0);
  for (const auto& st : r.steps) pl.yr.add(st.lambda_star), pk.yr.add(st.kappa);
  pl.yr.pad(0.05);
  pk.yr.pad(0.05);
  std::vector<std::pair<double, double>> lam, kap;
  for (const auto& st : r.steps) {
    lam.emplace_back(pl.px(st.index), pl.py(st.lambda_star));
    kap.emplace_back(pk.px(st.index), pk.py(st.kappa));
  }
  Svg svg(640, 400);
  svg.text(320, 22, "lambda* and kappa(J) per iteration (" + r.planner + ")", "middle");
  svg.axes(pl, "iteration", "lambda* (m)");
  for (int k = 0; k <= 4; ++k) {
    const double yv = pk.yr.lo + (pk.yr.hi - pk.yr.lo) * k / 4.0;
    svg.line(pk.x0 + pk.w, pk.py(yv), pk.x0 + pk.w + 4, pk.py(yv), "stroke=\"#2ca02c\"");
    svg.text(pk.x0 + pk.w + 6, pk.py(yv) + 4, g(yv), "start", " fill=\"#2ca02c\"");
  }
  svg.series("lambda_star", lam, "stroke=\"#7b3fb5\" stroke-width=\"1.5\"");
  svg.series("kappa", kap, "stroke=\"#2ca02c\" stroke-width=\"1.5\"");
  svg.legend(pl.x0 + 10, pl.y0 + 16, {{"lambda* (left)", "#7b3fb5"}, {"kappa (right)", "#2ca02c"}});
  svg.save(file);
  return file;
}

std::filesystem::path plot_distance(const RunResult& r, const Scenario& s,
                                    const std::filesystem::path& file) {
  Panel pd{70, 40, 330, 300, {}, {}};
  pd.xr.add(0), pd.xr.add(static_cast<double>(r.steps.size()));
  std::vector<double> dist{(r.start - r.goal).norm()};
  for (const auto& st : r.steps) dist.push_back((st.z_after - r.goal).norm());
  pd.yr.add(0);
  for (double d : dist) pd.yr.add(d);
  pd.yr.pad(0.05);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < dist.size(); ++k) pts.emplace_back(pd.px(static_cast<double>(k)), pd.py(dist[k]));

  const auto qs = joint_trace(r, s);
  Range xr, yr;
  xr.add(0), yr.add(0);
  for (const auto& q : qs) {
    CartesianPoint a = CartesianPoint::Zero();
    for (int i = 0; i < s.model.dof(); ++i) {
      a += s.model.link_lengths()[i] * CartesianPoint(std::cos(q[i]), std::sin(q[i]));
      xr.add(a.x()), yr.add(a.y());
    }
  }
  xr.add(r.goal.x()), yr.add(r.goal.y());
  const Panel pw = workspace_panel(470, 40, 300, xr, yr);

  Svg svg(820, 400);
  svg.text(410, 22, "Distance to goal and arm poses (" + r.planner + ")", "middle");
  svg.axes(pd, "iteration", "distance to goal (m)");
  svg.series("distance", pts, "stroke=\"#1f5fbf\" stroke-width=\"1.5\"");
  svg.rect(pw.x0, pw.y0, pw.w, pw.h, "fill=\"none\" stroke=\"black\"");
  const int poses = std::min<int>(6, static_cast<int>(qs.size()));
  for (int k = 0; k < poses; ++k) {
    const std::size_t idx = poses > 1 ? k * (qs.size() - 1) / (poses - 1) : 0;
    draw_arm(svg, pw, s.model, qs[idx], "#444444", 0.25 + 0.75 * (poses > 1 ? k / (poses - 1.0) : 1.0));
  }
  std::vector<std::pair<double, double>> ee;
  ee.emplace_back(pw.px(r.start.x()), pw.py(r.start.y()));
  for (const auto& st : r.steps) ee.emplace_back(pw.px(st.z_after.x()), pw.py(st.z_after.y()));
  svg.series("end_effector", ee, "stroke=\"#1f5fbf\"");
  svg.circle(pw.px(r.goal.x()), pw.py(r.goal.y()), 4, "fill=\"#d62728\"");
  svg.save(file);
  return file;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const RunResult& result, const Scenario& scenario,
                                              const std::filesystem::path& dir,
                                              const std::string& prefix) {
  if (result.steps.empty()) throw std::invalid_argument("emit_plots: run has no steps");
  std::filesystem::create_directories(dir);
  return {plot_path(result, scenario, dir / (prefix + "_path.svg")),
          plot_joint_step(result, scenario, dir / (prefix + "_joint_step.svg")),
          plot_lambda_kappa(result, dir / (prefix + "_lambda_kappa.svg")),
          plot_distance(result, scenario, dir / (prefix + "_distance.svg"))};
}

}  // namespace reachcert
