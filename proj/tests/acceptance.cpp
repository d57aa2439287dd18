// Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <aclab/lab.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace aclab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [FAILED]");
  }
};

RunConfig load(const std::string& name) { return parse_config(std::string(ACLAB_SOURCE_DIR) + "/configs/" + name); }

struct Context {
  fs::path out;
  LabOptions opts;
  double max_abs_u = 0.0;
  // Per-run dissipation_residual checks from report.json files.
  std::vector<std::pair<std::string, json>> residual_checks;
  std::vector<std::string> runs;
  std::optional<ArcBenchmark> arc;
  double arc_seconds = 0.0;
  std::optional<json> oracle_arc;
  double oracle_arc_seconds = 0.0;
  std::optional<json> sigma_sweep;

  void note(const std::string& name, const RunRecord& rec) {
    runs.push_back(name);
    for (double v : rec.snapshots.column("max_abs_u")) max_abs_u = std::max(max_abs_u, v);
  }

  void note_checks(const std::string& name, const json& report) {
    for (const auto& c : report["checks"])
      if (c["name"] == "dissipation_residual") residual_checks.emplace_back(name, c);
  }

  ArcBenchmark& arc_run() {
    if (!arc) {
      const auto t0 = Clock::now();
      arc = arc_benchmark(load("arc_benchmark.cfg"), out / "arc_benchmark", opts);
      arc_seconds = seconds_since(t0);
      note("arc_benchmark", arc->run.record);
      note_checks("arc_benchmark", arc->report);
    }
    return *arc;
  }

  const json& oracle_arc_report() {
    if (!oracle_arc) {
      const auto t0 = Clock::now();
      oracle_arc = run_oracle(load("oracle_arc.cfg"), out / "oracle_arc", opts);
      oracle_arc_seconds = seconds_since(t0);
    }
    return *oracle_arc;
  }

  const json& sigma_sweep_report() {
    if (!sigma_sweep) {
      const RunConfig cfg = load("sigma_sweep.cfg");
      sigma_sweep = run_sweep(cfg, out / "sigma_sweep", opts);
      for (double s : cfg.experiment.sigma_list) {
        // Child records are on disk; the maximum principle is read back from them.
        std::ifstream f(out / "sigma_sweep" / child_dir_name("sigma", s) / "report.json");
        const json rep = json::parse(f);
        max_abs_u = std::max(max_abs_u, rep["final"]["max_abs_u"].get<double>());
        for (const auto& c : rep["checks"])
          if (c["name"] == "max_principle") max_abs_u = std::max(max_abs_u, c["value"].get<double>());
        note_checks("sigma_sweep/" + child_dir_name("sigma", s), rep);
        runs.push_back("sigma_sweep/" + child_dir_name("sigma", s));
      }
    }
    return *sigma_sweep;
  }
};

const json& find_check(const json& rep, const std::string& name) {
  for (const auto& c : rep["checks"])
    if (c["name"] == name) return c;
  throw std::runtime_error("check " + name + " missing");
}

// 1 ---------------------------------------------------------------------------------

Verdict standing_wave(Context& cx) {
  Verdict v;
  const RunConfig cfg = load("standing_wave.cfg");
  const auto t0 = Clock::now();
  const RunOutput r = run_config(cfg, cx.out / "standing_wave", cx.opts);
  const double secs = seconds_since(t0);
  cx.note("standing_wave", r.record);
  const auto& s = r.record.snapshots;
  const auto x = s.column("iface_x");
  const double h = r.final_state.u.grid.hx;
  const double drift = std::abs(x.back() - x.front());
  const double xi = s.column("xi_abs").back(), e = s.column("E").back(), es = s.column("E_over_sigma0").back();
  v.require(drift <= h, "interface drift " + num(drift) + " <= h=" + num(h));
  v.require(xi <= 1e-3 * e, "int|xi| " + num(xi) + " <= 1e-3 E=" + num(1e-3 * e));
  v.require(es >= 0.99 && es <= 1.01, "E/sigma0 " + num(es) + " in [0.99,1.01]");
  v.require(secs <= 10.0, "runtime " + num(secs) + " s <= 10 s");
  return v;
}

// 2 ---------------------------------------------------------------------------------

Verdict maximum_principle(Context& cx) {
  Verdict v;
  v.require(!cx.runs.empty(), "experiments checked: " + std::to_string(cx.runs.size()));
  v.require(cx.max_abs_u <= 1.0 + 1e-12, "max|u| over all snapshots " + num(cx.max_abs_u) + " <= 1+1e-12");
  // A step at the raw bound (safety 1) overshoots 1 next to a Neumann face when
  // the interface sits 2.5 eps from it; the driver must stop with exit code 3.
  const fs::path dir = cx.out / "overshoot";
  fs::create_directories(dir);
  std::ofstream(dir / "overshoot.cfg") << "[grid]\nx_min = 0\nx_max = 1\nnx = 101\n\n[physics]\neps = 0.02\n\n"
                                          "[initial]\ntype = line\nx = 0.05\nsign = -1\n\n"
                                          "[schedule]\nt_end = 0.001\nsafety = 1\nper_step = false\n\n"
                                          "[output]\ndir = "
                                       << (dir / "run").string() << "\n";
  const std::string cmd = std::string("\"") + ACLAB_CLI + "\" run --quiet --config \"" +
                          (dir / "overshoot.cfg").string() + "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  v.require(code == 3, "overshooting run exit code " + std::to_string(code) + " == 3");
  return v;
}

// 3 ---------------------------------------------------------------------------------

double mean_abs_residual(const RunRecord& rec) {
  const Table& d = rec.step_series.at("dissipation");
  const auto dt = d.column("dt"), r = d.column("residual");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < dt.size(); ++k) {
    num += dt[k] * std::abs(r[k]);
    den += dt[k];
  }
  return num / den;
}

Verdict dissipation(Context& cx) {
  Verdict v;
  const Grid2D g = Grid2D::line(0.0, 1.0, 401);
  double mean[2] = {0, 0}, worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    PhaseState s = init_profile(g, Line1D{0.4, 1.0}, 0.05);
    SeriesObserver obs;
    const RunRecord rec = run(s, 0.02, 1000, obs.hooks(), k == 0 ? 0.5 : 0.25);
    mean[k] = mean_abs_residual(rec);
    if (k == 0) {
      for (double r : rec.step_series.at("dissipation").column("residual")) worst = std::max(worst, std::abs(r));
      cx.note("dissipation_1d", rec);
    }
  }
  const double ratio = mean[0] / mean[1];
  v.require(worst <= 1e-2, "1D per-step residual max " + num(worst) + " <= 1e-2");
  for (const auto& [name, c] : cx.residual_checks)
    v.require(c["pass"].get<bool>(), name + " per-step residual " + num(c["value"].get<double>()) +
                                         " <= " + num(c["bound"].get<double>()));
  v.require(ratio >= 1.7 && ratio <= 2.3, "dt halving ratio " + num(ratio) + " in [1.7,2.3]");
  return v;
}

// 4 ---------------------------------------------------------------------------------

Verdict ibp(Context&) {
  Verdict v;
  auto study = [&](const std::string& label, const std::function<PhaseState(int)>& make, const VectorTestField& f,
                   const std::vector<int>& ns) {
    std::vector<VariationReport> r;
    for (int n : ns) r.push_back(first_variation_expanded(make(n), f));
    for (std::size_t k = 1; k < r.size(); ++k) {
      const double q = r[k - 1].ibp_residual / r[k].ibp_residual;
      v.require(q >= 3.5 && q <= 4.5, label + " ratio n=" + std::to_string(ns[k]) + " " + num(q) + " in [3.5,4.5]");
    }
    const double rel = r.back().ibp_residual / r.back().abs_terms();
    v.require(rel <= 1e-3, label + " finest residual/sum|terms| " + num(rel) + " <= 1e-3");
  };
  study(
      "1D",
      [](int n) { return init_profile(Grid2D::line(0.0, 1.0, n + 1), Line1D{0.15, 1.0}, 0.1); },
      catalog::gaussian({1.0, 0.0}, {0.2, 0.0}, 0.2), {200, 400, 800});
  study(
      "2D",
      [](int n) {
        return init_profile(Grid2D::box(-1.0, 1.0, -1.0, 1.0, n + 1, n + 1), CircleArc{{0.0, 0.0}, 0.5, 1.0}, 0.1);
      },
      catalog::gaussian({1.0, 0.5}, {0.2, 0.1}, 0.4), {64, 128, 256});
  return v;
}

// 5 ---------------------------------------------------------------------------------

Verdict arc_benchmark_criterion(Context& cx) {
  Verdict v;
  const ArcBenchmark& a = cx.arc_run();
  const double eps = a.run.config.physics.eps;
  const auto& arc = a.report["arc"];
  const double horizon = arc["horizon"].get<double>();
  v.require(horizon >= 0.3 - 1e-12, "comparison horizon " + num(horizon) + " covers [0,0.3]");
  v.require(arc["radius_error_max"].get<double>() <= 3 * eps,
            "radius error " + num(arc["radius_error_max"].get<double>()) + " <= 3eps");
  v.require(arc["contact_error_max"].get<double>() <= 3 * eps,
            "contact error " + num(arc["contact_error_max"].get<double>()) + " <= 3eps");
  v.require(arc["velocity_rel_error_max"].get<double>() <= 0.1,
            "contact velocity rel error on [" + num(arc["velocity_window"][0].get<double>()) + "," +
                num(arc["velocity_window"][1].get<double>()) + "] " + num(arc["velocity_rel_error_max"].get<double>()) +
                " <= 0.1");
  v.require(cx.arc_seconds <= 600.0, "runtime " + num(cx.arc_seconds) + " s (to t=" +
                                          num(a.run.final_state.t) + ", oracle included) <= 600 s");
  return v;
}

// 6 ---------------------------------------------------------------------------------

Verdict sigma_independence(Context& cx) {
  Verdict v;
  const json& orc = cx.oracle_arc_report();
  const double spread = orc["contact_velocity_spread"].get<double>();
  v.require(spread <= 0.02, "oracle spread over sigma {0.5,1,2} " + num(spread) + " <= 0.02");

  const ArcBenchmark& main = cx.arc_run();
  const RunConfig base = main.run.config;
  const Window w = base.experiment.windows.empty() ? Window{0.05, 0.25} : base.experiment.windows[0];
  std::map<double, std::vector<ArcRow>> rows{{base.physics.sigma, main.rows}};
  for (double s : {0.5, 2.0}) {
    RunConfig c = base;
    c.physics.sigma = s;
    c.experiment.mode = "run";
    c.experiment.test_fields.clear();
    c.experiment.brakke.clear();
    c.schedule.per_step = false;
    c.schedule.t_end = w.t2 + 2 * c.experiment.contact_fd_span;
    const RunOutput r = run_config(c, cx.out / ("arc_sigma_" + format_number(s)), cx.opts);
    cx.note("arc_sigma_" + format_number(s), r.record);
    rows[s] = arc_rows(r, s, c.experiment.contact_fd_span);
  }
  double worst = 0.0;
  int compared = 0;
  const auto& ref = rows.begin()->second;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const double t = ref[k].t;
    if (t < w.t1 - 1e-12 || t > w.t2 + 1e-12) continue;
    double lo = INFINITY, hi = -INFINITY;
    bool ok = true;
    for (const auto& [s, rs] : rows) {
      if (k >= rs.size() || std::abs(rs[k].t - t) > 1e-12 || !std::isfinite(rs[k].vb)) {
        ok = false;
        break;
      }
      lo = std::min(lo, rs[k].vb);
      hi = std::max(hi, rs[k].vb);
    }
    if (!ok) {
      worst = INFINITY;
      continue;
    }
    ++compared;
    worst = std::max(worst, (hi - lo) / lo);
  }
  v.require(compared > 0, "phase-field samples compared: " + std::to_string(compared));
  v.require(worst <= 0.15, "phase-field spread over sigma {0.5,1,2} " + num(worst) + " <= 0.15");
  return v;
}

// 7, 8 ------------------------------------------------------------------------------

Verdict dirichlet_blowup(Context& cx) {
  Verdict v;
  const json& rep = cx.sigma_sweep_report();
  std::string vals;
  for (const auto& r : rep["rows"])
    vals += (vals.empty() ? "" : ", ") + num(r["sigma"].get<double>()) + ":" + num(r["normal_dirichlet_gamma"].get<double>());
  const auto& c = find_check(rep, "dirichlet_energy_slope");
  bool increasing = true;
  for (std::size_t k = 1; k < rep["rows"].size(); ++k)
    increasing = increasing && rep["rows"][k]["normal_dirichlet_gamma"].get<double>() >
                                   rep["rows"][k - 1]["normal_dirichlet_gamma"].get<double>();
  v.require(increasing, "windowed eps(du/dnu)^2 increases as sigma decreases (" + vals + ")");
  v.require(c["pass"].get<bool>(), "log-log slope " + num(c["value"].get<double>()) + " <= -0.8");
  return v;
}

Verdict dirichlet_limit(Context& cx) {
  Verdict v;
  const json& rep = cx.sigma_sweep_report();
  int n = 0;
  for (const auto& c : rep["checks"]) {
    const std::string name = c["name"];
    if (name.rfind("boundary_functional_", 0) != 0) continue;
    ++n;
    v.require(c["pass"].get<bool>(), name + " " + num(c["value"].get<double>()) + " " +
                                         c["relation"].get<std::string>() + " " + num(c["bound"].get<double>()));
  }
  v.require(n > 0, "catalog fields checked: " + std::to_string(n / 2));
  return v;
}

// 9 ---------------------------------------------------------------------------------

Verdict brakke(Context& cx) {
  Verdict v;
  const ArcBenchmark& a = cx.arc_run();
  const RunRecord& rec = a.run.record;
  const Grid2D& g = a.run.final_state.u.grid;
  const Window w{0.05, 0.25};
  const auto& specs = a.run.config.experiment.brakke;
  bool found = false;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const ScalarTestField phi = make_scalar_field(specs[k], g, field_label(specs[k], k));
    const BrakkeResult r = brakke_residual(rec, phi, w.t1, w.t2, BrakkeMode::dynamic);
    if (specs[k].name == "neumann_gaussian") {
      found = true;
      const double m = std::max(std::abs(r.lhs), std::abs(r.rhs));
      v.require(r.relative() <= 0.05, phi.name + " |lhs-rhs|/max " + num(r.relative()) + " <= 0.05");
      v.require(r.lhs <= r.rhs + 0.05 * m, phi.name + " lhs " + num(r.lhs) + " <= rhs " + num(r.rhs) + " + slack");
    }
    if (specs[k].name == "one") {
      const Table& d = rec.step_series.at("dissipation");
      const auto t = d.column("t"), dt = d.column("dt"), raw = d.column("raw");
      double sum = 0.0;
      for (std::size_t n = 0; n < t.size(); ++n)
        if (t[n] >= r.t1 - 1e-12 && t[n] < r.t2 - 1e-12) sum += dt[n] * raw[n];
      const double diff = std::abs(r.residual - sum);
      v.require(diff <= 1e-10, "phi=1 residual " + num(r.residual) + " vs dissipation integral " + num(sum) +
                                   ", |diff| " + num(diff) + " <= 1e-10");
    }
  }
  v.require(found, "Gaussian test function with grad phi . nu = 0 present");
  return v;
}

// 10 --------------------------------------------------------------------------------

Verdict oracle(Context& cx) {
  Verdict v;
  const auto t0 = Clock::now();
  const json circ = run_oracle(load("oracle_circle.cfg"), cx.out / "oracle_circle", cx.opts);
  const double circle_secs = seconds_since(t0);
  const json& arc = cx.oracle_arc_report();
  const double total = circle_secs + cx.oracle_arc_seconds;
  const double rerr = circ["radius_error_max"].get<double>();
  v.require(rerr <= 1e-3, "circle radius error on [0,0.1] " + num(rerr) + " <= 1e-3");
  const auto& c = find_check(arc, "contact_tracking_sigma_1");
  v.require(c["pass"].get<bool>(), "arc contact tracking on [0,0.3] " + num(c["value"].get<double>()) + " <= 1e-3");
  v.require(total <= 60.0, "runtime " + num(total) + " s <= 60 s");
  return v;
}

// 11 --------------------------------------------------------------------------------

Verdict phase_indicator(Context& cx) {
  Verdict v;
  const ArcBenchmark& a = cx.arc_run();
  const auto& s = a.run.record.snapshots;
  const auto t = a.run.record.times();
  const auto wi = s.column("w_integral_bottom"), wb = s.column("w_bound_bottom");
  const auto x0 = s.column("contact_x0");
  bool strict = true;
  int attached = 0;
  std::size_t last_attached = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::isfinite(x0[k])) {
      ++attached;
      last_attached = k;
      strict = strict && wi[k] < wb[k];
    }
  v.require(attached > 0 && strict, "|int w| < (2/3)|Gamma| at all " + std::to_string(attached) +
                                        " snapshots with contacts (until t=" + num(t[last_attached]) + ")");
  const double am = window_integral(t, s.column("alpha_total"), 0.1, 0.2);
  v.require(am >= 1e-2, "alpha window mass on [0.1,0.2] " + num(am) + " >= 1e-2");
  // After detachment the gap to the bound must shrink monotonically.
  const std::size_t first = last_attached + 1;
  if (first >= t.size()) {
    v.require(false, "run ends before detachment");
    return v;
  }
  bool mono = true;
  for (std::size_t k = first + 1; k < t.size(); ++k) mono = mono && (wb[k] - wi[k]) <= (wb[k - 1] - wi[k - 1]) + 1e-12;
  const double g0 = wb[first] - wi[first], g1 = wb.back() - wi.back();
  v.require(mono, "gap to (2/3)|Gamma| nonincreasing after detachment (t=" + num(t[first]) + ")");
  v.require(g1 < g0 && g1 <= 0.01 * wb.back(), "gap " + num(g0) + " -> " + num(g1) + " at t=" + num(t.back()) +
                                                    " (<= 1% of " + num(wb.back()) + ")");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  int threads = 1;
  bool verbose = false;
  app.add_option("--out", out, "Scratch directory for experiment outputs");
  app.add_option("--only", only, "Run only these criteria (the order is fixed)");
  app.add_option("--threads", threads, "Worker threads");
  app.add_flag("--verbose", verbose, "Progress messages");
  CLI11_PARSE(app, argc, argv);

  Context cx;
  cx.out = out;
  cx.opts = LabOptions{false, !verbose, threads};
  set_thread_count(threads);
  fs::create_directories(cx.out);

  // Criteria 3 and 2 run last so that they see every monitored experiment.
  const std::vector<std::pair<int, std::function<Verdict(Context&)>>> order{
      {1, standing_wave},   {4, ibp},    {5, arc_benchmark_criterion}, {6, sigma_independence},
      {7, dirichlet_blowup}, {8, dirichlet_limit}, {9, brakke},        {10, oracle},
      {11, phase_indicator}, {3, dissipation},     {2, maximum_principle}};
  const char* names[] = {"",
                         "standing-wave stationarity",
                         "maximum principle",
                         "dissipation identity",
                         "first-variation identity",
                         "arc benchmark",
                         "sigma-independence of contact velocity",
                         "boundary Dirichlet-energy blow-up",
                         "Dirichlet-limit velocity vanishing",
                         "Brakke residual",
                         "sharp oracle convergence",
                         "phase-boundary indicator"};
  std::map<int, Verdict> results;
  for (const auto& [id, fn] : order) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn(cx);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    v.detail += " (" + num(seconds_since(t0)) + " s)";
    results[id] = v;
    if (verbose) std::cerr << "criterion " << id << " done\n";
  }
  bool all = true;
  for (const auto& [id, v] : results) {
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << id << " " << names[id] << ": " << v.detail << "\n";
  }
  return all ? 0 : 1;
}
