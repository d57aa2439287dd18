// aclab command-line driver.
//
// Exit codes: 0 ok, 2 config error, 3 divergence, 4 failed acceptance check
// in `report`, 1 anything else.

#include <aclab/lab.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct Common {
  std::string config;
  std::string out;
  int threads = 1;
  bool dump_fields = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool need_config) {
  auto* opt = app->add_option("--config", c.config, "Experiment config file");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "Output directory (overrides output.dir)");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--dump-fields", c.dump_fields, "Write u at every snapshot");
  app->add_flag("--quiet", c.quiet, "Suppress progress messages");
}

int run_mode(const std::string& mode, const Common& c) {
  aclab::RunConfig cfg = aclab::parse_config(c.config);
  cfg.experiment.mode = mode;
  const auto errs = aclab::validate(cfg);
  if (!errs.empty()) throw aclab::ConfigErrors(errs);
  if (!c.out.empty()) cfg.output.dir = c.out;
  aclab::LabOptions opts{c.dump_fields, c.quiet, c.threads};
  const auto rep = aclab::run_experiment(cfg, cfg.output.dir, opts);
  if (!c.quiet) {
    for (const auto& chk : rep["checks"])
      std::cout << (chk["pass"].get<bool>() ? "PASS " : "FAIL ") << chk["name"].get<std::string>() << " "
                << chk["value"].dump() << " " << chk["relation"].get<std::string>() << " " << chk["bound"].dump()
                << "\n";
    std::cout << "wrote " << cfg.output.dir << "\n";
  }
  return 0;
}

int report_mode(const Common& c) {
  std::string dir = c.out;
  if (dir.empty() && !c.config.empty()) dir = aclab::parse_config(c.config).output.dir;
  if (dir.empty()) dir = "out";
  const auto checks = aclab::collect_checks(dir);
  bool ok = true;
  for (const auto& l : checks) {
    ok = ok && l.pass;
    if (!c.quiet || !l.pass)
      std::cout << (l.pass ? "PASS " : "FAIL ") << l.source << " " << l.name << " " << aclab::format_number(l.value)
                << " " << l.relation << " " << aclab::format_number(l.bound) << "\n";
  }
  if (!c.quiet) std::cout << (ok ? "all checks passed" : "some checks failed") << " (" << checks.size() << ")\n";
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allen-Cahn phase-field lab with dynamic boundary conditions"};
  app.require_subcommand(1);
  const char* modes[] = {"run", "sweep-eps", "sweep-sigma", "arc-benchmark", "oracle"};
  const char* help[] = {"Single integration", "Sweep over experiment.eps_list", "Sweep over experiment.sigma_list",
                        "Circular-arc benchmark against the exact solution and the polyline oracle",
                        "Sharp-interface polyline oracle only"};
  Common common;
  std::string chosen;
  for (int k = 0; k < 5; ++k) {
    auto* sub = app.add_subcommand(modes[k], help[k]);
    add_common(sub, common, true);
    sub->callback([&chosen, k, &modes] { chosen = modes[k]; });
  }
  auto* rep = app.add_subcommand("report", "Aggregate the checks of every report.json under --out");
  add_common(rep, common, false);
  rep->callback([&chosen] { chosen = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (chosen == "report") return report_mode(common);
    return run_mode(chosen, common);
  } catch (const aclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const aclab::DivergenceError& e) {
    std::cerr << "divergence at step " << e.step() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
