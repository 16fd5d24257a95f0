// confcount command-line driver. Every experiment subcommand builds a
// Scenario and goes through harness::run, so CLI runs and config-file runs
// share one deterministic code path.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "confcount/harness.hpp"

namespace {

using confcount::harness::Scenario;
using confcount::harness::ScenarioKind;

int execute(const Scenario& scenario) {
  confcount::harness::run(scenario);
  std::printf("wrote %s\n", scenario.output.c_str());
  return 0;
}

void add_common(CLI::App* cmd, Scenario& s) {
  cmd->add_option("--seed", s.seed, "random seed (default 0)");
  cmd->add_option("--output,-o", s.output, "artifact path")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configuration counting experiments"};
  app.require_subcommand(1);

  Scenario s;
  std::string t_list, lambda2_range, gen, set_file, spec, suite = "all";
  std::string config_path;
  long long q = 5, d = 2, k = 2, trials = 1, qmin = 3, qmax = 101;
  long long latq = 1, qstar = 60, window_n = 1, window_side = 7200;
  double density = 0.5, eps = 0.25;
  bool allow_large = false;

  auto* ff_count = app.add_subcommand("ff-count", "rectangle counting forms over F_q^{2d}");
  ff_count->add_option("--q", q, "prime modulus (default 5, capped at 17)");
  ff_count->add_option("--d", d, "number of blocks (1 or 2)");
  ff_count->add_option("--t", t_list, "comma-separated t_1..t_d (default: sweep all)");
  ff_count->add_option("--density", density, "set density (default 0.5)");
  ff_count->add_option("--trials", trials, "independent random sets (default 1)");
  ff_count->add_flag("--allow-large", allow_large, "lift the q <= 17 cap");
  add_common(ff_count, s);

  auto* ff_reg = app.add_subcommand("ff-regularize", "weak regularity decomposition");
  ff_reg->add_option("--q", q, "prime modulus (default 5)");
  ff_reg->add_option("--d", d, "number of blocks (default 2)");
  ff_reg->add_option("--k", k, "edge arity (default 2)");
  ff_reg->add_option("--eps", eps, "target residual box norm")->required();
  add_common(ff_reg, s);

  auto* ff_decay = app.add_subcommand("ff-decay", "sphere Fourier decay sweep");
  ff_decay->add_option("--qmin", qmin, "first prime (default 3)");
  ff_decay->add_option("--qmax", qmax, "last prime (default 101)");
  add_common(ff_decay, s);

  auto* lat_count = app.add_subcommand("lattice-count", "isometric copy counts");
  lat_count->add_option("--spec", spec, "simplex JSON file or segment:<n> / right-triangle:<n>")->required();
  lat_count->add_option("--lambda2-range", lambda2_range, "lo:hi for lambda^2")->required();
  lat_count->add_option("--q", latq, "gap modulus (default 1)");
  add_common(lat_count, s);

  auto* lat_scan = app.add_subcommand("lattice-scan", "normalized count stability scan");
  lat_scan->add_option("--spec", spec, "simplex JSON file or segment:<n> / right-triangle:<n>")->required();
  lat_scan->add_option("--lambda2-range", lambda2_range, "lo:hi for lambda^2")->required();
  lat_scan->add_option("--q", latq, "gap modulus (default 1)");
  add_common(lat_scan, s);

  std::string window_spec;
  auto* unif = app.add_subcommand("uniformity", "residue-class uniformity test");
  unif->add_option("--window", window_spec, "window as <n>:<side> (default 1:7200)");
  unif->add_option("--window-n", window_n, "dimension (default 1)");
  unif->add_option("--window-side", window_side, "window side (default 7200)");
  unif->add_option("--gen", gen, "random:<d> | congruence:<q*>:<r,..> | concentrated:<q*>:<r,..>:<d>:<frac> | two_scale:<block>");
  unif->add_option("--set", set_file, "lattice set file (overrides --gen)");
  unif->add_option("--q,--qstar", qstar, "surrogate residue modulus (default lcm{1..6} = 60)");
  unif->add_option("--eps", eps, "uniformity slack")->required();
  add_common(unif, s);

  auto* incr = app.add_subcommand("increment", "density increment iteration");
  incr->add_option("--window", window_spec, "window as <n>:<side> (default 1:7200)");
  incr->add_option("--window-n", window_n, "dimension (default 1)");
  incr->add_option("--window-side", window_side, "window side (default 7200)");
  incr->add_option("--gen", gen, "set generator (see uniformity)");
  incr->add_option("--set", set_file, "lattice set file (overrides --gen)");
  incr->add_option("--q,--qstar", qstar, "surrogate residue modulus (default lcm{1..6} = 60)");
  incr->add_option("--eps", eps, "uniformity slack")->required();
  add_common(incr, s);

  auto* runcmd = app.add_subcommand("run", "execute a scenario config file");
  runcmd->add_option("config", config_path, "key = value scenario file")->required();

  auto* acc = app.add_subcommand("acceptance", "run the acceptance suite");
  acc->add_option("--suite", suite, "ff | lattice | all (default all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (runcmd->parsed())
      return execute(confcount::harness::load_scenario(config_path));
    if (acc->parsed()) {
      const auto report = confcount::harness::acceptance(suite, std::cerr);
      confcount::harness::print_report(report, std::cout);
      return report.all_pass() ? 0 : 1;
    }

    if (ff_count->parsed()) {
      s.kind = ScenarioKind::FfCount;
      s.params["q"] = std::to_string(q);
      s.params["d"] = std::to_string(d);
      s.params["density"] = std::to_string(density);
      s.params["trials"] = std::to_string(trials);
      if (!t_list.empty()) s.params["t"] = t_list;
      if (allow_large) s.params["allow_large"] = "true";
    } else if (ff_reg->parsed()) {
      s.kind = ScenarioKind::FfRegularize;
      s.params["q"] = std::to_string(q);
      s.params["d"] = std::to_string(d);
      s.params["k"] = std::to_string(k);
      s.params["eps"] = std::to_string(eps);
    } else if (ff_decay->parsed()) {
      s.kind = ScenarioKind::FfDecay;
      s.params["qmin"] = std::to_string(qmin);
      s.params["qmax"] = std::to_string(qmax);
    } else if (lat_count->parsed() || lat_scan->parsed()) {
      s.kind = lat_count->parsed() ? ScenarioKind::LatticeCount
                                   : ScenarioKind::LatticeScan;
      s.params["spec"] = spec;
      s.params["lambda2_range"] = lambda2_range;
      s.params["q"] = std::to_string(latq);
    } else if (unif->parsed() || incr->parsed()) {
      s.kind = unif->parsed() ? ScenarioKind::Uniformity : ScenarioKind::Increment;
      if (!window_spec.empty()) {
        const auto colon = window_spec.find(':');
        if (colon == std::string::npos)
          throw confcount::harness::ConfigError("window", "expected <n>:<side>");
        window_n = std::stoll(window_spec.substr(0, colon));
        window_side = std::stoll(window_spec.substr(colon + 1));
      }
      s.params["window_n"] = std::to_string(window_n);
      s.params["window_side"] = std::to_string(window_side);
      s.params["qstar"] = std::to_string(qstar);
      s.params["eps"] = std::to_string(eps);
      if (!set_file.empty())
        s.params["set"] = set_file;
      else if (!gen.empty())
        s.params["gen"] = gen;
    }
    return execute(s);
  } catch (const confcount::harness::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
