// chemo: simulate, verify, family and report subcommands.
//
// Exit codes: 0 pass, 1 check failure, 2 config error, 3 runtime error,
// 4 missing input.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chemo/record_io.hpp"

using namespace chemo;

namespace {

RunConfig load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed) {
  RunConfig cfg = load_run_config(path);
  if (seed) override_seed(cfg, *seed);
  return cfg;
}

int cmd_simulate(const std::string& config, const std::optional<std::string>& out,
                 const std::optional<std::uint64_t>& seed) {
  const RunConfig cfg = load_with_overrides(config, seed);
  const auto dir = resolve_output_dir(out, cfg.output);
  const SimulateOutcome res = simulate_to_disk(cfg, dir);
  std::printf("%s: %zu steps to t=%.6g, %zu snapshots, certificate %s\n", dir.c_str(), res.record.steps,
              res.record.horizon(), res.record.snapshots.size(), res.certificate.passed() ? "passed" : "FAILED");
  return res.certificate.passed() ? kExitPass : kExitCheckFailure;
}

int cmd_verify(const std::string& record, const std::string& catalog, double tol_scale) {
  const VerifyOutcome v = verify_record(record, parse_catalog_selection(catalog), tol_scale);
  std::printf("mass inequality: %s\n", v.mass.passed ? "ok" : "FAIL");
  std::printf("weak residuals: %zu test functions, max |v res| = %.3e, min u res = %.3e, tol = %.3e: %s\n",
              v.weak.entries.size(), v.weak.max_abs_v, v.weak.min_u, v.weak.tolerance, v.weak.passed() ? "ok" : "FAIL");
  std::printf("entropy inequality: gap = %+.3e, tol = %.3e: %s\n", v.entropy.gap, v.entropy.tolerance,
              v.entropy.passed ? "ok" : "FAIL");
  return v.passed() ? kExitPass : kExitCheckFailure;
}

int cmd_family(const std::string& config, const std::optional<std::string>& out, std::size_t jobs,
               const std::optional<std::uint64_t>& seed) {
  FamilyConfig fc = load_family_config(config);
  if (seed) override_seed(fc.base, *seed);
  const auto dir = resolve_output_dir(out, fc.base.output);
  const FamilyOutcome res = family_to_disk(fc, dir, jobs);
  std::fputs(res.summary.c_str(), stdout);
  if (res.table && res.table->hard_failure()) return kExitCheckFailure;
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized chemotaxis-consumption solver and verifier"};
  app.require_subcommand(1);

  std::string config, record, catalog = "default";
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  double tol_scale = 1.0;

  auto* sim = app.add_subcommand("simulate", "Run one configuration and write a record directory");
  sim->add_option("--config", config, "Run configuration (JSON)")->required();
  sim->add_option("--out", out, "Output directory (default: config \"output\", then $CHEMO_OUT_DIR)");
  sim->add_option("--seed-override", seed, "Replace the configured random seed");

  auto* ver = app.add_subcommand("verify", "Check the weak formulation on a stored record");
  ver->add_option("record", record, "Record directory")->required();
  ver->add_option("--catalog", catalog, "Test-function catalog: default, constant");
  ver->add_option("--tol-scale", tol_scale, "Multiply the residual tolerance")->check(CLI::PositiveNumber);

  auto* fam = app.add_subcommand("family", "Run an epsilon family and tabulate Cauchy differences");
  fam->add_option("--config", config, "Family configuration (JSON)")->required();
  fam->add_option("--out", out, "Output directory");
  fam->add_option("--jobs", jobs, "Parallel members (default: one per member)");
  fam->add_option("--seed-override", seed, "Replace the configured random seed");

  auto* rep = app.add_subcommand("report", "Render a record or family directory as text");
  rep->add_option("dir", record, "Record or family directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(config, out, seed);
    if (*ver) return cmd_verify(record, catalog, tol_scale);
    if (*fam) return cmd_family(config, out, jobs, seed);
    if (*rep) {
      std::fputs(render_report(record).c_str(), stdout);
      return kExitPass;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kExitConfig;
  } catch (const MissingInput& e) {
    std::fprintf(stderr, "missing input: %s\n", e.what());
    return kExitMissingInput;
  } catch (const FamilyError& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "runtime error at t=%.17g: %s\n", e.state.t, e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitPass;
}
