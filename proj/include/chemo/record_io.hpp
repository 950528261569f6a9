#pragma once

// On-disk run records and the entry points behind the chemo command.
//
// A record directory holds
//   manifest.json      format version, config copy, file list, snapshot times, wall clock
//   ledger.csv         estimate ledger, one row per step
//   certificate.json   certified bounds with margins
//   snapshots/u_NNNNNN.csnap, snapshots/v_NNNNNN.csnap

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemo/config.hpp"
#include "chemo/experiments.hpp"
#include "chemo/functionals.hpp"
#include "chemo/verifier.hpp"
#include "json.hpp"

namespace chemo {

inline constexpr int kRecordFormatVersion = 1;

// Process exit codes.
enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitConfig = 2, kExitRuntime = 3, kExitMissingInput = 4 };

// A record, manifest or referenced file is absent or unreadable.
class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateOutcome {
  RunRecord record;
  Certificate certificate;
  std::filesystem::path directory;
};

// Runs cfg and writes a complete record into dir. On SolverError the failing
// state is written to dir/failure_{u,v}.csnap before rethrowing.
SimulateOutcome simulate_to_disk(const RunConfig& cfg, const std::filesystem::path& dir);

struct LoadedRecord {
  RunConfig config;
  RunRecord record;
  nlohmann::json manifest;
};

LoadedRecord load_record(const std::filesystem::path& dir);

enum class CatalogSelection { Default, Constant };
CatalogSelection parse_catalog_selection(const std::string& name);
std::vector<TestFunction> make_catalog(CatalogSelection sel, const Box& box, double support);

struct VerifyOutcome {
  WeakResidualReport weak;
  MassCheck mass;
  EntropyCheck entropy;
  bool passed() const { return weak.passed() && mass.passed && entropy.passed; }
};

// Writes dir/weak_residuals.json and dir/entropy.json.
VerifyOutcome verify_record(const std::filesystem::path& dir, CatalogSelection sel, double tol_scale = 1.0);

// A run config with one extra top-level key
//   "family": {"epsilons": [...]}          (optional; default 0.2, 0.1, 0.05, 0.025)
// whose model.epsilon is ignored.
struct FamilyConfig {
  RunConfig base;
  std::vector<double> epsilons;
};

FamilyConfig load_family_config(const std::filesystem::path& path);
EpsFamilyPlan make_family_plan(const FamilyConfig& fc);

struct FamilyOutcome {
  std::vector<FamilyMember> members;
  std::optional<ConvergenceTable> table;
  std::string summary;
};

// Writes dir/eps_<j>/ (one record per member), dir/convergence_table.csv and
// dir/summary.txt. Members that completed are written even if others fail.
FamilyOutcome family_to_disk(const FamilyConfig& fc, const std::filesystem::path& dir, std::size_t jobs);

// Text rendering of a record's certificate, plus the verification and
// convergence outputs found next to it.
std::string render_report(const std::filesystem::path& dir);

// --out, then the config's "output", then $CHEMO_OUT_DIR, then ./chemo_out.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag, const std::optional<std::string>& cfg);

}  // namespace chemo
