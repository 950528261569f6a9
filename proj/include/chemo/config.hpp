#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemo/solver.hpp"
#include "chemo/verifier.hpp"
#include "json.hpp"

namespace chemo {

// Schema violation; `path` is a JSON pointer-like location such as
// "/initial/u/amplitude".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct InitialSpec {
  enum class Kind { Constant, Gaussian, SmoothRandom, File };
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::vector<double> center;
  double width = 0.1;
  double amplitude = 0.0;
  double background = 0.0;
  int modes = 3;
  double mean = 1.0;
  std::filesystem::path file;
};

struct ToleranceOverrides {
  double c_tol = ToleranceModel::kDefaultCTol;
  double mass_relative = 1e-12;
  double bound_absolute = 1e-9;
};

inline constexpr int kConfigFormatVersion = 1;

struct RunConfig {
  GridSpec grid;
  ModelSpec model;
  InitialSpec u0;
  InitialSpec v0;
  StepControl stepping;
  double tmax = 0.0;
  SnapshotSchedule snapshots;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  ToleranceOverrides tolerances;
  // Validated source document, stored verbatim in run manifests.
  nlohmann::json source;
};

// base_dir resolves relative "file" initial-data paths.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Seed override rewrites both the parsed seed and the stored source document.
void override_seed(RunConfig& cfg, std::uint64_t seed);

Field build_initial_field(const GridSpec& grid, const InitialSpec& spec, std::optional<std::uint64_t> seed,
                          std::uint64_t stream);
State build_initial_state(const RunConfig& cfg);

}  // namespace chemo
