#include "chemo/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "chemo/snapshot.hpp"

namespace chemo {

namespace {

using nlohmann::json;

// Typed accessor over one JSON object that rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(at(key), "required key is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "expected a finite number");
    return x;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) throw ConfigError(at(key), "must be > 0");
    return x;
  }

  double nonnegative(const std::string& key) {
    const double x = number(key);
    if (!(x >= 0.0)) throw ConfigError(at(key), "must be >= 0");
    return x;
  }

  long long integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  ObjectReader object(const std::string& key) { return ObjectReader(get(key), at(key)); }

  // Call once every known key has been read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto guarded(const std::string& path, F&& fn) {
  try {
    return fn();
  } catch (const ExpressionError& e) {
    throw ConfigError(path, e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

GridSpec parse_grid(ObjectReader r) {
  const long long dim = r.integer("dimension");
  if (dim != 1 && dim != 2) throw ConfigError(r.at("dimension"), "must be 1 or 2");
  const auto ext = r.numbers("extents");
  if (ext.size() != static_cast<std::size_t>(dim)) throw ConfigError(r.at("extents"), "needs one entry per axis");
  const json& cells = r.get("cells");
  if (!cells.is_array() || cells.size() != static_cast<std::size_t>(dim))
    throw ConfigError(r.at("cells"), "needs one integer per axis");
  std::vector<int> n;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].is_number_integer() || cells[i].get<long long>() < 3 || cells[i].get<long long>() > 1 << 20)
      throw ConfigError(r.at("cells") + "/" + std::to_string(i), "must be an integer >= 3");
    n.push_back(cells[i].get<int>());
  }
  for (std::size_t i = 0; i < ext.size(); ++i)
    if (!(ext[i] > 0.0)) throw ConfigError(r.at("extents") + "/" + std::to_string(i), "must be > 0");
  r.finish();
  return dim == 1 ? GridSpec::line(ext[0], n[0]) : GridSpec::rect(ext[0], ext[1], n[0], n[1]);
}

Kinetics parse_kinetics(ObjectReader r) {
  const std::string type = r.string("type");
  Kinetics k;
  if (type == "zero") {
    k = Kinetics::zero();
  } else if (type == "linear") {
    k = Kinetics::linear(r.positive("kappa"));
  } else if (type == "saturating") {
    k = Kinetics::saturating(r.positive("kappa"));
  } else if (type == "expression") {
    const std::string src = r.string("expression");
    k = guarded(r.at("expression"), [&] { return Kinetics::expression(src); });
  } else {
    throw ConfigError(r.at("type"), "unknown kinetics '" + type + "'");
  }
  r.finish();
  return k;
}

SensitivityTensor parse_tensor(ObjectReader r, int dim) {
  const std::string type = r.string("type");
  SensitivityTensor s;
  if (type == "zero") {
    s = SensitivityTensor::zero();
  } else if (type == "scalar") {
    s = SensitivityTensor::scalar(r.number("chi"));
  } else if (type == "rotational") {
    s = SensitivityTensor::rotational(r.number("chi"), r.number("beta"));
  } else if (type == "saturating") {
    s = SensitivityTensor::saturating(r.number("chi"));
  } else if (type == "expression") {
    const json& e = r.get("entries");
    const auto need = static_cast<std::size_t>(dim * dim);
    if (!e.is_array() || e.size() != need)
      throw ConfigError(r.at("entries"), "needs " + std::to_string(need) + " expression strings");
    std::vector<std::string> entries;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i].is_string()) throw ConfigError(r.at("entries") + "/" + std::to_string(i), "expected a string");
      entries.push_back(e[i].get<std::string>());
    }
    s = guarded(r.at("entries"), [&] { return SensitivityTensor::expression(entries); });
  } else {
    throw ConfigError(r.at("type"), "unknown tensor '" + type + "'");
  }
  r.finish();
  return s;
}

Envelope parse_envelope(ObjectReader r) {
  const std::string type = r.string("type");
  Envelope e = Envelope::constant(0.0);
  if (type == "constant") {
    e = Envelope::constant(r.nonnegative("value"));
  } else if (type == "expression") {
    const std::string src = r.string("expression");
    e = guarded(r.at("expression"), [&] { return Envelope::expression(src); });
  } else {
    throw ConfigError(r.at("type"), "unknown envelope '" + type + "'");
  }
  r.finish();
  return e;
}

ModelSpec parse_model(ObjectReader r, const GridSpec& grid) {
  ModelSpec m;
  m.domain = grid.box;
  m.cutoffs.epsilon = r.number("epsilon");
  if (!(m.cutoffs.epsilon > 0.0 && m.cutoffs.epsilon < 1.0)) throw ConfigError(r.at("epsilon"), "must lie in (0, 1)");
  m.kinetics = parse_kinetics(r.object("kinetics"));
  m.tensor = parse_tensor(r.object("tensor"), grid.dimension());
  if (r.has("envelope")) {
    m.envelope = parse_envelope(r.object("envelope"));
  } else {
    const std::string path = r.at("envelope");
    m.envelope = guarded(path, [&] { return Envelope::constant(m.tensor.default_envelope(grid.dimension())); });
  }
  r.finish();
  return m;
}

InitialSpec parse_initial(ObjectReader r, const GridSpec& grid, const std::filesystem::path& base) {
  InitialSpec s;
  const std::string type = r.string("type");
  if (type == "constant") {
    s.kind = InitialSpec::Kind::Constant;
    s.value = r.nonnegative("value");
  } else if (type == "gaussian") {
    s.kind = InitialSpec::Kind::Gaussian;
    s.center = r.numbers("center");
    if (s.center.size() != static_cast<std::size_t>(grid.dimension()))
      throw ConfigError(r.at("center"), "needs one coordinate per axis");
    s.width = r.positive("width");
    s.amplitude = r.nonnegative("amplitude");
    s.background = r.has("background") ? r.nonnegative("background") : 0.0;
  } else if (type == "smooth_random") {
    s.kind = InitialSpec::Kind::SmoothRandom;
    const long long modes = r.integer("modes");
    if (modes < 2 || modes > 64) throw ConfigError(r.at("modes"), "must lie in [2, 64]");
    s.modes = static_cast<int>(modes);
    s.mean = r.nonnegative("mean");
    s.amplitude = r.nonnegative("amplitude");
    if (s.amplitude > 1.0) throw ConfigError(r.at("amplitude"), "relative amplitude must be <= 1");
  } else if (type == "file") {
    s.kind = InitialSpec::Kind::File;
    s.file = r.string("path");
    if (s.file.is_relative()) s.file = base / s.file;
  } else {
    throw ConfigError(r.at("type"), "unknown initial data '" + type + "'");
  }
  r.finish();
  return s;
}

StepControl parse_stepping(ObjectReader r) {
  StepControl c;
  if (r.has("scheme")) {
    const std::string s = r.string("scheme");
    if (s == "explicit") {
      c.scheme = Scheme::Explicit;
    } else if (s == "imex") {
      c.scheme = Scheme::Imex;
    } else {
      throw ConfigError(r.at("scheme"), "must be 'explicit' or 'imex'");
    }
  }
  const std::string policy = r.has("policy") ? r.string("policy") : "adaptive";
  if (policy == "adaptive") {
    c.policy = DtPolicy::Adaptive;
  } else if (policy == "fixed") {
    c.policy = DtPolicy::Fixed;
    c.dt = r.positive("dt");
  } else {
    throw ConfigError(r.at("policy"), "must be 'adaptive' or 'fixed'");
  }
  if (r.has("cfl")) {
    c.cfl = r.number("cfl");
    if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError(r.at("cfl"), "must lie in (0, 1]");
  }
  if (r.has("dt_max")) c.dt_max = r.positive("dt_max");
  r.finish();
  return c;
}

SnapshotSchedule parse_snapshots(ObjectReader r) {
  SnapshotSchedule s;
  if (r.has("stride") && r.has("interval")) throw ConfigError(r.at("interval"), "give either stride or interval");
  if (r.has("stride")) {
    const long long k = r.integer("stride");
    if (k < 1) throw ConfigError(r.at("stride"), "must be >= 1");
    s.stride = static_cast<int>(k);
  } else if (r.has("interval")) {
    s.interval = r.positive("interval");
  }
  r.finish();
  return s;
}

ToleranceOverrides parse_tolerances(ObjectReader r) {
  ToleranceOverrides t;
  if (r.has("c_tol")) t.c_tol = r.positive("c_tol");
  if (r.has("mass_relative")) t.mass_relative = r.positive("mass_relative");
  if (r.has("bound_absolute")) t.bound_absolute = r.nonnegative("bound_absolute");
  r.finish();
  return t;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  ObjectReader r(doc, "");
  RunConfig cfg;
  const long long version = r.integer("format_version");
  if (version != kConfigFormatVersion)
    throw ConfigError(r.at("format_version"), "unsupported version " + std::to_string(version));
  cfg.grid = parse_grid(r.object("grid"));
  cfg.model = parse_model(r.object("model"), cfg.grid);
  {
    ObjectReader init = r.object("initial");
    cfg.u0 = parse_initial(init.object("u"), cfg.grid, base_dir);
    cfg.v0 = parse_initial(init.object("v"), cfg.grid, base_dir);
    init.finish();
  }
  cfg.stepping = r.has("stepping") ? parse_stepping(r.object("stepping")) : StepControl{};
  cfg.tmax = r.nonnegative("tmax");
  if (r.has("snapshots")) cfg.snapshots = parse_snapshots(r.object("snapshots"));
  if (r.has("output")) cfg.output = r.string("output");
  if (r.has("seed")) {
    const json& s = r.get("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError(r.at("seed"), "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (r.has("tolerances")) cfg.tolerances = parse_tolerances(r.object("tolerances"));
  r.finish();

  const bool random = cfg.u0.kind == InitialSpec::Kind::SmoothRandom || cfg.v0.kind == InitialSpec::Kind::SmoothRandom;
  if (random && !cfg.seed) throw ConfigError("/seed", "required when smooth_random initial data is used");
  cfg.source = doc;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.source["seed"] = seed;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

// Uniform in [-1, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform_signed(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

Field build_initial_field(const GridSpec& grid, const InitialSpec& spec, std::optional<std::uint64_t> seed,
                          std::uint64_t stream) {
  switch (spec.kind) {
    case InitialSpec::Kind::Constant:
      return Field(grid, spec.value);
    case InitialSpec::Kind::Gaussian:
      return Field::sample(grid, [&](Point p) {
        double r2 = (p.x - spec.center[0]) * (p.x - spec.center[0]);
        if (grid.dimension() == 2) r2 += (p.y - spec.center[1]) * (p.y - spec.center[1]);
        return spec.background + spec.amplitude * std::exp(-r2 / (spec.width * spec.width));
      });
    case InitialSpec::Kind::SmoothRandom: {
      if (!seed) throw DomainError("smooth_random initial data needs a seed");
      std::mt19937_64 rng(*seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
      const int my = grid.dimension() == 2 ? spec.modes : 1;
      std::vector<double> coef(static_cast<std::size_t>(spec.modes * my), 0.0);
      double total = 0.0;
      for (int m = 0; m < my; ++m)
        for (int k = 0; k < spec.modes; ++k) {
          if (k == 0 && m == 0) continue;
          const double c = uniform_signed(rng) / (1.0 + k + m);
          coef[static_cast<std::size_t>(m * spec.modes + k)] = c;
          total += std::abs(c);
        }
      const double norm = total > 0.0 ? 1.0 / total : 0.0;
      return Field::sample(grid, [&](Point p) {
        double g = 0.0;
        for (int m = 0; m < my; ++m)
          for (int k = 0; k < spec.modes; ++k) {
            const double c = coef[static_cast<std::size_t>(m * spec.modes + k)];
            if (c == 0.0) continue;
            g += c * std::cos(k * kPi * p.x / grid.box.lx) *
                 (grid.dimension() == 2 ? std::cos(m * kPi * p.y / grid.box.ly) : 1.0);
          }
        return spec.mean * (1.0 + spec.amplitude * norm * g);
      });
    }
    case InitialSpec::Kind::File: {
      Field f = read_csnap_field(spec.file, grid);
      if (f.min() < 0.0) throw DomainError("initial data file " + spec.file.string() + " has negative values");
      return f;
    }
  }
  return Field(grid);
}

State build_initial_state(const RunConfig& cfg) {
  return State{0.0, build_initial_field(cfg.grid, cfg.u0, cfg.seed, 0), build_initial_field(cfg.grid, cfg.v0, cfg.seed, 1)};
}

}  // namespace chemo
