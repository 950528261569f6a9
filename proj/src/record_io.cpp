#include "chemo/record_io.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "chemo/snapshot.hpp"

namespace chemo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string snapshot_name(char field, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c_%06zu.csnap", field, k);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write error on " + path.string());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CertifyTolerances certify_tolerances(const RunConfig& cfg) {
  CertifyTolerances t;
  t.mass_relative = cfg.tolerances.mass_relative;
  t.bound_absolute = cfg.tolerances.bound_absolute;
  return t;
}

void write_record(const fs::path& dir, const json& config, const RunRecord& rec, const EstimateLedger& ledger,
                  const Certificate& cert, double wall_seconds, const std::string& started) {
  fs::create_directories(dir / "snapshots");

  std::ostringstream csv;
  write_ledger_csv(ledger, csv);
  write_text(dir / "ledger.csv", csv.str());
  write_text(dir / "certificate.json", certificate_json(cert) + "\n");

  json snaps = json::array();
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const Snapshot& s = rec.snapshots[k];
    const std::string un = snapshot_name('u', k), vn = snapshot_name('v', k);
    write_csnap(dir / "snapshots" / un, s.u, s.t);
    write_csnap(dir / "snapshots" / vn, s.v, s.t);
    snaps.push_back({{"index", k}, {"t", s.t}, {"u", "snapshots/" + un}, {"v", "snapshots/" + vn}});
  }

  json m;
  m["format_version"] = kRecordFormatVersion;
  m["config"] = config;
  m["files"] = {{"ledger", "ledger.csv"}, {"certificate", "certificate.json"}};
  m["snapshots"] = std::move(snaps);
  m["run"] = {{"steps", rec.steps}, {"tmax", rec.tmax}, {"horizon", rec.horizon()}, {"max_dt", rec.max_dt},
              {"certified", cert.passed()}};
  m["wall_clock"] = {{"started_utc", started}, {"seconds", wall_seconds}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw MissingInput("unreadable " + path.string() + ": " + e.what());
  }
}

}  // namespace

SimulateOutcome simulate_to_disk(const RunConfig& cfg, const fs::path& dir) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);

  const State initial = build_initial_state(cfg);
  LedgerObserver ledger(cfg.model);
  RunObserver* obs[] = {&ledger};
  RunRecord rec;
  try {
    rec = run(initial, cfg.model, cfg.stepping, cfg.tmax, cfg.snapshots, obs);
  } catch (const SolverError& e) {
    if (e.state.u.size() > 0) write_csnap(dir / "failure_u.csnap", e.state.u, e.state.t);
    if (e.state.v.size() > 0) write_csnap(dir / "failure_v.csnap", e.state.v, e.state.t);
    throw;
  }
  Certificate cert = certify(ledger.ledger(), certify_tolerances(cfg));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_record(dir, cfg.source, rec, ledger.ledger(), cert, wall, started);
  return {std::move(rec), std::move(cert), dir};
}

LoadedRecord load_record(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw MissingInput("no manifest.json in " + dir.string());
  LoadedRecord out;
  out.manifest = read_json(mpath);
  const json& m = out.manifest;
  if (!m.contains("format_version") || m["format_version"] != kRecordFormatVersion)
    throw MissingInput(mpath.string() + ": unsupported record format version");
  if (!m.contains("config") || !m.contains("snapshots") || !m.contains("run"))
    throw MissingInput(mpath.string() + ": incomplete manifest");
  for (const char* key : {"ledger", "certificate"}) {
    const fs::path p = dir / m["files"][key].get<std::string>();
    if (!fs::exists(p)) throw MissingInput("missing " + p.string());
  }

  out.config = parse_run_config(m["config"], dir);
  RunRecord& rec = out.record;
  rec.grid = out.config.grid;
  rec.model = out.config.model;
  rec.control = out.config.stepping;
  rec.steps = m["run"]["steps"].get<std::size_t>();
  rec.tmax = m["run"]["tmax"].get<double>();
  rec.max_dt = m["run"]["max_dt"].get<double>();
  for (const json& s : m["snapshots"]) {
    const fs::path up = dir / s["u"].get<std::string>();
    const fs::path vp = dir / s["v"].get<std::string>();
    if (!fs::exists(up)) throw MissingInput("missing snapshot " + up.string());
    if (!fs::exists(vp)) throw MissingInput("missing snapshot " + vp.string());
    double tu = 0.0, tv = 0.0;
    Field u, v;
    try {
      u = read_csnap_field(up, rec.grid, &tu);
      v = read_csnap_field(vp, rec.grid, &tv);
    } catch (const FormatError& e) {
      throw MissingInput(e.what());
    }
    if (tu != tv) throw MissingInput("snapshot pair " + up.string() + " disagrees on t");
    rec.snapshots.push_back({tu, std::move(u), std::move(v)});
  }
  if (rec.snapshots.empty()) throw MissingInput(mpath.string() + ": record has no snapshots");
  return out;
}

CatalogSelection parse_catalog_selection(const std::string& name) {
  if (name == "default") return CatalogSelection::Default;
  if (name == "constant") return CatalogSelection::Constant;
  throw ConfigError("--catalog", "unknown catalog '" + name + "' (default, constant)");
}

std::vector<TestFunction> make_catalog(CatalogSelection sel, const Box& box, double support) {
  if (sel == CatalogSelection::Default) return default_catalog(box, support);
  return {TestFunction("const_quadratic", box, {TestTerm{1.0, 0, 0, TimeBump::Quadratic, support}}),
          TestFunction("const_smoothstep", box, {TestTerm{1.0, 0, 0, TimeBump::Smoothstep, support}})};
}

VerifyOutcome verify_record(const fs::path& dir, CatalogSelection sel, double tol_scale) {
  const LoadedRecord lr = load_record(dir);
  const RunRecord& rec = lr.record;
  if (!(rec.horizon() > rec.initial().t)) throw DomainError("record spans no time; nothing to verify");

  ToleranceModel tol;
  tol.c_tol = lr.config.tolerances.c_tol;
  tol.scale = tol_scale;

  VerifyOutcome out;
  out.mass = mass_inequality_check(rec, lr.config.tolerances.mass_relative);
  out.weak = weak_residuals(rec, make_catalog(sel, rec.grid.box, rec.horizon()), tol);
  out.entropy = entropy_inequality_check(rec, rec.horizon(), tol);
  write_text(dir / "weak_residuals.json", weak_report_json(out.weak, out.mass) + "\n");
  write_text(dir / "entropy.json", entropy_json(out.entropy) + "\n");
  return out;
}

FamilyConfig load_family_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("/", "expected an object");
  FamilyConfig fc;
  fc.epsilons = EpsFamilyPlan{}.epsilons;
  if (doc.contains("family")) {
    const json fam = doc["family"];
    doc.erase("family");
    if (!fam.is_object()) throw ConfigError("/family", "expected an object");
    for (auto it = fam.begin(); it != fam.end(); ++it)
      if (it.key() != "epsilons") throw ConfigError("/family/" + it.key(), "unknown key");
    if (fam.contains("epsilons")) {
      const json& e = fam["epsilons"];
      if (!e.is_array() || e.empty()) throw ConfigError("/family/epsilons", "expected a nonempty array");
      fc.epsilons.clear();
      for (std::size_t j = 0; j < e.size(); ++j) {
        const std::string p = "/family/epsilons/" + std::to_string(j);
        if (!e[j].is_number()) throw ConfigError(p, "expected a number");
        const double x = e[j].get<double>();
        if (!(x > 0.0 && x < 1.0)) throw ConfigError(p, "must lie in (0, 1)");
        if (j > 0 && !(x < fc.epsilons.back())) throw ConfigError(p, "epsilons must be strictly decreasing");
        fc.epsilons.push_back(x);
      }
    }
  }
  fc.base = parse_run_config(doc, path.parent_path());
  return fc;
}

EpsFamilyPlan make_family_plan(const FamilyConfig& fc) {
  EpsFamilyPlan plan;
  plan.epsilons = fc.epsilons;
  plan.model = fc.base.model;
  plan.initial = build_initial_state(fc.base);
  plan.control = fc.base.stepping;
  plan.tmax = fc.base.tmax;
  plan.snapshots = fc.base.snapshots;
  plan.tolerances = certify_tolerances(fc.base);
  return plan;
}

FamilyOutcome family_to_disk(const FamilyConfig& fc, const fs::path& dir, std::size_t jobs) {
  const std::string started = utc_now();
  fs::create_directories(dir);
  const EpsFamilyPlan plan = make_family_plan(fc);

  auto write_members = [&](const std::vector<FamilyMember>& members) {
    for (const auto& m : members) {
      std::size_t j = 0;
      while (plan.epsilons[j] != m.epsilon) ++j;
      json cfg = fc.base.source;
      cfg["model"]["epsilon"] = m.epsilon;
      write_record(dir / ("eps_" + std::to_string(j)), cfg, m.record, m.ledger, m.certificate, 0.0, started);
    }
  };

  FamilyOutcome out;
  try {
    out.members = run_family(plan, jobs);
  } catch (FamilyError& e) {
    write_members(e.completed);
    throw;
  }
  write_members(out.members);

  if (out.members.size() >= 3) {
    out.table = convergence_table(out.members);
    std::ostringstream csv;
    write_convergence_csv(*out.table, csv);
    write_text(dir / "convergence_table.csv", csv.str());
    out.summary = convergence_summary(*out.table, out.members);
  } else {
    out.summary = "family has fewer than 3 members; no convergence table\n";
  }
  write_text(dir / "summary.txt", out.summary);
  return out;
}

namespace {

std::string render_certificate(const json& c) {
  std::ostringstream os;
  char buf[256];
  const json& k = c["constants"];
  std::snprintf(buf, sizeof buf, "constants: S1=%.6g K1=%.10g K3=%.10g mass0=%.10g\n", k["S1"].get<double>(),
                k["K1"].get<double>(), k["K3"].get<double>(), k["mass0"].get<double>());
  os << buf;
  for (const json& l : c["lines"]) {
    auto num = [](const json& x) { return x.is_null() ? std::nan("") : x.get<double>(); };
    std::snprintf(buf, sizeof buf, "  %-24s value=%-14.6e bound=%-14.6e margin=%-10.4f %s\n",
                  l["name"].get<std::string>().c_str(), num(l["value"]), num(l["bound"]), num(l["margin"]),
                  l["passed"].get<bool>() ? "ok" : "FAIL");
    os << buf;
  }
  os << "certificate: " << (c["passed"].get<bool>() ? "passed" : "FAILED") << "\n";
  return os.str();
}

std::string render_record(const fs::path& dir) {
  std::ostringstream os;
  const json m = read_json(dir / "manifest.json");
  os << "record " << dir.string() << ": " << m["run"]["steps"].get<std::size_t>() << " steps, t = "
     << m["run"]["horizon"].get<double>() << ", " << m["snapshots"].size() << " snapshots\n";
  os << render_certificate(read_json(dir / "certificate.json"));
  if (fs::exists(dir / "weak_residuals.json")) {
    const json w = read_json(dir / "weak_residuals.json");
    char buf[256];
    std::snprintf(buf, sizeof buf, "weak residuals (%zu test functions, tol %.3e): max |v res| = %.3e, min u res = %.3e\n",
                  w["catalog_size"].get<std::size_t>(), w["tolerance"].get<double>(),
                  w["max_abs_v_residual"].get<double>(),
                  w["min_u_residual"].is_null() ? std::nan("") : w["min_u_residual"].get<double>());
    os << buf;
    for (const json& r : w["residuals"]) {
      std::snprintf(buf, sizeof buf, "  %-22s v=%+.3e %s  u=%+.3e %s\n", r["name"].get<std::string>().c_str(),
                    r["v_residual"].get<double>(), r["v_passed"].get<bool>() ? "ok" : "FAIL",
                    r["u_residual"].get<double>(), r["u_passed"].get<bool>() ? "ok" : "FAIL");
      os << buf;
    }
    os << "mass inequality: " << (w["mass_inequality"]["passed"].get<bool>() ? "ok" : "FAIL") << "\n";
  }
  if (fs::exists(dir / "entropy.json")) {
    const json e = read_json(dir / "entropy.json");
    char buf[200];
    std::snprintf(buf, sizeof buf, "entropy inequality at T=%.6g: gap=%+.3e tol=%.3e %s\n", e["T"].get<double>(),
                  e["gap"].get<double>(), e["tolerance"].get<double>(), e["passed"].get<bool>() ? "ok" : "FAIL");
    os << buf;
  }
  return os.str();
}

}  // namespace

std::string render_report(const fs::path& dir) {
  if (fs::exists(dir / "manifest.json")) return render_record(dir);
  if (fs::exists(dir / "summary.txt")) {
    std::ostringstream os;
    std::ifstream in(dir / "summary.txt");
    os << in.rdbuf();
    for (std::size_t j = 0; fs::exists(dir / ("eps_" + std::to_string(j)) / "manifest.json"); ++j)
      os << "\n" << render_record(dir / ("eps_" + std::to_string(j)));
    return os.str();
  }
  throw MissingInput("no record or family output in " + dir.string());
}

fs::path resolve_output_dir(const std::optional<std::string>& flag, const std::optional<std::string>& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (cfg && !cfg->empty()) return *cfg;
  if (const char* env = std::getenv("CHEMO_OUT_DIR"); env && *env) return env;
  return "chemo_out";
}

}  // namespace chemo
