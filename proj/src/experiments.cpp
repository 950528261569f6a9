#include "chemo/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace chemo {

void EpsFamilyPlan::check() const {
  if (epsilons.empty()) throw DomainError("family needs at least one epsilon");
  for (std::size_t j = 0; j < epsilons.size(); ++j) {
    if (!(epsilons[j] > 0.0 && epsilons[j] < 1.0)) throw DomainError("family epsilon must lie in (0, 1)");
    if (j > 0 && !(epsilons[j] < epsilons[j - 1])) throw DomainError("family epsilons must be strictly decreasing");
  }
  if (!(initial.u.grid() == initial.v.grid())) throw DomainError("u0 and v0 live on different grids");
  control.check();
}

namespace {

FamilyMember run_member(const EpsFamilyPlan& plan, double eps) {
  ModelSpec spec = plan.model.with_epsilon(eps);
  LedgerObserver ledger(spec);
  RunObserver* obs[] = {&ledger};
  RunRecord rec = run(plan.initial, spec, plan.control, plan.tmax, plan.snapshots, obs);
  Certificate cert = certify(ledger.ledger(), plan.tolerances);
  return FamilyMember{eps, std::move(rec), ledger.ledger(), std::move(cert)};
}

}  // namespace

std::vector<FamilyMember> run_family(const EpsFamilyPlan& plan, std::size_t jobs) {
  plan.check();
  const std::size_t n = plan.epsilons.size();
  if (jobs == 0 || jobs > n) jobs = n;

  std::vector<std::optional<FamilyMember>> slots(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < n; j = next++) {
      try {
        slots[j] = run_member(plan, plan.epsilons[j]);
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<FamilyMember> done;
  std::vector<FamilyFailure> failed;
  for (std::size_t j = 0; j < n; ++j) {
    if (slots[j]) done.push_back(std::move(*slots[j]));
    if (errors[j]) failed.push_back({plan.epsilons[j], *errors[j]});
  }
  if (!failed.empty()) {
    std::string msg = "family run failed for " + std::to_string(failed.size()) + " member(s); first: eps=" +
                      std::to_string(failed.front().epsilon) + ": " + failed.front().what;
    throw FamilyError(msg, std::move(done), std::move(failed));
  }
  return done;
}

// ---------------------------------------------------------------------------

bool ConvergenceTable::hard_failure() const {
  for (const auto& c : columns)
    if (c.hard_failure) return true;
  return false;
}

namespace {

struct Distances {
  double log_u = 0.0;
  double v = 0.0;
  double grad_v = 0.0;
};

Distances space_time_distance(const RunRecord& a, const RunRecord& b) {
  const GridSpec& g = a.grid;
  const double vol = g.cell_volume();
  const double fvol = g.face_volume();
  Distances sq;
  for (std::size_t k = 0; k + 1 < a.snapshots.size(); ++k) {
    const double dt = a.snapshots[k + 1].t - a.snapshots[k].t;
    const Snapshot& sa = a.snapshots[k];
    const Snapshot& sb = b.snapshots[k];
    double lu = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
      const double d1 = std::log1p(sa.u[i]) - std::log1p(sb.u[i]);
      const double d2 = sa.v[i] - sb.v[i];
      lu += d1 * d1;
      dv += d2 * d2;
    }
    const FaceField ga = face_gradient(sa.v);
    const FaceField gb = face_gradient(sb.v);
    double gv = 0.0;
    for (std::size_t f = 0; f < ga.x.size(); ++f) gv += (ga.x[f] - gb.x[f]) * (ga.x[f] - gb.x[f]);
    for (std::size_t f = 0; f < ga.y.size(); ++f) gv += (ga.y[f] - gb.y[f]) * (ga.y[f] - gb.y[f]);
    sq.log_u += dt * vol * lu;
    sq.v += dt * vol * dv;
    sq.grad_v += dt * fvol * gv;
  }
  return {std::sqrt(sq.log_u), std::sqrt(sq.v), std::sqrt(sq.grad_v)};
}

CauchyColumn assess(const std::string& name, const std::vector<double>& d) {
  CauchyColumn c;
  c.name = name;
  c.decreasing = true;
  c.worst_growth = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < d.size(); ++j) {
    double growth;
    if (d[j] == 0.0) {
      growth = d[j + 1] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      growth = d[j + 1] / d[j] - 1.0;
    }
    // A column that is already exactly zero counts as converged.
    if (!(d[j + 1] < d[j]) && !(d[j] == 0.0 && d[j + 1] == 0.0)) c.decreasing = false;
    if (growth > 0.10) c.hard_failure = true;
    c.worst_growth = std::max(c.worst_growth, growth);
  }
  if (d.size() < 2) c.worst_growth = 0.0;
  return c;
}

}  // namespace

ConvergenceTable convergence_table(const std::vector<FamilyMember>& family) {
  if (family.size() < 3) throw DomainError("convergence table needs at least 3 family members");
  const RunRecord& ref = family.front().record;
  for (const auto& m : family) {
    if (!(m.record.grid == ref.grid)) throw DomainError("family members live on different grids");
    if (m.record.snapshots.size() != ref.snapshots.size())
      throw DomainError("family members have different snapshot counts");
    for (std::size_t k = 0; k < ref.snapshots.size(); ++k)
      if (m.record.snapshots[k].t != ref.snapshots[k].t)
        throw DomainError("family members have different snapshot times");
  }

  ConvergenceTable table;
  std::vector<double> lu, v, gv;
  for (std::size_t j = 0; j + 1 < family.size(); ++j) {
    const Distances d = space_time_distance(family[j].record, family[j + 1].record);
    table.rows.push_back({family[j].epsilon, family[j + 1].epsilon, d.log_u, d.v, d.grad_v});
    lu.push_back(d.log_u);
    v.push_back(d.v);
    gv.push_back(d.grad_v);
  }
  table.columns = {assess("ln(u+1)", lu), assess("v", v), assess("grad v", gv)};
  for (const auto& c : table.columns) {
    if (c.hard_failure) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "column %s grows by %.1f%% between consecutive pairs (limit 10%%)",
                    c.name.c_str(), 100.0 * c.worst_growth);
      table.warnings.emplace_back(buf);
    } else if (!c.decreasing) {
      table.warnings.push_back("column " + c.name + " is not strictly decreasing");
    }
  }
  return table;
}

void write_convergence_csv(const ConvergenceTable& table, std::ostream& os) {
  os << "eps_j,eps_j1,ln_u,v,grad_v\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps_coarse, r.eps_fine, r.log_u, r.v,
                  r.grad_v);
    os << buf;
  }
}

std::string convergence_summary(const ConvergenceTable& table, const std::vector<FamilyMember>& family) {
  std::ostringstream os;
  char buf[256];
  os << "family members: " << family.size() << "\n";
  for (const auto& m : family) {
    const auto& k1 = m.certificate.line("log_gradient_K1");
    const auto& k3 = m.certificate.line("entropy_consumption_K3");
    std::snprintf(buf, sizeof buf, "  eps=%-8g steps=%-7zu D_lnu=%.6e <= K1=%.6e  E=%.6e <= K3=%.6e  %s\n",
                  m.epsilon, m.record.steps, k1.value, k1.bound, k3.value, k3.bound,
                  m.certificate.passed() ? "certified" : "FAILED");
    os << buf;
  }
  os << "\nCauchy differences (space-time L2):\n";
  std::snprintf(buf, sizeof buf, "  %-10s %-10s %-14s %-14s %-14s\n", "eps_j", "eps_j+1", "ln(u+1)", "v", "grad v");
  os << buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "  %-10g %-10g %-14.6e %-14.6e %-14.6e\n", r.eps_coarse, r.eps_fine, r.log_u,
                  r.v, r.grad_v);
    os << buf;
  }
  for (const auto& c : table.columns) {
    std::snprintf(buf, sizeof buf, "  %-8s decreasing=%s worst growth=%+.3f%s\n", c.name.c_str(),
                  c.decreasing ? "yes" : "no", c.worst_growth, c.hard_failure ? "  HARD FAIL" : "");
    os << buf;
  }
  for (const auto& w : table.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace chemo
