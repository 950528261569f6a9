#include "chemo/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace chemo {

EstimateConstants compute_constants(const Field& u0, const Field& v0, const Envelope& s0) {
  if (u0.min() < 0.0 || v0.min() < 0.0) throw DomainError("compute_constants: initial data must be nonnegative");
  const GridSpec& g = u0.grid();
  EstimateConstants c;
  c.mass0 = integrate(u0);
  c.v0_max = v0.max();
  c.v0_integral = integrate(v0);
  double sq = 0.0, vlog = 0.0;
  for (std::size_t k = 0; k < v0.size(); ++k) {
    sq += v0[k] * v0[k];
    vlog += v0[k] * std::log1p(u0[k]);
  }
  c.v0_square_integral = sq * g.cell_volume();
  vlog *= g.cell_volume();
  c.s1 = s0(c.v0_max);
  c.k1 = 2.0 * c.mass0 + 0.5 * c.s1 * c.s1 * c.v0_square_integral;
  c.k3 = vlog + (c.v0_max + 2.0) * c.k1 +
         (0.5 + 0.5 * c.s1 + 0.125 * c.v0_max * c.v0_max * c.s1 * c.s1) * c.v0_square_integral;
  return c;
}

Increments integrands(const State& s, const Kinetics& f) {
  const GridSpec& g = s.u.grid();
  Increments inc;
  const FaceField gv = face_gradient(s.v);
  inc.d_v = face_inner(gv, gv);

  const FaceField gu = face_gradient(s.u);
  double dl = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const std::size_t e = g.x_face(i, j);
      const double w = 0.5 * (s.u[g.cell(i, j)] + s.u[g.cell(i + 1, j)]) + 1.0;
      dl += gu.x[e] * gu.x[e] / (w * w);
    }
  if (g.dimension() == 2)
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t e = g.y_face(i, j);
        const double w = 0.5 * (s.u[g.cell(i, j)] + s.u[g.cell(i, j + 1)]) + 1.0;
        dl += gu.y[e] * gu.y[e] / (w * w);
      }
  inc.d_lnu = dl * g.face_volume();

  double c = 0.0, e = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const double uf = s.u[k] * f(s.v[k]);
    c += uf;
    e += uf * std::log1p(s.u[k]);
  }
  inc.c = c * g.cell_volume();
  inc.e = e * g.cell_volume();
  return inc;
}

namespace {

LedgerRow observe(const State& s) {
  LedgerRow r;
  r.t = s.t;
  r.mass = integrate(s.u);
  r.vmax = s.v.max();
  r.vmin = s.v.min();
  r.umin = s.u.min();
  double mixed = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) mixed += s.v[k] * std::log1p(std::max(s.u[k], 0.0));
  r.mixed = mixed * s.u.grid().cell_volume();
  return r;
}

}  // namespace

EstimateLedger::EstimateLedger(const State& initial, const ModelSpec& spec)
    : constants_(compute_constants(initial.u, initial.v, spec.envelope)), kinetics_(spec.kinetics) {
  rows_.push_back(observe(initial));
}

void EstimateLedger::accumulate(const State& before, const State& after, double dt) {
  if (!(dt > 0.0)) throw DomainError("accumulate: dt must be > 0");
  const Increments inc = integrands(before, kinetics_);
  const LedgerRow& prev = rows_.back();
  LedgerRow r = observe(after);
  r.d_v = prev.d_v + dt * inc.d_v;
  r.c = prev.c + dt * inc.c;
  r.d_lnu = prev.d_lnu + dt * inc.d_lnu;
  r.e = prev.e + dt * inc.e;
  rows_.push_back(r);
}

// ---------------------------------------------------------------------------

bool Certificate::passed() const {
  return std::all_of(lines.begin(), lines.end(), [](const CertificateLine& l) { return l.passed; });
}

const CertificateLine& Certificate::line(const std::string& name) const {
  for (const auto& l : lines)
    if (l.name == name) return l;
  throw std::out_of_range("no certificate line named " + name);
}

namespace {

double margin_of(double value, double bound) {
  if (bound > 0.0) return (bound - value) / bound;
  return value <= 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
}

CertificateLine bound_line(const std::string& name, double value, double bound, double slack) {
  return {name, value, bound, margin_of(value, bound), value <= bound + slack};
}

}  // namespace

Certificate certify(const EstimateLedger& ledger, const CertifyTolerances& tol) {
  Certificate cert;
  cert.constants = ledger.constants();
  const auto& rows = ledger.rows();
  const LedgerRow& first = rows.front();
  const LedgerRow& last = rows.back();
  const EstimateConstants& k = cert.constants;

  double drift = 0.0, growth = 0.0, vmin = first.vmin, umin = first.umin;
  const double mass_scale = std::abs(first.mass) > 0.0 ? std::abs(first.mass) : 1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    drift = std::max(drift, std::abs(rows[i].mass - first.mass) / mass_scale);
    if (i > 0) growth = std::max(growth, rows[i].vmax - rows[i - 1].vmax);
    vmin = std::min(vmin, rows[i].vmin);
    umin = std::min(umin, rows[i].umin);
  }
  const double vmax_slack = tol.vmax_relative * std::max(first.vmax, std::numeric_limits<double>::min());

  cert.lines.push_back({"mass_conservation", drift, tol.mass_relative, margin_of(drift, tol.mass_relative),
                        drift <= tol.mass_relative});
  cert.lines.push_back({"vmax_nonincreasing", std::max(growth, 0.0), vmax_slack,
                        margin_of(std::max(growth, 0.0), vmax_slack), growth <= vmax_slack});
  cert.lines.push_back({"v_nonnegative", -vmin, -tol.min_value, margin_of(-vmin, -tol.min_value),
                        vmin >= tol.min_value});
  cert.lines.push_back({"u_nonnegative", -umin, -tol.min_value, margin_of(-umin, -tol.min_value),
                        umin >= tol.min_value});
  cert.lines.push_back(bound_line("grad_v_energy", last.d_v, 0.5 * k.v0_square_integral, tol.bound_absolute));
  cert.lines.push_back(bound_line("consumption", last.c, k.v0_integral, tol.bound_absolute));
  cert.lines.push_back(bound_line("log_gradient_K1", last.d_lnu, k.k1, tol.bound_absolute));
  cert.lines.push_back(bound_line("entropy_consumption_K3", last.e, k.k3, tol.bound_absolute));
  cert.mixed_final = last.mixed;
  return cert;
}

void write_ledger_csv(const EstimateLedger& ledger, std::ostream& os) {
  os << "t,mass,vmax,D_v,C,D_lnu,E\n";
  char buf[512];
  for (const auto& r : ledger.rows()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mass, r.vmax, r.d_v, r.c,
                  r.d_lnu, r.e);
    os << buf;
  }
}

std::string certificate_json(const Certificate& cert) {
  using nlohmann::json;
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json j;
  const auto& k = cert.constants;
  j["constants"] = {{"S1", k.s1},
                    {"K1", k.k1},
                    {"K3", k.k3},
                    {"mass0", k.mass0},
                    {"v0_max", k.v0_max},
                    {"v0_integral", k.v0_integral},
                    {"v0_square_integral", k.v0_square_integral}};
  j["lines"] = json::array();
  for (const auto& l : cert.lines)
    j["lines"].push_back(
        {{"name", l.name}, {"value", num(l.value)}, {"bound", num(l.bound)}, {"margin", num(l.margin)}, {"passed", l.passed}});
  j["diagnostics"] = {{"mixed_v_log_u_final", cert.mixed_final}};
  j["passed"] = cert.passed();
  return j.dump(2);
}

}  // namespace chemo
