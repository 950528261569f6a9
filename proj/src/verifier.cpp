#include "chemo/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chemo/functionals.hpp"
#include "json.hpp"

namespace chemo {

double bump_value(TimeBump bump, double support, double t) {
  if (t >= support) return 0.0;
  const double s = std::max(t, 0.0) / support;
  switch (bump) {
    case TimeBump::Quadratic:
      return (1.0 - s) * (1.0 - s);
    case TimeBump::Smoothstep:
      return 1.0 - smoothstep(s);
  }
  return 0.0;
}

double bump_derivative(TimeBump bump, double support, double t) {
  if (t >= support) return 0.0;
  const double s = std::max(t, 0.0) / support;
  switch (bump) {
    case TimeBump::Quadratic:
      return -2.0 * (1.0 - s) / support;
    case TimeBump::Smoothstep:
      return -smoothstep_derivative(s) / support;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kPi = std::numbers::pi;

struct Mode {
  double ax = 0.0;  // kx pi / Lx
  double ay = 0.0;
  bool two_d = false;

  Mode(const Box& box, const TestTerm& t)
      : ax(t.kx * kPi / box.lx), ay(box.dimension == 2 ? t.ky * kPi / box.ly : 0.0), two_d(box.dimension == 2) {}

  double psi(Point p) const { return std::cos(ax * p.x) * (two_d ? std::cos(ay * p.y) : 1.0); }
  double dx(Point p) const { return -ax * std::sin(ax * p.x) * (two_d ? std::cos(ay * p.y) : 1.0); }
  double dy(Point p) const { return two_d ? -ay * std::cos(ax * p.x) * std::sin(ay * p.y) : 0.0; }
  double lap(Point p) const { return -(ax * ax + ay * ay) * psi(p); }
};

}  // namespace

TestFunction::TestFunction(std::string name, Box box, std::vector<TestTerm> terms)
    : name_(std::move(name)), box_(box), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (!(t.support > 0.0)) throw DomainError("test function support must be > 0");
    if (t.kx < 0 || t.ky < 0) throw DomainError("test function modes must be >= 0");
  }
}

double TestFunction::value(Point x, double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * Mode(box_, term).psi(x) * bump_value(term.bump, term.support, t);
  return s;
}

double TestFunction::time_derivative(Point x, double t) const {
  double s = 0.0;
  for (const auto& term : terms_)
    s += term.weight * Mode(box_, term).psi(x) * bump_derivative(term.bump, term.support, t);
  return s;
}

double TestFunction::grad_x(Point x, double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * Mode(box_, term).dx(x) * bump_value(term.bump, term.support, t);
  return s;
}

double TestFunction::grad_y(Point x, double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * Mode(box_, term).dy(x) * bump_value(term.bump, term.support, t);
  return s;
}

double TestFunction::laplacian(Point x, double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.weight * Mode(box_, term).lap(x) * bump_value(term.bump, term.support, t);
  return s;
}

double TestFunction::support() const {
  double s = 0.0;
  for (const auto& t : terms_)
    if (t.weight != 0.0) s = std::max(s, t.support);
  return s;
}

TestFunction TestFunction::scaled(double a) const {
  TestFunction out = *this;
  for (auto& t : out.terms_) t.weight *= a;
  return out;
}

TestFunction operator+(const TestFunction& a, const TestFunction& b) {
  std::vector<TestTerm> terms = a.terms_;
  terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
  return TestFunction(a.name_ + "+" + b.name_, a.box_, std::move(terms));
}

std::vector<TestFunction> default_catalog(const Box& box, double support) {
  std::vector<std::pair<int, int>> modes;
  if (box.dimension == 2) {
    modes = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 2}, {3, 3}};
  } else {
    modes = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  }
  std::vector<TestFunction> out;
  for (TimeBump bump : {TimeBump::Quadratic, TimeBump::Smoothstep}) {
    const std::string bname = bump == TimeBump::Quadratic ? "quadratic" : "smoothstep";
    for (auto [k, m] : modes) {
      std::vector<TestTerm> terms{{1.0, 0, 0, bump, support}};
      if (k != 0 || m != 0) terms.push_back({0.5, k, m, bump, support});
      const std::string name = "psi(" + std::to_string(k) + (box.dimension == 2 ? "," + std::to_string(m) : "") +
                               ")*" + bname;
      out.emplace_back(name, box, std::move(terms));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double snapshot_spacing(const RunRecord& rec) {
  double dt = 0.0;
  for (std::size_t k = 1; k < rec.snapshots.size(); ++k)
    dt = std::max(dt, rec.snapshots[k].t - rec.snapshots[k - 1].t);
  return dt;
}

double ToleranceModel::for_record(const RunRecord& rec) const {
  return (*this)(rec.grid.max_spacing(), snapshot_spacing(rec));
}

namespace {

// Spatial samples of one cosine mode on the grid.
struct ModeSamples {
  std::vector<double> cell_psi, cell_lap;
  std::vector<double> xf_psi, xf_dn;
  std::vector<double> yf_psi, yf_dn;

  ModeSamples(const GridSpec& g, const Mode& m) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Point p = g.cell_center(i, j);
        cell_psi.push_back(m.psi(p));
        cell_lap.push_back(m.lap(p));
      }
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) {
        const Point p = g.x_face_center(i, j);
        xf_psi.push_back(m.psi(p));
        xf_dn.push_back(m.dx(p));
      }
    if (g.dimension() == 2)
      for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          const Point p = g.y_face_center(i, j);
          yf_psi.push_back(m.psi(p));
          yf_dn.push_back(m.dy(p));
        }
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void require_snapshots(const RunRecord& rec, const TestFunction& phi) {
  if (rec.snapshots.size() < 2) throw DomainError("record needs at least two snapshots");
  if (!(rec.grid == rec.snapshots.front().u.grid())) throw DomainError("record grid does not match its snapshots");
  const double horizon = rec.horizon();
  if (phi.support() > horizon * (1.0 + 1e-12))
    throw DomainError("test function '" + phi.name() + "' support " + std::to_string(phi.support()) +
                      " exceeds record horizon " + std::to_string(horizon));
}

template <typename CellTerm, typename RectTerm>
double assemble(const RunRecord& rec, const TestFunction& phi, double sign_dt_terms, CellTerm&& cell_term,
                RectTerm&& rect_term) {
  const GridSpec& g = rec.grid;
  const auto& snaps = rec.snapshots;
  const std::size_t K = snaps.size() - 1;

  std::vector<ModeSamples> samples;
  for (const auto& t : phi.terms()) samples.emplace_back(g, Mode(g.box, t));

  double residual = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double dt = snaps[k + 1].t - snaps[k].t;
    for (std::size_t m = 0; m < phi.terms().size(); ++m) {
      const TestTerm& term = phi.terms()[m];
      if (term.weight == 0.0) continue;
      const double z0 = bump_value(term.bump, term.support, snaps[k].t);
      const double z1 = bump_value(term.bump, term.support, snaps[k + 1].t);
      const double a = cell_term(k, samples[m]);
      double lhs = a * (z1 - z0);
      if (k == 0) lhs += a * z0;
      const double rhs = z0 == 0.0 ? 0.0 : dt * z0 * rect_term(k, samples[m]);
      residual += term.weight * (sign_dt_terms * lhs - rhs);
    }
  }
  return residual;
}

}  // namespace

double v_weak_residual(const RunRecord& rec, const TestFunction& phi) {
  require_snapshots(rec, phi);
  const GridSpec& g = rec.grid;
  const auto& snaps = rec.snapshots;
  const std::size_t K = snaps.size() - 1;
  const double vol = g.cell_volume(), fvol = g.face_volume();

  std::vector<std::vector<double>> absorption(K);
  std::vector<FaceField> grad(K);
  for (std::size_t k = 0; k < K; ++k) {
    grad[k] = face_gradient(snaps[k].v);
    absorption[k].resize(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) absorption[k][c] = snaps[k].u[c] * rec.model.kinetics(snaps[k].v[c]);
  }

  return assemble(
      rec, phi, 1.0,
      [&](std::size_t k, const ModeSamples& s) {
        const auto v = snaps[k].v.values();
        double acc = 0.0;
        for (std::size_t c = 0; c < v.size(); ++c) acc += v[c] * s.cell_psi[c];
        return acc * vol;
      },
      [&](std::size_t k, const ModeSamples& s) {
        const double diffusion = (dot(grad[k].x, s.xf_dn) + dot(grad[k].y, s.yf_dn)) * fvol;
        return diffusion + dot(absorption[k], s.cell_psi) * vol;
      });
}

double u_supersolution_residual(const RunRecord& rec, const TestFunction& phi) {
  require_snapshots(rec, phi);
  const GridSpec& g = rec.grid;
  const auto& snaps = rec.snapshots;
  const std::size_t K = snaps.size() - 1;
  const double vol = g.cell_volume(), fvol = g.face_volume();

  // Nonnegativity of phi on every sampled point and snapshot time.
  {
    std::vector<ModeSamples> samples;
    for (const auto& t : phi.terms()) samples.emplace_back(g, Mode(g.box, t));
    for (const auto& snap : snaps) {
      auto check = [&](auto member) {
        const std::size_t n = (samples.front().*member).size();
        for (std::size_t p = 0; p < n; ++p) {
          double value = 0.0;
          for (std::size_t m = 0; m < samples.size(); ++m) {
            const TestTerm& term = phi.terms()[m];
            value += term.weight * (samples[m].*member)[p] * bump_value(term.bump, term.support, snap.t);
          }
          if (value < -1e-14)
            throw DomainError("test function '" + phi.name() + "' is negative at a sample point");
        }
      };
      check(&ModeSamples::cell_psi);
      check(&ModeSamples::xf_psi);
      check(&ModeSamples::yf_psi);
    }
  }

  std::vector<std::vector<double>> log_u(K);
  std::vector<FaceField> w_psi(K), w_dn(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Snapshot& s = snaps[k];
    log_u[k].resize(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) log_u[k][c] = std::log1p(s.u[c]);
    const State state{s.t, s.u, s.v};
    const FaceField flux = chemotactic_flux(state, rec.model);
    const FaceField gu = face_gradient(s.u);
    w_psi[k] = FaceField(g);
    w_dn[k] = FaceField(g);
    auto fill = [&](std::vector<double>& wp, std::vector<double>& wd, const std::vector<double>& gr,
                    const std::vector<double>& fl, std::size_t f, std::size_t a, std::size_t b) {
      const double up1 = 0.5 * (s.u[a] + s.u[b]) + 1.0;
      wp[f] = (gr[f] * gr[f] - gr[f] * fl[f]) / (up1 * up1);
      wd[f] = fl[f] / up1;
    };
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i)
        fill(w_psi[k].x, w_dn[k].x, gu.x, flux.x, g.x_face(i, j), g.cell(i, j), g.cell(i + 1, j));
    if (g.dimension() == 2)
      for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          fill(w_psi[k].y, w_dn[k].y, gu.y, flux.y, g.y_face(i, j), g.cell(i, j), g.cell(i, j + 1));
  }

  return assemble(
      rec, phi, -1.0, [&](std::size_t k, const ModeSamples& s) { return dot(log_u[k], s.cell_psi) * vol; },
      [&](std::size_t k, const ModeSamples& s) {
        const double cell = dot(log_u[k], s.cell_lap) * vol;
        const double face = (dot(w_psi[k].x, s.xf_psi) + dot(w_psi[k].y, s.yf_psi) + dot(w_dn[k].x, s.xf_dn) +
                             dot(w_dn[k].y, s.yf_dn)) *
                            fvol;
        return cell + face;
      });
}

// ---------------------------------------------------------------------------

MassCheck mass_inequality_check(const RunRecord& rec, double relative_slack) {
  MassCheck out;
  if (rec.snapshots.empty()) return out;
  out.initial_mass = integrate(rec.snapshots.front().u);
  out.max_mass = out.initial_mass;
  const double scale = out.initial_mass > 0.0 ? out.initial_mass : 1.0;
  out.strict = rec.snapshots.size() > 1;
  out.worst_relative_excess = rec.snapshots.size() > 1 ? -INFINITY : 0.0;
  for (std::size_t k = 1; k < rec.snapshots.size(); ++k) {
    const double m = integrate(rec.snapshots[k].u);
    out.max_mass = std::max(out.max_mass, m);
    out.worst_relative_excess = std::max(out.worst_relative_excess, (m - out.initial_mass) / scale);
    if (!(m < out.initial_mass)) out.strict = false;
  }
  out.passed = out.worst_relative_excess <= relative_slack;
  return out;
}

TimeSeries steklov_average(const TimeSeries& w, double h, const std::vector<double>& extension) {
  const std::size_t n = w.times.size();
  if (n == 0) return w;
  if (w.values.size() != n) throw DomainError("steklov_average: times/values size mismatch");
  const std::size_t width = w.values.front().size();
  if (extension.size() != width) throw DomainError("steklov_average: extension has the wrong size");
  double spacing = 0.0;
  for (std::size_t k = 1; k < n; ++k) spacing = std::max(spacing, w.times[k] - w.times[k - 1]);
  if (!(h > 0.0) || h < spacing * (1.0 - 1e-12))
    throw DomainError("steklov_average: window is smaller than the sample spacing");

  TimeSeries out;
  out.times = w.times;
  out.values.assign(n, std::vector<double>(width, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    const double hi = w.times[k], lo = hi - h;
    auto& acc = out.values[k];
    auto add = [&](const std::vector<double>& val, double len) {
      if (len <= 0.0) return;
      for (std::size_t c = 0; c < width; ++c) acc[c] += len * val[c];
    };
    add(extension, std::min(hi, w.times[0]) - lo);
    for (std::size_t j = 0; j < k; ++j) {
      const double a = std::max(w.times[j], lo), b = w.times[j + 1];
      add(w.values[j], b - a);
    }
    for (double& x : acc) x /= h;
  }
  return out;
}

EntropyCheck entropy_inequality_check(const RunRecord& rec, double T, const ToleranceModel& tol) {
  if (rec.snapshots.empty()) throw DomainError("entropy check needs snapshots");
  if (T > rec.horizon() * (1.0 + 1e-12)) throw DomainError("entropy check time exceeds record horizon");
  const auto& snaps = rec.snapshots;
  std::size_t K = 0;
  while (K + 1 < snaps.size() && snaps[K + 1].t <= T * (1.0 + 1e-12)) ++K;

  EntropyCheck e;
  e.t = snaps[K].t;
  auto half_sq = [](const Field& f) {
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    return 0.5 * s * f.grid().cell_volume();
  };
  e.half_v_squared_t = half_sq(snaps[K].v);
  e.half_v_squared_0 = half_sq(snaps[0].v);
  for (std::size_t k = 0; k < K; ++k) {
    const double dt = snaps[k + 1].t - snaps[k].t;
    const FaceField g = face_gradient(snaps[k].v);
    e.dissipation += dt * face_inner(g, g);
    double a = 0.0;
    for (std::size_t c = 0; c < snaps[k].u.size(); ++c)
      a += snaps[k].u[c] * snaps[k].v[c] * rec.model.kinetics(snaps[k].v[c]);
    e.absorption += dt * a * rec.grid.cell_volume();
  }
  e.gap = e.half_v_squared_t - e.half_v_squared_0 + e.dissipation + e.absorption;
  e.tolerance = tol.for_record(rec);
  e.passed = e.gap >= -e.tolerance;
  return e;
}

// ---------------------------------------------------------------------------

bool WeakResidualReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const ResidualEntry& e) { return e.v_passed && e.u_passed; });
}

WeakResidualReport weak_residuals(const RunRecord& rec, const std::vector<TestFunction>& catalog,
                                  const ToleranceModel& tol) {
  WeakResidualReport rep;
  rep.h = rec.grid.max_spacing();
  rep.dt = snapshot_spacing(rec);
  rep.tolerance = tol(rep.h, rep.dt);
  rep.min_u = INFINITY;
  for (const auto& phi : catalog) {
    ResidualEntry e;
    e.name = phi.name();
    e.v_residual = v_weak_residual(rec, phi);
    e.u_residual = u_supersolution_residual(rec, phi);
    e.v_passed = std::abs(e.v_residual) <= rep.tolerance;
    e.u_passed = e.u_residual >= -rep.tolerance;
    rep.max_abs_v = std::max(rep.max_abs_v, std::abs(e.v_residual));
    rep.min_u = std::min(rep.min_u, e.u_residual);
    rep.entries.push_back(e);
  }
  return rep;
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < h.size() && i + 1 < err.size(); ++i)
    out.push_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
  return out;
}

std::string weak_report_json(const WeakResidualReport& rep, const MassCheck& mass) {
  using nlohmann::json;
  json j;
  j["h"] = rep.h;
  j["dt"] = rep.dt;
  j["tolerance"] = rep.tolerance;
  j["catalog_size"] = rep.entries.size();
  j["max_abs_v_residual"] = rep.max_abs_v;
  j["min_u_residual"] = std::isfinite(rep.min_u) ? json(rep.min_u) : json(nullptr);
  j["residuals"] = json::array();
  for (const auto& e : rep.entries)
    j["residuals"].push_back({{"name", e.name},
                              {"v_residual", e.v_residual},
                              {"u_residual", e.u_residual},
                              {"v_passed", e.v_passed},
                              {"u_passed", e.u_passed}});
  j["mass_inequality"] = {{"initial_mass", mass.initial_mass},
                          {"max_mass", mass.max_mass},
                          {"worst_relative_excess", mass.worst_relative_excess},
                          {"strict", mass.strict},
                          {"passed", mass.passed}};
  j["passed"] = rep.passed() && mass.passed;
  return j.dump(2);
}

std::string entropy_json(const EntropyCheck& e) {
  nlohmann::json j{{"T", e.t},
                   {"half_v_squared_T", e.half_v_squared_t},
                   {"half_v_squared_0", e.half_v_squared_0},
                   {"dissipation", e.dissipation},
                   {"absorption", e.absorption},
                   {"gap", e.gap},
                   {"abs_gap", std::abs(e.gap)},
                   {"tolerance", e.tolerance},
                   {"passed", e.passed}};
  return j.dump(2);
}

}  // namespace chemo
