#include "chemo/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace chemo {

void StepControl::check() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError("CFL safety factor must lie in (0, 1]");
  if (policy == DtPolicy::Fixed && !(dt > 0.0)) throw DomainError("fixed dt must be > 0");
  if (!(dt_max > 0.0)) throw DomainError("dt_max must be > 0");
}

FaceField chemotactic_velocity(const State& state, const ModelSpec& spec) {
  const GridSpec& g = state.v.grid();
  FaceField w(g);
  if (spec.tensor.kind() == SensitivityTensor::Kind::Zero) return w;
  const FaceField grad = face_gradient(state.v);
  const Field& u = state.u;
  const Field& v = state.v;
  const bool two_d = g.dimension() == 2;
  const std::vector<double> tx = tangential_at_x_faces(grad);
  const std::vector<double> ty = tangential_at_y_faces(grad);

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const std::size_t l = g.cell(i, j), r = g.cell(i + 1, j), f = g.x_face(i, j);
      const Tensor s = regularized_tensor(spec, g.x_face_center(i, j), 0.5 * (u[l] + u[r]), 0.5 * (v[l] + v[r]));
      w.x[f] = s(0, 0) * grad.x[f] + (two_d ? s(0, 1) * tx[f] : 0.0);
    }
  }
  if (two_d) {
    for (int j = 0; j + 1 < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t b = g.cell(i, j), t = g.cell(i, j + 1), f = g.y_face(i, j);
        const Tensor s = regularized_tensor(spec, g.y_face_center(i, j), 0.5 * (u[b] + u[t]), 0.5 * (v[b] + v[t]));
        w.y[f] = s(1, 0) * ty[f] + s(1, 1) * grad.y[f];
      }
    }
  }
  return w;
}

FaceField upwind_flux(const Field& u, const FaceField& w) {
  const GridSpec& g = w.grid;
  FaceField flux(g);
  auto donor = [](double left, double right, double vel) {
    if (vel > 0.0) return left * vel;
    if (vel < 0.0) return right * vel;
    return 0.5 * (left + right) * vel;
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const std::size_t f = g.x_face(i, j);
      flux.x[f] = donor(u[g.cell(i, j)], u[g.cell(i + 1, j)], w.x[f]);
    }
  if (g.dimension() == 2)
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t f = g.y_face(i, j);
        flux.y[f] = donor(u[g.cell(i, j)], u[g.cell(i, j + 1)], w.y[f]);
      }
  return flux;
}

FaceField chemotactic_flux(const State& state, const ModelSpec& spec) {
  return upwind_flux(state.u, chemotactic_velocity(state, spec));
}

namespace {

double stable_dt_from(const State& state, const ModelSpec& spec, const FaceField& w, Scheme scheme) {
  const GridSpec& g = state.u.grid();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  const bool diffusion = scheme == Scheme::Explicit;
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double diff = 0.0, out = 0.0;
      if (i > 0) {
        diff += ihx * ihx;
        out += std::max(0.0, -w.x[g.x_face(i - 1, j)]) * ihx;
      }
      if (i + 1 < g.nx) {
        diff += ihx * ihx;
        out += std::max(0.0, w.x[g.x_face(i, j)]) * ihx;
      }
      if (g.dimension() == 2) {
        if (j > 0) {
          diff += ihy * ihy;
          out += std::max(0.0, -w.y[g.y_face(i, j - 1)]) * ihy;
        }
        if (j + 1 < g.ny) {
          diff += ihy * ihy;
          out += std::max(0.0, w.y[g.y_face(i, j)]) * ihy;
        }
      }
      const std::size_t c = g.cell(i, j);
      const double vc = state.v[c];
      const double rate = vc > 0.0 ? state.u[c] * spec.kinetics(vc) / vc : 0.0;
      const double d = diffusion ? diff : 0.0;
      worst = std::max(worst, std::max(d + out, d + rate));
    }
  }
  return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

void require_finite(const State& before, const State& after) {
  if (after.u.all_finite() && after.v.all_finite()) return;
  std::ostringstream os;
  os << "non-finite values after step from t=" << before.t;
  throw SolverError(os.str(), after);
}

}  // namespace

double stable_dt(const State& state, const ModelSpec& spec, Scheme scheme) {
  return stable_dt_from(state, spec, chemotactic_velocity(state, spec), scheme);
}

// ---------------------------------------------------------------------------

struct Stepper::Implicit {
  double dt = -1.0;
  Eigen::SparseMatrix<double> laplace;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  explicit Implicit(const GridSpec& g) {
    std::vector<Eigen::Triplet<double>> trip;
    auto couple = [&](std::size_t a, std::size_t b, double coef) {
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      trip.emplace_back(ia, ia, -coef);
      trip.emplace_back(ib, ib, -coef);
      trip.emplace_back(ia, ib, coef);
      trip.emplace_back(ib, ia, coef);
    };
    const double cx = 1.0 / (g.hx() * g.hx());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) couple(g.cell(i, j), g.cell(i + 1, j), cx);
    if (g.dimension() == 2) {
      const double cy = 1.0 / (g.hy() * g.hy());
      for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) couple(g.cell(i, j), g.cell(i, j + 1), cy);
    }
    const auto n = static_cast<Eigen::Index>(g.cells());
    laplace.resize(n, n);
    laplace.setFromTriplets(trip.begin(), trip.end());
  }

  void prepare(double new_dt) {
    if (new_dt == dt) return;
    Eigen::SparseMatrix<double> a(laplace.rows(), laplace.cols());
    a.setIdentity();
    a -= new_dt * laplace;
    solver.compute(a);
    if (solver.info() != Eigen::Success) throw std::runtime_error("implicit diffusion factorization failed");
    dt = new_dt;
  }

  // (I - dt L) x = b with one step of iterative refinement.
  void solve(std::span<double> values) {
    const auto n = static_cast<Eigen::Index>(values.size());
    Eigen::Map<Eigen::VectorXd> b(values.data(), n);
    const Eigen::VectorXd rhs = b;
    Eigen::VectorXd x = solver.solve(rhs);
    const Eigen::VectorXd r = rhs - (x - dt * (laplace * x));
    x += solver.solve(r);
    b = x;
  }
};

Stepper::Stepper(ModelSpec spec, StepControl ctrl) : spec_(std::move(spec)), ctrl_(ctrl) {
  spec_.check();
  ctrl_.check();
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

double Stepper::choose_dt(const State& state, double dt_cap) const {
  double dt;
  if (ctrl_.policy == DtPolicy::Fixed) {
    dt = ctrl_.dt;
  } else {
    dt = ctrl_.cfl * stable_dt(state, spec_, ctrl_.scheme);
  }
  dt = std::min({dt, ctrl_.dt_max, dt_cap});
  if (!std::isfinite(dt))
    throw SolverError("time step is unbounded; set dt_max for this configuration", state);
  return dt;
}

State Stepper::advance(const State& state, double dt) {
  if (!(dt > 0.0)) throw SolverError("dt must be > 0", state);
  const FaceField w = chemotactic_velocity(state, spec_);
  const double limit = ctrl_.cfl * stable_dt_from(state, spec_, w, ctrl_.scheme);
  if (dt > limit * (1.0 + 1e-6)) {
    std::ostringstream os;
    os.precision(6);
    os << "CFL violation at t=" << state.t << ": dt=" << dt << " exceeds sigma*limit=" << limit;
    throw CflViolation(os.str(), state);
  }

  const Field div_flux = divergence(upwind_flux(state.u, w));
  const std::size_t n = state.u.size();
  State next{state.t + dt, state.u, state.v};

  if (ctrl_.scheme == Scheme::Explicit) {
    const Field lap_u = laplacian(state.u);
    const Field lap_v = laplacian(state.v);
    for (std::size_t k = 0; k < n; ++k) {
      next.u[k] = state.u[k] + dt * (lap_u[k] - div_flux[k]);
      next.v[k] = state.v[k] + dt * (lap_v[k] - state.u[k] * spec_.kinetics(state.v[k]));
    }
  } else {
    if (!implicit_) implicit_ = std::make_unique<Implicit>(state.u.grid());
    implicit_->prepare(dt);
    for (std::size_t k = 0; k < n; ++k) {
      next.u[k] = state.u[k] - dt * div_flux[k];
      next.v[k] = state.v[k] - dt * state.u[k] * spec_.kinetics(state.v[k]);
    }
    implicit_->solve(next.u.values());
    implicit_->solve(next.v.values());
  }
  require_finite(state, next);
  return next;
}

State step(const State& state, const ModelSpec& spec, const StepControl& ctrl) {
  Stepper stepper(spec, ctrl);
  return stepper.advance(state, stepper.choose_dt(state));
}

// ---------------------------------------------------------------------------

RunRecord run(const State& initial, const ModelSpec& spec, const StepControl& ctrl, double tmax,
              const SnapshotSchedule& schedule, std::span<RunObserver* const> observers) {
  if (!(tmax >= initial.t)) throw DomainError("tmax must not precede the initial time");
  if (schedule.interval <= 0.0 && schedule.stride < 1) throw DomainError("snapshot stride must be >= 1");
  if (!(initial.u.grid() == initial.v.grid())) throw DomainError("u and v live on different grids");
  if (initial.u.min() < 0.0 || initial.v.min() < 0.0) throw DomainError("initial data must be nonnegative");

  Stepper stepper(spec, ctrl);
  RunRecord rec;
  rec.grid = initial.u.grid();
  rec.model = spec;
  rec.control = ctrl;
  rec.tmax = tmax;
  rec.snapshots.push_back({initial.t, initial.u, initial.v});
  for (RunObserver* o : observers) o->start(initial);

  State s = initial;
  std::size_t next_snap_index = 1;
  bool last_saved = true;
  while (s.t < tmax) {
    double target = tmax;
    if (schedule.interval > 0.0)
      target = std::min(target, initial.t + schedule.interval * static_cast<double>(next_snap_index));
    const double remaining = target - s.t;
    const double dt_policy = stepper.choose_dt(s);
    bool lands = remaining <= dt_policy * (1.0 + 1e-8);
    const double dt = lands ? remaining : dt_policy;

    State next = stepper.advance(s, dt);
    if (lands) next.t = target;
    ++rec.steps;
    rec.max_dt = std::max(rec.max_dt, dt);
    for (RunObserver* o : observers) o->after_step(s, next, dt);

    bool save;
    if (schedule.interval > 0.0) {
      save = lands;
      if (lands && target < tmax) ++next_snap_index;
      if (lands && target >= tmax) save = true;
    } else {
      save = rec.steps % static_cast<std::size_t>(schedule.stride) == 0;
    }
    s = std::move(next);
    if (save) rec.snapshots.push_back({s.t, s.u, s.v});
    last_saved = save;
  }
  if (!last_saved) rec.snapshots.push_back({s.t, s.u, s.v});
  return rec;
}

}  // namespace chemo
