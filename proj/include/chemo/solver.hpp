#pragma once

#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemo/grid.hpp"
#include "chemo/model.hpp"

namespace chemo {

struct State {
  double t = 0.0;
  Field u;
  Field v;
};

enum class Scheme { Explicit, Imex };
enum class DtPolicy { Fixed, Adaptive };

struct StepControl {
  DtPolicy policy = DtPolicy::Adaptive;
  // Used when policy == Fixed.
  double dt = 0.0;
  // Safety factor sigma in (0, 1].
  double cfl = 0.5;
  double dt_max = std::numeric_limits<double>::infinity();
  Scheme scheme = Scheme::Explicit;

  void check() const;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, State dump) : std::runtime_error(what), state(std::move(dump)) {}
  State state;
};

class CflViolation : public SolverError {
 public:
  using SolverError::SolverError;
};

// Normal component of S_eps(x_f, u_f, v_f) grad v at every interior face.
// The normal gradient is the two-point difference, the tangential one the
// four-face average; u_f, v_f are arithmetic face means.
FaceField chemotactic_velocity(const State& state, const ModelSpec& spec);

// Donor-cell flux u_up * w; u_up is the upwind cell value, or the face mean
// when w == 0.
FaceField upwind_flux(const Field& u, const FaceField& velocity);

// u S_eps(x, u, v) grad v . n on interior faces.
FaceField chemotactic_flux(const State& state, const ModelSpec& spec);

// Largest dt keeping every explicit update a nonnegative combination of old
// values, i.e. the positivity/max-principle limit at sigma = 1.
//   explicit:  1 / max_i (sum_faces 1/h^2 + sum_outflow |w|/h,  sum_faces 1/h^2 + u f(v)/v)
//   IMEX:      the same without the diffusion part
// Returns +inf when nothing limits the step.
double stable_dt(const State& state, const ModelSpec& spec, Scheme scheme);

// Advances a single state; owns the cached implicit factorization in IMEX mode.
// One instance per run; not shared between threads.
class Stepper {
 public:
  Stepper(ModelSpec spec, StepControl ctrl);
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) noexcept;

  // dt the control policy would take from this state, capped at dt_cap.
  double choose_dt(const State& state, double dt_cap = std::numeric_limits<double>::infinity()) const;

  // Throws CflViolation when a fixed dt exceeds the stability limit and
  // SolverError on non-finite output.
  State advance(const State& state, double dt);

  const ModelSpec& model() const { return spec_; }
  const StepControl& control() const { return ctrl_; }

 private:
  struct Implicit;
  ModelSpec spec_;
  StepControl ctrl_;
  std::unique_ptr<Implicit> implicit_;
};

// One step with the dt chosen by the control policy.
State step(const State& state, const ModelSpec& spec, const StepControl& ctrl);

struct Snapshot {
  double t = 0.0;
  Field u;
  Field v;
};

struct SnapshotSchedule {
  // Keep every stride-th step (used when interval <= 0).
  int stride = 1;
  // When > 0, steps are shortened to land exactly on multiples of interval.
  double interval = 0.0;
};

struct RunRecord {
  GridSpec grid;
  ModelSpec model;
  StepControl control;
  std::vector<Snapshot> snapshots;
  std::size_t steps = 0;
  double tmax = 0.0;
  double max_dt = 0.0;

  double horizon() const { return snapshots.empty() ? 0.0 : snapshots.back().t; }
  const Snapshot& initial() const { return snapshots.front(); }
};

class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void start(const State& /*initial*/) {}
  virtual void after_step(const State& /*before*/, const State& /*after*/, double /*dt*/) {}
};

// Integrates from initial.t to tmax. The initial and final states are always
// snapshotted; observers see the initial state once and every step.
RunRecord run(const State& initial, const ModelSpec& spec, const StepControl& ctrl, double tmax,
              const SnapshotSchedule& schedule = {}, std::span<RunObserver* const> observers = {});

}  // namespace chemo
