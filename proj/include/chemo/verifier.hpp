#pragma once

// Discrete checks of the generalized-solution relations on a stored trajectory.
//
// Time quadrature: state values are held constant on each snapshot interval
// [t_k, t_{k+1}) (left endpoint). Terms carrying phi_t are integrated exactly
// against that piecewise-constant state, i.e. int v phi_t -> sum_k v^k (phi^{k+1} - phi^k);
// all other terms use the rectangle rule dt_k * g(t_k).
// Space quadrature: midpoint over cells for cell terms; face terms are summed
// over interior faces with the dual-cell volume, each component of a dot
// product taken on its own face family.

#include <string>
#include <vector>

#include "chemo/solver.hpp"

namespace chemo {

enum class TimeBump { Quadratic, Smoothstep };

// weight * cos(kx pi x / Lx) cos(ky pi y / Ly) * zeta(t), zeta(0) = 1 and
// zeta = 0 for t >= support.
struct TestTerm {
  double weight = 1.0;
  int kx = 0;
  int ky = 0;
  TimeBump bump = TimeBump::Quadratic;
  double support = 1.0;
};

double bump_value(TimeBump bump, double support, double t);
double bump_derivative(TimeBump bump, double support, double t);

// Finite sum of Neumann cosine modes times temporal bumps; dpsi/dnu = 0 on
// every face of the rectangle by construction.
class TestFunction {
 public:
  TestFunction(std::string name, Box box, std::vector<TestTerm> terms);

  const std::string& name() const { return name_; }
  const Box& box() const { return box_; }
  const std::vector<TestTerm>& terms() const { return terms_; }

  double value(Point x, double t) const;
  double time_derivative(Point x, double t) const;
  double grad_x(Point x, double t) const;
  double grad_y(Point x, double t) const;
  double laplacian(Point x, double t) const;
  // Latest time at which any term is nonzero.
  double support() const;

  TestFunction scaled(double a) const;
  friend TestFunction operator+(const TestFunction& a, const TestFunction& b);

 private:
  std::string name_;
  Box box_;
  std::vector<TestTerm> terms_;
};

// Nonnegative members 1 + cos(k pi x/Lx) cos(m pi y/Ly) / 2 (the (0,0) mode is
// the constant 1) times {quadratic, smoothstep} bumps.
//   2D: (k,m) in {(0,0),(1,0),(0,1),(1,1),(2,2),(3,3)} -> 12 members
//   1D: k in {0,1,2,3}                                  ->  8 members
std::vector<TestFunction> default_catalog(const Box& box, double support);

// tol(h, dt) = scale * c_tol * (h^2 + dt).
struct ToleranceModel {
  // tools/calibrate_tolerance: worst ratio 1.58 on the manufactured heat/absorption sweep.
  static constexpr double kDefaultCTol = 8.0;
  double c_tol = kDefaultCTol;
  double scale = 1.0;

  double operator()(double h, double dt) const { return scale * c_tol * (h * h + dt); }
  double for_record(const RunRecord& rec) const;
};

// Largest gap between consecutive snapshot times.
double snapshot_spacing(const RunRecord& rec);

// LHS - RHS of the weak identity for v:
//   int int v phi_t + int v0 phi(0) - int int grad v . grad phi - int int u f(v) phi
double v_weak_residual(const RunRecord& rec, const TestFunction& phi);

// LHS - RHS of the phi-supersolution inequality with phi(s) = ln(s+1),
// using the run's regularized tensor and its chemotactic face flux for u S grad v:
//   - int int ln(u+1) phi_t - int ln(u0+1) phi(0)
//   - [ int int ln(u+1) lap phi + int int |grad u|^2/(u+1)^2 phi
//       - int int u/(u+1)^2 grad u . S grad v phi + int int u/(u+1) S grad v . grad phi ]
// Nonnegative means the inequality holds for this phi. Throws DomainError if
// phi takes a negative value on the sampled points.
double u_supersolution_residual(const RunRecord& rec, const TestFunction& phi);

struct MassCheck {
  bool passed = false;
  bool strict = false;  // every later snapshot strictly below the initial mass
  double initial_mass = 0.0;
  double max_mass = 0.0;
  // max_t (int u(t) - int u0) / int u0
  double worst_relative_excess = 0.0;
};

MassCheck mass_inequality_check(const RunRecord& rec, double relative_slack = 1e-12);

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> values;
};

// (1/h) int_{t-h}^{t} w(s) ds at every sample time, with w held at its left
// sample on each interval and equal to `extension` for s < times[0].
// Throws DomainError if h is smaller than the largest sample spacing.
TimeSeries steklov_average(const TimeSeries& w, double h, const std::vector<double>& extension);

struct EntropyCheck {
  double t = 0.0;
  double half_v_squared_t = 0.0;
  double half_v_squared_0 = 0.0;
  double dissipation = 0.0;
  double absorption = 0.0;  // int_0^T int u v f(v)
  // (1/2 int v^2(T) - 1/2 int v0^2 + int int |grad v|^2) + int int u v f(v)
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// T is rounded down to the last snapshot time not after it.
EntropyCheck entropy_inequality_check(const RunRecord& rec, double T, const ToleranceModel& tol = {});

struct ResidualEntry {
  std::string name;
  double v_residual = 0.0;
  double u_residual = 0.0;
  bool v_passed = false;
  bool u_passed = false;
};

struct WeakResidualReport {
  std::vector<ResidualEntry> entries;
  double tolerance = 0.0;
  double h = 0.0;
  double dt = 0.0;
  double max_abs_v = 0.0;
  double min_u = 0.0;

  bool passed() const;
};

WeakResidualReport weak_residuals(const RunRecord& rec, const std::vector<TestFunction>& catalog,
                                  const ToleranceModel& tol = {});

// log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive levels.
std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err);

std::string weak_report_json(const WeakResidualReport& rep, const MassCheck& mass);
std::string entropy_json(const EntropyCheck& e);

}  // namespace chemo
