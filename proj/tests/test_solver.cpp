#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chemo/solver.hpp"
#include "support.hpp"

using namespace chemo;
using chemo::fixtures::gaussian;
using chemo::fixtures::make_spec;
using chemo::fixtures::random_field;

namespace {

constexpr double kPi = 3.14159265358979323846;

StepControl fixed(double dt, Scheme s = Scheme::Explicit) {
  StepControl c;
  c.policy = DtPolicy::Fixed;
  c.dt = dt;
  c.cfl = 1.0;
  c.scheme = s;
  return c;
}

// Average of fine cells onto the coarse grid (cell-centred grids nest under halving).
std::vector<double> restrict1d(const Field& fine) {
  std::vector<double> out(fine.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  return out;
}

double l2_diff(const Field& coarse, const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += (coarse[i] - r[i]) * (coarse[i] - r[i]);
  return std::sqrt(s * coarse.grid().cell_volume());
}

}  // namespace

TEST(Flux, ConstantSignalOrZeroDensity) {
  const GridSpec g = GridSpec::rect(1, 1, 8, 8);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::rotational(1, 1), 0.1);
  const FaceField a = chemotactic_flux(State{0, gaussian(g, .5, .5, .2, 1, .1), Field(g, 2.0)}, m);
  for (double x : a.x) EXPECT_EQ(x, 0.0);
  for (double y : a.y) EXPECT_EQ(y, 0.0);
  const FaceField b = chemotactic_flux(State{0, Field(g, 0.0), gaussian(g, .3, .5, .2, 1, .1)}, m);
  for (double x : b.x) EXPECT_EQ(x, 0.0);
  for (double y : b.y) EXPECT_EQ(y, 0.0);
}

TEST(Flux, ThreeCellHandExample) {
  const GridSpec g = GridSpec::line(3.0, 3);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, {1, 2, 1}), Field(g, {0, 1, 0})};
  const FaceField w = chemotactic_velocity(s, m);
  EXPECT_DOUBLE_EQ(w.x[0], 1.0);
  EXPECT_DOUBLE_EQ(w.x[1], -1.0);
  const FaceField f = chemotactic_flux(s, m);
  EXPECT_DOUBLE_EQ(f.x[0], 1.0);
  EXPECT_DOUBLE_EQ(f.x[1], -1.0);
}

TEST(Flux, UpwindMatchesScalarReference) {
  std::mt19937_64 rng(41);
  const GridSpec g = GridSpec::line(1.0, 20);
  const Field u = random_field(g, rng, 0, 3);
  FaceField w(g);
  std::uniform_real_distribution<double> d(-1, 1);
  for (auto& x : w.x) x = d(rng);
  w.x[4] = 0.0;
  const FaceField f = upwind_flux(u, w);
  for (int i = 0; i < 19; ++i) {
    const double ref = w.x[i] > 0 ? u[i] * w.x[i] : w.x[i] < 0 ? u[i + 1] * w.x[i] : 0.0;
    EXPECT_DOUBLE_EQ(f.x[i], ref);
  }
}

TEST(Step, ThreeCellHandExample) {
  const GridSpec g = GridSpec::line(3.0, 3);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, {1, 2, 1}), Field(g, {1, 1, 1})};
  const State n = step(s, m, fixed(0.1));
  EXPECT_NEAR(n.u[0], 1.1, 1e-15);
  EXPECT_NEAR(n.u[1], 1.8, 1e-15);
  EXPECT_NEAR(n.u[2], 1.1, 1e-15);
  EXPECT_NEAR(n.v[0], 0.9, 1e-15);
  EXPECT_NEAR(n.v[1], 0.8, 1e-15);
  EXPECT_NEAR(n.v[2], 0.9, 1e-15);
  EXPECT_DOUBLE_EQ(n.t, 0.1);
}

TEST(Step, ConstantStateIsFixedPointOfHeat) {
  const GridSpec g = GridSpec::rect(1, 1, 6, 5);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  const State s{0, Field(g, 2.5), Field(g, 0.7)};
  const State n = step(s, m, StepControl{});
  for (std::size_t i = 0; i < g.cells(); ++i) {
    EXPECT_EQ(n.u[i], 2.5);
    EXPECT_EQ(n.v[i], 0.7);
  }
}

TEST(Step, ZeroDensityStaysZeroAndSignalDiffuses) {
  const GridSpec g = GridSpec::line(1.0, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(2), SensitivityTensor::scalar(1), 0.1);
  const Field v0 = gaussian(g, .4, 0, .1, 1, 0);
  const double dt = 0.2 * g.hx() * g.hx();
  const State n = step(State{0, Field(g, 0.0), v0}, m, fixed(dt));
  const Field lap = laplacian(v0);
  for (std::size_t i = 0; i < g.cells(); ++i) {
    EXPECT_EQ(n.u[i], 0.0);
    EXPECT_DOUBLE_EQ(n.v[i], v0[i] + dt * lap[i]);
  }
}

TEST(Step, FixedDtBeyondLimitRejected) {
  const GridSpec g = GridSpec::line(1.0, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, 1.0), gaussian(g, .5, 0, .2, 1, 0)};
  const double limit = stable_dt(s, m, Scheme::Explicit);
  Stepper st(m, fixed(5.0 * limit));
  EXPECT_THROW(st.advance(s, 5.0 * limit), CflViolation);
  EXPECT_NO_THROW(st.advance(s, 0.999 * limit));
}

TEST(Step, NonFiniteStateIsHardError) {
  const GridSpec g = GridSpec::line(1.0, 8);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  Field u(g, 1.0);
  u[3] = std::numeric_limits<double>::infinity();
  Stepper st(m, StepControl{});
  EXPECT_THROW(st.advance(State{0, u, Field(g, 1.0)}, 1e-4), SolverError);
}

TEST(Step, PositivityUnderAdversarialDataProperty) {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 12; ++trial) {
    const bool two = trial % 2;
    const GridSpec g = two ? GridSpec::rect(1, 1, 12, 12) : GridSpec::line(1, 40);
    Field u = random_field(g, rng, 0, 10);
    Field v = random_field(g, rng, 0, 5);
    // Isolated spikes and holes.
    for (std::size_t i = 0; i < g.cells(); i += 7) u[i] = 0.0;
    for (std::size_t i = 3; i < g.cells(); i += 11) v[i] = 0.0;
    const SensitivityTensor s = two ? SensitivityTensor::rotational(5, 4) : SensitivityTensor::saturating(8);
    const ModelSpec m = make_spec(g, Kinetics::saturating(3), s, 0.05);
    State st{0, u, v};
    Stepper stepper(m, StepControl{});
    const double mass0 = integrate(u), vmax0 = v.max();
    for (int k = 0; k < 150; ++k) {
      st = stepper.advance(st, stepper.choose_dt(st));
      ASSERT_GE(st.u.min(), 0.0);
      ASSERT_GE(st.v.min(), 0.0);
      ASSERT_LE(st.v.max(), vmax0);
    }
    EXPECT_NEAR(integrate(st.u), mass0, 1e-12 * mass0);
  }
}

TEST(Run, ZeroHorizonKeepsInitialOnly) {
  const GridSpec g = GridSpec::line(1, 8);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  struct Count : RunObserver {
    int starts = 0, steps = 0;
    void start(const State&) override { ++starts; }
    void after_step(const State&, const State&, double) override { ++steps; }
  } c;
  RunObserver* obs[] = {&c};
  const RunRecord r = run(State{0, Field(g, 1), Field(g, 1)}, m, StepControl{}, 0.0, {}, obs);
  EXPECT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(c.starts, 1);
  EXPECT_EQ(c.steps, 0);
}

TEST(Run, HeatConservesMass) {
  const GridSpec g = GridSpec::rect(1, 1, 16, 16);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  const Field u0 = gaussian(g, .3, .6, .15, 2, 0);
  const RunRecord r = run(State{0, u0, Field(g, 1)}, m, StepControl{}, 0.05);
  EXPECT_NEAR(integrate(r.snapshots.back().u), integrate(u0), 1e-12 * integrate(u0));
  EXPECT_DOUBLE_EQ(r.horizon(), 0.05);
}

TEST(Run, IntervalScheduleLandsOnTargets) {
  const GridSpec g = GridSpec::line(1, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  SnapshotSchedule sched;
  sched.interval = 0.01;
  const RunRecord r = run(State{0, gaussian(g, .5, 0, .2, 1, 0), Field(g, 1)}, m, StepControl{}, 0.05, sched);
  ASSERT_EQ(r.snapshots.size(), 6u);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(r.snapshots[k].t, 0.01 * k);
}

TEST(Run, Rotational2dToUnitTime) {
  const GridSpec g = GridSpec::rect(1, 1, 32, 32);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::rotational(1, 1), 0.1);
  const Field u0 = gaussian(g, .35, .5, .2, 3, .5);
  SnapshotSchedule sched;
  sched.interval = 0.25;
  const RunRecord r = run(State{0, u0, gaussian(g, .6, .4, .3, 1, .5)}, m, StepControl{}, 1.0, sched);
  EXPECT_NEAR(integrate(r.snapshots.back().u), integrate(u0), 1e-12 * integrate(u0));
  for (const auto& s : r.snapshots) EXPECT_GE(s.u.min(), 0.0);
}

TEST(Run, NeumannHeatKernelOracle) {
  const GridSpec g = GridSpec::line(1.0, 128);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  auto u0 = [](double x) { return std::exp(-(x - 0.3) * (x - 0.3) / 0.01); };
  // Cosine coefficients by composite Simpson on a fine independent mesh.
  const int n = 20000;
  double a[20] = {};
  for (int k = 0; k < 20; ++k) {
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      s += w * u0(x) * std::cos(k * kPi * x);
    }
    a[k] = s / (3.0 * n) * (k == 0 ? 1.0 : 2.0);
  }
  const RunRecord r = run(State{0, Field::sample(g, [&](Point p) { return u0(p.x); }), Field(g, 0.0)}, m,
                          StepControl{}, 0.1);
  double err = 0.0;
  for (int i = 0; i < 128; ++i) {
    const double x = g.cell_center(i).x;
    double exact = 0.0;
    for (int k = 0; k < 20; ++k) exact += a[k] * std::exp(-k * k * kPi * kPi * 0.1) * std::cos(k * kPi * x);
    err = std::max(err, std::abs(r.snapshots.back().u[i] - exact));
  }
  EXPECT_LE(err, 1e-4);
}

namespace {

// log2 of successive L2 self-differences over levels base, 2 base, 4 base.
std::pair<double, double> self_convergence(double chi, int base) {
  double diffs[2];
  Field prev;
  for (int level = 0; level < 3; ++level) {
    const GridSpec g = GridSpec::line(1.0, base << level);
    const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(chi), 0.2);
    const RunRecord r = run(State{0, gaussian(g, .5, 0, .2, 2, .5), gaussian(g, .3, 0, .2, 1, .5)}, m,
                            StepControl{}, 0.05);
    const Field& u = r.snapshots.back().u;
    if (level > 0) diffs[level - 1] = l2_diff(prev, restrict1d(u));
    prev = u;
  }
  return {diffs[0], diffs[1]};
}

}  // namespace

TEST(Run, SelfConvergenceUnderRefinement) {
  const auto [d0, d1] = self_convergence(0.3, 32);
  EXPECT_GE(std::log2(d0 / d1), 1.0);
}

TEST(Run, SelfConvergenceUpwindDominated) {
  // Donor-cell limits this regime to first order, approached from below.
  const auto [d0, d1] = self_convergence(1.0, 64);
  EXPECT_GE(std::log2(d0 / d1), 0.9);
  EXPECT_LT(d1, d0);
}

TEST(Imex, ConservesAndTracksExplicit) {
  const GridSpec g = GridSpec::rect(1, 1, 16, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::rotational(1, 1), 0.1);
  const State s0{0, gaussian(g, .4, .5, .2, 2, .5), gaussian(g, .6, .5, .2, 1, .5)};
  const double explicit_limit = stable_dt(s0, m, Scheme::Explicit);
  StepControl imex;
  imex.scheme = Scheme::Imex;
  EXPECT_GT(Stepper(m, imex).choose_dt(s0), 4.0 * explicit_limit);

  const RunRecord re = run(s0, m, StepControl{}, 0.05);
  const Field& ue = re.snapshots.back().u;
  double prev_err = std::numeric_limits<double>::infinity();
  for (double cap : {4e-3, 2e-3, 1e-3}) {
    imex.dt_max = cap;
    const RunRecord ri = run(s0, m, imex, 0.05);
    const Field& ui = ri.snapshots.back().u;
    EXPECT_NEAR(integrate(ui), integrate(s0.u), 1e-12 * integrate(s0.u));
    EXPECT_GE(ui.min(), 0.0);
    EXPECT_GE(ri.snapshots.back().v.min(), 0.0);
    EXPECT_LT(ri.steps, re.steps);
    double err = 0.0;
    for (std::size_t i = 0; i < ui.size(); ++i) err = std::max(err, std::abs(ui[i] - ue[i]));
    // First order in dt against the explicit reference.
    EXPECT_LT(err, 0.7 * prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 0.05 * ue.max());
}
