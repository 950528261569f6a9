#include <gtest/gtest.h>

#include <cmath>

#include "chemo/verifier.hpp"
#include "support.hpp"

using namespace chemo;
using chemo::fixtures::gaussian;
using chemo::fixtures::make_spec;

namespace {

constexpr double kPi = 3.14159265358979323846;

RunRecord run_with(const ModelSpec& m, const State& s, double tmax, double interval = 0.0) {
  SnapshotSchedule sched;
  sched.interval = interval;
  return run(s, m, StepControl{}, tmax, sched);
}

}  // namespace

TEST(TestFunctions, NeumannAndSupport) {
  const Box box{2, 2.0, 1.0};
  for (const auto& phi : default_catalog(box, 0.5)) {
    for (double y : {0.1, 0.5, 0.9}) {
      EXPECT_NEAR(phi.grad_x({0.0, y}, 0.1), 0.0, 1e-14);
      EXPECT_NEAR(phi.grad_x({2.0, y}, 0.1), 0.0, 1e-14);
    }
    for (double x : {0.2, 1.4}) {
      EXPECT_NEAR(phi.grad_y({x, 0.0}, 0.1), 0.0, 1e-14);
      EXPECT_NEAR(phi.grad_y({x, 1.0}, 0.1), 0.0, 1e-14);
    }
    EXPECT_EQ(phi.value({0.3, 0.3}, 0.5), 0.0);
    EXPECT_EQ(phi.value({0.3, 0.3}, 0.7), 0.0);
    EXPECT_GE(phi.value({0.3, 0.7}, 0.0), 0.0);
  }
  EXPECT_EQ(default_catalog(box, 1.0).size(), 12u);
  EXPECT_EQ(default_catalog(Box{1, 1.0, 1.0}, 1.0).size(), 8u);
}

TEST(TestFunctions, AnalyticDerivatives) {
  const TestFunction phi("p", Box{2, 1.0, 1.0}, {TestTerm{1.0, 2, 1, TimeBump::Smoothstep, 1.0}});
  const Point p{0.3, 0.6};
  const double t = 0.4, d = 1e-6;
  EXPECT_NEAR(phi.time_derivative(p, t), (phi.value(p, t + d) - phi.value(p, t - d)) / (2 * d), 1e-7);
  EXPECT_NEAR(phi.grad_x(p, t), (phi.value({p.x + d, p.y}, t) - phi.value({p.x - d, p.y}, t)) / (2 * d), 1e-7);
  EXPECT_NEAR(phi.laplacian(p, t), -(4 + 1) * kPi * kPi * phi.value(p, t), 1e-10);
}

TEST(WeakResidual, ConstantSignalNoDensity) {
  const GridSpec g = GridSpec::rect(1, 1, 10, 10);
  const ModelSpec m = make_spec(g, Kinetics::linear(3), SensitivityTensor::scalar(1), 0.1);
  const RunRecord r = run_with(m, State{0, Field(g, 0.0), Field(g, 0.7)}, 0.2);
  const TestFunction phi("const", g.box, {TestTerm{1.0, 0, 0, TimeBump::Quadratic, 0.2}});
  EXPECT_LE(std::abs(v_weak_residual(r, phi)), 1e-10);
  EXPECT_LE(std::abs(u_supersolution_residual(r, phi)), 1e-10);
}

TEST(WeakResidual, VanishingTimeFactor) {
  const GridSpec g = GridSpec::line(1, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const RunRecord r = run_with(m, State{0, gaussian(g, .5, 0, .2, 1, .1), Field(g, 1.0)}, 0.05);
  const TestFunction zero("zero", g.box, {TestTerm{0.0, 1, 0, TimeBump::Quadratic, 0.05}});
  EXPECT_EQ(v_weak_residual(r, zero), 0.0);
  EXPECT_EQ(u_supersolution_residual(r, zero), 0.0);
}

TEST(WeakResidual, SupportBeyondHorizonRejected) {
  const GridSpec g = GridSpec::line(1, 8);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  const RunRecord r = run_with(m, State{0, Field(g, 1.0), Field(g, 1.0)}, 0.01);
  const TestFunction phi("long", g.box, {TestTerm{1.0, 0, 0, TimeBump::Quadratic, 1.0}});
  EXPECT_THROW(v_weak_residual(r, phi), DomainError);
}

TEST(WeakResidual, ManufacturedHeatAbsorptionConverges) {
  // Classical heat + absorption run refined in (h, dt); residual should shrink at order >= 1.
  std::vector<double> hs, errs;
  for (int level = 0; level < 3; ++level) {
    const int n = 16 << level;
    const GridSpec g = GridSpec::line(1.0, n);
    const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::zero(), 0.1, 0.0);
    const RunRecord r = run_with(m, State{0, gaussian(g, .4, 0, .2, 1, .2), gaussian(g, .6, 0, .2, 1, .3)}, 0.1);
    const TestFunction phi("cos", g.box, {TestTerm{1.0, 1, 0, TimeBump::Quadratic, 0.1}});
    hs.push_back(g.hx());
    errs.push_back(std::abs(v_weak_residual(r, phi)));
  }
  for (double o : observed_orders(hs, errs)) EXPECT_GE(o, 1.0);
}

TEST(SupersolutionResidual, HeatRunHoldsWithinTolerance) {
  const GridSpec g = GridSpec::line(1, 32);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  const RunRecord r = run_with(m, State{0, gaussian(g, .5, 0, .15, 2, 0), Field(g, 1.0)}, 0.05);
  const TestFunction phi("const", g.box, {TestTerm{1.0, 0, 0, TimeBump::Smoothstep, 0.05}});
  EXPECT_GE(u_supersolution_residual(r, phi), -ToleranceModel{}.for_record(r));
}

TEST(SupersolutionResidual, LinearInTestFunction) {
  const GridSpec g = GridSpec::rect(1, 1, 12, 12);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::rotational(1, 1), 0.1);
  const RunRecord r = run_with(m, State{0, gaussian(g, .4, .5, .2, 2, .3), gaussian(g, .6, .5, .2, 1, .3)}, 0.05);
  const auto cat = default_catalog(g.box, 0.05);
  const double a = 0.7, b = 2.5;
  const TestFunction combo = cat[3].scaled(a) + cat[8].scaled(b);
  const double lhs = u_supersolution_residual(r, combo);
  const double rhs = a * u_supersolution_residual(r, cat[3]) + b * u_supersolution_residual(r, cat[8]);
  EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(rhs)));
  const double vl = v_weak_residual(r, combo);
  const double vr = a * v_weak_residual(r, cat[3]) + b * v_weak_residual(r, cat[8]);
  EXPECT_NEAR(vl, vr, 1e-12 * (1 + std::abs(vr)));
}

TEST(SupersolutionResidual, NegativeTestFunctionRejected) {
  const GridSpec g = GridSpec::line(1, 8);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  const RunRecord r = run_with(m, State{0, Field(g, 1.0), Field(g, 1.0)}, 0.01);
  const TestFunction phi("neg", g.box, {TestTerm{1.0, 1, 0, TimeBump::Quadratic, 0.01}});
  EXPECT_THROW(u_supersolution_residual(r, phi), DomainError);
}

TEST(SupersolutionResidual, ZeroDensityIsZero) {
  const GridSpec g = GridSpec::rect(1, 1, 8, 8);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::rotational(1, 1), 0.1);
  const RunRecord r = run_with(m, State{0, Field(g, 0.0), gaussian(g, .5, .5, .2, 1, .5)}, 0.02);
  for (const auto& phi : default_catalog(g.box, 0.02)) EXPECT_EQ(u_supersolution_residual(r, phi), 0.0);
}

TEST(MassCheck, Fixtures) {
  const GridSpec g = GridSpec::line(1, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  RunRecord r = run_with(m, State{0, gaussian(g, .5, 0, .2, 1, .2), Field(g, 1.0)}, 0.02);
  const MassCheck ok = mass_inequality_check(r);
  EXPECT_TRUE(ok.passed);
  EXPECT_LE(ok.worst_relative_excess, 1e-12);

  RunRecord clipped = r;
  for (std::size_t k = 1; k < clipped.snapshots.size(); ++k)
    for (std::size_t i = 0; i < g.cells(); ++i) clipped.snapshots[k].u[i] *= 0.9;
  const MassCheck strict = mass_inequality_check(clipped);
  EXPECT_TRUE(strict.passed);
  EXPECT_TRUE(strict.strict);

  RunRecord injected = r;
  for (std::size_t i = 0; i < g.cells(); ++i) injected.snapshots.back().u[i] *= 1.01;
  const MassCheck bad = mass_inequality_check(injected);
  EXPECT_FALSE(bad.passed);
  EXPECT_NEAR(bad.worst_relative_excess, 0.01, 1e-9);
}

TEST(Steklov, ConstantUnchanged) {
  TimeSeries w;
  for (int k = 0; k <= 10; ++k) {
    w.times.push_back(0.1 * k);
    w.values.push_back({2.0, -1.0});
  }
  const TimeSeries a = steklov_average(w, 0.3, {2.0, -1.0});
  for (const auto& v : a.values) {
    EXPECT_NEAR(v[0], 2.0, 1e-14);
    EXPECT_NEAR(v[1], -1.0, 1e-14);
  }
}

TEST(Steklov, LinearShiftedByHalfWindow) {
  const double dt = 1e-3, h = 2 * dt;
  TimeSeries w;
  for (int k = 0; k <= 1000; ++k) {
    w.times.push_back(k * dt);
    w.values.push_back({k * dt});
  }
  const TimeSeries a = steklov_average(w, h, {0.0});
  for (std::size_t k = 10; k < a.times.size(); ++k) EXPECT_NEAR(a.values[k][0], a.times[k] - h / 2, 2 * dt);
}

TEST(Steklov, ConvergesAsWindowShrinks) {
  const GridSpec g = GridSpec::line(1, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  SnapshotSchedule sched;
  const RunRecord r = run(State{0, gaussian(g, .5, 0, .2, 1, .2), gaussian(g, .4, 0, .2, 1, .2)}, m,
                          StepControl{}, 0.05, sched);
  TimeSeries w;
  for (const auto& s : r.snapshots) {
    w.times.push_back(s.t);
    w.values.emplace_back(s.v.values().begin(), s.v.values().end());
  }
  const std::vector<double> ext(w.values.front());
  const double dtmax = snapshot_spacing(r);
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {0.02, 0.01, 0.005}) {
    ASSERT_GE(h, dtmax);
    const TimeSeries a = steklov_average(w, h, ext);
    double err = 0.0;
    for (std::size_t k = 0; k + 1 < w.times.size(); ++k) {
      const double dt = w.times[k + 1] - w.times[k];
      for (std::size_t i = 0; i < g.cells(); ++i) {
        const double d = a.values[k][i] - w.values[k][i];
        err += dt * g.cell_volume() * d * d;
      }
    }
    err = std::sqrt(err);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_THROW(steklov_average(w, 0.5 * dtmax, ext), DomainError);
}

TEST(Steklov, CommutesWithFaceGradient) {
  const GridSpec g = GridSpec::line(1, 12);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const RunRecord r = run_with(m, State{0, gaussian(g, .5, 0, .2, 1, .2), gaussian(g, .4, 0, .2, 1, .2)}, 0.02);
  TimeSeries w, gw;
  for (const auto& s : r.snapshots) {
    w.times.push_back(s.t);
    gw.times.push_back(s.t);
    w.values.emplace_back(s.v.values().begin(), s.v.values().end());
    gw.values.push_back(face_gradient(s.v).x);
  }
  const double h = 3 * snapshot_spacing(r);
  const TimeSeries a = steklov_average(w, h, w.values.front());
  const TimeSeries ga = steklov_average(gw, h, gw.values.front());
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    const FaceField grad = face_gradient(g, a.values[k]);
    for (std::size_t f = 0; f < grad.x.size(); ++f) EXPECT_NEAR(grad.x[f], ga.values[k][f], 1e-10);
  }
}

TEST(Entropy, ZeroKineticsIsEnergyIdentity) {
  const GridSpec g = GridSpec::rect(1, 1, 16, 16);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::scalar(1), 0.1);
  const RunRecord r = run_with(m, State{0, gaussian(g, .5, .5, .2, 1, .2), gaussian(g, .4, .5, .2, 1, .2)}, 0.05);
  const EntropyCheck e = entropy_inequality_check(r, 0.05);
  EXPECT_TRUE(e.passed);
  EXPECT_EQ(e.absorption, 0.0);
  EXPECT_LE(std::abs(e.gap), e.tolerance);
}

TEST(Entropy, ZeroSignalAllTermsZero) {
  const GridSpec g = GridSpec::line(1, 16);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const RunRecord r = run_with(m, State{0, gaussian(g, .5, 0, .2, 1, .2), Field(g, 0.0)}, 0.02);
  const EntropyCheck e = entropy_inequality_check(r, 0.02);
  EXPECT_EQ(e.half_v_squared_t, 0.0);
  EXPECT_EQ(e.half_v_squared_0, 0.0);
  EXPECT_EQ(e.dissipation, 0.0);
  EXPECT_EQ(e.absorption, 0.0);
  EXPECT_EQ(e.gap, 0.0);
  EXPECT_TRUE(e.passed);
}

TEST(Orders, ObservedOrder) {
  const auto o = observed_orders({0.1, 0.05, 0.025}, {4e-2, 1e-2, 2.5e-3});
  ASSERT_EQ(o.size(), 2u);
  EXPECT_NEAR(o[0], 2.0, 1e-12);
  EXPECT_NEAR(o[1], 2.0, 1e-12);
}
