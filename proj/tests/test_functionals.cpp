#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chemo/functionals.hpp"
#include "support.hpp"

using namespace chemo;
using chemo::fixtures::gaussian;
using chemo::fixtures::make_spec;

TEST(Constants, UnitDensityZeroSignal) {
  const GridSpec g = GridSpec::rect(1, 1, 8, 8);
  const EstimateConstants k = compute_constants(Field(g, 1.0), Field(g, 0.0), Envelope::constant(3.0));
  EXPECT_EQ(k.s1, 3.0);
  EXPECT_DOUBLE_EQ(k.k1, 2.0);
  EXPECT_DOUBLE_EQ(k.k3, 4.0);
}

TEST(Constants, ZeroData) {
  const GridSpec g = GridSpec::rect(1, 1, 8, 8);
  const EstimateConstants k = compute_constants(Field(g, 0.0), Field(g, 0.0), Envelope::expression("1 + v"));
  EXPECT_EQ(k.s1, 1.0);
  EXPECT_EQ(k.k1, 0.0);
  EXPECT_EQ(k.k3, 0.0);
}

TEST(Constants, UnitDataEnvelopeTwo) {
  const GridSpec g = GridSpec::rect(1, 1, 8, 8);
  const EstimateConstants k = compute_constants(Field(g, 1.0), Field(g, 1.0), Envelope::constant(2.0));
  EXPECT_EQ(k.s1, 2.0);
  EXPECT_DOUBLE_EQ(k.k1, 4.0);
  // Second evaluator: term by term.
  const double k3 = std::log(2.0) * 1.0 + (1.0 + 2.0) * 4.0 + (0.5 + 1.0 + 1.0 * 4.0 / 8.0) * 1.0;
  EXPECT_DOUBLE_EQ(k.k3, k3);
  EXPECT_NEAR(k.k3, std::log(2.0) + 14.0, 1e-14);
}

TEST(Constants, NegativeDataRejected) {
  const GridSpec g = GridSpec::line(1, 4);
  EXPECT_THROW(compute_constants(Field(g, {1, -1, 1, 1}), Field(g, 1.0), Envelope::constant(1)), DomainError);
  EXPECT_THROW(compute_constants(Field(g, 1.0), Field(g, {1, 1, -1e-3, 1}), Envelope::constant(1)), DomainError);
}

TEST(Constants, DoublingDensityDoublesMassTerm) {
  const GridSpec g = GridSpec::rect(1, 1, 10, 10);
  const Field u = gaussian(g, .4, .4, .2, 2, .1);
  Field u2 = u;
  for (std::size_t i = 0; i < u2.size(); ++i) u2[i] *= 2.0;
  const Field v = gaussian(g, .6, .6, .3, 1, .2);
  const auto a = compute_constants(u, v, Envelope::constant(1.5));
  const auto b = compute_constants(u2, v, Envelope::constant(1.5));
  EXPECT_EQ(b.mass0, 2.0 * a.mass0);
  EXPECT_EQ(b.v0_square_integral, a.v0_square_integral);
  EXPECT_NEAR(b.k1 - a.k1, 2.0 * a.mass0, 1e-14 * b.k1);
}

TEST(Accumulate, ConstantFields) {
  const GridSpec g = GridSpec::rect(2, 1, 4, 4);
  const ModelSpec m = make_spec(g, Kinetics::linear(0.5), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, 1.5), Field(g, 2.0)};
  EstimateLedger l(s, m);
  l.accumulate(s, State{0.1, s.u, s.v}, 0.1);
  const double area = 2.0, fv = 0.5 * 2.0;
  EXPECT_EQ(l.last().d_v, 0.0);
  EXPECT_EQ(l.last().d_lnu, 0.0);
  EXPECT_NEAR(l.last().c, 0.1 * area * 1.5 * fv, 1e-15);
  EXPECT_NEAR(l.last().e, 0.1 * area * 1.5 * std::log(2.5) * fv, 1e-15);
}

TEST(Accumulate, ZeroFields) {
  const GridSpec g = GridSpec::line(1, 5);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, 0.0), Field(g, 0.0)};
  const Increments inc = integrands(s, m.kinetics);
  EXPECT_EQ(inc.d_v, 0.0);
  EXPECT_EQ(inc.c, 0.0);
  EXPECT_EQ(inc.d_lnu, 0.0);
  EXPECT_EQ(inc.e, 0.0);
}

TEST(Accumulate, ThreeCellHandExample) {
  const GridSpec g = GridSpec::line(3.0, 3);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, {0, 3, 0}), Field(g, 1.0)};
  EstimateLedger l(s, m);
  l.accumulate(s, State{1.0, s.u, s.v}, 1.0);
  EXPECT_DOUBLE_EQ(l.last().c, 3.0);
  EXPECT_DOUBLE_EQ(l.last().e, 3.0 * std::log(4.0));
  EXPECT_DOUBLE_EQ(l.last().d_lnu, 2.88);
  EXPECT_EQ(l.last().d_v, 0.0);
}

TEST(Certify, ZeroDataMarginOne) {
  const GridSpec g = GridSpec::line(1, 8);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  LedgerObserver lo(m);
  RunObserver* obs[] = {&lo};
  run(State{0, Field(g, 0.0), Field(g, 0.0)}, m, StepControl{}, 0.01, {}, obs);
  const Certificate c = certify(lo.ledger());
  EXPECT_TRUE(c.passed());
  for (const char* name : {"grad_v_energy", "consumption", "log_gradient_K1", "entropy_consumption_K3"})
    EXPECT_EQ(c.line(name).margin, 1.0) << name;
}

TEST(Certify, HeatRunEnergyIdentity) {
  const GridSpec g = GridSpec::rect(1, 1, 16, 16);
  const ModelSpec m = make_spec(g, Kinetics::zero(), SensitivityTensor::zero(), 0.1, 0.0);
  LedgerObserver lo(m);
  RunObserver* obs[] = {&lo};
  run(State{0, gaussian(g, .5, .5, .2, 1, .2), gaussian(g, .3, .7, .2, 1, 0)}, m, StepControl{}, 0.05, {}, obs);
  const Certificate c = certify(lo.ledger());
  EXPECT_TRUE(c.passed());
  EXPECT_EQ(c.line("consumption").value, 0.0);
  EXPECT_EQ(c.line("entropy_consumption_K3").value, 0.0);
  EXPECT_GT(c.line("grad_v_energy").margin, 0.0);
  EXPECT_LT(c.line("grad_v_energy").value, c.line("grad_v_energy").bound);
}

TEST(Certify, RotationalRunAllLinesPassAndSeriesMonotone) {
  const GridSpec g = GridSpec::rect(1, 1, 24, 24);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::rotational(1, 1), 0.1);
  LedgerObserver lo(m);
  RunObserver* obs[] = {&lo};
  run(State{0, gaussian(g, .35, .5, .2, 3, .5), gaussian(g, .6, .5, .25, 1, .5)}, m, StepControl{}, 0.1, {}, obs);
  const Certificate c = certify(lo.ledger());
  EXPECT_TRUE(c.passed());
  EXPECT_EQ(c.lines.size(), 8u);
  const auto& rows = lo.ledger().rows();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].d_v, rows[i - 1].d_v);
    EXPECT_GE(rows[i].c, rows[i - 1].c);
    EXPECT_GE(rows[i].d_lnu, rows[i - 1].d_lnu);
    EXPECT_GE(rows[i].e, rows[i - 1].e);
  }
}

TEST(Certify, InjectedViolationFails) {
  const GridSpec g = GridSpec::line(1, 8);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, 1.0), Field(g, 1.0)};
  EstimateLedger l(s, m);
  // A huge step inflates C beyond int v0.
  l.accumulate(s, State{10.0, s.u, s.v}, 10.0);
  const Certificate c = certify(l);
  EXPECT_FALSE(c.passed());
  EXPECT_FALSE(c.line("consumption").passed);
}

TEST(Ledger, CsvLayout) {
  const GridSpec g = GridSpec::line(1, 4);
  const ModelSpec m = make_spec(g, Kinetics::linear(1), SensitivityTensor::scalar(1), 0.1);
  const State s{0, Field(g, 1.0), Field(g, 0.5)};
  EstimateLedger l(s, m);
  l.accumulate(s, State{0.1, s.u, s.v}, 0.1);
  std::ostringstream os;
  write_ledger_csv(l, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,mass,vmax,D_v,C,D_lnu,E");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 2);
}
