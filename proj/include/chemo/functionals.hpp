#pragma once

// A priori estimate ledger: mass, sup of v and the four space-time integrals
//   D_v    = int_0^t int |grad v|^2
//   C      = int_0^t int u f(v)
//   D_lnu  = int_0^t int |grad u|^2 / (u+1)^2
//   E      = int_0^t int u ln(u+1) f(v)
// together with the constants bounding them,
//   S1 = S0(|v0|_inf)
//   K1 = 2 int u0 + S1^2/2 int v0^2
//   K3 = int v0 ln(u0+1) + (|v0|_inf + 2) K1 + (1/2 + S1/2 + |v0|_inf^2 S1^2 / 8) int v0^2.
// Time integrals use the left-endpoint rectangle rule.

#include <iosfwd>
#include <string>
#include <vector>

#include "chemo/solver.hpp"

namespace chemo {

struct EstimateConstants {
  double s1 = 0.0;
  double k1 = 0.0;
  double k3 = 0.0;
  double mass0 = 0.0;
  double v0_max = 0.0;
  double v0_integral = 0.0;
  double v0_square_integral = 0.0;
};

EstimateConstants compute_constants(const Field& u0, const Field& v0, const Envelope& s0);

struct LedgerRow {
  double t = 0.0;
  double mass = 0.0;
  double vmax = 0.0;
  double d_v = 0.0;
  double c = 0.0;
  double d_lnu = 0.0;
  double e = 0.0;
  // Not part of the CSV.
  double vmin = 0.0;
  double umin = 0.0;
  double mixed = 0.0;  // int v ln(u+1)
};

// Spatial integrands of the four cumulative series at one state.
struct Increments {
  double d_v = 0.0;
  double c = 0.0;
  double d_lnu = 0.0;
  double e = 0.0;
};

Increments integrands(const State& state, const Kinetics& f);

class EstimateLedger {
 public:
  EstimateLedger(const State& initial, const ModelSpec& spec);

  const EstimateConstants& constants() const { return constants_; }
  const std::vector<LedgerRow>& rows() const { return rows_; }
  const LedgerRow& last() const { return rows_.back(); }

  // Adds dt * integrands(before) and records mass/vmax of after.
  void accumulate(const State& before, const State& after, double dt);

 private:
  EstimateConstants constants_;
  Kinetics kinetics_;
  std::vector<LedgerRow> rows_;
};

// Observer feeding a ledger from solver::run.
class LedgerObserver : public RunObserver {
 public:
  explicit LedgerObserver(const ModelSpec& spec) : spec_(spec) {}
  void start(const State& initial) override { ledger_.emplace_back(initial, spec_); }
  void after_step(const State& before, const State& after, double dt) override {
    ledger_.back().accumulate(before, after, dt);
  }
  const EstimateLedger& ledger() const { return ledger_.back(); }

 private:
  ModelSpec spec_;
  std::vector<EstimateLedger> ledger_;
};

struct CertifyTolerances {
  double mass_relative = 1e-12;
  double bound_absolute = 1e-9;
  // Allowed step-to-step growth of max v, relative to max v0.
  double vmax_relative = 1e-14;
  double min_value = -1e-14;
};

struct CertificateLine {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  // (bound - value) / bound; 1 when both are zero.
  double margin = 0.0;
  bool passed = false;
};

struct Certificate {
  EstimateConstants constants;
  std::vector<CertificateLine> lines;
  double mixed_final = 0.0;

  bool passed() const;
  const CertificateLine& line(const std::string& name) const;
};

Certificate certify(const EstimateLedger& ledger, const CertifyTolerances& tol = {});

// Columns: t,mass,vmax,D_v,C,D_lnu,E with 17 significant digits.
void write_ledger_csv(const EstimateLedger& ledger, std::ostream& os);
std::string certificate_json(const Certificate& cert);

}  // namespace chemo
