#pragma once

// Regularization-parameter families and their Cauchy-difference tables.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemo/functionals.hpp"
#include "chemo/solver.hpp"

namespace chemo {

struct EpsFamilyPlan {
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  // Shared by every member; model.cutoffs.epsilon is overwritten per member.
  ModelSpec model;
  State initial;
  StepControl control;
  double tmax = 0.0;
  // Members only share snapshot times under a fixed dt or an interval schedule.
  SnapshotSchedule snapshots;
  CertifyTolerances tolerances;

  // epsilons nonempty, strictly decreasing, each in (0, 1).
  void check() const;
};

struct FamilyMember {
  double epsilon = 0.0;
  RunRecord record;
  EstimateLedger ledger;
  Certificate certificate;
};

struct FamilyFailure {
  double epsilon = 0.0;
  std::string what;
};

// Thrown when at least one member fails; the members that finished are kept.
class FamilyError : public std::runtime_error {
 public:
  FamilyError(const std::string& what, std::vector<FamilyMember> done, std::vector<FamilyFailure> failed)
      : std::runtime_error(what), completed(std::move(done)), failures(std::move(failed)) {}
  std::vector<FamilyMember> completed;
  std::vector<FamilyFailure> failures;
};

// Members execute on up to `jobs` threads (0: one per member) and are returned
// in plan order.
std::vector<FamilyMember> run_family(const EpsFamilyPlan& plan, std::size_t jobs = 0);

struct CauchyRow {
  double eps_coarse = 0.0;
  double eps_fine = 0.0;
  double log_u = 0.0;   // ||ln(u_j+1) - ln(u_{j+1}+1)||_{L2(space-time)}
  double v = 0.0;       // ||v_j - v_{j+1}||
  double grad_v = 0.0;  // ||grad v_j - grad v_{j+1}||, face-wise
};

struct CauchyColumn {
  std::string name;
  bool decreasing = false;   // strictly, row to row
  double worst_growth = 0.0; // max_j d_{j+1}/d_j - 1 (negative when decreasing)
  bool hard_failure = false; // some row grows by more than 10%
};

struct ConvergenceTable {
  std::vector<CauchyRow> rows;
  std::vector<CauchyColumn> columns;  // ln(u+1), v, grad v
  std::vector<std::string> warnings;

  bool hard_failure() const;
};

// Space-time L2 distance with the left-endpoint rule over snapshot intervals.
// Requires >= 3 members on one grid with identical snapshot times.
ConvergenceTable convergence_table(const std::vector<FamilyMember>& family);

void write_convergence_csv(const ConvergenceTable& table, std::ostream& os);
std::string convergence_summary(const ConvergenceTable& table, const std::vector<FamilyMember>& family);

}  // namespace chemo
