#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemo/expression.hpp"

namespace chemo {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Closed rectangle [0, lx] x [0, ly]; ly is ignored in 1D.
struct Box {
  int dimension = 1;
  double lx = 1.0;
  double ly = 1.0;

  double distance_to_boundary(double x, double y) const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Dense n x n matrix, n in {1, 2}, row-major.
struct Tensor {
  int n = 1;
  std::array<double, 4> a{};

  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double frobenius() const;
  Tensor scaled(double s) const;

  static Tensor zero(int n);
  static Tensor identity(int n, double scale = 1.0);
};

// Quintic smoothstep 6s^5 - 15s^4 + 10s^3 clamped to [0, 1].
double smoothstep(double s);
double smoothstep_derivative(double s);

// Signal consumption rate f(v).
class Kinetics {
 public:
  enum class Kind { Zero, Linear, Saturating, Expression };

  static Kinetics zero();
  static Kinetics linear(double kappa);
  // f(v) = kappa v / (1 + v)
  static Kinetics saturating(double kappa);
  static Kinetics expression(const std::string& source);

  double operator()(double v) const;
  // Analytic for the built-ins, central difference for expressions.
  double derivative(double v) const;

  Kind kind() const { return kind_; }
  std::string tag() const;
  double kappa() const { return kappa_; }

 private:
  Kind kind_ = Kind::Zero;
  double kappa_ = 0.0;
  std::shared_ptr<const Expression> expr_;
};

// Chemotactic sensitivity S(x, u, v).
class SensitivityTensor {
 public:
  enum class Kind { Zero, Scalar, Rotational, Saturating, Expression };

  static SensitivityTensor zero();
  // chi I
  static SensitivityTensor scalar(double chi);
  // chi I + beta [[0, 1], [-1, 0]]; the antisymmetric part vanishes in 1D.
  static SensitivityTensor rotational(double chi, double beta);
  // chi / (1 + u) I
  static SensitivityTensor saturating(double chi);
  // Row-major entries: 1 in 1D, 4 in 2D.
  static SensitivityTensor expression(const std::vector<std::string>& entries);

  Tensor operator()(int dimension, Point x, double u, double v) const;

  Kind kind() const { return kind_; }
  std::string tag() const;
  double chi() const { return chi_; }
  double beta() const { return beta_; }
  std::size_t expression_count() const { return exprs_.size(); }

  // Smallest constant bounding the Frobenius norm for the built-in kinds.
  // Expression tensors have no default and throw.
  double default_envelope(int dimension) const;

 private:
  Kind kind_ = Kind::Zero;
  double chi_ = 0.0;
  double beta_ = 0.0;
  std::vector<std::shared_ptr<const Expression>> exprs_;
};

// Nondecreasing growth envelope S0(v).
class Envelope {
 public:
  static Envelope constant(double value);
  static Envelope expression(const std::string& source);

  double operator()(double v) const;
  std::string tag() const;

 private:
  double value_ = 0.0;
  std::shared_ptr<const Expression> expr_;
};

// Spatial and density cutoffs rho_eps(x), chi_eps(u).
struct CutoffPair {
  double epsilon = 0.1;

  // 0 within eps/2 of the boundary, 1 beyond eps.
  double rho(const Box& box, Point x) const;
  // 1 for u <= 1/(2 eps), 0 for u >= 1/eps.
  double chi(double u) const;
};

struct ModelSpec {
  Box domain;
  Kinetics kinetics = Kinetics::zero();
  SensitivityTensor tensor = SensitivityTensor::zero();
  Envelope envelope = Envelope::constant(0.0);
  CutoffPair cutoffs;

  int dimension() const { return domain.dimension; }
  ModelSpec with_epsilon(double eps) const;
  // Throws DomainError on structurally invalid parameters.
  void check() const;
};

// rho_eps(x) chi_eps(u) S(x, u, v).
Tensor regularized_tensor(const ModelSpec& spec, Point x, double u, double v);

struct SamplingPlan {
  int points_per_axis = 9;
  double u_max = 10.0;
  int u_samples = 9;
  double v_max = 5.0;
  int v_samples = 9;
  // Second differences above this are reported as a smoothness finding.
  double smoothness_bound = 1e8;
};

struct HypothesisViolation {
  std::string check;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisViolation> violations;
  std::size_t samples = 0;
  // Largest normalized second difference observed (heuristic regularity probe).
  double max_second_difference = 0.0;

  bool passed() const { return violations.empty(); }
};

// Sampled check of f >= 0, f(0) = 0, |S| <= S0 (Frobenius), S0 nondecreasing,
// and bounded finite differences of S. Never throws on a failing model.
HypothesisReport validate_hypotheses(const ModelSpec& spec, const SamplingPlan& plan = {});

}  // namespace chemo
