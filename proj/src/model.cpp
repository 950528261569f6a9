#include "chemo/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chemo {

double Box::distance_to_boundary(double x, double y) const {
  double d = std::min(x, lx - x);
  if (dimension == 2) d = std::min(d, std::min(y, ly - y));
  return d;
}

double Tensor::frobenius() const {
  double s = 0.0;
  for (int k = 0; k < n * n; ++k) s += a[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(k)];
  return std::sqrt(s);
}

Tensor Tensor::scaled(double s) const {
  Tensor t = *this;
  for (auto& e : t.a) e *= s;
  return t;
}

Tensor Tensor::zero(int n) {
  Tensor t;
  t.n = n;
  return t;
}

Tensor Tensor::identity(int n, double scale) {
  Tensor t = zero(n);
  for (int i = 0; i < n; ++i) t(i, i) = scale;
  return t;
}

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

double smoothstep_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

// ---------------------------------------------------------------------------
// Kinetics

Kinetics Kinetics::zero() { return Kinetics{}; }

Kinetics Kinetics::linear(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("linear kinetics requires kappa > 0");
  Kinetics k;
  k.kind_ = Kind::Linear;
  k.kappa_ = kappa;
  return k;
}

Kinetics Kinetics::saturating(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("saturating kinetics requires kappa > 0");
  Kinetics k;
  k.kind_ = Kind::Saturating;
  k.kappa_ = kappa;
  return k;
}

Kinetics Kinetics::expression(const std::string& source) {
  Kinetics k;
  k.kind_ = Kind::Expression;
  k.expr_ = std::make_shared<const Expression>(source);
  return k;
}

double Kinetics::operator()(double v) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Linear:
      return kappa_ * v;
    case Kind::Saturating:
      return kappa_ * v / (1.0 + v);
    case Kind::Expression:
      return (*expr_)(ExprVars{0.0, 0.0, 0.0, v});
  }
  return 0.0;
}

double Kinetics::derivative(double v) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Linear:
      return kappa_;
    case Kind::Saturating:
      return kappa_ / ((1.0 + v) * (1.0 + v));
    case Kind::Expression: {
      const double h = 1e-6 * std::max(1.0, std::abs(v));
      if (v < h) return ((*this)(v + h) - (*this)(v)) / h;
      return ((*this)(v + h) - (*this)(v - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

std::string Kinetics::tag() const {
  switch (kind_) {
    case Kind::Zero:
      return "zero";
    case Kind::Linear:
      return "linear";
    case Kind::Saturating:
      return "saturating";
    case Kind::Expression:
      return "expression:" + expr_->source();
  }
  return "zero";
}

// ---------------------------------------------------------------------------
// SensitivityTensor

SensitivityTensor SensitivityTensor::zero() { return SensitivityTensor{}; }

SensitivityTensor SensitivityTensor::scalar(double chi) {
  SensitivityTensor s;
  s.kind_ = Kind::Scalar;
  s.chi_ = chi;
  return s;
}

SensitivityTensor SensitivityTensor::rotational(double chi, double beta) {
  SensitivityTensor s;
  s.kind_ = Kind::Rotational;
  s.chi_ = chi;
  s.beta_ = beta;
  return s;
}

SensitivityTensor SensitivityTensor::saturating(double chi) {
  SensitivityTensor s;
  s.kind_ = Kind::Saturating;
  s.chi_ = chi;
  return s;
}

SensitivityTensor SensitivityTensor::expression(const std::vector<std::string>& entries) {
  if (entries.size() != 1 && entries.size() != 4)
    throw DomainError("expression tensor needs 1 (1D) or 4 (2D) entries");
  SensitivityTensor s;
  s.kind_ = Kind::Expression;
  for (const auto& e : entries) s.exprs_.push_back(std::make_shared<const Expression>(e));
  return s;
}

Tensor SensitivityTensor::operator()(int dimension, Point x, double u, double v) const {
  switch (kind_) {
    case Kind::Zero:
      return Tensor::zero(dimension);
    case Kind::Scalar:
      return Tensor::identity(dimension, chi_);
    case Kind::Rotational: {
      Tensor t = Tensor::identity(dimension, chi_);
      if (dimension == 2) {
        t(0, 1) = beta_;
        t(1, 0) = -beta_;
      }
      return t;
    }
    case Kind::Saturating:
      return Tensor::identity(dimension, chi_ / (1.0 + u));
    case Kind::Expression: {
      const auto need = static_cast<std::size_t>(dimension * dimension);
      if (exprs_.size() != need)
        throw DomainError("expression tensor has " + std::to_string(exprs_.size()) +
                          " entries, dimension " + std::to_string(dimension) + " needs " +
                          std::to_string(need));
      Tensor t = Tensor::zero(dimension);
      const ExprVars vars{x.x, x.y, u, v};
      for (std::size_t k = 0; k < need; ++k) t.a[k] = (*exprs_[k])(vars);
      return t;
    }
  }
  return Tensor::zero(dimension);
}

std::string SensitivityTensor::tag() const {
  switch (kind_) {
    case Kind::Zero:
      return "zero";
    case Kind::Scalar:
      return "scalar";
    case Kind::Rotational:
      return "rotational";
    case Kind::Saturating:
      return "saturating";
    case Kind::Expression:
      return "expression";
  }
  return "zero";
}

double SensitivityTensor::default_envelope(int dimension) const {
  const double n = static_cast<double>(dimension);
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Scalar:
    case Kind::Saturating:
      return std::abs(chi_) * std::sqrt(n);
    case Kind::Rotational:
      return std::sqrt(n * chi_ * chi_ + (dimension == 2 ? 2.0 * beta_ * beta_ : 0.0));
    case Kind::Expression:
      break;
  }
  throw DomainError("expression tensors require an explicit envelope");
}

// ---------------------------------------------------------------------------
// Envelope

Envelope Envelope::constant(double value) {
  if (!(value >= 0.0)) throw DomainError("envelope constant must be >= 0");
  Envelope e;
  e.value_ = value;
  return e;
}

Envelope Envelope::expression(const std::string& source) {
  Envelope e;
  e.expr_ = std::make_shared<const Expression>(source);
  return e;
}

double Envelope::operator()(double v) const {
  if (expr_) return (*expr_)(ExprVars{0.0, 0.0, 0.0, v});
  return value_;
}

std::string Envelope::tag() const {
  if (expr_) return "expression:" + expr_->source();
  std::ostringstream os;
  os.precision(17);
  os << "constant:" << value_;
  return os.str();
}

// ---------------------------------------------------------------------------
// Cutoffs

double CutoffPair::rho(const Box& box, Point x) const {
  const double half = 0.5 * epsilon;
  return smoothstep((box.distance_to_boundary(x.x, x.y) - half) / half);
}

double CutoffPair::chi(double u) const { return smoothstep(2.0 - 2.0 * epsilon * u); }

ModelSpec ModelSpec::with_epsilon(double eps) const {
  ModelSpec m = *this;
  m.cutoffs.epsilon = eps;
  return m;
}

void ModelSpec::check() const {
  if (domain.dimension != 1 && domain.dimension != 2)
    throw DomainError("dimension must be 1 or 2");
  if (!(domain.lx > 0.0) || (domain.dimension == 2 && !(domain.ly > 0.0)))
    throw DomainError("domain extents must be positive");
  if (!(cutoffs.epsilon > 0.0 && cutoffs.epsilon < 1.0))
    throw DomainError("epsilon must lie in (0, 1)");
  if (tensor.kind() == SensitivityTensor::Kind::Expression &&
      tensor.expression_count() != static_cast<std::size_t>(dimension() * dimension()))
    throw DomainError("expression tensor entry count does not match dimension");
}

Tensor regularized_tensor(const ModelSpec& spec, Point x, double u, double v) {
  if (!(u >= 0.0)) throw DomainError("regularized_tensor: density must be >= 0");
  if (!(v >= 0.0)) throw DomainError("regularized_tensor: concentration must be >= 0");
  const Box& b = spec.domain;
  if (x.x < 0.0 || x.x > b.lx || (b.dimension == 2 && (x.y < 0.0 || x.y > b.ly)))
    throw DomainError("regularized_tensor: position outside the domain");
  const double weight = spec.cutoffs.rho(b, x) * spec.cutoffs.chi(u);
  if (weight == 0.0) return Tensor::zero(b.dimension);
  return spec.tensor(b.dimension, x, u, v).scaled(weight);
}

// ---------------------------------------------------------------------------
// Hypothesis validation

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

HypothesisReport validate_hypotheses(const ModelSpec& spec, const SamplingPlan& plan) {
  HypothesisReport report;
  const int n = spec.dimension();
  const auto vs = linspace(0.0, plan.v_max, plan.v_samples);
  const auto us = linspace(0.0, plan.u_max, plan.u_samples);
  const auto xs = linspace(0.0, spec.domain.lx, plan.points_per_axis);
  const auto ys = n == 2 ? linspace(0.0, spec.domain.ly, plan.points_per_axis) : std::vector<double>{0.0};

  auto flag = [&](const std::string& check, const std::string& detail) {
    // One entry per check keeps the report readable.
    for (const auto& v : report.violations)
      if (v.check == check) return;
    report.violations.push_back({check, detail});
  };

  const double f0 = spec.kinetics(0.0);
  if (f0 != 0.0) flag("f(0)=0", "f(0) = " + fmt(f0));
  for (double v : vs) {
    const double fv = spec.kinetics(v);
    ++report.samples;
    if (!std::isfinite(fv) || fv < 0.0) flag("f>=0", "f(" + fmt(v) + ") = " + fmt(fv));
  }

  for (std::size_t k = 1; k < vs.size(); ++k) {
    if (spec.envelope(vs[k]) < spec.envelope(vs[k - 1]))
      flag("S0 nondecreasing", "S0(" + fmt(vs[k]) + ") < S0(" + fmt(vs[k - 1]) + ")");
  }

  const double probe = 1e-3;
  auto second_diff = [&](auto&& g) {
    const Tensor a = g(-probe), b = g(0.0), c = g(probe);
    double worst = 0.0;
    for (int k = 0; k < n * n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double d2 = (a.a[i] - 2.0 * b.a[i] + c.a[i]) / (probe * probe);
      worst = std::isfinite(d2) ? std::max(worst, std::abs(d2)) : INFINITY;
    }
    return worst;
  };

  for (double x : xs) {
    for (double y : ys) {
      const Point p{x, y};
      for (double u : us) {
        for (double v : vs) {
          ++report.samples;
          const Tensor s = spec.tensor(n, p, u, v);
          const double norm = s.frobenius();
          const double bound = spec.envelope(v);
          if (!std::isfinite(norm) || norm > bound * (1.0 + 1e-12)) {
            flag("|S|<=S0", "|S(" + fmt(x) + "," + fmt(y) + "," + fmt(u) + "," + fmt(v) +
                                ")|_F = " + fmt(norm) + " > S0 = " + fmt(bound));
          }
          // Probe interior points only so the stencil stays in the admissible set.
          const double uc = std::max(u, probe), vc = std::max(v, probe);
          const Point pc{std::clamp(x, probe, spec.domain.lx - probe),
                         n == 2 ? std::clamp(y, probe, spec.domain.ly - probe) : 0.0};
          double worst = 0.0;
          worst = std::max(worst, second_diff([&](double d) { return spec.tensor(n, pc, uc + d, vc); }));
          worst = std::max(worst, second_diff([&](double d) { return spec.tensor(n, pc, uc, vc + d); }));
          worst = std::max(worst, second_diff([&](double d) {
            return spec.tensor(n, Point{pc.x + d, pc.y}, uc, vc);
          }));
          if (n == 2)
            worst = std::max(worst, second_diff([&](double d) {
              return spec.tensor(n, Point{pc.x, pc.y + d}, uc, vc);
            }));
          report.max_second_difference = std::max(report.max_second_difference, worst);
          if (!(worst <= plan.smoothness_bound))
            flag("S smoothness (heuristic)", "second difference " + fmt(worst) + " near (" + fmt(x) +
                                                 "," + fmt(y) + "," + fmt(u) + "," + fmt(v) + ")");
        }
      }
    }
  }
  return report;
}

}  // namespace chemo
