#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "chemo/functionals.hpp"
#include "chemo/grid.hpp"
#include "chemo/model.hpp"
#include "chemo/solver.hpp"

namespace chemo::fixtures {

inline ModelSpec make_spec(const GridSpec& g, Kinetics f, SensitivityTensor s, double eps, double s0 = -1.0) {
  ModelSpec m;
  m.domain = g.box;
  m.kinetics = f;
  m.tensor = s;
  m.envelope = Envelope::constant(s0 >= 0.0 ? s0 : s.default_envelope(g.dimension()));
  m.cutoffs.epsilon = eps;
  return m;
}

inline Field gaussian(const GridSpec& g, double cx, double cy, double w, double a, double b) {
  return Field::sample(g, [=](Point p) {
    double r2 = (p.x - cx) * (p.x - cx);
    if (g.dimension() == 2) r2 += (p.y - cy) * (p.y - cy);
    return b + a * std::exp(-r2 / (w * w));
  });
}

inline Field random_field(const GridSpec& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = d(rng);
  return f;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("chemo_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace chemo::fixtures
