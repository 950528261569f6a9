// Measures max residual / (h^2 + dt) on the manufactured heat/absorption run
// (S = 0, f(v) = v, smooth Gaussian data on the unit square) over three
// refinement levels and two snapshot spacings, and prints the constant the
// tolerance model would need with a 4x safety factor.

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chemo/verifier.hpp"

using namespace chemo;

int main() {
  double worst = 0.0;
  std::printf("%6s %10s %12s %12s %12s %12s %10s\n", "cells", "interval", "h^2+dt", "max|v res|", "-min u res",
              "|entropy|", "ratio");
  for (double interval : {0.0, 0.0025}) {
    for (int n : {16, 32, 64}) {
      const GridSpec g = GridSpec::rect(1, 1, n, n);
      ModelSpec m;
      m.domain = g.box;
      m.kinetics = Kinetics::linear(1.0);
      m.cutoffs.epsilon = 0.1;
      auto gauss = [&](double cx, double cy, double a, double b) {
        return Field::sample(g, [=](Point p) {
          return b + a * std::exp(-((p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy)) / 0.04);
        });
      };
      SnapshotSchedule sched;
      sched.interval = interval;
      const RunRecord rec = run(State{0, gauss(.4, .5, 2, .5), gauss(.6, .4, 1, .5)}, m, StepControl{}, 0.05, sched);
      const double scale = rec.grid.max_spacing() * rec.grid.max_spacing() + snapshot_spacing(rec);
      const WeakResidualReport rep = weak_residuals(rec, default_catalog(g.box, rec.horizon()));
      const EntropyCheck e = entropy_inequality_check(rec, rec.horizon());
      const double neg_u = std::max(0.0, -rep.min_u);
      const double ratio = std::max({rep.max_abs_v, neg_u, std::abs(e.gap)}) / scale;
      worst = std::max(worst, ratio);
      std::printf("%6d %10g %12.4e %12.4e %12.4e %12.4e %10.4f\n", n, interval, scale, rep.max_abs_v, neg_u,
                  std::abs(e.gap), ratio);
    }
  }
  std::printf("max ratio %.4f; 4x safety -> c_tol = %.4f\n", worst, 4.0 * worst);
  return 0;
}
