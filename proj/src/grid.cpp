#include "chemo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chemo {

GridSpec GridSpec::line(double lx, int nx) {
  GridSpec g;
  g.box = Box{1, lx, 1.0};
  g.nx = nx;
  g.ny = 1;
  g.check();
  return g;
}

GridSpec GridSpec::rect(double lx, double ly, int nx, int ny) {
  GridSpec g;
  g.box = Box{2, lx, ly};
  g.nx = nx;
  g.ny = ny;
  g.check();
  return g;
}

double GridSpec::max_spacing() const { return box.dimension == 2 ? std::max(hx(), hy()) : hx(); }

Point GridSpec::cell_center(int i, int j) const {
  return Point{(i + 0.5) * hx(), box.dimension == 2 ? (j + 0.5) * hy() : 0.0};
}

Point GridSpec::x_face_center(int i, int j) const {
  return Point{(i + 1) * hx(), box.dimension == 2 ? (j + 0.5) * hy() : 0.0};
}

Point GridSpec::y_face_center(int i, int j) const { return Point{(i + 0.5) * hx(), (j + 1) * hy()}; }

void GridSpec::check() const {
  if (box.dimension != 1 && box.dimension != 2) throw DomainError("grid dimension must be 1 or 2");
  if (!(box.lx > 0.0)) throw DomainError("grid extent Lx must be > 0");
  if (nx < 3) throw DomainError("grid needs at least 3 cells in x");
  if (box.dimension == 2) {
    if (!(box.ly > 0.0)) throw DomainError("grid extent Ly must be > 0");
    if (ny < 3) throw DomainError("grid needs at least 3 cells in y");
  } else if (ny != 1) {
    throw DomainError("1D grid must have ny == 1");
  }
}

// ---------------------------------------------------------------------------

Field::Field(const GridSpec& grid, double value) : grid_(grid), values_(grid.cells(), value) {}

Field::Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cells()) throw DomainError("field value count does not match grid");
}

Field Field::sample(const GridSpec& grid, const std::function<double(Point)>& fn) {
  Field f(grid);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f[grid.cell(i, j)] = fn(grid.cell_center(i, j));
  return f;
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double FaceField::l1() const {
  double s = 0.0;
  for (double a : x) s += std::abs(a);
  for (double a : y) s += std::abs(a);
  return s;
}

// ---------------------------------------------------------------------------

double integrate_values(const GridSpec& grid, std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

double integrate(const Field& f) { return integrate_values(f.grid(), f.values()); }

FaceField face_gradient(const GridSpec& g, std::span<const double> f) {
  FaceField out(g);
  const double hx = g.hx();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) out.x[g.x_face(i, j)] = (f[g.cell(i + 1, j)] - f[g.cell(i, j)]) / hx;
  if (g.dimension() == 2) {
    const double hy = g.hy();
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out.y[g.y_face(i, j)] = (f[g.cell(i, j + 1)] - f[g.cell(i, j)]) / hy;
  }
  return out;
}

FaceField face_gradient(const Field& f) { return face_gradient(f.grid(), f.values()); }

Field divergence(const FaceField& flux) {
  const GridSpec& g = flux.grid;
  Field out(g);
  const double hx = g.hx();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double F = flux.x[g.x_face(i, j)] / hx;
      out[g.cell(i, j)] += F;
      out[g.cell(i + 1, j)] -= F;
    }
  }
  if (g.dimension() == 2) {
    const double hy = g.hy();
    for (int j = 0; j + 1 < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double G = flux.y[g.y_face(i, j)] / hy;
        out[g.cell(i, j)] += G;
        out[g.cell(i, j + 1)] -= G;
      }
    }
  }
  return out;
}

Field laplacian(const Field& f) { return divergence(face_gradient(f)); }

std::vector<double> tangential_at_x_faces(const FaceField& grad) {
  const GridSpec& g = grad.grid;
  std::vector<double> out(g.x_faces(), 0.0);
  if (g.dimension() != 2) return out;
  auto gy = [&](int i, int jface) {
    // jface indexes y-faces j+1/2; -1 and ny-1 are boundary faces.
    if (jface < 0 || jface >= g.ny - 1) return 0.0;
    return grad.y[g.y_face(i, jface)];
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i)
      out[g.x_face(i, j)] = 0.25 * (gy(i, j - 1) + gy(i, j) + gy(i + 1, j - 1) + gy(i + 1, j));
  return out;
}

std::vector<double> tangential_at_y_faces(const FaceField& grad) {
  const GridSpec& g = grad.grid;
  std::vector<double> out(g.y_faces(), 0.0);
  if (g.dimension() != 2) return out;
  auto gx = [&](int iface, int j) {
    if (iface < 0 || iface >= g.nx - 1) return 0.0;
    return grad.x[g.x_face(iface, j)];
  };
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out[g.y_face(i, j)] = 0.25 * (gx(i - 1, j) + gx(i, j) + gx(i - 1, j + 1) + gx(i, j + 1));
  return out;
}

double face_inner(const FaceField& a, const FaceField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) s += a.x[k] * b.x[k];
  for (std::size_t k = 0; k < a.y.size(); ++k) s += a.y[k] * b.y[k];
  return s * a.grid.face_volume();
}

}  // namespace chemo
