#pragma once

// Cell-centered finite-volume mesh on a rectangle with zero-flux boundaries.
//
// Layout (also the byte order of snapshot files):
//   cell (i, j)            -> j * nx + i          (x fastest)
//   x-face (i+1/2, j)      -> j * (nx - 1) + i    interior faces only
//   y-face (i, j+1/2)      -> j * nx + i          interior faces only
// Boundary faces are not stored; their flux is identically zero.

#include <functional>
#include <span>
#include <vector>

#include "chemo/model.hpp"

namespace chemo {

struct GridSpec {
  Box box;
  int nx = 3;
  int ny = 1;

  static GridSpec line(double lx, int nx);
  static GridSpec rect(double lx, double ly, int nx, int ny);

  int dimension() const { return box.dimension; }
  double hx() const { return box.lx / nx; }
  double hy() const { return box.dimension == 2 ? box.ly / ny : 1.0; }
  double cell_volume() const { return hx() * hy(); }
  // Volume of the dual cell around an interior face.
  double face_volume() const { return hx() * hy(); }
  double max_spacing() const;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t x_faces() const { return static_cast<std::size_t>(nx - 1) * static_cast<std::size_t>(ny); }
  std::size_t y_faces() const {
    return box.dimension == 2 ? static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny - 1) : 0;
  }

  std::size_t cell(int i, int j = 0) const { return static_cast<std::size_t>(j) * nx + i; }
  std::size_t x_face(int i, int j = 0) const { return static_cast<std::size_t>(j) * (nx - 1) + i; }
  std::size_t y_face(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

  Point cell_center(int i, int j = 0) const;
  Point x_face_center(int i, int j = 0) const;
  Point y_face_center(int i, int j) const;

  // Throws DomainError unless extents > 0 and every axis has >= 3 cells.
  void check() const;

  bool operator==(const GridSpec& o) const {
    return box.dimension == o.box.dimension && box.lx == o.box.lx &&
           (box.dimension == 1 || box.ly == o.box.ly) && nx == o.nx && ny == o.ny;
  }
};

class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid, double value = 0.0);
  Field(const GridSpec& grid, std::vector<double> values);

  static Field sample(const GridSpec& grid, const std::function<double(Point)>& fn);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

struct FaceField {
  GridSpec grid;
  std::vector<double> x;  // interior x-faces
  std::vector<double> y;  // interior y-faces (empty in 1D)

  FaceField() = default;
  explicit FaceField(const GridSpec& g) : grid(g), x(g.x_faces(), 0.0), y(g.y_faces(), 0.0) {}
  double l1() const;
};

// Midpoint quadrature: sum f_i * cell volume.
double integrate(const Field& f);
double integrate_values(const GridSpec& grid, std::span<const double> values);

// Two-point normal differences on interior faces.
FaceField face_gradient(const Field& f);
FaceField face_gradient(const GridSpec& grid, std::span<const double> values);

// Net outgoing face flux per unit cell volume; boundary faces contribute zero.
Field divergence(const FaceField& flux);

// divergence(face_gradient(f)): 3-point (1D) / 5-point (2D) Neumann stencil.
Field laplacian(const Field& f);

// Tangential component of a face gradient, interpolated to the other family
// as the mean of the four neighbouring normal differences (boundary ones are 0).
std::vector<double> tangential_at_x_faces(const FaceField& grad);
std::vector<double> tangential_at_y_faces(const FaceField& grad);

// Sum over interior faces of a*b times the dual-cell volume.
double face_inner(const FaceField& a, const FaceField& b);

}  // namespace chemo
