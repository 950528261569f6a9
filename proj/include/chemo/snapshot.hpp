#pragma once

// .csnap v1: ASCII. Line 1 "CSNAP 1 <nx> <ny> <t>", then nx*ny values in
// row-major (x fastest) order, one per line, 17 significant digits.

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "chemo/grid.hpp"

namespace chemo {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsnapData {
  int nx = 0;
  int ny = 0;
  double t = 0.0;
  std::vector<double> values;
};

void write_csnap(const std::filesystem::path& path, const Field& f, double t);
CsnapData read_csnap(const std::filesystem::path& path);
// Reads and checks the dimensions against grid.
Field read_csnap_field(const std::filesystem::path& path, const GridSpec& grid, double* t = nullptr);

}  // namespace chemo
