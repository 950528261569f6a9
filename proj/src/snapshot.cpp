#include "chemo/snapshot.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace chemo {

void write_csnap(const std::filesystem::path& path, const Field& f, double t) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  const GridSpec& g = f.grid();
  std::fprintf(fp.get(), "CSNAP 1 %d %d %.17g\n", g.nx, g.ny, t);
  for (double x : f.values()) std::fprintf(fp.get(), "%.17g\n", x);
  if (std::ferror(fp.get())) throw std::runtime_error("write error on " + path.string());
}

namespace {

double parse_double(const std::string& tok, const std::filesystem::path& path) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(tok.c_str(), &end);
  // strtod reports ERANGE for subnormals too; only overflow is rejected.
  if (end == tok.c_str() || *end != '\0' || (errno == ERANGE && std::abs(x) > 1.0))
    throw FormatError(path.string() + ": malformed number '" + tok + "'");
  return x;
}

}  // namespace

CsnapData read_csnap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  std::istringstream head(line);
  std::string magic, version, t;
  CsnapData d;
  if (!(head >> magic >> version >> d.nx >> d.ny >> t) || magic != "CSNAP")
    throw FormatError(path.string() + ": bad header");
  if (version != "1") throw FormatError(path.string() + ": unsupported csnap version " + version);
  if (d.nx < 1 || d.ny < 1) throw FormatError(path.string() + ": bad dimensions");
  d.t = parse_double(t, path);
  const auto n = static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
  d.values.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    d.values.push_back(parse_double(line, path));
  }
  if (d.values.size() != n)
    throw FormatError(path.string() + ": expected " + std::to_string(n) + " values, found " +
                      std::to_string(d.values.size()));
  return d;
}

Field read_csnap_field(const std::filesystem::path& path, const GridSpec& grid, double* t) {
  CsnapData d = read_csnap(path);
  if (d.nx != grid.nx || d.ny != grid.ny)
    throw FormatError(path.string() + ": snapshot is " + std::to_string(d.nx) + "x" + std::to_string(d.ny) +
                      ", grid is " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
  if (t) *t = d.t;
  return Field(grid, std::move(d.values));
}

}  // namespace chemo
