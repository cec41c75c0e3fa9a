#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lagdesc/integrate.hpp"

namespace lagdesc {

/// Rectangular lattice of initial conditions with nx*ny nodes.
struct GridSpec {
  double xmin = -1.0;
  double xmax = 1.0;
  double ymin = -1.0;
  double ymax = 1.0;
  std::size_t nx = 201;
  std::size_t ny = 201;

  /// Throws std::invalid_argument unless xmin < xmax, ymin < ymax and both
  /// node counts are at least 2.
  void validate() const;

  double hx() const { return (xmax - xmin) / static_cast<double>(nx - 1); }
  double hy() const { return (ymax - ymin) / static_cast<double>(ny - 1); }

  // Node coordinates are evaluated as a weighted mean of the bounds so that
  // grids symmetric about zero have exactly mirrored nodes. The end nodes are
  // the bounds themselves.
  double x(std::size_t i) const { return lerp(xmin, xmax, i, nx); }
  double y(std::size_t j) const { return lerp(ymin, ymax, j, ny); }

  std::size_t size() const { return nx * ny; }
  /// Row-major: y varies slowest.
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  static double lerp(double lo, double hi, std::size_t k, std::size_t n) {
    if (k == 0) return lo;
    if (k + 1 == n) return hi;
    const auto last = static_cast<double>(n - 1);
    const auto kk = static_cast<double>(k);
    return ((last - kk) * lo + kk * hi) / last;
  }
};

struct FieldMeta {
  std::string field_name;
  double t0 = 0.0;
  double tau = 0.0;
  std::uint64_t config_hash = 0;
};

/// One value per grid node with a validity flag, both row-major.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  FieldMeta meta;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g)
      : grid(g), values(g.size(), 0.0), valid(g.size(), 1) {}

  double at(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
  bool valid_at(std::size_t i, std::size_t j) const { return valid[grid.index(i, j)] != 0; }
  std::size_t valid_count() const;
};

struct ComputeOptions {
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
};

/// Evaluates compute_M at every node. Nodes are independent work items, so the
/// output is bitwise identical for any worker count.
ScalarField compute_field(const VectorFieldDef& field, const GridSpec& grid, double t0,
                          double tau, const IntegratorConfig& cfg,
                          const ComputeOptions& options = {});

/// FNV-1a over the integrator description; stored in FieldMeta.
std::uint64_t config_hash(const IntegratorConfig& cfg);

}  // namespace lagdesc
