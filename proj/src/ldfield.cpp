#include "lagdesc/ldfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace lagdesc {

void GridSpec::validate() const {
  if (!(xmin < xmax) || !std::isfinite(xmin) || !std::isfinite(xmax)) {
    throw std::invalid_argument("grid: require finite xmin < xmax");
  }
  if (!(ymin < ymax) || !std::isfinite(ymin) || !std::isfinite(ymax)) {
    throw std::invalid_argument("grid: require finite ymin < ymax");
  }
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid: need at least 2 nodes per axis");
}

std::size_t ScalarField::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

std::uint64_t config_hash(const IntegratorConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : cfg.describe()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ScalarField compute_field(const VectorFieldDef& field, const GridSpec& grid, double t0,
                          double tau, const IntegratorConfig& cfg,
                          const ComputeOptions& options) {
  grid.validate();
  cfg.validate();
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");

  ScalarField out(grid);
  out.meta = {field.name(), t0, tau, config_hash(cfg)};

  // Work is handed out one row at a time; each node writes only its own slot.
  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    for (std::size_t j = next_row++; j < grid.ny; j = next_row++) {
      const double y = grid.y(j);
      for (std::size_t i = 0; i < grid.nx; ++i) {
        const DescriptorValue m = compute_M(field, {grid.x(i), y}, t0, tau, cfg);
        const std::size_t k = grid.index(i, j);
        out.values[k] = m.value;
        out.valid[k] = (m.valid && std::isfinite(m.value)) ? 1 : 0;
      }
    }
  };

  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(grid.ny));
  if (workers == 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  return out;
}

}  // namespace lagdesc
