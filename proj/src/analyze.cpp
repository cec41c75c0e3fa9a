#include "lagdesc/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lagdesc {

DerivativeField partial_derivative(const ScalarField& field, Axis axis) {
  const GridSpec& g = field.grid;
  const std::size_t n = axis == Axis::X ? g.nx : g.ny;
  if (n < 3) throw std::invalid_argument("partial_derivative: need at least 3 nodes on the axis");
  const double h = axis == Axis::X ? g.hx() : g.hy();

  DerivativeField out{ScalarField(g), axis, h};
  out.field.meta = field.meta;

  const std::size_t lines = axis == Axis::X ? g.ny : g.nx;
  for (std::size_t line = 0; line < lines; ++line) {
    auto idx = [&](std::size_t k) {
      return axis == Axis::X ? g.index(k, line) : g.index(line, k);
    };
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t lo = k == 0 ? 0 : k - 1;
      std::size_t hi = k == n - 1 ? k : k + 1;
      const double span = static_cast<double>(hi - lo) * h;
      const std::size_t a = idx(lo);
      const std::size_t b = idx(hi);
      const std::size_t dst = idx(k);
      const bool ok = field.valid[a] && field.valid[b];
      out.field.valid[dst] = ok ? 1 : 0;
      out.field.values[dst] = ok ? (field.values[b] - field.values[a]) / span : 0.0;
    }
  }
  return out;
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Scans one grid line. `coord(k)` maps a node index along the line to its
// coordinate on the scan axis; `emit(k, pos, jump)` receives the edge start
// index, the crossing coordinate and the jump.
template <class Index, class Coord, class Emit>
void scan_line(const ScalarField& f, std::size_t n, Index index, Coord coord, Emit emit) {
  bool have_prev = false;
  std::size_t prev = 0;
  bool in_zero_run = false;
  std::size_t zero_first = 0;
  std::size_t zero_last = 0;

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t id = index(k);
    if (!f.valid[id]) {
      have_prev = false;
      in_zero_run = false;
      continue;
    }
    const double v = f.values[id];
    if (v == 0.0) {
      if (!in_zero_run) zero_first = k;
      zero_last = k;
      in_zero_run = true;
      continue;
    }
    if (have_prev) {
      const double pv = f.values[index(prev)];
      if (sign_of(pv) != sign_of(v)) {
        const double jump = std::fabs(v - pv);
        if (in_zero_run) {
          const std::size_t mid = (zero_first + zero_last) / 2;
          const double pos = 0.5 * (coord(zero_first) + coord(zero_last));
          emit(mid, pos, jump);
        } else {
          const double a = coord(prev);
          const double b = coord(k);
          double pos = a + (b - a) * (pv / (pv - v));
          pos = std::clamp(pos, std::min(a, b), std::max(a, b));
          emit(prev, pos, jump);
        }
      }
    }
    have_prev = true;
    prev = k;
    in_zero_run = false;
  }
}

void filter_by_quantile(std::vector<Crossing>& crossings, double q) {
  if (q <= 0.0 || crossings.empty()) return;
  std::vector<double> jumps;
  jumps.reserve(crossings.size());
  for (const auto& c : crossings) jumps.push_back(c.jump);
  const double threshold = quantile(std::move(jumps), q);
  std::erase_if(crossings, [threshold](const Crossing& c) { return c.jump < threshold; });
}

}  // namespace

ManifoldMask detect_manifolds(const DerivativeField& dmdx, const DerivativeField& dmdy,
                              double min_jump_quantile) {
  if (!(dmdx.field.grid == dmdy.field.grid)) {
    throw std::invalid_argument("detect_manifolds: derivative fields use different grids");
  }
  if (!(min_jump_quantile >= 0.0 && min_jump_quantile < 1.0)) {
    throw std::invalid_argument("detect_manifolds: quantile must lie in [0, 1)");
  }
  const GridSpec& g = dmdx.field.grid;
  ManifoldMask mask{g, {}, {}};

  for (std::size_t j = 0; j < g.ny; ++j) {
    const double y = g.y(j);
    scan_line(
        dmdx.field, g.nx, [&](std::size_t k) { return g.index(k, j); },
        [&](std::size_t k) { return g.x(k); },
        [&](std::size_t k, double pos, double jump) {
          mask.x_crossings.push_back({k, j, pos, y, jump});
        });
  }
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    scan_line(
        dmdy.field, g.ny, [&](std::size_t k) { return g.index(i, k); },
        [&](std::size_t k) { return g.y(k); },
        [&](std::size_t k, double pos, double jump) {
          mask.y_crossings.push_back({i, k, x, pos, jump});
        });
  }

  filter_by_quantile(mask.x_crossings, min_jump_quantile);
  filter_by_quantile(mask.y_crossings, min_jump_quantile);
  return mask;
}

}  // namespace lagdesc
