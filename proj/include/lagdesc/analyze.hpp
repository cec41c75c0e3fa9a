#pragma once

#include <cstddef>
#include <vector>

#include "lagdesc/ldfield.hpp"

namespace lagdesc {

enum class Axis { X, Y };

/// Partial derivative of a ScalarField along one grid axis.
struct DerivativeField {
  ScalarField field;
  Axis axis = Axis::X;
  double spacing = 0.0;
};

/// Central differences at interior nodes, first-order one-sided differences
/// at the two boundary nodes. A node is invalid when any node of its stencil
/// is invalid. Throws std::invalid_argument if the axis has fewer than 3
/// nodes.
DerivativeField partial_derivative(const ScalarField& field, Axis axis);

/// A zero of a derivative along one grid line, located on the edge between
/// node (i, j) and its successor along the scan axis.
struct Crossing {
  std::size_t i = 0;
  std::size_t j = 0;
  double x = 0.0;
  double y = 0.0;
  double jump = 0.0;  // |difference of the bracketing derivative values|
};

/// Sign changes of dM/dx0 along x-lines and of dM/dy0 along y-lines. For the
/// saddles considered here the former trace the stable manifold and the
/// latter the unstable one; for general fields they are only candidates.
struct ManifoldMask {
  GridSpec grid;
  std::vector<Crossing> x_crossings;
  std::vector<Crossing> y_crossings;
};

/// Scans every grid line for strict sign changes between neighbouring valid
/// derivative values. Interior zeros bracketed by opposite signs count as one
/// crossing placed at the zero (the middle of a run of zeros). Crossings whose
/// jump lies below the `min_jump_quantile` quantile of their own set are
/// dropped; 0 keeps everything.
ManifoldMask detect_manifolds(const DerivativeField& dmdx, const DerivativeField& dmdy,
                              double min_jump_quantile = 0.0);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> sample, double q);

}  // namespace lagdesc
