#pragma once

#include <optional>
#include <string>

#include "lagdesc/fields.hpp"

namespace lagdesc {

enum class Method { Rk4Fixed, Rk45Adaptive };

enum class Direction { Forward, Backward };

/// Integrator settings. When `step` is unset the fixed-step method takes
/// 4000 uniform steps over the requested span.
struct IntegratorConfig {
  Method method = Method::Rk4Fixed;
  std::optional<double> step;
  double rtol = 1e-8;
  double atol = 1e-10;
  double escape_radius = 1e12;

  static constexpr int kDefaultStepsPerSpan = 4000;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;

  /// Stable textual form, used for provenance hashing.
  std::string describe() const;
};

struct ArclengthResult {
  double arclength = 0.0;
  bool valid = true;
  Vec2 end;  // last accepted position
};

/// Integrates the augmented system (x', y', s') = (v, |v|) over
/// [t0, t0 + duration]. Backward direction integrates -v(x, t0 - sigma)
/// forward in sigma, which is the same trajectory run back in time.
///
/// The result is invalid when the state leaves `escape_radius` or turns
/// non-finite; `arclength` then holds the length accumulated before the
/// offending step.
ArclengthResult integrate_arclength(const VectorFieldDef& field, Vec2 x0, double t0,
                                    double duration, Direction direction,
                                    const IntegratorConfig& cfg);

struct DescriptorValue {
  double value = 0.0;
  bool valid = true;
};

/// Trajectory arclength over [t0 - tau, t0 + tau] through x0.
DescriptorValue compute_M(const VectorFieldDef& field, Vec2 x0, double t0, double tau,
                          const IntegratorConfig& cfg);

}  // namespace lagdesc
