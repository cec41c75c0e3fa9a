#include "lagdesc/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace lagdesc {

namespace {

struct State {
  double x, y, s;
};

State axpy(const State& z, double h, const State& k) {
  return {z.x + h * k.x, z.y + h * k.y, z.s + h * k.s};
}

// Right-hand side of the augmented system in the integration variable sigma.
class AugmentedRhs {
 public:
  AugmentedRhs(const VectorFieldDef& field, double t0, Direction dir)
      : field_(field), t0_(t0), sign_(dir == Direction::Forward ? 1.0 : -1.0) {}

  State operator()(const State& z, double sigma) const {
    const Vec2 v = field_(z.x, z.y, t0_ + sign_ * sigma);
    return {sign_ * v.x, sign_ * v.y, std::sqrt(v.x * v.x + v.y * v.y)};
  }

 private:
  const VectorFieldDef& field_;
  double t0_;
  double sign_;
};

bool escaped(const State& z, double radius) {
  if (!std::isfinite(z.x) || !std::isfinite(z.y) || !std::isfinite(z.s)) return true;
  return z.x * z.x + z.y * z.y > radius * radius;
}

ArclengthResult run_rk4(const AugmentedRhs& rhs, State z, double duration,
                        const IntegratorConfig& cfg) {
  const double nominal =
      cfg.step ? *cfg.step : duration / IntegratorConfig::kDefaultStepsPerSpan;
  const auto n = static_cast<std::int64_t>(std::max(1.0, std::ceil(duration / nominal - 1e-9)));
  const double h = duration / static_cast<double>(n);

  for (std::int64_t i = 0; i < n; ++i) {
    const double sigma = static_cast<double>(i) * h;
    const State k1 = rhs(z, sigma);
    const State k2 = rhs(axpy(z, 0.5 * h, k1), sigma + 0.5 * h);
    const State k3 = rhs(axpy(z, 0.5 * h, k2), sigma + 0.5 * h);
    const State k4 = rhs(axpy(z, h, k3), sigma + h);
    const State next{
        z.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        z.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
        z.s + h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
    };
    if (escaped(next, cfg.escape_radius)) return {z.s, false, {z.x, z.y}};
    z = next;
  }
  return {z.s, true, {z.x, z.y}};
}

// Dormand-Prince 5(4) tableau.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b*, the embedded fourth-order error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

State combine(const State& z, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State acc{0.0, 0.0, 0.0};
  for (const auto& [w, k] : terms) {
    acc.x += w * k->x;
    acc.y += w * k->y;
    acc.s += w * k->s;
  }
  return {z.x + h * acc.x, z.y + h * acc.y, z.s + h * acc.s};
}

ArclengthResult run_rk45(const AugmentedRhs& rhs, State z, double duration,
                         const IntegratorConfig& cfg) {
  constexpr std::int64_t kMaxSteps = 10'000'000;
  double h = cfg.step ? *cfg.step : std::min(duration, 1e-2);
  double sigma = 0.0;
  State k1 = rhs(z, sigma);

  for (std::int64_t steps = 0; sigma < duration; ++steps) {
    if (steps >= kMaxSteps) return {z.s, false, {z.x, z.y}};
    bool last = false;
    if (sigma + h >= duration) {
      h = duration - sigma;
      last = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::fabs(sigma))) return {z.s, false, {z.x, z.y}};

    using namespace dp;
    const State k2 = rhs(combine(z, h, {{a21, &k1}}), sigma + c2 * h);
    const State k3 = rhs(combine(z, h, {{a31, &k1}, {a32, &k2}}), sigma + c3 * h);
    const State k4 = rhs(combine(z, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), sigma + c4 * h);
    const State k5 =
        rhs(combine(z, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), sigma + c5 * h);
    const State k6 = rhs(
        combine(z, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), sigma + h);
    const State next =
        combine(z, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = rhs(next, sigma + h);
    const State err =
        combine(State{0.0, 0.0, 0.0}, h,
                {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});

    auto scaled = [&](double e, double a, double b) {
      return e / (cfg.atol + cfg.rtol * std::max(std::fabs(a), std::fabs(b)));
    };
    const double ex = scaled(err.x, z.x, next.x);
    const double ey = scaled(err.y, z.y, next.y);
    const double es = scaled(err.s, z.s, next.s);
    const double norm = std::sqrt((ex * ex + ey * ey + es * es) / 3.0);

    if (!std::isfinite(norm)) {
      if (escaped(next, cfg.escape_radius) && h <= 1e-10) return {z.s, false, {z.x, z.y}};
      h *= 0.2;
      continue;
    }
    if (norm <= 1.0) {
      if (escaped(next, cfg.escape_radius)) return {z.s, false, {z.x, z.y}};
      z = next;
      k1 = k7;
      sigma = last ? duration : sigma + h;
    }
    const double factor =
        norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, norm <= 1.0 ? 5.0 : 1.0);
    h *= factor;
  }
  return {z.s, true, {z.x, z.y}};
}

}  // namespace

void IntegratorConfig::validate() const {
  if (step && !(*step > 0.0 && std::isfinite(*step))) {
    throw std::invalid_argument("integrator step must be positive");
  }
  if (!(rtol > 0.0 && rtol < 1.0)) throw std::invalid_argument("rtol must lie in (0, 1)");
  if (!(atol > 0.0 && atol < 1.0)) throw std::invalid_argument("atol must lie in (0, 1)");
  if (!(escape_radius > 0.0)) throw std::invalid_argument("escape radius must be positive");
}

std::string IntegratorConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << (method == Method::Rk4Fixed ? "rk4" : "rk45") << ";step=";
  if (step) {
    os << *step;
  } else {
    os << "span/" << kDefaultStepsPerSpan;
  }
  os << ";rtol=" << rtol << ";atol=" << atol << ";escape=" << escape_radius;
  return os.str();
}

ArclengthResult integrate_arclength(const VectorFieldDef& field, Vec2 x0, double t0,
                                    double duration, Direction direction,
                                    const IntegratorConfig& cfg) {
  if (!(duration >= 0.0)) throw std::invalid_argument("integration span must be non-negative");
  const State start{x0.x, x0.y, 0.0};
  if (escaped(start, cfg.escape_radius)) return {0.0, false, x0};
  if (duration == 0.0) return {0.0, true, x0};

  const AugmentedRhs rhs(field, t0, direction);
  return cfg.method == Method::Rk4Fixed ? run_rk4(rhs, start, duration, cfg)
                                        : run_rk45(rhs, start, duration, cfg);
}

DescriptorValue compute_M(const VectorFieldDef& field, Vec2 x0, double t0, double tau,
                          const IntegratorConfig& cfg) {
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
  const ArclengthResult fwd = integrate_arclength(field, x0, t0, tau, Direction::Forward, cfg);
  const ArclengthResult bwd = integrate_arclength(field, x0, t0, tau, Direction::Backward, cfg);
  return {fwd.arclength + bwd.arclength, fwd.valid && bwd.valid};
}

}  // namespace lagdesc
