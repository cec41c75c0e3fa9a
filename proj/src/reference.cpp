#include "lagdesc/reference.hpp"

#include <cmath>
#include <vector>

namespace lagdesc {

Vec2 AnalyticSaddleFlow::position(Vec2 x0, double t) const {
  return {x0.x * std::exp(lambda * t), x0.y * std::exp(-mu * t)};
}

double AnalyticSaddleFlow::speed(Vec2 x0, double t) const {
  const double vx = lambda * x0.x * std::exp(lambda * t);
  const double vy = mu * x0.y * std::exp(-mu * t);
  return std::sqrt(vx * vx + vy * vy);
}

namespace {

constexpr int kMaxDepth = 60;
constexpr int kInitialPanels = 32;

struct Simpson {
  const AnalyticSaddleFlow& flow;
  Vec2 x0;

  double f(double t) const { return flow.speed(x0, t); }

  // Integral over [a, b] given f(a), f(m), f(b) and the whole-panel estimate.
  double adapt(double a, double b, double fa, double fm, double fb, double whole, double eps,
               int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    if (depth >= kMaxDepth) {
      throw QuadratureError("oracle_M: recursion depth cap reached before tolerance");
    }
    return adapt(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
           adapt(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
  }
};

}  // namespace

double oracle_M(const AnalyticSaddleFlow& flow, Vec2 x0, double tau, double quad_tol) {
  if (!(tau >= 0.0)) throw std::invalid_argument("oracle_M: tau must be non-negative");
  if (!(quad_tol > 0.0)) throw std::invalid_argument("oracle_M: quad_tol must be positive");
  if (tau == 0.0) return 0.0;

  const Simpson s{flow, x0};
  const double a = -tau;
  const double width = 2.0 * tau / kInitialPanels;

  // Composite Simpson on the initial panels sizes the error target.
  double rough = 0.0;
  std::vector<double> fa(kInitialPanels + 1), fm(kInitialPanels);
  auto node = [&](int k) { return k == kInitialPanels ? tau : a + k * width; };
  for (int k = 0; k <= kInitialPanels; ++k) fa[k] = s.f(node(k));
  for (int k = 0; k < kInitialPanels; ++k) {
    fm[k] = s.f(0.5 * (node(k) + node(k + 1)));
    rough += (node(k + 1) - node(k)) / 6.0 * (fa[k] + 4.0 * fm[k] + fa[k + 1]);
  }
  if (rough == 0.0) return 0.0;

  const double eps = quad_tol * (1.0 + std::fabs(rough)) / kInitialPanels;
  double total = 0.0;
  for (int k = 0; k < kInitialPanels; ++k) {
    const double lo = node(k);
    const double hi = node(k + 1);
    const double whole = (hi - lo) / 6.0 * (fa[k] + 4.0 * fm[k] + fa[k + 1]);
    total += s.adapt(lo, hi, fa[k], fm[k], fa[k + 1], whole, eps, 0);
  }
  return total;
}

}  // namespace lagdesc
