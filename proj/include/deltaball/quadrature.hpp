#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace deltaball::quadrature {

struct GaussLegendreRule {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n from the Chebyshev
/// initial guesses).
inline GaussLegendreRule gauss_legendre(int n) {
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 1; k < n; ++k) {
      const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Cached rule; safe to call concurrently.
inline const GaussLegendreRule &cached_rule(int n) {
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

/// Fixed composite rule: `panels` equal sub-intervals of [a, b], `order`
/// nodes each.
template <class F>
auto integrate_composite(F &&f, double a, double b, int panels, int order = 32) {
  const auto &rule = cached_rule(order);
  const double h = (b - a) / panels;
  using R = decltype(f(a));
  R sum{};
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    R part{};
    for (int i = 0; i < order; ++i)
      part += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    sum += 0.5 * h * part;
  }
  return sum;
}

namespace detail {
template <class F>
double adaptive(F &f, double a, double b, double whole, double tol, int depth,
                int order) {
  const double mid = 0.5 * (a + b);
  const double left = integrate_composite(f, a, mid, 1, order);
  const double right = integrate_composite(f, mid, b, 1, order);
  if (depth <= 0 || std::abs(left + right - whole) <= tol)
    return left + right;
  return adaptive(f, a, mid, left, 0.5 * tol, depth - 1, order) +
         adaptive(f, mid, b, right, 0.5 * tol, depth - 1, order);
}
} // namespace detail

/// Adaptive Gauss-Legendre on [a, b] with absolute tolerance `tol`.
template <class F>
double integrate_adaptive(F &&f, double a, double b, double tol = 1e-13,
                          int order = 20, int max_depth = 30) {
  const double whole = integrate_composite(f, a, b, 1, order);
  return detail::adaptive(f, a, b, whole, tol, max_depth, order);
}

} // namespace deltaball::quadrature
