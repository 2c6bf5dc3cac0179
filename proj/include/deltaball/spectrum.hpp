#pragma once
//
// Point spectrum of the one-center Hamiltonian H_alpha (center at the origin
// of the ball of radius R).
//
//   f_alpha(z) = alpha + sqrt(z)/(4 pi) + 2 sqrt(z) / (4 pi (exp(2 sqrt(z) R) - 1))
//
// and E is an s-wave eigenvalue iff f_alpha(-E) = 0. Real reductions:
//
//   E =  t^2 > 0:   F(t) = alpha + t cot(t R) / (4 pi)
//   E = -k^2 < 0:   alpha + k coth(k R) / (4 pi)
//
// t cot(tR) decreases strictly on every interval between consecutive poles
// t = m pi / R, so each interval (m pi/R, (m+1) pi/R), m >= 1, holds exactly
// one root, and (0, pi/R) holds one iff alpha > -1/(4 pi R). The bound state
// exists iff alpha < -1/(4 pi R). Dirichlet levels with n >= 1 vanish at the
// center and stay in the spectrum with multiplicity 2n+1; the s-wave
// Dirichlet levels (k pi/R)^2 are never eigenvalues of H_alpha.
//
// Roots are indexed 1, 2, 3, ... in increasing order.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "deltaball/ball_laplacian.hpp"
#include "deltaball/errors.hpp"
#include "deltaball/specfun.hpp"

namespace deltaball::spectrum {

inline constexpr int kMaxRootCount = 200;
inline constexpr double kResidualTolerance = 1e-10;
inline constexpr double kDisjointTolerance = 1e-9;

enum class PointKind { inherited, s_wave_root, bound_state };

inline const char *to_string(PointKind kind) {
  switch (kind) {
  case PointKind::inherited: return "inherited";
  case PointKind::s_wave_root: return "s_wave_root";
  case PointKind::bound_state: return "bound_state";
  }
  return "unknown";
}

struct SpectralPoint {
  double value = 0.0; // energy E; the matching spectral parameter is z = -E
  PointKind kind = PointKind::s_wave_root;
  int n = -1;     // inherited only
  int k = -1;     // inherited only
  int index = -1; // s-wave roots only
  int multiplicity = 1;
  double residual = 0.0; // |f_alpha(-E)|; 0 for inherited levels
};

enum class Branch { positive, negative, zero_strength };

/// The transcendental equation for one strength and radius.
struct EigenvalueEquation {
  double alpha = 0.0;
  double radius = 1.0;

  Branch branch() const {
    return alpha > 0.0 ? Branch::positive : alpha < 0.0 ? Branch::negative : Branch::zero_strength;
  }
};

/// f_alpha(z) with Re sqrt(z) >= 0.
inline cplx f_alpha(double alpha, double radius, cplx z, double tol = kDefaultTolerance) {
  if (!(radius > 0.0))
    throw std::invalid_argument("f_alpha: radius must be > 0");
  const cplx s = specfun::spectral_sqrt(z);
  const cplx w = 2.0 * s * radius;
  if (std::abs(w) > 1.0 && w.real() < 30.0 && std::abs(std::exp(w) - 1.0) < tol)
    throw NumericalError(ErrorKind::pole, "f_alpha: exp(2 sqrt(z) R) = 1");
  return alpha + s / (4.0 * pi) + specfun::bernoulli_ratio(w) / (4.0 * pi * radius);
}

namespace detail {

// F(t) = alpha + t cot(t R) / (4 pi).
inline double positive_reduction(double alpha, double R, double t) {
  if (t == 0.0)
    return alpha + 1.0 / (4.0 * pi * R);
  return alpha + t * std::cos(t * R) / (4.0 * pi * std::sin(t * R));
}

// dF/dt.
inline double positive_slope(double R, double t) {
  const double sn = std::sin(t * R);
  return (std::cos(t * R) / sn - t * R / (sn * sn)) / (4.0 * pi);
}

// x coth x, with its series near 0.
inline double x_coth_x(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return 1.0 + x2 / 3.0 - x2 * x2 / 45.0;
  }
  return x / std::tanh(x);
}

// The residual a double-precision root t can achieve: rounding t to the
// nearest representable number moves F by about eps t |F'(t)|.
inline double residual_bound(double R, double t) {
  const double slope = t == 0.0 ? 0.0 : std::abs(positive_slope(R, t));
  return kResidualTolerance + 8.0 * std::numeric_limits<double>::epsilon() * t * slope;
}

// The single root of F on (lo, hi), where F(lo+) > 0 > F(hi-).
inline double bisect_root(double alpha, double R, double lo, double hi) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      return std::abs(positive_reduction(alpha, R, lo)) < std::abs(positive_reduction(alpha, R, hi))
                 ? lo
                 : hi;
    if (positive_reduction(alpha, R, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  throw NumericalError(ErrorKind::bracket_failure, "s-wave bisection did not converge");
}

inline void check_alpha_radius(double alpha, double R) {
  if (!std::isfinite(alpha))
    throw std::invalid_argument("alpha must be finite");
  if (!(R > 0.0) || !std::isfinite(R))
    throw std::invalid_argument("radius must be finite and > 0");
}

} // namespace detail

/// eta_j = ((2j-1) pi / (2R))^2, j = 1..count: the s-wave roots at alpha = 0.
inline std::vector<SpectralPoint> zero_strength_roots(double radius, int count) {
  detail::check_alpha_radius(0.0, radius);
  if (count < 0 || count > kMaxRootCount)
    throw NumericalError(ErrorKind::cutoff_exceeded, "root count must be in [0, 200]");
  std::vector<SpectralPoint> out;
  for (int j = 1; j <= count; ++j) {
    const double t = (2.0 * j - 1.0) * pi / (2.0 * radius);
    SpectralPoint p;
    p.value = t * t;
    p.kind = PointKind::s_wave_root;
    p.index = j;
    p.residual = std::abs(f_alpha(0.0, radius, -p.value));
    out.push_back(p);
  }
  return out;
}

/// First `count` non-negative s-wave eigenvalues, certified on f_alpha.
/// E = 0 is included only when alpha = -1/(4 pi R) exactly.
inline std::vector<SpectralPoint> s_wave_roots(double alpha, double radius, int count) {
  detail::check_alpha_radius(alpha, radius);
  if (count < 0 || count > kMaxRootCount)
    throw NumericalError(ErrorKind::cutoff_exceeded, "root count must be in [0, 200]");
  if (alpha == 0.0)
    return zero_strength_roots(radius, count);

  const double R = radius;
  const double threshold = -1.0 / (4.0 * pi * R);
  std::vector<SpectralPoint> out;
  int index = 1;
  if (alpha == threshold && count > 0) {
    SpectralPoint p;
    p.value = 0.0;
    p.index = index++;
    p.residual = std::abs(f_alpha(alpha, R, 0.0));
    out.push_back(p);
  }
  for (int m = alpha > threshold ? 0 : 1; static_cast<int>(out.size()) < count; ++m) {
    const double t = detail::bisect_root(alpha, R, m * pi / R, (m + 1) * pi / R);
    SpectralPoint p;
    p.value = t * t;
    p.kind = PointKind::s_wave_root;
    p.index = index++;
    p.residual = std::abs(f_alpha(alpha, R, -p.value));
    if (!(p.residual <= detail::residual_bound(R, t)))
      throw NumericalError(ErrorKind::internal_consistency,
                           "s-wave root " + std::to_string(p.index) + " failed its residual check");
    out.push_back(p);
  }
  return out;
}

/// The negative eigenvalue -kappa^2, present iff alpha < -1/(4 pi R);
/// kappa solves kappa coth(kappa R) = -4 pi alpha.
inline std::optional<SpectralPoint> bound_state(double alpha, double radius) {
  detail::check_alpha_radius(alpha, radius);
  const double R = radius;
  if (!(alpha < -1.0 / (4.0 * pi * R)))
    return std::nullopt;
  const double c = -4.0 * pi * alpha * R; // target for x coth x, x = kappa R
  // 1 < x coth x < 1 + x, so the root lies in (0, c).
  double lo = 0.0, hi = c;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    (detail::x_coth_x(mid) < c ? lo : hi) = mid;
  }
  const double kappa = 0.5 * (lo + hi) / R;
  SpectralPoint p;
  p.value = -kappa * kappa;
  p.kind = PointKind::bound_state;
  p.residual = std::abs(f_alpha(alpha, R, kappa * kappa));
  return p;
}

/// kappa of the bound state, sqrt(-E).
inline double bound_state_kappa(const SpectralPoint &p) { return std::sqrt(-p.value); }

/// All eigenvalues E <= energy_cutoff of H_alpha, sorted, with inherited
/// levels n >= 1 carrying multiplicity 2n+1.
inline std::vector<SpectralPoint> full_spectrum(double alpha, double radius, double energy_cutoff) {
  detail::check_alpha_radius(alpha, radius);
  if (!(energy_cutoff > 0.0) || !std::isfinite(energy_cutoff))
    throw std::invalid_argument("full_spectrum: energy cutoff must be finite and > 0");
  const double R = radius;
  const double t_max = std::sqrt(energy_cutoff) * R; // largest admissible zero x_{n,k}
  std::vector<SpectralPoint> out;

  if (auto b = bound_state(alpha, R))
    out.push_back(*b);

  // s-wave roots: at most one per pole interval, so m pi < t_max + pi bounds the count.
  const int s_count = static_cast<int>(std::floor(t_max / pi)) + 2;
  if (s_count > kMaxRootCount)
    throw NumericalError(ErrorKind::cutoff_exceeded, "energy cutoff needs more than 200 s-wave roots");
  std::vector<SpectralPoint> roots = s_wave_roots(alpha, R, s_count);
  std::vector<double> swave_levels;
  for (int k = 1; k * pi <= t_max + pi; ++k)
    swave_levels.push_back((k * pi / R) * (k * pi / R));
  for (const auto &p : roots) {
    if (p.value > energy_cutoff)
      break;
    for (double lam : swave_levels)
      if (std::abs(p.value - lam) <= kDisjointTolerance * std::max(1.0, lam))
        throw NumericalError(ErrorKind::internal_consistency,
                             "s-wave root coincides with a Dirichlet s-wave level");
    out.push_back(p);
  }

  // Inherited levels: x_{n,1} > n + 1/2, so orders beyond t_max contribute nothing.
  const int n_top = static_cast<int>(std::floor(t_max));
  if (n_top > specfun::kMaxOrder && specfun::bessel_zero(specfun::kMaxOrder, 1) <= t_max)
    throw NumericalError(ErrorKind::cutoff_exceeded, "energy cutoff needs orders above 60");
  const std::size_t s_end = out.size();
  for (int n = 1; n <= std::min(n_top, specfun::kMaxOrder); ++n) {
    const int k_est = static_cast<int>(t_max / pi) + 2;
    if (k_est > specfun::kMaxZeroIndex)
      throw NumericalError(ErrorKind::cutoff_exceeded, "energy cutoff needs zero index above 500");
    const auto zeros = specfun::bessel_zeros(n, k_est);
    for (int k = 1; k <= k_est && zeros[k - 1] <= t_max; ++k) {
      SpectralPoint p;
      p.value = (zeros[k - 1] / R) * (zeros[k - 1] / R);
      p.kind = PointKind::inherited;
      p.n = n;
      p.k = k;
      p.multiplicity = 2 * n + 1;
      out.push_back(p);
    }
  }
  for (std::size_t i = 0; i < s_end; ++i)
    for (std::size_t j = s_end; j < out.size(); ++j)
      if (std::abs(out[i].value - out[j].value) <= kDisjointTolerance * std::max(1.0, out[j].value))
        throw NumericalError(ErrorKind::internal_consistency,
                             "s-wave root coincides with inherited level (" +
                                 std::to_string(out[j].n) + "," + std::to_string(out[j].k) + ")");

  std::stable_sort(out.begin(), out.end(), [](const SpectralPoint &a, const SpectralPoint &b) {
    if (a.value != b.value)
      return a.value < b.value;
    return a.n < b.n;
  });
  return out;
}

} // namespace deltaball::spectrum
