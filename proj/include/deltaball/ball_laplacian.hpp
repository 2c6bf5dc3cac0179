#pragma once
//
// Dirichlet eigenpairs of -Laplacian in the ball |x| < R and the free
// resolvent (-Laplacian + z)^{-1} acting on mode coefficients.
//
// Modes:  psi_{n,m,k}(r, theta, phi) = N_{nk} j_n(x_{nk} r / R) Y_{nm}(theta, phi)
// with x_{nk} the k-th zero of j_n, lambda_{nk} = (x_{nk}/R)^2 and
// orthonormal complex spherical harmonics carrying the Condon-Shortley phase.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "deltaball/errors.hpp"
#include "deltaball/specfun.hpp"

namespace deltaball {

using Point3 = Eigen::Vector3d;

/// Coefficients over a ModeCatalog, aligned with ModeCatalog::modes().
using ModeCoefficients = std::vector<cplx>;

inline constexpr double kDefaultTolerance = 1e-10;

struct BallDomain {
  double radius = 1.0;
  int n_max = 8;  // angular cutoff (inclusive)
  int k_max = 60; // radial cutoff (inclusive)
  double tol = kDefaultTolerance;

  void validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("BallDomain: radius must be finite and > 0");
    if (n_max < 0 || k_max < 1)
      throw std::invalid_argument("BallDomain: mode cutoff must be >= (0,1)");
    if (n_max > specfun::kMaxOrder || k_max > specfun::kMaxZeroIndex)
      throw NumericalError(ErrorKind::cutoff_exceeded,
                           "mode cutoff beyond (60, 500)");
    if (!(tol > 0.0))
      throw std::invalid_argument("BallDomain: tolerance must be > 0");
  }
};

struct ModeIndex {
  int n = 0;
  int m = 0;
  int k = 1;

  friend bool operator==(const ModeIndex &, const ModeIndex &) = default;
};

struct DirichletMode {
  ModeIndex index;
  double eigenvalue = 0.0; // lambda_{nk}
  double zero = 0.0;       // x_{nk}
  double norm_const = 0.0; // radial normalization N_{nk}

  int degeneracy() const { return 2 * index.n + 1; }
};

/// One radial level (n, k) of the catalog, shared by its 2n+1 modes.
struct RadialLevel {
  int n;
  int k;
  double eigenvalue;
  double zero;
  double norm_const;
};

/// Orthonormal associated Legendre values  Ybar_{n}^{m}(x), 0 <= m <= n <= nmax,
/// such that Y_{nm}(theta, phi) = Ybar_n^m(cos theta) exp(i m phi).
/// Stored row-major as table[n*(nmax+1) + m].
inline std::vector<double> normalized_legendre_table(int nmax, double x) {
  const int w = nmax + 1;
  std::vector<double> t(static_cast<size_t>(w) * w, 0.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = std::sqrt(1.0 / (4.0 * pi));
  for (int m = 0; m <= nmax; ++m) {
    if (m > 0)
      pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    t[m * w + m] = pmm;
    if (m + 1 <= nmax)
      t[(m + 1) * w + m] = std::sqrt(2.0 * m + 3.0) * x * pmm;
    for (int l = m + 2; l <= nmax; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) /
                                 (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      t[l * w + m] = a * (x * t[(l - 1) * w + m] - b * t[(l - 2) * w + m]);
    }
  }
  return t;
}

/// Y_{nm}(theta, phi), orthonormal on the sphere, Condon-Shortley phase.
inline cplx spherical_harmonic(int n, int m, double theta, double phi) {
  if (n < 0 || std::abs(m) > n)
    throw std::invalid_argument("spherical_harmonic: need |m| <= n");
  const int am = std::abs(m);
  const auto t = normalized_legendre_table(n, std::cos(theta));
  const cplx y = t[n * (n + 1) + am] * std::polar(1.0, am * phi);
  if (m >= 0)
    return y;
  return (am % 2 ? -1.0 : 1.0) * std::conj(y);
}

/// Closed-form s-wave mode psi_{0,0,k}(r) = sin(k pi r/R) / (r sqrt(2 pi R)),
/// valid for any k >= 1 (not limited by the catalog cutoff).
inline double s_wave_mode_value(double radius, int k, double r) {
  const double kr = k * pi / radius;
  const double norm = 1.0 / std::sqrt(2.0 * pi * radius);
  if (r == 0.0)
    return kr * norm;
  return std::sin(kr * r) / r * norm;
}

/// Eagerly built, immutable catalog of Dirichlet modes with n <= n_max and
/// k <= k_max. Modes are ordered by n, then k, then m.
class ModeCatalog {
public:
  explicit ModeCatalog(BallDomain domain) : domain_(domain) {
    domain_.validate();
    const double R = domain_.radius;
    const double norm_scale = std::sqrt(2.0 / (R * R * R));
    for (int n = 0; n <= domain_.n_max; ++n) {
      const auto zeros = specfun::bessel_zeros(n, domain_.k_max);
      for (int k = 1; k <= domain_.k_max; ++k) {
        const double x = zeros[k - 1];
        // At a zero of j_n, |j_{n+1}| = |j_{n-1}|; j_1(k pi) = -cos(k pi)/(k pi).
        const double jn1 = n == 0 ? 1.0 / x
                                  : std::abs(specfun::spherical_bessel_j(n - 1, x));
        const RadialLevel level{n, k, (x / R) * (x / R), x, norm_scale / jn1};
        levels_.push_back(level);
        for (int m = -n; m <= n; ++m)
          modes_.push_back({{n, m, k}, level.eigenvalue, x, level.norm_const});
      }
    }
  }

  const BallDomain &domain() const { return domain_; }
  double radius() const { return domain_.radius; }
  std::size_t size() const { return modes_.size(); }
  std::span<const DirichletMode> modes() const { return modes_; }
  const DirichletMode &mode(std::size_t i) const { return modes_.at(i); }

  /// Radial levels ordered by (n, k).
  std::span<const RadialLevel> levels() const { return levels_; }

  /// Radial levels sorted by eigenvalue (ties by n).
  std::vector<RadialLevel> sorted_levels() const {
    auto out = levels_;
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
      return a.eigenvalue < b.eigenvalue;
    });
    return out;
  }

  const RadialLevel &level(int n, int k) const {
    check_cutoff(n, k);
    return levels_[static_cast<std::size_t>(n) * domain_.k_max + (k - 1)];
  }

  std::size_t index_of(const ModeIndex &idx) const {
    check_cutoff(idx.n, idx.k);
    if (std::abs(idx.m) > idx.n)
      throw std::invalid_argument("ModeIndex: |m| > n");
    const std::size_t base = static_cast<std::size_t>(idx.n) * idx.n * domain_.k_max;
    return base + static_cast<std::size_t>(idx.k - 1) * (2 * idx.n + 1) + (idx.m + idx.n);
  }

  ModeCoefficients zero_coefficients() const { return ModeCoefficients(size(), cplx{}); }

  /// Radial factor N_{nk} j_n(sqrt(lambda) r).
  double radial_value(int n, int k, double r) const {
    const auto &lv = level(n, k);
    return lv.norm_const * specfun::spherical_bessel_j(n, lv.zero * r / domain_.radius);
  }

  /// psi_{nmk}(point).
  cplx mode_eval(const DirichletMode &mode, const Point3 &point) const {
    const double r = check_point(point);
    const auto &idx = mode.index;
    const double radial =
        mode.norm_const * specfun::spherical_bessel_j(idx.n, mode.zero * r / domain_.radius);
    if (radial == 0.0)
      return {0.0, 0.0};
    const double theta = r > 0.0 ? std::acos(std::clamp(point.z() / r, -1.0, 1.0)) : 0.0;
    const double phi = std::atan2(point.y(), point.x());
    return radial * spherical_harmonic(idx.n, idx.m, theta, phi);
  }

  /// All mode values at one point, aligned with modes().
  ModeCoefficients values_at(const Point3 &point) const {
    const double r = check_point(point);
    const int nmax = domain_.n_max, kmax = domain_.k_max;
    const double ct = r > 0.0 ? std::clamp(point.z() / r, -1.0, 1.0) : 1.0;
    const double phi = std::atan2(point.y(), point.x());
    const auto ybar = normalized_legendre_table(nmax, ct);
    ModeCoefficients out(size());
    std::size_t pos = 0;
    for (int n = 0; n <= nmax; ++n) {
      for (int k = 1; k <= kmax; ++k) {
        const auto &lv = levels_[static_cast<std::size_t>(n) * kmax + (k - 1)];
        const double radial =
            lv.norm_const * specfun::spherical_bessel_j(n, lv.zero * r / domain_.radius);
        for (int m = -n; m <= n; ++m) {
          const int am = std::abs(m);
          cplx y = ybar[n * (nmax + 1) + am] * std::polar(1.0, am * phi);
          if (m < 0)
            y = (am % 2 ? -1.0 : 1.0) * std::conj(y);
          out[pos++] = radial * y;
        }
      }
    }
    return out;
  }

  /// Smallest |lambda + z| over the catalog.
  double spectral_distance(cplx z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &lv : levels_)
      best = std::min(best, std::abs(lv.eigenvalue + z));
    return best;
  }

  /// Throws spectral-collision when -z sits on a cataloged eigenvalue.
  void check_resolvent_set(cplx z) const {
    for (const auto &lv : levels_) {
      if (std::abs(lv.eigenvalue + z) <= domain_.tol * std::max(1.0, lv.eigenvalue))
        throw NumericalError(ErrorKind::spectral_collision,
                             "-z hits lambda_{" + std::to_string(lv.n) + "," +
                                 std::to_string(lv.k) + "}");
    }
  }

private:
  void check_cutoff(int n, int k) const {
    if (n < 0 || k < 1)
      throw std::invalid_argument("mode index out of range");
    if (n > domain_.n_max || k > domain_.k_max)
      throw NumericalError(ErrorKind::cutoff_exceeded,
                           "(n,k) = (" + std::to_string(n) + "," + std::to_string(k) +
                               ") beyond catalog cutoff");
  }

  double check_point(const Point3 &p) const {
    const double r = p.norm();
    if (!(r <= domain_.radius * (1.0 + 1e-12)))
      throw NumericalError(ErrorKind::point_outside_domain,
                           "|x| = " + std::to_string(r) + " > R");
    return std::min(r, domain_.radius);
  }

  BallDomain domain_;
  std::vector<RadialLevel> levels_;
  std::vector<DirichletMode> modes_;
};

/// lambda_{nk} = (x_{nk}/R)^2, honoring the domain cutoff.
inline double dirichlet_eigenvalue(const BallDomain &domain, int n, int k) {
  domain.validate();
  if (n < 0 || k < 1)
    throw std::invalid_argument("dirichlet_eigenvalue: need n >= 0, k >= 1");
  if (n > domain.n_max || k > domain.k_max)
    throw NumericalError(ErrorKind::cutoff_exceeded, "(n,k) beyond domain cutoff");
  const double x = specfun::bessel_zero(n, k);
  return (x / domain.radius) * (x / domain.radius);
}

/// c_{nmk} -> c_{nmk} / (lambda_{nk} + z).
inline ModeCoefficients free_resolvent_apply(const ModeCatalog &catalog, cplx z,
                                             std::span<const cplx> coeffs) {
  if (coeffs.size() != catalog.size())
    throw std::invalid_argument("free_resolvent_apply: coefficient size mismatch");
  catalog.check_resolvent_set(z);
  ModeCoefficients out(coeffs.size());
  const auto modes = catalog.modes();
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    out[i] = coeffs[i] / (modes[i].eigenvalue + z);
  return out;
}

/// sum_i conj(a_i) b_i
inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("inner: size mismatch");
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::conj(a[i]) * b[i];
  return s;
}

/// Sum_i c_i psi_i(x) for precomputed mode values at x.
inline cplx evaluate_series(std::span<const cplx> coeffs, std::span<const cplx> values) {
  cplx s{};
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    s += coeffs[i] * values[i];
  return s;
}

} // namespace deltaball
