#pragma once
//
// Special functions and root-bracketing primitives: spherical Bessel
// functions j_n and their zeros, modified spherical Bessel functions i_n and
// k_n (real and scaled complex forms), and Legendre polynomials.
//
// Normalization of the modified functions:
//   i_0(x) = sinh(x)/x,  k_0(x) = exp(-x)/x
// i.e. k_n here is 2/pi times the common "sqrt(pi/2x) K_{n+1/2}" convention.
// Both obey  f_{n-1} - f_{n+1} = (2n+1)/x f_n  (i_n)  and
//            f_{n+1} - f_{n-1} = (2n+1)/x f_n  (k_n),
// and the Wronskian reads i_n k_{n+1} + i_{n+1} k_n = 1/x^2.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "deltaball/errors.hpp"

namespace deltaball {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

namespace specfun {

inline constexpr int kMaxOrder = 60;
inline constexpr int kMaxZeroIndex = 500;
inline constexpr double kOverflowArgument = 700.0;

/// Callable real -> real with a stated interval of validity. Evaluation
/// outside [lo, hi] yields NaN.
struct RealFunction1D {
  std::function<double(double)> fn;
  double lo = 0.0;
  double hi = 0.0;

  double operator()(double x) const {
    if (!(x >= lo && x <= hi))
      return std::numeric_limits<double>::quiet_NaN();
    return fn(x);
  }
};

/// Square root with Re >= 0. On the negative real axis (either sign of zero
/// imaginary part) the root is +i sqrt(|z|).
inline cplx spectral_sqrt(cplx z) {
  if (z.imag() == 0.0 && z.real() < 0.0)
    return {0.0, std::sqrt(-z.real())};
  return std::sqrt(z);
}

/// sinh(z)/z, continuous at the origin.
inline cplx shc(cplx z) {
  if (std::abs(z) < 1e-3) {
    const cplx z2 = z * z;
    return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
  }
  return std::sinh(z) / z;
}

/// w / (exp(w) - 1), continuous at the origin and evaluated without
/// overflow for large Re w.
inline cplx bernoulli_ratio(cplx w) {
  if (std::abs(w) < 1e-2) {
    const cplx w2 = w * w;
    return 1.0 - w / 2.0 + w2 / 12.0 - w2 * w2 / 720.0;
  }
  if (w.real() > 0.0) {
    const cplx e = std::exp(-w);
    return w * e / (1.0 - e);
  }
  return w / (std::exp(w) - 1.0);
}

namespace detail {

inline void check_order(int n) {
  if (n < 0)
    throw std::invalid_argument("spherical Bessel order must be >= 0");
  if (n > kMaxOrder)
    throw NumericalError(ErrorKind::unsupported_order,
                         "order " + std::to_string(n) + " exceeds cap " +
                             std::to_string(kMaxOrder));
}

// Power series  j_n(x) = x^n/(2n+1)!! * sum_m (-x^2/2)^m / (m! prod_{i<=m}(2n+2i+1)).
inline double sph_j_series(int n, double x) {
  double lead = 1.0;
  for (int i = 1; i <= n; ++i)
    lead *= x / (2.0 * i + 1.0);
  const double t = -0.5 * x * x;
  double term = 1.0, sum = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= t / (m * (2.0 * n + 2.0 * m + 1.0));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum))
      break;
  }
  return lead * sum;
}

} // namespace detail

/// j_0 .. j_nmax at x >= 0.
inline std::vector<double> spherical_bessel_j_sequence(int nmax, double x) {
  detail::check_order(nmax);
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::invalid_argument("spherical_bessel_j: x must be finite and >= 0");
  std::vector<double> out(nmax + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (x < 1.0) {
    for (int n = 0; n <= nmax; ++n)
      out[n] = detail::sph_j_series(n, x);
    return out;
  }
  const double s = std::sin(x), c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;

  // Upward recurrence is stable while n < x; the remaining orders come from
  // a Miller downward sweep normalized on j0 or j1.
  const int n_up = std::min(nmax, static_cast<int>(x));
  out[0] = j0;
  if (nmax >= 1)
    out[1] = j1;
  for (int n = 1; n < n_up; ++n)
    out[n + 1] = (2.0 * n + 1.0) / x * out[n] - out[n - 1];
  if (n_up >= nmax)
    return out;

  const int start = nmax + static_cast<int>(std::sqrt(40.0 * (nmax + x))) + 20;
  std::vector<double> f(start + 2, 0.0);
  f[start] = 1e-30;
  for (int k = start; k >= 1; --k) {
    f[k - 1] = (2.0 * k + 1.0) / x * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > 1e250) {
      for (int i = k - 1; i <= start; ++i)
        f[i] *= 1e-250;
    }
  }
  const double scale =
      std::abs(j0) >= std::abs(j1) ? j0 / f[0] : j1 / f[1];
  for (int n = n_up + 1; n <= nmax; ++n)
    out[n] = f[n] * scale;
  return out;
}

/// Spherical Bessel function of the first kind, j_0(x) = sin(x)/x.
inline double spherical_bessel_j(int n, double x) {
  detail::check_order(n);
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::invalid_argument("spherical_bessel_j: x must be finite and >= 0");
  if (x == 0.0)
    return n == 0 ? 1.0 : 0.0;
  if (x < 1.0)
    return detail::sph_j_series(n, x);
  return spherical_bessel_j_sequence(n, x)[n];
}

/// First `count` positive zeros of j_n, increasing.
///
/// The first zero of J_{n+1/2} exceeds n+1/2 and consecutive zeros are at
/// least pi apart, so a sign scan from n+1/2 with step pi/4 sees every zero
/// exactly once. Each bracket is then bisected to machine resolution.
inline std::vector<double> bessel_zeros(int n, int count) {
  detail::check_order(n);
  if (count < 0)
    throw std::invalid_argument("bessel_zeros: count must be >= 0");
  if (count > kMaxZeroIndex)
    throw NumericalError(ErrorKind::cutoff_exceeded,
                         "zero index " + std::to_string(count) +
                             " exceeds cap " + std::to_string(kMaxZeroIndex));
  std::vector<double> zeros;
  zeros.reserve(count);
  if (n == 0) {
    for (int k = 1; k <= count; ++k)
      zeros.push_back(k * pi);
    return zeros;
  }
  const double step = pi / 4.0;
  double a = n + 0.5;
  double fa = spherical_bessel_j(n, a);
  const int max_steps = 8 * (count + n + 4);
  for (int s = 0; s < max_steps && static_cast<int>(zeros.size()) < count;
       ++s) {
    const double b = a + step;
    const double fb = spherical_bessel_j(n, b);
    if (fb == 0.0 || (fa > 0.0) != (fb > 0.0)) {
      double lo = a, hi = b, flo = fa;
      int iter = 0;
      for (; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
          break;
        const double fm = spherical_bessel_j(n, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      if (iter == 200)
        throw NumericalError(ErrorKind::bracket_failure,
                             "bisection did not converge for j_" +
                                 std::to_string(n));
      zeros.push_back(0.5 * (lo + hi));
      // Restart the scan just past the located zero.
      a = b;
      fa = fb == 0.0 ? spherical_bessel_j(n, b + 1e-9) : fb;
      continue;
    }
    a = b;
    fa = fb;
  }
  if (static_cast<int>(zeros.size()) < count)
    throw NumericalError(ErrorKind::bracket_failure,
                         "sign scan missed zeros of j_" + std::to_string(n));
  return zeros;
}

/// k-th positive zero of j_n (k >= 1).
inline double bessel_zero(int n, int k) {
  if (k < 1)
    throw std::invalid_argument("bessel_zero: index must be >= 1");
  return bessel_zeros(n, k).back();
}

/// Scaled regular modified function  a_n(x) = (2n+1)!! i_n(x) / x^n,
/// n = 0..nmax, for real or complex x. a_n(0) = 1 and a_n -> 1 as n grows.
template <class T> std::vector<T> regular_scaled_sequence(int nmax, T x) {
  std::vector<T> out(nmax + 1, T(1.0));
  const double ax = std::abs(x);
  if (ax == 0.0)
    return out;
  if (std::abs(std::real(x)) > kOverflowArgument)
    throw NumericalError(ErrorKind::overflow_guard,
                         "modified Bessel argument beyond overflow guard");
  const T x2 = x * x;
  if (ax < 0.5) {
    for (int n = 0; n <= nmax; ++n) {
      T term(1.0), sum(1.0);
      for (int m = 1; m < 60; ++m) {
        term *= x2 / (2.0 * m * (2.0 * n + 2.0 * m + 1.0));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum))
          break;
      }
      out[n] = sum;
    }
    return out;
  }
  // Miller: the regular solution is the minimal one of the recurrence
  // a_{n-1} = a_n + x^2 a_{n+1} / ((2n+1)(2n+3)).
  const int start = nmax + static_cast<int>(ax) + 40;
  std::vector<T> f(start + 2, T(0.0));
  f[start] = T(1.0);
  for (int k = start; k >= 1; --k) {
    f[k - 1] = f[k] + x2 * f[k + 1] / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    if (std::abs(f[k - 1]) > 1e200) {
      for (int i = k - 1; i <= start; ++i)
        f[i] *= 1e-200;
    }
  }
  const T a0 = std::sinh(x) / x;
  const T a1 = 3.0 * (x * std::cosh(x) - std::sinh(x)) / (x * x2);
  const T scale = std::abs(a0) >= std::abs(a1) ? a0 / f[0] : a1 / f[1];
  for (int n = 0; n <= nmax; ++n)
    out[n] = f[n] * scale;
  return out;
}

/// Scaled decaying modified function  b_n(x) = x^{n+1} k_n(x) / (2n-1)!!,
/// n = 0..nmax, with b_0 = exp(-x), b_1 = exp(-x)(1+x). Upward recurrence
/// b_{n+1} = b_n + x^2 b_{n-1} / ((2n+1)(2n-1)).
template <class T> std::vector<T> decaying_scaled_sequence(int nmax, T x) {
  if (std::real(x) < -kOverflowArgument)
    throw NumericalError(ErrorKind::overflow_guard,
                         "modified Bessel argument beyond overflow guard");
  std::vector<T> out(nmax + 1);
  const T e = std::exp(-x);
  out[0] = e;
  if (nmax >= 1)
    out[1] = e * (T(1.0) + x);
  const T x2 = x * x;
  for (int n = 1; n < nmax; ++n)
    out[n + 1] = out[n] + x2 * out[n - 1] / ((2.0 * n + 1.0) * (2.0 * n - 1.0));
  return out;
}

struct ModifiedRadialPair {
  double regular;
  double decaying;
};

/// (i_n(kappa r), k_n(kappa r)) with i_0(x) = sinh(x)/x, k_0(x) = exp(-x)/x.
inline ModifiedRadialPair modified_radial(int n, double kappa, double r) {
  if (n < 0)
    throw std::invalid_argument("modified_radial: order must be >= 0");
  if (!(kappa > 0.0) || !(r >= 0.0))
    throw std::invalid_argument("modified_radial: need kappa > 0 and r >= 0");
  const double x = kappa * r;
  if (x > kOverflowArgument)
    throw NumericalError(ErrorKind::overflow_guard,
                         "kappa*r = " + std::to_string(x) + " exceeds 700");
  if (x == 0.0)
    return {n == 0 ? 1.0 : 0.0, std::numeric_limits<double>::infinity()};
  const double a = regular_scaled_sequence(n, x)[n];
  const double b = decaying_scaled_sequence(n, x)[n];
  // x^n/(2n+1)!! and (2n-1)!!/x^{n+1}, accumulated as ratios.
  double up = 1.0, down = 1.0 / x;
  for (int i = 1; i <= n; ++i) {
    up *= x / (2.0 * i + 1.0);
    down *= (2.0 * i - 1.0) / x;
  }
  return {a * up, b * down};
}

/// Legendre polynomial P_n(x).
inline double legendre_p(int n, double x) {
  if (n < 0)
    throw std::invalid_argument("legendre_p: degree must be >= 0");
  if (n == 0)
    return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// P_0(x) .. P_nmax(x).
inline std::vector<double> legendre_sequence(int nmax, double x) {
  std::vector<double> p(nmax + 1);
  p[0] = 1.0;
  if (nmax >= 1)
    p[1] = x;
  for (int k = 1; k < nmax; ++k)
    p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
  return p;
}

} // namespace specfun
} // namespace deltaball
