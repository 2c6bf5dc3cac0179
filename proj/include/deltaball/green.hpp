#pragma once
//
// Dirichlet Green's function of (-Laplacian + z) in the ball:
//
//   G^{z}(x; y) = exp(-s|x-y|) / (4 pi |x-y|) - h_{z,y}(x),   s = sqrt(z), Re s >= 0,
//
// where h_{z,y} solves (-Laplacian + z) h = 0 with the free kernel as boundary
// data on |x| = R.
//
// Off-center sources use separation of variables. With the scaled modified
// Bessel functions a_n, b_n of specfun, the free kernel expands as
//
//   exp(-s|x-y|)/(4 pi |x-y|) = 1/(4 pi r_>) sum_n (r_</r_>)^n a_n(s r_<) b_n(s r_>) P_n(cos g)
//
// and the regular interior solution matching it on the sphere is
//
//   h_{z,y}(x) = 1/(4 pi R) sum_n (|x||y|/R^2)^n a_n(s|y|) a_n(s|x|) b_n(sR) / a_n(sR) P_n(cos g).
//
// For a centered source this collapses to
//
//   h_z(r) = shc(s r) * B(2 s R) / (4 pi R),   shc(w) = sinh(w)/w,  B(w) = w/(e^w - 1),
//
// which equals exp(-sR) sinh(s r) / (4 pi r sinh(sR)) and takes the value
// exp(-sR)/(4 pi R) on the boundary.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "deltaball/ball_laplacian.hpp"
#include "deltaball/errors.hpp"
#include "deltaball/specfun.hpp"

namespace deltaball::green {

inline constexpr int kMaxExpansionTerms = 200;
inline constexpr double kSourceMargin = 0.95;
inline constexpr double kTailRatio = 1e-12;

/// exp(-sqrt(z)|x-y|) / (4 pi |x-y|).
inline cplx free_kernel(cplx z, const Point3 &x, const Point3 &y) {
  const double d = (x - y).norm();
  if (d == 0.0)
    throw NumericalError(ErrorKind::coincident_points, "free kernel at x == y");
  const cplx s = specfun::spectral_sqrt(z);
  return std::exp(-s * d) / (4.0 * pi * d);
}

/// Regular part of the boundary correction for a source at the origin.
inline cplx h_center(const BallDomain &domain, cplx z, double r) {
  const double R = domain.radius;
  if (!(r >= 0.0) || r > R * (1.0 + 1e-12))
    throw NumericalError(ErrorKind::point_outside_domain, "h_center: r outside [0, R]");
  r = std::min(r, R);
  const cplx s = specfun::spectral_sqrt(z);
  if (std::abs(specfun::shc(s * R)) < domain.tol)
    throw NumericalError(ErrorKind::pole, "sinh(sqrt(z) R) vanishes: -z on the s-wave spectrum");
  if (s.real() * R < 30.0)
    return specfun::shc(s * r) * specfun::bernoulli_ratio(2.0 * s * R) / (4.0 * pi * R);
  // Large Re s: every exponent kept non-positive.
  const cplx denom = 1.0 - std::exp(-2.0 * s * R);
  if (std::abs(s * r) < 1.0)
    return 2.0 * s * specfun::shc(s * r) * std::exp(-2.0 * s * R) / (4.0 * pi * denom);
  return (std::exp(s * (r - 2.0 * R)) - std::exp(-s * (r + 2.0 * R))) / (4.0 * pi * r * denom);
}

namespace detail {

inline void check_source(const BallDomain &domain, const Point3 &source) {
  if (!(source.norm() < kSourceMargin * domain.radius))
    throw NumericalError(ErrorKind::point_outside_domain,
                         "source must satisfy |source| < 0.95 R");
}

inline void check_field_point(const BallDomain &domain, const Point3 &x) {
  if (!(x.norm() <= domain.radius * (1.0 + 1e-12)))
    throw NumericalError(ErrorKind::point_outside_domain, "field point outside the ball");
}

// Terms grow until n exceeds about |s| R and then decay like q^n.
inline int terms_for_ratio(double q, double s_abs_R) {
  if (q <= 0.0)
    return 1;
  const double n = std::log(1e-15 * (1.0 - q)) / std::log(q) + 2.0 * s_abs_R;
  return std::min(kMaxExpansionTerms, static_cast<int>(std::ceil(n)) + 4);
}

} // namespace detail

/// Boundary correction h_{z,source}(x) for an arbitrary interior source.
inline cplx h_offcenter(const BallDomain &domain, cplx z, const Point3 &source,
                        const Point3 &x) {
  detail::check_source(domain, source);
  detail::check_field_point(domain, x);
  const double R = domain.radius;
  const double rho = source.norm();
  const double r = std::min(x.norm(), R);
  if (rho == 0.0)
    return h_center(domain, z, r);
  if (r == 0.0)
    return h_center(domain, z, rho);

  const cplx s = specfun::spectral_sqrt(z);
  const double q = rho * r / (R * R);
  const double cos_g = std::clamp(source.dot(x) / (rho * r), -1.0, 1.0);
  const int nmax = detail::terms_for_ratio(q, std::abs(s) * R);

  const auto a_src = specfun::regular_scaled_sequence(nmax, s * rho);
  const auto a_fld = specfun::regular_scaled_sequence(nmax, s * r);
  const auto a_bnd = specfun::regular_scaled_sequence(nmax, s * R);
  const auto b_bnd = specfun::decaying_scaled_sequence(nmax, s * R);
  const auto leg = specfun::legendre_sequence(nmax, cos_g);

  const double pref = 1.0 / (4.0 * pi * R);
  cplx sum{};
  double qn = 1.0, largest = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    const double ref = n == 0 ? 1.0 : std::abs(a_bnd[n - 1] * s * R) / (2.0 * n + 1.0);
    if (std::abs(a_bnd[n]) < domain.tol * std::max(ref, 1e-300))
      throw NumericalError(ErrorKind::pole,
                           "-z near a Dirichlet eigenvalue of order n = " + std::to_string(n));
    const cplx coeff = pref * qn * a_src[n] * a_fld[n] * b_bnd[n] / a_bnd[n];
    sum += coeff * leg[n];
    largest = std::max(largest, std::abs(coeff));
    // Below eps * largest term the sum is already limited by cancellation.
    const double tail = std::abs(coeff) * q / (1.0 - q);
    if (n >= 1 && (tail < kTailRatio * std::abs(sum) || tail < 1e-16 * largest || tail < 1e-300))
      return sum;
    qn *= q;
  }
  throw NumericalError(ErrorKind::convergence_failure,
                       "boundary expansion did not converge within 200 terms");
}

/// Multipole form of the free kernel; used to check the addition theorem.
inline cplx free_kernel_expansion(cplx z, const Point3 &x, const Point3 &y, int nmax) {
  const double rx = x.norm(), ry = y.norm();
  const double r_lo = std::min(rx, ry), r_hi = std::max(rx, ry);
  if (r_hi == 0.0 || r_lo == r_hi)
    throw std::invalid_argument("free_kernel_expansion: need |x| != |y|");
  const cplx s = specfun::spectral_sqrt(z);
  const double cos_g = r_lo == 0.0 ? 1.0 : std::clamp(x.dot(y) / (rx * ry), -1.0, 1.0);
  const auto a = specfun::regular_scaled_sequence(nmax, s * r_lo);
  const auto b = specfun::decaying_scaled_sequence(nmax, s * r_hi);
  const auto leg = specfun::legendre_sequence(nmax, cos_g);
  cplx sum{};
  double ratio = 1.0;
  for (int n = 0; n <= nmax; ++n) {
    sum += ratio * a[n] * b[n] * leg[n];
    ratio *= r_lo / r_hi;
  }
  return sum / (4.0 * pi * r_hi);
}

/// G^{z}(x; source) = free kernel - boundary correction.
inline cplx green_eval(const BallDomain &domain, cplx z, const Point3 &source, const Point3 &x) {
  detail::check_field_point(domain, x);
  return free_kernel(z, x, source) - h_offcenter(domain, z, source, x);
}

enum class SeriesSummation {
  plain,  // straight partial sum
  kummer, // subtract the z = 0 series, summed in closed form
};

/// Mode series  sum_{k<=terms} psi_{00k}(0) psi_{00k}(r) / (lambda_{0k} + z)
/// of the centered Green's function, for 0 < r <= R.
///
/// With `kummer`, the z = 0 series sum_k psi_k(0) psi_k(r)/lambda_k is summed
/// exactly through  sum_k sin(k t)/k = (pi - t)/2  (0 < t < 2 pi), giving
/// (R - r)/(4 pi r R), and only the remainder
/// psi_k(0) psi_k(r) [1/(lambda_k + z) - 1/lambda_k], which decays like
/// k^-3, is truncated.
inline cplx centered_green_series(double radius, cplx z, double r, int terms,
                                  SeriesSummation mode = SeriesSummation::plain) {
  if (!(r > 0.0) || r > radius)
    throw std::invalid_argument("centered_green_series: need 0 < r <= R");
  cplx sum{};
  for (int k = terms; k >= 1; --k) {
    const double lam = (k * pi / radius) * (k * pi / radius);
    const double pp = s_wave_mode_value(radius, k, 0.0) * s_wave_mode_value(radius, k, r);
    if (mode == SeriesSummation::plain)
      sum += pp / (lam + z);
    else
      sum += -pp * z / (lam * (lam + z));
  }
  if (mode == SeriesSummation::kummer)
    sum += (radius - r) / (4.0 * pi * r * radius);
  return sum;
}

} // namespace deltaball::green
