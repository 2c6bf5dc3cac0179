#pragma once
//
// Eigenfunctions of H_alpha in closed radial form.
//
// An s-wave eigenvalue zeta = t^2 has eigenfunction q G^{-zeta}(r), i.e.
//
//   u(r) = N sin(t (R - r)) / r,   q = 4 pi N sin(t R),
//
// and the bound state -kappa^2 has u(r) = N sinh(kappa (R - r)) / r with
// q = 4 pi N sinh(kappa R). N is fixed by unit L^2 norm over the ball and by
// u > 0 near the center:
//
//   4 pi N^2 (R/2 - sin(2tR)/(4t)) = 1,   4 pi N^2 (sinh(2 kappa R)/(4 kappa) - R/2) = 1.
//
// Both cases are written as u(r) = N c sin(w (R - r)) / r with w = t, c = 1
// or w = i kappa, c = -i, which gives every overlap integral in closed form.
//

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "deltaball/ball_laplacian.hpp"
#include "deltaball/errors.hpp"
#include "deltaball/green.hpp"
#include "deltaball/quadrature.hpp"
#include "deltaball/spectrum.hpp"

namespace deltaball::eigen {

enum class EigenKind { s_wave, bound_state };

struct RadialEigenfunction {
  EigenKind kind = EigenKind::s_wave;
  double energy = 0.0;     // zeta, or -kappa^2
  double rate = 0.0;       // t = sqrt(zeta), or kappa
  double radius = 1.0;
  double norm_const = 0.0; // N
  double charge = 0.0;     // q, coefficient of 1/(4 pi r) at the center

  /// r u(r), finite on [0, R].
  double reduced(double r) const {
    const double s = radius - r;
    if (kind == EigenKind::bound_state)
      return norm_const * std::sinh(rate * s);
    return rate == 0.0 ? norm_const * s : norm_const * std::sin(rate * s);
  }

  /// u(r) for 0 < r <= R.
  double value(double r) const {
    if (!(r > 0.0) || r > radius * (1.0 + 1e-12))
      throw NumericalError(ErrorKind::point_outside_domain, "eigenfunction needs 0 < r <= R");
    return reduced(std::min(r, radius)) / r;
  }

  double operator()(double r) const { return value(r); }

  /// Spectral parameter of the eigenvalue in the R_z = (H + z)^{-1} convention.
  double spectral_parameter() const { return -energy; }
};

namespace detail {

// Complex frequency w and phase c with r u(r) = N c sin(w (R - r)).
inline std::pair<cplx, cplx> frequency(const RadialEigenfunction &u) {
  if (u.kind == EigenKind::bound_state)
    return {cplx(0.0, u.rate), cplx(0.0, -1.0)};
  return {cplx(u.rate, 0.0), cplx(1.0, 0.0)};
}

// int_0^R cos(c s) ds = sin(cR)/c.
inline cplx cos_integral(cplx c, double R) {
  if (std::abs(c) * R < 1e-4) {
    const cplx x2 = c * c * R * R;
    return R * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(c * R) / c;
}

} // namespace detail

/// <a, b> = int_ball a b, in closed form.
inline double overlap(const RadialEigenfunction &a, const RadialEigenfunction &b) {
  if (a.radius != b.radius)
    throw std::invalid_argument("overlap: eigenfunctions on different balls");
  const double R = a.radius;
  if (a.kind == EigenKind::s_wave && a.rate == 0.0) {
    // Threshold eigenfunction N (R - r)/r: integrate numerically.
    return quadrature::integrate_composite(
        [&](double r) { return 4.0 * pi * a.reduced(r) * b.reduced(r); }, 0.0, R, 8, 32);
  }
  if (b.kind == EigenKind::s_wave && b.rate == 0.0)
    return overlap(b, a);
  const auto [wa, ca] = detail::frequency(a);
  const auto [wb, cb] = detail::frequency(b);
  // int_0^R sin(wa s) sin(wb s) ds = (C(wa - wb) - C(wa + wb)) / 2.
  const cplx integral = 0.5 * (detail::cos_integral(wa - wb, R) - detail::cos_integral(wa + wb, R));
  return (4.0 * pi * a.norm_const * b.norm_const * ca * cb * integral).real();
}

namespace detail {

inline RadialEigenfunction make_s_wave(double zeta, double R) {
  RadialEigenfunction u;
  u.kind = EigenKind::s_wave;
  u.energy = zeta;
  u.rate = std::sqrt(zeta);
  u.radius = R;
  const double t = u.rate;
  const double weight = t == 0.0 ? R * R * R / 3.0 : R / 2.0 - std::sin(2.0 * t * R) / (4.0 * t);
  double N = 1.0 / std::sqrt(4.0 * pi * weight);
  const double at_center = t == 0.0 ? R : std::sin(t * R);
  if (at_center < 0.0)
    N = -N;
  u.norm_const = N;
  u.charge = 4.0 * pi * N * at_center;
  return u;
}

inline RadialEigenfunction make_bound(double kappa, double R) {
  RadialEigenfunction u;
  u.kind = EigenKind::bound_state;
  u.energy = -kappa * kappa;
  u.rate = kappa;
  u.radius = R;
  // sinh(2 k R)/(4 k) - R/2, with its series for small kR.
  const double x = kappa * R;
  const double weight = x < 1e-3 ? R * R * R * kappa * kappa / 3.0 * (1.0 + x * x / 5.0)
                                 : std::sinh(2.0 * x) / (4.0 * kappa) - R / 2.0;
  u.norm_const = 1.0 / std::sqrt(4.0 * pi * weight);
  u.charge = 4.0 * pi * u.norm_const * std::sinh(x);
  return u;
}

} // namespace detail

/// Normalized eigenfunction of a certified s-wave root of H_alpha.
inline RadialEigenfunction s_wave_eigenfunction(const spectrum::SpectralPoint &point, double alpha,
                                                double radius) {
  if (point.kind != spectrum::PointKind::s_wave_root || !(point.value >= 0.0))
    throw NumericalError(ErrorKind::uncertified_input, "not an s-wave root");
  const double t = std::sqrt(point.value);
  const double residual = std::abs(spectrum::f_alpha(alpha, radius, -point.value));
  if (!(residual <= spectrum::detail::residual_bound(radius, t)))
    throw NumericalError(ErrorKind::uncertified_input,
                         "f_alpha(-zeta) = " + std::to_string(residual) + " is not a root");
  return detail::make_s_wave(point.value, radius);
}

/// Normalized bound-state eigenfunction.
inline RadialEigenfunction bound_state_eigenfunction(const spectrum::SpectralPoint &point,
                                                     double alpha, double radius) {
  if (point.kind != spectrum::PointKind::bound_state || !(point.value < 0.0))
    throw NumericalError(ErrorKind::uncertified_input, "not a bound state");
  const double kappa = std::sqrt(-point.value);
  const double residual = std::abs(spectrum::f_alpha(alpha, radius, kappa * kappa));
  if (!(residual <= spectrum::kResidualTolerance))
    throw NumericalError(ErrorKind::uncertified_input, "bound state fails f_alpha(kappa^2) = 0");
  return detail::make_bound(kappa, radius);
}

/// Bound state (if any) followed by the first `count` s-wave eigenfunctions.
inline std::vector<RadialEigenfunction> s_wave_basis(double alpha, double radius, int count) {
  std::vector<RadialEigenfunction> basis;
  if (auto b = spectrum::bound_state(alpha, radius))
    basis.push_back(bound_state_eigenfunction(*b, alpha, radius));
  for (const auto &p : spectrum::s_wave_roots(alpha, radius, count))
    basis.push_back(s_wave_eigenfunction(p, alpha, radius));
  return basis;
}

/// int_ball u f for a radial profile f, by composite Gauss-Legendre. Panels
/// are sized to the oscillation length of u.
inline double project_profile(const RadialEigenfunction &u, const std::function<double(double)> &f,
                              int min_panels = 16) {
  const double R = u.radius;
  const int panels =
      std::max(min_panels, static_cast<int>(std::ceil(2.0 * u.rate * R / pi)) + min_panels);
  return quadrature::integrate_composite(
      [&](double r) { return 4.0 * pi * r * u.reduced(r) * f(r); }, 0.0, R, panels, 32);
}

/// ||u||^2 by adaptive quadrature, split at min(0.1 R, pi / rate).
inline double quadrature_norm(const RadialEigenfunction &u) {
  const double R = u.radius;
  const double split = u.rate > 0.0 ? std::min(0.1 * R, pi / u.rate) : 0.1 * R;
  auto f = [&](double r) { return 4.0 * pi * u.reduced(r) * u.reduced(r); };
  return quadrature::integrate_adaptive(f, 0.0, split, 1e-14) +
         quadrature::integrate_adaptive(f, split, R, 1e-14);
}

/// psi = phi^lambda + q G^lambda: regular coefficients over a catalog, the
/// charge, and the decomposition parameter lambda. When known in closed form,
/// phi^lambda(0) is carried explicitly since the mode series converges slowly
/// at the center.
struct WaveState {
  ModeCoefficients regular;
  cplx charge = 0.0;
  cplx lambda = 1.0;
  std::optional<cplx> regular_at_center;
};

/// Decomposition of an eigenfunction at parameter lambda:
/// phi^lambda = q (G^{-E} - G^{lambda}), with
/// phi^lambda(0) = q [(sqrt(lambda) - sqrt(-E))/(4 pi) + h_lambda(0) - h_{-E}(0)].
inline WaveState decompose(const ModeCatalog &catalog, const RadialEigenfunction &u, cplx lambda) {
  const double z_eig = u.spectral_parameter();
  catalog.check_resolvent_set(lambda);
  WaveState st;
  st.lambda = lambda;
  st.charge = u.charge;
  st.regular = catalog.zero_coefficients();
  const auto modes = catalog.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].index.n != 0)
      continue;
    const double at0 = s_wave_mode_value(catalog.radius(), modes[i].index.k, 0.0);
    const double lam = modes[i].eigenvalue;
    st.regular[i] = u.charge * at0 * (1.0 / (lam + z_eig) - 1.0 / (lam + lambda));
  }
  const BallDomain &d = catalog.domain();
  st.regular_at_center =
      u.charge * ((specfun::spectral_sqrt(lambda) - specfun::spectral_sqrt(z_eig)) / (4.0 * pi) +
                  green::h_center(d, lambda, 0.0) - green::h_center(d, z_eig, 0.0));
  return st;
}

/// A Dirichlet mode as a domain element: no charge.
inline WaveState mode_state(const ModeCatalog &catalog, std::size_t mode_index, cplx lambda) {
  WaveState st;
  st.regular = catalog.zero_coefficients();
  st.regular.at(mode_index) = 1.0;
  st.lambda = lambda;
  return st;
}

struct MembershipReport {
  cplx regular_at_center;
  cplx expected; // q (alpha + sqrt(lambda)/(4 pi) + h_lambda(0))
  double residual = 0.0;
  bool member = false;
};

/// Checks phi^lambda(0) = q (alpha + sqrt(lambda)/(4 pi) + h_lambda(0)).
inline MembershipReport verify_domain_membership(const ModeCatalog &catalog, const WaveState &state,
                                                 double alpha, double tol = 1e-8) {
  MembershipReport rep;
  if (state.regular_at_center) {
    rep.regular_at_center = *state.regular_at_center;
  } else {
    const auto vals = catalog.values_at(Point3::Zero());
    rep.regular_at_center = evaluate_series(state.regular, vals);
  }
  const cplx gamma = state.charge == cplx{}
                         ? cplx{}
                         : alpha + specfun::spectral_sqrt(state.lambda) / (4.0 * pi) +
                               green::h_center(catalog.domain(), state.lambda, 0.0);
  rep.expected = state.charge * gamma;
  rep.residual = std::abs(rep.regular_at_center - rep.expected);
  rep.member = rep.residual < tol;
  return rep;
}

/// Mode coefficients of psi = phi^lambda + q G^lambda (center at the origin).
inline ModeCoefficients state_coefficients(const ModeCatalog &catalog, const WaveState &state) {
  ModeCoefficients out = state.regular;
  const auto modes = catalog.modes();
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].index.n == 0)
      out[i] += state.charge * s_wave_mode_value(catalog.radius(), modes[i].index.k, 0.0) /
                (modes[i].eigenvalue + state.lambda);
  return out;
}

/// Mode coefficients of H_alpha psi = -Laplacian phi^lambda - lambda q G^lambda.
inline ModeCoefficients hamiltonian_coefficients(const ModeCatalog &catalog, const WaveState &state) {
  ModeCoefficients out(state.regular.size());
  const auto modes = catalog.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    out[i] = modes[i].eigenvalue * state.regular[i];
    if (modes[i].index.n == 0)
      out[i] -= state.lambda * state.charge *
                s_wave_mode_value(catalog.radius(), modes[i].index.k, 0.0) /
                (modes[i].eigenvalue + state.lambda);
  }
  return out;
}

} // namespace deltaball::eigen
