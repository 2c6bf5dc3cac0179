#pragma once
//
// Particle coupled to a qubit through the strength of a centered point
// interaction:
//
//   T = H_{alpha_+} (x) |+><+|  +  H_{alpha_-} (x) |-><-|  +  1 (x) diag(E_+, E_-)
//
// Each channel evolves with its own Hamiltonian, so populations and channel
// energies are conserved while the coherence <psi_-, psi_+> dephases.
//
// Channel bases: the bound state (if any) and the first s-wave eigenfunctions
// of H_{alpha_sigma}, plus optional inherited Dirichlet modes (n >= 1), which
// are common to both channels. Cross-channel overlaps of the s-wave blocks are
// computed in closed form; inherited overlaps are Kronecker deltas.
//

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "deltaball/ball_laplacian.hpp"
#include "deltaball/eigenfunctions.hpp"
#include "deltaball/errors.hpp"
#include "deltaball/green.hpp"
#include "deltaball/krein.hpp"

namespace deltaball::dynamics {

inline constexpr double kMinCapturedNorm = 0.99;

struct QubitCoupling {
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double energy_plus = 0.0;
  double energy_minus = 0.0;

  void validate() const {
    if (!std::isfinite(alpha_plus) || !std::isfinite(alpha_minus) ||
        !std::isfinite(energy_plus) || !std::isfinite(energy_minus))
      throw std::invalid_argument("QubitCoupling: parameters must be finite");
  }
};

/// An inherited Dirichlet mode shared by both channels.
struct InheritedMode {
  ModeIndex index;
  double energy = 0.0;
};

struct Channel {
  double alpha = 0.0;
  double qubit_energy = 0.0;
  std::vector<eigen::RadialEigenfunction> s_wave; // bound state first when present
  std::vector<cplx> s_coeffs;
  std::vector<cplx> inherited_coeffs; // aligned with CompositeState::inherited
  double captured = 1.0;              // captured-norm fraction of the prepared profile

  double norm2() const {
    double n = 0.0;
    for (const auto &a : s_coeffs)
      n += std::norm(a);
    for (const auto &a : inherited_coeffs)
      n += std::norm(a);
    return n;
  }
};

struct CompositeState {
  Channel plus;
  Channel minus;
  std::vector<InheritedMode> inherited;
  Eigen::MatrixXd overlap; // overlap(i, j) = <u^-_i, u^+_j>
  double time = 0.0;
};

/// <u^-_i, u^+_j> for the two s-wave bases.
inline Eigen::MatrixXd overlap_matrix(std::span<const eigen::RadialEigenfunction> minus,
                                      std::span<const eigen::RadialEigenfunction> plus) {
  Eigen::MatrixXd O(static_cast<Eigen::Index>(minus.size()), static_cast<Eigen::Index>(plus.size()));
  for (std::size_t i = 0; i < minus.size(); ++i)
    for (std::size_t j = 0; j < plus.size(); ++j)
      O(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eigen::overlap(minus[i], plus[j]);
  return O;
}

/// Builds a state from explicit channel coefficients over the given bases.
inline CompositeState make_state(const QubitCoupling &coupling,
                                 std::vector<eigen::RadialEigenfunction> plus_basis,
                                 std::vector<cplx> plus_coeffs,
                                 std::vector<eigen::RadialEigenfunction> minus_basis,
                                 std::vector<cplx> minus_coeffs,
                                 std::vector<InheritedMode> inherited = {},
                                 std::vector<cplx> inherited_plus = {},
                                 std::vector<cplx> inherited_minus = {}) {
  coupling.validate();
  if (plus_basis.size() != plus_coeffs.size() || minus_basis.size() != minus_coeffs.size())
    throw std::invalid_argument("make_state: coefficient count does not match basis");
  if (inherited_plus.empty())
    inherited_plus.assign(inherited.size(), cplx{});
  if (inherited_minus.empty())
    inherited_minus.assign(inherited.size(), cplx{});
  if (inherited_plus.size() != inherited.size() || inherited_minus.size() != inherited.size())
    throw std::invalid_argument("make_state: inherited coefficient count mismatch");
  CompositeState st;
  st.plus = {coupling.alpha_plus, coupling.energy_plus, std::move(plus_basis),
             std::move(plus_coeffs), std::move(inherited_plus), 1.0};
  st.minus = {coupling.alpha_minus, coupling.energy_minus, std::move(minus_basis),
              std::move(minus_coeffs), std::move(inherited_minus), 1.0};
  st.inherited = std::move(inherited);
  st.overlap = overlap_matrix(st.minus.s_wave, st.plus.s_wave);
  return st;
}

struct PrepareOptions {
  int s_wave_count = 60; // s-wave eigenfunctions per channel (bound state extra)
  double radius = 1.0;
};

/// Projects a radial profile onto both channel bases, weighted by the qubit
/// amplitudes. The projections are renormalized so the state has unit norm;
/// the captured fractions are kept on the channels. A channel with zero
/// amplitude is not checked against the captured-norm floor.
inline CompositeState prepare(const std::function<double(double)> &profile, cplx c_plus,
                              cplx c_minus, const QubitCoupling &coupling,
                              const PrepareOptions &options = {}) {
  coupling.validate();
  if (std::abs(std::norm(c_plus) + std::norm(c_minus) - 1.0) > 1e-10)
    throw std::invalid_argument("prepare: |c_+|^2 + |c_-|^2 must equal 1");
  const double R = options.radius;
  const double profile_norm2 = quadrature::integrate_composite(
      [&](double r) { return 4.0 * pi * r * r * profile(r) * profile(r); }, 0.0, R,
      4 * options.s_wave_count + 16, 32);
  if (!(profile_norm2 > 0.0) || !std::isfinite(profile_norm2))
    throw std::invalid_argument("prepare: profile must have finite nonzero norm");

  auto project = [&](double alpha, cplx c, double &captured) {
    auto basis = eigen::s_wave_basis(alpha, R, options.s_wave_count);
    std::vector<cplx> coeffs(basis.size());
    double got = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double p = eigen::project_profile(basis[j], profile);
      coeffs[j] = p;
      got += p * p;
    }
    captured = got / profile_norm2;
    if (c != cplx{} && captured < kMinCapturedNorm)
      throw NumericalError(ErrorKind::insufficient_cutoff,
                           "captured norm " + std::to_string(captured) + " below 0.99");
    const double scale = 1.0 / std::sqrt(got);
    for (auto &a : coeffs)
      a *= c * scale;
    return std::make_pair(std::move(basis), std::move(coeffs));
  };

  double cap_plus = 0.0, cap_minus = 0.0;
  auto [bp, cp] = project(coupling.alpha_plus, c_plus, cap_plus);
  auto [bm, cm] = project(coupling.alpha_minus, c_minus, cap_minus);
  CompositeState st = make_state(coupling, std::move(bp), std::move(cp), std::move(bm), std::move(cm));
  st.plus.captured = cap_plus;
  st.minus.captured = cap_minus;
  return st;
}

namespace detail {

inline void rotate(Channel &ch, const std::vector<InheritedMode> &inherited, double t) {
  for (std::size_t j = 0; j < ch.s_coeffs.size(); ++j)
    ch.s_coeffs[j] *= std::polar(1.0, -(ch.s_wave[j].energy + ch.qubit_energy) * t);
  for (std::size_t j = 0; j < ch.inherited_coeffs.size(); ++j)
    ch.inherited_coeffs[j] *= std::polar(1.0, -(inherited[j].energy + ch.qubit_energy) * t);
}

} // namespace detail

/// a_{sigma,j} -> exp(-i (E_j^sigma + E_sigma) t) a_{sigma,j}.
inline CompositeState evolve(const CompositeState &state, double t) {
  CompositeState out = state;
  detail::rotate(out.plus, out.inherited, t);
  detail::rotate(out.minus, out.inherited, t);
  out.time = state.time + t;
  return out;
}

/// rho_{sigma sigma'} = <psi_{sigma'}, psi_sigma>; index 0 is +, 1 is -.
inline Eigen::Matrix2cd qubit_reduced_density(const CompositeState &state) {
  cplx cross{};
  for (std::size_t i = 0; i < state.minus.s_coeffs.size(); ++i) {
    const cplx am = std::conj(state.minus.s_coeffs[i]);
    for (std::size_t j = 0; j < state.plus.s_coeffs.size(); ++j)
      cross += am * state.plus.s_coeffs[j] *
               state.overlap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  for (std::size_t j = 0; j < state.inherited.size(); ++j)
    cross += std::conj(state.minus.inherited_coeffs[j]) * state.plus.inherited_coeffs[j];
  Eigen::Matrix2cd rho;
  rho(0, 0) = state.plus.norm2();
  rho(1, 1) = state.minus.norm2();
  rho(0, 1) = cross;
  rho(1, 0) = std::conj(cross);
  return rho;
}

struct Observables {
  double norm_plus = 0.0;
  double norm_minus = 0.0;
  double energy_plus = 0.0; // sum_j E_j^+ |a_{+,j}|^2
  double energy_minus = 0.0;
  double pop_plus = 0.0;
  double pop_minus = 0.0;
  double coherence_abs = 0.0; // |rho_{+-}|
  double coherence_arg = 0.0;
};

inline Observables observables(const CompositeState &state) {
  Observables o;
  auto energy = [&](const Channel &ch) {
    double e = 0.0;
    for (std::size_t j = 0; j < ch.s_coeffs.size(); ++j)
      e += ch.s_wave[j].energy * std::norm(ch.s_coeffs[j]);
    for (std::size_t j = 0; j < ch.inherited_coeffs.size(); ++j)
      e += state.inherited[j].energy * std::norm(ch.inherited_coeffs[j]);
    return e;
  };
  const auto rho = qubit_reduced_density(state);
  o.norm_plus = std::sqrt(state.plus.norm2());
  o.norm_minus = std::sqrt(state.minus.norm2());
  o.energy_plus = energy(state.plus);
  o.energy_minus = energy(state.minus);
  o.pop_plus = rho(0, 0).real();
  o.pop_minus = rho(1, 1).real();
  o.coherence_abs = std::abs(rho(0, 1));
  o.coherence_arg = std::arg(rho(0, 1));
  return o;
}

struct CompositeCoefficients {
  ModeCoefficients plus;
  ModeCoefficients minus;
};

enum class ChannelShift {
  per_channel, // channel sigma uses z + E_sigma
  unshifted,   // the same z in both channels, E_sigma ignored
};

struct CompositeResult {
  CompositeCoefficients result;
  Eigen::Vector2cd charges;
  double condition = 0.0;
};

/// (T^{AB} + z)^{-1} for a centered point with a general 2x2 boundary pair:
/// q = (B D + A)^{-1} B [R_{z_sigma} phi_sigma(0)], D = diag(h_{z_sigma}(0) + sqrt(z_sigma)/(4 pi)).
inline CompositeResult composite_resolvent_apply(const ModeCatalog &catalog,
                                                 const Eigen::Matrix2cd &A,
                                                 const Eigen::Matrix2cd &B,
                                                 const QubitCoupling &coupling, cplx z,
                                                 const CompositeCoefficients &phi,
                                                 ChannelShift shift = ChannelShift::per_channel,
                                                 const krein::ResolventOptions &options = {}) {
  const auto report = krein::validate_pair(A, B);
  if (!report.ok)
    throw std::invalid_argument("composite_resolvent_apply: " + report.message);
  const cplx zs[2] = {shift == ChannelShift::per_channel ? z + coupling.energy_plus : z,
                      shift == ChannelShift::per_channel ? z + coupling.energy_minus : z};
  const ModeCoefficients *in[2] = {&phi.plus, &phi.minus};
  const auto center = catalog.values_at(Point3::Zero());
  const auto modes = catalog.modes();

  CompositeResult res;
  ModeCoefficients *out[2] = {&res.result.plus, &res.result.minus};
  Eigen::Vector2cd at_center;
  Eigen::Matrix2cd D = Eigen::Matrix2cd::Zero();
  const krein::ExtensionSpec origin =
      krein::ExtensionSpec::local({Point3::Zero()}, std::vector<double>{0.0});
  for (int c = 0; c < 2; ++c) {
    *out[c] = free_resolvent_apply(catalog, zs[c], *in[c]);
    at_center(c) = evaluate_series(*out[c], center);
    const auto gamma = options.gamma == krein::GammaEvaluation::exact
                           ? krein::gamma_matrix(catalog.domain(), origin, zs[c])
                           : krein::catalog_gamma_matrix(catalog, origin, zs[c], options.reference);
    D(c, c) = gamma.entries(0, 0);
  }
  const krein::Matrix BD = B * D;
  Eigen::PartialPivLU<krein::Matrix> lu(BD + A);
  res.condition = krein::detail::pair_condition(BD, A, lu);
  if (!(res.condition <= options.max_condition))
    throw NumericalError(ErrorKind::near_singular,
                         "B D + A has condition estimate " + std::to_string(res.condition));
  res.charges = lu.solve(B * at_center);
  for (int c = 0; c < 2; ++c) {
    if (res.charges(c) == cplx{})
      continue;
    for (std::size_t i = 0; i < modes.size(); ++i)
      (*out[c])[i] += res.charges(c) * std::conj(center[i]) / (modes[i].eigenvalue + zs[c]);
  }
  return res;
}

} // namespace deltaball::dynamics
