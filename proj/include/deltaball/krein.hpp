#pragma once
//
// N-center point interactions in the ball, parametrized by a pair (A, B):
// a function psi = phi^z + sum_j q_j G^{z,j} is in the domain when
//
//   A q = B (phi^z(x_k) - sum_j Gamma_kj(z) q_j)_k
//
// with the Krein matrix
//
//   Gamma_kk(z) = h_{z,k}(x_k) + sqrt(z)/(4 pi),   Gamma_kj(z) = -G^{z}(x_k; x_j).
//
// The resolvent then reads
//
//   R^{AB}_z phi = R_z phi + sum_j q_j G^{z,j},  q = (B Gamma(z) + A)^{-1} B [R_z phi(x_k)]_k.
//
// Spectral parameter convention: R_z = (H + z)^{-1}, so a physical energy E
// corresponds to z = -E.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "deltaball/ball_laplacian.hpp"
#include "deltaball/errors.hpp"
#include "deltaball/green.hpp"

namespace deltaball::krein {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPairTolerance = 1e-12;
inline constexpr double kMaxCondition = 1e10;

/// Interaction centers with their boundary-condition pair.
struct ExtensionSpec {
  std::vector<Point3> centers;
  Matrix A;
  Matrix B;

  std::size_t size() const { return centers.size(); }

  /// Local extension: A = diag(alpha), B = I.
  static ExtensionSpec local(std::vector<Point3> centers, std::span<const double> alphas) {
    if (centers.size() != alphas.size())
      throw std::invalid_argument("ExtensionSpec::local: one strength per center");
    const auto n = static_cast<Eigen::Index>(centers.size());
    ExtensionSpec spec{std::move(centers), Matrix::Zero(n, n), Matrix::Identity(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
      spec.A(i, i) = alphas[static_cast<std::size_t>(i)];
    return spec;
  }
};

struct PairReport {
  bool ok = false;
  bool hermitian_product = false; // A B^* = B A^*
  bool maximal_rank = false;      // rank (A B) = N
  double product_defect = 0.0;    // max |A B^* - B A^*|
  Eigen::Index rank = 0;
  std::string message;
};

/// Checks the two conditions that make (A, B) define a selfadjoint extension.
inline PairReport validate_pair(const Matrix &A, const Matrix &B, double tol = kPairTolerance) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw std::invalid_argument("validate_pair: A and B must be square of equal size");
  PairReport report;
  const Eigen::Index n = A.rows();
  const Matrix defect = A * B.adjoint() - B * A.adjoint();
  report.product_defect = n == 0 ? 0.0 : defect.cwiseAbs().maxCoeff();
  const double scale = std::max({1.0, n == 0 ? 0.0 : A.cwiseAbs().maxCoeff(),
                                 n == 0 ? 0.0 : B.cwiseAbs().maxCoeff()});
  report.hermitian_product = report.product_defect <= tol * scale * scale;

  Matrix block(n, 2 * n);
  block << A, B;
  if (n > 0) {
    Eigen::JacobiSVD<Matrix> svd(block);
    const auto &sv = svd.singularValues();
    const double cut = tol * std::max(1.0, sv(0));
    report.rank = (sv.array() > cut).count();
  }
  report.maximal_rank = report.rank == n;
  report.ok = report.hermitian_product && report.maximal_rank;

  std::ostringstream msg;
  if (!report.hermitian_product)
    msg << "A B* != B A* (defect " << report.product_defect << "); ";
  if (!report.maximal_rank)
    msg << "rank (A B) = " << report.rank << " < " << n;
  report.message = report.ok ? "ok" : msg.str();
  return report;
}

/// Throws std::invalid_argument unless `spec` is usable in `domain`.
inline void validate_spec(const BallDomain &domain, const ExtensionSpec &spec) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  if (n == 0)
    throw std::invalid_argument("ExtensionSpec: no centers");
  if (spec.A.rows() != n || spec.B.rows() != n)
    throw std::invalid_argument("ExtensionSpec: matrix size does not match center count");
  const auto report = validate_pair(spec.A, spec.B);
  if (!report.ok)
    throw std::invalid_argument("ExtensionSpec: " + report.message);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!(spec.centers[i].norm() < green::kSourceMargin * domain.radius))
      throw NumericalError(ErrorKind::point_outside_domain,
                           "center " + std::to_string(i) + " not within 0.95 R");
    for (std::size_t j = 0; j < i; ++j)
      if ((spec.centers[i] - spec.centers[j]).norm() == 0.0)
        throw NumericalError(ErrorKind::coincident_points, "centers must be distinct");
  }
}

struct KreinMatrix {
  cplx z;
  Matrix entries;
  double tolerance = kDefaultTolerance;

  /// max |Gamma_kj - Gamma_jk|.
  double asymmetry() const {
    return entries.size() == 0 ? 0.0 : (entries - entries.transpose()).cwiseAbs().maxCoeff();
  }
};

/// Gamma(z) from the closed-form / separated Green's function.
inline KreinMatrix gamma_matrix(const BallDomain &domain, const ExtensionSpec &spec, cplx z) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  const cplx s = specfun::spectral_sqrt(z);
  KreinMatrix g{z, Matrix(n, n), domain.tol};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto &xk = spec.centers[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto &xj = spec.centers[static_cast<std::size_t>(j)];
      g.entries(k, j) = k == j ? green::h_offcenter(domain, z, xk, xk) + s / (4.0 * pi)
                               : -green::green_eval(domain, z, xj, xk);
    }
  }
  return g;
}

enum class GammaEvaluation {
  exact,   // closed form / separated expansion, independent of the catalog cutoff
  catalog, // Gamma(z_ref) plus the catalog sum for Gamma(z) - Gamma(z_ref)
};

struct ResolventOptions {
  GammaEvaluation gamma = GammaEvaluation::exact;
  cplx reference = 1.0; // z_ref for GammaEvaluation::catalog
  double max_condition = kMaxCondition;
};

namespace detail {

// Condition of B Gamma + A measured against its two summands, so cancellation
// is caught even for N = 1 where the LU estimate alone is always 1:
// (|B Gamma|_1 + |A|_1) |(B Gamma + A)^{-1}|_1.
inline double pair_condition(const Matrix &bg, const Matrix &a,
                             const Eigen::PartialPivLU<Matrix> &lu) {
  const auto norm1 = [](const Matrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
  };
  const double m1 = norm1(bg + a);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || !(m1 > 0.0))
    return std::numeric_limits<double>::infinity();
  return (norm1(bg) + norm1(a)) / (m1 * rcond);
}

inline std::vector<ModeCoefficients> center_values(const ModeCatalog &catalog,
                                                   const ExtensionSpec &spec) {
  std::vector<ModeCoefficients> vals;
  vals.reserve(spec.size());
  for (const auto &x : spec.centers)
    vals.push_back(catalog.values_at(x));
  return vals;
}

} // namespace detail

/// Gamma(z) = Gamma(w) + (z - w) sum_i psi_i(x_k) conj(psi_i(x_j)) / ((lambda_i + z)(lambda_i + w)),
/// with the sum restricted to the catalog. This is the Krein matrix of the
/// cutoff problem, for which the resolvent identities hold exactly.
inline KreinMatrix catalog_gamma_matrix(const ModeCatalog &catalog, const ExtensionSpec &spec,
                                        cplx z, cplx reference) {
  KreinMatrix g = gamma_matrix(catalog.domain(), spec, reference);
  g.z = z;
  if (z == reference)
    return g;
  const auto vals = detail::center_values(catalog, spec);
  const auto modes = catalog.modes();
  const auto n = static_cast<Eigen::Index>(spec.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto &vk = vals[static_cast<std::size_t>(k)];
      const auto &vj = vals[static_cast<std::size_t>(j)];
      cplx sum{};
      for (std::size_t i = 0; i < modes.size(); ++i) {
        const double lam = modes[i].eigenvalue;
        sum += vk[i] * std::conj(vj[i]) / ((lam + z) * (lam + reference));
      }
      g.entries(k, j) += (z - reference) * sum;
    }
  }
  return g;
}

struct KreinResult {
  ModeCoefficients result;
  Vector charges;
  KreinMatrix gamma;
  double condition = 0.0; // see detail::pair_condition
};

/// R^{AB}_z phi on mode coefficients.
inline KreinResult krein_resolvent_apply(const ModeCatalog &catalog, const ExtensionSpec &spec,
                                         cplx z, std::span<const cplx> phi,
                                         const ResolventOptions &options = {}) {
  validate_spec(catalog.domain(), spec);
  ModeCoefficients free = free_resolvent_apply(catalog, z, phi);
  const auto vals = detail::center_values(catalog, spec);
  const auto n = static_cast<Eigen::Index>(spec.size());

  Vector at_centers(n);
  for (Eigen::Index k = 0; k < n; ++k)
    at_centers(k) = evaluate_series(free, vals[static_cast<std::size_t>(k)]);

  KreinMatrix gamma = options.gamma == GammaEvaluation::exact
                          ? gamma_matrix(catalog.domain(), spec, z)
                          : catalog_gamma_matrix(catalog, spec, z, options.reference);
  const Matrix BG = spec.B * gamma.entries;
  Eigen::PartialPivLU<Matrix> lu(BG + spec.A);
  const double condition = detail::pair_condition(BG, spec.A, lu);
  if (!(condition <= options.max_condition))
    throw NumericalError(ErrorKind::near_singular,
                         "B Gamma(z) + A has condition estimate " + std::to_string(condition) +
                             "; -z is close to the spectrum of the extension");
  const Vector q = lu.solve(spec.B * at_centers);

  const auto modes = catalog.modes();
  ModeCoefficients out = std::move(free);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (q(j) == cplx{})
      continue;
    const auto &vj = vals[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < modes.size(); ++i)
      out[i] += q(j) * std::conj(vj[i]) / (modes[i].eigenvalue + z);
  }
  return {std::move(out), q, std::move(gamma), condition};
}

/// Condition estimate of B Gamma(z) + A; dips toward zero reciprocal signal
/// points of the extension's spectrum. Diagnostic only.
inline double krein_condition(const BallDomain &domain, const ExtensionSpec &spec, cplx z) {
  const auto gamma = gamma_matrix(domain, spec, z);
  const Matrix BG = spec.B * gamma.entries;
  Eigen::PartialPivLU<Matrix> lu(BG + spec.A);
  return detail::pair_condition(BG, spec.A, lu);
}

struct ResolventCheck {
  double regular_residual = 0.0;  // max_i |(lambda_i + z) phi^z_i - phi_i|
  double boundary_residual = 0.0; // max_k |(B (phi^z(x) - Gamma q) - A q)_k|
};

/// Splits R^{AB}_z phi back into regular part and charges and checks
/// (H^{AB} + z) R^{AB}_z phi = phi together with the boundary relation.
inline ResolventCheck verify_resolvent(const ModeCatalog &catalog, const ExtensionSpec &spec,
                                       cplx z, std::span<const cplx> phi,
                                       const KreinResult &res) {
  const auto vals = detail::center_values(catalog, spec);
  const auto modes = catalog.modes();
  const auto n = static_cast<Eigen::Index>(spec.size());
  ModeCoefficients regular(res.result);
  for (Eigen::Index j = 0; j < n; ++j)
    for (std::size_t i = 0; i < modes.size(); ++i)
      regular[i] -= res.charges(j) * std::conj(vals[static_cast<std::size_t>(j)][i]) /
                    (modes[i].eigenvalue + z);

  ResolventCheck check;
  for (std::size_t i = 0; i < modes.size(); ++i)
    check.regular_residual =
        std::max(check.regular_residual, std::abs((modes[i].eigenvalue + z) * regular[i] - phi[i]));

  Vector at_centers(n);
  for (Eigen::Index k = 0; k < n; ++k)
    at_centers(k) = evaluate_series(regular, vals[static_cast<std::size_t>(k)]);
  const Vector bc = spec.B * (at_centers - res.gamma.entries * res.charges) - spec.A * res.charges;
  check.boundary_residual = n == 0 ? 0.0 : bc.cwiseAbs().maxCoeff();
  return check;
}

} // namespace deltaball::krein
