#include "eis/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include <nlohmann/json.hpp>

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSingularCondition = 1e14;
const double kSqrt2 = std::sqrt(2.0);

ParamMatrix contribution_impl(const EcmParams& theta, double omega,
                              const NoiseModel& model, Coordinates coords,
                              bool include_trace_term) {
  const double f_hz = omega / (2.0 * kPi);
  const PolarJet jet = polar_jet(theta, omega);
  const double eps_r = model.eps_rho(f_hz, jet.rho);

  if (coords == Coordinates::polar) {
    const double sr = jet.rho * eps_r / 3.0;
    const double sp = model.eps_phi() / 3.0;
    ParamMatrix out = jet.d_rho * jet.d_rho.transpose() / (sr * sr) +
                      jet.d_phi * jet.d_phi.transpose() / (sp * sp);
    if (include_trace_term) {
      // Q11 = (rho eps/3)^2, so dQ11/dθ = 2 Q11 drho/rho and the trace term
      // collapses to 2 drho_k drho_l / rho^2.
      out += 2.0 * jet.d_rho * jet.d_rho.transpose() / (jet.rho * jet.rho);
    }
    return out;
  }

  const ModelJacobian mj = z_eq_jacobian(theta, omega);
  const CovBlockDerivs cd =
      cov_cartesian_true_derivs(jet.rho, jet.phi, eps_r, model.eps_phi());
  const Eigen::Matrix2d qinv = cd.value.matrix().inverse();
  ParamMatrix out = mj.transpose() * qinv * mj;
  if (include_trace_term) {
    // dQ/dθ_k = dQ/drho * drho_k + dQ/dphi * dphi_k, all through (rho, phi).
    const Eigen::Matrix2d a_rho = qinv * cd.d_rho.matrix();
    const Eigen::Matrix2d a_phi = qinv * cd.d_phi.matrix();
    for (int k = 0; k < kNumParams; ++k) {
      const Eigen::Matrix2d ak = a_rho * jet.d_rho(k) + a_phi * jet.d_phi(k);
      for (int l = k; l < kNumParams; ++l) {
        const Eigen::Matrix2d al = a_rho * jet.d_rho(l) + a_phi * jet.d_phi(l);
        const double t = 0.5 * (ak * al).trace();
        out(k, l) += t;
        if (l != k) out(l, k) += t;
      }
    }
  }
  return out;
}

// Square-root factor G with F = G^T G: the information matrix is a Gram
// matrix of per-point whitened Jacobian rows plus trace-term rows, so the
// smallest eigenvalue is sigma_min(G)^2. Working on the factor keeps the
// small eigenvalues accurate at the ~1e14 condition numbers of this model,
// where a dense eigensolve of F only resolves them to eps * lambda_max.
Eigen::MatrixXd sqrt_factor(const EcmParams& theta, const FrequencyGrid& grid,
                            const NoiseModel& model, Coordinates coords,
                            bool include_trace_term) {
  const int n = grid.size();
  const int rows_per_point =
      (coords == Coordinates::polar) ? (include_trace_term ? 3 : 2)
                                     : (include_trace_term ? 5 : 2);
  Eigen::MatrixXd g(rows_per_point * n, kNumParams);
  for (int i = 0; i < n; ++i) {
    const double omega = grid.omegas[i];
    const double f_hz = omega / (2.0 * kPi);
    const PolarJet jet = polar_jet(theta, omega);
    const double eps_r = model.eps_rho(f_hz, jet.rho);
    int r = rows_per_point * i;
    if (coords == Coordinates::polar) {
      const double sr = jet.rho * eps_r / 3.0;
      const double sp = model.eps_phi() / 3.0;
      g.row(r++) = jet.d_rho.transpose() / sr;
      g.row(r++) = jet.d_phi.transpose() / sp;
      if (include_trace_term) {
        g.row(r++) = kSqrt2 * jet.d_rho.transpose() / jet.rho;
      }
    } else {
      const ModelJacobian mj = z_eq_jacobian(theta, omega);
      const CovBlockDerivs cd =
          cov_cartesian_true_derivs(jet.rho, jet.phi, eps_r, model.eps_phi());
      // Whitening via the symmetric inverse square root of the 2x2 block.
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cd.value.matrix());
      const Eigen::Matrix2d qih =
          es.eigenvectors() *
          es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
          es.eigenvectors().transpose();
      g.block(r, 0, 2, kNumParams) = qih * mj;
      r += 2;
      if (include_trace_term) {
        // 1/2 tr(M_k M_l) with M_k = Q^{-1/2} dQ_k Q^{-1/2} is the Gram
        // product of the rows (m11/sqrt2, m12, m22/sqrt2).
        const Eigen::Matrix2d m_rho = qih * cd.d_rho.matrix() * qih;
        const Eigen::Matrix2d m_phi = qih * cd.d_phi.matrix() * qih;
        for (int k = 0; k < kNumParams; ++k) {
          const double a = jet.d_rho(k);
          const double b = jet.d_phi(k);
          g(r, k) = (a * m_rho(0, 0) + b * m_phi(0, 0)) / kSqrt2;
          g(r + 1, k) = a * m_rho(0, 1) + b * m_phi(0, 1);
          g(r + 2, k) = (a * m_rho(1, 1) + b * m_phi(1, 1)) / kSqrt2;
        }
        r += 3;
      }
    }
  }
  return g;
}

}  // namespace

ParamMatrix fim_contribution(const EcmParams& theta, double omega,
                             const NoiseModel& model, Coordinates coords,
                             bool include_trace_term) {
  return contribution_impl(theta, omega, model, coords, include_trace_term);
}

CrlbReport fim(const EcmParams& theta, const FrequencyGrid& grid,
               const NoiseModel& model, Coordinates coords) {
  CrlbReport rep;
  rep.coords = coords;
  rep.eval_point = theta;
  // Property-1 assembly of the matrix itself.
  rep.fim = ParamMatrix::Zero();
  for (double omega : grid.omegas) {
    rep.fim += contribution_impl(theta, omega, model, coords, true);
  }

  const Eigen::MatrixXd g = sqrt_factor(theta, grid, model, coords, true);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();  // descending, min(rows, 10) long
  const int nsv = static_cast<int>(sv.size());
  for (int i = 0; i < kNumParams; ++i) {
    const int from_top = kNumParams - 1 - i;
    rep.eigenvalues(i) = from_top < nsv ? sv(from_top) * sv(from_top) : 0.0;
  }
  const double lmax = rep.eigenvalues(kNumParams - 1);
  const double lmin = rep.eigenvalues(0);
  rep.condition = lmin > 0 ? lmax / lmin : INFINITY;
  rep.singular = !(rep.condition < kSingularCondition);

  // Inverse through the factor's right singular vectors; directions with
  // vanishing singular values are dropped (pseudo-inverse) and flagged.
  const Eigen::MatrixXd& v = svd.matrixV();
  const double cutoff = lmax * 1e-18;
  Eigen::VectorXd inv_ev(nsv);
  if (nsv < kNumParams) rep.singular = true;
  for (int j = 0; j < nsv; ++j) {
    const double l = sv(j) * sv(j);
    inv_ev(j) = l > cutoff ? 1.0 / l : 0.0;
    if (l <= cutoff) rep.singular = true;
  }
  rep.fim_inverse = v * inv_ev.asDiagonal() * v.transpose();
  rep.crlb = rep.fim_inverse.diagonal();

  const Eigen::MatrixXd g0 = sqrt_factor(theta, grid, model, coords, false);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd0(g0, Eigen::ComputeThinV);
  const auto& sv0 = svd0.singularValues();
  Eigen::VectorXd inv0(sv0.size());
  for (int j = 0; j < sv0.size(); ++j) {
    const double l = sv0(j) * sv0(j);
    inv0(j) = l > cutoff ? 1.0 / l : 0.0;
  }
  rep.crlb_gauss =
      (svd0.matrixV() * inv0.asDiagonal() * svd0.matrixV().transpose())
          .diagonal();

  if (lmin > 0) {
    std::vector<double> ev(rep.eigenvalues.data(),
                           rep.eigenvalues.data() + kNumParams);
    rep.log_ellipsoid_volume = log_ellipsoid_volume(ev);
    rep.ellipsoid_volume = ellipsoid_volume(ev);
  } else {
    rep.log_ellipsoid_volume = INFINITY;
    rep.ellipsoid_volume = INFINITY;
  }
  return rep;
}

double log_ellipsoid_volume(const std::vector<double>& eigenvalues) {
  const double m = static_cast<double>(eigenvalues.size());
  if (m < 1) throw ArgumentError("empty eigenvalue list");
  double sum_log = 0;
  for (double l : eigenvalues) {
    if (!(l > 0)) throw DomainError("ellipsoid volume needs eigenvalues > 0");
    sum_log += std::log(l);
  }
  return std::log(2.0 / m) + (m / 2.0) * std::log(kPi) - std::lgamma(m / 2.0) -
         0.5 * sum_log;
}

double ellipsoid_volume(const std::vector<double>& eigenvalues) {
  return std::exp(log_ellipsoid_volume(eigenvalues));
}

double fim_min_eigenvalue(const EcmParams& theta, const FrequencyGrid& grid,
                          const NoiseModel& model, Coordinates coords) {
  const Eigen::MatrixXd g = sqrt_factor(theta, grid, model, coords, true);
  if (g.rows() < kNumParams) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const double s = svd.singularValues()(kNumParams - 1);
  return s * s;
}

std::string CrlbReport::to_json() const {
  nlohmann::json j;
  double t[kNumParams];
  eval_point.to_array(t);
  for (int i = 0; i < kNumParams; ++i) {
    const char* name = EcmParams::names()[i];
    j["eval_point"][name] = t[i];
    j["crlb"][name] = crlb(i);
    j["crlb_no_trace_term"][name] = crlb_gauss(i);
  }
  j["crlb_vector"] = std::vector<double>(crlb.data(), crlb.data() + kNumParams);
  j["eigenvalues"] =
      std::vector<double>(eigenvalues.data(), eigenvalues.data() + kNumParams);
  j["ellipsoid_volume"] = ellipsoid_volume;
  j["log_ellipsoid_volume"] = log_ellipsoid_volume;
  j["condition"] = condition;
  j["singular"] = singular;
  j["coordinates"] = to_string(coords);
  for (int r = 0; r < kNumParams; ++r) {
    for (int c = 0; c < kNumParams; ++c) {
      j["fim"][r][c] = fim(r, c);
      j["fim_inverse"][r][c] = fim_inverse(r, c);
    }
  }
  return j.dump(2);
}

}  // namespace eis
