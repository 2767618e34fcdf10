#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "eis/ecm.hpp"

namespace eis {

struct SpdInverse {
  ParamMatrix inverse;
  bool pd = false;
};

// Inverse of a symmetric positive definite matrix. Jacobi equilibration
// keeps the factorization accurate across the very different parameter
// scales; a non-PD input falls back to an eigendecomposition pseudo-inverse.
inline SpdInverse invert_spd(const ParamMatrix& m) {
  SpdInverse out;
  ParamVector s;
  for (int i = 0; i < kNumParams; ++i) {
    const double d = m(i, i);
    s(i) = d > 0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  const ParamMatrix scaled = s.asDiagonal() * m * s.asDiagonal();
  Eigen::LLT<ParamMatrix> llt(scaled);
  if (llt.info() == Eigen::Success) {
    const ParamMatrix inv_scaled =
        llt.solve(ParamMatrix::Identity(kNumParams, kNumParams));
    out.inverse = s.asDiagonal() * inv_scaled * s.asDiagonal();
    out.pd = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ParamMatrix> es(scaled);
  const auto& ev = es.eigenvalues();
  const double cutoff = ev.cwiseAbs().maxCoeff() * 1e-14;
  ParamVector inv_ev;
  for (int i = 0; i < kNumParams; ++i) {
    inv_ev(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
  }
  const ParamMatrix inv_scaled =
      es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
  out.inverse = s.asDiagonal() * inv_scaled * s.asDiagonal();
  out.pd = false;
  return out;
}

}  // namespace eis
