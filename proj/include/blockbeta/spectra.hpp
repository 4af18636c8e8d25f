#pragma once

// Eigendecomposition with top-row spectral data, matrix-valued spectral
// measure moments, and the determinant identity linking off-diagonal blocks
// to eigenvector weights.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "blockbeta/ensembles.hpp"

namespace blockbeta {

// Sorted eigenvalues plus the first r rows of the normalized eigenvector
// matrix, columns aligned with the eigenvalues.
template <class Scalar>
struct SpectralData {
  int r = 1;
  Eigen::VectorXd eigenvalues;
  MatrixX<Scalar> top_rows;  // r x dim
};

// Full decomposition keeping only the leading r eigenvector coordinates.
// Each eigenvector's first nonvanishing coordinate is made real positive.
template <class Scalar>
SpectralData<Scalar> eigh_banded(const MatrixX<Scalar>& m, int r) {
  const int d = int(m.rows());
  if (m.cols() != d || r < 1 || d % r != 0) throw std::invalid_argument("eigh_banded: bad shape");
  if ((m - m.adjoint()).norm() > 1e-10 * std::max(1.0, m.norm()))
    throw std::domain_error("eigh_banded: input not hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh_banded: solver failed");
  SpectralData<Scalar> sd;
  sd.r = r;
  sd.eigenvalues = es.eigenvalues();
  MatrixX<Scalar> v = es.eigenvectors();
  for (int j = 0; j < d; ++j) {
    int lead = 0;
    while (lead < d - 1 && std::abs(std::complex<double>(v(lead, j))) < 1e-12) ++lead;
    if constexpr (scalar_field<Scalar>::beta == 1) {
      if (v(lead, j) < 0) v.col(j) = -v.col(j);
    } else {
      std::complex<double> pivot(v(lead, j));
      double mag = std::abs(pivot);
      if (mag > 0) v.col(j) *= Scalar(mag) / Scalar(pivot);
    }
  }
  sd.top_rows = v.topRows(r);
  return sd;
}

template <class Scalar>
SpectralData<Scalar> eigh_banded(const BlockJacobi<Scalar>& t) {
  return eigh_banded<Scalar>(t.dense(), t.r);
}

// j-th moment of the matrix spectral measure: sum_k lambda_k^j q_k q_k^*.
template <class Scalar>
std::vector<MatrixX<Scalar>> spectral_measure_moments(const SpectralData<Scalar>& sd, int jmax) {
  if (jmax < 0) throw std::invalid_argument("spectral_measure_moments: jmax < 0");
  const int r = sd.r, d = int(sd.eigenvalues.size());
  std::vector<MatrixX<Scalar>> out;
  Eigen::VectorXd pw = Eigen::VectorXd::Ones(d);
  for (int j = 0; j <= jmax; ++j) {
    MatrixX<Scalar> mom = MatrixX<Scalar>::Zero(r, r);
    for (int k = 0; k < d; ++k)
      mom += pw(k) * (sd.top_rows.col(k) * sd.top_rows.col(k).adjoint());
    out.push_back(std::move(mom));
    pw = pw.cwiseProduct(sd.eigenvalues);
  }
  return out;
}

// Interleaved power matrix over floating scalars: column j of M carries
// lambda^{floor(j/r)} times row (j mod r) of X.
template <class Scalar>
MatrixX<Scalar> build_M_dense(const Eigen::VectorXd& lam, const MatrixX<Scalar>& x) {
  const int r = int(x.rows()), d = int(lam.size());
  if (int(x.cols()) != d || d % r != 0) throw std::invalid_argument("build_M_dense: bad shape");
  MatrixX<Scalar> m(d, d);
  for (int i = 0; i < d; ++i) {
    double pw = 1;
    for (int j = 0; j < d; ++j) {
      if (j > 0 && j % r == 0) pw *= lam(i);
      m(i, j) = Scalar(pw) * x(j % r, i);
    }
  }
  return m;
}

template <class Scalar>
struct MagicIdentityResult {
  double residual = 0;   // |lhs - rhs| / lhs, computed in log scale
  bool skipped = false;  // true when the eigenvalue gap guard tripped
  double min_gap = 0;
  double log_lhs = 0, log_rhs = 0;
};

// prod_j det(B_j)^{n-j} versus |det M(lambda, Q)| with Q the top rows of the
// eigenvector matrix. Draws with nearly coincident eigenvalues are reported
// as skipped instead of contributing an ill-conditioned residual.
template <class Scalar>
MagicIdentityResult<Scalar> verify_magic_identity(const BlockJacobi<Scalar>& t,
                                                  double gap_guard = 1e-6) {
  const int n = t.n_blocks(), r = t.r;
  SpectralData<Scalar> sd = eigh_banded(t);
  MagicIdentityResult<Scalar> res;
  res.min_gap = n * r > 1 ? (sd.eigenvalues.tail(n * r - 1) - sd.eigenvalues.head(n * r - 1)).minCoeff()
                          : std::numeric_limits<double>::infinity();
  if (res.min_gap < gap_guard) {
    res.skipped = true;
    return res;
  }
  double log_lhs = 0;
  for (int k = 0; k + 1 < n; ++k) {
    const auto& b = t.offdiag_blocks[std::size_t(k)];
    for (int i = 0; i < r; ++i)
      log_lhs += double(n - 1 - k) * std::log(std::abs(std::complex<double>(b(i, i))));
  }
  MatrixX<Scalar> m = build_M_dense(sd.eigenvalues, sd.top_rows);
  Eigen::PartialPivLU<MatrixX<Scalar>> lu(m);
  double log_rhs = 0;
  for (int i = 0; i < n * r; ++i)
    log_rhs += std::log(std::abs(std::complex<double>(lu.matrixLU()(i, i))));
  res.log_lhs = log_lhs;
  res.log_rhs = log_rhs;
  res.residual = std::abs(std::expm1(log_rhs - log_lhs));
  return res;
}

}  // namespace blockbeta
