#pragma once

// Block tridiagonal matrix ensembles: the biased Hermite-type block Jacobi
// family, the Wishart-type block bidiagonal family, and block Householder
// reduction to banded form.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "blockbeta/randcore.hpp"

namespace blockbeta {

struct EnsembleParams {
  int beta = 1;   // 1 real, 2 complex
  int n = 1;      // block rows
  int r = 1;      // block size
  double s = 0;   // bias parameter
  std::optional<double> m;  // Wishart-type parameter

  void validate_common() const {
    if (beta != 1 && beta != 2) throw std::domain_error("params: beta must be 1 or 2");
    if (n < 1 || r < 1) throw std::domain_error("params: need n >= 1, r >= 1");
    if (s < 0) throw std::domain_error("params: need s >= 0");
  }
  // every chi dof in the bidiagonal factor must be positive
  double laguerre_m_bound() const { return n - 1 + double(r - 1) / double(r + s); }
  void validate_laguerre() const {
    validate_common();
    if (!m) throw std::domain_error("params: Wishart-type family needs m");
    if (!(*m > laguerre_m_bound()))
      throw std::domain_error("params: need m > n-1+(r-1)/(r+s)");
  }
};

// Hermitian block tridiagonal matrix. B_k sits above the diagonal and is
// lower triangular with positive diagonal; its adjoint sits below.
template <class Scalar>
struct BlockJacobi {
  int r = 1;
  std::vector<MatrixX<Scalar>> diag_blocks;     // A_1..A_n
  std::vector<MatrixX<Scalar>> offdiag_blocks;  // B_1..B_{n-1}

  int n_blocks() const { return int(diag_blocks.size()); }
  int dim() const { return r * n_blocks(); }

  MatrixX<Scalar> dense() const {
    const int n = n_blocks(), d = dim();
    MatrixX<Scalar> t = MatrixX<Scalar>::Zero(d, d);
    for (int k = 0; k < n; ++k) t.block(k * r, k * r, r, r) = diag_blocks[std::size_t(k)];
    for (int k = 0; k + 1 < n; ++k) {
      t.block(k * r, (k + 1) * r, r, r) = offdiag_blocks[std::size_t(k)];
      t.block((k + 1) * r, k * r, r, r) = offdiag_blocks[std::size_t(k)].adjoint();
    }
    return t;
  }
};

// Block bidiagonal factor L. Diagonal blocks D_i are upper triangular (their
// adjoints are the lower triangular square-root Wishart draws); the blocks
// O_i on the superdiagonal are lower triangular.
template <class Scalar>
struct BlockBidiagonal {
  int r = 1, n = 1;
  std::vector<MatrixX<Scalar>> diag_blocks;     // D_1..D_n
  std::vector<MatrixX<Scalar>> offdiag_blocks;  // O_1..O_{n-1}

  int dim() const { return r * n; }

  MatrixX<Scalar> dense() const {
    const int d = dim();
    MatrixX<Scalar> l = MatrixX<Scalar>::Zero(d, d);
    for (int k = 0; k < n; ++k) l.block(k * r, k * r, r, r) = diag_blocks[std::size_t(k)];
    for (int k = 0; k + 1 < n; ++k)
      l.block(k * r, (k + 1) * r, r, r) = offdiag_blocks[std::size_t(k)];
    return l;
  }
};

// Gaussian-type family: A_k standard hermitian Gaussian blocks, B_k
// square-root Wishart with parameter (r+s)(n-k).
template <class Scalar>
BlockJacobi<Scalar> sample_hermite(const EnsembleParams& p, RngStream& rng) {
  p.validate_common();
  if (scalar_field<Scalar>::beta != p.beta)
    throw std::domain_error("sample_hermite: scalar type does not match params.beta");
  BlockJacobi<Scalar> t;
  t.r = p.r;
  for (int k = 1; k <= p.n; ++k) t.diag_blocks.push_back(sample_gfe<Scalar>(p.r, rng));
  for (int k = 1; k <= p.n - 1; ++k)
    t.offdiag_blocks.push_back(sample_sqw<Scalar>(p.r, (p.r + p.s) * (p.n - k), rng));
  return t;
}

// Wishart-type family: returns the bidiagonal factor and W = L L^*.
template <class Scalar>
std::pair<BlockBidiagonal<Scalar>, MatrixX<Scalar>> sample_laguerre(const EnsembleParams& p,
                                                                    RngStream& rng) {
  p.validate_laguerre();
  if (scalar_field<Scalar>::beta != p.beta)
    throw std::domain_error("sample_laguerre: scalar type does not match params.beta");
  BlockBidiagonal<Scalar> l;
  l.r = p.r;
  l.n = p.n;
  const double m = *p.m;
  for (int i = 1; i <= p.n; ++i)
    l.diag_blocks.push_back(sample_sqw<Scalar>(p.r, (p.r + p.s) * (m + 1 - i), rng).adjoint());
  for (int i = 1; i <= p.n - 1; ++i)
    l.offdiag_blocks.push_back(sample_sqw<Scalar>(p.r, (p.r + p.s) * (p.n - i), rng));
  MatrixX<Scalar> ld = l.dense();
  MatrixX<Scalar> w = ld * ld.adjoint();
  return {std::move(l), std::move(w)};
}

// Scalar tridiagonal model for arbitrary beta > 0: diagonal N(0, 2/beta),
// off-diagonal chi_{beta(n-k)}/sqrt(beta).
inline BlockJacobi<double> sample_tridiagonal_beta(int n, double beta, RngStream& rng) {
  if (n < 1 || !(beta > 0)) throw std::domain_error("sample_tridiagonal_beta: bad params");
  BlockJacobi<double> t;
  t.r = 1;
  for (int k = 1; k <= n; ++k) {
    MatrixX<double> a(1, 1);
    a(0, 0) = rng.normal() * std::sqrt(2.0 / beta);
    t.diag_blocks.push_back(a);
  }
  for (int k = 1; k <= n - 1; ++k) {
    MatrixX<double> b(1, 1);
    b(0, 0) = sample_chi(beta * (n - k), rng) / std::sqrt(beta);
    t.offdiag_blocks.push_back(b);
  }
  return t;
}

// Scalar bidiagonal Wishart-type factor for arbitrary beta > 0; returns the
// tridiagonal W = L L^T directly.
inline Eigen::MatrixXd sample_bidiagonal_beta_wishart(int n, double m, double beta,
                                                      RngStream& rng) {
  if (n < 1 || !(beta > 0) || !(m > n - 1))
    throw std::domain_error("sample_bidiagonal_beta_wishart: bad params");
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    l(i, i) = sample_chi(beta * (m - i), rng) / std::sqrt(beta);
    if (i + 1 < n) l(i + 1, i) = sample_chi(beta * (n - 1 - i), rng) / std::sqrt(beta);
  }
  return l * l.transpose();
}

// Block Householder reduction: O^* M O = T with O = I_r (+) O~ and T block
// tridiagonal with lower-triangular positive-diagonal superdiagonal blocks.
template <class Scalar>
std::pair<BlockJacobi<Scalar>, MatrixX<Scalar>> block_householder(const MatrixX<Scalar>& m_in,
                                                                  int r) {
  const int d = int(m_in.rows());
  if (d % r != 0 || m_in.cols() != d) throw std::invalid_argument("block_householder: bad shape");
  const int n = d / r;
  if ((m_in - m_in.adjoint()).norm() > 1e-10 * std::max(1.0, m_in.norm()))
    throw std::domain_error("block_householder: input not hermitian");

  // Krylov condition check on S = [E, ME, ..., M^{n-1}E], E the first r columns of I
  {
    MatrixX<Scalar> s(d, d), col = MatrixX<Scalar>::Identity(d, r);
    for (int j = 0; j < n; ++j) {
      s.block(0, j * r, d, r) = col;
      col = m_in * col;
    }
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(s);
    const auto& sv = svd.singularValues();
    if (sv(d - 1) <= 1e-10 * sv(0)) throw std::runtime_error("Krylov degenerate");
  }

  MatrixX<Scalar> m = m_in;
  MatrixX<Scalar> o = MatrixX<Scalar>::Identity(d, d);
  for (int k = 0; k + 1 < n; ++k) {
    const int top = (k + 1) * r, rest = d - top;
    MatrixX<Scalar> c = m.block(top, k * r, rest, r);
    Eigen::HouseholderQR<MatrixX<Scalar>> qr(c);
    MatrixX<Scalar> q = qr.householderQ();
    MatrixX<Scalar> rr = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (int j = 0; j < r; ++j) {
      Scalar rjj = rr(j, j);
      double mag = std::abs(std::complex<double>(rjj));
      if (mag <= 0) throw std::runtime_error("Krylov degenerate");
      q.col(j) *= Scalar(rjj / Scalar(mag));
    }
    MatrixX<Scalar> u = MatrixX<Scalar>::Identity(d, d);
    u.block(top, top, rest, rest) = q;
    m = (u.adjoint() * m * u).eval();
    o = (o * u).eval();
  }

  BlockJacobi<Scalar> t;
  t.r = r;
  for (int k = 0; k < n; ++k) {
    MatrixX<Scalar> a = m.block(k * r, k * r, r, r);
    t.diag_blocks.push_back(((a + a.adjoint()) / 2.0).eval());
  }
  for (int k = 0; k + 1 < n; ++k) {
    MatrixX<Scalar> b = m.block(k * r, (k + 1) * r, r, r);
    // clean roundoff above the triangle
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) b(i, j) = Scalar(0);
    t.offdiag_blocks.push_back(b);
  }
  return {std::move(t), std::move(o)};
}

}  // namespace blockbeta
