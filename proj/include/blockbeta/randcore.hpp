#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace blockbeta {

// Scalar field selector. beta = 1 for real, 2 for complex.
struct FieldTag {
  int beta;
  explicit FieldTag(int b) : beta(b) {
    if (b != 1 && b != 2) throw std::domain_error("FieldTag: beta must be 1 or 2");
  }
};

template <class Scalar>
struct scalar_field {
  static constexpr int beta = 1;
  using real_type = Scalar;
};
template <class Real>
struct scalar_field<std::complex<Real>> {
  static constexpr int beta = 2;
  using real_type = Real;
};

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Seedable, stream-splittable RNG. Distinct (seed, stream) pairs give
// independent generators; identical pairs reproduce the same sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t x = seed ^ (0xda3e39cb94b95bdbULL * (stream + 1));
    std::uint64_t w[4];
    for (auto& wi : w) wi = detail::splitmix64(x);
    std::seed_seq seq{static_cast<std::uint32_t>(w[0]), static_cast<std::uint32_t>(w[0] >> 32),
                      static_cast<std::uint32_t>(w[1]), static_cast<std::uint32_t>(w[1] >> 32),
                      static_cast<std::uint32_t>(w[2]), static_cast<std::uint32_t>(w[2] >> 32),
                      static_cast<std::uint32_t>(w[3]), static_cast<std::uint32_t>(w[3] >> 32)};
    gen_.seed(seq);
  }

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  RngStream substream(std::uint64_t k) const {
    return RngStream(seed_, stream_ * 0x100000000ULL + k + 1);
  }

  std::mt19937_64& gen() { return gen_; }

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(gen_);
  }
  std::uint64_t bits() { return gen_(); }

 private:
  std::uint64_t seed_, stream_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Standard field Gaussian: each real component has variance 1/beta, E|x|^2 = 1.
template <class Scalar>
Scalar sample_fnormal(RngStream& rng) {
  if constexpr (scalar_field<Scalar>::beta == 1) {
    return rng.normal();
  } else {
    const double s = 1.0 / std::sqrt(2.0);
    double re = rng.normal(), im = rng.normal();
    return Scalar(re * s, im * s);
  }
}

// chi_k sample for real k > 0, via chi_k^2 = 2 Gamma(k/2, 1).
inline double sample_chi(double dof, RngStream& rng) {
  if (!(dof > 0)) throw std::domain_error("sample_chi: dof must be positive");
  return std::sqrt(2.0 * rng.gamma(dof / 2.0));
}

// Gaussian field ensemble: X = (Y + Y^*)/sqrt(2) with iid standard entries in Y.
// Diagonal ~ N(0, 2/beta) real, off-diagonal standard field Gaussians.
template <class Scalar>
MatrixX<Scalar> sample_gfe(int r, RngStream& rng) {
  if (r < 1) throw std::domain_error("sample_gfe: r must be >= 1");
  MatrixX<Scalar> y(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) y(i, j) = sample_fnormal<Scalar>(rng);
  MatrixX<Scalar> x = (y + y.adjoint()) / std::sqrt(2.0);
  for (int i = 0; i < r; ++i) x(i, i) = Scalar(std::real(std::complex<double>(x(i, i))));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < i; ++j) x(i, j) = Eigen::numext::conj(x(j, i));
  return x;
}

// Haar unitary via QR of an iid Gaussian matrix, R diagonal made positive.
template <class Scalar>
MatrixX<Scalar> sample_haar(int d, RngStream& rng) {
  if (d < 1) throw std::domain_error("sample_haar: d must be >= 1");
  MatrixX<Scalar> a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = sample_fnormal<Scalar>(rng);
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(a);
  MatrixX<Scalar> q = qr.householderQ();
  MatrixX<Scalar> rr = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    Scalar rjj = rr(j, j);
    double m = std::abs(std::complex<double>(rjj));
    Scalar phase = (m > 0) ? Scalar(rjj / Scalar(m)) : Scalar(1);
    q.col(j) *= phase;
  }
  return q;
}

// Square-root Wishart factor: lower triangular, diagonal chi_{beta(m+1-i)}/sqrt(beta),
// strict lower part iid standard field Gaussians.
template <class Scalar>
MatrixX<Scalar> sample_sqw(int r, double m, RngStream& rng) {
  constexpr int beta = scalar_field<Scalar>::beta;
  if (!(m > r - 1)) throw std::domain_error("sample_sqw: need m > r-1");
  MatrixX<Scalar> l = MatrixX<Scalar>::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    double dof = beta * (m - i);
    l(i, i) = Scalar(sample_chi(dof, rng) / std::sqrt(double(beta)));
    for (int j = 0; j < i; ++j) l(i, j) = sample_fnormal<Scalar>(rng);
  }
  return l;
}

}  // namespace blockbeta
