#pragma once

// Edge scaling limits: soft-edge rescaling and potential sums, the coupled
// Airy-type and Bessel-type particle diffusions with explosion and
// zero-crossing counting, discretized stochastic operators, and a
// density-of-states check against the semicircle law.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "blockbeta/ensembles.hpp"
#include "blockbeta/stats.hpp"

namespace blockbeta {

struct SoftEdgeConfig {
  int r = 1;
  double beta = 2;    // diffusion parameter only; infinity turns the noise off
  double gamma = 1;   // (r+s)/r
  double lambda = 0;  // spectral parameter
  double dx = 1e-3;
  double x_max = 0;   // 0: choose 10 + 2 sqrt(|lambda|)
  double p_max = 1e4;
  long n_paths = 1000;

  void validate() const {
    if (r < 1 || !(beta > 0) || !(gamma > 0) || !(dx > 0) || !(p_max >= 1e3) || n_paths < 1)
      throw std::domain_error("SoftEdgeConfig: invalid parameters");
  }
  double horizon() const { return x_max > 0 ? x_max : 10.0 + 2.0 * std::sqrt(std::abs(lambda)); }
};

struct HardEdgeConfig {
  int r = 1;
  double beta = 2;
  double gamma = 1;
  double a = 0;  // hard edge exponent, > -1
  double lambda = 1;
  double dx = 1e-3;
  double x_max = 0;  // 0: choose so that lambda e^{-r x_max} < 1e-4
  double q_max = 1e4;
  long n_paths = 1000;

  void validate() const {
    if (r < 1 || !(beta > 0) || !(gamma > 0) || !(a > -1) || !(dx > 0) || n_paths < 1)
      throw std::domain_error("HardEdgeConfig: invalid parameters");
  }
  double horizon() const {
    if (x_max > 0) return x_max;
    double base = 10.0 / r;
    if (lambda > 1e-4) base = std::max(base, std::log(lambda / 1e-4) / r + 2.0);
    return base;
  }
};

struct PathEnsemble {
  std::vector<int> counts;  // explosions or zero-crossings per path
  long n_flagged = 0;       // paths that hit the step-halving limit and were resampled

  double flag_rate() const {
    return counts.empty() ? 0.0 : double(n_flagged) / double(counts.size() + n_flagged);
  }
  double prob_at_most(int k) const {
    long c = 0;
    for (int v : counts) c += (v <= k);
    return counts.empty() ? 0.0 : double(c) / double(counts.size());
  }
};

// H_n = gamma^{-1/2} (rn)^{1/6} (2 sqrt((r+s)n) I - T)
//     = 2 m_n^2 I - sqrt(m_n/gamma) T,  m_n = (rn)^{1/3}.
template <class Scalar>
MatrixX<Scalar> rescale_soft(const BlockJacobi<Scalar>& t, int n, int r, double s) {
  if (t.r != r || t.n_blocks() != n) throw std::invalid_argument("rescale_soft: dimension mismatch");
  const double gamma = (r + s) / double(r);
  const double c = std::pow(double(r) * n, 1.0 / 6.0) / std::sqrt(gamma);
  MatrixX<Scalar> h = -c * t.dense();
  h.diagonal().array() += Scalar(c * 2.0 * std::sqrt((r + s) * double(n)));
  return h;
}

// Running sums of the potential part of H_n = m_n^2 Laplacian + m_n V_n on
// the grid x = k/m_n. The off-diagonal increment is m_n I - B_k/sqrt(gamma m_n).
template <class Scalar>
struct PotentialSums {
  std::vector<double> grid;
  std::vector<MatrixX<Scalar>> y1, y2;
};

// A leading prefix of the blocks is accepted (t.n_blocks() <= n): the sums up
// to x only involve the first ceil(m_n x) blocks.
template <class Scalar>
PotentialSums<Scalar> potential_sums(const BlockJacobi<Scalar>& t, int n, int r, double s) {
  if (t.r != r || t.n_blocks() > n) throw std::invalid_argument("potential_sums: dimension mismatch");
  const double gamma = (r + s) / double(r);
  const double mn = std::pow(double(r) * n, 1.0 / 3.0);
  const double c = 1.0 / std::sqrt(gamma * mn);
  PotentialSums<Scalar> out;
  MatrixX<Scalar> s1 = MatrixX<Scalar>::Zero(r, r), s2 = s1;
  out.grid.push_back(0);
  out.y1.push_back(s1);
  out.y2.push_back(s2);
  for (int k = 0; k < t.n_blocks(); ++k) {
    s1 -= c * t.diag_blocks[std::size_t(k)];
    if (k < int(t.offdiag_blocks.size())) {
      s2 += mn * MatrixX<Scalar>::Identity(r, r) - c * t.offdiag_blocks[std::size_t(k)];
    }
    out.grid.push_back((k + 1) / mn);
    out.y1.push_back(s1);
    out.y2.push_back(s2);
  }
  return out;
}

namespace detail {

// k-th ascending eigenvalue of a symmetric tridiagonal matrix via Sturm
// sequence bisection. Eigen has no partial tridiagonal solver and the scalar
// discretizations below get large.
inline int sturm_count_below(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
  int cnt = 0;
  double q = d(0) - x;
  if (q < 0) ++cnt;
  for (Eigen::Index i = 1; i < d.size(); ++i) {
    double denom = q == 0 ? std::numeric_limits<double>::min() : q;
    q = d(i) - x - e(i - 1) * e(i - 1) / denom;
    if (q < 0) ++cnt;
  }
  return cnt;
}

inline double tridiag_eigenvalue(const Eigen::VectorXd& d, const Eigen::VectorXd& e, int k) {
  if (d.size() < 1 || e.size() + 1 != d.size() || k < 0 || k >= int(d.size()))
    throw std::invalid_argument("tridiag_eigenvalue: bad arguments");
  double rad = e.size() ? 2.0 * e.cwiseAbs().maxCoeff() : 0.0;
  double lo = d.minCoeff() - rad - 1.0, hi = d.maxCoeff() + rad + 1.0;
  while (hi - lo > 1e-13 * (1.0 + std::abs(lo) + std::abs(hi))) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count_below(d, e, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Lower band storage: bands(d, j) = A(j + d, j), d = 0..w.
inline Eigen::MatrixXd band_storage(const Eigen::MatrixXd& a, int w) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd bands = Eigen::MatrixXd::Zero(w + 1, n);
  for (int d = 0; d <= w; ++d)
    for (Eigen::Index j = 0; j + d < n; ++j) bands(d, j) = a(j + d, j);
  return bands;
}

// Count of eigenvalues strictly below x via the inertia of the banded
// LDL^T factorization of A - xI.
inline int banded_count_below(const Eigen::MatrixXd& bands, double x) {
  const int w = int(bands.rows()) - 1, n = int(bands.cols());
  Eigen::MatrixXd m = bands;
  m.row(0).array() -= x;
  int cnt = 0;
  for (int j = 0; j < n; ++j) {
    double piv = m(0, j);
    if (piv == 0) piv = -std::numeric_limits<double>::min();
    if (piv < 0) ++cnt;
    const int lim = std::min(w, n - 1 - j);
    for (int i = 1; i <= lim; ++i) {
      double f = m(i, j) / piv;
      for (int k = i; k <= lim; ++k) m(k - i, j + i) -= f * m(k, j);
    }
  }
  return cnt;
}

// k-th ascending eigenvalue of a real symmetric banded matrix.
inline double banded_eigenvalue(const Eigen::MatrixXd& bands, int k) {
  const int w = int(bands.rows()) - 1, n = int(bands.cols());
  if (n < 1 || k < 0 || k >= n) throw std::invalid_argument("banded_eigenvalue: bad arguments");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int j = 0; j < n; ++j) {
    double rad = 0;
    for (int d = 1; d <= w; ++d) {
      if (j + d < n) rad += std::abs(bands(d, j));
      if (j - d >= 0) rad += std::abs(bands(d, j - d));
    }
    lo = std::min(lo, bands(0, j) - rad);
    hi = std::max(hi, bands(0, j) + rad);
  }
  lo -= 1.0;
  hi += 1.0;
  while (hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi))) {
    double mid = 0.5 * (lo + hi);
    if (banded_count_below(bands, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// ordered Euler step with collision rejection: returns false if ordering
// could not be preserved within max_halvings
template <class Drift>
bool ordered_step(std::vector<double>& p, double& x, double h, Drift&& drift, double sigma,
                  RngStream& rng, int max_halvings = 20) {
  const std::size_t r = p.size();
  std::vector<double> z(r), trial(r);
  for (std::size_t i = 0; i < r; ++i) z[i] = rng.normal();
  for (int att = 0; att <= max_halvings; ++att) {
    double hh = h / double(1 << att);
    double sq = std::sqrt(hh);
    bool ok = true;
    for (std::size_t i = 0; i < r; ++i) {
      trial[i] = p[i] + drift(p, i) * hh + sigma * sq * z[i];
      if (i > 0 && trial[i] <= trial[i - 1]) ok = false;
    }
    if (ok || r == 1) {
      p = trial;
      x += hh;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Coupled Airy-type diffusion with explosion counting. Paths start with all
// coordinates at p_max (ordered offsets standing in for the all-infinity
// entry); a passage below -p_max is an explosion, after which the exploded
// coordinate is reinserted as the new largest at +p_max.
inline PathEnsemble simulate_airy_sde(const SoftEdgeConfig& cfg, RngStream& rng) {
  cfg.validate();
  const double sigma = std::isinf(cfg.beta) ? 0.0 : 2.0 / std::sqrt(cfg.beta * cfg.gamma);
  const double xm = cfg.horizon();
  PathEnsemble out;
  for (long path = 0; path < cfg.n_paths || out.counts.size() < std::size_t(cfg.n_paths);) {
    RngStream prng = rng.substream(std::uint64_t(path));
    ++path;
    std::vector<double> p(std::size_t(cfg.r));
    for (int i = 0; i < cfg.r; ++i) p[std::size_t(i)] = cfg.p_max * (1.0 + 1e-4 * i);
    double x = 0;
    int explosions = 0;
    bool flagged = false;
    // Riccati drift for u'' = (rx - lambda) u; explosions of p = u'/u count
    // the operator eigenvalues at or below lambda
    // the pairwise repulsion is itself generated by the matrix noise, so the
    // deterministic mode drops it and runs r independent copies
    auto drift = [&](const std::vector<double>& q, std::size_t i) {
      double d = cfg.r * x - cfg.lambda - q[i] * q[i];
      if (sigma > 0)
        for (std::size_t j = 0; j < q.size(); ++j)
          if (j != i) d += 2.0 / (q[i] - q[j]);
      return d;
    };
    while (x < xm) {
      double pm2 = 0;
      for (double v : p) pm2 = std::max(pm2, v * v);
      double h = std::min(cfg.dx, 0.1 / (1.0 + pm2));
      if (!detail::ordered_step(p, x, h, drift, sigma, prng)) {
        flagged = true;
        break;
      }
      if (p.front() < -cfg.p_max) {
        ++explosions;
        p.erase(p.begin());
        p.push_back(std::max(cfg.p_max, p.empty() ? cfg.p_max : p.back() + 1.0));
      }
    }
    if (flagged)
      ++out.n_flagged;
    else
      out.counts.push_back(explosions);
  }
  return out;
}

// Dirichlet finite-difference discretization of -d^2/dx^2 + rx + sqrt(2/gamma) B'.
// White noise is realized as independent Gaussian-type hermitian blocks of
// variance 1/h per grid cell. For r > 1 the noise field is dictated by the
// scalar type; for r = 1 any beta > 0 is accepted as a variance parameter.
template <class Scalar>
MatrixX<Scalar> discretize_airy(int r, double beta, double gamma, double h, double L,
                                RngStream& rng, bool noise = true) {
  if (r < 1 || !(beta > 0) || !(gamma > 0) || h > 0.05 || L < 10)
    throw std::domain_error("discretize_airy: invalid parameters");
  if (noise && r > 1 && scalar_field<Scalar>::beta != beta)
    throw std::domain_error("discretize_airy: r > 1 noise requires beta matching the scalar type");
  const int cells = int(std::lround(L / h)), d = r * cells;
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(d, d);
  const double inv_h2 = 1.0 / (h * h);
  for (int k = 0; k < cells; ++k) {
    MatrixX<Scalar> blk = MatrixX<Scalar>::Identity(r, r) * Scalar(2.0 * inv_h2 + r * (k + 1) * h);
    if (noise) {
      MatrixX<Scalar> w;
      if (r == 1) {
        w = MatrixX<Scalar>::Zero(1, 1);
        w(0, 0) = Scalar(rng.normal() * std::sqrt(2.0 / beta));
      } else {
        w = sample_gfe<Scalar>(r, rng);
      }
      blk += std::sqrt(2.0 / gamma) / std::sqrt(h) * w;
    }
    m.block(k * r, k * r, r, r) = blk;
    if (k + 1 < cells) {
      m.block(k * r, (k + 1) * r, r, r) = -inv_h2 * MatrixX<Scalar>::Identity(r, r);
      m.block((k + 1) * r, k * r, r, r) = -inv_h2 * MatrixX<Scalar>::Identity(r, r);
    }
  }
  return m;
}

struct CdfTable {
  std::vector<double> lambda, prob, std_error;
};

// P(Lambda_k <= lambda) across a lambda grid via explosion counting:
// the k-th eigenvalue is at or below lambda iff at least k+1 explosions occur.
inline CdfTable soft_edge_cdf(SoftEdgeConfig cfg, const std::vector<double>& lambdas, int k,
                              RngStream& rng) {
  CdfTable out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    cfg.lambda = lambdas[i];
    RngStream srng = rng.substream(i);
    PathEnsemble pe = simulate_airy_sde(cfg, srng);
    double p = 1.0 - pe.prob_at_most(k);
    out.lambda.push_back(lambdas[i]);
    out.prob.push_back(p);
    out.std_error.push_back(std::sqrt(p * (1.0 - p) / double(pe.counts.size())));
  }
  return out;
}

// Coupled Bessel-type diffusion with zero-crossing counting. Steps are halved
// near the origin to localize crossings; passages to -infinity reuse the
// soft-edge reinsertion convention.
inline PathEnsemble simulate_bessel_sde(const HardEdgeConfig& cfg, RngStream& rng) {
  cfg.validate();
  const bool noise_on = !std::isinf(cfg.beta);
  const double sig0 = noise_on ? 2.0 / std::sqrt(cfg.beta * cfg.gamma) : 0.0;
  const double xm = cfg.horizon();
  PathEnsemble out;
  for (long path = 0; path < cfg.n_paths || out.counts.size() < std::size_t(cfg.n_paths);) {
    RngStream prng = rng.substream(std::uint64_t(path));
    ++path;
    std::vector<double> q(std::size_t(cfg.r));
    for (int i = 0; i < cfg.r; ++i) q[std::size_t(i)] = cfg.q_max * (1.0 + 1e-4 * i);
    double x = 0;
    int crossings = 0;
    bool flagged = false;
    const double drift_lin = cfg.a / cfg.gamma + (noise_on ? 2.0 / (cfg.beta * cfg.gamma) : 0.0);
    while (x < xm) {
      double qm2 = 0, qmin = std::numeric_limits<double>::infinity();
      for (double v : q) {
        qm2 = std::max(qm2, v * v);
        qmin = std::min(qmin, std::abs(v));
      }
      double h = std::min(cfg.dx, 0.1 / (1.0 + qm2));
      if (qmin < 0.1) h = std::min(h, cfg.dx / 16.0);
      std::vector<double> prev = q;
      auto drift = [&](const std::vector<double>& v, std::size_t i) {
        double d = drift_lin * v[i] - v[i] * v[i] - cfg.lambda * std::exp(-cfg.r * x);
        if (noise_on)
          for (std::size_t j = 0; j < v.size(); ++j)
            if (j != i) d += v[i] * (v[i] + v[j]) / (v[i] - v[j]);
        return d;
      };
      // multiplicative noise: scale per-coordinate through the drift callback
      const std::size_t r = q.size();
      std::vector<double> z(r), trial(r);
      for (std::size_t i = 0; i < r; ++i) z[i] = prng.normal();
      bool stepped = false;
      for (int att = 0; att <= 20; ++att) {
        double hh = h / double(1 << att), sq = std::sqrt(hh);
        bool ok = true;
        for (std::size_t i = 0; i < r; ++i) {
          trial[i] = q[i] + drift(q, i) * hh + sig0 * q[i] * sq * z[i];
          if (i > 0 && trial[i] <= trial[i - 1]) ok = false;
        }
        if (ok || r == 1) {
          q = trial;
          x += hh;
          stepped = true;
          break;
        }
      }
      if (!stepped) {
        flagged = true;
        break;
      }
      for (std::size_t i = 0; i < r; ++i)
        if (prev[i] * q[i] < 0) ++crossings;
      if (q.front() < -cfg.q_max) {
        q.erase(q.begin());
        q.push_back(std::max(cfg.q_max, q.empty() ? cfg.q_max : q.back() + 1.0));
      }
    }
    if (flagged)
      ++out.n_flagged;
    else
      out.counts.push_back(crossings);
  }
  return out;
}

// (rn/gamma) times the ascending spectrum.
template <class Scalar>
Eigen::VectorXd rescale_hard(const MatrixX<Scalar>& w, int n, int r, double gamma) {
  if (w.rows() != Eigen::Index(n) * r || w.cols() != w.rows())
    throw std::invalid_argument("rescale_hard: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(w, Eigen::EigenvaluesOnly);
  return (double(r) * n / gamma) * es.eigenvalues();
}

// Assembles the inverse-factor integral kernel on a grid and returns the
// lowest eigenvalue estimates 1/sigma_k^2 from its singular values. The
// transfer process X comes from the bidiagonal matrix inverse in the
// half-line coordinates: per-cell X_{k+1} = X_k expm(dB/sqrt(gamma)
// - (a/(2 gamma)) I dx), kernel block e^{-ry/2} X_x^{-1} X_y for x < y.
template <class Scalar>
std::vector<double> discretize_bessel_kernel(int r, double beta, double gamma, double a, double h,
                                             double x_max, RngStream& rng, bool noise = true,
                                             int k_max = 4) {
  if (r < 1 || !(beta > 0) || !(gamma > 0) || !(a > -1) || h > 0.01 || x_max < 8.0 / r)
    throw std::domain_error("discretize_bessel_kernel: invalid parameters");
  const int cells = int(std::lround(x_max / h)), d = r * cells;
  std::vector<MatrixX<Scalar>> step{std::size_t(cells)};
  for (int k = 0; k < cells; ++k) {
    MatrixX<Scalar> m = -(a / (2.0 * gamma)) * h * MatrixX<Scalar>::Identity(r, r);
    if (noise) {
      MatrixX<Scalar> db(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          db(i, j) = i == j ? Scalar(rng.normal() * std::sqrt(h / beta))
                            : std::sqrt(h) * sample_fnormal<Scalar>(rng);
      m += db / std::sqrt(gamma);
    }
    step[std::size_t(k)] = m.exp();
  }
  MatrixX<Scalar> kern = MatrixX<Scalar>::Zero(d, d);
  for (int j = 0; j < cells; ++j) {
    MatrixX<Scalar> acc = MatrixX<Scalar>::Identity(r, r);
    for (int l = j; l < cells; ++l) {
      kern.block(j * r, l * r, r, r) = (std::exp(-r * (l * h) / 2.0) * h) * acc;
      acc = (acc * step[std::size_t(l)]).eval();
      if (!acc.allFinite()) throw std::runtime_error("discretize_bessel_kernel: path degenerate");
    }
  }
  Eigen::BDCSVD<MatrixX<Scalar>> svd(kern);
  std::vector<double> lam;
  for (int k = 0; k < k_max && k < d; ++k) {
    double s = svd.singularValues()(k);
    lam.push_back(1.0 / (s * s));
  }
  std::sort(lam.begin(), lam.end());
  return lam;
}

// CDF of the semicircle law with density sqrt((4 gamma - x^2)_+)/(2 pi gamma).
inline double semicircle_cdf(double x, double gamma) {
  const double e = 2.0 * std::sqrt(gamma);
  if (x <= -e) return 0;
  if (x >= e) return 1;
  return 0.5 + (x * std::sqrt(4.0 * gamma - x * x) + 4.0 * gamma * std::asin(x / e)) /
                   (4.0 * M_PI * gamma);
}

// Sup-distance of the pooled empirical CDF of lambda/sqrt(rn) to the
// semicircle law with gamma = (r+s)/r. Rows of the input are draws.
inline double dos_check(const Eigen::MatrixXd& spectra, int r, double s) {
  const Eigen::Index d = spectra.cols();
  if (d < 200) throw std::domain_error("dos_check: need rn >= 200");
  const double gamma = (r + s) / double(r);
  const double scale = std::sqrt(double(d));
  std::vector<double> xs;
  xs.reserve(std::size_t(spectra.size()));
  for (Eigen::Index i = 0; i < spectra.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) xs.push_back(spectra(i, j) / scale);
  return ks_distance(std::move(xs), [&](double x) { return semicircle_cdf(x, gamma); });
}

}  // namespace blockbeta
