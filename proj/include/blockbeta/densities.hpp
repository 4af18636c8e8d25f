#pragma once

// Closed-form joint eigenvalue densities of the solvable block families,
// normalizing constants, moment constants, Monte Carlo moment estimators and
// a random-walk Metropolis sampler for the densities themselves.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "blockbeta/spectra.hpp"
#include "blockbeta/stats.hpp"
#include "blockbeta/vdm.hpp"

namespace blockbeta {

struct DensitySpec {
  enum class Family { hermite, laguerre };
  Family family = Family::hermite;
  int beta = 1;
  int n = 1;
  int r = 2;
  double s = 2;
  std::optional<double> m;

  double beta_s() const { return beta * s; }
  int dim() const { return n * r; }

  void validate() const {
    if (beta != 1 && beta != 2) throw std::domain_error("DensitySpec: beta must be 1 or 2");
    if (n < 1) throw std::domain_error("DensitySpec: n >= 1");
    const double bs = beta_s();
    const bool two = std::abs(bs - 2) < 1e-9, four = std::abs(bs - 4) < 1e-9;
    if (!((r >= 2 && two) || (r == 2 && (two || four))))
      throw std::domain_error("DensitySpec: need (r >= 2, beta*s = 2) or (r = 2, beta*s in {2,4})");
    if (family == Family::laguerre) {
      EnsembleParams p;
      p.beta = beta;
      p.n = n;
      p.r = r;
      p.s = s;
      p.m = m;
      p.validate_laguerre();
    }
  }
};

// Floating Pfaffian of a skew matrix by symmetric two-step elimination with
// pivoting; exact-arithmetic counterpart in vdm is the test oracle.
inline double pfaffian_numeric(Eigen::MatrixXd a) {
  const int d = int(a.rows());
  if (d % 2 != 0 || a.cols() != d) throw std::invalid_argument("pfaffian_numeric: bad shape");
  if ((a + a.transpose()).norm() > 1e-10 * std::max(1.0, a.norm()))
    throw std::domain_error("pfaffian_numeric: input not skew");
  double pf = 1.0;
  for (int k = 0; k + 1 < d; k += 2) {
    int piv = k + 1;
    for (int j = k + 2; j < d; ++j)
      if (std::abs(a(j, k)) > std::abs(a(piv, k))) piv = j;
    if (a(piv, k) == 0.0) return 0.0;
    if (piv != k + 1) {
      a.row(piv).swap(a.row(k + 1));
      a.col(piv).swap(a.col(k + 1));
      pf = -pf;
    }
    for (int j = k + 2; j < d; ++j) {
      double f = a(j, k) / a(k + 1, k);
      a.row(j) -= f * a.row(k + 1);
      a.col(j) -= f * a.col(k + 1);
    }
    pf *= a(k, k + 1);
  }
  return pf;
}

inline double log_abs_pfaffian_gaps(const Eigen::VectorXd& lam, double gap_guard = 1e-10) {
  const int d = int(lam.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) {
        double diff = lam(i) - lam(j);
        if (std::abs(diff) < gap_guard) throw std::domain_error("coincident points");
        k(i, j) = 1.0 / diff;
      }
  double pf = pfaffian_numeric(k);
  return std::log(std::abs(pf));
}

namespace detail {

inline double log_abs_vandermonde(const Eigen::VectorXd& lam) {
  double out = 0;
  for (int i = 0; i < lam.size(); ++i)
    for (int j = i + 1; j < lam.size(); ++j) out += std::log(std::abs(lam(j) - lam(i)));
  return out;
}

// log of sum over equipartitions of prod_j Delta(A_j)^2, by log-sum-exp
inline double log_partition_interaction(const Eigen::VectorXd& lam, int r) {
  const int rn = int(lam.size());
  if (rn > 12) throw std::domain_error("partition interaction: rn > 12");
  const int n = rn / r;
  std::vector<double> terms;
  enumerate_equipartitions(r, n, [&](const EquiPartition& p) {
    double t = 0;
    for (const auto& blk : p.blocks)
      for (std::size_t i = 0; i < blk.size(); ++i)
        for (std::size_t j = i + 1; j < blk.size(); ++j)
          t += 2.0 * std::log(std::abs(lam(blk[j]) - lam(blk[i])));
    terms.push_back(t);
  });
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : terms) mx = std::max(mx, t);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

}  // namespace detail

enum class DensityForm { automatic, partition, pfaffian };

// Log of the unnormalized symmetrized joint density. The partition form is
// valid whenever beta*s = 2; the Pfaffian form needs r = 2 and covers
// beta*s in {2, 4} (the two agree at beta*s = 2 including the 2^n factor).
inline double log_unnorm_density(const DensitySpec& spec, const Eigen::VectorXd& lam,
                                 DensityForm form = DensityForm::automatic) {
  spec.validate();
  if (int(lam.size()) != spec.dim()) throw std::invalid_argument("log_unnorm_density: bad length");
  for (int i = 0; i < lam.size(); ++i)
    if (!std::isfinite(lam(i))) throw std::invalid_argument("log_unnorm_density: non-finite");

  const double bs = spec.beta_s();
  const bool four = std::abs(bs - 4) < 1e-9;
  if (form == DensityForm::automatic)
    form = four ? DensityForm::pfaffian : DensityForm::partition;

  double weight = 0;
  if (spec.family == DensitySpec::Family::hermite) {
    weight = -(spec.beta / 4.0) * lam.squaredNorm();
  } else {
    // per-point weight exponent; at n = 1 this reduces to the classical
    // Wishart((r+s)m) eigenvalue weight
    const double a = (spec.r + spec.s) * (*spec.m - spec.n + 1) - spec.r;
    const double expo = (spec.beta / 2.0) * (a + 1.0) - 1.0;
    for (int i = 0; i < lam.size(); ++i) {
      if (!(lam(i) > 0)) return -std::numeric_limits<double>::infinity();
      weight += expo * std::log(lam(i)) - (spec.beta / 2.0) * lam(i);
    }
  }

  const double logd = detail::log_abs_vandermonde(lam);
  if (!std::isfinite(logd)) return -std::numeric_limits<double>::infinity();

  if (form == DensityForm::partition) {
    if (four) throw std::domain_error("partition form needs beta*s = 2");
    return spec.beta * logd + detail::log_partition_interaction(lam, spec.r) + weight;
  }
  if (spec.r != 2) throw std::domain_error("pfaffian form needs r = 2");
  double logpf = log_abs_pfaffian_gaps(lam);
  return spec.n * std::log(2.0) + (spec.beta + bs / 2.0) * logd + (bs / 2.0) * logpf + weight;
}

// Log normalizing constant of the Gaussian-type density.
inline double log_Z(const DensitySpec& spec) {
  spec.validate();
  if (spec.family != DensitySpec::Family::hermite) throw std::domain_error("log_Z: Gaussian family only");
  const double b2 = spec.beta / 2.0;
  const int nr = spec.dim();
  const double a = -(spec.beta / 4.0) * nr * (spec.n * (spec.r + spec.s) + spec.s) +
                   (spec.beta / 4.0 - 0.5) * nr;
  double lz = std::lgamma(nr + 1.0) + (nr / 2.0) * std::log(2.0 * M_PI) + a * std::log(b2) -
              nr * std::lgamma(b2);
  for (int k = 1; k <= nr; ++k) {
    double ceil_kr = std::ceil(double(k) / spec.r);
    lz += std::lgamma(b2 * (k + spec.s * ceil_kr));
  }
  if (std::abs(spec.beta_s() - 4) < 1e-9) lz += spec.n * std::log(spec.beta / 12.0);
  return lz;
}

struct MomentConstants {
  double c = 0;      // Haar-side constant
  double kappa = 0;  // Gaussian reduction constant
};

inline MomentConstants moment_constants(int n, int beta, int r, double s) {
  if (beta != 1 && beta != 2) throw std::domain_error("moment_constants: beta in {1,2}");
  if (n < 1 || r < 1 || !(s > 0)) throw std::domain_error("moment_constants: bad params");
  const double b2 = beta / 2.0;
  double log_ratio = 0;
  for (int i = 1; i <= r; ++i)
    log_ratio += std::lgamma(b2 * (r * n + 1 - i)) - std::lgamma(b2 * ((r + s) * n + 1 - i));
  MomentConstants mc;
  mc.kappa = std::exp(0.5 * r * s * n * std::log(b2) + log_ratio);
  const double bs = beta * s;
  if (std::abs(bs - 2) < 1e-9 || std::abs(bs - 4) < 1e-9) {
    double logc = b2 * r * s * n * std::log(b2) + log_ratio;
    if (std::abs(bs - 4) < 1e-9) {
      if (r != 2) throw std::domain_error("moment_constants: beta*s = 4 needs r = 2");
      logc += n * std::log(12.0 / beta);
    }
    mc.c = std::exp(logc);
  } else {
    mc.c = std::numeric_limits<double>::quiet_NaN();
  }
  return mc;
}

struct MomentEstimate {
  double estimate = 0;
  double std_error = 0;
  long n_samples = 0;
};

enum class MomentMode { haar, gaussian };

// Monte Carlo estimate of E |det M(lambda, X)|^p with X either the top r rows
// of a Haar unitary of matching size or an iid standard Gaussian r x rn array.
template <class Scalar>
MomentEstimate mc_moment(const Eigen::VectorXd& lam, int r, double p, long n_draws,
                         MomentMode mode, RngStream& rng) {
  if (n_draws < 1000) throw std::invalid_argument("mc_moment: need N >= 1000");
  const int d = int(lam.size());
  if (d % r != 0) throw std::invalid_argument("mc_moment: r must divide length");
  double s1 = 0, s2 = 0;
  MatrixX<Scalar> x(r, d);
  for (long it = 0; it < n_draws; ++it) {
    if (mode == MomentMode::haar) {
      x = sample_haar<Scalar>(d, rng).topRows(r);
    } else {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = sample_fnormal<Scalar>(rng);
    }
    MatrixX<Scalar> m = build_M_dense<Scalar>(lam, x);
    Eigen::PartialPivLU<MatrixX<Scalar>> lu(m);
    double logabs = 0;
    for (int i = 0; i < d; ++i) logabs += std::log(std::abs(std::complex<double>(lu.matrixLU()(i, i))));
    double v = std::exp(p * logabs);
    s1 += v;
    s2 += v * v;
  }
  MomentEstimate est;
  est.n_samples = n_draws;
  est.estimate = s1 / double(n_draws);
  est.std_error = std::sqrt(std::max(0.0, s2 / double(n_draws) - est.estimate * est.estimate) /
                            double(n_draws));
  return est;
}

struct McmcConfig {
  int n_chains = 4;
  long n_steps = 20000;   // post burn-in steps per chain
  long burn_in = 10000;
  long thin = 10;
  double initial_scale = 0.5;
};

struct McmcResult {
  Eigen::MatrixXd samples;  // one row per retained draw
  double acceptance_rate = 0;
  double proposal_scale = 0;
};

// Random-walk Metropolis targeting the unnormalized density; positive-support
// specs run in log coordinates. The proposal scale is tuned during burn-in
// only (stochastic approximation toward mid-range acceptance), then frozen.
inline McmcResult mcmc_sample(const DensitySpec& spec, const McmcConfig& cfg, RngStream& rng) {
  spec.validate();
  if (spec.dim() > 8) throw std::domain_error("mcmc_sample: rn > 8");
  const int d = spec.dim();
  const bool logdom = spec.family == DensitySpec::Family::laguerre;

  auto logpi = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd lam = logdom ? x.array().exp().matrix() : x;
    double lp;
    try {
      lp = log_unnorm_density(spec, lam);
    } catch (const std::domain_error&) {
      return -std::numeric_limits<double>::infinity();
    }
    if (logdom) lp += x.sum();  // Jacobian of the exp map
    return lp;
  };

  const long keep = cfg.n_steps / cfg.thin;
  McmcResult out;
  out.samples.resize(cfg.n_chains * keep, d);
  long accepted = 0, proposed = 0;
  double scale_final = 0;

  for (int chain = 0; chain < cfg.n_chains; ++chain) {
    RngStream crng = rng.substream(std::uint64_t(chain));
    Eigen::VectorXd x(d);
    double lp = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 100 && !std::isfinite(lp); ++attempt) {
      for (int i = 0; i < d; ++i) x(i) = crng.normal() * (logdom ? 0.5 : 1.0) + (logdom ? std::log(double(d)) : 0.0);
      lp = logpi(x);
    }
    if (!std::isfinite(lp)) throw std::runtime_error("mcmc_sample: cannot initialize");

    double scale = cfg.initial_scale;
    long kept = 0;
    for (long step = 0; step < cfg.burn_in + cfg.n_steps; ++step) {
      Eigen::VectorXd y = x;
      for (int i = 0; i < d; ++i) y(i) += scale * crng.normal();
      double lq = logpi(y);
      bool acc = std::log(crng.uniform() + 1e-300) < lq - lp;
      if (acc) {
        x = y;
        lp = lq;
      }
      if (step < cfg.burn_in) {
        double eta = 1.0 / std::pow(double(step + 10), 0.6);
        scale *= std::exp(eta * ((acc ? 1.0 : 0.0) - 0.35));
      } else {
        ++proposed;
        if (acc) ++accepted;
        long post = step - cfg.burn_in;
        if ((post + 1) % cfg.thin == 0 && kept < keep) {
          Eigen::VectorXd lam = logdom ? x.array().exp().matrix() : x;
          std::sort(lam.data(), lam.data() + d);
          out.samples.row(chain * keep + kept) = lam.transpose();
          ++kept;
        }
      }
    }
    scale_final += scale;
  }
  out.acceptance_rate = proposed > 0 ? double(accepted) / double(proposed) : 0.0;
  out.proposal_scale = scale_final / cfg.n_chains;
  return out;
}

}  // namespace blockbeta
