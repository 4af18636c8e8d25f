#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "blockbeta/randcore.hpp"

namespace blockbeta {

// Two-sample energy distance statistic. Rows are observations.
inline double energy_statistic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("energy_statistic: dimension mismatch");
  const auto n = a.rows(), m = b.rows();
  double ab = 0, aa = 0, bb = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) ab += (a.row(i) - b.row(j)).norm();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) aa += (a.row(i) - a.row(j)).norm();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) bb += (b.row(i) - b.row(j)).norm();
  return 2.0 * ab / (double(n) * m) - 2.0 * aa / (double(n) * n) - 2.0 * bb / (double(m) * m);
}

struct EnergyTestResult {
  double statistic;
  double p_value;
  int n_permutations;
  Eigen::Index n_a, n_b;
};

// Permutation p-value for the energy statistic. Large inputs are subsampled
// to max_per_side rows (deterministically, from rng) before the pooled
// distance matrix is formed.
inline EnergyTestResult gof_energy(const Eigen::MatrixXd& a_in, const Eigen::MatrixXd& b_in,
                                   int n_permutations, RngStream& rng,
                                   Eigen::Index max_per_side = 2000) {
  if (a_in.cols() != b_in.cols()) throw std::invalid_argument("gof_energy: dimension mismatch");
  auto subsample = [&](const Eigen::MatrixXd& x) {
    if (x.rows() <= max_per_side) return x;
    std::vector<Eigen::Index> idx(x.rows());
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    for (Eigen::Index i = x.rows() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.bits() % std::uint64_t(i + 1)]);
    Eigen::MatrixXd out(max_per_side, x.cols());
    for (Eigen::Index i = 0; i < max_per_side; ++i) out.row(i) = x.row(idx[i]);
    return out;
  };
  Eigen::MatrixXd a = subsample(a_in), b = subsample(b_in);
  const Eigen::Index n = a.rows(), m = b.rows(), tot = n + m;

  Eigen::MatrixXd pool(tot, a.cols());
  pool.topRows(n) = a;
  pool.bottomRows(m) = b;
  Eigen::MatrixXd dist(tot, tot);
  for (Eigen::Index i = 0; i < tot; ++i) {
    dist(i, i) = 0;
    for (Eigen::Index j = i + 1; j < tot; ++j)
      dist(i, j) = dist(j, i) = (pool.row(i) - pool.row(j)).norm();
  }

  std::vector<Eigen::Index> labels(tot);
  std::iota(labels.begin(), labels.end(), Eigen::Index(0));
  auto stat_for = [&](const std::vector<Eigen::Index>& lab) {
    double ab = 0, aa = 0, bb = 0;
    for (Eigen::Index i = 0; i < tot; ++i) {
      const bool ia = lab[i] < n;
      const double* di = dist.data() + i * tot;
      for (Eigen::Index j = i + 1; j < tot; ++j) {
        const bool ja = lab[j] < n;
        double d = di[j];
        if (ia && ja) aa += d;
        else if (!ia && !ja) bb += d;
        else ab += d;
      }
    }
    return 2.0 * ab / (double(n) * m) - 2.0 * aa / (double(n) * n) - 2.0 * bb / (double(m) * m);
  };

  const double observed = stat_for(labels);
  int ge = 0;
  for (int p = 0; p < n_permutations; ++p) {
    for (Eigen::Index i = tot - 1; i > 0; --i)
      std::swap(labels[i], labels[rng.bits() % std::uint64_t(i + 1)]);
    if (stat_for(labels) >= observed) ++ge;
  }
  return {observed, double(1 + ge) / double(1 + n_permutations), n_permutations, n, m};
}

// One-sample Kolmogorov-Smirnov distance against a CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max(d, std::max(std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)));
  }
  return d;
}

// Asymptotic one-sample KS p-value via the Kolmogorov series.
inline double ks_p_value(double d, std::size_t n) {
  double t = (std::sqrt(double(n)) + 0.12 + 0.11 / std::sqrt(double(n))) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, p));
}

// Pearson chi-squared statistic for equiprobable bins given by CDF values in [0,1].
template <class Cdf>
double chi2_equiprobable(const std::vector<double>& xs, Cdf&& cdf, int bins) {
  std::vector<double> counts(bins, 0.0);
  for (double x : xs) {
    int b = std::min(bins - 1, std::max(0, int(cdf(x) * bins)));
    counts[b] += 1.0;
  }
  const double expect = double(xs.size()) / bins;
  double stat = 0;
  for (double c : counts) stat += (c - expect) * (c - expect) / expect;
  return stat;
}

inline double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

inline double variance(const std::vector<double>& xs) {
  double mu = mean(xs), v = 0;
  for (double x : xs) v += (x - mu) * (x - mu);
  return v / double(xs.size() - 1);
}

}  // namespace blockbeta
