#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "blockbeta/edgelimits.hpp"
#include "blockbeta/ensembles.hpp"
#include "blockbeta/stats.hpp"
#include "doctest.h"

using namespace blockbeta;

namespace {

// diag and offdiag of a dense symmetric tridiagonal matrix
std::pair<Eigen::VectorXd, Eigen::VectorXd> tridiag_of(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  Eigen::VectorXd dg = m.diagonal();
  Eigen::VectorXd od(d - 1);
  for (Eigen::Index i = 0; i + 1 < d; ++i) od(i) = m(i, i + 1);
  return {dg, od};
}

}  // namespace

TEST_CASE("sturm bisection agrees with the dense solver") {
  RngStream rng(151);
  BlockJacobi<double> t = sample_tridiagonal_beta(40, 2.0, rng);
  auto [dg, od] = tridiag_of(t.dense());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.dense(), Eigen::EigenvaluesOnly);
  for (int k : {0, 1, 20, 39})
    CHECK(detail::tridiag_eigenvalue(dg, od, k) ==
          doctest::Approx(es.eigenvalues()(k)).epsilon(1e-10));
}

TEST_CASE("banded bisection agrees with the dense solver") {
  RngStream rng(166);
  EnsembleParams p;
  p.beta = 1;
  p.n = 12;
  p.r = 3;
  p.s = 1;
  Eigen::MatrixXd t = sample_hermite<double>(p, rng).dense();
  Eigen::MatrixXd bands = detail::band_storage(t, p.r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  for (int k : {0, 1, 17, 35})
    CHECK(detail::banded_eigenvalue(bands, k) ==
          doctest::Approx(es.eigenvalues()(k)).epsilon(1e-9));
}

TEST_CASE("soft rescaling matches both closed forms") {
  RngStream rng(152);
  EnsembleParams p;
  p.beta = 1;
  p.n = 8;
  p.r = 2;
  p.s = 2;
  BlockJacobi<double> t = sample_hermite<double>(p, rng);
  Eigen::MatrixXd h = rescale_soft(t, p.n, p.r, p.s);

  const double gamma = (p.r + p.s) / double(p.r);
  const double mn = std::pow(double(p.r) * p.n, 1.0 / 3.0);
  Eigen::MatrixXd h2 = -std::sqrt(mn / gamma) * t.dense();
  h2.diagonal().array() += 2.0 * mn * mn;
  CHECK((h - h2).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(rescale_soft(t, p.n + 1, p.r, p.s), std::invalid_argument);
}

TEST_CASE("potential sums reproduce the quadratic drift and noise scale") {
  // r = 2, s = 2, beta = 1, rn = 1e5. Only the leading ceil(m_n) blocks feed
  // the sums up to x = 1, so draws build just that prefix.
  const int r = 2, n = 50000;
  const double s = 2, gamma = (r + s) / r;
  const double mn = std::pow(double(r) * n, 1.0 / 3.0);
  const int prefix = int(std::ceil(mn)) + 1;
  const int draws = 800;
  RngStream rng(153);

  const int kx = int(std::lround(mn));  // grid index nearest x = 1
  std::vector<double> diag_sum, y1_offdiag;
  double xg = 0;
  for (int d = 0; d < draws; ++d) {
    RngStream drng = rng.substream(std::uint64_t(d));
    BlockJacobi<double> t;
    t.r = r;
    for (int k = 1; k <= prefix; ++k) {
      t.diag_blocks.push_back(sample_gfe<double>(r, drng));
      t.offdiag_blocks.push_back(sample_sqw<double>(r, (r + s) * (n - k), drng));
    }
    PotentialSums<double> ps = potential_sums(t, n, r, s);
    xg = ps.grid[std::size_t(kx)];
    Eigen::MatrixXd total = ps.y1[std::size_t(kx)] + ps.y2[std::size_t(kx)] +
                            ps.y2[std::size_t(kx)].transpose();
    diag_sum.push_back(total(0, 0));
    diag_sum.push_back(total(1, 1));
    y1_offdiag.push_back(ps.y1[std::size_t(kx)](0, 1));
  }

  const double target = r * xg * xg / 2.0;
  const double mu = mean(diag_sum);
  const double se = std::sqrt(variance(diag_sum) / double(diag_sum.size()));
  CHECK(std::abs(mu - target) < 4.0 * se + 0.02);

  // Y1 off-diagonal entry is a Brownian motion with variance x/(beta gamma)
  CHECK(std::abs(mean(y1_offdiag)) < 4.0 * std::sqrt(xg / gamma / draws));
  const double v = variance(y1_offdiag);
  CHECK(v == doctest::Approx(xg / gamma).epsilon(0.10 + 4.0 * std::sqrt(2.0 / draws)));
}

TEST_CASE("airy diffusion without noise locates the first operator eigenvalues") {
  const double a1 = -boost::math::airy_ai_zero<double>(1);
  CHECK(a1 == doctest::Approx(2.33810741).epsilon(1e-7));

  RngStream rng(154);
  SoftEdgeConfig cfg;
  cfg.r = 1;
  cfg.beta = std::numeric_limits<double>::infinity();
  cfg.gamma = 1;
  cfg.p_max = 1e3;
  cfg.n_paths = 1;

  cfg.lambda = 2.0;  // below a1: no explosion
  CHECK(simulate_airy_sde(cfg, rng).counts[0] == 0);
  cfg.lambda = 2.5;  // above a1: at least one
  CHECK(simulate_airy_sde(cfg, rng).counts[0] >= 1);

  // r = 2: lowest eigenvalue 2^{2/3} a1 with multiplicity two
  const double lam2 = std::pow(2.0, 2.0 / 3.0) * a1;
  CHECK(lam2 == doctest::Approx(3.71151416).epsilon(1e-6));
  cfg.r = 2;
  cfg.gamma = 2;
  cfg.lambda = 3.5;
  CHECK(simulate_airy_sde(cfg, rng).counts[0] == 0);
  cfg.lambda = 3.9;
  CHECK(simulate_airy_sde(cfg, rng).counts[0] == 2);
}

TEST_CASE("explosion probabilities are monotone in the spectral parameter") {
  RngStream rng(155);
  SoftEdgeConfig cfg;
  cfg.r = 1;
  cfg.beta = 2;
  cfg.gamma = 1;
  cfg.dx = 2e-3;
  cfg.p_max = 1e3;
  cfg.n_paths = 1500;
  CdfTable tab = soft_edge_cdf(cfg, {0.0, 1.0, 2.0, 3.0, 4.0}, 0, rng);
  for (std::size_t i = 0; i + 1 < tab.prob.size(); ++i)
    CHECK(tab.prob[i] <= tab.prob[i + 1] + 2.0 * (tab.std_error[i] + tab.std_error[i + 1]));
  CHECK(tab.prob.front() < 0.15);
  CHECK(tab.prob.back() > 0.85);
}

TEST_CASE("discretized airy operator reproduces the noise free eigenvalues") {
  RngStream rng(156);
  const double a1 = -boost::math::airy_ai_zero<double>(1);

  Eigen::MatrixXd m1 = discretize_airy<double>(1, 2.0, 1.0, 0.01, 20.0, rng, false);
  auto [dg, od] = tridiag_of(m1);
  CHECK(detail::tridiag_eigenvalue(dg, od, 0) == doctest::Approx(a1).epsilon(0.005));

  Eigen::MatrixXd m2 = discretize_airy<double>(2, 1.0, 2.0, 0.01, 10.0, rng, false);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m2, Eigen::EigenvaluesOnly);
  const double lam2 = std::pow(2.0, 2.0 / 3.0) * a1;
  CHECK(es.eigenvalues()(0) == doctest::Approx(lam2).epsilon(0.005));
  CHECK(es.eigenvalues()(1) == doctest::Approx(lam2).epsilon(0.005));

  CHECK_THROWS_AS(discretize_airy<double>(1, 2.0, 1.0, 0.1, 20.0, rng), std::domain_error);
  CHECK_THROWS_AS(discretize_airy<double>(2, 4.0, 1.0, 0.01, 10.0, rng), std::domain_error);
}

TEST_CASE("noisy discretized operator matches the classical soft edge") {
  // beta = 2, gamma = 1: lowest eigenvalue of the discretized operator
  // against the rescaled largest eigenvalue of the scalar tridiagonal model
  RngStream rng(157);
  const int draws = 3000, nmat = 400;
  Eigen::MatrixXd a(draws, 1), b(draws, 1);
  for (int d = 0; d < draws; ++d) {
    RngStream drng = rng.substream(std::uint64_t(d));
    Eigen::MatrixXd m = discretize_airy<double>(1, 2.0, 1.0, 0.01, 10.0, drng, true);
    auto [dg, od] = tridiag_of(m);
    a(d, 0) = detail::tridiag_eigenvalue(dg, od, 0);

    BlockJacobi<double> t = sample_tridiagonal_beta(nmat, 2.0, drng);
    auto [dg2, od2] = tridiag_of(t.dense());
    double lmax = detail::tridiag_eigenvalue(dg2, od2, nmat - 1);
    b(d, 0) = std::pow(double(nmat), 1.0 / 6.0) * (2.0 * std::sqrt(double(nmat)) - lmax);
  }
  RngStream prng(158);
  EnergyTestResult res = gof_energy(a, b, 400, prng, 1500);
  CHECK(res.p_value > 0.01);
}

TEST_CASE("bessel diffusion without noise brackets the first hard edge eigenvalue") {
  RngStream rng(159);
  HardEdgeConfig cfg;
  cfg.r = 1;
  cfg.beta = std::numeric_limits<double>::infinity();
  cfg.gamma = 1;
  cfg.q_max = 1e3;
  cfg.n_paths = 1;

  cfg.a = 0;
  const double j01 = boost::math::cyl_bessel_j_zero(0.0, 1);
  CHECK(j01 * j01 / 4.0 == doctest::Approx(1.44580).epsilon(1e-4));
  cfg.lambda = 1.3;
  CHECK(simulate_bessel_sde(cfg, rng).counts[0] == 0);
  cfg.lambda = 1.6;
  CHECK(simulate_bessel_sde(cfg, rng).counts[0] >= 1);

  cfg.a = 1;
  const double j11 = boost::math::cyl_bessel_j_zero(1.0, 1);
  CHECK(j11 * j11 / 4.0 == doctest::Approx(3.67049).epsilon(1e-4));
  cfg.lambda = 3.5;
  CHECK(simulate_bessel_sde(cfg, rng).counts[0] == 0);
  cfg.lambda = 3.9;
  CHECK(simulate_bessel_sde(cfg, rng).counts[0] >= 1);
}

TEST_CASE("crossing probabilities match the exponential hard edge law") {
  // beta = 2, a = 0, gamma = 1: the scaled smallest eigenvalue is Exp(1), so
  // P(no crossing) = exp(-lambda)
  RngStream rng(160);
  HardEdgeConfig cfg;
  cfg.r = 1;
  cfg.beta = 2;
  cfg.gamma = 1;
  cfg.a = 0;
  cfg.q_max = 1e3;
  cfg.n_paths = 3000;

  cfg.lambda = 0;
  PathEnsemble pe0 = simulate_bessel_sde(cfg, rng);
  CHECK(pe0.prob_at_most(0) == 1.0);

  double prev = 1.0;
  for (double lam : {0.5, 1.0, 2.0}) {
    cfg.lambda = lam;
    RngStream lrng = rng.substream(std::uint64_t(lam * 16));
    PathEnsemble pe = simulate_bessel_sde(cfg, lrng);
    CHECK(pe.flag_rate() < 0.01);
    double p = pe.prob_at_most(0);
    double se = std::sqrt(p * (1.0 - p) / double(pe.counts.size()));
    CHECK(std::abs(p - std::exp(-lam)) < 4.0 * se + 0.015);
    CHECK(p <= prev + 0.02);
    prev = p;
  }
}

TEST_CASE("hard edge rescaling follows the exponential law at the classical edge") {
  // r = 1, s = 0, m = n: scaled smallest Wishart eigenvalue is Exp(1) for
  // beta = 2 in the large n limit
  RngStream rng(161);
  const int n = 300, draws = 2000;
  std::vector<double> xs;
  for (int d = 0; d < draws; ++d) {
    RngStream drng = rng.substream(std::uint64_t(d));
    Eigen::MatrixXd w = sample_bidiagonal_beta_wishart(n, double(n), 2.0, drng);
    auto [dg, od] = tridiag_of(w);
    double lmin = detail::tridiag_eigenvalue(dg, od, 0);
    xs.push_back(double(n) * lmin);  // rescale_hard with r = 1, gamma = 1
  }
  CHECK((rescale_hard<double>(sample_bidiagonal_beta_wishart(20, 20.0, 2.0, rng), 20, 1, 1.0)
             .minCoeff()) > 0);
  double dist = ks_distance(xs, [](double x) { return 1.0 - std::exp(-x); });
  CHECK(ks_p_value(dist, xs.size()) > 0.01);
}

TEST_CASE("kernel estimator reproduces the noise free hard edge eigenvalues") {
  RngStream rng(162);
  for (double a : {0.0, 1.0}) {
    double j1 = boost::math::cyl_bessel_j_zero(a, 1);
    std::vector<double> lam = discretize_bessel_kernel<double>(1, 2.0, 1.0, a, 0.01, 12.0, rng,
                                                              false, 2);
    REQUIRE(lam.size() == 2);
    CHECK(lam[0] == doctest::Approx(j1 * j1 / 4.0).epsilon(0.02));
    CHECK(lam[1] > lam[0]);
  }
  CHECK_THROWS_AS(discretize_bessel_kernel<double>(1, 2.0, 1.0, 0.0, 0.05, 12.0, rng),
                  std::domain_error);
}

TEST_CASE("noisy kernel estimator returns positive sorted eigenvalue estimates") {
  RngStream rng(163);
  std::vector<double> lam =
      discretize_bessel_kernel<std::complex<double>>(2, 2.0, 2.0, 0.5, 0.01, 8.0, rng, true, 3);
  REQUIRE(lam.size() == 3);
  CHECK(lam[0] > 0);
  CHECK(std::is_sorted(lam.begin(), lam.end()));
}

TEST_CASE("pooled spectra follow the semicircle law") {
  CHECK(semicircle_cdf(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(semicircle_cdf(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(semicircle_cdf(-3.0, 2.0) == doctest::Approx(0.0));

  RngStream rng(164);
  {
    const int n = 400, draws = 20;
    Eigen::MatrixXd spectra(draws, n);
    for (int d = 0; d < draws; ++d) {
      BlockJacobi<double> t = sample_tridiagonal_beta(n, 1.0, rng);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.dense(), Eigen::EigenvaluesOnly);
      spectra.row(d) = es.eigenvalues().transpose();
    }
    CHECK(dos_check(spectra, 1, 0.0) < 0.03);
  }
  {
    EnsembleParams p;
    p.beta = 1;
    p.n = 200;
    p.r = 2;
    p.s = 2;
    const int draws = 20;
    Eigen::MatrixXd spectra(draws, p.n * p.r);
    for (int d = 0; d < draws; ++d) {
      BlockJacobi<double> t = sample_hermite<double>(p, rng);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.dense(), Eigen::EigenvaluesOnly);
      spectra.row(d) = es.eigenvalues().transpose();
    }
    CHECK(dos_check(spectra, 2, 2.0) < 0.03);
  }
  CHECK_THROWS_AS(dos_check(Eigen::MatrixXd::Zero(2, 100), 1, 0.0), std::domain_error);
}

TEST_CASE("configuration validation rejects bad parameters") {
  RngStream rng(165);
  SoftEdgeConfig sc;
  sc.p_max = 10;
  CHECK_THROWS_AS(simulate_airy_sde(sc, rng), std::domain_error);
  HardEdgeConfig hc;
  hc.a = -2;
  CHECK_THROWS_AS(simulate_bessel_sde(hc, rng), std::domain_error);
}
