#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <complex>
#include <vector>

#include "blockbeta/randcore.hpp"
#include "blockbeta/stats.hpp"

using namespace blockbeta;
using cplx = std::complex<double>;

TEST_CASE("fnormal real variance") {
  RngStream rng(11, 0);
  const int N = 1000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < N; ++i) {
    double x = sample_fnormal<double>(rng);
    s += x;
    s2 += x * x;
  }
  double var = s2 / N - (s / N) * (s / N);
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fnormal complex second moment and component independence") {
  RngStream rng(12, 0);
  const int N = 1000000;
  double m2 = 0, sre = 0, sim = 0, sreim = 0, sre2 = 0, sim2 = 0;
  for (int i = 0; i < N; ++i) {
    cplx z = sample_fnormal<cplx>(rng);
    m2 += std::norm(z);
    sre += z.real();
    sim += z.imag();
    sreim += z.real() * z.imag();
    sre2 += z.real() * z.real();
    sim2 += z.imag() * z.imag();
  }
  CHECK(m2 / N == doctest::Approx(1.0).epsilon(0.01));
  double cov = sreim / N - (sre / N) * (sim / N);
  double corr = cov / std::sqrt((sre2 / N) * (sim2 / N));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("chi mean of squares, integer and fractional dof") {
  RngStream rng(13, 0);
  const int N = 1000000;
  for (double dof : {5.0, 2.5}) {
    double s2 = 0;
    for (int i = 0; i < N; ++i) {
      double c = sample_chi(dof, rng);
      s2 += c * c;
    }
    CHECK(s2 / N == doctest::Approx(dof).epsilon(0.03 / dof * 2));
  }
  CHECK_THROWS_AS(sample_chi(0.0, rng), std::domain_error);
  CHECK_THROWS_AS(sample_chi(-1.0, rng), std::domain_error);
}

TEST_CASE("chi_1 is half-normal") {
  RngStream rng(14, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_chi(1.0, rng);
  double d = ks_distance(xs, [](double x) { return x <= 0 ? 0.0 : std::erf(x / std::sqrt(2.0)); });
  CHECK(d < 0.01);
}

TEST_CASE("gfe diagonal variance and hermiticity") {
  RngStream rng(15, 0);
  const int N = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < N; ++i) {
    auto x = sample_gfe<double>(2, rng);
    s += x(0, 0);
    s2 += x(0, 0) * x(0, 0);
  }
  double var = s2 / N - (s / N) * (s / N);
  CHECK(var == doctest::Approx(2.0).epsilon(0.025));

  auto xc = sample_gfe<cplx>(3, rng);
  CHECK((xc - xc.adjoint()).norm() == 0.0);
  auto xr = sample_gfe<double>(3, rng);
  CHECK((xr - xr.transpose()).norm() == 0.0);
  CHECK_THROWS_AS(sample_gfe<double>(0, rng), std::domain_error);
}

TEST_CASE("gfe 2x2 real largest eigenvalue mean vs quadrature") {
  // lambda_max = (x11+x22)/2 + sqrt(((x11-x22)/2)^2 + x12^2); the centered
  // part is sqrt(u^2+v^2) with u,v independent standard normals.
  double quad = 0, norm = 0;
  const double h = 0.005, lim = 8.0;
  for (double u = -lim; u <= lim; u += h)
    for (double v = -lim; v <= lim; v += h) {
      double w = std::exp(-0.5 * (u * u + v * v));
      quad += std::sqrt(u * u + v * v) * w;
      norm += w;
    }
  quad /= norm;

  RngStream rng(16, 0);
  const int N = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < N; ++i) {
    auto x = sample_gfe<double>(2, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x, Eigen::EigenvaluesOnly);
    double l = es.eigenvalues()(1);
    s += l;
    s2 += l * l;
  }
  double m = s / N;
  double se = std::sqrt((s2 / N - m * m) / N);
  CHECK(std::abs(m - quad) < 3 * se);
}

TEST_CASE("haar unitarity and column marginals") {
  RngStream rng(17, 0);
  auto q4 = sample_haar<cplx>(4, rng);
  CHECK((q4.adjoint() * q4 - MatrixX<cplx>::Identity(4, 4)).norm() < 1e-12);
  auto q4r = sample_haar<double>(4, rng);
  CHECK((q4r.transpose() * q4r - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);

  const int N = 100000;
  double s = 0;
  for (int i = 0; i < N; ++i) {
    auto q = sample_haar<cplx>(3, rng);
    s += std::norm(q(0, 0));
  }
  CHECK(s / N == doctest::Approx(1.0 / 3).epsilon(0.03));
}

TEST_CASE("haar O(2) entry follows the arcsine law") {
  RngStream rng(18, 0);
  const int N = 100000;
  std::vector<double> xs(N);
  for (auto& x : xs) x = sample_haar<double>(2, rng)(0, 0);
  auto cdf = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)) / M_PI + 0.5; };
  const int bins = 20;
  double stat = chi2_equiprobable(xs, cdf, bins);
  boost::math::chi_squared_distribution<double> chi2(bins - 1);
  double p = boost::math::cdf(boost::math::complement(chi2, stat));
  CHECK(p > 0.01);
}

TEST_CASE("haar invariance under fixed unitary") {
  RngStream rng(19, 0);
  auto u = sample_haar<cplx>(3, rng);
  const int N = 10000;
  Eigen::MatrixXd ta(N, 2), tb(N, 2);
  for (int i = 0; i < N; ++i) {
    auto q = sample_haar<cplx>(3, rng);
    cplx t1 = (u * q).trace(), t2 = sample_haar<cplx>(3, rng).trace();
    ta.row(i) << t1.real(), t1.imag();
    tb.row(i) << t2.real(), t2.imag();
  }
  RngStream prng(20, 0);
  auto res = gof_energy(ta, tb, 99, prng, 1000);
  CHECK(res.p_value > 0.01);
}

TEST_CASE("sqw shape, moments, determinant") {
  RngStream rng(21, 0);
  const int N = 100000;

  double s2 = 0;
  for (int i = 0; i < N * 10; ++i) {
    double x = sample_sqw<double>(1, 5.0, rng)(0, 0);
    s2 += x * x;
  }
  CHECK(s2 / (N * 10) == doctest::Approx(5.0).epsilon(0.006));

  double w11 = 0;
  for (int i = 0; i < N; ++i) {
    auto l = sample_sqw<double>(2, 4.0, rng);
    CHECK(l(0, 1) == 0.0);
    CHECK(l(0, 0) > 0.0);
    CHECK(l(1, 1) > 0.0);
    w11 += (l * l.transpose())(0, 0);
  }
  CHECK(w11 / N == doctest::Approx(4.0).epsilon(0.0125));

  double sdet = 0;
  for (int i = 0; i < N; ++i) {
    auto l = sample_sqw<cplx>(2, 4.0, rng);
    sdet += std::real((l * l.adjoint()).determinant());
  }
  CHECK(sdet / N == doctest::Approx(12.0).epsilon(0.025));

  CHECK_THROWS_AS(sample_sqw<double>(3, 1.5, rng), std::domain_error);
}

TEST_CASE("streams are reproducible and distinguishable") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool same = true, diff1 = false, diff2 = false;
  for (int i = 0; i < 100; ++i) {
    auto xa = sample_fnormal<double>(a);
    same = same && (xa == sample_fnormal<double>(b));
    diff1 = diff1 || (xa != sample_fnormal<double>(c));
    diff2 = diff2 || (xa != sample_fnormal<double>(d));
  }
  CHECK(same);
  CHECK(diff1);
  CHECK(diff2);
}
