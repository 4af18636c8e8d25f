// Command line front end: sampling, exact identity verification, density
// goodness-of-fit, moment estimation, edge-limit simulators and the
// density-of-states check. Exit codes: 0 pass, 1 statistical fail, 2 usage or
// validation error, 3 numerical degeneracy.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockbeta/densities.hpp"
#include "blockbeta/edgelimits.hpp"
#include "blockbeta/ensembles.hpp"
#include "blockbeta/spectra.hpp"
#include "blockbeta/stats.hpp"
#include "blockbeta/vdm.hpp"

using json = nlohmann::json;
using namespace blockbeta;

namespace {

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("BLOCKBETA_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// Fixed task-to-stream assignment; results land in task order so the output
// is identical for any worker count.
template <class Fn>
void parallel_for(long n_tasks, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (long t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (long t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) fn(t);
    });
  for (auto& th : pool) th.join();
}

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::runtime_error("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

void write_csv_header(std::ostream& os, const json& config) {
  os << "# " << config.dump() << "\n";
}

template <class Scalar>
json matrix_to_json(const MatrixX<Scalar>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if constexpr (scalar_field<Scalar>::beta == 1) {
        row.push_back(m(i, j));
      } else {
        row.push_back({m(i, j).real(), m(i, j).imag()});
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw std::domain_error("empty grid");
  return out;
}

// --- sample -------------------------------------------------------------

struct SampleArgs {
  std::string family = "hermite";
  int beta = 1, n = 2, r = 2;
  double s = 2;
  double m = -1;
  long count = 1;
  std::uint64_t seed = 1;
  std::string out, what = "spectra", format = "csv";
  int threads = 0;
};

template <class Scalar>
int run_sample_typed(const SampleArgs& a, const EnsembleParams& p, bool laguerre,
                     const json& config) {
  Output out(a.out);
  const int d = p.n * p.r;
  if (a.what == "spectra") {
    Eigen::MatrixXd spectra(a.count, d);
    RngStream root(a.seed);
    parallel_for(a.count, resolve_threads(a.threads), [&](long t) {
      RngStream rng = root.substream(std::uint64_t(t));
      Eigen::VectorXd ev;
      if (laguerre) {
        auto [l, w] = sample_laguerre<Scalar>(p, rng);
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(w, Eigen::EigenvaluesOnly);
        ev = es.eigenvalues();
      } else {
        ev = eigh_banded(sample_hermite<Scalar>(p, rng)).eigenvalues;
      }
      spectra.row(t) = ev.transpose();
    });
    if (a.format == "csv") {
      write_csv_header(out.stream(), config);
      out.stream().precision(17);
      for (long t = 0; t < a.count; ++t) {
        for (int j = 0; j < d; ++j) out.stream() << (j ? "," : "") << spectra(t, j);
        out.stream() << "\n";
      }
    } else {
      json doc = {{"config", config}, {"spectra", json::array()}};
      for (long t = 0; t < a.count; ++t) {
        json row = json::array();
        for (int j = 0; j < d; ++j) row.push_back(spectra(t, j));
        doc["spectra"].push_back(std::move(row));
      }
      out.stream() << doc.dump(2) << "\n";
    }
  } else {  // matrices
    json doc = {{"config", config}, {"matrices", json::array()}};
    RngStream root(a.seed);
    for (long t = 0; t < a.count; ++t) {
      RngStream rng = root.substream(std::uint64_t(t));
      json entry = {{"beta", p.beta}, {"n", p.n}, {"r", p.r}, {"s", p.s}};
      if (laguerre) {
        auto [l, w] = sample_laguerre<Scalar>(p, rng);
        json dblocks = json::array(), oblocks = json::array();
        for (const auto& b : l.diag_blocks) dblocks.push_back(matrix_to_json(b));
        for (const auto& b : l.offdiag_blocks) oblocks.push_back(matrix_to_json(b));
        entry["m"] = *p.m;
        entry["blocks"] = {{"D", dblocks}, {"O", oblocks}};
      } else {
        BlockJacobi<Scalar> bj = sample_hermite<Scalar>(p, rng);
        json dblocks = json::array(), oblocks = json::array();
        for (const auto& b : bj.diag_blocks) dblocks.push_back(matrix_to_json(b));
        for (const auto& b : bj.offdiag_blocks) oblocks.push_back(matrix_to_json(b));
        entry["blocks"] = {{"A", dblocks}, {"B", oblocks}};
      }
      doc["matrices"].push_back(std::move(entry));
    }
    out.stream() << doc.dump(2) << "\n";
  }
  return 0;
}

int run_sample(const SampleArgs& a) {
  EnsembleParams p;
  p.beta = a.beta;
  p.n = a.n;
  p.r = a.r;
  p.s = a.s;
  const bool laguerre = (a.family == "laguerre");
  if (a.family != "hermite" && a.family != "laguerre")
    throw std::domain_error("sample: family must be hermite or laguerre");
  if (laguerre) {
    if (a.m < 0) throw std::domain_error("sample: laguerre family needs --m");
    p.m = a.m;
    p.validate_laguerre();
  } else {
    p.validate_common();
  }
  json config = {{"command", "sample"}, {"family", a.family}, {"beta", a.beta},
                 {"n", a.n},            {"r", a.r},           {"s", a.s},
                 {"count", a.count},    {"seed", a.seed},     {"what", a.what}};
  if (laguerre) config["m"] = a.m;
  if (a.beta == 1) return run_sample_typed<double>(a, p, laguerre, config);
  return run_sample_typed<std::complex<double>>(a, p, laguerre, config);
}

// --- verify -------------------------------------------------------------

int run_verify(const std::string& id, int size, int trials, std::uint64_t seed,
               const std::string& out_path) {
  Output out(out_path);
  RngStream rng(seed);
  json doc = {{"config",
               {{"command", "verify"}, {"id", id}, {"size", size}, {"trials", trials},
                {"seed", seed}}},
              {"results", json::array()}};

  if (id == "conjecture-6.1" || id == "overlap-conjecture") {
    ConjectureReport rep = check_conjecture(size, random_distinct_rats(rng, 2 * size));
    doc["pass"] = rep.pass;
    for (const auto& row : rep.rows) {
      json profile = json::array();
      for (int v : row.profile) profile.push_back(v);
      doc["results"].push_back(
          {{"profile", profile}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"pass", row.pass}});
    }
    out.stream() << doc.dump(2) << "\n";
    return rep.pass ? 0 : 1;
  }

  const auto& names = identity_names();
  if (std::find(names.begin(), names.end(), id) == names.end())
    throw std::domain_error("verify: unknown identity " + id);

  bool all_pass = true;
  for (int t = 0; t < trials; ++t) {
    IdentityReport rep;
    if (id == "sylvester") {
      rep = check_identity(id, size, {}, rng);
    } else if (id == "cauchy-cycle") {
      rep = check_identity(id, size, random_distinct_rats(rng, size), rng);
    } else if (id == "detm-pfaffian") {
      RatVec lam;
      while (int(lam.size()) < 2 * size) {
        Rat x = random_rat(rng, 60, 4, true);
        if (x <= 0) x = 1 - x;
        Rat sq = x * x;
        if (std::find(lam.begin(), lam.end(), sq) == lam.end()) lam.push_back(sq);
      }
      rep = check_identity(id, size, lam, rng);
    } else {
      rep = check_identity(id, size, random_distinct_rats(rng, 2 * size), rng);
    }
    all_pass = all_pass && rep.pass;
    doc["results"].push_back({{"trial", t}, {"pass", rep.pass}, {"lhs", rep.lhs},
                              {"rhs", rep.rhs}, {"note", rep.note}});
  }
  doc["pass"] = all_pass;
  out.stream() << doc.dump(2) << "\n";
  return all_pass ? 0 : 1;
}

// --- density-test -------------------------------------------------------

struct DensityTestArgs {
  std::string family = "hermite";
  int beta = 1, n = 2, r = 2;
  double s = 2;
  double m = -1;
  long samples = 4000;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;
};

int run_density_test(const DensityTestArgs& a) {
  DensitySpec spec;
  spec.family =
      a.family == "laguerre" ? DensitySpec::Family::laguerre : DensitySpec::Family::hermite;
  spec.beta = a.beta;
  spec.n = a.n;
  spec.r = a.r;
  spec.s = a.s;
  if (a.m >= 0) spec.m = a.m;
  spec.validate();

  EnsembleParams p;
  p.beta = a.beta;
  p.n = a.n;
  p.r = a.r;
  p.s = a.s;
  const bool laguerre = spec.family == DensitySpec::Family::laguerre;
  if (laguerre) p.m = a.m;

  const int d = spec.dim();
  Eigen::MatrixXd ens(a.samples, d);
  RngStream root(a.seed);
  parallel_for(a.samples, resolve_threads(a.threads), [&](long t) {
    RngStream rng = root.substream(std::uint64_t(t));
    Eigen::VectorXd ev;
    if (a.beta == 1) {
      if (laguerre) {
        auto [l, w] = sample_laguerre<double>(p, rng);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
        ev = es.eigenvalues();
      } else {
        ev = eigh_banded(sample_hermite<double>(p, rng)).eigenvalues;
      }
    } else {
      if (laguerre) {
        auto [l, w] = sample_laguerre<std::complex<double>>(p, rng);
        Eigen::SelfAdjointEigenSolver<MatrixX<std::complex<double>>> es(w,
                                                                        Eigen::EigenvaluesOnly);
        ev = es.eigenvalues();
      } else {
        ev = eigh_banded(sample_hermite<std::complex<double>>(p, rng)).eigenvalues;
      }
    }
    ens.row(t) = ev.transpose();
  });

  McmcConfig mc;
  mc.n_steps = std::max<long>(20000, a.samples * 10 / mc.n_chains);
  RngStream mrng = root.substream(1u << 20);
  McmcResult mcmc = mcmc_sample(spec, mc, mrng);

  RngStream prng = root.substream(1u << 21);
  EnergyTestResult res = gof_energy(ens, mcmc.samples, 400, prng);

  Output out(a.out);
  json doc = {{"config",
               {{"command", "density-test"}, {"family", a.family}, {"beta", a.beta},
                {"n", a.n}, {"r", a.r}, {"s", a.s}, {"samples", a.samples}, {"seed", a.seed}}},
              {"energy_statistic", res.statistic},
              {"p_value", res.p_value},
              {"mcmc_acceptance", mcmc.acceptance_rate},
              {"pass", res.p_value > 0.01}};
  if (a.m >= 0) doc["config"]["m"] = a.m;
  out.stream() << doc.dump(2) << "\n";
  return res.p_value > 0.01 ? 0 : 1;
}

// --- moment -------------------------------------------------------------

int run_moment(int n, int r, int beta, double s, double p_exp, long n_draws, std::uint64_t seed,
               const std::string& mode, const std::string& lambda_csv,
               const std::string& out_path) {
  Eigen::VectorXd lam(n * r);
  if (lambda_csv.empty()) {
    for (int i = 0; i < n * r; ++i) lam(i) = double(i) / 8.0;
  } else {
    auto xs = parse_grid(lambda_csv);
    if (int(xs.size()) != n * r) throw std::domain_error("moment: need rn lambda values");
    for (int i = 0; i < n * r; ++i) lam(i) = xs[std::size_t(i)];
  }
  MomentMode mm = mode == "haar" ? MomentMode::haar : MomentMode::gaussian;
  RngStream rng(seed);
  MomentEstimate est = beta == 1
                           ? mc_moment<double>(lam, r, p_exp, n_draws, mm, rng)
                           : mc_moment<std::complex<double>>(lam, r, p_exp, n_draws, mm, rng);
  MomentConstants cons = moment_constants(n, beta, r, s);

  Output out(out_path);
  json doc = {{"config",
               {{"command", "moment"}, {"n", n}, {"r", r}, {"beta", beta}, {"s", s},
                {"exp", p_exp}, {"N", n_draws}, {"mode", mode}, {"seed", seed}}},
              {"estimate", est.estimate},
              {"std_error", est.std_error},
              {"kappa", cons.kappa},
              {"c", cons.c}};
  json lj = json::array();
  for (int i = 0; i < lam.size(); ++i) lj.push_back(lam(i));
  doc["config"]["lambda"] = lj;
  out.stream() << doc.dump(2) << "\n";
  return 0;
}

// --- soft-edge ----------------------------------------------------------

double classical_edge_beta(int r, int beta, double s) { return beta * (r + s) / double(r); }

// Lowest rescaled eigenvalue across draws of the block ensemble.
std::vector<double> matrix_edge_samples(int r, int beta, double s, int n, long draws,
                                        RngStream& root, int threads) {
  std::vector<double> lows(static_cast<std::size_t>(draws));
  EnsembleParams p;
  p.beta = beta;
  p.n = n;
  p.r = r;
  p.s = s;
  parallel_for(draws, threads, [&](long t) {
    RngStream rng = root.substream(std::uint64_t(t));
    Eigen::MatrixXd h;
    if (beta == 1) {
      h = rescale_soft(sample_hermite<double>(p, rng), n, r, s);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
      lows[std::size_t(t)] = es.eigenvalues()(0);
    } else {
      MatrixX<std::complex<double>> hc =
          rescale_soft(sample_hermite<std::complex<double>>(p, rng), n, r, s);
      Eigen::SelfAdjointEigenSolver<MatrixX<std::complex<double>>> es(hc, Eigen::EigenvaluesOnly);
      lows[std::size_t(t)] = es.eigenvalues()(0);
    }
  });
  return lows;
}

// Lowest eigenvalue draws of the r = 1 discretized operator with diffusion
// parameter beta_eff; the edge law depends only on beta * gamma.
std::vector<double> operator_edge_samples(double beta_eff, long draws, RngStream& root,
                                          int threads) {
  std::vector<double> lows(static_cast<std::size_t>(draws));
  parallel_for(draws, threads, [&](long t) {
    RngStream rng = root.substream(std::uint64_t(t));
    Eigen::MatrixXd m = discretize_airy<double>(1, beta_eff, 1.0, 0.01, 10.0, rng, true);
    Eigen::VectorXd dg = m.diagonal(), od(m.rows() - 1);
    for (Eigen::Index i = 0; i + 1 < m.rows(); ++i) od(i) = m(i, i + 1);
    lows[std::size_t(t)] = detail::tridiag_eigenvalue(dg, od, 0);
  });
  return lows;
}

double empirical_cdf(const std::vector<double>& xs, double t) {
  long c = 0;
  for (double v : xs) c += (v <= t);
  return double(c) / double(xs.size());
}

int run_soft_edge(const std::string& mode, int r, int beta, double s, double gamma_in, int k,
                  long paths, const std::string& grid_csv, std::uint64_t seed,
                  const std::string& out_path, int threads) {
  const double gamma = gamma_in > 0 ? gamma_in : (r + s) / double(r);
  std::vector<double> grid =
      grid_csv.empty() ? std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0} : parse_grid(grid_csv);
  RngStream root(seed);
  Output out(out_path);
  json config = {{"command", "soft-edge"}, {"mode", mode}, {"r", r},         {"beta", beta},
                 {"s", s},                 {"gamma", gamma}, {"k", k},       {"paths", paths},
                 {"seed", seed},           {"grid", grid}};

  SoftEdgeConfig cfg;
  cfg.r = r;
  cfg.beta = beta;
  cfg.gamma = gamma;
  cfg.n_paths = paths;
  cfg.dx = 2e-3;
  cfg.p_max = 1e3;

  if (mode == "cdf") {
    CdfTable tab;
    tab.lambda = grid;
    tab.prob.resize(grid.size());
    tab.std_error.resize(grid.size());
    double max_flag = 0;
    std::vector<double> flags(grid.size());
    parallel_for(long(grid.size()), threads, [&](long i) {
      SoftEdgeConfig c = cfg;
      c.lambda = grid[std::size_t(i)];
      RngStream rng = root.substream(std::uint64_t(i));
      PathEnsemble pe = simulate_airy_sde(c, rng);
      double p = 1.0 - pe.prob_at_most(k);
      tab.prob[std::size_t(i)] = p;
      tab.std_error[std::size_t(i)] = std::sqrt(p * (1 - p) / double(pe.counts.size()));
      flags[std::size_t(i)] = pe.flag_rate();
    });
    for (double f : flags) max_flag = std::max(max_flag, f);
    write_csv_header(out.stream(), config);
    out.stream() << "lambda,estimate,std_error\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out.stream() << tab.lambda[i] << "," << tab.prob[i] << "," << tab.std_error[i] << "\n";
    return max_flag > 0.01 ? 3 : 0;
  }

  if (mode == "cross-check") {
    const double bg = beta * gamma;
    std::vector<double> sde(grid.size()), sde_se(grid.size());
    parallel_for(long(grid.size()), threads, [&](long i) {
      SoftEdgeConfig c = cfg;
      c.lambda = grid[std::size_t(i)];
      RngStream rng = root.substream(std::uint64_t(i));
      PathEnsemble pe = simulate_airy_sde(c, rng);
      sde[std::size_t(i)] = 1.0 - pe.prob_at_most(k);
      sde_se[std::size_t(i)] =
          std::sqrt(sde[std::size_t(i)] * (1 - sde[std::size_t(i)]) / double(pe.counts.size()));
    });
    RngStream orng = root.substream(1000);
    std::vector<double> op_lows = operator_edge_samples(bg, paths, orng, threads);
    const int n_mat = 400 / r;
    RngStream mrng = root.substream(2000);
    std::vector<double> mat_lows =
        matrix_edge_samples(r, beta, r * (gamma - 1.0), n_mat, paths, mrng, threads);

    // The pre-limit ensemble's edge location converges very slowly (the
    // rescaled offset decays roughly like (rn)^{-1/6} and is still ~0.4 at
    // rn = 400) while the shape of the law converges fast, so the matrix
    // estimator is read off in its own affine frame: its CDF is evaluated at
    // points with the same standardized coordinate as the reference grid.
    const double m_op = mean(op_lows), s_op = std::sqrt(variance(op_lows));
    const double m_mat = mean(mat_lows), s_mat = std::sqrt(variance(mat_lows));

    double max_diff = 0;
    write_csv_header(out.stream(), config);
    out.stream() << "lambda,sde,operator,matrix\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double op = empirical_cdf(op_lows, grid[i]);
      double t = (grid[i] - m_op) / s_op;
      double mat = empirical_cdf(mat_lows, m_mat + t * s_mat);
      max_diff = std::max({max_diff, std::abs(sde[i] - op), std::abs(sde[i] - mat),
                           std::abs(op - mat)});
      out.stream() << grid[i] << "," << sde[i] << "," << op << "," << mat << "\n";
    }
    out.stream() << "# max_pairwise_diff " << max_diff << "\n";
    return max_diff <= 0.05 ? 0 : 1;
  }

  if (mode == "probe") {
    // edge of the r, beta ensemble against the scalar tridiagonal model at
    // beta + 2/r; reported without pass/fail semantics
    const double beta_conj = beta + 2.0 / r;
    const int n_mat = 400 / r, n_sc = 400;
    RngStream mrng = root.substream(1);
    std::vector<double> a(static_cast<std::size_t>(paths)), b(static_cast<std::size_t>(paths));
    EnsembleParams p;
    p.beta = beta;
    p.n = n_mat;
    p.r = r;
    p.s = r * (gamma - 1.0);
    parallel_for(paths, threads, [&](long t) {
      RngStream rng = mrng.substream(std::uint64_t(t));
      if (beta == 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            rescale_soft(sample_hermite<double>(p, rng), p.n, p.r, p.s), Eigen::EigenvaluesOnly);
        a[std::size_t(t)] = es.eigenvalues()(0);
      } else {
        Eigen::SelfAdjointEigenSolver<MatrixX<std::complex<double>>> es(
            rescale_soft(sample_hermite<std::complex<double>>(p, rng), p.n, p.r, p.s),
            Eigen::EigenvaluesOnly);
        a[std::size_t(t)] = es.eigenvalues()(0);
      }
      BlockJacobi<double> tri = sample_tridiagonal_beta(n_sc, beta_conj, rng);
      Eigen::MatrixXd td = tri.dense();
      Eigen::VectorXd dg = td.diagonal(), od(n_sc - 1);
      for (int i = 0; i + 1 < n_sc; ++i) od(i) = td(i, i + 1);
      double lmax = detail::tridiag_eigenvalue(dg, od, n_sc - 1);
      b[std::size_t(t)] =
          std::pow(double(n_sc), 1.0 / 6.0) * (2.0 * std::sqrt(double(n_sc)) - lmax);
    });
    // the pre-limit location converges slowly, so the probe compares
    // location-scale standardized samples and reports the raw frames
    const double m_a = mean(a), s_a = std::sqrt(variance(a));
    const double m_b = mean(b), s_b = std::sqrt(variance(b));
    Eigen::MatrixXd ma(paths, 1), mb(paths, 1);
    for (long t = 0; t < paths; ++t) {
      ma(t, 0) = (a[std::size_t(t)] - m_a) / s_a;
      mb(t, 0) = (b[std::size_t(t)] - m_b) / s_b;
    }
    RngStream prng = root.substream(3000);
    EnergyTestResult res = gof_energy(ma, mb, 300, prng, 1500);
    json doc = {{"config", config},
                {"beta_scalar_reference", beta_conj},
                {"block_frame", {{"mean", m_a}, {"sd", s_a}}},
                {"scalar_frame", {{"mean", m_b}, {"sd", s_b}}},
                {"energy_statistic", res.statistic},
                {"p_value", res.p_value},
                {"gating", false}};
    out.stream() << doc.dump(2) << "\n";
    return 0;
  }

  throw std::domain_error("soft-edge: unknown mode " + mode);
}

// --- hard-edge ----------------------------------------------------------

int run_hard_edge(const std::string& mode, int r, int beta, double gamma, double a, long paths,
                  const std::string& grid_csv, std::uint64_t seed, const std::string& out_path,
                  int threads) {
  std::vector<double> grid =
      grid_csv.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0} : parse_grid(grid_csv);
  RngStream root(seed);
  Output out(out_path);
  json config = {{"command", "hard-edge"}, {"mode", mode}, {"r", r},     {"beta", beta},
                 {"gamma", gamma},         {"a", a},       {"paths", paths}, {"seed", seed},
                 {"grid", grid}};

  HardEdgeConfig cfg;
  cfg.r = r;
  cfg.beta = beta;
  cfg.gamma = gamma;
  cfg.a = a;
  cfg.n_paths = paths;
  cfg.q_max = 1e3;

  if (mode == "cdf") {
    std::vector<double> prob(grid.size()), se(grid.size()), flags(grid.size());
    parallel_for(long(grid.size()), threads, [&](long i) {
      HardEdgeConfig c = cfg;
      c.lambda = grid[std::size_t(i)];
      RngStream rng = root.substream(std::uint64_t(i));
      PathEnsemble pe = simulate_bessel_sde(c, rng);
      double p = 1.0 - pe.prob_at_most(0);  // P(smallest <= lambda)
      prob[std::size_t(i)] = p;
      se[std::size_t(i)] = std::sqrt(p * (1 - p) / double(pe.counts.size()));
      flags[std::size_t(i)] = pe.flag_rate();
    });
    double max_flag = 0;
    for (double f : flags) max_flag = std::max(max_flag, f);
    write_csv_header(out.stream(), config);
    out.stream() << "lambda,estimate,std_error\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out.stream() << grid[i] << "," << prob[i] << "," << se[i] << "\n";
    return max_flag > 0.01 ? 3 : 0;
  }

  if (mode == "cross-check") {
    // SDE crossing CDF against the rescaled smallest eigenvalue of the scalar
    // Wishart-type model with matching hard edge exponent
    std::vector<double> sde(grid.size());
    parallel_for(long(grid.size()), threads, [&](long i) {
      HardEdgeConfig c = cfg;
      c.lambda = grid[std::size_t(i)];
      RngStream rng = root.substream(std::uint64_t(i));
      PathEnsemble pe = simulate_bessel_sde(c, rng);
      sde[std::size_t(i)] = 1.0 - pe.prob_at_most(0);
    });
    const int n_mat = 300;
    std::vector<double> lows(static_cast<std::size_t>(paths));
    RngStream mrng = root.substream(1000);
    parallel_for(paths, threads, [&](long t) {
      RngStream rng = mrng.substream(std::uint64_t(t));
      Eigen::MatrixXd w =
          sample_bidiagonal_beta_wishart(n_mat, n_mat + a / gamma, beta * gamma, rng);
      Eigen::VectorXd dg = w.diagonal(), od(n_mat - 1);
      for (int i = 0; i + 1 < n_mat; ++i) od(i) = w(i, i + 1);
      lows[std::size_t(t)] = double(n_mat) * detail::tridiag_eigenvalue(dg, od, 0);
    });
    double max_diff = 0;
    write_csv_header(out.stream(), config);
    out.stream() << "lambda,sde,matrix\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      long c = 0;
      for (double v : lows) c += (v <= grid[i]);
      double mat = double(c) / double(paths);
      max_diff = std::max(max_diff, std::abs(sde[i] - mat));
      out.stream() << grid[i] << "," << sde[i] << "," << mat << "\n";
    }
    out.stream() << "# max_diff " << max_diff << "\n";
    return max_diff <= 0.05 ? 0 : 1;
  }

  if (mode == "kernel") {
    RngStream rng = root.substream(0);
    std::vector<double> lam = beta == 1
                                  ? discretize_bessel_kernel<double>(r, beta, gamma, a, 0.01,
                                                                     std::max(12.0, 8.0 / r), rng)
                                  : discretize_bessel_kernel<std::complex<double>>(
                                        r, beta, gamma, a, 0.01, std::max(12.0, 8.0 / r), rng);
    json doc = {{"config", config}, {"eigenvalue_estimates", lam}};
    out.stream() << doc.dump(2) << "\n";
    return 0;
  }

  if (mode == "probe") {
    // smallest-eigenvalue law of the r-block ensemble against the r = 1 SDE
    // at diffusion parameter beta + 2/r; reported without pass/fail semantics
    const double beta_conj = beta + 2.0 / r;
    std::vector<double> sde(grid.size());
    parallel_for(long(grid.size()), threads, [&](long i) {
      HardEdgeConfig c = cfg;
      c.r = 1;
      c.beta = beta_conj;
      c.lambda = grid[std::size_t(i)];
      RngStream rng = root.substream(std::uint64_t(i));
      PathEnsemble pe = simulate_bessel_sde(c, rng);
      sde[std::size_t(i)] = 1.0 - pe.prob_at_most(0);
    });
    write_csv_header(out.stream(), config);
    out.stream() << "lambda,sde_reference_cdf\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out.stream() << grid[i] << "," << sde[i] << "\n";
    return 0;
  }

  throw std::domain_error("hard-edge: unknown mode " + mode);
}

// --- dos ----------------------------------------------------------------

int run_dos(int r, double s, int n, int beta, long draws, std::uint64_t seed,
            const std::string& out_path, int threads) {
  EnsembleParams p;
  p.beta = beta;
  p.n = n;
  p.r = r;
  p.s = s;
  p.validate_common();
  const int d = n * r;
  Eigen::MatrixXd spectra(draws, d);
  RngStream root(seed);
  parallel_for(draws, threads, [&](long t) {
    RngStream rng = root.substream(std::uint64_t(t));
    if (beta == 1) {
      spectra.row(t) = eigh_banded(sample_hermite<double>(p, rng)).eigenvalues.transpose();
    } else {
      spectra.row(t) =
          eigh_banded(sample_hermite<std::complex<double>>(p, rng)).eigenvalues.transpose();
    }
  });
  double dist = dos_check(spectra, r, s);
  Output out(out_path);
  json doc = {{"config",
               {{"command", "dos"}, {"r", r}, {"s", s}, {"n", n}, {"beta", beta},
                {"draws", draws}, {"seed", seed}}},
              {"sup_distance", dist},
              {"threshold", 0.05},
              {"pass", dist < 0.05}};
  out.stream() << doc.dump(2) << "\n";
  return dist < 0.05 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block beta ensemble toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: BLOCKBETA_THREADS or 1)");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "draw ensemble matrices or spectra");
  sample->add_option("--family", sa.family, "hermite or laguerre");
  sample->add_option("--beta", sa.beta);
  sample->add_option("--n", sa.n);
  sample->add_option("--r", sa.r);
  sample->add_option("--s", sa.s);
  sample->add_option("--m", sa.m, "laguerre parameter");
  sample->add_option("--count", sa.count);
  sample->add_option("--seed", sa.seed);
  sample->add_option("--out", sa.out);
  sample->add_option("--what", sa.what, "spectra or matrices");
  sample->add_option("--format", sa.format, "csv or json");

  std::string v_id = "id-pfaff", v_out;
  int v_size = 2, v_trials = 100;
  std::uint64_t v_seed = 1;
  auto* verify = app.add_subcommand("verify", "exact identity checks");
  verify->add_option("--id", v_id, "identity name or conjecture-6.1");
  verify->add_option("--n,--k,--size", v_size, "size parameter");
  verify->add_option("--trials", v_trials);
  verify->add_option("--seed", v_seed);
  verify->add_option("--out", v_out);

  DensityTestArgs da;
  auto* dtest = app.add_subcommand("density-test", "ensemble spectra vs MCMC density samples");
  dtest->add_option("--family", da.family);
  dtest->add_option("--beta", da.beta);
  dtest->add_option("--n", da.n);
  dtest->add_option("--r", da.r);
  dtest->add_option("--s", da.s);
  dtest->add_option("--m", da.m);
  dtest->add_option("--samples", da.samples);
  dtest->add_option("--seed", da.seed);
  dtest->add_option("--out", da.out);

  int m_n = 1, m_r = 2, m_beta = 1;
  double m_s = 2, m_exp = 2;
  long m_N = 100000;
  std::uint64_t m_seed = 1;
  std::string m_mode = "gaussian", m_lambda, m_out;
  auto* moment = app.add_subcommand("moment", "Monte Carlo determinant moments");
  moment->add_option("--n", m_n);
  moment->add_option("--r", m_r);
  moment->add_option("--beta", m_beta);
  moment->add_option("--s", m_s);
  moment->add_option("--exp", m_exp);
  moment->add_option("--N", m_N);
  moment->add_option("--mode", m_mode, "haar or gaussian");
  moment->add_option("--lambda", m_lambda, "comma separated evaluation points");
  moment->add_option("--seed", m_seed);
  moment->add_option("--out", m_out);

  std::string se_mode = "cdf", se_grid, se_out;
  int se_r = 1, se_beta = 2, se_k = 0;
  double se_s = 0, se_gamma = 0;
  long se_paths = 2000;
  std::uint64_t se_seed = 1;
  auto* soft = app.add_subcommand("soft-edge", "Airy-type edge simulators");
  soft->add_option("--mode", se_mode, "cdf, cross-check or probe");
  soft->add_option("--r", se_r);
  soft->add_option("--beta", se_beta);
  soft->add_option("--s", se_s);
  soft->add_option("--gamma", se_gamma, "overrides (r+s)/r");
  soft->add_option("--k", se_k, "eigenvalue index");
  soft->add_option("--paths", se_paths);
  soft->add_option("--grid", se_grid, "comma separated lambda grid");
  soft->add_option("--seed", se_seed);
  soft->add_option("--out", se_out);

  std::string he_mode = "cdf", he_grid, he_out;
  int he_r = 1, he_beta = 2;
  double he_gamma = 1, he_a = 0;
  long he_paths = 2000;
  std::uint64_t he_seed = 1;
  auto* hard = app.add_subcommand("hard-edge", "Bessel-type edge simulators");
  hard->add_option("--mode", he_mode, "cdf, cross-check, kernel or probe");
  hard->add_option("--r", he_r);
  hard->add_option("--beta", he_beta);
  hard->add_option("--gamma", he_gamma);
  hard->add_option("--a", he_a, "hard edge exponent");
  hard->add_option("--paths", he_paths);
  hard->add_option("--grid", he_grid);
  hard->add_option("--seed", he_seed);
  hard->add_option("--out", he_out);

  int d_r = 1, d_n = 400, d_beta = 1;
  double d_s = 0;
  long d_draws = 20;
  std::uint64_t d_seed = 1;
  std::string d_out;
  auto* dos = app.add_subcommand("dos", "density of states vs semicircle");
  dos->add_option("--r", d_r);
  dos->add_option("--s", d_s);
  dos->add_option("--n", d_n);
  dos->add_option("--beta", d_beta);
  dos->add_option("--draws", d_draws);
  dos->add_option("--seed", d_seed);
  dos->add_option("--out", d_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    sa.threads = da.threads = threads;
    if (*sample) return run_sample(sa);
    if (*verify) return run_verify(v_id, v_size, v_trials, v_seed, v_out);
    if (*dtest) return run_density_test(da);
    if (*moment) return run_moment(m_n, m_r, m_beta, m_s, m_exp, m_N, m_seed, m_mode, m_lambda, m_out);
    if (*soft)
      return run_soft_edge(se_mode, se_r, se_beta, se_s, se_gamma, se_k, se_paths, se_grid,
                           se_seed, se_out, resolve_threads(threads));
    if (*hard)
      return run_hard_edge(he_mode, he_r, he_beta, he_gamma, he_a, he_paths, he_grid, he_seed,
                           he_out, resolve_threads(threads));
    if (*dos) return run_dos(d_r, d_s, d_n, d_beta, d_draws, d_seed, d_out, resolve_threads(threads));
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
