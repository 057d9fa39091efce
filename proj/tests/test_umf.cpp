#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "umfloc/error.hpp"
#include "umfloc/grid.hpp"
#include "umfloc/umf.hpp"
#include "umfloc/unimodal.hpp"

using namespace umfloc;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
  return m;
}

Eigen::MatrixXd random_mask(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution keep(p);
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = keep(rng) ? 1.0 : 0.0;
  return w;
}

Eigen::MatrixXd exact(const Points& s, int n, double theta = 0.0) {
  return exact_signature_matrix(SourceConfig::equal_power(s), FieldModel::gaussian(20.0, 1.0), n, 1.0, theta)
      .aggregate;
}

}  // namespace

TEST(UmfObjective, ZeroFactorsGiveDataNorm) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd H = random_matrix(rng, 6, 6), W = random_mask(rng, 6, 0.5);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(6, 2);
  EXPECT_NEAR(umf_objective(H, W, Z, Z), (W.array() * H.array()).matrix().squaredNorm(), 1e-14);
}

TEST(UmfObjective, ExactFactorsGiveZero) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd U = random_matrix(rng, 7, 2), V = random_matrix(rng, 7, 2);
  EXPECT_NEAR(umf_objective(U * V.transpose(), Eigen::MatrixXd::Ones(7, 7), U, V), 0.0, 1e-25);
}

TEST(UmfObjective, MatchesLoopOracle) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd H = random_matrix(rng, 5, 8), U = random_matrix(rng, 5, 3), V = random_matrix(rng, 8, 3);
    Eigen::MatrixXd W(5, 8);
    std::bernoulli_distribution keep(0.6);
    for (Eigen::Index i = 0; i < W.size(); ++i) W(i) = keep(rng);
    const double f = umf_objective(H, W, U, V);
    EXPECT_NEAR(f, oracle::umf_objective(H, W, U, V), 1e-12 * std::max(1.0, f));
  }
}

TEST(UmfObjective, DimensionMismatch) {
  const Eigen::MatrixXd H = Eigen::MatrixXd::Ones(4, 4);
  try {
    umf_objective(H, H, Eigen::MatrixXd::Ones(3, 1), Eigen::MatrixXd::Ones(4, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
  EXPECT_THROW(umf_gradients(H, H, Eigen::MatrixXd::Ones(4, 1), Eigen::MatrixXd::Ones(4, 2)), Error);
}

TEST(UmfGradients, ZeroAtExactFactorization) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd U = random_matrix(rng, 6, 2), V = random_matrix(rng, 6, 2);
  const auto [gu, gv] = umf_gradients(U * V.transpose(), random_mask(rng, 6, 0.5), U, V);
  EXPECT_LE(gu.cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE(gv.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(UmfGradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd H = random_matrix(rng, 6, 5), W = random_mask(rng, 6, 0.7).leftCols(5);
    Eigen::MatrixXd U = random_matrix(rng, 6, 2), V = random_matrix(rng, 5, 2);
    const auto [gu, gv] = umf_gradients(H, W, U, V);
    const double scale = std::max(gu.cwiseAbs().maxCoeff(), gv.cwiseAbs().maxCoeff());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < U.size(); ++i) {
      Eigen::MatrixXd up = U, dn = U;
      up(i) += h;
      dn(i) -= h;
      const double fd = (oracle::umf_objective(H, W, up, V) - oracle::umf_objective(H, W, dn, V)) / (2 * h);
      worst = std::max(worst, std::abs(fd - gu(i)) / scale);
    }
    for (Eigen::Index i = 0; i < V.size(); ++i) {
      Eigen::MatrixXd up = V, dn = V;
      up(i) += h;
      dn(i) -= h;
      const double fd = (oracle::umf_objective(H, W, U, up) - oracle::umf_objective(H, W, U, dn)) / (2 * h);
      worst = std::max(worst, std::abs(fd - gv(i)) / scale);
    }
    EXPECT_LE(worst, 1e-5);
  }
}

TEST(UmfGradients, AllOnesMaskIsPlainFactorizationGradient) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd H = random_matrix(rng, 5, 5), U = random_matrix(rng, 5, 2), V = random_matrix(rng, 5, 2);
  const auto [gu, gv] = umf_gradients(H, Eigen::MatrixXd::Ones(5, 5), U, V);
  EXPECT_LE((gu - (-2.0 * H * V + 2.0 * U * V.transpose() * V)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((gv - (-2.0 * H.transpose() * U + 2.0 * V * U.transpose() * U)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SolveUmf, RankOneExactFullyObserved) {
  const Eigen::MatrixXd H = exact({Vec2(0.08, -0.05)}, 16);
  const UmfSolution s = solve_umf(H, Eigen::MatrixXd::Ones(16, 16), UmfConfig{});
  EXPECT_LE(s.objective, 1e-8 * H.squaredNorm());
}

TEST(SolveUmf, TraceNonIncreasingAndObjectiveConsistent) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd H = exact({Vec2(0.1, 0.05), Vec2(-0.1, -0.1)}, 16);
    const Eigen::MatrixXd W = random_mask(rng, 16, 0.5);
    UmfConfig cfg;
    cfg.factors = 2;
    cfg.seed = static_cast<std::uint64_t>(t);
    const UmfSolution s = solve_umf(H, W, cfg);
    for (std::size_t k = 1; k < s.trace.size(); ++k) EXPECT_LE(s.trace[k], s.trace[k - 1]);
    EXPECT_NEAR(s.objective, oracle::umf_objective(H, W, s.U, s.V), 1e-9);
    for (int k = 0; k < 2; ++k) {
      EXPECT_TRUE(is_unimodal(s.U.col(k)));
      EXPECT_TRUE(is_unimodal(s.V.col(k)));
      EXPECT_NEAR(s.U.col(k).norm(), 1.0, 1e-12);
    }
    EXPECT_LE(s.iterations, cfg.max_iterations);
  }
}

TEST(SolveUmf, DeterministicUnderSeed) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd H = exact({Vec2(0.1, 0.05), Vec2(-0.1, -0.1)}, 12);
  const Eigen::MatrixXd W = random_mask(rng, 12, 0.6);
  UmfConfig cfg;
  cfg.factors = 2;
  cfg.seed = 99;
  const UmfSolution a = solve_umf(H, W, cfg), b = solve_umf(H, W, cfg);
  EXPECT_TRUE(a.U == b.U);
  EXPECT_TRUE(a.V == b.V);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.restart, b.restart);
}

TEST(SolveUmf, ScaleConsistency) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd H = exact({Vec2(0.1, 0.05), Vec2(-0.1, -0.1)}, 16);
  const Eigen::MatrixXd W = random_mask(rng, 16, 0.6);
  UmfConfig cfg;
  cfg.factors = 2;
  cfg.seed = 3;
  const UmfSolution a = solve_umf(H, W, cfg);
  const double c = 7.5;
  const UmfSolution b = solve_umf(c * H, W, cfg);
  EXPECT_NEAR(b.objective, c * c * a.objective, 1e-6 * c * c * std::max(a.objective, 1e-12));
  for (int k = 0; k < 2; ++k) {
    Eigen::Index ia, ib;
    a.U.col(k).maxCoeff(&ia);
    b.U.col(k).maxCoeff(&ib);
    EXPECT_EQ(ia, ib);
    a.V.col(k).maxCoeff(&ia);
    b.V.col(k).maxCoeff(&ib);
    EXPECT_EQ(ia, ib);
  }
}

TEST(SolveUmf, RotatedTwoSourceInstanceConvergesFaster) {
  // Nearly shared x coordinate: V columns almost coincide while H keeps rank 2.
  const Points s = {Vec2(0.02, 0.2), Vec2(-0.02, -0.2)};
  const int n = 24;
  const Eigen::MatrixXd aligned = exact(s, n, 0.0);
  const Eigen::MatrixXd rotated = exact(s, n, kPi / 4);
  const Eigen::MatrixXd W = Eigen::MatrixXd::Ones(n, n);
  std::vector<int> ia, ir;
  for (int seed = 0; seed < 20; ++seed) {
    UmfConfig cfg;
    cfg.factors = 2;
    cfg.restarts = 1;
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.tolerance = 0.0;
    auto iters = [&](const Eigen::MatrixXd& H) {
      const int k = solve_umf(H, W, cfg).iterations_to(1e-6);
      return k < 0 ? cfg.max_iterations + 1 : k;
    };
    ia.push_back(iters(aligned));
    ir.push_back(iters(rotated));
  }
  std::nth_element(ia.begin(), ia.begin() + 10, ia.end());
  std::nth_element(ir.begin(), ir.begin() + 10, ir.end());
  EXPECT_LT(ir[10], ia[10]);
}

TEST(SolveUmf, RejectsBadConfigAndEmptyMask) {
  UmfConfig cfg;
  cfg.shrink = 1.0;
  EXPECT_THROW(solve_umf(Eigen::MatrixXd::Ones(3, 3), Eigen::MatrixXd::Ones(3, 3), cfg), Error);
  EXPECT_THROW(solve_umf(Eigen::MatrixXd::Ones(3, 3), Eigen::MatrixXd::Zero(3, 3), UmfConfig{}), Error);
}

TEST(SolveUmf, TraceCsv) {
  const UmfSolution s = solve_umf(exact({Vec2(0.0, 0.0)}, 8), Eigen::MatrixXd::Ones(8, 8), UmfConfig{});
  const auto path = (std::filesystem::temp_directory_path() / "umfloc_trace.csv").string();
  write_objective_trace(s, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iteration,objective");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, static_cast<int>(s.trace.size()));
  std::filesystem::remove(path);
}
