// Copyright 2026 The dpdg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpdg/moment_system.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "dpdg/errors.h"
#include "dpdg/solver.h"
#include "testing.h"

namespace dpdg {
namespace {

NoisyDegrees Zeros(int n) { return {IntVector(n, 0), IntVector(n, 0)}; }

MomentSystem RandomSystem(int n, int p, std::uint64_t seed) {
  auto covs = testing::RandomCovariates(n, p, seed);
  const auto truth = testing::RandomParams(n, p, 0.8, seed + 1);
  auto g = SampleGraph(truth, covs, seed + 2);
  auto noisy = ReleaseBidegree(g, PrivacyBudget::FromEpsilon(2.0), seed + 3);
  return MomentSystem(std::move(g), std::move(covs), std::move(noisy));
}

// Straight double loops over the definitions.
Vector BruteF(const MomentSystem& sys, const ModelParams& m) {
  const int n = sys.n();
  Vector f(2 * n - 1);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) s += 1.0 / (1.0 + std::exp(-m.Eta(sys.covariates(), i, j)));
    }
    f[i] = sys.noisy().d_tilde[i] - s;
  }
  for (int j = 0; j < n - 1; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i != j) s += 1.0 / (1.0 + std::exp(-m.Eta(sys.covariates(), i, j)));
    }
    f[n + j] = sys.noisy().b_tilde[j] - s;
  }
  return f;
}

Vector BruteQ(const MomentSystem& sys, const ModelParams& m) {
  const int n = sys.n();
  Vector q = Vector::Zero(sys.p());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r =
          (sys.graph().edge(i, j) ? 1.0 : 0.0) - Logistic(m.Eta(sys.covariates(), i, j));
      for (int k = 0; k < sys.p(); ++k) q[k] += sys.covariates().z(i, j, k) * r;
    }
  }
  return q;
}

TEST(MomentFTest, EmptyGraphAtZero) {
  const int n = 6;
  const MomentSystem sys(DirectedGraph(n), testing::RandomCovariates(n, 1, 1), Zeros(n));
  const Vector f = sys.EvalF(ModelParams::Zero(n, 1));
  ASSERT_EQ(f.size(), 2 * n - 1);
  for (int k = 0; k < f.size(); ++k) EXPECT_DOUBLE_EQ(f[k], -(n - 1) / 2.0);
}

TEST(MomentFTest, ReleasedDegreeShiftsOneCoordinate) {
  const int n = 5;
  auto noisy = Zeros(n);
  noisy.d_tilde[0] = 1;
  const MomentSystem sys(DirectedGraph(n), testing::RandomCovariates(n, 1, 1), noisy);
  const Vector f = sys.EvalF(ModelParams::Zero(n, 1));
  EXPECT_DOUBLE_EQ(f[0], 1.0 - (n - 1) / 2.0);
  for (int k = 1; k < f.size(); ++k) EXPECT_DOUBLE_EQ(f[k], -(n - 1) / 2.0);
}

TEST(MomentFTest, TwoNodesClosedForm) {
  const auto covs = testing::RandomCovariates(2, 1, 4);
  const NoisyDegrees noisy{{1, 0}, {0, 1}};
  const MomentSystem sys(DirectedGraph(2, std::vector<std::pair<int, int>>{{0, 1}}),
                         covs, noisy);
  const ModelParams m(Vector{{0.3, -0.7}}, Vector{{0.4, 0.0}}, Vector{{1.2}});
  const double p12 = 1.0 / (1.0 + std::exp(-(0.3 + 1.2 * covs.z(0, 1, 0))));
  const double p21 = 1.0 / (1.0 + std::exp(-(-0.7 + 0.4 + 1.2 * covs.z(1, 0, 0))));
  const Vector f = sys.EvalF(m);
  ASSERT_EQ(f.size(), 3);
  EXPECT_NEAR(f[0], 1.0 - p12, 1e-15);
  EXPECT_NEAR(f[1], 0.0 - p21, 1e-15);
  EXPECT_NEAR(f[2], 0.0 - p21, 1e-15);
  EXPECT_NEAR(sys.EvalQ(m)[0], covs.z(0, 1, 0) * (1.0 - p12) - covs.z(1, 0, 0) * p21,
              1e-14);
}

TEST(MomentFTest, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sys = RandomSystem(7, 2, seed * 10);
    const auto m = testing::RandomParams(7, 2, 1.0, seed);
    EXPECT_LT((sys.EvalF(m) - BruteF(sys, m)).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT((sys.EvalQ(m) - BruteQ(sys, m)).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(MomentQTest, ZeroCovariatesGiveZero) {
  const int n = 5;
  auto g = SampleGraph(ModelParams::Zero(n, 2), CovariateSet(n, 2), 3);
  const MomentSystem sys(g, CovariateSet(n, 2), ExactDegrees(g));
  EXPECT_EQ(sys.EvalQ(testing::RandomParams(n, 2, 1.0, 1)), Vector::Zero(2));
}

TEST(MomentQTest, UsesRawAdjacency) {
  const int n = 6;
  const auto covs = testing::RandomCovariates(n, 1, 2);
  auto g = SampleGraph(ModelParams::Zero(n, 1), covs, 9);
  const MomentSystem exact(g, covs, ExactDegrees(g));
  const MomentSystem noisy(g, covs, NoisyDegrees{IntVector(n, 3), IntVector(n, 1)});
  const auto m = testing::RandomParams(n, 1, 1.0, 5);
  EXPECT_EQ(exact.EvalQ(m), noisy.EvalQ(m));
}

TEST(MomentSystemTest, RejectsMismatchedSizes) {
  EXPECT_THROW(MomentSystem(DirectedGraph(4), CovariateSet(5, 1), Zeros(4)), DomainError);
  EXPECT_THROW(MomentSystem(DirectedGraph(4), CovariateSet(4, 1), Zeros(3)), DomainError);
}

// Central differences of F and Q against the analytic blocks.
TEST(JacobianTest, FiniteDifferences) {
  const double h = 1e-5;
  for (int n : {3, 5, 8}) {
    const auto sys = RandomSystem(n, 2, 100 + n);
    const auto m = testing::RandomParams(n, 2, 1.0, 200 + n);
    const Vector theta = m.Theta();
    const Matrix dfdt = sys.DFDTheta(m), dfdg = sys.DFDGamma(m);
    const Matrix dqdt = sys.DQDTheta(m), dqdg = sys.DQDGamma(m);
    const double scale = std::max(1.0, dfdt.cwiseAbs().maxCoeff());
    for (int k = 0; k < theta.size(); ++k) {
      Vector up = theta, dn = theta;
      up[k] += h;
      dn[k] -= h;
      const auto mu = ModelParams::FromTheta(up, m.gamma());
      const auto md = ModelParams::FromTheta(dn, m.gamma());
      const Vector fd = (sys.EvalF(mu) - sys.EvalF(md)) / (2 * h);
      EXPECT_LT((fd - dfdt.col(k)).lpNorm<Eigen::Infinity>(), 1e-6 * scale) << n << " " << k;
      const Vector qd = (sys.EvalQ(mu) - sys.EvalQ(md)) / (2 * h);
      EXPECT_LT((qd - dqdt.col(k)).lpNorm<Eigen::Infinity>(), 1e-6 * scale);
    }
    for (int k = 0; k < 2; ++k) {
      Vector up = m.gamma(), dn = m.gamma();
      up[k] += h;
      dn[k] -= h;
      const ModelParams mu(m.alpha(), m.beta(), up), md(m.alpha(), m.beta(), dn);
      const Vector fd = (sys.EvalF(mu) - sys.EvalF(md)) / (2 * h);
      EXPECT_LT((fd - dfdg.col(k)).lpNorm<Eigen::Infinity>(), 1e-6 * scale);
      const Vector qd = (sys.EvalQ(mu) - sys.EvalQ(md)) / (2 * h);
      EXPECT_LT((qd - dqdg.col(k)).lpNorm<Eigen::Infinity>(), 1e-6 * scale);
    }
    EXPECT_LT((sys.JacobianV(m).Dense() + dfdt).lpNorm<Eigen::Infinity>(), 1e-14);
    // Symmetry of the full information matrix.
    EXPECT_LT((dqdt - dfdg.transpose()).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(JacobianTest, ZeroParametersGiveQuarterWeights) {
  const int n = 10;
  const MomentSystem sys(DirectedGraph(n), CovariateSet(n, 1), Zeros(n));
  const auto v = sys.JacobianV(ModelParams::Zero(n, 1));
  for (int i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(v.v11()[i], (n - 1) / 4.0);
  for (int j = 0; j < n - 1; ++j) EXPECT_DOUBLE_EQ(v.v22()[j], (n - 1) / 4.0);
  EXPECT_DOUBLE_EQ(v.Entry(0, n + 1), 0.25);
  EXPECT_DOUBLE_EQ(v.Entry(0, n), 0.0);
  EXPECT_DOUBLE_EQ(v.Entry(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(v.v2n2n(), (n - 1) / 4.0);
}

TEST(JacobianTest, InClassAtRandomParameters) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = 9;
    const auto sys = RandomSystem(n, 2, seed);
    const auto m = testing::RandomParams(n, 2, 1.0, seed + 50);
    const auto b = ComputeBounds(m, sys.covariates());
    std::string why;
    EXPECT_TRUE(sys.JacobianV(m).InClass(b.m_lower, b.M_upper, 1e-12, &why)) << why;
  }
}

TEST(JacobianTest, InClassRejectsViolations) {
  const int n = 4;
  const MomentSystem sys(DirectedGraph(n), CovariateSet(n, 1), Zeros(n));
  const auto v = sys.JacobianV(ModelParams::Zero(n, 1));
  std::string why;
  // Off-diagonal entries are 1/4, above M = 0.2.
  EXPECT_FALSE(v.InClass(0.1, 0.2, 1e-12, &why));
  EXPECT_FALSE(why.empty());
  Vector v11 = v.v11();
  v11[0] += 1.0;
  EXPECT_TRUE(StructuredJacobian(v.v11(), v.v22(), v.v12()).InClass(0.25, 0.25));
  EXPECT_FALSE(StructuredJacobian(v11, v.v22(), v.v12()).InClass(0.25, 0.25));
}

TEST(JacobianTest, BorderColumnAndCorner) {
  const auto sys = RandomSystem(6, 1, 7);
  const auto m = testing::RandomParams(6, 1, 1.0, 8);
  const auto v = sys.JacobianV(m);
  const Matrix w = [&] {
    Matrix p = EdgeProbabilities(m, sys.covariates());
    return Matrix(p.array() * (1 - p.array()));
  }();
  // v_{2n,2n} is the in-degree variance of node n.
  double col = 0.0;
  for (int i = 0; i < 5; ++i) col += w(i, 5);
  EXPECT_NEAR(v.v2n2n(), col, 1e-14);
  const Vector border = v.BorderColumn();
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(border[i], w(i, 5), 1e-14);
}

TEST(JacobianSolverTest, MatchesDenseInverse) {
  const auto sys = RandomSystem(12, 1, 3);
  const auto v = sys.JacobianV(testing::RandomParams(12, 1, 1.0, 4));
  const Matrix dense = v.Dense();
  const Vector rhs = Vector::LinSpaced(v.dim(), -1.0, 2.0);
  EXPECT_LT((dense * JacobianSolver(v).Solve(rhs) - rhs).lpNorm<Eigen::Infinity>(), 1e-11);
  EXPECT_LT((v.Multiply(rhs) - dense * rhs).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(ApproxInverseTest, DiagonalAtZeroParameters) {
  const int n = 10;
  const MomentSystem sys(DirectedGraph(n), CovariateSet(n, 1), Zeros(n));
  const auto v = sys.JacobianV(ModelParams::Zero(n, 1));
  const ApproxInverse s(v);
  const double v2n2n = (n - 1) / 4.0;
  EXPECT_NEAR(s.Entry(0, 0), 4.0 / 9.0 + 1.0 / v2n2n, 1e-15);
  EXPECT_NEAR(s.Entry(0, 1), 1.0 / v2n2n, 1e-15);
  EXPECT_NEAR(s.Entry(0, n), -1.0 / v2n2n, 1e-15);
  EXPECT_NEAR(s.Entry(n, n + 1), 1.0 / v2n2n, 1e-15);
}

TEST(ApproxInverseTest, SymmetricAndConsistentWithApply) {
  const auto sys = RandomSystem(8, 2, 21);
  const auto v = sys.JacobianV(testing::RandomParams(8, 2, 1.0, 22));
  const ApproxInverse s(v);
  const Matrix d = s.Dense();
  EXPECT_LT((d - d.transpose()).lpNorm<Eigen::Infinity>(), 1e-15);
  const Vector x = Vector::LinSpaced(v.dim(), 0.5, -1.5);
  EXPECT_LT((s.Apply(x) - d * x).lpNorm<Eigen::Infinity>(), 1e-13);
}

// S V maps (1_n, 0) to twice itself for every V in the class.
TEST(ApproxInverseTest, DoublesUniformAlphaShift) {
  const int n = 9;
  const auto sys = RandomSystem(n, 2, 23);
  const auto v = sys.JacobianV(testing::RandomParams(n, 2, 1.0, 24));
  Vector u = Vector::Zero(v.dim());
  u.head(n).setOnes();
  EXPECT_LT((ApproxInverse(v).Apply(v.Multiply(u)) - 2 * u).lpNorm<Eigen::Infinity>(), 1e-12);
}

double ApproxError(int n, std::uint64_t seed) {
  const auto covs = testing::RandomCovariates(n, 1, seed);
  const MomentSystem sys(DirectedGraph(n), covs, Zeros(n));
  const auto v = sys.JacobianV(testing::RandomParams(n, 1, 0.5, seed + 1));
  const Matrix inv = v.Dense().inverse();
  return (inv - ApproxInverse(v).Dense()).cwiseAbs().maxCoeff();
}

// The max-norm error of S decays like n^-2.
TEST(ApproxInverseTest, ErrorScalesInverseSquare) {
  std::vector<double> scaled;
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {20, 40, 80}) {
    const double e = ApproxError(n, 77);
    EXPECT_LT(e, prev);
    prev = e;
    scaled.push_back(e * n * n);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  EXPECT_LT(*hi / *lo, 2.0);
}

TEST(SchurTest, ZeroCovariatesAreDegenerate) {
  const int n = 6;
  auto g = SampleGraph(ModelParams::Zero(n, 1), CovariateSet(n, 1), 2);
  const MomentSystem sys(g, CovariateSet(n, 1), ExactDegrees(g));
  EXPECT_THROW(sys.SchurH(ModelParams::Zero(n, 1)), DegeneracyError);
}

TEST(SchurTest, SymmetricPositiveAndScaled) {
  const int n = 10;
  const auto sys = RandomSystem(n, 2, 31);
  const auto m = testing::RandomParams(n, 2, 1.0, 32);
  const SchurMatrix h = sys.SchurH(m);
  EXPECT_LT((h.h - h.h.transpose()).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_GT(h.min_eigenvalue, 0.0);
  EXPECT_EQ(h.n_pairs, n * (n - 1));
  const Matrix inv = h.h.inverse();
  EXPECT_NEAR(h.lambda_n, n * n * inv.cwiseAbs().rowwise().sum().maxCoeff(),
              1e-9 * h.lambda_n);
  // Dense Schur complement as an oracle.
  const Matrix vtg = -sys.DFDGamma(m);
  const Matrix dense = -sys.DQDGamma(m) - vtg.transpose() * sys.JacobianV(m).Dense().inverse() * vtg;
  EXPECT_LT((dense - h.h).lpNorm<Eigen::Infinity>(), 1e-9 * dense.norm());
}

// H equals minus the derivative of the profiled covariate equation.
TEST(SchurTest, FiniteDifferenceOfProfiledQ) {
  const int n = 8;
  const auto covs = testing::RandomCovariates(n, 1, 41);
  const ModelParams truth(Vector::Constant(n, 0.2), Vector::Zero(n), Vector{{0.5}});
  DirectedGraph g(n);
  NoisyDegrees deg;
  for (std::uint64_t s = 42;; ++s) {
    g = SampleGraph(truth, covs, s);
    deg = ExactDegrees(g);
    if (DegreesFeasible(deg)) break;
  }
  const MomentSystem sys(g, covs, deg);
  SolverConfig cfg;
  cfg.tol_theta = 1e-13;
  const Vector theta0 = LogitStart(deg, 1).Theta();
  auto profiled = [&](double gamma) {
    const Vector gv{{gamma}};
    const auto sol = SolveThetaGivenGamma(sys, gv, theta0, cfg);
    EXPECT_TRUE(sol.exists);
    return std::pair{sys.EvalQ(ModelParams::FromTheta(sol.theta, gv))[0], sol.theta};
  };
  const double gamma = 0.4, h = 1e-4;
  const auto [q0, theta] = profiled(gamma);
  (void)q0;
  const double fd = -(profiled(gamma + h).first - profiled(gamma - h).first) / (2 * h);
  const double analytic = sys.SchurH(ModelParams::FromTheta(theta, Vector{{gamma}})).h(0, 0);
  EXPECT_NEAR(fd, analytic, 1e-4 * std::abs(analytic));
}

}  // namespace
}  // namespace dpdg
