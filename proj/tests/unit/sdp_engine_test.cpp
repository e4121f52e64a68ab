// Copyright 2026 The irsfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "irsfl/sdp_engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "irsfl/rng.hpp"
#include "oracles.hpp"

namespace irsfl::sdp {
namespace {

CMatrix random_hermitian(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, {31});
  CMatrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = complex_normal(rng);
  return 0.5 * (b + b.adjoint());
}

SdpProblem base_problem(int n, int p) {
  SdpProblem pr;
  pr.dim = n;
  pr.num_scalars = p;
  pr.obj_matrix = CMatrix::Zero(n, n);
  pr.obj_scalars = RVector::Zero(p);
  return pr;
}

// Largest violation over the constraints, recomputed from the iterate.
double recomputed_violation(const SdpProblem& p, const SdpSolution& s) {
  double worst = 0.0;
  for (const auto& c : p.constraints) {
    double lhs = (c.a_matrix.adjoint() * s.x_matrix).trace().real();
    if (p.num_scalars > 0) lhs += c.a_scalars.dot(s.x_scalars);
    double v = 0.0;
    if (c.sense == Sense::kEqual) v = std::abs(lhs - c.rhs);
    if (c.sense == Sense::kLessEqual) v = std::max(0.0, lhs - c.rhs);
    if (c.sense == Sense::kGreaterEqual) v = std::max(0.0, c.rhs - lhs);
    worst = std::max(worst, v / (1.0 + std::abs(c.rhs)));
  }
  return worst;
}

TEST(SolveSdp, TraceAtLeastOne) {
  SdpProblem p = base_problem(2, 0);
  p.obj_matrix = CMatrix::Identity(2, 2);
  p.constraints.push_back({CMatrix::Identity(2, 2), RVector(0), 1.0, Sense::kGreaterEqual});
  const auto s = solve_sdp(p, SolverConfig{});
  EXPECT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-6);
}

TEST(SolveSdp, CauchySchwarzAnchor) {
  CVector h(2);
  h << 1.0, Complex(0.0, 2.0);
  SdpProblem p = base_problem(2, 0);
  p.obj_matrix = CMatrix::Identity(2, 2);
  p.constraints.push_back({h * h.adjoint(), RVector(0), 1.0, Sense::kGreaterEqual});
  const auto s = solve_sdp(p, SolverConfig{});
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, 0.2, 1e-6);
  // Analytic substitution: M = h h^H / ||h||^4 has trace 1/||h||^2 and
  // meets the constraint with equality.
  const CMatrix m = h * h.adjoint() / 25.0;
  EXPECT_NEAR(m.trace().real(), 0.2, 1e-15);
  EXPECT_NEAR((m * h * h.adjoint()).trace().real(), 1.0, 1e-15);
  EXPECT_LE((s.x_matrix - m).norm(), 1e-5);
  EXPECT_LE(rank_residual(s.x_matrix), 1e-6);
}

TEST(SolveSdp, MatchesGridOnRandom2x2) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = oracles::random_sdp2x2(seed);
    const auto s = solve_sdp(inst.to_problem(), SolverConfig{});
    ASSERT_EQ(s.status, SolveStatus::kOptimal);
    const double grid = oracles::sdp2x2_grid_min(inst);
    EXPECT_NEAR(s.objective, grid, 1e-3) << "seed " << seed;
    // Grid points are feasible, so they can only be worse than the optimum.
    EXPECT_GE(grid, s.objective - 1e-6);
  }
}

TEST(SolveSdp, EqualityConstrainedMaxCut) {
  SdpProblem p = base_problem(2, 0);
  p.obj_matrix = CMatrix::Zero(2, 2);
  p.obj_matrix(0, 1) = p.obj_matrix(1, 0) = 1.0;
  for (int i = 0; i < 2; ++i) {
    CMatrix e = CMatrix::Zero(2, 2);
    e(i, i) = 1.0;
    p.constraints.push_back({e, RVector(0), 1.0, Sense::kEqual});
  }
  const auto s = solve_sdp(p, SolverConfig{});
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, -2.0, 1e-6);
  EXPECT_NEAR(s.x_matrix(0, 1).real(), -1.0, 1e-5);
}

TEST(SolveSdp, ScalarBlock) {
  SdpProblem p = base_problem(1, 2);
  p.obj_matrix(0, 0) = 5.0;
  p.obj_scalars << 1.0, 2.0;
  RVector a(2);
  a << 1.0, 1.0;
  p.constraints.push_back({CMatrix::Zero(1, 1), a, 1.0, Sense::kGreaterEqual});
  const auto s = solve_sdp(p, SolverConfig{});
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-6);
  EXPECT_NEAR(s.x_scalars(0), 1.0, 1e-5);
  EXPECT_GE(s.x_scalars.minCoeff(), 0.0);
}

TEST(SolveSdp, KktResidualsAreRecomputable) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SdpProblem p = base_problem(4, 2);
    const CMatrix c = random_hermitian(4, seed);
    p.obj_matrix = c * c + CMatrix::Identity(4, 4);
    p.obj_scalars << 1.0, 0.5;
    for (int j = 0; j < 3; ++j) {
      const CMatrix a = random_hermitian(4, 100 * seed + j);
      RVector sc(2);
      sc << (j == 0 ? -1.0 : 0.0), (j == 1 ? -1.0 : 0.0);
      p.constraints.push_back({a * a, sc, 1.0, Sense::kGreaterEqual});
    }
    p.constraints.push_back({CMatrix::Identity(4, 4), RVector::Zero(2), 3.0, Sense::kLessEqual});
    const SolverConfig cfg;
    const auto s = solve_sdp(p, cfg);
    ASSERT_EQ(s.status, SolveStatus::kOptimal) << "seed " << seed;
    EXPECT_LE(recomputed_violation(p, s), cfg.tol_abs + cfg.tol_rel);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s.x_matrix);
    EXPECT_GE(es.eigenvalues()(0), -cfg.tol_abs);
    EXPECT_LE((s.x_matrix - s.x_matrix.adjoint()).norm(), 1e-12);
    EXPECT_LE(s.primal_residual, cfg.tol_abs + cfg.tol_rel);
    EXPECT_LE(s.dual_residual, 10.0 * (cfg.tol_abs + cfg.tol_rel));
  }
}

TEST(SolveSdp, WarmStartDoesNotSlowDown) {
  SdpProblem p = base_problem(3, 0);
  const CMatrix c = random_hermitian(3, 5);
  p.obj_matrix = c * c;
  p.constraints.push_back({CMatrix::Identity(3, 3), RVector(0), 1.0, Sense::kEqual});
  const auto cold = solve_sdp(p, SolverConfig{});
  const auto warm = solve_sdp(p, SolverConfig{}, cold);
  EXPECT_LE(warm.iterations, cold.iterations);
  EXPECT_NEAR(warm.objective, cold.objective, 1e-6);
}

TEST(SolveSdp, ObjectiveSwapKeepsFactorization) {
  SdpProblem p = base_problem(2, 0);
  p.obj_matrix = CMatrix::Identity(2, 2);
  p.constraints.push_back({CMatrix::Identity(2, 2), RVector(0), 1.0, Sense::kEqual});
  SdpSolver solver(p);
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 0) = 1.0;
  c(1, 1) = 3.0;
  solver.set_objective(c, RVector(0));
  const auto s = solver.solve(SolverConfig{});
  EXPECT_NEAR(s.objective, 1.0, 1e-6);  // all mass on the cheaper diagonal
  EXPECT_NEAR(s.x_matrix(0, 0).real(), 1.0, 1e-5);
}

TEST(SolveSdp, InfeasibilityCertificates) {
  SdpProblem p = base_problem(2, 0);
  p.obj_matrix = CMatrix::Identity(2, 2);
  p.constraints.push_back({CMatrix::Identity(2, 2), RVector(0), 1.0, Sense::kLessEqual});
  p.constraints.push_back({CMatrix::Identity(2, 2), RVector(0), 2.0, Sense::kGreaterEqual});
  EXPECT_EQ(solve_sdp(p, SolverConfig{}).status, SolveStatus::kInfeasibleCertificate);

  SdpProblem q = base_problem(2, 0);
  q.obj_matrix = CMatrix::Identity(2, 2);
  q.constraints.push_back({CMatrix::Zero(2, 2), RVector(0), 1.0, Sense::kGreaterEqual});
  EXPECT_EQ(solve_sdp(q, SolverConfig{}).status, SolveStatus::kInfeasibleCertificate);

  // tr(X) = -1 has no PSD solution.
  SdpProblem r = base_problem(2, 0);
  r.constraints.push_back({CMatrix::Identity(2, 2), RVector(0), -1.0, Sense::kEqual});
  EXPECT_EQ(solve_sdp(r, SolverConfig{}).status, SolveStatus::kInfeasibleCertificate);
}

TEST(SolveSdp, MaxItersIsReported) {
  SdpProblem p = base_problem(3, 0);
  const CMatrix c = random_hermitian(3, 9);
  p.obj_matrix = c * c;
  p.constraints.push_back({CMatrix::Identity(3, 3), RVector(0), 1.0, Sense::kEqual});
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.anderson_memory = 0;
  EXPECT_EQ(solve_sdp(p, cfg).status, SolveStatus::kMaxIters);
}

TEST(SdpProblem, ValidationErrors) {
  SdpProblem p = base_problem(2, 1);
  p.obj_matrix(0, 1) = 1.0;  // not Hermitian
  EXPECT_THROW(p.validate(), DimensionError);
  p = base_problem(2, 1);
  p.constraints.push_back({CMatrix::Identity(3, 3), RVector::Zero(1), 1.0, Sense::kEqual});
  EXPECT_THROW(p.validate(), DimensionError);
  p = base_problem(2, 1);
  p.constraints.push_back({CMatrix::Identity(2, 2), RVector::Zero(2), 1.0, Sense::kEqual});
  EXPECT_THROW(p.validate(), DimensionError);
}

TEST(SdpProblem, TextDumpRoundTrip) {
  SdpProblem p = base_problem(2, 1);
  p.obj_matrix = random_hermitian(2, 1);
  p.obj_scalars << 0.25;
  RVector a(1);
  a << -1.0;
  p.constraints.push_back({random_hermitian(2, 2), a, 0.5, Sense::kLessEqual});
  p.constraints.push_back({CMatrix::Identity(2, 2), RVector::Zero(1), 1.0, Sense::kEqual});
  std::stringstream ss;
  write_problem(ss, p);
  const SdpProblem q = read_problem(ss);
  EXPECT_EQ(q.dim, 2);
  EXPECT_EQ(q.num_scalars, 1);
  ASSERT_EQ(q.constraints.size(), 2u);
  EXPECT_TRUE(q.obj_matrix == p.obj_matrix);
  EXPECT_TRUE(q.constraints[0].a_matrix == p.constraints[0].a_matrix);
  EXPECT_EQ(q.constraints[0].sense, Sense::kLessEqual);
  EXPECT_EQ(q.constraints[1].rhs, 1.0);
}

TEST(PsdProject, TrivialCases) {
  EXPECT_LE((psd_project(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm(), 1e-15);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1.0;
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LE((psd_project(d) - expected).norm(), 1e-15);
}

TEST(PsdProject, RandomizedOptimalityAndIdempotence) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CMatrix a = random_hermitian(5, seed);
    const CMatrix p = psd_project(a);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(p);
    EXPECT_GE(es.eigenvalues()(0), -1e-12);
    EXPECT_GE(oracles::psd_projection_probe(a, p, seed), -1e-12 * a.norm());
    EXPECT_LE((psd_project(p) - p).norm(), 1e-12 * std::max(1.0, p.norm()));
  }
}

TEST(PsdProject, MoreauReconstructionUpToSeventy) {
  // A = P(A) - P(-A) exactly when both use the same eigendecomposition.
  for (int n : {1, 2, 7, 20, 45, 70}) {
    const CMatrix a = random_hermitian(n, 1000 + n);
    const CMatrix back = psd_project(a) - psd_project(-a);
    EXPECT_LE((a - back).norm(), 1e-9 * a.norm()) << "n = " << n;
  }
}

TEST(PsdProject, NonFiniteThrows) {
  CMatrix a = CMatrix::Identity(2, 2);
  a(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(psd_project(a), NumericError);
}

TEST(TopEigvec, DiagonalAndRankOne) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  const auto t = top_eigvec(d);
  EXPECT_NEAR(t.value, 2.0, 1e-14);
  EXPECT_NEAR(std::abs(t.vector(0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(t.vector(1)), 0.0, 1e-14);

  CVector h(2);
  h << 1.0, Complex(0.0, 2.0);
  const auto r = top_eigvec(h * h.adjoint());
  EXPECT_NEAR(r.value, 5.0, 1e-13);
  // Phase convention: first nonzero component real and positive.
  EXPECT_LE((r.vector - h / h.norm()).norm(), 1e-13);
  EXPECT_NEAR(r.vector(0).imag(), 0.0, 1e-15);
  EXPECT_GT(r.vector(0).real(), 0.0);
}

TEST(TopEigvec, ResidualOnRandomPsd) {
  for (int n : {3, 8, 17, 33}) {
    const CMatrix b = random_hermitian(n, 50 + n);
    const CMatrix a = b * b;
    const auto t = top_eigvec(a);
    EXPECT_NEAR(t.vector.norm(), 1.0, 1e-13);
    EXPECT_LE((a * t.vector - t.value * t.vector).norm(), 1e-9 * t.value);
  }
}

TEST(RankResidual, RankOneAndRankTwo) {
  CVector w(3);
  w << 1.0, Complex(0.5, -1.0), 2.0;
  EXPECT_LE(rank_residual(w * w.adjoint()), 1e-14);
  CMatrix two = w * w.adjoint();
  CVector u(3);
  u << 0.0, 1.0, Complex(0.0, 1.0);
  two += u * u.adjoint();
  EXPECT_GT(rank_residual(two), 0.01);
}

TEST(Svec, PackUnpackRoundTrip) {
  const CMatrix a = random_hermitian(4, 3);
  std::vector<double> buf(svec_length(4));
  EXPECT_EQ(svec_length(4), 16);
  svec_pack(a, buf.data());
  EXPECT_LE((svec_unpack(buf.data(), 4) - a).norm(), 1e-15);
  // svec preserves the Frobenius inner product.
  const CMatrix b = random_hermitian(4, 4);
  std::vector<double> bb(16);
  svec_pack(b, bb.data());
  double dot = 0.0;
  for (int i = 0; i < 16; ++i) dot += buf[i] * bb[i];
  EXPECT_NEAR(dot, (a * b).trace().real(), 1e-12);
}

}  // namespace
}  // namespace irsfl::sdp
