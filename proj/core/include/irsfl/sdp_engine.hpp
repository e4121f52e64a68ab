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
#ifndef IRSFL_SDP_ENGINE_HPP_
#define IRSFL_SDP_ENGINE_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "irsfl/common.hpp"

namespace irsfl::sdp {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct Constraint {
  CMatrix a_matrix;    // Hermitian, dim x dim
  RVector a_scalars;   // length num_scalars
  double rhs = 0.0;
  Sense sense = Sense::kEqual;
};

/// minimize   <C, X> + c^T x
/// subject to <A_j, X> + a_j^T x  (<=, =, >=)  b_j
///            X Hermitian PSD, x >= 0
struct SdpProblem {
  int dim = 0;
  int num_scalars = 0;
  CMatrix obj_matrix;
  RVector obj_scalars;
  std::vector<Constraint> constraints;

  /// Throws DimensionError on inconsistent sizes or non-Hermitian data.
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasibleCertificate, kMaxIters };

std::string to_string(SolveStatus s);

struct SolverConfig {
  double tol_abs = 1e-7;
  double tol_rel = 1e-7;
  int max_iters = 50000;
  double penalty_step = 0.1;
  bool adaptive = true;
  double relaxation = 1.6;
  /// Anderson acceleration memory on the splitting state; 0 disables it.
  int anderson_memory = 20;
};

struct SdpSolution {
  CMatrix x_matrix;
  RVector x_scalars;
  double objective = 0.0;
  /// max_j violation_j / (1 + |b_j|) of the returned (cone-feasible) iterate.
  double primal_residual = 0.0;
  /// ||c - A^T lambda - s|| / (1 + ||c||), recomputed from the returned duals.
  double dual_residual = 0.0;
  SolveStatus status = SolveStatus::kMaxIters;
  int iterations = 0;

  // Dual certificate: constraint multipliers and cone dual (S, s).
  RVector duals;
  CMatrix dual_matrix;
  RVector dual_scalars;

  // Opaque splitting state used for warm starts.
  RVector state_z;
  RVector state_s;
  double state_rho = 1.0;
};

/// Operator-splitting solver bound to one constraint system. The affine
/// projection is factorized once at construction; only the objective may be
/// swapped between solves.
class SdpSolver {
 public:
  explicit SdpSolver(SdpProblem problem);

  const SdpProblem& problem() const { return problem_; }

  void set_objective(CMatrix obj_matrix, RVector obj_scalars);

  SdpSolution solve(const SolverConfig& config,
                    const SdpSolution* warm_start = nullptr) const;

  /// Number of real variables in the internal vector (svec(X), x, slacks).
  int num_variables() const { return num_vars_; }

 private:
  RVector pack_objective() const;
  void project_cone(RVector& v) const;

  SdpProblem problem_;
  int n_ = 0;
  int svec_len_ = 0;
  int num_vars_ = 0;
  int num_rows_ = 0;
  RMatrix a_;          // row-equilibrated constraint matrix
  RVector b_;
  RVector row_scale_;  // multiplier applied to each original row
  RMatrix aat_pinv_;   // (A A^T)^+
  std::vector<int> slack_of_row_;  // -1 for equalities
  std::vector<double> slack_sign_;
  bool structurally_infeasible_ = false;
};

SdpSolution solve_sdp(const SdpProblem& problem, const SolverConfig& config,
                      const std::optional<SdpSolution>& warm_start = std::nullopt);

/// Frobenius-nearest PSD matrix (negative eigenvalues clipped to zero).
CMatrix psd_project(const CMatrix& a);

struct TopEigen {
  double value = 0.0;
  CVector vector;
};

/// Largest eigenpair of a Hermitian matrix. The eigenvector is normalized
/// so that its first non-negligible component is real and positive.
TopEigen top_eigvec(const CMatrix& a);

/// (tr(X) - sigma_1(X)) / tr(X); zero exactly for rank-one PSD X.
double rank_residual(const CMatrix& x);

// svec packing: diagonal first, then (sqrt2 Re, sqrt2 Im) of the strict upper
// triangle row by row. <svec(A), svec(B)> = Re tr(A^H B).
int svec_length(int n);
void svec_pack(const CMatrix& m, double* out);
CMatrix svec_unpack(const double* in, int n);

/// Plain-text dump: dimensions, objective, then one block per constraint.
void write_problem(std::ostream& os, const SdpProblem& problem);
SdpProblem read_problem(std::istream& is);

}  // namespace irsfl::sdp

#endif  // IRSFL_SDP_ENGINE_HPP_
