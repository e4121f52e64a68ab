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

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace irsfl::sdp {
namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kHermitianTol = 1e-12;

bool is_hermitian(const CMatrix& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double dot(const RVector& a, const RVector& b) { return a.dot(b); }

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasibleCertificate:
      return "infeasible_certificate";
    case SolveStatus::kMaxIters:
      return "max_iters";
  }
  return "unknown";
}

int svec_length(int n) { return n * n; }

void svec_pack(const CMatrix& m, double* out) {
  const int n = static_cast<int>(m.rows());
  int k = 0;
  for (int i = 0; i < n; ++i) out[k++] = m(i, i).real();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      out[k++] = kSqrt2 * m(i, j).real();
      out[k++] = kSqrt2 * m(i, j).imag();
    }
  }
}

CMatrix svec_unpack(const double* in, int n) {
  CMatrix m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) m(i, i) = Complex(in[k++], 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double re = in[k++] / kSqrt2;
      const double im = in[k++] / kSqrt2;
      m(i, j) = Complex(re, im);
      m(j, i) = Complex(re, -im);
    }
  }
  return m;
}

void SdpProblem::validate() const {
  if (dim < 0 || num_scalars < 0) throw DimensionError("negative SDP dimensions");
  if (obj_matrix.rows() != dim || obj_matrix.cols() != dim)
    throw DimensionError("objective matrix must be dim x dim");
  if (obj_scalars.size() != num_scalars)
    throw DimensionError("objective scalar vector length must equal num_scalars");
  if (!is_hermitian(obj_matrix, kHermitianTol))
    throw DimensionError("objective matrix is not Hermitian");
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const auto& c = constraints[j];
    if (c.a_matrix.rows() != dim || c.a_matrix.cols() != dim)
      throw DimensionError("constraint " + std::to_string(j) + ": matrix must be dim x dim");
    if (c.a_scalars.size() != num_scalars)
      throw DimensionError("constraint " + std::to_string(j) + ": scalar vector length mismatch");
    if (!is_hermitian(c.a_matrix, kHermitianTol))
      throw DimensionError("constraint " + std::to_string(j) + ": matrix is not Hermitian");
    if (!std::isfinite(c.rhs))
      throw DimensionError("constraint " + std::to_string(j) + ": non-finite rhs");
  }
}

SdpSolver::SdpSolver(SdpProblem problem) : problem_(std::move(problem)) {
  problem_.validate();
  n_ = problem_.dim;
  svec_len_ = svec_length(n_);
  const int p = problem_.num_scalars;
  num_rows_ = static_cast<int>(problem_.constraints.size());
  int num_slacks = 0;
  for (const auto& c : problem_.constraints)
    if (c.sense != Sense::kEqual) ++num_slacks;
  num_vars_ = svec_len_ + p + num_slacks;

  a_ = RMatrix::Zero(num_rows_, num_vars_);
  b_ = RVector::Zero(num_rows_);
  row_scale_ = RVector::Ones(num_rows_);
  slack_of_row_.assign(num_rows_, -1);
  slack_sign_.assign(num_rows_, 0.0);

  RVector packed(svec_len_);
  int slack = svec_len_ + p;
  for (int j = 0; j < num_rows_; ++j) {
    const auto& c = problem_.constraints[j];
    svec_pack(c.a_matrix, packed.data());
    a_.row(j).head(svec_len_) = packed.transpose();
    if (p > 0) a_.row(j).segment(svec_len_, p) = c.a_scalars.transpose();
    const double body_norm = a_.row(j).norm();
    if (body_norm == 0.0) {
      const bool ok = (c.sense == Sense::kEqual && c.rhs == 0.0) ||
                      (c.sense == Sense::kLessEqual && c.rhs >= 0.0) ||
                      (c.sense == Sense::kGreaterEqual && c.rhs <= 0.0);
      if (!ok) structurally_infeasible_ = true;
    }
    if (c.sense != Sense::kEqual) {
      slack_of_row_[j] = slack;
      slack_sign_[j] = c.sense == Sense::kLessEqual ? 1.0 : -1.0;
      a_(j, slack) = slack_sign_[j];
      ++slack;
    }
    b_(j) = c.rhs;
    const double norm = a_.row(j).norm();
    if (norm > 0.0) {
      row_scale_(j) = 1.0 / norm;
      a_.row(j) *= row_scale_(j);
      b_(j) *= row_scale_(j);
    }
  }

  if (num_rows_ > 0) {
    const RMatrix aat = a_ * a_.transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(aat);
    const RVector& ev = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    RVector inv(ev.size());
    for (int i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
    aat_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }
}

void SdpSolver::set_objective(CMatrix obj_matrix, RVector obj_scalars) {
  if (obj_matrix.rows() != n_ || obj_matrix.cols() != n_ ||
      obj_scalars.size() != problem_.num_scalars)
    throw DimensionError("objective dimensions do not match the constraint system");
  if (!is_hermitian(obj_matrix, kHermitianTol))
    throw DimensionError("objective matrix is not Hermitian");
  problem_.obj_matrix = std::move(obj_matrix);
  problem_.obj_scalars = std::move(obj_scalars);
}

RVector SdpSolver::pack_objective() const {
  RVector c = RVector::Zero(num_vars_);
  svec_pack(problem_.obj_matrix, c.data());
  if (problem_.num_scalars > 0) c.segment(svec_len_, problem_.num_scalars) = problem_.obj_scalars;
  return c;
}

void SdpSolver::project_cone(RVector& v) const {
  if (n_ > 0) {
    CMatrix x = svec_unpack(v.data(), n_);
    x = psd_project(x);
    svec_pack(x, v.data());
  }
  for (int i = svec_len_; i < num_vars_; ++i) v(i) = std::max(0.0, v(i));
}

SdpSolution SdpSolver::solve(const SolverConfig& config, const SdpSolution* warm_start) const {
  if (!(config.tol_abs > 0.0) || !(config.tol_rel > 0.0) || config.max_iters < 1 ||
      !(config.penalty_step > 0.0))
    throw ConfigError("solver tolerances, max_iters and penalty_step must be positive");

  const RVector c_full = pack_objective();
  // The row-space component of c is constant on {Ay = b}; strip it so the
  // normalization sees only the part that discriminates feasible points.
  RVector lam0 = RVector::Zero(num_rows_);
  RVector c_proj = c_full;
  if (num_rows_ > 0) {
    lam0 = aat_pinv_ * (a_ * c_full);
    c_proj -= a_.transpose() * lam0;
  }
  const double c_norm = c_proj.norm();
  const double cs = c_norm > 1e-12 * std::max(1.0, c_full.norm()) ? c_norm : 1.0;
  const RVector c = c_proj / cs;

  RVector z = RVector::Zero(num_vars_);
  double rho = config.penalty_step;
  RVector u = RVector::Zero(num_vars_);
  if (warm_start != nullptr && warm_start->state_z.size() == num_vars_) {
    z = warm_start->state_z;
    rho = warm_start->state_rho > 0.0 ? warm_start->state_rho : rho;
    if (warm_start->state_s.size() == num_vars_) u = -warm_start->state_s / (cs * rho);
  }

  const double alpha = config.relaxation;
  const double tol_abs = config.tol_abs;
  const double tol_rel = config.tol_rel;

  RVector w(num_vars_), y(num_vars_), yhat(num_vars_), z_prev(num_vars_);
  RVector mu = RVector::Zero(num_rows_);
  RVector delta_prev;

  // Violation of each original constraint at the cone-feasible iterate z,
  // measured in the problem's own units.
  auto max_violation = [&](const RVector& zz) {
    double worst = 0.0;
    if (num_rows_ == 0) return worst;
    const RVector r = a_ * zz - b_;
    for (int j = 0; j < num_rows_; ++j) {
      double g = r(j);
      if (slack_of_row_[j] >= 0) g -= a_(j, slack_of_row_[j]) * zz(slack_of_row_[j]);
      g /= row_scale_(j);
      double viol = 0.0;
      switch (problem_.constraints[j].sense) {
        case Sense::kEqual:
          viol = std::abs(g);
          break;
        case Sense::kLessEqual:
          viol = std::max(0.0, g);
          break;
        case Sense::kGreaterEqual:
          viol = std::max(0.0, -g);
          break;
      }
      const double rhs = std::abs(problem_.constraints[j].rhs);
      worst = std::max(worst, viol / (1.0 + rhs));
    }
    return worst;
  };

  SdpSolution sol;
  sol.status = SolveStatus::kMaxIters;
  double dual_res = std::numeric_limits<double>::infinity();
  double primal_res = std::numeric_limits<double>::infinity();
  int iter = 0;

  // Type-II Anderson acceleration on the stacked state (z, u). Every step
  // still ends in a plain splitting update, so the residuals below certify
  // the returned iterate regardless of how the input state was produced.
  const int aa_mem = std::max(0, config.anderson_memory);
  const int state_len = 2 * num_vars_;
  RMatrix aa_dx(state_len, std::max(aa_mem, 1));
  RMatrix aa_dg(state_len, std::max(aa_mem, 1));
  RMatrix aa_gram(std::max(aa_mem, 1), std::max(aa_mem, 1));
  int aa_count = 0;
  int aa_head = 0;
  RVector x_in(state_len), x_prev(state_len), g_prev(state_len), g(state_len);
  RVector tx_origin(state_len);
  bool have_prev = false;
  bool last_aa = false;
  int next_adapt = 25;
  double gn_origin = 0.0;
  auto aa_reset = [&]() {
    aa_count = 0;
    aa_head = 0;
    have_prev = false;
    last_aa = false;
  };

  if (structurally_infeasible_) {
    sol.status = SolveStatus::kInfeasibleCertificate;
  } else {
    for (iter = 1; iter <= config.max_iters; ++iter) {
      z_prev = z;
      if (aa_mem > 0) {
        x_in.head(num_vars_) = z;
        x_in.tail(num_vars_) = u;
      }
      w = z - u - c / rho;
      if (num_rows_ > 0) {
        mu = aat_pinv_ * (a_ * w - b_);
        y = w - a_.transpose() * mu;
      } else {
        y = w;
      }
      yhat = alpha * y + (1.0 - alpha) * z_prev;
      z = yhat + u;
      project_cone(z);
      u += yhat - z;

      // Recomputed KKT residuals at (z, lambda = -rho mu, s = -rho u).
      const RVector dres = c + rho * (num_rows_ > 0 ? RVector(a_.transpose() * mu) : RVector::Zero(num_vars_)) + rho * u;
      dual_res = dres.norm();
      const bool dual_ok = dual_res <= tol_abs + tol_rel;
      if (dual_ok) {
        primal_res = max_violation(z);
        // Constraint-level contract: |viol_j| <= tol_abs + tol_rel |b_j|.
        if (primal_res <= std::min(tol_abs, tol_rel)) {
          sol.status = SolveStatus::kOptimal;
          break;
        }
      }

      bool rho_changed = false;
      // Penalty updates reset the acceleration history, so they are spaced
      // geometrically: 25, 50, 100, ...
      if (config.adaptive && iter == next_adapt) {
        next_adapt *= 2;
        const double rp = (y - z).norm() / std::max({y.norm(), z.norm(), 1e-12});
        const double rd = rho * (z - z_prev).norm() / std::max(rho * u.norm(), 1e-12);
        if (rp > 10.0 * rd) {
          rho *= 2.0;
          u /= 2.0;
          rho_changed = true;
        } else if (rd > 10.0 * rp) {
          rho /= 2.0;
          u *= 2.0;
          rho_changed = true;
        }
      }

      // Divergence certificate: the gap y - z settles to a fixed nonzero
      // vector that is a Farkas direction for {Ay = b} and the cone.
      if (num_rows_ > 0 && iter >= 500 && iter % 100 == 0) {
        const RVector delta = y - z;
        const double dn = delta.norm();
        if (delta_prev.size() == delta.size() && dn > 1e-6 &&
            (delta - delta_prev).norm() <= 1e-4 * dn) {
          const RVector lam = aat_pinv_ * (a_ * delta);
          const double range_err = (a_.transpose() * lam - delta).norm();
          RVector pos = delta;
          project_cone(pos);
          const double btl = b_.dot(lam);
          if (range_err <= 1e-3 * dn && pos.norm() <= 1e-3 * dn && btl >= 0.5 * dn * dn) {
            sol.status = SolveStatus::kInfeasibleCertificate;
            break;
          }
        }
        delta_prev = delta;
      }

      if (aa_mem == 0) continue;
      if (rho_changed) {
        aa_reset();
        continue;
      }
      g.head(num_vars_) = z - x_in.head(num_vars_);
      g.tail(num_vars_) = u - x_in.tail(num_vars_);
      const double gn = g.norm();
      if (last_aa && gn > gn_origin) {
        // Extrapolation made things worse: fall back to the plain step
        // taken from the extrapolation origin.
        z = tx_origin.head(num_vars_);
        u = tx_origin.tail(num_vars_);
        aa_reset();
        continue;
      }
      if (have_prev) {
        aa_dx.col(aa_head) = x_in - x_prev;
        aa_dg.col(aa_head) = g - g_prev;
        aa_count = std::min(aa_count + 1, aa_mem);
        for (int j = 0; j < aa_count; ++j) {
          aa_gram(aa_head, j) = aa_dg.col(aa_head).dot(aa_dg.col(j));
          aa_gram(j, aa_head) = aa_gram(aa_head, j);
        }
        aa_head = (aa_head + 1) % aa_mem;
      }
      x_prev = x_in;
      g_prev = g;
      have_prev = true;
      last_aa = false;
      if (aa_count == 0) continue;

      const auto dg = aa_dg.leftCols(aa_count);
      RMatrix gram = aa_gram.topLeftCorner(aa_count, aa_count);
      const double reg = 1e-10 * std::max(gram.trace(), 1e-300);
      gram.diagonal().array() += reg;
      const RVector gam = gram.ldlt().solve(dg.transpose() * g);
      if (!gam.allFinite()) {
        aa_reset();
        continue;
      }
      RVector x_aa = x_in + g;
      x_aa.noalias() -= aa_dx.leftCols(aa_count) * gam;
      x_aa.noalias() -= dg * gam;
      // On infeasible problems g tends to a nonzero constant, dg to zero and
      // the extrapolation grows without bound; keep steps commensurate with
      // the state so the divergence certificate stays observable.
      if ((x_aa - x_in).norm() > 1e3 * (x_in.norm() + gn)) {
        aa_reset();
        continue;
      }
      tx_origin.head(num_vars_) = z;
      tx_origin.tail(num_vars_) = u;
      gn_origin = gn;
      last_aa = true;
      z = x_aa.head(num_vars_);
      u = x_aa.tail(num_vars_);
    }
    if (iter > config.max_iters) iter = config.max_iters;
  }

  sol.iterations = iter;
  sol.x_matrix = n_ > 0 ? svec_unpack(z.data(), n_) : CMatrix(0, 0);
  sol.x_scalars = z.segment(svec_len_, problem_.num_scalars);
  sol.objective = dot(c_full, z);
  sol.primal_residual = max_violation(z);

  const RVector lam_scaled = -rho * mu;
  const RVector s_scaled = -rho * u;
  const RVector lam_total = lam0 + cs * lam_scaled;
  sol.duals = row_scale_.cwiseProduct(lam_total);
  RVector s_full = cs * s_scaled;
  sol.dual_matrix = n_ > 0 ? svec_unpack(s_full.data(), n_) : CMatrix(0, 0);
  sol.dual_scalars = s_full.segment(svec_len_, problem_.num_scalars);
  {
    RVector r = c_full - s_full;
    if (num_rows_ > 0) r -= a_.transpose() * lam_total;
    sol.dual_residual = r.norm() / cs;
  }
  sol.state_z = z;
  sol.state_s = s_full;
  sol.state_rho = rho;
  return sol;
}

SdpSolution solve_sdp(const SdpProblem& problem, const SolverConfig& config,
                      const std::optional<SdpSolution>& warm_start) {
  SdpSolver solver(problem);
  return solver.solve(config, warm_start ? &*warm_start : nullptr);
}

CMatrix psd_project(const CMatrix& a) {
  if (!a.allFinite()) throw NumericError("psd_project: non-finite entries");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return a;
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  const RVector& ev = es.eigenvalues();
  int first = 0;
  while (first < n && ev(first) <= 0.0) ++first;
  const int k = n - first;
  if (k == 0) return CMatrix::Zero(n, n);
  const CMatrix v = es.eigenvectors().rightCols(k);
  const RVector lam = ev.tail(k);
  return v * lam.asDiagonal() * v.adjoint();
}

TopEigen top_eigvec(const CMatrix& a) {
  const int n = static_cast<int>(a.rows());
  TopEigen out;
  if (n == 0) return out;
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  out.value = es.eigenvalues()(n - 1);
  CVector v = es.eigenvectors().col(n - 1);
  v.normalize();
  const double floor = 1e-8 * v.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (std::abs(v(i)) > floor) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = Complex(v(i).real(), 0.0);
      break;
    }
  }
  out.vector = v;
  return out;
}

double rank_residual(const CMatrix& x) {
  const double tr = x.trace().real();
  if (!(tr > 0.0)) return 1.0;
  const double s1 = top_eigvec(x).value;
  return std::max(0.0, (tr - s1) / tr);
}

namespace {

const char* sense_token(Sense s) {
  switch (s) {
    case Sense::kLessEqual:
      return "<=";
    case Sense::kEqual:
      return "=";
    case Sense::kGreaterEqual:
      return ">=";
  }
  return "=";
}

void write_matrix(std::ostream& os, const CMatrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) os << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
}

CMatrix read_matrix(std::istream& is, int n) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw ConfigError("sdp dump: truncated matrix block");
      m(i, j) = Complex(re, im);
    }
  return m;
}

}  // namespace

void write_problem(std::ostream& os, const SdpProblem& problem) {
  const auto prec = os.precision(17);
  os << "sdp " << problem.dim << ' ' << problem.num_scalars << ' '
     << problem.constraints.size() << '\n';
  os << "objective\n";
  write_matrix(os, problem.obj_matrix);
  for (int i = 0; i < problem.num_scalars; ++i) os << problem.obj_scalars(i) << '\n';
  for (const auto& c : problem.constraints) {
    os << "constraint " << sense_token(c.sense) << ' ' << c.rhs << '\n';
    write_matrix(os, c.a_matrix);
    for (int i = 0; i < problem.num_scalars; ++i) os << c.a_scalars(i) << '\n';
  }
  os.precision(prec);
}

SdpProblem read_problem(std::istream& is) {
  std::string tag;
  SdpProblem p;
  std::size_t m = 0;
  if (!(is >> tag >> p.dim >> p.num_scalars >> m) || tag != "sdp")
    throw ConfigError("sdp dump: bad header");
  if (!(is >> tag) || tag != "objective") throw ConfigError("sdp dump: missing objective");
  p.obj_matrix = read_matrix(is, p.dim);
  p.obj_scalars.resize(p.num_scalars);
  for (int i = 0; i < p.num_scalars; ++i)
    if (!(is >> p.obj_scalars(i))) throw ConfigError("sdp dump: truncated objective");
  for (std::size_t j = 0; j < m; ++j) {
    Constraint c;
    std::string sense;
    if (!(is >> tag >> sense >> c.rhs) || tag != "constraint")
      throw ConfigError("sdp dump: bad constraint header " + std::to_string(j));
    if (sense == "<=") c.sense = Sense::kLessEqual;
    else if (sense == "=") c.sense = Sense::kEqual;
    else if (sense == ">=") c.sense = Sense::kGreaterEqual;
    else throw ConfigError("sdp dump: unknown sense '" + sense + "'");
    c.a_matrix = read_matrix(is, p.dim);
    c.a_scalars.resize(p.num_scalars);
    for (int i = 0; i < p.num_scalars; ++i)
      if (!(is >> c.a_scalars(i))) throw ConfigError("sdp dump: truncated constraint");
    p.constraints.push_back(std::move(c));
  }
  return p;
}

}  // namespace irsfl::sdp
