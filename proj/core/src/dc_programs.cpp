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
#include "irsfl/dc_programs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace irsfl {
namespace {

constexpr double kTieTol = 1e-10;
constexpr double kMonotoneSlack = 1e-9;
// Increases below this are attributed to inner-solver tolerance.
constexpr double kNoiseLevel = 1e-6;

// A spectral-norm subgradient at x. With a repeated top eigenvalue the
// normalized projector onto the top eigenspace is used; it is a convex
// combination of the u u^H choices and does not depend on the basis.
CMatrix spectral_subgradient(const CMatrix& x) {
  const int n = static_cast<int>(x.rows());
  const CMatrix sym = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  const RVector& ev = es.eigenvalues();
  const double top = ev(n - 1);
  int k = 1;
  while (k < n && ev(n - 1 - k) >= top - kTieTol * std::max(1.0, std::abs(top))) ++k;
  if (k == 1) {
    const CVector u = sdp::top_eigvec(x).vector;
    return u * u.adjoint();
  }
  const CMatrix v = es.eigenvectors().rightCols(k);
  return v * v.adjoint() / static_cast<double>(k);
}

double top_eigenvalue(const CMatrix& x) { return sdp::top_eigvec(x).value; }

double dc_objective(const sdp::SdpProblem& base, const CMatrix& x, const RVector& s, double rho) {
  double f = (base.obj_matrix.adjoint() * x).trace().real();
  if (base.num_scalars > 0) f += base.obj_scalars.dot(s);
  return f + rho * (x.trace().real() - top_eigenvalue(x));
}

struct DcRun {
  CMatrix x;
  RVector scalars;
  DcTrace trace;
};

DcRun run_dc(const sdp::SdpProblem& base, const CMatrix& x0, const DcConfig& cfg,
             const sdp::SolverConfig& scfg, const char* where) {
  cfg.validate();
  const int n = base.dim;
  sdp::SdpSolver solver(base);
  const CMatrix eye = CMatrix::Identity(n, n);

  DcRun run;
  run.x = x0;
  run.scalars = RVector::Zero(base.num_scalars);
  double rho = cfg.rho;
  double f_prev = std::numeric_limits<double>::infinity();
  double rho_prev = rho;
  int stall = 0;
  sdp::SdpSolution warm;
  bool have_warm = false;

  for (int t = 1; t <= cfg.max_dc_iters; ++t) {
    const CMatrix g = spectral_subgradient(run.x);
    solver.set_objective(base.obj_matrix + rho * (eye - g), base.obj_scalars);
    sdp::SdpSolution sol;
    try {
      sol = solver.solve(scfg, have_warm ? &warm : nullptr);
    } catch (const std::exception& e) {
      throw SolverError(where, t, e.what());
    }
    run.trace.solver_iterations += sol.iterations;
    if (sol.status == sdp::SolveStatus::kInfeasibleCertificate) {
      run.trace.infeasible = true;
      break;
    }
    double f = dc_objective(base, sol.x_matrix, sol.x_scalars, rho);
    const bool same_rho = rho == rho_prev;
    const double slack = kMonotoneSlack * std::max(1.0, std::abs(f_prev));
    if (same_rho && f > f_prev + slack) {
      if (f > f_prev + kNoiseLevel * std::max(1.0, std::abs(f_prev))) {
        // A real increase means the inner solve was too loose; tighten once.
        sdp::SolverConfig tight = scfg;
        tight.tol_abs *= 1e-2;
        tight.tol_rel *= 1e-2;
        tight.max_iters *= 2;
        sol = solver.solve(tight, &sol);
        run.trace.solver_iterations += sol.iterations;
        f = dc_objective(base, sol.x_matrix, sol.x_scalars, rho);
      }
      if (f > f_prev + slack) {
        // No descent beyond solver accuracy: the previous iterate is kept
        // and is stationary if it is rank one.
        run.trace.converged = run.trace.rank_residual_per_iter.back() <= cfg.rank_tol;
        break;
      }
    }
    const double rr = sdp::rank_residual(sol.x_matrix);
    run.x = sol.x_matrix;
    run.scalars = sol.x_scalars;
    run.trace.objective_per_iter.push_back(f);
    run.trace.rank_residual_per_iter.push_back(rr);
    run.trace.rho_per_iter.push_back(rho);
    run.trace.iters_used = t;
    warm = std::move(sol);
    have_warm = true;

    const bool rank_one = rr <= cfg.rank_tol;
    if (rank_one && same_rho && t > 1 &&
        f_prev - f < cfg.epsilon * std::max(1.0, std::abs(f_prev))) {
      run.trace.converged = true;
      break;
    }
    f_prev = f;
    rho_prev = rho;
    stall = rank_one ? 0 : stall + 1;
    if (stall >= cfg.stall_iters && rho < cfg.rho_max) {
      rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
      stall = 0;
    }
  }
  return run;
}

CMatrix outer(const CVector& h) { return h * h.adjoint(); }

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive and finite");
}

void check_devices(const ChannelSet& ch, const DeviceSet& s) {
  if (s.empty()) throw ConfigError("selected device set is empty");
  for (int i : s)
    if (i < 0 || i >= ch.num_devices()) throw DimensionError("device index out of range");
}

DeviceSet all_devices(const ChannelSet& ch) {
  DeviceSet s(ch.num_devices());
  for (int i = 0; i < ch.num_devices(); ++i) s[i] = i;
  return s;
}

sdp::Constraint diag_constraint(int n, int idx, int num_scalars) {
  sdp::Constraint c;
  c.a_matrix = CMatrix::Zero(n, n);
  c.a_matrix(idx, idx) = 1.0;
  c.a_scalars = RVector::Zero(num_scalars);
  c.rhs = 1.0;
  c.sense = sdp::Sense::kEqual;
  return c;
}

}  // namespace

void DcConfig::validate() const {
  if (!(rho > 0.0) || !(epsilon > 0.0) || max_dc_iters < 1 || !(rank_tol > 0.0))
    throw ConfigError("dc config: rho, epsilon, max_dc_iters and rank_tol must be positive");
  if (rank_tol > 1e-4) throw ConfigError("dc config: rank_tol must be <= 1e-4");
  if (!(rho_growth >= 1.0) || !(rho_max >= rho) || stall_iters < 1)
    throw ConfigError("dc config: invalid rho escalation settings");
}

bool trace_monotone(const DcTrace& trace, double slack) {
  const auto& f = trace.objective_per_iter;
  for (std::size_t t = 1; t < f.size(); ++t) {
    if (trace.rho_per_iter[t] != trace.rho_per_iter[t - 1]) continue;
    if (f[t] > f[t - 1] + slack * std::max(1.0, std::abs(f[t - 1]))) return false;
  }
  return true;
}

void write_trace_csv_header(std::ostream& os) {
  os << "label,iter,objective,rank_residual,rho\n";
}

void write_trace_csv(std::ostream& os, const std::string& label, const DcTrace& trace) {
  const auto prec = os.precision(17);
  for (std::size_t t = 0; t < trace.objective_per_iter.size(); ++t)
    os << label << ',' << t + 1 << ',' << trace.objective_per_iter[t] << ','
       << trace.rank_residual_per_iter[t] << ',' << trace.rho_per_iter[t] << '\n';
  os.precision(prec);
}

CVector rank_one_factor(const CMatrix& x) {
  const auto top = sdp::top_eigvec(x);
  return std::sqrt(std::max(0.0, top.value)) * top.vector;
}

PhaseVector recover_phases(const CMatrix& v_lifted) {
  const int n = static_cast<int>(v_lifted.rows()) - 1;
  if (n < 1) throw DimensionError("recover_phases: lifted matrix must be at least 2x2");
  const CVector w = rank_one_factor(v_lifted);
  const Complex t = w(n);
  CVector v = w.head(n);
  if (std::abs(t) > 0.0) v /= t;
  return PhaseVector::from_projection(v);
}

CMatrix lift_phases(const PhaseVector& v) {
  CVector bar(v.size() + 1);
  bar.head(v.size()) = v.values();
  bar(v.size()) = 1.0;
  return outer(bar);
}

PhaseLift phase_lift(const ChannelSet& channels, const Beamformer& m, const DeviceSet& devices) {
  if (m.size() != channels.m_antennas) throw DimensionError("beamformer length does not match M");
  const int n = channels.n_elements;
  PhaseLift lift;
  const CVector gm = channels.g.adjoint() * m.values();  // G^H m
  for (int i : devices) {
    // a_i^H = m^H G diag(h_i^r)  =>  a_i = diag(conj(h_i^r)) G^H m.
    const CVector a = channels.h_r[i].conjugate().cwiseProduct(gm);
    const Complex c = m.values().dot(channels.h_d[i]);
    CMatrix r = CMatrix::Zero(n + 1, n + 1);
    r.topLeftCorner(n, n) = outer(a);
    r.topRightCorner(n, 1) = a * c;
    r.bottomLeftCorner(1, n) = (a * c).adjoint();
    lift.a.push_back(a);
    lift.c.push_back(c);
    lift.r.push_back(std::move(r));
  }
  return lift;
}

sdp::SdpProblem lift_p11(const ChannelSet& channels, const PhaseVector& phases, double gamma) {
  check_gamma(gamma);
  const auto eff = effective_channel(channels, phases);
  const int m = channels.m_antennas;
  const int k = channels.num_devices();
  const CMatrix eye = CMatrix::Identity(m, m);
  sdp::SdpProblem p;
  p.dim = m;
  p.num_scalars = k;
  p.obj_matrix = CMatrix::Zero(m, m);
  p.obj_scalars = RVector::Ones(k);
  for (int i = 0; i < k; ++i) {
    sdp::Constraint c;
    c.a_matrix = eye - gamma * outer(eff[i]);
    c.a_matrix = 0.5 * (c.a_matrix + c.a_matrix.adjoint());
    c.a_scalars = RVector::Zero(k);
    c.a_scalars(i) = -1.0;
    c.rhs = 0.0;
    c.sense = sdp::Sense::kLessEqual;
    p.constraints.push_back(std::move(c));
  }
  sdp::Constraint norm;
  norm.a_matrix = eye;
  norm.a_scalars = RVector::Zero(k);
  norm.rhs = 1.0;
  norm.sense = sdp::Sense::kGreaterEqual;
  p.constraints.push_back(std::move(norm));
  return p;
}

sdp::SdpProblem lift_p12(const ChannelSet& channels, const Beamformer& m, double gamma) {
  check_gamma(gamma);
  if (channels.n_elements < 1) throw DimensionError("phase subproblem needs N >= 1");
  const int n = channels.n_elements + 1;
  const int k = channels.num_devices();
  const PhaseLift lift = phase_lift(channels, m, all_devices(channels));
  const double msq = m.norm_sq();
  sdp::SdpProblem p;
  p.dim = n;
  p.num_scalars = k;
  p.obj_matrix = CMatrix::Zero(n, n);
  p.obj_scalars = RVector::Ones(k);
  for (int i = 0; i < k; ++i) {
    sdp::Constraint c;
    c.a_matrix = -gamma * lift.r[i];
    c.a_scalars = RVector::Zero(k);
    c.a_scalars(i) = -1.0;
    c.rhs = gamma * std::norm(lift.c[i]) - msq;
    c.sense = sdp::Sense::kLessEqual;
    p.constraints.push_back(std::move(c));
  }
  for (int d = 0; d < n; ++d) p.constraints.push_back(diag_constraint(n, d, k));
  return p;
}

sdp::SdpProblem lift_p21(const ChannelSet& channels, const PhaseVector& phases,
                         const DeviceSet& selected, double* kappa) {
  check_devices(channels, selected);
  const auto eff = effective_channel(channels, phases);
  double kap = 0.0;
  for (int i : selected) kap = std::max(kap, eff[i].squaredNorm());
  if (!(kap > 0.0)) kap = 1.0;
  const int m = channels.m_antennas;
  sdp::SdpProblem p;
  p.dim = m;
  p.num_scalars = 0;
  p.obj_matrix = CMatrix::Identity(m, m);
  p.obj_scalars = RVector(0);
  for (int i : selected) {
    sdp::Constraint c;
    c.a_matrix = outer(eff[i]) / kap;
    c.a_matrix = 0.5 * (c.a_matrix + c.a_matrix.adjoint());
    c.a_scalars = RVector(0);
    c.rhs = 1.0;
    c.sense = sdp::Sense::kGreaterEqual;
    p.constraints.push_back(std::move(c));
  }
  if (kappa != nullptr) *kappa = kap;
  return p;
}

sdp::SdpProblem lift_p22(const ChannelSet& channels, const Beamformer& m, const DeviceSet& selected) {
  check_devices(channels, selected);
  if (channels.n_elements < 1) throw DimensionError("phase subproblem needs N >= 1");
  const int n = channels.n_elements + 1;
  const PhaseLift lift = phase_lift(channels, m, selected);
  sdp::SdpProblem p;
  p.dim = n;
  p.num_scalars = 1;
  p.obj_matrix = CMatrix::Zero(n, n);
  p.obj_scalars = -RVector::Ones(1);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    sdp::Constraint c;
    c.a_matrix = lift.r[i];
    c.a_scalars = -RVector::Ones(1);
    c.rhs = -std::norm(lift.c[i]);
    c.sense = sdp::Sense::kGreaterEqual;
    p.constraints.push_back(std::move(c));
  }
  for (int d = 0; d < n; ++d) p.constraints.push_back(diag_constraint(n, d, 1));
  return p;
}

P11Result dc_solve_p11(const ChannelSet& channels, const PhaseVector& phases, double gamma,
                       const DcConfig& cfg, const sdp::SolverConfig& solver, const CMatrix* init) {
  const auto base = lift_p11(channels, phases, gamma);
  const int m = channels.m_antennas;
  const CMatrix x0 = init != nullptr ? *init : CMatrix(CMatrix::Identity(m, m) / double(m));
  DcRun run = run_dc(base, x0, cfg, solver, "p11");
  P11Result out;
  out.x = run.scalars.cwiseMax(0.0);
  out.m_lifted = run.x;
  CVector w = rank_one_factor(run.x);
  if (!(w.norm() > 0.0)) w = CVector::Ones(m) / std::sqrt(double(m));
  out.m = Beamformer(w);
  out.trace = std::move(run.trace);
  return out;
}

PhaseResult dc_solve_p12(const ChannelSet& channels, const Beamformer& m, const RVector& x,
                         double gamma, const DcConfig& cfg, const sdp::SolverConfig& solver,
                         const CMatrix* init) {
  if (x.size() != channels.num_devices()) throw DimensionError("x must have one entry per device");
  const auto base = lift_p12(channels, m, gamma);
  const int n = base.dim;
  const CMatrix x0 = init != nullptr ? *init : CMatrix(CMatrix::Identity(n, n));
  DcRun run = run_dc(base, x0, cfg, solver, "p12");
  PhaseResult out;
  out.v_lifted = run.x;
  out.phases = recover_phases(run.x);
  out.trace = std::move(run.trace);
  return out;
}

P21Result dc_solve_p21(const ChannelSet& channels, const PhaseVector& phases,
                       const DeviceSet& selected, const DcConfig& cfg,
                       const sdp::SolverConfig& solver, const CMatrix* init) {
  double kappa = 1.0;
  const auto base = lift_p21(channels, phases, selected, &kappa);
  const int m = channels.m_antennas;
  const CMatrix x0 = init != nullptr ? CMatrix(*init * kappa)
                                     : CMatrix(CMatrix::Identity(m, m) / double(m));
  DcRun run = run_dc(base, x0, cfg, solver, "p21");
  P21Result out;
  out.m_lifted = run.x / kappa;
  CVector w = rank_one_factor(out.m_lifted);
  if (!(w.norm() > 0.0)) w = CVector::Ones(m) / std::sqrt(double(m));
  out.m = Beamformer(w);
  out.trace = std::move(run.trace);
  return out;
}

PhaseResult dc_solve_p22(const ChannelSet& channels, const Beamformer& m, const DeviceSet& selected,
                         const DcConfig& cfg, const sdp::SolverConfig& solver,
                         const CMatrix* init) {
  const auto base = lift_p22(channels, m, selected);
  const int n = base.dim;
  const CMatrix x0 = init != nullptr ? *init : CMatrix(CMatrix::Identity(n, n));
  DcRun run = run_dc(base, x0, cfg, solver, "p22");
  PhaseResult out;
  out.v_lifted = run.x;
  out.phases = recover_phases(run.x);
  out.trace = std::move(run.trace);
  return out;
}

}  // namespace irsfl
