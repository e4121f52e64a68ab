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
#ifndef IRSFL_DC_PROGRAMS_HPP_
#define IRSFL_DC_PROGRAMS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "irsfl/channel_model.hpp"
#include "irsfl/common.hpp"
#include "irsfl/sdp_engine.hpp"
#include "irsfl/types.hpp"

// All drivers in this header work in noise-normalized channel units: every
// device-side channel is pre-multiplied by sqrt(P0 / sigma2), so that the
// aggregation MSE is ||m||^2 / min_i |m^H h_i|^2 and gamma is the plain MSE
// threshold.

namespace irsfl {

struct DcConfig {
  double rho = 10.0;
  double epsilon = 1e-3;
  int max_dc_iters = 50;
  double rank_tol = 1e-6;
  double rho_growth = 5.0;
  double rho_max = 1e3;
  int stall_iters = 10;

  void validate() const;
};

struct DcTrace {
  std::vector<double> objective_per_iter;
  std::vector<double> rank_residual_per_iter;
  std::vector<double> rho_per_iter;
  int iters_used = 0;
  bool converged = false;
  bool infeasible = false;
  /// Sum of inner splitting iterations over all DC steps.
  long solver_iterations = 0;
};

/// Objective nonincreasing within slack inside every constant-rho segment.
bool trace_monotone(const DcTrace& trace, double slack = 1e-9);

void write_trace_csv_header(std::ostream& os);
void write_trace_csv(std::ostream& os, const std::string& label, const DcTrace& trace);

/// sqrt(sigma_1) u_1 with the top_eigvec phase convention.
CVector rank_one_factor(const CMatrix& x);

/// Unit-modulus v from a lifted (N+1)x(N+1) matrix: factor, divide by the
/// last entry, project each entry onto the unit circle.
PhaseVector recover_phases(const CMatrix& v_lifted);

/// a_i and c_i of the phase lifting for a fixed beamformer:
/// |a_i^H v + c_i|^2 = tr(R_i V) + |c_i|^2 with V = [v; 1][v; 1]^H.
struct PhaseLift {
  std::vector<CVector> a;
  std::vector<Complex> c;
  std::vector<CMatrix> r;
};
PhaseLift phase_lift(const ChannelSet& channels, const Beamformer& m, const DeviceSet& devices);

// Relaxed (rank-constraint dropped) lifted problems. The DC drivers add the
// penalty rho (tr X - <G, X>) to the returned objective.

/// min sum x  s.t.  tr M - gamma tr(M H_i) <= x_i, tr M >= 1, over all K devices.
sdp::SdpProblem lift_p11(const ChannelSet& channels, const PhaseVector& phases, double gamma);
/// min sum y  s.t.  ||m||^2 - gamma (tr(R_i V) + |c_i|^2) <= y_i, V_nn = 1.
sdp::SdpProblem lift_p12(const ChannelSet& channels, const Beamformer& m, double gamma);
/// min tr M'  s.t.  tr(M' H_i) / kappa >= 1 over selected; M = M' / kappa.
sdp::SdpProblem lift_p21(const ChannelSet& channels, const PhaseVector& phases,
                         const DeviceSet& selected, double* kappa);
/// max t  s.t.  tr(R_i V) + |c_i|^2 >= t over selected, V_nn = 1.
sdp::SdpProblem lift_p22(const ChannelSet& channels, const Beamformer& m, const DeviceSet& selected);

struct P11Result {
  RVector x;
  CMatrix m_lifted;
  Beamformer m;
  DcTrace trace;
};

struct P21Result {
  Beamformer m;
  CMatrix m_lifted;
  DcTrace trace;
};

struct PhaseResult {
  PhaseVector phases;
  CMatrix v_lifted;
  DcTrace trace;
};

// init, when given, replaces the canonical starting point (I/M or I); it is
// only used to form the first linearization.

P11Result dc_solve_p11(const ChannelSet& channels, const PhaseVector& phases, double gamma,
                       const DcConfig& cfg, const sdp::SolverConfig& solver,
                       const CMatrix* init = nullptr);

/// x is the reference slack level from the beamformer step; the phase step
/// minimizes its own slack sum, which never exceeds sum(x) when the previous
/// phases are representable.
PhaseResult dc_solve_p12(const ChannelSet& channels, const Beamformer& m, const RVector& x,
                         double gamma, const DcConfig& cfg, const sdp::SolverConfig& solver,
                         const CMatrix* init = nullptr);

P21Result dc_solve_p21(const ChannelSet& channels, const PhaseVector& phases,
                       const DeviceSet& selected, const DcConfig& cfg,
                       const sdp::SolverConfig& solver, const CMatrix* init = nullptr);

PhaseResult dc_solve_p22(const ChannelSet& channels, const Beamformer& m, const DeviceSet& selected,
                         const DcConfig& cfg, const sdp::SolverConfig& solver,
                         const CMatrix* init = nullptr);

/// Lifted point [v; 1][v; 1]^H.
CMatrix lift_phases(const PhaseVector& v);

}  // namespace irsfl

#endif  // IRSFL_DC_PROGRAMS_HPP_
