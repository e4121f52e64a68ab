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
#ifndef IRSFL_TESTS_ORACLES_HPP_
#define IRSFL_TESTS_ORACLES_HPP_

// Independent reference computations used by the unit tests, the acceptance
// binary and "irsfl validate". Nothing here calls the routine it checks.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsfl/aircomp.hpp"
#include "irsfl/channel_model.hpp"
#include "irsfl/fl_sim.hpp"
#include "irsfl/sdp_engine.hpp"

namespace irsfl::oracles {

/// i.i.d. CN(0, 1) entries; G is M x N.
ChannelSet random_channels(int m, int n, int k, std::uint64_t seed);

/// h_i by explicit scalar loops over (m, n).
std::vector<CVector> effective_channel_naive(const ChannelSet& channels, const CVector& v);

/// P0 * min_i |m^H h_i|^2 by a plain loop.
double denoising_factor_naive(const std::vector<CVector>& effective, const DeviceSet& selected,
                              const CVector& m, double p0);

/// Expected |ghat - g|^2 for explicit transmit scalars w and denoising
/// factor eta: sum_i |m^H h_i w_i / sqrt(eta) - 1|^2 + sigma2 ||m||^2 / eta.
double transmit_mse(const std::vector<CVector>& effective, const DeviceSet& selected,
                    const CVector& m, const std::vector<Complex>& w, double eta, double sigma2);

/// Lowest transmit_mse found by replacing one w_i at a time with every point
/// of a polar grid (radii x angles) inside the power disc |w|^2 <= p0.
double transmit_grid_min(const std::vector<CVector>& effective, const DeviceSet& selected,
                         const CVector& m, const std::vector<Complex>& w, double eta,
                         double sigma2, double p0, int radii = 10, int angles = 100);

/// Random real 2x2 SDP: min <C, X> s.t. <A1, X> <= 1 (A1 positive definite,
/// so the feasible set is bounded) and <A2, X> >= b2, X PSD.
struct Sdp2x2 {
  Eigen::Matrix2d c;
  Eigen::Matrix2d a1;
  Eigen::Matrix2d a2;
  double b2 = 0.0;

  sdp::SdpProblem to_problem() const;
};
Sdp2x2 random_sdp2x2(std::uint64_t seed);

/// Minimum of <C, X> over grid points X = [[p, q], [q, r]] of the 3-parameter
/// PSD cone. The first pass uses step 1e-2 on the bounding box, later passes
/// refine around the incumbent down to step 1e-4.
double sdp2x2_grid_min(const Sdp2x2& inst);

/// min over probes Q of ||A - Q||_F - ||A - P||_F, with 1e3 PSD probes:
/// random Gram matrices, P plus random PSD, and convex mixes of P.
double psd_projection_probe(const CMatrix& a, const CMatrix& p, std::uint64_t seed,
                            int probes = 1000);

/// Maximum over a grid x grid phase lattice (N = 2) of |m^H (G diag(v) h_r + h_d)|^2.
double phase_grid_max_gain(const ChannelSet& channels, int device, const CVector& m,
                           int grid = 64);

/// Exact max over unit m in C^2 of min_i |m^H h_i|^2 for at most three
/// channels, via the Bloch-sphere picture: |m^H u|^2 = (1 + n_m . n_u) / 2.
double max_min_gain_m2(const std::vector<CVector>& h);

/// Exhaustive selection oracle for K <= 3, M = 2, N = 2 on noise-normalized
/// channels: every nonempty subset, a grid x grid phase lattice with local
/// polishing, and the exact inner beamformer.
struct BruteForceSelection {
  std::vector<DeviceSet> subsets;
  std::vector<double> min_mse;  // per subset
  int k_opt = 0;
};
BruteForceSelection brute_force_selection(const ChannelSet& normalized, double gamma,
                                          double slack = 1e-6, int grid = 64);

/// Criterion-level selection check on K = 3, M = 2, N = 2 reference
/// geometry instances, one per seed, with a mid-range threshold.
struct BruteForceStats {
  int seeds = 0;
  int matches = 0;
  int exceeds = 0;
  int converged_runs = 0;
  int certificate_failures = 0;
  std::vector<int> k_algorithm;
  std::vector<int> k_oracle;
};
BruteForceStats brute_force_check(int seeds);

/// Loss of device k by explicit loops over samples and classes.
double naive_local_loss(const FlTask& task, int device, const RVector& z);

/// max_j |g_j - fd_j| / max(1, ||g||_inf) with central differences of step h.
double gradient_fd_error(const FlTask& task, int device, const RVector& z, double h = 1e-6);

/// Test accuracy after steps of full-batch gradient descent on the pooled
/// training objective F, evaluated with the naive loss gradient.
double centralized_accuracy(const FlTask& task, int steps, double lr);

/// One named validation suite: returns pass/fail and a one-line detail.
struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Suite {
  std::string name;
  std::function<SuiteResult()> run;
};

/// Single-device P21 against the matched filter on random channels.
SuiteResult p21_matched_filter_check(int instances);

/// Every derived-value oracle suite, in a fixed order.
const std::vector<Suite>& all_suites();

/// Runs the suites whose name contains filter (all when empty), printing one
/// PASS/FAIL line each. Returns 0 when all pass.
int run_validation(std::ostream& os, const std::string& filter = "");

}  // namespace irsfl::oracles

#endif  // IRSFL_TESTS_ORACLES_HPP_
