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
#ifndef IRSFL_SELECTION_HPP_
#define IRSFL_SELECTION_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irsfl/channel_model.hpp"
#include "irsfl/dc_programs.hpp"
#include "irsfl/sdp_engine.hpp"
#include "irsfl/types.hpp"

namespace irsfl {

enum class Scheme { kDc, kSdr, kRandomPhase, kNoIrs };

std::string to_string(Scheme s);
/// Accepts dc, sdr, random_phase, no_irs. Throws ConfigError otherwise.
Scheme parse_scheme(const std::string& name);

struct SelectionConfig {
  double gamma = 0.01;    // linear MSE threshold
  double p0 = 0.1;        // watts
  double sigma2 = 1e-12;  // watts
  DcConfig dc;
  sdp::SolverConfig solver;
  int max_alt_iters = 10;
  Scheme baseline = Scheme::kDc;
  int randomization_samples = 50;
  double feas_slack = 1e-6;

  void validate() const;
};

struct PriorityVector {
  RVector x;
  std::vector<int> order;  // ascending x, ties by device index

  static PriorityVector from_scores(const RVector& x);
  bool valid() const;
};

struct ProbeRecord {
  int k = 0;
  bool feasible = false;
  double mse = 0.0;  // best MSE reached over the prefix; +inf if degenerate
  int alt_rounds = 0;
};

struct SelectionOutcome {
  DeviceSet selected;
  int k_star = 0;
  Beamformer m;
  /// Length N, or empty for the no_irs scheme.
  PhaseVector phases;
  double achieved_mse = 0.0;  // +inf when k_star == 0
  std::vector<ProbeRecord> history;
  int n_low = 0;
  int n_up = 0;
  PriorityVector priorities;
  /// Every DC run performed, in execution order.
  std::vector<DcTrace> dc_traces;
  long total_dc_iters = 0;
};

struct SparsityResult {
  PriorityVector priorities;
  Beamformer m0;
  PhaseVector v0;
  std::vector<double> l1_per_round;
  std::vector<DcTrace> dc_traces;
};

/// Step 1: l1 surrogate alternation between the beamformer and phase steps.
SparsityResult sparsity_inducing(const ChannelSet& channels, const SelectionConfig& cfg,
                                 std::uint64_t seed);

/// Step 2: bisection over priority prefixes.
SelectionOutcome feasibility_detection(const ChannelSet& channels, const PriorityVector& priorities,
                                       const SelectionConfig& cfg, std::uint64_t seed);

SelectionOutcome select_devices(const ChannelSet& channels, const SelectionConfig& cfg,
                                std::uint64_t seed);

/// Maps a raw randomization draw to a feasible candidate and its score
/// (lower is better), or nullopt if it cannot be made feasible.
using SdrCandidateMap = std::function<std::optional<std::pair<CVector, double>>(const CVector&)>;

struct SdrResult {
  sdp::SdpSolution relaxed;
  CVector vector;
  double score = 0.0;
  bool found = false;
  bool rank_one = false;
  int feasible_samples = 0;
};

/// Solves the rank-relaxed problem once. A rank-one solution is factored
/// directly; otherwise candidates drawn from CN(0, X) are mapped and the
/// best is kept.
SdrResult sdr_solve(const sdp::SdpProblem& problem, int randomization_samples,
                    const SdrCandidateMap& candidate, std::uint64_t seed,
                    const sdp::SolverConfig& solver, double rank_tol);

/// Channels in noise-normalized units: device-side links times sqrt(P0/sigma2).
ChannelSet normalize_channels(const ChannelSet& channels, double p0, double sigma2);

/// Per-device slack max(0, 1 - gamma |m^H h_i|^2 / ||m||^2) on normalized channels.
RVector sparsity_slacks(const ChannelSet& normalized, const Beamformer& m, const PhaseVector& v,
                        double gamma);

}  // namespace irsfl

#endif  // IRSFL_SELECTION_HPP_
