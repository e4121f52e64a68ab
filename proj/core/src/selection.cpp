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
#include "irsfl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "irsfl/aircomp.hpp"
#include "irsfl/rng.hpp"

namespace irsfl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Tag : std::uint64_t {
  kTagStepOneInit = 11,
  kTagProbeInit = 12,
  kTagRandomPhase = 13,
  kTagSdrDraw = 14,
};

double mse_over(const ChannelSet& ch, const DeviceSet& s, const Beamformer& m,
                const PhaseVector& v) {
  return aggregation_mse_effective(effective_channel(ch, v), s, m.values(), 1.0).value;
}

double min_gain(const ChannelSet& ch, const DeviceSet& s, const Beamformer& m,
                const PhaseVector& v) {
  const auto eff = effective_channel(ch, v);
  double lo = kInf;
  for (int i : s) lo = std::min(lo, std::norm(m.values().dot(eff[i])));
  return lo;
}

Beamformer unit(const Beamformer& m) { return m.scaled(1.0 / std::sqrt(m.norm_sq())); }

CVector draw_shaped(const Eigen::SelfAdjointEigenSolver<CMatrix>& es, Rng& rng) {
  const int n = static_cast<int>(es.eigenvalues().size());
  CVector r(n);
  for (int i = 0; i < n; ++i)
    r(i) = std::sqrt(std::max(0.0, es.eigenvalues()(i))) * complex_normal(rng);
  return es.eigenvectors() * r;
}

PhaseVector phases_from_lifted_vector(const CVector& w) {
  const int n = static_cast<int>(w.size()) - 1;
  CVector v = w.head(n);
  if (std::abs(w(n)) > 0.0) v /= w(n);
  return PhaseVector::from_projection(v);
}

// Runs the per-scheme subproblem solvers on noise-normalized channels and
// collects every DC trace.
class Runner {
 public:
  Runner(const ChannelSet& ch, const SelectionConfig& cfg, std::uint64_t seed)
      : ch_(ch), cfg_(cfg), seed_(seed) {}

  bool has_phase_step() const {
    return cfg_.baseline == Scheme::kDc || cfg_.baseline == Scheme::kSdr;
  }
  bool uses_sdr() const { return cfg_.baseline == Scheme::kSdr; }

  // Every subproblem starts from the canonical point, so its first DC
  // iterate is the relaxation optimum; callers keep the incumbent when the
  // result is worse.

  // Beamformer for the l1 step; result is unit norm.
  Beamformer p11(const PhaseVector& v, const Beamformer* current) {
    if (uses_sdr()) {
      const auto prob = lift_p11(ch_, v, cfg_.gamma);
      auto res = sdr_solve(prob, cfg_.randomization_samples,
                           [&](const CVector& raw) -> std::optional<std::pair<CVector, double>> {
                             if (!(raw.norm() > 0.0)) return std::nullopt;
                             const Beamformer m(raw / raw.norm());
                             return std::make_pair(m.values(), sparsity_slacks(ch_, m, v, cfg_.gamma).sum());
                           },
                           next_sdr_seed(), cfg_.solver, cfg_.dc.rank_tol);
      if (!res.found) return current ? *current : Beamformer(CVector::Ones(ch_.m_antennas));
      return Beamformer(res.vector);
    }
    auto r = dc_solve_p11(ch_, v, cfg_.gamma, cfg_.dc, cfg_.solver);
    record(r.trace);
    return unit(r.m);
  }

  PhaseVector p12(const Beamformer& m, const RVector& x, const PhaseVector& v) {
    if (uses_sdr()) {
      const auto prob = lift_p12(ch_, m, cfg_.gamma);
      auto res = sdr_solve(prob, cfg_.randomization_samples,
                           [&](const CVector& raw) -> std::optional<std::pair<CVector, double>> {
                             const PhaseVector cand = phases_from_lifted_vector(raw);
                             return std::make_pair(cand.values(), sparsity_slacks(ch_, m, cand, cfg_.gamma).sum());
                           },
                           next_sdr_seed(), cfg_.solver, cfg_.dc.rank_tol);
      return res.found ? PhaseVector(res.vector) : v;
    }
    auto r = dc_solve_p12(ch_, m, x, cfg_.gamma, cfg_.dc, cfg_.solver);
    record(r.trace);
    return r.phases;
  }

  // Beamformer for the MSE step; nullopt if the lifted problem is infeasible.
  std::optional<Beamformer> p21(const PhaseVector& v, const DeviceSet& s) {
    if (uses_sdr()) {
      const auto prob = lift_p21(ch_, v, s, nullptr);
      auto res = sdr_solve(prob, cfg_.randomization_samples,
                           [&](const CVector& raw) -> std::optional<std::pair<CVector, double>> {
                             if (!(raw.norm() > 0.0)) return std::nullopt;
                             const Beamformer m(raw);
                             const double mse = mse_over(ch_, s, m, v);
                             if (!std::isfinite(mse)) return std::nullopt;
                             return std::make_pair(raw, mse);
                           },
                           next_sdr_seed(), cfg_.solver, cfg_.dc.rank_tol);
      if (res.relaxed.status == sdp::SolveStatus::kInfeasibleCertificate || !res.found)
        return std::nullopt;
      return Beamformer(res.vector);
    }
    auto r = dc_solve_p21(ch_, v, s, cfg_.dc, cfg_.solver);
    const bool infeasible = r.trace.infeasible;
    record(r.trace);
    if (infeasible) return std::nullopt;
    return r.m;
  }

  PhaseVector p22(const Beamformer& m, const DeviceSet& s, const PhaseVector& v) {
    if (uses_sdr()) {
      const auto prob = lift_p22(ch_, m, s);
      auto res = sdr_solve(prob, cfg_.randomization_samples,
                           [&](const CVector& raw) -> std::optional<std::pair<CVector, double>> {
                             const PhaseVector cand = phases_from_lifted_vector(raw);
                             return std::make_pair(cand.values(), -min_gain(ch_, s, m, cand));
                           },
                           next_sdr_seed(), cfg_.solver, cfg_.dc.rank_tol);
      return res.found ? PhaseVector(res.vector) : v;
    }
    auto r = dc_solve_p22(ch_, m, s, cfg_.dc, cfg_.solver);
    record(r.trace);
    return r.phases;
  }

  std::vector<DcTrace> take_traces() { return std::move(traces_); }

 private:
  void record(DcTrace t) { traces_.push_back(std::move(t)); }
  std::uint64_t next_sdr_seed() { return mix_seed(seed_, {kTagSdrDraw, sdr_calls_++}); }

  const ChannelSet& ch_;
  const SelectionConfig& cfg_;
  std::uint64_t seed_;
  std::uint64_t sdr_calls_ = 0;
  std::vector<DcTrace> traces_;
};

PhaseVector initial_phases(const ChannelSet& ch, const SelectionConfig& cfg, std::uint64_t seed,
                           std::initializer_list<std::uint64_t> tags) {
  if (ch.n_elements == 0) return PhaseVector();
  if (cfg.baseline == Scheme::kRandomPhase) {
    Rng rng = make_rng(seed, {kTagRandomPhase});
    return PhaseVector::uniform_random(ch.n_elements, rng);
  }
  Rng rng = make_rng(mix_seed(seed, tags), {});
  return PhaseVector::uniform_random(ch.n_elements, rng);
}

const ChannelSet& scheme_channels(const ChannelSet& normalized, const SelectionConfig& cfg,
                                  ChannelSet& storage) {
  if (cfg.baseline == Scheme::kNoIrs) {
    storage = normalized.without_irs();
    return storage;
  }
  return normalized;
}

struct ProbeResult {
  bool feasible = false;
  double mse = kInf;
  int rounds = 0;
  Beamformer m;
  PhaseVector v;
};

ProbeResult run_probe(Runner& runner, const ChannelSet& ch, const DeviceSet& s,
                      const SelectionConfig& cfg, PhaseVector v) {
  const double target = cfg.gamma * (1.0 + cfg.feas_slack);
  ProbeResult out;
  out.v = v;
  std::optional<Beamformer> m;
  double round_prev = kInf;
  const int rounds = runner.has_phase_step() && ch.n_elements > 0 ? cfg.max_alt_iters : 1;
  for (int r = 1; r <= rounds; ++r) {
    out.rounds = r;
    auto cand = runner.p21(v, s);
    if (!cand) break;
    double mse = mse_over(ch, s, *cand, v);
    if (m && !(mse <= out.mse)) {
      mse = out.mse;  // keep the incumbent beamformer
    } else {
      m = cand;
    }
    out.m = *m;
    out.v = v;
    out.mse = mse;
    if (mse <= target) {
      out.feasible = true;
      break;
    }
    if (!runner.has_phase_step() || ch.n_elements == 0) break;

    const PhaseVector v_new = runner.p22(*m, s, v);
    const double mse_new = mse_over(ch, s, *m, v_new);
    if (mse_new < mse) {
      v = v_new;
      out.v = v;
      out.mse = mse_new;
    }
    if (out.mse <= target) {
      out.feasible = true;
      break;
    }
    if (std::isfinite(round_prev) && round_prev - out.mse < cfg.dc.epsilon * round_prev) break;
    round_prev = out.mse;
  }
  if (!m) {
    out.m = Beamformer(CVector::Ones(ch.m_antennas));
    out.mse = kInf;
  }
  return out;
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kDc:
      return "dc";
    case Scheme::kSdr:
      return "sdr";
    case Scheme::kRandomPhase:
      return "random_phase";
    case Scheme::kNoIrs:
      return "no_irs";
  }
  return "dc";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "dc") return Scheme::kDc;
  if (name == "sdr") return Scheme::kSdr;
  if (name == "random_phase") return Scheme::kRandomPhase;
  if (name == "no_irs") return Scheme::kNoIrs;
  throw ConfigError("unknown scheme '" + name + "'");
}

void SelectionConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("selection: gamma must be positive");
  if (!(p0 > 0.0) || !(sigma2 > 0.0)) throw ConfigError("selection: p0 and sigma2 must be positive");
  if (randomization_samples < 1) throw ConfigError("selection: randomization_samples must be >= 1");
  if (max_alt_iters < 1) throw ConfigError("selection: max_alt_iters must be >= 1");
  if (!(feas_slack >= 0.0)) throw ConfigError("selection: feas_slack must be nonnegative");
  dc.validate();
}

PriorityVector PriorityVector::from_scores(const RVector& x) {
  PriorityVector p;
  p.x = x;
  p.order.resize(x.size());
  std::iota(p.order.begin(), p.order.end(), 0);
  std::stable_sort(p.order.begin(), p.order.end(), [&](int a, int b) { return x(a) < x(b); });
  return p;
}

bool PriorityVector::valid() const {
  if (static_cast<Eigen::Index>(order.size()) != x.size()) return false;
  std::vector<int> seen(order.size(), 0);
  for (int i : order) {
    if (i < 0 || i >= static_cast<int>(order.size()) || seen[i]++) return false;
  }
  for (std::size_t k = 1; k < order.size(); ++k)
    if (x(order[k]) < x(order[k - 1])) return false;
  return true;
}

ChannelSet normalize_channels(const ChannelSet& channels, double p0, double sigma2) {
  if (!(p0 > 0.0) || !(sigma2 > 0.0)) throw ConfigError("p0 and sigma2 must be positive");
  return channels.scaled(std::sqrt(p0 / sigma2));
}

RVector sparsity_slacks(const ChannelSet& normalized, const Beamformer& m, const PhaseVector& v,
                        double gamma) {
  const auto eff = effective_channel(normalized, v);
  const double msq = m.norm_sq();
  RVector x(normalized.num_devices());
  for (int i = 0; i < x.size(); ++i)
    x(i) = std::max(0.0, 1.0 - gamma * std::norm(m.values().dot(eff[i])) / msq);
  return x;
}

SdrResult sdr_solve(const sdp::SdpProblem& problem, int randomization_samples,
                    const SdrCandidateMap& candidate, std::uint64_t seed,
                    const sdp::SolverConfig& solver, double rank_tol) {
  if (randomization_samples < 1) throw ConfigError("sdr_solve: randomization_samples must be >= 1");
  SdrResult out;
  out.relaxed = sdp::solve_sdp(problem, solver);
  out.score = kInf;
  if (out.relaxed.status == sdp::SolveStatus::kInfeasibleCertificate) return out;
  const CMatrix& x = out.relaxed.x_matrix;
  out.rank_one = sdp::rank_residual(x) <= rank_tol;
  auto consider = [&](const CVector& raw) {
    auto c = candidate(raw);
    if (!c) return;
    ++out.feasible_samples;
    if (c->second < out.score) {
      out.score = c->second;
      out.vector = c->first;
      out.found = true;
    }
  };
  if (out.rank_one) {
    consider(rank_one_factor(x));
    return out;
  }
  const CMatrix sym = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  Rng rng = make_rng(seed, {});
  for (int s = 0; s < randomization_samples; ++s) consider(draw_shaped(es, rng));
  return out;
}

SparsityResult sparsity_inducing(const ChannelSet& channels, const SelectionConfig& cfg,
                                 std::uint64_t seed) {
  cfg.validate();
  channels.validate();
  ChannelSet storage;
  const ChannelSet normalized = normalize_channels(channels, cfg.p0, cfg.sigma2);
  const ChannelSet& ch = scheme_channels(normalized, cfg, storage);
  Runner runner(ch, cfg, seed);

  SparsityResult out;
  PhaseVector v = initial_phases(ch, cfg, seed, {kTagStepOneInit});
  std::optional<Beamformer> m;
  double l1_prev = kInf;
  const bool alternate = runner.has_phase_step() && ch.n_elements > 0;
  const int rounds = alternate ? cfg.max_alt_iters : 1;
  for (int r = 1; r <= rounds; ++r) {
    Beamformer cand = runner.p11(v, m ? &*m : nullptr);
    double l1 = sparsity_slacks(ch, cand, v, cfg.gamma).sum();
    if (m) {
      const double incumbent = sparsity_slacks(ch, *m, v, cfg.gamma).sum();
      if (incumbent < l1) {
        cand = *m;
        l1 = incumbent;
      }
    }
    m = cand;
    out.l1_per_round.push_back(l1);
    if (l1 == 0.0 || !alternate) break;
    if (std::isfinite(l1_prev) && l1_prev - l1 < cfg.dc.epsilon * std::max(1.0, l1_prev)) break;
    l1_prev = l1;
    if (r == rounds) break;

    const RVector x = sparsity_slacks(ch, *m, v, cfg.gamma);
    const PhaseVector v_new = runner.p12(*m, x, v);
    if (sparsity_slacks(ch, *m, v_new, cfg.gamma).sum() <= x.sum()) v = v_new;
  }
  out.m0 = *m;
  out.v0 = v;
  out.priorities = PriorityVector::from_scores(sparsity_slacks(ch, *m, v, cfg.gamma));
  out.dc_traces = runner.take_traces();
  return out;
}

SelectionOutcome feasibility_detection(const ChannelSet& channels, const PriorityVector& priorities,
                                       const SelectionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  channels.validate();
  if (!priorities.valid() || priorities.x.size() != channels.num_devices())
    throw ConfigError("feasibility_detection: invalid priority vector");
  ChannelSet storage;
  const ChannelSet normalized = normalize_channels(channels, cfg.p0, cfg.sigma2);
  const ChannelSet& ch = scheme_channels(normalized, cfg, storage);
  Runner runner(ch, cfg, seed);

  const int k_total = ch.num_devices();
  SelectionOutcome out;
  out.priorities = priorities;
  int n_low = 0;
  int n_up = k_total + 1;
  int k = k_total;
  std::optional<ProbeResult> best;
  ProbeResult last;
  while (n_up - n_low > 1) {
    const DeviceSet prefix(priorities.order.begin(), priorities.order.begin() + k);
    const PhaseVector v0 =
        initial_phases(ch, cfg, seed, {kTagProbeInit, static_cast<std::uint64_t>(k)});
    ProbeResult probe = run_probe(runner, ch, prefix, cfg, v0);
    out.history.push_back({k, probe.feasible, probe.mse, probe.rounds});
    if (probe.feasible) {
      n_low = k;
      best = probe;
    } else {
      n_up = k;
    }
    last = probe;
    k = (n_low + n_up) / 2;
  }
  out.n_low = n_low;
  out.n_up = n_up;
  out.k_star = n_low;
  out.selected.assign(priorities.order.begin(), priorities.order.begin() + n_low);
  const ProbeResult& chosen = best ? *best : last;
  out.m = chosen.m;
  out.phases = chosen.v;
  out.achieved_mse = best ? mse_over(ch, out.selected, out.m, out.phases) : kInf;
  out.dc_traces = runner.take_traces();
  for (const auto& t : out.dc_traces) out.total_dc_iters += t.iters_used;
  return out;
}

SelectionOutcome select_devices(const ChannelSet& channels, const SelectionConfig& cfg,
                                std::uint64_t seed) {
  SparsityResult step1 = sparsity_inducing(channels, cfg, seed);
  SelectionOutcome out = feasibility_detection(channels, step1.priorities, cfg, seed);
  long step1_iters = 0;
  for (const auto& t : step1.dc_traces) step1_iters += t.iters_used;
  out.total_dc_iters += step1_iters;
  out.dc_traces.insert(out.dc_traces.begin(), std::make_move_iterator(step1.dc_traces.begin()),
                       std::make_move_iterator(step1.dc_traces.end()));
  return out;
}

}  // namespace irsfl
