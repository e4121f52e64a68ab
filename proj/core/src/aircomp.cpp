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
#include "irsfl/aircomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irsfl/rng.hpp"

namespace irsfl {
namespace {

constexpr std::uint64_t kTagSymbols = 0x5E;
constexpr int kMinDraws = 10000;

std::vector<Complex> projections(const AircompInstance& inst, const Beamformer& m,
                                 const PhaseVector& v) {
  inst.validate();
  if (m.size() != inst.channels->m_antennas)
    throw DimensionError("beamformer length does not match M");
  const auto eff = effective_channel(*inst.channels, v);
  std::vector<Complex> out;
  out.reserve(inst.selected.size());
  for (int i : inst.selected) out.push_back(m.values().dot(eff[i]));  // m^H h_i
  return out;
}

double checked_min_gain(const AircompInstance& inst, const std::vector<Complex>& proj) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < proj.size(); ++k) {
    const double g = std::abs(proj[k]);
    if (!(g >= kDegenerateGain)) throw DegenerateChannelError(inst.selected[k], g);
    lo = std::min(lo, g * g);
  }
  return lo;
}

}  // namespace

AircompInstance::AircompInstance(std::shared_ptr<const ChannelSet> ch, DeviceSet s, double p0_w,
                                 double sigma2_w)
    : channels(std::move(ch)), selected(std::move(s)), p0(p0_w), sigma2(sigma2_w) {
  validate();
}

void AircompInstance::validate() const {
  if (!channels) throw ConfigError("aircomp instance: no channels");
  if (selected.empty()) throw ConfigError("aircomp instance: empty device set");
  if (!(p0 > 0.0)) throw ConfigError("aircomp instance: p0 must be positive");
  if (!(sigma2 >= 0.0)) throw ConfigError("aircomp instance: sigma2 must be nonnegative");
  std::vector<int> sorted = selected;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("aircomp instance: duplicate device in S");
  for (int i : selected)
    if (i < 0 || i >= channels->num_devices())
      throw ConfigError("aircomp instance: device index " + std::to_string(i) + " out of range");
}

double denoising_factor(const AircompInstance& instance, const Beamformer& m, const PhaseVector& v) {
  return instance.p0 * checked_min_gain(instance, projections(instance, m, v));
}

std::vector<Complex> optimal_transmit_scalars(const AircompInstance& instance, const Beamformer& m,
                                              const PhaseVector& v) {
  const auto proj = projections(instance, m, v);
  const double eta = instance.p0 * checked_min_gain(instance, proj);
  const double root = std::sqrt(eta);
  std::vector<Complex> w;
  w.reserve(proj.size());
  for (Complex p : proj) w.push_back(root / p);  // sqrt(eta) conj(p) / |p|^2
  return w;
}

MseResult aggregation_mse_effective(const std::vector<CVector>& effective, const DeviceSet& selected,
                                    const CVector& m, double noise_to_power) {
  MseResult r;
  const double msq = m.squaredNorm();
  double worst = -1.0;
  for (int i : selected) {
    const double g = std::abs(m.dot(effective[i]));
    if (!(g >= kDegenerateGain)) {
      r.value = std::numeric_limits<double>::infinity();
      r.degenerate = true;
      r.worst_device = i;
      return r;
    }
    const double ratio = msq / (g * g);
    if (ratio > worst) {
      worst = ratio;
      r.worst_device = i;
    }
  }
  r.value = noise_to_power * worst;
  return r;
}

MseResult aggregation_mse(const AircompInstance& instance, const Beamformer& m,
                          const PhaseVector& v) {
  instance.validate();
  if (m.size() != instance.channels->m_antennas)
    throw DimensionError("beamformer length does not match M");
  return aggregation_mse_effective(effective_channel(*instance.channels, v), instance.selected,
                                   m.values(), instance.sigma2 / instance.p0);
}

McEstimate mc_mse_estimate(const AircompInstance& instance, const Beamformer& m,
                           const PhaseVector& v, int draws, std::uint64_t seed) {
  if (draws < kMinDraws) throw ConfigError("mc_mse_oracle: draws must be >= 10000");
  const auto proj = projections(instance, m, v);
  const double eta = instance.p0 * checked_min_gain(instance, proj);
  const double inv_root = 1.0 / std::sqrt(eta);
  const double root = std::sqrt(eta);
  std::vector<Complex> gain(proj.size());  // (1/sqrt(eta)) m^H h_i w_i
  for (std::size_t k = 0; k < proj.size(); ++k) gain[k] = inv_root * proj[k] * (root / proj[k]);

  const CVector& mv = m.values();
  const double noise_sd = std::sqrt(instance.sigma2);
  Rng rng = make_rng(seed, {kTagSymbols});
  double sum = 0.0;
  double sum_sq = 0.0;
  CVector noise(mv.size());
  for (int t = 0; t < draws; ++t) {
    Complex err(0.0, 0.0);
    for (Complex gk : gain) {
      const Complex s = complex_normal(rng);
      err += (gk - 1.0) * s;
    }
    if (noise_sd > 0.0) {
      for (int a = 0; a < noise.size(); ++a) noise(a) = noise_sd * complex_normal(rng);
      err += inv_root * mv.dot(noise);
    }
    const double e2 = std::norm(err);
    sum += e2;
    sum_sq += e2 * e2;
  }
  McEstimate est;
  est.mean = sum / draws;
  const double var = std::max(0.0, sum_sq / draws - est.mean * est.mean);
  est.std_error = std::sqrt(var / draws);
  return est;
}

double mc_mse_oracle(const AircompInstance& instance, const Beamformer& m, const PhaseVector& v,
                     int draws, std::uint64_t seed) {
  return mc_mse_estimate(instance, m, v, draws, seed).mean;
}

}  // namespace irsfl
