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
#ifndef IRSFL_AIRCOMP_HPP_
#define IRSFL_AIRCOMP_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "irsfl/channel_model.hpp"
#include "irsfl/common.hpp"
#include "irsfl/types.hpp"

namespace irsfl {

/// |m^H h_i| below this is treated as a broken link, not clamped.
inline constexpr double kDegenerateGain = 1e-14;

struct AircompInstance {
  std::shared_ptr<const ChannelSet> channels;
  DeviceSet selected;
  double p0 = 0.1;       // watts
  double sigma2 = 1e-12;  // watts

  AircompInstance() = default;
  AircompInstance(std::shared_ptr<const ChannelSet> ch, DeviceSet s, double p0_w, double sigma2_w);

  void validate() const;
};

struct MseResult {
  double value = 0.0;  // +inf when degenerate
  bool degenerate = false;
  int worst_device = -1;  // argmax of ||m||^2 / |m^H h_i|^2 over S
};

/// eta = P0 * min_{i in S} |m^H h_i|^2.
double denoising_factor(const AircompInstance& instance, const Beamformer& m, const PhaseVector& v);

/// Zero-forcing transmit scalars, ordered like instance.selected.
std::vector<Complex> optimal_transmit_scalars(const AircompInstance& instance, const Beamformer& m,
                                              const PhaseVector& v);

/// (sigma2 / P0) * max_{i in S} ||m||^2 / |m^H h_i|^2. Never throws on a
/// degenerate link; reports +inf with the flag set instead.
MseResult aggregation_mse(const AircompInstance& instance, const Beamformer& m,
                          const PhaseVector& v);

/// Same quantity from explicit effective channels (already composed with v).
MseResult aggregation_mse_effective(const std::vector<CVector>& effective, const DeviceSet& selected,
                                    const CVector& m, double noise_to_power);

/// Sample mean of |g_hat - g|^2 over simulated symbols and receiver noise.
/// Throws ConfigError if draws < 10^4.
double mc_mse_oracle(const AircompInstance& instance, const Beamformer& m, const PhaseVector& v,
                     int draws, std::uint64_t seed);

/// Sample mean together with its standard error.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
McEstimate mc_mse_estimate(const AircompInstance& instance, const Beamformer& m,
                           const PhaseVector& v, int draws, std::uint64_t seed);

}  // namespace irsfl

#endif  // IRSFL_AIRCOMP_HPP_
