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
#ifndef IRSFL_CHANNEL_MODEL_HPP_
#define IRSFL_CHANNEL_MODEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "irsfl/common.hpp"
#include "irsfl/types.hpp"

namespace irsfl {

struct Box {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();
};

/// Placement of the base station, the IRS, and the device region (meters).
struct Geometry {
  Eigen::Vector3d bs_position{3.0, 0.0, 6.0};
  Eigen::Vector3d irs_position{0.0, 100.0, 6.0};
  Box device_region{{0.0, 100.0, 0.0}, {6.0, 106.0, 0.0}};
  int num_devices = 10;

  void validate() const;
  static Geometry reference(int num_devices);
};

/// Large-scale path loss L(d) = C0 (d/d0)^-alpha and Rician small-scale
/// fading per link class. Rician factors are stored linear; +inf is pure LoS.
struct FadingConfig {
  double c0_db = -30.0;
  double d0 = 1.0;
  double alpha_bd = 3.6;  // BS <-> device
  double alpha_bi = 2.2;  // BS <-> IRS
  double alpha_id = 2.8;  // IRS <-> device
  double rician_bi = 1.9952623149688795;  // 3 dB
  double rician_id = 0.0;
  double rician_bd = 0.0;

  void validate() const;
  double path_loss(double distance, double alpha) const;
  static double rician_from_db(double db) { return db_to_linear(db); }
  static FadingConfig reference() { return FadingConfig{}; }
};

/// One realization of all uplink channels.
struct ChannelSet {
  CMatrix g;                  // IRS -> BS, M x N
  std::vector<CVector> h_r;   // device -> IRS, length N each
  std::vector<CVector> h_d;   // device -> BS, length M each
  int m_antennas = 0;
  int n_elements = 0;

  int num_devices() const { return static_cast<int>(h_d.size()); }
  void validate() const;

  /// Multiplies every device-side channel by s; effective channels scale by s.
  ChannelSet scaled(double s) const;
  /// Same devices and direct links, IRS removed (N = 0).
  ChannelSet without_irs() const;
  /// Restriction to a subset of devices, in the given order.
  ChannelSet subset(const DeviceSet& devices) const;
};

/// Unit-modulus steering response of a half-wavelength uniform linear array
/// along axis for a unit direction dir.
CVector ula_response(int elements, const Eigen::Vector3d& axis, const Eigen::Vector3d& dir);

/// Uniform rectangular array, rows along axis_r and columns along axis_c.
/// Element (r, c) is stored at index r * cols + c.
CVector ura_response(int rows, int cols, const Eigen::Vector3d& axis_r,
                     const Eigen::Vector3d& axis_c, const Eigen::Vector3d& dir);

/// rows <= cols with rows the largest divisor of n not exceeding sqrt(n).
std::pair<int, int> most_square_factorization(int n);

ChannelSet sample_channels(const Geometry& geometry, const FadingConfig& fading,
                           int m_antennas, int n_elements, std::uint64_t seed);

/// h_i = G diag(v) h_i^r + h_i^d for every device.
std::vector<CVector> effective_channel(const ChannelSet& channels, const PhaseVector& phases);

/// Header line "M N K", then G row-major, every h_r, every h_d: one
/// "re im" pair per line at round-trip precision.
void write_channels(std::ostream& os, const ChannelSet& channels);
ChannelSet read_channels(std::istream& is);

}  // namespace irsfl

#endif  // IRSFL_CHANNEL_MODEL_HPP_
