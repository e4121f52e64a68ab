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
#include "irsfl/channel_model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "irsfl/rng.hpp"

namespace irsfl {
namespace {

enum LinkTag : std::uint64_t { kTagBsIrs = 1, kTagPosition = 2, kTagIrsDevice = 3, kTagBsDevice = 4 };

const Eigen::Vector3d kBsAxis{1.0, 0.0, 0.0};
const Eigen::Vector3d kIrsRowAxis{0.0, 0.0, 1.0};
const Eigen::Vector3d kIrsColAxis{0.0, 1.0, 0.0};

std::pair<double, double> rician_weights(double factor) {
  if (std::isinf(factor)) return {1.0, 0.0};
  return {std::sqrt(factor / (1.0 + factor)), std::sqrt(1.0 / (1.0 + factor))};
}

Eigen::Vector3d unit_direction(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d d = to - from;
  const double n = d.norm();
  if (!(n > 0.0)) throw ConfigError("coincident endpoints: link distance is zero");
  return d / n;
}

Eigen::Vector3d sample_position(const Box& box, Rng& rng) {
  Eigen::Vector3d p;
  for (int k = 0; k < 3; ++k) {
    std::uniform_real_distribution<double> u(box.lo(k), box.hi(k));
    p(k) = box.hi(k) > box.lo(k) ? u(rng) : box.lo(k);
  }
  return p;
}

}  // namespace

void Geometry::validate() const {
  if (num_devices < 1) throw ConfigError("geometry: num_devices must be >= 1");
  for (int k = 0; k < 3; ++k) {
    if (!(device_region.hi(k) >= device_region.lo(k)))
      throw ConfigError("geometry: device region has negative extent");
  }
  if (!bs_position.allFinite() || !irs_position.allFinite() || !device_region.lo.allFinite() ||
      !device_region.hi.allFinite())
    throw ConfigError("geometry: non-finite coordinates");
}

Geometry Geometry::reference(int num_devices) {
  Geometry g;
  g.num_devices = num_devices;
  return g;
}

void FadingConfig::validate() const {
  if (!(d0 > 0.0)) throw ConfigError("fading: d0 must be positive");
  if (!(alpha_bd >= 0.0 && alpha_bi >= 0.0 && alpha_id >= 0.0))
    throw ConfigError("fading: path-loss exponents must be nonnegative");
  if (!(rician_bi >= 0.0 && rician_id >= 0.0 && rician_bd >= 0.0))
    throw ConfigError("fading: Rician factors must be nonnegative");
  if (!std::isfinite(c0_db)) throw ConfigError("fading: C0 must be finite");
}

double FadingConfig::path_loss(double distance, double alpha) const {
  return db_to_linear(c0_db) * std::pow(distance / d0, -alpha);
}

void ChannelSet::validate() const {
  if (m_antennas < 1) throw DimensionError("channel set: M must be >= 1");
  if (n_elements < 0) throw DimensionError("channel set: N must be >= 0");
  if (h_r.size() != h_d.size()) throw DimensionError("channel set: h_r/h_d count mismatch");
  if (g.rows() != m_antennas || g.cols() != n_elements)
    throw DimensionError("channel set: G must be M x N");
  if (!g.allFinite()) throw NumericError("channel set: non-finite entry in G");
  for (std::size_t i = 0; i < h_d.size(); ++i) {
    if (h_r[i].size() != n_elements || h_d[i].size() != m_antennas)
      throw DimensionError("channel set: device " + std::to_string(i) + " has wrong lengths");
    if (!h_r[i].allFinite() || !h_d[i].allFinite())
      throw NumericError("channel set: non-finite entry for device " + std::to_string(i));
  }
}

ChannelSet ChannelSet::scaled(double s) const {
  ChannelSet out = *this;
  for (auto& h : out.h_r) h *= s;
  for (auto& h : out.h_d) h *= s;
  return out;
}

ChannelSet ChannelSet::without_irs() const {
  ChannelSet out;
  out.m_antennas = m_antennas;
  out.n_elements = 0;
  out.g = CMatrix(m_antennas, 0);
  out.h_d = h_d;
  out.h_r.assign(h_d.size(), CVector(0));
  return out;
}

ChannelSet ChannelSet::subset(const DeviceSet& devices) const {
  ChannelSet out;
  out.m_antennas = m_antennas;
  out.n_elements = n_elements;
  out.g = g;
  for (int i : devices) {
    if (i < 0 || i >= num_devices()) throw DimensionError("device index out of range");
    out.h_r.push_back(h_r[i]);
    out.h_d.push_back(h_d[i]);
  }
  return out;
}

CVector ula_response(int elements, const Eigen::Vector3d& axis, const Eigen::Vector3d& dir) {
  CVector a(elements);
  const double s = std::numbers::pi * axis.dot(dir);
  for (int m = 0; m < elements; ++m) a(m) = std::polar(1.0, s * m);
  return a;
}

CVector ura_response(int rows, int cols, const Eigen::Vector3d& axis_r,
                     const Eigen::Vector3d& axis_c, const Eigen::Vector3d& dir) {
  CVector a(rows * cols);
  const double sr = std::numbers::pi * axis_r.dot(dir);
  const double sc = std::numbers::pi * axis_c.dot(dir);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r * cols + c) = std::polar(1.0, sr * r + sc * c);
  return a;
}

std::pair<int, int> most_square_factorization(int n) {
  if (n <= 0) return {0, 0};
  int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  while (rows > 1 && n % rows != 0) --rows;
  return {rows, n / rows};
}

ChannelSet sample_channels(const Geometry& geometry, const FadingConfig& fading,
                           int m_antennas, int n_elements, std::uint64_t seed) {
  geometry.validate();
  fading.validate();
  if (m_antennas < 1) throw ConfigError("sample_channels: m_antennas must be >= 1");
  if (n_elements < 0) throw ConfigError("sample_channels: n_elements must be >= 0");

  const int k_devices = geometry.num_devices;
  const auto [rows, cols] = most_square_factorization(n_elements);

  ChannelSet out;
  out.m_antennas = m_antennas;
  out.n_elements = n_elements;
  out.g = CMatrix(m_antennas, n_elements);

  if (n_elements > 0) {
    const Eigen::Vector3d bs_to_irs = unit_direction(geometry.bs_position, geometry.irs_position);
    const double d_bi = (geometry.irs_position - geometry.bs_position).norm();
    const CVector a_bs = ula_response(m_antennas, kBsAxis, bs_to_irs);
    const CVector a_irs = ura_response(rows, cols, kIrsRowAxis, kIrsColAxis, -bs_to_irs);
    const CMatrix los = a_bs * a_irs.adjoint();
    const auto [w_los, w_nlos] = rician_weights(fading.rician_bi);
    const double amp = std::sqrt(fading.path_loss(d_bi, fading.alpha_bi));
    Rng rng = make_rng(seed, {kTagBsIrs});
    for (int m = 0; m < m_antennas; ++m)
      for (int n = 0; n < n_elements; ++n)
        out.g(m, n) = amp * (w_los * los(m, n) + w_nlos * complex_normal(rng));
  }

  const auto [w_los_id, w_nlos_id] = rician_weights(fading.rician_id);
  const auto [w_los_bd, w_nlos_bd] = rician_weights(fading.rician_bd);
  for (int i = 0; i < k_devices; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Rng pos_rng = make_rng(seed, {kTagPosition, idx});
    const Eigen::Vector3d pos = sample_position(geometry.device_region, pos_rng);

    CVector hr(n_elements);
    if (n_elements > 0) {
      const Eigen::Vector3d irs_to_dev = unit_direction(geometry.irs_position, pos);
      const double d_id = (pos - geometry.irs_position).norm();
      const CVector los = ura_response(rows, cols, kIrsRowAxis, kIrsColAxis, irs_to_dev);
      const double amp = std::sqrt(fading.path_loss(d_id, fading.alpha_id));
      Rng rng = make_rng(seed, {kTagIrsDevice, idx});
      for (int n = 0; n < n_elements; ++n)
        hr(n) = amp * (w_los_id * los(n) + w_nlos_id * complex_normal(rng));
    }

    const Eigen::Vector3d bs_to_dev = unit_direction(geometry.bs_position, pos);
    const double d_bd = (pos - geometry.bs_position).norm();
    const CVector los = ula_response(m_antennas, kBsAxis, bs_to_dev);
    const double amp = std::sqrt(fading.path_loss(d_bd, fading.alpha_bd));
    Rng rng = make_rng(seed, {kTagBsDevice, idx});
    CVector hd(m_antennas);
    for (int m = 0; m < m_antennas; ++m)
      hd(m) = amp * (w_los_bd * los(m) + w_nlos_bd * complex_normal(rng));

    out.h_r.push_back(std::move(hr));
    out.h_d.push_back(std::move(hd));
  }
  out.validate();
  return out;
}

std::vector<CVector> effective_channel(const ChannelSet& channels, const PhaseVector& phases) {
  if (phases.size() != channels.n_elements)
    throw DimensionError("effective_channel: phase vector length " +
                         std::to_string(phases.size()) + " != N " +
                         std::to_string(channels.n_elements));
  std::vector<CVector> out;
  out.reserve(channels.h_d.size());
  for (std::size_t i = 0; i < channels.h_d.size(); ++i) {
    if (channels.n_elements == 0) {
      out.push_back(channels.h_d[i]);
    } else {
      out.push_back(channels.g * phases.values().cwiseProduct(channels.h_r[i]) + channels.h_d[i]);
    }
  }
  return out;
}

void write_channels(std::ostream& os, const ChannelSet& channels) {
  const auto prec = os.precision(17);
  os << channels.m_antennas << ' ' << channels.n_elements << ' ' << channels.num_devices() << '\n';
  auto put = [&](Complex c) { os << c.real() << ' ' << c.imag() << '\n'; };
  for (int m = 0; m < channels.g.rows(); ++m)
    for (int n = 0; n < channels.g.cols(); ++n) put(channels.g(m, n));
  for (const auto& h : channels.h_r)
    for (int n = 0; n < h.size(); ++n) put(h(n));
  for (const auto& h : channels.h_d)
    for (int m = 0; m < h.size(); ++m) put(h(m));
  os.precision(prec);
}

ChannelSet read_channels(std::istream& is) {
  ChannelSet out;
  int k = 0;
  if (!(is >> out.m_antennas >> out.n_elements >> k) || k < 0)
    throw ConfigError("channel file: bad header");
  auto get = [&]() {
    double re = 0.0, im = 0.0;
    if (!(is >> re >> im)) throw ConfigError("channel file: truncated");
    return Complex(re, im);
  };
  out.g = CMatrix(out.m_antennas, out.n_elements);
  for (int m = 0; m < out.m_antennas; ++m)
    for (int n = 0; n < out.n_elements; ++n) out.g(m, n) = get();
  out.h_r.assign(k, CVector(out.n_elements));
  for (auto& h : out.h_r)
    for (int n = 0; n < out.n_elements; ++n) h(n) = get();
  out.h_d.assign(k, CVector(out.m_antennas));
  for (auto& h : out.h_d)
    for (int m = 0; m < out.m_antennas; ++m) h(m) = get();
  out.validate();
  return out;
}

}  // namespace irsfl
