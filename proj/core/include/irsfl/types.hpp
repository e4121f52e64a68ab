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
#ifndef IRSFL_TYPES_HPP_
#define IRSFL_TYPES_HPP_

#include "irsfl/common.hpp"
#include "irsfl/rng.hpp"

namespace irsfl {

/// Unit-modulus IRS reflection coefficients v (Theta = diag(v)).
class PhaseVector {
 public:
  static constexpr double kModulusTol = 1e-9;

  PhaseVector() = default;

  /// Throws NumericError if any entry is off the unit circle by more than
  /// kModulusTol.
  explicit PhaseVector(CVector v);

  /// Projects each entry onto the unit circle. Zero entries map to 1.
  static PhaseVector from_projection(const CVector& v);
  static PhaseVector from_angles(const RVector& theta);
  static PhaseVector uniform_random(int n, Rng& rng);
  static PhaseVector ones(int n) { return PhaseVector(CVector::Ones(n)); }

  const CVector& values() const { return v_; }
  int size() const { return static_cast<int>(v_.size()); }

 private:
  CVector v_;
};

/// Receive (aggregation) beamformer m at the base station.
class Beamformer {
 public:
  Beamformer() = default;
  /// Throws NumericError unless ||m|| > 0 and all entries are finite.
  explicit Beamformer(CVector m);

  const CVector& values() const { return m_; }
  int size() const { return static_cast<int>(m_.size()); }
  double norm_sq() const { return m_.squaredNorm(); }
  Beamformer scaled(double c) const { return Beamformer(m_ * c); }

 private:
  CVector m_;
};

}  // namespace irsfl

#endif  // IRSFL_TYPES_HPP_
