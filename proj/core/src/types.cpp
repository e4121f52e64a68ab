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
#include "irsfl/types.hpp"

#include <cmath>

namespace irsfl {

PhaseVector::PhaseVector(CVector v) : v_(std::move(v)) {
  for (int i = 0; i < v_.size(); ++i) {
    if (!(std::abs(std::abs(v_(i)) - 1.0) <= kModulusTol))
      throw NumericError("phase entry " + std::to_string(i) + " is not unit modulus");
  }
}

PhaseVector PhaseVector::from_projection(const CVector& v) {
  CVector out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    out(i) = a > 0.0 && std::isfinite(a) ? v(i) / a : Complex(1.0, 0.0);
    // Renormalize once more so the modulus error is at rounding level.
    out(i) /= std::abs(out(i));
  }
  return PhaseVector(std::move(out));
}

PhaseVector PhaseVector::from_angles(const RVector& theta) {
  CVector out(theta.size());
  for (int i = 0; i < theta.size(); ++i) out(i) = std::polar(1.0, theta(i));
  return PhaseVector(std::move(out));
}

PhaseVector PhaseVector::uniform_random(int n, Rng& rng) {
  RVector theta(n);
  for (int i = 0; i < n; ++i) theta(i) = uniform_phase(rng);
  return from_angles(theta);
}

Beamformer::Beamformer(CVector m) : m_(std::move(m)) {
  if (!m_.allFinite()) throw NumericError("beamformer has non-finite entries");
  if (!(m_.squaredNorm() > 0.0)) throw NumericError("beamformer must be nonzero");
}

}  // namespace irsfl
