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
#ifndef IRSFL_COMMON_HPP_
#define IRSFL_COMMON_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irsfl {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Device indices are zero-based throughout the library.
using DeviceSet = std::vector<int>;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when some selected device has |m^H h_i| below the degeneracy floor.
class DegenerateChannelError : public std::domain_error {
 public:
  DegenerateChannelError(int device, double gain)
      : std::domain_error("degenerate effective channel for device " +
                          std::to_string(device)),
        device_(device),
        gain_(gain) {}
  int device() const { return device_; }
  double gain() const { return gain_; }

 private:
  int device_;
  double gain_;
};

/// A solver failure annotated with where in an outer loop it happened.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& where, int iteration, const std::string& what)
      : std::runtime_error(where + " (iteration " + std::to_string(iteration) +
                           "): " + what),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
/// dBm to watts.
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace irsfl

#endif  // IRSFL_COMMON_HPP_
