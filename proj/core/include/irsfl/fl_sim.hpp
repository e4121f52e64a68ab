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
#ifndef IRSFL_FL_SIM_HPP_
#define IRSFL_FL_SIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsfl/aircomp.hpp"
#include "irsfl/common.hpp"

namespace irsfl {

/// Gaussian-mixture classification task split across K devices.
/// A model is a flat vector holding a C x (d + 1) weight matrix (bias last)
/// in column-major order.
struct FlTask {
  int num_classes = 0;
  int dim = 0;
  std::vector<RMatrix> features;           // per device, D x d
  std::vector<std::vector<int>> labels;    // per device, length D
  RMatrix test_features;
  std::vector<int> test_labels;
  RMatrix class_means;                     // d x C

  int num_devices() const { return static_cast<int>(features.size()); }
  int model_size() const { return num_classes * (dim + 1); }
};

/// Class means are orthonormal directions of norm mean_radius; samples are
/// N(mu_c, I). With non_iid each device holds exactly two classes.
FlTask make_task(int num_classes, int d, int k_devices, int samples_per_device, bool non_iid,
                 std::uint64_t seed, int test_size = 2000, double mean_radius = 4.0);

/// Mean multinomial logistic loss over one device's data.
double local_loss(const FlTask& task, int device, const RVector& z);
RVector local_gradient(const FlTask& task, int device, const RVector& z);
/// Global objective F: average of the local losses (equal dataset sizes).
double global_loss(const FlTask& task, const RVector& z);
double test_accuracy(const FlTask& task, const RVector& z);

/// steps full-batch gradient steps on F_k.
RVector local_update(const FlTask& task, int device, const RVector& z_global, int steps, double lr);

enum class ErrorKind { kIdeal, kFixedGaussian, kAircomp };

struct ErrorModel {
  ErrorKind kind = ErrorKind::kIdeal;
  /// Per-entry standard deviation of the injected error for kFixedGaussian.
  double sigma0 = 0.0;
  /// Aggregation MSE of the sum for kAircomp; per-entry variance is mse/|S|^2.
  double aircomp_mse = 0.0;

  static ErrorModel ideal() { return {}; }
  static ErrorModel fixed_gaussian(double sigma0);
  static ErrorModel aircomp(const AircompInstance& instance, const Beamformer& m,
                            const PhaseVector& v);
  /// Per-entry error standard deviation for an average over num_models.
  double entry_sd(int num_models) const;
};

/// Mean of the models plus the error term of error_model. The error stream
/// depends only on (seed, round), so runs that differ only in sigma0 see
/// identically scaled noise.
RVector aggregate(const std::vector<RVector>& models, const ErrorModel& error_model,
                  std::uint64_t seed, int round);

struct FlRoundConfig {
  int rounds = 30;
  int local_steps = 5;
  double learning_rate = 0.1;
  ErrorModel error;
  DeviceSet selected;

  void validate(int k_devices) const;
};

struct FlRunMetrics {
  std::vector<double> training_loss;
  std::vector<double> test_accuracy;
};

FlRunMetrics run_fl(const FlTask& task, const FlRoundConfig& cfg, std::uint64_t seed);

void write_metrics_csv_header(std::ostream& os);
void write_metrics_csv(std::ostream& os, const std::string& run_id, const std::string& scheme,
                       const FlRunMetrics& metrics);

}  // namespace irsfl

#endif  // IRSFL_FL_SIM_HPP_
