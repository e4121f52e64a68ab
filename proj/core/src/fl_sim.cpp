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
#include "irsfl/fl_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "irsfl/rng.hpp"

namespace irsfl {
namespace {

enum Tag : std::uint64_t { kTagMeans = 1, kTagDevice = 2, kTagTest = 3, kTagClasses = 4, kTagNoise = 5 };

Eigen::Map<const RMatrix> weights(const RVector& z, int c, int d) {
  return Eigen::Map<const RMatrix>(z.data(), c, d + 1);
}

// Row-wise softmax probabilities for logits = X W^T + b.
RMatrix probabilities(const RMatrix& x, const RVector& z, int c, int d) {
  const auto w = weights(z, c, d);
  RMatrix logits = x * w.leftCols(d).transpose();
  logits.rowwise() += w.col(d).transpose();
  for (int i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - mx).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

void draw_samples(const RMatrix& means, const std::vector<int>& labels, Rng& rng, RMatrix& out) {
  const int d = static_cast<int>(means.rows());
  std::normal_distribution<double> n(0.0, 1.0);
  out.resize(static_cast<Eigen::Index>(labels.size()), d);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (int j = 0; j < d; ++j) out(i, j) = means(j, labels[i]) + n(rng);
}

void check_device(const FlTask& task, int device) {
  if (device < 0 || device >= task.num_devices()) throw DimensionError("device index out of range");
}

}  // namespace

FlTask make_task(int num_classes, int d, int k_devices, int samples_per_device, bool non_iid,
                 std::uint64_t seed, int test_size, double mean_radius) {
  if (num_classes < 2) throw ConfigError("make_task: need at least two classes");
  if (d < num_classes) throw ConfigError("make_task: d must be >= num_classes");
  if (k_devices < 1 || samples_per_device < 1 || test_size < 1)
    throw ConfigError("make_task: K, D and test_size must be positive");

  FlTask task;
  task.num_classes = num_classes;
  task.dim = d;
  {
    Rng rng = make_rng(seed, {kTagMeans});
    std::normal_distribution<double> n(0.0, 1.0);
    RMatrix raw(d, num_classes);
    for (int j = 0; j < num_classes; ++j)
      for (int i = 0; i < d; ++i) raw(i, j) = n(rng);
    Eigen::HouseholderQR<RMatrix> qr(raw);
    task.class_means = RMatrix(qr.householderQ()).leftCols(num_classes) * mean_radius;
  }

  for (int k = 0; k < k_devices; ++k) {
    Rng rng = make_rng(seed, {kTagDevice, static_cast<std::uint64_t>(k)});
    std::vector<int> labels(samples_per_device);
    if (non_iid) {
      Rng crng = make_rng(seed, {kTagClasses, static_cast<std::uint64_t>(k)});
      std::vector<int> classes(num_classes);
      std::iota(classes.begin(), classes.end(), 0);
      std::shuffle(classes.begin(), classes.end(), crng);
      for (int i = 0; i < samples_per_device; ++i) labels[i] = classes[i % 2];
    } else {
      std::uniform_int_distribution<int> u(0, num_classes - 1);
      for (int& l : labels) l = u(rng);
    }
    RMatrix x;
    draw_samples(task.class_means, labels, rng, x);
    task.features.push_back(std::move(x));
    task.labels.push_back(std::move(labels));
  }

  Rng rng = make_rng(seed, {kTagTest});
  std::uniform_int_distribution<int> u(0, num_classes - 1);
  task.test_labels.resize(test_size);
  for (int& l : task.test_labels) l = u(rng);
  draw_samples(task.class_means, task.test_labels, rng, task.test_features);
  return task;
}

double local_loss(const FlTask& task, int device, const RVector& z) {
  check_device(task, device);
  const RMatrix p = probabilities(task.features[device], z, task.num_classes, task.dim);
  const auto& y = task.labels[device];
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) loss -= std::log(std::max(p(i, y[i]), 1e-300));
  return loss / static_cast<double>(y.size());
}

RVector local_gradient(const FlTask& task, int device, const RVector& z) {
  check_device(task, device);
  const int c = task.num_classes;
  const int d = task.dim;
  const RMatrix& x = task.features[device];
  RMatrix resid = probabilities(x, z, c, d);
  const auto& y = task.labels[device];
  for (std::size_t i = 0; i < y.size(); ++i) resid(i, y[i]) -= 1.0;
  resid /= static_cast<double>(y.size());
  RMatrix g(c, d + 1);
  g.leftCols(d) = resid.transpose() * x;
  g.col(d) = resid.colwise().sum().transpose();
  return Eigen::Map<const RVector>(g.data(), g.size());
}

double global_loss(const FlTask& task, const RVector& z) {
  double total = 0.0;
  for (int k = 0; k < task.num_devices(); ++k) total += local_loss(task, k, z);
  return total / task.num_devices();
}

double test_accuracy(const FlTask& task, const RVector& z) {
  const RMatrix p = probabilities(task.test_features, z, task.num_classes, task.dim);
  int hits = 0;
  for (int i = 0; i < p.rows(); ++i) {
    Eigen::Index arg = 0;
    p.row(i).maxCoeff(&arg);
    hits += static_cast<int>(arg) == task.test_labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(p.rows());
}

RVector local_update(const FlTask& task, int device, const RVector& z_global, int steps, double lr) {
  if (steps < 0) throw ConfigError("local_update: steps must be nonnegative");
  check_device(task, device);
  RVector z = z_global;
  for (int s = 0; s < steps; ++s) z -= lr * local_gradient(task, device, z);
  return z;
}

ErrorModel ErrorModel::fixed_gaussian(double sigma0) {
  if (!(sigma0 >= 0.0)) throw ConfigError("sigma0 must be nonnegative");
  ErrorModel e;
  e.kind = ErrorKind::kFixedGaussian;
  e.sigma0 = sigma0;
  return e;
}

ErrorModel ErrorModel::aircomp(const AircompInstance& instance, const Beamformer& m,
                               const PhaseVector& v) {
  const MseResult r = aggregation_mse(instance, m, v);
  if (r.degenerate || !std::isfinite(r.value))
    throw DegenerateChannelError(r.worst_device, 0.0);
  ErrorModel e;
  e.kind = ErrorKind::kAircomp;
  e.aircomp_mse = r.value;
  return e;
}

double ErrorModel::entry_sd(int num_models) const {
  switch (kind) {
    case ErrorKind::kIdeal:
      return 0.0;
    case ErrorKind::kFixedGaussian:
      return sigma0;
    case ErrorKind::kAircomp:
      return std::sqrt(aircomp_mse) / static_cast<double>(num_models);
  }
  return 0.0;
}

RVector aggregate(const std::vector<RVector>& models, const ErrorModel& error_model,
                  std::uint64_t seed, int round) {
  if (models.empty()) throw ConfigError("aggregate: no models");
  RVector mean = RVector::Zero(models.front().size());
  for (const auto& z : models) {
    if (z.size() != mean.size()) throw DimensionError("aggregate: model size mismatch");
    mean += z;
  }
  mean /= static_cast<double>(models.size());
  const double sd = error_model.entry_sd(static_cast<int>(models.size()));
  if (sd > 0.0) {
    Rng rng = make_rng(seed, {kTagNoise, static_cast<std::uint64_t>(round)});
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < mean.size(); ++i) mean(i) += sd * n(rng);
  }
  return mean;
}

void FlRoundConfig::validate(int k_devices) const {
  if (rounds < 1) throw ConfigError("fl: rounds must be >= 1");
  if (local_steps < 0) throw ConfigError("fl: local_steps must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("fl: learning_rate must be positive");
  if (selected.empty()) throw ConfigError("fl: selected device set is empty");
  for (int i : selected)
    if (i < 0 || i >= k_devices) throw ConfigError("fl: selected device out of range");
}

FlRunMetrics run_fl(const FlTask& task, const FlRoundConfig& cfg, std::uint64_t seed) {
  cfg.validate(task.num_devices());
  RVector z = RVector::Zero(task.model_size());
  FlRunMetrics out;
  std::vector<RVector> local(cfg.selected.size());
  for (int t = 1; t <= cfg.rounds; ++t) {
    for (std::size_t k = 0; k < cfg.selected.size(); ++k)
      local[k] = local_update(task, cfg.selected[k], z, cfg.local_steps, cfg.learning_rate);
    z = aggregate(local, cfg.error, seed, t);
    out.training_loss.push_back(global_loss(task, z));
    out.test_accuracy.push_back(test_accuracy(task, z));
  }
  return out;
}

void write_metrics_csv_header(std::ostream& os) {
  os << "run_id,scheme,round,training_loss,test_accuracy\n";
}

void write_metrics_csv(std::ostream& os, const std::string& run_id, const std::string& scheme,
                       const FlRunMetrics& metrics) {
  const auto prec = os.precision(17);
  for (std::size_t t = 0; t < metrics.training_loss.size(); ++t)
    os << run_id << ',' << scheme << ',' << t + 1 << ',' << metrics.training_loss[t] << ','
       << metrics.test_accuracy[t] << '\n';
  os.precision(prec);
}

}  // namespace irsfl
