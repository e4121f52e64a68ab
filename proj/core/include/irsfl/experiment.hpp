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
#ifndef IRSFL_EXPERIMENT_HPP_
#define IRSFL_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsfl/channel_model.hpp"
#include "irsfl/fl_sim.hpp"
#include "irsfl/selection.hpp"

namespace irsfl {

enum class ExperimentKind { kSelect, kSweepGamma, kSweepElements, kSweepAntennas, kFl, kValidate };

std::string to_string(ExperimentKind k);
/// Accepts both dashed (CLI) and underscored (config) spellings.
ExperimentKind parse_kind(const std::string& name);

/// Flat experiment description. Powers are given in dBm and thresholds in
/// dB; the *_w and gamma_linear fields are filled once by finalize().
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kSelect;
  int k_devices = 10;
  int m_antennas = 8;
  int n_elements = 16;
  double p0_dbm = 20.0;
  double sigma2_dbm = -90.0;
  std::vector<double> gamma_db{-20.0};
  std::vector<int> n_list{4, 8, 16, 32};
  std::vector<int> m_list{4, 8, 16};
  std::vector<Scheme> schemes{Scheme::kDc, Scheme::kSdr, Scheme::kRandomPhase, Scheme::kNoIrs};
  std::vector<std::uint64_t> seeds;
  std::string output_path = "out";

  Geometry geometry;
  FadingConfig fading;

  int max_alt_iters = 10;
  int randomization_samples = 50;
  double rho = 10.0;
  double epsilon = 1e-3;
  double solver_tol = 1e-7;

  // Federated learning runs.
  std::string fl_mode = "schemes";  // schemes | ordering
  int fl_classes = 10;
  int fl_dim = 20;
  int fl_samples = 50;
  int fl_rounds = 30;
  int fl_local_steps = 5;
  double fl_learning_rate = 0.1;
  bool fl_non_iid = true;
  std::uint64_t channel_seed = 0;
  std::vector<double> sigma0_list{0.0, 0.05, 0.1};
  std::vector<int> s_sizes{2, 5, 10};

  int threads = 1;

  // Derived at finalize().
  double p0_w = 0.0;
  double sigma2_w = 0.0;
  std::vector<double> gamma_linear;

  /// Converts dB fields to linear and checks invariants.
  void finalize();

  /// Desk-scale defaults (K=10, M=8, N=16, 20 seeds) or, with full_scale,
  /// K=20, M=20, N=64.
  static ExperimentSpec defaults(ExperimentKind kind, bool full_scale);
};

/// Applies "key = value" lines on top of base. '#' starts a comment; list
/// values are comma separated. Errors name the line and the key.
ExperimentSpec parse_spec(std::istream& is, ExperimentSpec base);

/// One select_devices call.
struct SelectionRow {
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::kDc;
  double gamma_db = 0.0;
  int m_antennas = 0;
  int n_elements = 0;
  int k_devices = 0;
  int k_star = 0;
  double achieved_mse = 0.0;
  long total_dc_iters = 0;
  double wall_time_ms = 0.0;
  int dc_runs = 0;
  int dc_converged = 0;
  /// Converged DC runs whose trace is not monotone or whose final rank
  /// residual exceeds the tolerance.
  int dc_certificate_failures = 0;
  std::string status = "ok";
};

struct SummaryRow {
  Scheme scheme = Scheme::kDc;
  double gamma_db = 0.0;
  int m_antennas = 0;
  int n_elements = 0;
  int k_devices = 0;
  int runs = 0;
  double mean_k_star = 0.0;
};

struct FlRow {
  std::string run_id;
  std::string scheme;
  FlRunMetrics metrics;
};

struct FlSelectionRow {
  std::string scheme;
  int k_star = 0;
  double achieved_mse = 0.0;
};

struct ExperimentResult {
  std::vector<SelectionRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<FlRow> fl_rows;
  std::vector<FlSelectionRow> fl_selection;
  std::vector<std::string> files;
  int exit_status = 0;
};

/// Runs spec and, if write_files, writes its CSV files under
/// spec.output_path. validator handles kind == validate.
ExperimentResult run_experiment(const ExperimentSpec& spec, bool write_files = true,
                                const std::function<int(std::ostream&)>& validator = {});

/// Selection CSV: seed,scheme,gamma_db,M,N,K,k_star,achieved_mse_db,
/// total_dc_iters,wall_time_ms,dc_runs,dc_converged,dc_certificate_failures,status
void write_selection_csv(std::ostream& os, const std::vector<SelectionRow>& rows);
/// Summary CSV: scheme,gamma_db,M,N,K,runs,mean_k_star
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Formats a double for CSV: round-trip precision, or the literal "inf".
std::string csv_number(double x);

/// Runs fn(i) for i in [0, count) on up to threads workers. Each index is
/// processed exactly once; callers store results by index.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace irsfl

#endif  // IRSFL_EXPERIMENT_HPP_
