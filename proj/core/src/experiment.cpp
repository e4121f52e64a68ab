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
#include "irsfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "irsfl/aircomp.hpp"

namespace irsfl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Thrown by the value parsers; parse_spec adds the line and key.
struct BadValue {
  std::string what;
};

double to_double(const std::string& s) {
  // strtod accepts "inf" and "-inf", which the Rician keys rely on.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || std::isnan(v)) {
    throw BadValue{"expected a number, got '" + s + "'"};
  }
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw BadValue{"expected an integer, got '" + s + "'"};
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw BadValue{"expected a boolean, got '" + s + "'"};
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, F item) {
  std::vector<T> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<T>(item(s)));
  if (out.empty()) throw BadValue{"empty list"};
  return out;
}

// Seeds accept plain values and inclusive ranges "a..b".
std::vector<std::uint64_t> to_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const auto& s : split_list(v)) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
      const long long x = to_int(s);
      if (x < 0) throw BadValue{"negative seed"};
      out.push_back(static_cast<std::uint64_t>(x));
      continue;
    }
    const long long a = to_int(trim(s.substr(0, dots)));
    const long long b = to_int(trim(s.substr(dots + 2)));
    if (a < 0 || b < a) throw BadValue{"bad seed range '" + s + "'"};
    for (long long x = a; x <= b; ++x) out.push_back(static_cast<std::uint64_t>(x));
  }
  if (out.empty()) throw BadValue{"empty list"};
  return out;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

SelectionConfig selection_config(const ExperimentSpec& spec, double gamma_linear, Scheme scheme) {
  SelectionConfig cfg;
  cfg.gamma = gamma_linear;
  cfg.p0 = spec.p0_w;
  cfg.sigma2 = spec.sigma2_w;
  cfg.dc.rho = spec.rho;
  cfg.dc.epsilon = spec.epsilon;
  cfg.solver.tol_abs = spec.solver_tol;
  cfg.solver.tol_rel = spec.solver_tol;
  cfg.max_alt_iters = spec.max_alt_iters;
  cfg.baseline = scheme;
  cfg.randomization_samples = spec.randomization_samples;
  return cfg;
}

struct Cell {
  std::uint64_t seed;
  Scheme scheme;
  double gamma_db;
  double gamma_linear;
  int m;
  int n;
};

SelectionRow run_cell(const ExperimentSpec& spec, const Cell& cell) {
  SelectionRow row;
  row.seed = cell.seed;
  row.scheme = cell.scheme;
  row.gamma_db = cell.gamma_db;
  row.m_antennas = cell.m;
  row.n_elements = cell.n;
  row.k_devices = spec.k_devices;
  row.achieved_mse = std::numeric_limits<double>::infinity();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Geometry geo = spec.geometry;
    geo.num_devices = spec.k_devices;
    const ChannelSet channels = sample_channels(geo, spec.fading, cell.m, cell.n, cell.seed);
    const SelectionOutcome out = select_devices(
        channels, selection_config(spec, cell.gamma_linear, cell.scheme), cell.seed);
    row.k_star = out.k_star;
    row.achieved_mse = out.achieved_mse;
    row.total_dc_iters = out.total_dc_iters;
    for (const auto& t : out.dc_traces) {
      ++row.dc_runs;
      if (!t.converged) continue;
      ++row.dc_converged;
      const bool rank_ok =
          !t.rank_residual_per_iter.empty() && t.rank_residual_per_iter.back() <= 1e-6;
      if (!trace_monotone(t) || !rank_ok) ++row.dc_certificate_failures;
    }
  } catch (const std::exception& e) {
    row.status = "error: " + sanitize(e.what());
  }
  row.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<SummaryRow> summarize(const std::vector<SelectionRow>& rows) {
  // Keyed by first appearance so the summary follows the cell order.
  std::vector<SummaryRow> out;
  std::map<std::tuple<int, double, int, int>, std::size_t> index;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    const auto key = std::make_tuple(static_cast<int>(r.scheme), r.gamma_db, r.m_antennas,
                                     r.n_elements);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      SummaryRow s;
      s.scheme = r.scheme;
      s.gamma_db = r.gamma_db;
      s.m_antennas = r.m_antennas;
      s.n_elements = r.n_elements;
      s.k_devices = r.k_devices;
      out.push_back(s);
    }
    SummaryRow& s = out[it->second];
    s.mean_k_star += r.k_star;
    ++s.runs;
  }
  for (auto& s : out) s.mean_k_star /= s.runs;
  return out;
}

FlRunMetrics idle_metrics(const FlTask& task, int rounds) {
  // No device selected: the global model never moves from zero.
  const RVector z = RVector::Zero(task.model_size());
  FlRunMetrics m;
  m.training_loss.assign(rounds, global_loss(task, z));
  m.test_accuracy.assign(rounds, test_accuracy(task, z));
  return m;
}

std::string fmt_plain(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

void run_fl_schemes(const ExperimentSpec& spec, ExperimentResult& result) {
  Geometry geo = spec.geometry;
  geo.num_devices = spec.k_devices;
  const ChannelSet channels =
      sample_channels(geo, spec.fading, spec.m_antennas, spec.n_elements, spec.channel_seed);
  auto full = std::make_shared<const ChannelSet>(channels);
  auto direct = std::make_shared<const ChannelSet>(channels.without_irs());

  struct Plan {
    std::string name;
    DeviceSet selected;
    ErrorModel error;
  };
  std::vector<Plan> plans;
  for (Scheme s : spec.schemes) {
    const SelectionOutcome out = select_devices(
        channels, selection_config(spec, spec.gamma_linear.front(), s), spec.channel_seed);
    Plan p{to_string(s), out.selected, ErrorModel::ideal()};
    if (!out.selected.empty()) {
      const auto& ch = s == Scheme::kNoIrs ? direct : full;
      const AircompInstance inst(ch, out.selected, spec.p0_w, spec.sigma2_w);
      p.error = ErrorModel::aircomp(inst, out.m, out.phases);
    }
    result.fl_selection.push_back({p.name, out.k_star, out.achieved_mse});
    plans.push_back(std::move(p));
  }
  Plan bench{"benchmark", {}, ErrorModel::ideal()};
  for (int k = 0; k < spec.k_devices; ++k) bench.selected.push_back(k);
  result.fl_selection.push_back({bench.name, spec.k_devices, 0.0});
  plans.push_back(bench);

  std::vector<std::vector<FlRow>> per_seed(spec.seeds.size());
  parallel_for(static_cast<int>(spec.seeds.size()), spec.threads, [&](int i) {
    const std::uint64_t seed = spec.seeds[i];
    const FlTask task = make_task(spec.fl_classes, spec.fl_dim, spec.k_devices, spec.fl_samples,
                                  spec.fl_non_iid, seed);
    for (const auto& p : plans) {
      FlRow row{"seed" + std::to_string(seed), p.name, {}};
      if (p.selected.empty()) {
        row.metrics = idle_metrics(task, spec.fl_rounds);
      } else {
        FlRoundConfig cfg;
        cfg.rounds = spec.fl_rounds;
        cfg.local_steps = spec.fl_local_steps;
        cfg.learning_rate = spec.fl_learning_rate;
        cfg.error = p.error;
        cfg.selected = p.selected;
        row.metrics = run_fl(task, cfg, seed);
      }
      per_seed[i].push_back(std::move(row));
    }
  });
  for (auto& rows : per_seed) {
    for (auto& r : rows) result.fl_rows.push_back(std::move(r));
  }
}

void run_fl_ordering(const ExperimentSpec& spec, ExperimentResult& result) {
  std::vector<std::vector<FlRow>> per_seed(spec.seeds.size());
  parallel_for(static_cast<int>(spec.seeds.size()), spec.threads, [&](int i) {
    const std::uint64_t seed = spec.seeds[i];
    const FlTask task = make_task(spec.fl_classes, spec.fl_dim, spec.k_devices, spec.fl_samples,
                                  spec.fl_non_iid, seed);
    for (double sigma0 : spec.sigma0_list) {
      for (int s : spec.s_sizes) {
        FlRoundConfig cfg;
        cfg.rounds = spec.fl_rounds;
        cfg.local_steps = spec.fl_local_steps;
        cfg.learning_rate = spec.fl_learning_rate;
        cfg.error = sigma0 > 0.0 ? ErrorModel::fixed_gaussian(sigma0) : ErrorModel::ideal();
        for (int k = 0; k < s; ++k) cfg.selected.push_back(k);
        FlRow row{"seed" + std::to_string(seed) + "_s" + std::to_string(s) + "_sigma0_" +
                      fmt_plain(sigma0),
                  "fixed_gaussian", run_fl(task, cfg, seed)};
        per_seed[i].push_back(std::move(row));
      }
    }
  });
  for (auto& rows : per_seed) {
    for (auto& r : rows) result.fl_rows.push_back(std::move(r));
  }
}

std::ofstream open_output(const std::string& dir, const std::string& name,
                          ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open output file " + path);
  result.files.push_back(path);
  return os;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kSelect: return "select";
    case ExperimentKind::kSweepGamma: return "sweep_gamma";
    case ExperimentKind::kSweepElements: return "sweep_elements";
    case ExperimentKind::kSweepAntennas: return "sweep_antennas";
    case ExperimentKind::kFl: return "fl";
    case ExperimentKind::kValidate: return "validate";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  for (auto k : {ExperimentKind::kSelect, ExperimentKind::kSweepGamma,
                 ExperimentKind::kSweepElements, ExperimentKind::kSweepAntennas,
                 ExperimentKind::kFl, ExperimentKind::kValidate}) {
    if (to_string(k) == n) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

void ExperimentSpec::finalize() {
  if (seeds.empty()) throw ConfigError("spec: seed list is empty");
  if (k_devices < 1 || m_antennas < 1 || n_elements < 1) {
    throw ConfigError("spec: K, M and N must be positive");
  }
  if (gamma_db.empty()) throw ConfigError("spec: gamma_db list is empty");
  if (schemes.empty()) throw ConfigError("spec: scheme list is empty");
  for (int n : n_list) {
    if (n < 1) throw ConfigError("spec: n_list entries must be positive");
  }
  for (int m : m_list) {
    if (m < 1) throw ConfigError("spec: m_list entries must be positive");
  }
  if (max_alt_iters < 1 || randomization_samples < 1) {
    throw ConfigError("spec: max_alt_iters and randomization_samples must be positive");
  }
  if (!(rho > 0.0) || !(epsilon > 0.0) || !(solver_tol > 0.0)) {
    throw ConfigError("spec: rho, epsilon and solver_tol must be positive");
  }
  if (fl_mode != "schemes" && fl_mode != "ordering") {
    throw ConfigError("spec: fl_mode must be 'schemes' or 'ordering'");
  }
  if (fl_classes < 2 || fl_dim < 1 || fl_samples < 1 || fl_rounds < 1 || fl_local_steps < 1 ||
      !(fl_learning_rate > 0.0)) {
    throw ConfigError("spec: invalid federated learning parameters");
  }
  for (double s : sigma0_list) {
    if (!(s >= 0.0)) throw ConfigError("spec: sigma0 entries must be nonnegative");
  }
  for (int s : s_sizes) {
    if (s < 1 || s > k_devices) throw ConfigError("spec: s_sizes entries must lie in [1, K]");
  }
  if (threads < 1) throw ConfigError("spec: threads must be positive");
  geometry.num_devices = k_devices;
  geometry.validate();
  fading.validate();

  p0_w = dbm_to_watts(p0_dbm);
  sigma2_w = dbm_to_watts(sigma2_dbm);
  gamma_linear.clear();
  for (double g : gamma_db) gamma_linear.push_back(db_to_linear(g));
}

ExperimentSpec ExperimentSpec::defaults(ExperimentKind kind, bool full_scale) {
  ExperimentSpec s;
  s.kind = kind;
  if (full_scale) {
    s.k_devices = 20;
    s.m_antennas = 20;
    s.n_elements = 64;
  }
  for (std::uint64_t i = 0; i < 20; ++i) s.seeds.push_back(i);
  switch (kind) {
    case ExperimentKind::kSweepGamma:
      s.gamma_db = {-30.0, -25.0, -20.0, -15.0, -10.0};
      break;
    case ExperimentKind::kSweepElements:
      s.gamma_db = {-20.0};
      if (full_scale) s.n_list = {10, 20, 30, 40, 50, 60};
      break;
    case ExperimentKind::kSweepAntennas:
      s.gamma_db = {-22.0};
      if (full_scale) s.m_list = {10, 20, 30, 40, 50};
      break;
    case ExperimentKind::kFl:
      s.gamma_db = {-17.0};
      s.schemes = {Scheme::kDc, Scheme::kNoIrs};
      s.seeds.resize(10);
      break;
    default:
      break;
  }
  s.finalize();
  return s;
}

ExperimentSpec parse_spec(std::istream& is, ExperimentSpec base) {
  ExperimentSpec s = std::move(base);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    try {
      if (key == "kind") s.kind = parse_kind(v);
      else if (key == "K") s.k_devices = static_cast<int>(to_int(v));
      else if (key == "M") s.m_antennas = static_cast<int>(to_int(v));
      else if (key == "N") s.n_elements = static_cast<int>(to_int(v));
      else if (key == "p0_dbm") s.p0_dbm = to_double(v);
      else if (key == "sigma2_dbm") s.sigma2_dbm = to_double(v);
      else if (key == "gamma_db") s.gamma_db = to_list<double>(v, to_double);
      else if (key == "n_list") s.n_list = to_list<int>(v, to_int);
      else if (key == "m_list") s.m_list = to_list<int>(v, to_int);
      else if (key == "schemes") s.schemes = to_list<Scheme>(v, parse_scheme);
      else if (key == "seeds") s.seeds = to_seeds(v);
      else if (key == "output_path") s.output_path = v;
      else if (key == "c0_db") s.fading.c0_db = to_double(v);
      else if (key == "alpha_bd") s.fading.alpha_bd = to_double(v);
      else if (key == "alpha_bi") s.fading.alpha_bi = to_double(v);
      else if (key == "alpha_id") s.fading.alpha_id = to_double(v);
      else if (key == "rician_bi_db") s.fading.rician_bi = db_to_linear(to_double(v));
      else if (key == "rician_id_db") s.fading.rician_id = db_to_linear(to_double(v));
      else if (key == "rician_bd_db") s.fading.rician_bd = db_to_linear(to_double(v));
      else if (key == "max_alt_iters") s.max_alt_iters = static_cast<int>(to_int(v));
      else if (key == "randomization_samples") s.randomization_samples = static_cast<int>(to_int(v));
      else if (key == "rho") s.rho = to_double(v);
      else if (key == "epsilon") s.epsilon = to_double(v);
      else if (key == "solver_tol") s.solver_tol = to_double(v);
      else if (key == "fl_mode") s.fl_mode = v;
      else if (key == "fl_classes") s.fl_classes = static_cast<int>(to_int(v));
      else if (key == "fl_dim") s.fl_dim = static_cast<int>(to_int(v));
      else if (key == "fl_samples") s.fl_samples = static_cast<int>(to_int(v));
      else if (key == "fl_rounds") s.fl_rounds = static_cast<int>(to_int(v));
      else if (key == "fl_local_steps") s.fl_local_steps = static_cast<int>(to_int(v));
      else if (key == "fl_learning_rate") s.fl_learning_rate = to_double(v);
      else if (key == "fl_non_iid") s.fl_non_iid = to_bool(v);
      else if (key == "channel_seed") s.channel_seed = static_cast<std::uint64_t>(to_int(v));
      else if (key == "sigma0_list") s.sigma0_list = to_list<double>(v, to_double);
      else if (key == "s_sizes") s.s_sizes = to_list<int>(v, to_int);
      else if (key == "threads") s.threads = static_cast<int>(to_int(v));
      else throw BadValue{"unknown key"};
    } catch (const BadValue& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key + "': " + e.what);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key + "': " +
                        e.what());
    }
  }
  s.finalize();
  return s;
}

std::string csv_number(double x) {
  if (!std::isfinite(x)) return "inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void write_selection_csv(std::ostream& os, const std::vector<SelectionRow>& rows) {
  os << "seed,scheme,gamma_db,M,N,K,k_star,achieved_mse_db,total_dc_iters,wall_time_ms,"
        "dc_runs,dc_converged,dc_certificate_failures,status\n";
  for (const auto& r : rows) {
    const double mse_db = r.achieved_mse > 0.0 ? linear_to_db(r.achieved_mse)
                                               : std::numeric_limits<double>::infinity();
    os << r.seed << ',' << to_string(r.scheme) << ',' << csv_number(r.gamma_db) << ','
       << r.m_antennas << ',' << r.n_elements << ',' << r.k_devices << ',' << r.k_star << ','
       << csv_number(mse_db) << ',' << r.total_dc_iters << ',' << csv_number(r.wall_time_ms)
       << ',' << r.dc_runs << ',' << r.dc_converged << ',' << r.dc_certificate_failures << ','
       << r.status << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "scheme,gamma_db,M,N,K,runs,mean_k_star\n";
  for (const auto& r : rows) {
    os << to_string(r.scheme) << ',' << csv_number(r.gamma_db) << ',' << r.m_antennas << ','
       << r.n_elements << ',' << r.k_devices << ',' << r.runs << ',' << csv_number(r.mean_k_star)
       << '\n';
  }
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, bool write_files,
                                const std::function<int(std::ostream&)>& validator) {
  if (spec.gamma_linear.size() != spec.gamma_db.size() || spec.seeds.empty()) {
    throw ConfigError("run_experiment: spec was not finalized");
  }
  ExperimentResult result;
  if (spec.kind == ExperimentKind::kValidate) {
    if (!validator) throw ConfigError("run_experiment: no validator available");
    result.exit_status = validator(std::cout);
    return result;
  }

  if (spec.kind == ExperimentKind::kFl) {
    if (spec.fl_mode == "ordering") {
      run_fl_ordering(spec, result);
    } else {
      run_fl_schemes(spec, result);
    }
    if (write_files) {
      auto os = open_output(spec.output_path, "fl_metrics.csv", result);
      write_metrics_csv_header(os);
      for (const auto& r : result.fl_rows) write_metrics_csv(os, r.run_id, r.scheme, r.metrics);
      if (!result.fl_selection.empty()) {
        auto sel = open_output(spec.output_path, "fl_selection.csv", result);
        sel << "scheme,k_star,achieved_mse_db\n";
        for (const auto& r : result.fl_selection) {
          const double db = r.achieved_mse > 0.0 ? linear_to_db(r.achieved_mse)
                                                 : std::numeric_limits<double>::infinity();
          sel << r.scheme << ',' << r.k_star << ',' << csv_number(db) << '\n';
        }
      }
    }
    return result;
  }

  // Cells in sorted-key order: outer sweep parameter, then scheme, then seed.
  std::vector<Cell> cells;
  auto add = [&](double g_db, double g_lin, int m, int n) {
    for (Scheme s : spec.schemes) {
      for (std::uint64_t seed : spec.seeds) cells.push_back({seed, s, g_db, g_lin, m, n});
    }
  };
  switch (spec.kind) {
    case ExperimentKind::kSelect:
      add(spec.gamma_db.front(), spec.gamma_linear.front(), spec.m_antennas, spec.n_elements);
      break;
    case ExperimentKind::kSweepGamma:
      for (std::size_t i = 0; i < spec.gamma_db.size(); ++i) {
        add(spec.gamma_db[i], spec.gamma_linear[i], spec.m_antennas, spec.n_elements);
      }
      break;
    case ExperimentKind::kSweepElements:
      for (int n : spec.n_list) {
        add(spec.gamma_db.front(), spec.gamma_linear.front(), spec.m_antennas, n);
      }
      break;
    case ExperimentKind::kSweepAntennas:
      for (int m : spec.m_list) {
        add(spec.gamma_db.front(), spec.gamma_linear.front(), m, spec.n_elements);
      }
      break;
    default:
      break;
  }

  result.rows.resize(cells.size());
  parallel_for(static_cast<int>(cells.size()), spec.threads,
               [&](int i) { result.rows[i] = run_cell(spec, cells[i]); });
  for (const auto& r : result.rows) {
    if (r.status != "ok") result.exit_status = 3;
  }
  result.summary = summarize(result.rows);

  if (write_files) {
    auto os = open_output(spec.output_path, "selection.csv", result);
    write_selection_csv(os, result.rows);
    if (spec.kind != ExperimentKind::kSelect) {
      auto sum = open_output(spec.output_path, "summary.csv", result);
      write_summary_csv(sum, result.summary);
    }
  }
  return result;
}

}  // namespace irsfl
