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
// Command-line driver: irsfl <subcommand> [--config PATH] [--out DIR]
// [--seeds N] [--full-scale].

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "irsfl/experiment.hpp"
#include "oracles.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  int seeds = 0;
  int threads = 0;
  bool full_scale = false;
  std::string filter;
};

int run(irsfl::ExperimentKind kind, const Options& opt) {
  irsfl::ExperimentSpec spec = irsfl::ExperimentSpec::defaults(kind, opt.full_scale);
  if (!opt.config.empty()) {
    std::ifstream is(opt.config);
    if (!is) throw irsfl::ConfigError("cannot open config file " + opt.config);
    spec = irsfl::parse_spec(is, spec);
  }
  // The subcommand names the experiment; command-line flags override the file.
  spec.kind = kind;
  if (!opt.out.empty()) spec.output_path = opt.out;
  if (opt.seeds > 0) {
    spec.seeds.clear();
    for (int s = 0; s < opt.seeds; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (opt.threads > 0) spec.threads = opt.threads;
  spec.finalize();

  const auto result = irsfl::run_experiment(spec, true, [&](std::ostream& os) {
    return irsfl::oracles::run_validation(os, opt.filter);
  });
  for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
  for (const auto& s : result.summary) {
    std::cout << irsfl::to_string(s.scheme) << " gamma_db=" << s.gamma_db << " M=" << s.m_antennas
              << " N=" << s.n_elements << " mean_k_star=" << s.mean_k_star << "\n";
  }
  if (kind == irsfl::ExperimentKind::kSelect) {
    for (const auto& r : result.rows) {
      std::cout << "seed " << r.seed << " " << irsfl::to_string(r.scheme) << ": k_star=" << r.k_star
                << " (" << r.status << ")\n";
    }
  }
  for (const auto& r : result.fl_selection) {
    std::cout << r.scheme << ": k_star=" << r.k_star << "\n";
  }
  return result.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Device selection and over-the-air federated learning experiments"};
  app.require_subcommand(1);
  Options opt;

  const std::pair<const char*, irsfl::ExperimentKind> commands[] = {
      {"select", irsfl::ExperimentKind::kSelect},
      {"sweep-gamma", irsfl::ExperimentKind::kSweepGamma},
      {"sweep-elements", irsfl::ExperimentKind::kSweepElements},
      {"sweep-antennas", irsfl::ExperimentKind::kSweepAntennas},
      {"fl", irsfl::ExperimentKind::kFl},
      {"validate", irsfl::ExperimentKind::kValidate},
  };
  irsfl::ExperimentKind chosen = irsfl::ExperimentKind::kSelect;
  for (const auto& [name, kind] : commands) {
    CLI::App* sub = app.add_subcommand(name, "run the " + std::string(name) + " experiment");
    sub->add_option("--config", opt.config, "flat key = value configuration file");
    sub->add_option("--out", opt.out, "output directory for CSV files");
    sub->add_option("--seeds", opt.seeds, "use seeds 0..N-1")->check(CLI::PositiveNumber);
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--full-scale", opt.full_scale, "K=20, M=20, N=64 instead of desk scale");
    if (kind == irsfl::ExperimentKind::kValidate) {
      sub->add_option("--filter", opt.filter, "run only suites whose name contains this text");
    }
    sub->callback([&chosen, kind = kind] { chosen = kind; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return run(chosen, opt);
  } catch (const irsfl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
