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

#include <gtest/gtest.h>

#include <atomic>
#include <sstream>
#include <vector>

namespace irsfl {
namespace {

ExperimentSpec parse(const std::string& text,
                     ExperimentSpec base = ExperimentSpec::defaults(ExperimentKind::kSelect, false)) {
  std::istringstream is(text);
  return parse_spec(is, base);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// Small select spec: K=4, M=3, N=4, two seeds.
ExperimentSpec tiny_select() {
  ExperimentSpec s = ExperimentSpec::defaults(ExperimentKind::kSelect, false);
  s.k_devices = 4;
  s.m_antennas = 3;
  s.n_elements = 4;
  s.gamma_db = {-15.0};
  s.seeds = {0, 1};
  s.max_alt_iters = 3;
  s.s_sizes = {2, 4};
  s.finalize();
  return s;
}

TEST(ParseKind, AcceptsDashesAndUnderscores) {
  EXPECT_EQ(parse_kind("sweep-gamma"), ExperimentKind::kSweepGamma);
  EXPECT_EQ(parse_kind("sweep_antennas"), ExperimentKind::kSweepAntennas);
  EXPECT_EQ(parse_kind(to_string(ExperimentKind::kFl)), ExperimentKind::kFl);
  EXPECT_THROW(parse_kind("sweep"), ConfigError);
}

TEST(ParseSpec, KeysListsRangesAndComments) {
  const ExperimentSpec s = parse(
      "# desk run\n"
      "kind = sweep_elements\n"
      "K = 6   # devices\n"
      "gamma_db = -20, -10\n"
      "n_list = 2,4\n"
      "schemes = dc, no_irs\n"
      "seeds = 3..6\n"
      "fl_non_iid = false\n"
      "s_sizes = 2, 6\n"
      "\n");
  EXPECT_EQ(s.kind, ExperimentKind::kSweepElements);
  EXPECT_EQ(s.k_devices, 6);
  EXPECT_EQ(s.gamma_db, (std::vector<double>{-20.0, -10.0}));
  EXPECT_EQ(s.n_list, (std::vector<int>{2, 4}));
  EXPECT_EQ(s.schemes, (std::vector<Scheme>{Scheme::kDc, Scheme::kNoIrs}));
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{3, 4, 5, 6}));
  EXPECT_FALSE(s.fl_non_iid);
}

TEST(ParseSpec, KeepsBaseValuesForMissingKeys) {
  ExperimentSpec base = ExperimentSpec::defaults(ExperimentKind::kSelect, false);
  base.m_antennas = 12;
  base.s_sizes = {2};
  EXPECT_EQ(parse("K = 3\n", base).m_antennas, 12);
}

TEST(ParseSpec, ErrorsNameLineAndKey) {
  const std::string unknown = parse_error("K = 3\nbogus = 1\n");
  EXPECT_NE(unknown.find("line 2"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("bogus"), std::string::npos) << unknown;
  const std::string bad = parse_error("M = eight\n");
  EXPECT_NE(bad.find("line 1"), std::string::npos) << bad;
  EXPECT_NE(bad.find("'M'"), std::string::npos) << bad;
  EXPECT_FALSE(parse_error("no equals sign\n").empty());
  EXPECT_FALSE(parse_error("schemes = dc, magic\n").empty());
  EXPECT_FALSE(parse_error("seeds = 5..2\n").empty());
}

TEST(Finalize, ConvertsUnitsAndRejectsBadSpecs) {
  ExperimentSpec s = tiny_select();
  EXPECT_NEAR(s.p0_w, 0.1, 1e-15);
  EXPECT_NEAR(s.sigma2_w, 1e-12, 1e-24);
  EXPECT_NEAR(s.gamma_linear[0], std::pow(10.0, -1.5), 1e-15);
  s.seeds.clear();
  EXPECT_THROW(s.finalize(), ConfigError);
  s = tiny_select();
  s.fl_mode = "other";
  EXPECT_THROW(s.finalize(), ConfigError);
  s = tiny_select();
  s.s_sizes = {5};
  EXPECT_THROW(s.finalize(), ConfigError);
}

TEST(Defaults, PerKind) {
  const auto sel = ExperimentSpec::defaults(ExperimentKind::kSelect, false);
  EXPECT_EQ(sel.k_devices, 10);
  EXPECT_EQ(sel.m_antennas, 8);
  EXPECT_EQ(sel.n_elements, 16);
  EXPECT_EQ(sel.seeds.size(), 20u);
  const auto full = ExperimentSpec::defaults(ExperimentKind::kSelect, true);
  EXPECT_EQ(full.k_devices, 20);
  EXPECT_EQ(full.n_elements, 64);
  const auto gam = ExperimentSpec::defaults(ExperimentKind::kSweepGamma, false);
  EXPECT_EQ(gam.gamma_db, (std::vector<double>{-30, -25, -20, -15, -10}));
  const auto fl = ExperimentSpec::defaults(ExperimentKind::kFl, false);
  EXPECT_EQ(fl.schemes, (std::vector<Scheme>{Scheme::kDc, Scheme::kNoIrs}));
}

TEST(RunExperiment, SelectRowsAreOrderedAndBounded) {
  ExperimentSpec s = tiny_select();
  s.schemes = {Scheme::kDc, Scheme::kNoIrs};
  const auto r = run_experiment(s, false);
  EXPECT_EQ(r.exit_status, 0);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[0].scheme, Scheme::kDc);
  EXPECT_EQ(r.rows[1].seed, 1u);
  EXPECT_EQ(r.rows[2].scheme, Scheme::kNoIrs);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.status, "ok");
    EXPECT_GE(row.k_star, 0);
    EXPECT_LE(row.k_star, 4);
    EXPECT_EQ(row.dc_certificate_failures, 0);
    EXPECT_LE(row.dc_converged, row.dc_runs);
  }
  EXPECT_TRUE(r.files.empty());
}

TEST(RunExperiment, SweepSummaryAveragesSeeds) {
  ExperimentSpec s = tiny_select();
  s.kind = ExperimentKind::kSweepGamma;
  s.gamma_db = {-20.0, -10.0};
  s.schemes = {Scheme::kNoIrs};
  s.finalize();
  const auto r = run_experiment(s, false);
  ASSERT_EQ(r.summary.size(), 2u);
  for (const auto& row : r.summary) {
    double sum = 0.0;
    for (const auto& sel : r.rows)
      if (sel.gamma_db == row.gamma_db) sum += sel.k_star;
    EXPECT_EQ(row.runs, 2);
    EXPECT_DOUBLE_EQ(row.mean_k_star, sum / 2.0);
  }
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  ExperimentSpec s = tiny_select();
  s.schemes = {Scheme::kDc, Scheme::kRandomPhase};
  const auto a = run_experiment(s, false);
  s.threads = 3;
  const auto b = run_experiment(s, false);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].k_star, b.rows[i].k_star);
    EXPECT_EQ(a.rows[i].achieved_mse, b.rows[i].achieved_mse);
    EXPECT_EQ(a.rows[i].total_dc_iters, b.rows[i].total_dc_iters);
  }
}

TEST(RunExperiment, FlOrderingRunIds) {
  ExperimentSpec s = ExperimentSpec::defaults(ExperimentKind::kFl, false);
  s.fl_mode = "ordering";
  s.k_devices = 4;
  s.fl_classes = 3;
  s.fl_dim = 4;
  s.fl_samples = 10;
  s.fl_rounds = 2;
  s.s_sizes = {2, 4};
  s.sigma0_list = {0.0, 0.1};
  s.seeds = {0};
  s.finalize();
  const auto r = run_experiment(s, false);
  ASSERT_EQ(r.fl_rows.size(), 4u);
  EXPECT_EQ(r.fl_rows[0].run_id, "seed0_s2_sigma0_0");
  EXPECT_EQ(r.fl_rows[0].scheme, "fixed_gaussian");
  for (const auto& row : r.fl_rows) EXPECT_EQ(row.metrics.training_loss.size(), 2u);
}

TEST(SelectionCsv, HeaderAndInfinity) {
  SelectionRow row;
  row.seed = 4;
  row.gamma_db = -20.0;
  row.m_antennas = 8;
  row.n_elements = 16;
  row.k_devices = 10;
  row.achieved_mse = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  write_selection_csv(os, {row});
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  EXPECT_EQ(header,
            "seed,scheme,gamma_db,M,N,K,k_star,achieved_mse_db,total_dc_iters,wall_time_ms,"
            "dc_runs,dc_converged,dc_certificate_failures,status");
  EXPECT_EQ(line.rfind("4,dc,-20,8,16,10,0,inf,", 0), 0u) << line;
  EXPECT_EQ(csv_number(0.1), "0.1");
  EXPECT_EQ(csv_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(SummaryCsv, Header) {
  std::ostringstream os;
  write_summary_csv(os, {});
  EXPECT_EQ(os.str(), "scheme,gamma_db,M,N,K,runs,mean_k_star\n");
}

TEST(ParallelFor, VisitsEachIndexOnce) {
  for (int threads : {1, 2, 5}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(37, threads, [&](int i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, 4, [](int) { FAIL(); });
}

}  // namespace
}  // namespace irsfl
