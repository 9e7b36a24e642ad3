/**
 * Copyright 2026 The hplus Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hplus/core.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "hplus/harness.hpp"
#include "test_util.hpp"

namespace hplus {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("hplus_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

constexpr const char *kTiny = R"({
  "dataset": {"kind": "synthetic", "samples": 600, "dim": 6, "classes": 4},
  "clients": 6,
  "rounds": 4,
  "min_partition_size": 8,
  "byzantine_ratio": [0.2, 0.4],
  "attacks": ["signflip", "lie"],
  "methods": ["H+Median"],
  "seeds": [3],
  "record_wall_time": false
})";


std::string config_error_detail(const std::string &text) {
  try {
    parse_config_text(text);
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError) << e.what();
    return e.detail();
  }
  ADD_FAILURE() << "no ConfigError for " << text;
  return "";
}

TEST(Config, MinimalConfigIsFullyDefaulted) {
  const auto c = parse_config_text(R"({"dataset": {"kind": "synthetic"}})");
  EXPECT_EQ(c.hplus.passes, 3u);
  EXPECT_EQ(c.hplus.segment_length, 50u);
  EXPECT_EQ(c.hplus.keep, SelectionRule{});
  EXPECT_EQ(c.num_clients, 20u);
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.rounds, 100u);
  EXPECT_EQ(expand_cells(c).size(), 1u);
}

TEST(Config, ErrorsCarryTheFieldPath) {
  EXPECT_EQ(config_error_detail(R"({"dataset": {"kind": "synthetic"}, "hplus": {"K": 0}})"), "hplus.K");
  EXPECT_EQ(config_error_detail(R"({"dataset": {"kind": "synthetic"}, "hplus": {"r": "fifty"}})"), "hplus.r");
  EXPECT_EQ(config_error_detail(R"({"dataset": {"kind": "synthetic"}, "colour": 1})"), "colour");
  EXPECT_EQ(config_error_detail(R"({"dataset": {"kind": "synthetic", "dimm": 3}})"), "dataset.dimm");
  EXPECT_EQ(config_error_detail(R"({"dataset": {"kind": "synthetic"}, "methods": ["H+Nonsense"]})"),
            "methods[0]");
  EXPECT_EQ(config_error_detail(R"({"dataset": {"kind": "synthetic"}, "byzantine_ratio": [0.2, 1.5]})"),
            "byzantine_ratio[1]");
  EXPECT_NE(config_error_detail("{not json").size(), 0u);
}

TEST(Config, SerializeRoundTrips) {
  const auto c = parse_config_text(R"J({
    "dataset": {"kind": "synthetic", "samples": 900, "class_separation": 3.5},
    "model": {"kind": "mlp1", "hidden": 12},
    "byzantine_ratio": [0, 0.2],
    "attacks": ["gaussian", {"kind": "foe", "q": -0.5}, {"kind": "lie", "coefficient": 1.1}],
    "methods": ["GM", "H+Krum", {"kind": "hplus", "aggregator": "MCA", "mca_bandwidth": 50},
                {"aggregator": "CClip", "cclip_radius": "inf"}, "H+Clean data"],
    "clean_data": {"kind": "server", "fraction": 0.05},
    "hplus": {"K": 4, "r": 20, "N": "0.9*(M-B)", "rho": 1, "tau": 2},
    "lr": {"eta0": 0.05, "decay": 0.01},
    "seeds": [4, 5],
    "eval_interval": 2
  })J");
  const auto again = parse_config_text(serialize_config(c));
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize_config(again), serialize_config(c));
}

TEST(Config, FingerprintIgnoresKeyOrderAndWhitespace) {
  const auto a = parse_config_text(R"({"dataset":{"kind":"synthetic","dim":7},"rounds":5,"seeds":[2]})");
  const auto b = parse_config_text("{\n  \"seeds\" : [ 2 ],\n\t\"rounds\": 5,\n  \"dataset\": {\"dim\": 7, \"kind\": \"synthetic\"}\n}");
  const auto ca = expand_cells(a), cb = expand_cells(b);
  ASSERT_EQ(ca.size(), cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) EXPECT_EQ(ca[i].fingerprint, cb[i].fingerprint);
  EXPECT_TRUE(std::regex_match(ca[0].fingerprint, std::regex("[0-9a-f]{16}")));

  const auto c = parse_config_text(R"({"dataset":{"kind":"synthetic","dim":7},"rounds":6,"seeds":[2]})");
  EXPECT_NE(expand_cells(c)[0].fingerprint, ca[0].fingerprint);
  // The output directory is not part of the experiment.
  const auto d = parse_config_text(
      R"({"dataset":{"kind":"synthetic","dim":7},"rounds":5,"seeds":[2],"output_dir":"elsewhere"})");
  EXPECT_EQ(expand_cells(d)[0].fingerprint, ca[0].fingerprint);
}

TEST(Config, CellExpansion) {
  const auto c = parse_config_text(kTiny);
  const auto cells = expand_cells(c);
  ASSERT_EQ(cells.size(), 4u);
  std::vector<std::string> fps;
  for (const auto &cell : cells) fps.push_back(cell.fingerprint);
  std::sort(fps.begin(), fps.end());
  EXPECT_EQ(std::unique(fps.begin(), fps.end()), fps.end());

  // Ratio 0 is the control: one cell per method whatever the attack list.
  const auto with_control = parse_config_text(R"({"dataset":{"kind":"synthetic"},"byzantine_ratio":[0, 0.2],
      "attacks":["signflip","lie","foe"],"methods":["GM","H+GM"],"seeds":[1,2]})");
  const auto cells2 = expand_cells(with_control);
  EXPECT_EQ(cells2.size(), (2u + 2u * 3u) * 2u);
  EXPECT_EQ(std::count_if(cells2.begin(), cells2.end(), [](const SweepCell &x) { return x.attack_label == "none"; }),
            4);
}

TEST(Config, FileLoading) {
  EXPECT_HPLUS_ERROR(parse_config("/nonexistent/config.json"), ErrorCode::kIoError);
}

TEST(Metrics, PrecisionAndRecall) {
  ByzantineMask b;
  b.members = {1, 3};
  EXPECT_DOUBLE_EQ(filter_precision({0, 1, 2}, b), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(filter_recall({0, 1, 2}, b, 6), 2.0 / 4.0);
  EXPECT_EQ(filter_precision({}, b), 1.0);
  EXPECT_EQ(filter_recall({}, b, 6), 0.0);
  EXPECT_EQ(filter_precision({0, 2, 4, 5}, b), 1.0);
  EXPECT_EQ(filter_recall({0, 2, 4, 5}, b, 6), 1.0);
}

class Reports : public TempDir {};

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

constexpr const char *kHeader =
    "round,train_loss,test_acc,n_selected,empty_intersection,filter_precision,filter_recall,wall_ms";

TEST_F(Reports, EmptyCsvIsHeaderOnly) {
  write_round_csv({}, ByzantineMask{}, 5, dir_ / "r.csv");
  EXPECT_EQ(slurp(dir_ / "r.csv"), std::string(kHeader) + "\n");
}

TEST_F(Reports, OneRecordCsv) {
  RoundRecord r;
  r.round = 7;
  r.selected = {0, 2, 3};
  r.train_loss = 0.5;
  r.test_accuracy = 0.25;
  r.wall_ms = 1.5;
  ByzantineMask b;
  b.members = {3};
  write_round_csv(std::vector<RoundRecord>{r}, b, 5, dir_ / "r.csv");
  const auto text = slurp(dir_ / "r.csv");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto l = lines(text);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], kHeader);
  EXPECT_EQ(l[1], "7,0.5,0.25,3,0,0.66666666666666663,0.5,1.5");
}

TEST_F(Reports, CsvToUnwritablePathIsAnIoError) {
  // Missing directories are created; a regular file in the way is not.
  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_HPLUS_ERROR(write_round_csv({}, ByzantineMask{}, 1, dir_ / "blocker" / "r.csv"),
                     ErrorCode::kIoError);
}

TEST_F(Reports, SummaryJsonRoundTrips) {
  SummaryRow a;
  a.fingerprint = "0123456789abcdef";
  a.attack = "signflip";
  a.method = "H+GM";
  a.byzantine_ratio = 0.4;
  a.realized_ratio = 0.41234567890123;
  a.num_byzantine = 8;
  a.beta = 0.6;
  a.seed = 3;
  a.rounds_completed = 100;
  a.initial_accuracy = 0.1;
  a.max_accuracy = 0.8123456789;
  a.final_accuracy = 0.8;
  a.empty_intersections = 2;
  a.filter_precision = 0.99;
  a.filter_recall = 0.75;
  SummaryRow b = a;
  b.status = "diverged";
  b.message = "DivergenceDetected: \"quoted\"";
  b.final_accuracy.reset();
  const std::vector<SummaryRow> rows{a, b};
  write_summary_json(rows, dir_ / "summary.json");
  EXPECT_EQ(read_summary_json(dir_ / "summary.json"), rows);
  EXPECT_EQ(summary_row_from_json(summary_row_to_json(b)), b);
  const auto text = slurp(dir_ / "summary.json");
  EXPECT_NE(text.find("\"max_accuracy\""), std::string::npos);
  EXPECT_NE(text.find("\"filter_precision\""), std::string::npos);
}

std::size_t count(const std::string &text, const std::string &needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

TEST_F(Reports, PlotStructure) {
  const std::vector<PlotSeries> one{{"H+GM", {{0, 0.5}, {1, 0.7}, {2, 0.8}}}};
  emit_accuracy_plot(one, dir_ / "one.svg", "round");
  const auto svg = slurp(dir_ / "one.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("points=\"([^\"]*)\"")));
  std::stringstream pts(m[1].str());
  std::string pair;
  std::size_t pairs = 0;
  while (pts >> pair) ++pairs;
  EXPECT_EQ(pairs, 3u);
  EXPECT_NE(svg.find(">round<"), std::string::npos);
  EXPECT_NE(svg.find("test accuracy"), std::string::npos);
  EXPECT_NE(svg.find("0 0.84"), std::string::npos);  // y range [0, 0.8 * 1.05]
  EXPECT_EQ(svg.find("http://www.w3.org/1999/xlink"), std::string::npos);

  const std::vector<PlotSeries> two{{"GM", {{0, 0.1}, {0.2, 0.2}}}, {"H+GM & co", {{0, 0.3}, {0.2, 0.4}}}};
  emit_accuracy_plot(two, dir_ / "two.svg", "Byzantine ratio");
  const auto svg2 = slurp(dir_ / "two.svg");
  EXPECT_EQ(count(svg2, "<polyline"), 2u);
  EXPECT_EQ(count(svg2, "class=\"legend\""), 2u);
  EXPECT_NE(svg2.find("H+GM &amp; co"), std::string::npos);
}

TEST_F(Reports, EmptyPlotIsAnError) {
  EXPECT_HPLUS_ERROR(emit_accuracy_plot(std::vector<PlotSeries>{}, dir_ / "x.svg", "round"), ErrorCode::kEmptyPlot);
  const std::vector<PlotSeries> hollow{{"GM", {}}};
  EXPECT_HPLUS_ERROR(emit_accuracy_plot(hollow, dir_ / "x.svg", "round"), ErrorCode::kEmptyPlot);
}

TEST(Series, RatioSeriesAveragesSeeds) {
  std::vector<SummaryRow> rows(4);
  rows[0].method = rows[1].method = "GM";
  rows[2].method = rows[3].method = "H+GM";
  rows[0].max_accuracy = 0.2, rows[1].max_accuracy = 0.4;
  rows[2].max_accuracy = 0.8, rows[3].max_accuracy = 0.9;
  rows[0].byzantine_ratio = rows[1].byzantine_ratio = rows[2].byzantine_ratio = 0.4;
  rows[3].byzantine_ratio = 0.2;
  const auto s = ratio_series(rows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].label, "GM");
  ASSERT_EQ(s[0].points.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].points[0].second, 0.3);
  EXPECT_EQ(s[1].points.size(), 2u);
  EXPECT_LT(s[1].points[0].first, s[1].points[1].first);
}

class Sweep : public TempDir {
 protected:
  std::vector<double> csv_accuracies(const fs::path &csv) {
    std::vector<double> acc;
    const auto l = lines(slurp(csv));
    for (std::size_t i = 1; i < l.size(); ++i) {
      std::stringstream ss(l[i]);
      std::string field;
      for (int k = 0; k < 3; ++k) std::getline(ss, field, ',');
      if (!field.empty()) acc.push_back(std::stod(field));
    }
    return acc;
  }
};

TEST_F(Sweep, RowsFilesAndMaxAccuracy) {
  const auto c = parse_config_text(kTiny);
  SweepOptions opts;
  opts.output_dir = dir_;
  std::size_t callbacks = 0;
  opts.on_row = [&](const SummaryRow &) { ++callbacks; };
  const auto r = run_sweep(c, opts);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(callbacks, 4u);
  EXPECT_EQ(r.computed, 4u);
  EXPECT_FALSE(r.any_failed());
  EXPECT_TRUE(fs::exists(dir_ / "summary.json"));
  EXPECT_TRUE(fs::exists(dir_ / "config.json"));
  EXPECT_EQ(lines(slurp(dir_ / "rows.jsonl")).size(), 4u);
  EXPECT_EQ(parse_config(dir_ / "config.json"), c);
  for (const auto &row : r.rows) {
    EXPECT_EQ(row.status, "ok");
    EXPECT_EQ(row.method, "H+Median");
    EXPECT_GE(row.filter_precision, 0.0);
    EXPECT_LE(row.filter_precision, 1.0);
    EXPECT_GE(row.filter_recall, 0.0);
    EXPECT_LE(row.filter_recall, 1.0);
    const auto acc = csv_accuracies(dir_ / "rounds" / (row.fingerprint + ".csv"));
    ASSERT_EQ(acc.size(), 4u);
    EXPECT_EQ(row.max_accuracy, *std::max_element(acc.begin(), acc.end()));
  }
  EXPECT_EQ(read_summary_json(dir_ / "summary.json"), r.rows);
}

TEST_F(Sweep, ResumeRecomputesOnlyMissingCells) {
  const auto c = parse_config_text(kTiny);
  SweepOptions opts;
  opts.output_dir = dir_;
  const auto first = run_sweep(c, opts);
  fs::remove(dir_ / "rounds" / (first.rows[2].fingerprint + ".csv"));
  opts.resume = true;
  const auto second = run_sweep(c, opts);
  EXPECT_EQ(second.computed, 1u);
  EXPECT_EQ(second.reused, 3u);
  EXPECT_EQ(second.rows, first.rows);
}

TEST_F(Sweep, ParallelMatchesSequential) {
  const auto c = parse_config_text(kTiny);
  SweepOptions seq;
  seq.output_dir = dir_ / "seq";
  SweepOptions par = seq;
  par.output_dir = dir_ / "par";
  par.parallelism = 8;
  const auto a = run_sweep(c, seq);
  const auto b = run_sweep(c, par);
  EXPECT_EQ(a.rows, b.rows);
  for (const auto &row : a.rows)
    EXPECT_EQ(slurp(dir_ / "seq" / "rounds" / (row.fingerprint + ".csv")),
              slurp(dir_ / "par" / "rounds" / (row.fingerprint + ".csv")));
}

TEST_F(Sweep, FailedCellIsRecordedAndSweepContinues) {
  // Too few samples per client for the partition minimum in one cell only.
  auto c = parse_config_text(kTiny);
  c.byzantine_ratios = {0.2};
  c.attacks.resize(1);
  c.min_partition_size = 90;
  c.seeds = {3};
  SweepOptions opts;
  opts.output_dir = dir_;
  auto ok = c;
  ok.min_partition_size = 8;
  const auto good = run_sweep(ok, opts);
  EXPECT_FALSE(good.any_failed());
  const auto bad = run_sweep(c, opts);
  ASSERT_EQ(bad.rows.size(), 1u);
  EXPECT_EQ(bad.rows[0].status, "failed");
  EXPECT_NE(bad.rows[0].message.find("InfeasiblePartition"), std::string::npos);
  EXPECT_TRUE(bad.any_failed());
}

TEST_F(Sweep, EnvironmentOverridesConfiguredOutput) {
  ::setenv("BYZ_BENCH_OUT", (dir_ / "env").c_str(), 1);
  EXPECT_EQ(resolve_output_dir("configured"), dir_ / "env");
  ::unsetenv("BYZ_BENCH_OUT");
  EXPECT_EQ(resolve_output_dir("configured"), fs::path("configured"));
}

}  // namespace
}  // namespace hplus
