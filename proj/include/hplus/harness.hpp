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

#ifndef HPLUS_HARNESS_HPP_
#define HPLUS_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hplus/flsim.hpp"

namespace hplus {

// Declarative description of a sweep. Every list is a sweep axis; the cells
// are the Cartesian product attacks x methods x ratios x betas x seeds.
// Ratio-0 cells are the no-attack control and are emitted once per method
// with attack label "none".
struct ExperimentConfig {
  DataSpec data;
  ModelKind model = ModelKind::kSoftmaxRegression;
  std::size_t hidden = 32;
  std::size_t num_clients = 20;
  std::size_t batch_size = 32;
  std::size_t rounds = 100;
  std::vector<double> betas{0.6};
  std::vector<double> byzantine_ratios{0.2};
  std::vector<AttackSpec> attacks{AttackSpec{}};
  std::vector<MethodSpec> methods{MethodSpec{}};
  CleanDataSpec clean;
  HPlusSettings hplus;
  LRSchedule lr;
  std::vector<std::uint64_t> seeds{1};
  std::size_t eval_interval = 1;
  std::size_t min_partition_size = 0;
  bool record_wall_time = true;
  std::filesystem::path output_dir = "byzbench_out";

  void validate() const;  // ConfigError with the field path
  bool operator==(const ExperimentConfig &) const = default;
};

ExperimentConfig parse_config(const std::filesystem::path &path);
ExperimentConfig parse_config_text(const std::string &json_text);
std::string serialize_config(const ExperimentConfig &config);  // pretty JSON

struct SweepCell {
  std::string attack_label;  // "none" for the control
  RunSpec spec;
  std::string fingerprint;   // 16 hex digits
};

std::vector<SweepCell> expand_cells(const ExperimentConfig &config);

// Content hash of the cell's canonical JSON; invariant under key order and
// whitespace of the source config.
std::string fingerprint(const RunSpec &spec);
std::string canonical_json(const RunSpec &spec);

struct SummaryRow {
  std::string fingerprint;
  std::string status = "ok";  // ok | diverged | failed
  std::string message;
  std::string attack;
  std::string method;
  double byzantine_ratio = 0.0;  // requested
  double realized_ratio = 0.0;
  std::size_t num_byzantine = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t rounds_completed = 0;
  double initial_accuracy = 0.0;
  double max_accuracy = 0.0;
  std::optional<double> final_accuracy;
  std::size_t empty_intersections = 0;
  double filter_precision = 0.0;
  double filter_recall = 0.0;
  double wall_ms = 0.0;

  bool operator==(const SummaryRow &) const = default;
};

// Per-round precision |I \ B| / |I| (1 for an empty I) and recall
// |I \ B| / (M - B), from the ground-truth Byzantine set.
double filter_precision(const ClientSet &selected, const ByzantineMask &byzantine);
double filter_recall(const ClientSet &selected, const ByzantineMask &byzantine, std::size_t num_clients);

SummaryRow summarize(const SweepCell &cell, const RunResult &result);

void write_round_csv(std::span<const RoundRecord> records, const ByzantineMask &byzantine, std::size_t num_clients,
                     const std::filesystem::path &path);
void write_summary_json(std::span<const SummaryRow> rows, const std::filesystem::path &path);
std::vector<SummaryRow> read_summary_json(const std::filesystem::path &path);
std::string summary_row_to_json(const SummaryRow &row);
SummaryRow summary_row_from_json(const std::string &text);

struct SweepOptions {
  std::size_t parallelism = 1;
  bool resume = false;
  std::optional<std::filesystem::path> output_dir;  // overrides the config
  std::function<void(const SummaryRow &)> on_row;    // called under the writer lock
};

struct SweepResult {
  std::vector<SummaryRow> rows;  // in cell order
  std::size_t computed = 0;
  std::size_t reused = 0;
  std::filesystem::path output_dir;

  bool any_failed() const;
};

// Output layout: <dir>/rows.jsonl (appended as cells finish),
// <dir>/rounds/<fingerprint>.csv and <dir>/summary.json.
SweepResult run_sweep(const ExperimentConfig &config, const SweepOptions &options = {});

// BYZ_BENCH_OUT when set, else `configured`.
std::filesystem::path resolve_output_dir(const std::filesystem::path &configured);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Max accuracy against requested ratio, one series per method label, seeds
// averaged.
std::vector<PlotSeries> ratio_series(std::span<const SummaryRow> rows);
// test_acc against round from a round CSV.
PlotSeries round_series(const std::filesystem::path &csv, const std::string &label);

void emit_accuracy_plot(std::span<const PlotSeries> series, const std::filesystem::path &path,
                        const std::string &x_label, const std::string &y_label = "test accuracy");

}  // namespace hplus

#endif  // HPLUS_HARNESS_HPP_
