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

#ifndef HPLUS_FLSIM_HPP_
#define HPLUS_FLSIM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hplus/aggregators.hpp"
#include "hplus/attacks.hpp"
#include "hplus/core.hpp"
#include "hplus/data.hpp"
#include "hplus/filter.hpp"
#include "hplus/model.hpp"

namespace hplus {

// eta_t = eta0 / (decay * t + 1)
struct LRSchedule {
  double initial = 0.01;
  double decay = 0.006;

  double rate(std::size_t round) const { return initial / (decay * static_cast<double>(round) + 1.0); }
  void validate() const;
  bool operator==(const LRSchedule &) const = default;
};

struct DataSpec {
  enum class Kind { kSynthetic, kIdx };
  Kind kind = Kind::kSynthetic;
  std::size_t num_samples = 5000;
  std::size_t dim = 20;
  std::size_t num_classes = 10;
  double class_separation = 6.0;
  std::filesystem::path train_images, train_labels;
  std::filesystem::path test_images, test_labels;  // optional; split from train when empty
  double test_fraction = 0.2;

  bool operator==(const DataSpec &) const = default;
};

struct CleanDataSpec {
  enum class Kind { kNone, kServerShard, kTrustedClients };
  Kind kind = Kind::kNone;
  double fraction = 0.02;
  ClientSet trusted;

  bool operator==(const CleanDataSpec &) const = default;
};

// How a round's aggregate is produced.
struct MethodSpec {
  enum class Kind { kBaseline, kHPlusAggregator, kHPlusClean };
  Kind kind = Kind::kBaseline;
  AggregatorSpec aggregator;  // baseline rule, or H+ reference generator

  // "Median", "H+Median", "H+Clean data", ...
  std::string label() const;
  bool victim_is_mca() const { return kind != Kind::kHPlusClean && aggregator.kind == AggregatorKind::kMCA; }
  bool operator==(const MethodSpec &) const = default;
};

// Per-pass selection size. The default follows N = M - B with B the number of
// Byzantine clients in the run.
struct SelectionRule {
  enum class Kind {
    kFixed,           // value
    kHonestCount,     // factor * M - B
    kScaledHonest,    // factor * (M - B)
    kCeilRatio,       // M - ceil(requested_ratio * M)
  };
  Kind kind = Kind::kHonestCount;
  double factor = 1.0;
  std::size_t value = 1;

  std::size_t resolve(std::size_t num_clients, std::size_t num_byzantine, double requested_ratio) const;
  std::string to_string() const;
  static SelectionRule parse(const std::string &text);
  bool operator==(const SelectionRule &) const = default;
};

struct HPlusSettings {
  std::size_t passes = 3;
  std::size_t segment_length = 50;
  SelectionRule keep;
  double penalty_weight = 10.0;
  double norm_pivot = 0.1;

  bool operator==(const HPlusSettings &) const = default;
};

// Fully resolved description of one simulation run.
struct RunSpec {
  DataSpec data;
  ModelKind model = ModelKind::kSoftmaxRegression;
  std::size_t hidden = 32;
  std::size_t num_clients = 20;
  std::size_t batch_size = 32;
  std::size_t rounds = 100;
  double beta = 0.6;
  double byzantine_ratio = 0.0;
  AttackSpec attack;
  MethodSpec method;
  CleanDataSpec clean;
  HPlusSettings hplus;
  LRSchedule lr;
  std::uint64_t seed = 1;
  std::size_t eval_interval = 1;
  std::size_t min_partition_size = 0;  // 0: twice the batch size
  bool record_wall_time = true;

  void validate() const;
  bool operator==(const RunSpec &) const = default;
};

// Dataset, partitions and Byzantine membership for one run. Immutable once
// built and shared read-only by every round.
struct Federation {
  LabeledDataset data;
  std::vector<SampleIndex> test_indices;
  std::vector<ClientPartition> partitions;
  std::optional<std::vector<SampleIndex>> server_shard;
  ClientSet trusted;
  WeightCoefficients weights;
  ByzantineMask byzantine;
  ModelSpec model;
};

Federation prepare_federation(const RunSpec &spec);

struct PhaseTimes {
  double gradients_ms = 0.0;
  double attack_ms = 0.0;
  double reference_ms = 0.0;
  double filter_ms = 0.0;
  double update_ms = 0.0;
  double eval_ms = 0.0;
};

struct RoundRecord {
  std::size_t round = 0;
  ClientSet selected;  // clients whose uploads entered the aggregate
  std::vector<PassResult> passes;
  double realized_ratio = 0.0;
  double aggregate_norm = 0.0;
  bool empty_intersection = false;
  double train_loss = 0.0;
  std::optional<double> test_accuracy;  // of the post-update model
  PhaseTimes times;
  double wall_ms = 0.0;
};

struct TrainingState {
  std::size_t round = 0;
  GradientVector params;
  GradientVector previous_aggregate;  // CClip centre
};

TrainingState initial_state(const Federation &fed, const RunSpec &spec);

// Minibatch gradient of one client: uniform sample without replacement of
// min(batch_size, S_m) indices from the (seed, "batch", t, m) substream.
GradientVector client_round(const Federation &fed, const ClientPartition &client, VectorView params,
                            std::size_t batch_size, std::uint64_t seed, std::size_t round,
                            double *loss_out = nullptr);
std::vector<SampleIndex> sample_batch(std::span<const SampleIndex> pool, std::size_t batch_size, RngStream &rng);

// Advances `state` by one round. Throws DivergenceDetected when any upload or
// the updated parameters stop being finite.
RoundRecord training_round(TrainingState &state, const Federation &fed, const RunSpec &spec);

struct RunResult {
  std::vector<RoundRecord> records;
  double initial_accuracy = 0.0;
  double max_accuracy = 0.0;  // over evaluated rounds; initial accuracy when none
  std::optional<double> final_accuracy;
  bool diverged = false;
  std::string divergence_message;
  ByzantineMask byzantine;
  std::size_t num_clients = 0;
  std::size_t parameter_count = 0;
  GradientVector final_params;
};

RunResult run_experiment(const Federation &fed, const RunSpec &spec);
RunResult run_experiment(const RunSpec &spec);

}  // namespace hplus

#endif  // HPLUS_FLSIM_HPP_
