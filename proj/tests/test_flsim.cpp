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
#include <cmath>
#include <cstring>

#include "hplus/flsim.hpp"
#include "test_util.hpp"

namespace hplus {
namespace {

RunSpec small_spec() {
  RunSpec s;
  s.data.num_samples = 1200;
  s.data.class_separation = 6.0;
  s.num_clients = 10;
  s.rounds = 10;
  s.min_partition_size = 16;
  s.lr.initial = 0.1;
  s.record_wall_time = false;
  return s;
}

bool bitwise_equal(const GradientVector &a, const GradientVector &b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(Schedule, DecaysFromInitialRate) {
  LRSchedule lr{0.01, 0.006};
  EXPECT_EQ(lr.rate(0), 0.01);
  EXPECT_DOUBLE_EQ(lr.rate(100), 0.01 / 1.6);
  for (std::size_t t = 1; t < 500; ++t) {
    EXPECT_GT(lr.rate(t), 0.0);
    EXPECT_LE(lr.rate(t), lr.rate(t - 1));
  }
  EXPECT_THROW((LRSchedule{0.0, 0.006}.validate()), Error);
  EXPECT_THROW((LRSchedule{0.1, -1.0}.validate()), Error);
}

TEST(SelectionRule, ResolvesEveryForm) {
  EXPECT_EQ(SelectionRule{}.resolve(20, 8, 0.4), 12u);
  EXPECT_EQ(SelectionRule::parse("M-B").resolve(20, 8, 0.4), 12u);
  EXPECT_EQ(SelectionRule::parse("M-ceil(CM)").resolve(20, 9, 0.4), 12u);
  EXPECT_EQ(SelectionRule::parse("1.1*M-B").resolve(20, 8, 0.4), 14u);
  EXPECT_EQ(SelectionRule::parse("1.1*(M-B)").resolve(20, 8, 0.4), 13u);
  EXPECT_EQ(SelectionRule::parse("0.9*M-B").resolve(20, 8, 0.4), 10u);
  EXPECT_EQ(SelectionRule::parse("7").resolve(20, 8, 0.4), 7u);
  // Clamped into [1, M].
  EXPECT_EQ(SelectionRule::parse("2*M-B").resolve(10, 0, 0.0), 10u);
  EXPECT_EQ(SelectionRule::parse("M-B").resolve(4, 4, 0.9), 1u);
  for (const char *text : {"M-B", "M-ceil(CM)", "1.1*M-B", "0.9*(M-B)", "5"})
    EXPECT_EQ(SelectionRule::parse(SelectionRule::parse(text).to_string()), SelectionRule::parse(text)) << text;
  EXPECT_THROW(SelectionRule::parse("M+B"), Error);
}

TEST(Method, Labels) {
  MethodSpec m;
  m.aggregator.kind = AggregatorKind::kMedian;
  EXPECT_EQ(m.label(), "Median");
  m.kind = MethodSpec::Kind::kHPlusAggregator;
  EXPECT_EQ(m.label(), "H+Median");
  m.kind = MethodSpec::Kind::kHPlusClean;
  EXPECT_EQ(m.label(), "H+Clean data");
}

TEST(Federation, PartitionsCoverTrainingData) {
  auto spec = small_spec();
  spec.clean.kind = CleanDataSpec::Kind::kServerShard;
  spec.clean.fraction = 0.05;
  spec.method.kind = MethodSpec::Kind::kHPlusClean;
  spec.byzantine_ratio = 0.3;
  const auto fed = prepare_federation(spec);
  std::size_t total = fed.server_shard->size() + fed.test_indices.size();
  for (const auto &p : fed.partitions) total += p.size();
  EXPECT_EQ(total, spec.data.num_samples);
  EXPECT_NEAR(fed.weights.server_weight() + fed.weights.sum_over([&] {
    ClientSet all(spec.num_clients);
    for (std::size_t m = 0; m < all.size(); ++m) all[m] = m;
    return all;
  }()), 1.0, 1e-12);
  EXPECT_GE(fed.byzantine.ratio, 0.3);
}

TEST(Federation, TrustedClientsAreNeverByzantine) {
  auto spec = small_spec();
  spec.clean.kind = CleanDataSpec::Kind::kTrustedClients;
  spec.clean.trusted = {0, 1};
  spec.method.kind = MethodSpec::Kind::kHPlusClean;
  spec.byzantine_ratio = 0.6;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    spec.seed = seed;
    const auto fed = prepare_federation(spec);
    EXPECT_FALSE(fed.byzantine.contains(0));
    EXPECT_FALSE(fed.byzantine.contains(1));
  }
}

TEST(ClientRound, FullShardWhenBatchIsLarge) {
  const auto spec = small_spec();
  const auto fed = prepare_federation(spec);
  const auto state = initial_state(fed, spec);
  const auto &client = fed.partitions[0];
  const auto g = client_round(fed, client, state.params, client.size() + 5, spec.seed, 0);
  const auto full = loss_and_gradient(fed.model, state.params, fed.data, client.indices);
  ASSERT_EQ(g.size(), full.gradient.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], full.gradient[i], 1e-13);
}

TEST(ClientRound, SingleSampleMatchesDirectGradient) {
  const auto spec = small_spec();
  const auto fed = prepare_federation(spec);
  auto state = initial_state(fed, spec);
  state.params.assign(state.params.size(), 0.01);
  ClientPartition one{0, {fed.partitions[0].indices[3]}};
  const auto g = client_round(fed, one, state.params, 32, spec.seed, 0);
  EXPECT_TRUE(bitwise_equal(g, loss_and_gradient(fed.model, state.params, fed.data, one.indices).gradient));
}

TEST(ClientRound, BatchesAreReproducibleAndDistinct) {
  std::vector<SampleIndex> pool(100);
  for (std::size_t i = 0; i < 100; ++i) pool[i] = 1000 + i;
  auto a = derive_substream(1, "batch", 3, 2);
  auto b = derive_substream(1, "batch", 3, 2);
  const auto x = sample_batch(pool, 32, a);
  EXPECT_EQ(x, sample_batch(pool, 32, b));
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  for (auto i : x) EXPECT_TRUE(i >= 1000 && i < 1100);
}

TEST(TrainingRound, CleanMeanRoundIsAFedSgdStep) {
  auto spec = small_spec();
  spec.method.aggregator.kind = AggregatorKind::kMean;
  const auto fed = prepare_federation(spec);
  auto state = initial_state(fed, spec);
  const auto w0 = state.params;
  std::vector<GradientVector> grads;
  for (const auto &c : fed.partitions) grads.push_back(client_round(fed, c, w0, spec.batch_size, spec.seed, 0));
  const auto mean = aggregate_mean(fed.weights, grads);
  const auto record = training_round(state, fed, spec);
  EXPECT_EQ(record.round, 0u);
  EXPECT_EQ(state.round, 1u);
  for (std::size_t i = 0; i < w0.size(); ++i) EXPECT_NEAR(state.params[i], w0[i] - spec.lr.rate(0) * mean[i], 1e-15);
  EXPECT_EQ(record.selected.size(), spec.num_clients);
  ASSERT_TRUE(record.test_accuracy.has_value());
  EXPECT_GE(*record.test_accuracy, 0.0);
  EXPECT_LE(*record.test_accuracy, 1.0);
}

TEST(TrainingRound, SignFlipRaisesLossAgainstControl) {
  auto spec = small_spec();
  spec.model = ModelKind::kMLP1;
  spec.hidden = 16;
  spec.method.aggregator.kind = AggregatorKind::kMean;
  auto attacked = spec;
  attacked.byzantine_ratio = 0.4;
  attacked.attack.kind = AttackKind::kSignFlip;

  const auto fed_a = prepare_federation(spec);
  const auto fed_b = prepare_federation(attacked);
  auto sa = initial_state(fed_a, spec);
  auto sb = initial_state(fed_b, attacked);
  ASSERT_TRUE(bitwise_equal(sa.params, sb.params));
  training_round(sa, fed_a, spec);
  training_round(sb, fed_b, attacked);
  std::vector<SampleIndex> all(fed_a.data.num_samples);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  EXPECT_GT(loss_only(fed_b.model, sb.params, fed_b.data, all), loss_only(fed_a.model, sa.params, fed_a.data, all));
}

TEST(Experiment, ZeroRoundsReportsInitialAccuracy) {
  auto spec = small_spec();
  spec.rounds = 0;
  const auto r = run_experiment(spec);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.max_accuracy, r.initial_accuracy);
  EXPECT_FALSE(r.final_accuracy.has_value());
}

TEST(Experiment, SeparableControlLearns) {
  RunSpec spec;
  spec.record_wall_time = false;
  spec.lr.initial = 0.1;
  spec.method.aggregator.kind = AggregatorKind::kMean;
  const auto r = run_experiment(spec);
  EXPECT_EQ(r.records.size(), 100u);
  EXPECT_GT(r.max_accuracy, 0.95);
}

void expect_identical_runs(const RunResult &a, const RunResult &b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  EXPECT_TRUE(bitwise_equal(a.final_params, b.final_params));
  EXPECT_EQ(std::memcmp(&a.max_accuracy, &b.max_accuracy, sizeof(double)), 0);
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    EXPECT_EQ(a.records[t].selected, b.records[t].selected);
    EXPECT_EQ(std::memcmp(&a.records[t].train_loss, &b.records[t].train_loss, sizeof(double)), 0);
    EXPECT_EQ(a.records[t].test_accuracy, b.records[t].test_accuracy);
  }
}

TEST(Experiment, RerunsAreBitwiseIdentical) {
  auto spec = small_spec();
  spec.model = ModelKind::kMLP1;
  spec.hidden = 8;
  spec.byzantine_ratio = 0.3;
  spec.attack.kind = AttackKind::kGaussian;
  spec.method.kind = MethodSpec::Kind::kHPlusAggregator;
  spec.method.aggregator.kind = AggregatorKind::kGM;
  expect_identical_runs(run_experiment(spec), run_experiment(spec));
}

TEST(Experiment, FullKeepWithoutPenaltyMatchesPlainMean) {
  auto spec = small_spec();
  spec.method.aggregator.kind = AggregatorKind::kMean;
  auto filtered = spec;
  filtered.method.kind = MethodSpec::Kind::kHPlusAggregator;
  filtered.hplus.penalty_weight = 0.0;
  filtered.hplus.keep = SelectionRule{SelectionRule::Kind::kFixed, 1.0, spec.num_clients};
  const auto a = run_experiment(spec);
  const auto b = run_experiment(filtered);
  EXPECT_TRUE(bitwise_equal(a.final_params, b.final_params));
  for (const auto &r : b.records) EXPECT_EQ(r.selected.size(), spec.num_clients);
}

TEST(Experiment, FilteredRunsStayFiniteUnderEveryAttack) {
  for (auto attack : {AttackKind::kGaussian, AttackKind::kSignFlip, AttackKind::kLIE, AttackKind::kFoE,
                      AttackKind::kOurs}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto spec = small_spec();
      spec.rounds = 20;
      spec.seed = seed;
      spec.byzantine_ratio = 0.4;
      spec.attack.kind = attack;
      spec.method.kind = MethodSpec::Kind::kHPlusAggregator;
      spec.method.aggregator.kind = AggregatorKind::kMedian;
      const auto r = run_experiment(spec);
      EXPECT_FALSE(r.diverged) << attack_name(attack) << " seed " << seed << ": " << r.divergence_message;
      EXPECT_EQ(r.records.size(), 20u);
    }
  }
}

TEST(Experiment, OverflowingRunIsReportedNotHidden) {
  // LIE with c = 1e300 puts parameters near 1e299; the next forward pass
  // overflows the logits and the run turns non-finite.
  auto spec = small_spec();
  spec.rounds = 30;
  spec.byzantine_ratio = 0.4;
  spec.model = ModelKind::kMLP1;
  spec.attack.kind = AttackKind::kLIE;
  spec.attack.lie_coefficient = 1e300;
  spec.method.aggregator.kind = AggregatorKind::kMean;
  const auto r = run_experiment(spec);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.records.size(), 30u);
  EXPECT_FALSE(r.divergence_message.empty());
}

TEST(Experiment, ControlLossTrendsDownward) {
  RunSpec spec;
  spec.record_wall_time = false;
  spec.lr.initial = 0.1;
  spec.model = ModelKind::kMLP1;
  spec.data.class_separation = 4.0;
  spec.method.aggregator.kind = AggregatorKind::kMean;
  const auto r = run_experiment(spec);
  auto window_median = [&](std::size_t start) {
    std::vector<double> w;
    for (std::size_t t = start; t < start + 10; ++t) w.push_back(r.records[t].train_loss);
    std::nth_element(w.begin(), w.begin() + 5, w.end());
    return w[5];
  };
  for (std::size_t start = 10; start + 10 <= r.records.size(); start += 10)
    EXPECT_LT(window_median(start), window_median(start - 10)) << "window starting at " << start;
}

TEST(Experiment, EvalIntervalSkipsRounds) {
  auto spec = small_spec();
  spec.eval_interval = 3;
  const auto r = run_experiment(spec);
  std::size_t evaluated = 0;
  for (const auto &rec : r.records) evaluated += rec.test_accuracy.has_value();
  EXPECT_LT(evaluated, r.records.size());
  EXPECT_TRUE(r.records.back().test_accuracy.has_value());
}

TEST(RunSpec, Validation) {
  auto spec = small_spec();
  spec.byzantine_ratio = 1.0;
  EXPECT_THROW(spec.validate(), Error);
  spec = small_spec();
  spec.beta = 0.0;
  EXPECT_THROW(spec.validate(), Error);
  spec = small_spec();
  spec.method.kind = MethodSpec::Kind::kHPlusClean;
  EXPECT_THROW(spec.validate(), Error);
}

}  // namespace
}  // namespace hplus
