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

#include "hplus/flsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hplus {

void LRSchedule::validate() const {
  if (!(initial > 0.0) || !std::isfinite(initial)) throw Error(ErrorCode::kInvalidArgument, "eta0 must be > 0");
  if (!(decay >= 0.0) || !std::isfinite(decay)) throw Error(ErrorCode::kInvalidArgument, "decay must be >= 0");
}

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::kBaseline: return std::string(aggregator_name(aggregator.kind));
    case Kind::kHPlusAggregator: return "H+" + std::string(aggregator_name(aggregator.kind));
    case Kind::kHPlusClean: return "H+Clean data";
  }
  return "?";
}

std::size_t SelectionRule::resolve(std::size_t num_clients, std::size_t num_byzantine,
                                   double requested_ratio) const {
  const double m = static_cast<double>(num_clients);
  const double b = static_cast<double>(num_byzantine);
  double n = 0.0;
  switch (kind) {
    case Kind::kFixed: n = static_cast<double>(value); break;
    case Kind::kHonestCount: n = std::round(factor * m - b); break;
    case Kind::kScaledHonest: n = std::round(factor * (m - b)); break;
    case Kind::kCeilRatio: n = m - std::ceil(requested_ratio * m - 1e-9); break;
  }
  return static_cast<std::size_t>(std::clamp(n, 1.0, m));
}

std::string SelectionRule::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Kind::kFixed: out << value; break;
    case Kind::kHonestCount:
      if (factor == 1.0)
        out << "M-B";
      else
        out << factor << "*M-B";
      break;
    case Kind::kScaledHonest: out << factor << "*(M-B)"; break;
    case Kind::kCeilRatio: out << "M-ceil(CM)"; break;
  }
  return out.str();
}

SelectionRule SelectionRule::parse(const std::string &text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;

  SelectionRule rule;
  if (s == "M-B") return rule;
  if (s == "M-ceil(CM)") {
    rule.kind = Kind::kCeilRatio;
    return rule;
  }
  if (!s.empty() && s.size() < 10 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    rule.kind = Kind::kFixed;
    rule.value = std::stoul(s);
    return rule;
  }
  const auto star = s.find('*');
  if (star != std::string::npos) {
    const std::string head = s.substr(0, star);
    const std::string tail = s.substr(star + 1);
    std::size_t used = 0;
    double factor = 0.0;
    try {
      factor = std::stod(head, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == head.size() && used > 0 && factor > 0.0) {
      rule.factor = factor;
      if (tail == "M-B") return rule;
      if (tail == "(M-B)") {
        rule.kind = Kind::kScaledHonest;
        return rule;
      }
    }
  }
  throw Error(ErrorCode::kConfigError, "unrecognised selection rule '" + text + "'");
}

void RunSpec::validate() const {
  if (num_clients < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one client");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be > 0");
  if (!(byzantine_ratio >= 0.0) || byzantine_ratio >= 1.0)
    throw Error(ErrorCode::kInvalidRatio, "Byzantine ratio must lie in [0, 1)");
  if (eval_interval < 1) throw Error(ErrorCode::kInvalidArgument, "eval interval must be >= 1");
  if (hplus.passes < 1 || hplus.segment_length < 1)
    throw Error(ErrorCode::kInvalidArgument, "H+ needs K >= 1 and r >= 1");
  if (!(hplus.penalty_weight >= 0.0) || !(hplus.norm_pivot > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "H+ needs rho >= 0 and tau > 0");
  lr.validate();
  attack.validate();
  method.aggregator.validate();
  const bool needs_server = method.kind == MethodSpec::Kind::kHPlusClean || method.aggregator.kind == AggregatorKind::kFLTrust;
  if (needs_server && clean.kind == CleanDataSpec::Kind::kNone)
    throw Error(ErrorCode::kMissingReference, method.label() + " requires clean data");
  if (method.kind != MethodSpec::Kind::kHPlusClean && method.aggregator.kind == AggregatorKind::kFLTrust &&
      clean.kind != CleanDataSpec::Kind::kServerShard)
    throw Error(ErrorCode::kMissingReference, "FLTrust requires a server clean shard");
  for (auto m : clean.trusted)
    if (m >= num_clients) throw Error(ErrorCode::kInvalidArgument, "trusted client id out of range");
}

// ---------------------------------------------------------------------------

namespace {

LabeledDataset concatenate(LabeledDataset a, const LabeledDataset &b) {
  if (a.dim != b.dim) throw Error(ErrorCode::kFormatError, "train and test images differ in size");
  a.inputs.insert(a.inputs.end(), b.inputs.begin(), b.inputs.end());
  a.labels.insert(a.labels.end(), b.labels.begin(), b.labels.end());
  a.num_samples += b.num_samples;
  a.num_classes = std::max(a.num_classes, b.num_classes);
  return a;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

class PhaseClock {
 public:
  explicit PhaseClock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  // Milliseconds since the previous lap (0 when timing is disabled).
  double lap() {
    if (!enabled_) return 0.0;
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

void require_finite(VectorView v, const char *what, std::size_t round) {
  if (!all_finite(v))
    throw Error(ErrorCode::kDivergenceDetected, std::string(what) + " is not finite in round " + std::to_string(round));
}

}  // namespace

Federation prepare_federation(const RunSpec &spec) {
  spec.validate();
  Federation fed;

  std::vector<SampleIndex> pool;
  if (spec.data.kind == DataSpec::Kind::kSynthetic) {
    auto rng = derive_substream(spec.seed, "dataset", 0, 0);
    fed.data = synth_classification(spec.data.num_samples, spec.data.dim, spec.data.num_classes,
                                    spec.data.class_separation, rng);
  } else {
    fed.data = load_idx(spec.data.train_images, spec.data.train_labels);
  }

  const std::size_t train_count = fed.data.num_samples;
  if (spec.data.kind == DataSpec::Kind::kIdx && !spec.data.test_images.empty()) {
    fed.data = concatenate(std::move(fed.data), load_idx(spec.data.test_images, spec.data.test_labels));
    pool.resize(train_count);
    std::iota(pool.begin(), pool.end(), SampleIndex{0});
    fed.test_indices.resize(fed.data.num_samples - train_count);
    std::iota(fed.test_indices.begin(), fed.test_indices.end(), train_count);
  } else {
    std::vector<SampleIndex> all(fed.data.num_samples);
    std::iota(all.begin(), all.end(), SampleIndex{0});
    auto rng = derive_substream(spec.seed, "test-split", 0, 0);
    auto split = stratified_split(fed.data, all, spec.data.test_fraction, rng);
    pool = std::move(split.kept);
    fed.test_indices = std::move(split.taken);
  }

  std::size_t server_size = 0;
  if (spec.clean.kind == CleanDataSpec::Kind::kServerShard) {
    auto rng = derive_substream(spec.seed, "server-shard", 0, 0);
    auto shard = std::get<ServerShard>(carve_server_shard(fed.data, pool, spec.clean.fraction, rng));
    server_size = shard.indices.size();
    fed.server_shard = std::move(shard.indices);
  } else if (spec.clean.kind == CleanDataSpec::Kind::kTrustedClients) {
    fed.trusted = std::get<TrustedClients>(designate_trusted_clients(spec.clean.trusted)).clients;
  }

  const std::size_t min_size = spec.min_partition_size ? spec.min_partition_size : 2 * spec.batch_size;
  {
    auto rng = derive_substream(spec.seed, "partition", 0, 0);
    fed.partitions = dirichlet_partition(fed.data, pool, spec.num_clients, spec.beta, min_size, rng);
  }
  fed.weights = partition_weights(fed.partitions, server_size);
  {
    auto rng = derive_substream(spec.seed, "byzantine", 0, 0);
    fed.byzantine = select_byzantine_set(fed.weights, spec.byzantine_ratio, rng, fed.trusted);
  }

  fed.model.kind = spec.model;
  fed.model.input_dim = fed.data.dim;
  fed.model.hidden = spec.model == ModelKind::kMLP1 ? spec.hidden : 0;
  fed.model.num_classes = fed.data.num_classes;
  fed.model.validate();
  return fed;
}

TrainingState initial_state(const Federation &fed, const RunSpec &spec) {
  TrainingState state;
  auto rng = derive_substream(spec.seed, "init", 0, 0);
  state.params = initial_parameters(fed.model, rng);
  state.previous_aggregate.assign(state.params.size(), 0.0);
  return state;
}

std::vector<SampleIndex> sample_batch(std::span<const SampleIndex> pool, std::size_t batch_size, RngStream &rng) {
  if (pool.empty()) throw Error(ErrorCode::kEmptySelection, "cannot sample from an empty shard");
  std::vector<SampleIndex> batch(pool.begin(), pool.end());
  if (batch_size >= batch.size()) return batch;
  // Partial Fisher-Yates: the first batch_size slots are a uniform sample.
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = rng.uniform_index(i, batch.size() - 1);
    std::swap(batch[i], batch[j]);
  }
  batch.resize(batch_size);
  return batch;
}

GradientVector client_round(const Federation &fed, const ClientPartition &client, VectorView params,
                            std::size_t batch_size, std::uint64_t seed, std::size_t round, double *loss_out) {
  auto rng = derive_substream(seed, "batch", round, client.id);
  const auto batch = sample_batch(client.indices, batch_size, rng);
  auto result = loss_and_gradient(fed.model, params, fed.data, batch);
  if (loss_out) *loss_out = result.loss;
  return std::move(result.gradient);
}

RoundRecord training_round(TrainingState &state, const Federation &fed, const RunSpec &spec) {
  const std::size_t t = state.round;
  const std::size_t m_count = fed.partitions.size();
  const std::size_t b_count = fed.byzantine.count();
  const auto round_start = std::chrono::steady_clock::now();
  PhaseClock clock(spec.record_wall_time);

  RoundRecord record;
  record.round = t;
  record.realized_ratio = fed.byzantine.ratio;

  // Honest clients.
  std::vector<GradientVector> uploads(m_count);
  std::vector<GradientVector> honest;
  honest.reserve(m_count - b_count);
  double loss_acc = 0.0;
  double loss_weight = 0.0;
  for (ClientId m = 0; m < m_count; ++m) {
    if (fed.byzantine.contains(m)) continue;
    double loss = 0.0;
    uploads[m] = client_round(fed, fed.partitions[m], state.params, spec.batch_size, spec.seed, t, &loss);
    require_finite(uploads[m], "honest gradient", t);
    loss_acc += fed.weights[m] * loss;
    loss_weight += fed.weights[m];
    honest.push_back(uploads[m]);
  }
  record.train_loss = loss_weight > 0.0 ? loss_acc / loss_weight : 0.0;
  record.times.gradients_ms = clock.lap();

  // Byzantine clients: full knowledge of this round's honest gradients.
  if (b_count > 0) {
    const std::size_t p = state.params.size();
    GradientVector shared;
    switch (spec.attack.kind) {
      case AttackKind::kGaussian: break;
      case AttackKind::kSignFlip: shared = attack_signflip(honest); break;
      case AttackKind::kLIE: shared = attack_lie(honest, spec.attack.lie_coefficient); break;
      case AttackKind::kFoE: {
        const double q = spec.attack.foe_coefficient.value_or(
            default_foe_coefficient(spec.method.victim_is_mca(), m_count, b_count));
        shared = attack_foe(honest, q, m_count, b_count);
        break;
      }
      case AttackKind::kOurs: shared = attack_ours(honest, m_count, b_count); break;
    }
    for (auto m : fed.byzantine.members) {
      if (spec.attack.kind == AttackKind::kGaussian) {
        auto rng = derive_substream(spec.seed, "gaussian", t, m);
        uploads[m] = attack_gaussian(p, spec.attack.gaussian_variance, rng);
      } else {
        uploads[m] = shared;
      }
      require_finite(uploads[m], "attack payload", t);
    }
  }
  record.times.attack_ms = clock.lap();

  // Server-side clean gradient on a fresh batch of the shard.
  std::optional<GradientVector> clean_gradient;
  if (fed.server_shard) {
    auto rng = derive_substream(spec.seed, "server-batch", t, 0);
    const auto batch = sample_batch(*fed.server_shard, spec.batch_size, rng);
    clean_gradient = loss_and_gradient(fed.model, state.params, fed.data, batch).gradient;
  }

  AggregationContext context;
  context.center = &state.previous_aggregate;
  context.reference = clean_gradient ? &*clean_gradient : nullptr;
  context.default_krum_f = static_cast<std::size_t>(std::ceil(spec.byzantine_ratio * static_cast<double>(m_count) - 1e-9));

  GradientVector aggregate_vec;
  if (spec.method.kind == MethodSpec::Kind::kBaseline) {
    const auto &agg = spec.method.aggregator;
    if (agg.kind == AggregatorKind::kKrum) {
      const auto krum = krum_select(uploads, agg.krum_f.value_or(context.default_krum_f));
      aggregate_vec = uploads[krum.selected];
      record.selected = {krum.selected};
    } else if (agg.kind == AggregatorKind::kFLTrust) {
      if (!clean_gradient) throw Error(ErrorCode::kMissingReference, "FLTrust requires a server clean shard");
      auto result = fltrust(*clean_gradient, uploads);
      aggregate_vec = std::move(result.aggregate);
      for (ClientId m = 0; m < m_count; ++m)
        if (result.trust_scores[m] > 0.0) record.selected.push_back(m);
    } else {
      aggregate_vec = aggregate(agg, fed.weights, uploads, context);
      record.selected.resize(m_count);
      std::iota(record.selected.begin(), record.selected.end(), ClientId{0});
    }
    record.times.reference_ms = clock.lap();
  } else {
    ReferenceSource source = BaseAggregatorReference{spec.method.aggregator};
    if (spec.method.kind == MethodSpec::Kind::kHPlusClean) {
      if (fed.server_shard)
        source = ServerCleanReference{};
      else
        source = TrustedClientReference{fed.trusted};
    }
    const auto reference = build_reference(source, uploads, fed.weights, clean_gradient, context);
    require_finite(reference, "reference vector", t);
    record.times.reference_ms = clock.lap();

    HPlusParams params;
    params.passes = spec.hplus.passes;
    params.segment_length = spec.hplus.segment_length;
    params.keep = spec.hplus.keep.resolve(m_count, b_count, spec.byzantine_ratio);
    params.penalty_weight = spec.hplus.penalty_weight;
    params.norm_pivot = spec.hplus.norm_pivot;
    auto rng = derive_substream(spec.seed, "segments", t, 0);
    auto filtered = hplus_filter(reference, uploads, fed.weights, params, rng);
    aggregate_vec = std::move(filtered.aggregate);
    record.selected = std::move(filtered.selected);
    record.passes = std::move(filtered.passes);
    record.empty_intersection = filtered.empty_intersection;
  }
  record.times.filter_ms = clock.lap();

  const double eta = spec.lr.rate(t);
  for (std::size_t i = 0; i < state.params.size(); ++i) state.params[i] -= eta * aggregate_vec[i];
  require_finite(state.params, "model parameters", t);
  record.aggregate_norm = euclidean_norm(aggregate_vec);
  state.previous_aggregate = std::move(aggregate_vec);
  ++state.round;
  record.times.update_ms = clock.lap();

  if ((t + 1) % spec.eval_interval == 0 || t + 1 == spec.rounds)
    record.test_accuracy = accuracy(fed.model, state.params, fed.data, fed.test_indices);
  record.times.eval_ms = clock.lap();
  record.wall_ms = spec.record_wall_time ? elapsed_ms(round_start) : 0.0;
  return record;
}

RunResult run_experiment(const Federation &fed, const RunSpec &spec) {
  spec.validate();
  RunResult result;
  result.byzantine = fed.byzantine;
  result.num_clients = fed.partitions.size();
  result.parameter_count = fed.model.parameter_count();

  auto state = initial_state(fed, spec);
  result.initial_accuracy = accuracy(fed.model, state.params, fed.data, fed.test_indices);
  bool evaluated = false;

  for (std::size_t t = 0; t < spec.rounds; ++t) {
    try {
      result.records.push_back(training_round(state, fed, spec));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kDivergenceDetected) throw;
      result.diverged = true;
      result.divergence_message = e.what();
      break;
    }
    if (const auto &acc = result.records.back().test_accuracy) {
      result.max_accuracy = evaluated ? std::max(result.max_accuracy, *acc) : *acc;
      evaluated = true;
      result.final_accuracy = acc;
    }
  }
  if (!evaluated) result.max_accuracy = result.initial_accuracy;
  result.final_params = std::move(state.params);
  return result;
}

RunResult run_experiment(const RunSpec &spec) { return run_experiment(prepare_federation(spec), spec); }

}  // namespace hplus
