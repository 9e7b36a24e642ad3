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

#ifndef HPLUS_DATA_HPP_
#define HPLUS_DATA_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "hplus/core.hpp"

namespace hplus {

using SampleIndex = std::size_t;

struct LabeledDataset {
  std::size_t num_samples = 0;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> inputs;  // num_samples x dim, row-major
  std::vector<int> labels;

  std::span<const double> row(SampleIndex i) const { return {inputs.data() + i * dim, dim}; }
  std::vector<std::size_t> class_histogram(std::span<const SampleIndex> indices) const;
  std::vector<std::size_t> class_histogram() const;
};

struct ClientPartition {
  ClientId id = 0;
  std::vector<SampleIndex> indices;

  std::size_t size() const { return indices.size(); }
};

struct ServerShard {
  std::vector<SampleIndex> indices;
};
struct TrustedClients {
  ClientSet clients;
};
using CleanShard = std::variant<ServerShard, TrustedClients>;

// Gaussian class clusters (unit within-class variance) whose centres are at
// least `class_separation` apart. Labels are balanced within one.
LabeledDataset synth_classification(std::size_t num_samples, std::size_t dim, std::size_t num_classes,
                                    double class_separation, RngStream &rng);

// Class-stratified split of `pool` into (kept, taken) where `taken` holds
// round(fraction * n_c) samples of every class c.
struct StratifiedSplit {
  std::vector<SampleIndex> kept;
  std::vector<SampleIndex> taken;
};
StratifiedSplit stratified_split(const LabeledDataset &data, std::span<const SampleIndex> pool, double fraction,
                                 RngStream &rng);

// Per-class Dirichlet(beta) allocation of `pool` across clients, redrawn until
// every client holds at least `min_size` samples.
std::vector<ClientPartition> dirichlet_partition(const LabeledDataset &data, std::span<const SampleIndex> pool,
                                                 std::size_t num_clients, double beta, std::size_t min_size,
                                                 RngStream &rng);

WeightCoefficients partition_weights(std::span<const ClientPartition> partitions, std::size_t server_size = 0);

// Removes a class-stratified server shard from `pool` (which is updated in place).
CleanShard carve_server_shard(const LabeledDataset &data, std::vector<SampleIndex> &pool, double fraction,
                              RngStream &rng);
CleanShard designate_trusted_clients(ClientSet trusted);

// IDX (MNIST-style) image + label files. Pixels are scaled to [0, 1].
LabeledDataset load_idx(const std::filesystem::path &images, const std::filesystem::path &labels);

}  // namespace hplus

#endif  // HPLUS_DATA_HPP_
