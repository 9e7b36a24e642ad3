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

#include "hplus/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

namespace hplus {

std::vector<std::size_t> LabeledDataset::class_histogram(std::span<const SampleIndex> indices) const {
  std::vector<std::size_t> hist(num_classes, 0);
  for (auto i : indices) ++hist[static_cast<std::size_t>(labels[i])];
  return hist;
}

std::vector<std::size_t> LabeledDataset::class_histogram() const {
  std::vector<std::size_t> hist(num_classes, 0);
  for (int y : labels) ++hist[static_cast<std::size_t>(y)];
  return hist;
}

namespace {

std::vector<std::vector<double>> class_centres(std::size_t dim, std::size_t num_classes, double separation,
                                               RngStream &rng) {
  std::vector<std::vector<double>> centres(num_classes, std::vector<double>(dim, 0.0));
  if (num_classes <= dim) {
    // Scaled signed basis vectors on distinct axes: pairwise distance is exactly
    // the separation.
    std::vector<std::size_t> axes(dim);
    std::iota(axes.begin(), axes.end(), std::size_t{0});
    std::shuffle(axes.begin(), axes.end(), rng.engine());
    const double radius = separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < num_classes; ++c) centres[c][axes[c]] = (rng.uniform() < 0.5 ? -radius : radius);
    return centres;
  }

  // More classes than dimensions: rejection sampling in a cube that grows on
  // repeated failure.
  double side = separation * std::pow(static_cast<double>(num_classes), 1.0 / static_cast<double>(dim)) * 2.0;
  for (;;) {
    std::size_t placed = 0;
    for (std::size_t attempt = 0; attempt < 1000 * num_classes && placed < num_classes; ++attempt) {
      auto &cand = centres[placed];
      for (auto &x : cand) x = (rng.uniform() - 0.5) * side;
      bool ok = true;
      for (std::size_t c = 0; c < placed && ok; ++c) ok = squared_distance(cand, centres[c]) >= separation * separation;
      if (ok) ++placed;
    }
    if (placed == num_classes) return centres;
    side *= 1.5;
  }
}

}  // namespace

LabeledDataset synth_classification(std::size_t num_samples, std::size_t dim, std::size_t num_classes,
                                    double class_separation, RngStream &rng) {
  if (num_classes < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one class");
  if (num_samples < num_classes) throw Error(ErrorCode::kInvalidArgument, "need n >= C");
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "need d >= 1");
  if (!(class_separation >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "class separation must be >= 0");

  const auto centres = class_centres(dim, num_classes, class_separation, rng);

  LabeledDataset data;
  data.num_samples = num_samples;
  data.dim = dim;
  data.num_classes = num_classes;
  data.labels.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) data.labels[i] = static_cast<int>(i % num_classes);
  std::shuffle(data.labels.begin(), data.labels.end(), rng.engine());

  data.inputs.resize(num_samples * dim);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const auto &centre = centres[static_cast<std::size_t>(data.labels[i])];
    for (std::size_t j = 0; j < dim; ++j) data.inputs[i * dim + j] = centre[j] + rng.normal(0.0, 1.0);
  }
  return data;
}

StratifiedSplit stratified_split(const LabeledDataset &data, std::span<const SampleIndex> pool, double fraction,
                                 RngStream &rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "fraction must lie in [0, 1]");
  std::vector<std::vector<SampleIndex>> by_class(data.num_classes);
  for (auto i : pool) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

  StratifiedSplit split;
  for (auto &members : by_class) {
    std::shuffle(members.begin(), members.end(), rng.engine());
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    split.taken.insert(split.taken.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    split.kept.insert(split.kept.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(split.kept.begin(), split.kept.end());
  std::sort(split.taken.begin(), split.taken.end());
  return split;
}

std::vector<ClientPartition> dirichlet_partition(const LabeledDataset &data, std::span<const SampleIndex> pool,
                                                 std::size_t num_clients, double beta, std::size_t min_size,
                                                 RngStream &rng) {
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be > 0");
  if (num_clients < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one client");
  if (min_size * num_clients > pool.size())
    throw Error(ErrorCode::kInfeasiblePartition, "min_size * M exceeds the number of samples");

  std::vector<std::vector<SampleIndex>> by_class(data.num_classes);
  for (auto i : pool) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

  constexpr std::size_t kMaxAttempts = 10000;
  std::vector<double> proportions(num_clients);
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<ClientPartition> parts(num_clients);
    for (std::size_t m = 0; m < num_clients; ++m) parts[m].id = m;

    for (const auto &members_in : by_class) {
      if (members_in.empty()) continue;
      auto members = members_in;
      std::shuffle(members.begin(), members.end(), rng.engine());

      double total = 0.0;
      for (auto &x : proportions) total += (x = rng.gamma(beta));
      if (!(total > 0.0)) {
        std::fill(proportions.begin(), proportions.end(), 1.0);
        total = static_cast<double>(num_clients);
      }

      const double n_c = static_cast<double>(members.size());
      double cumulative = 0.0;
      std::size_t begin = 0;
      for (std::size_t m = 0; m < num_clients; ++m) {
        cumulative += proportions[m] / total;
        const std::size_t end = (m + 1 == num_clients)
                                    ? members.size()
                                    : std::min(members.size(), static_cast<std::size_t>(cumulative * n_c));
        if (end > begin) {
          parts[m].indices.insert(parts[m].indices.end(), members.begin() + static_cast<std::ptrdiff_t>(begin),
                                  members.begin() + static_cast<std::ptrdiff_t>(end));
          begin = end;
        }
      }
    }

    const bool feasible =
        std::all_of(parts.begin(), parts.end(), [&](const ClientPartition &p) { return p.size() >= min_size; });
    if (feasible) {
      for (auto &p : parts) std::sort(p.indices.begin(), p.indices.end());
      return parts;
    }
  }
  throw Error(ErrorCode::kInfeasiblePartition, "no Dirichlet draw met min_size after repeated resampling");
}

WeightCoefficients partition_weights(std::span<const ClientPartition> partitions, std::size_t server_size) {
  std::vector<std::size_t> sizes;
  sizes.reserve(partitions.size());
  for (const auto &p : partitions) sizes.push_back(p.size());
  return WeightCoefficients::from_sizes(sizes, server_size);
}

CleanShard carve_server_shard(const LabeledDataset &data, std::vector<SampleIndex> &pool, double fraction,
                              RngStream &rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::kInvalidArgument, "shard fraction must lie in (0, 1)");
  auto split = stratified_split(data, pool, fraction, rng);
  if (split.taken.empty()) throw Error(ErrorCode::kEmptySelection, "server shard would be empty");
  pool = std::move(split.kept);
  return ServerShard{std::move(split.taken)};
}

CleanShard designate_trusted_clients(ClientSet trusted) {
  if (trusted.empty()) throw Error(ErrorCode::kEmptySelection, "trusted client set is empty");
  std::sort(trusted.begin(), trusted.end());
  trusted.erase(std::unique(trusted.begin(), trusted.end()), trusted.end());
  return TrustedClients{std::move(trusted)};
}

// ---------------------------------------------------------------------------
// IDX

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char> &bytes, std::size_t offset, const std::string &what) {
  if (bytes.size() < offset + 4) throw Error(ErrorCode::kFormatError, what + ": truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path &images, const std::filesystem::path &labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  const std::string img_name = images.string();
  const std::string lab_name = labels.string();

  if (read_be32(img, 0, img_name) != 0x00000803u) throw Error(ErrorCode::kFormatError, img_name + ": bad magic");
  if (read_be32(lab, 0, lab_name) != 0x00000801u) throw Error(ErrorCode::kFormatError, lab_name + ": bad magic");

  const std::size_t n = read_be32(img, 4, img_name);
  const std::size_t rows = read_be32(img, 8, img_name);
  const std::size_t cols = read_be32(img, 12, img_name);
  const std::size_t n_labels = read_be32(lab, 4, lab_name);
  if (n != n_labels) throw Error(ErrorCode::kFormatError, "image and label counts differ");

  const std::size_t dim = rows * cols;
  if (img.size() < 16 + n * dim) throw Error(ErrorCode::kFormatError, img_name + ": truncated payload");
  if (lab.size() < 8 + n) throw Error(ErrorCode::kFormatError, lab_name + ": truncated payload");
  if (n == 0 || dim == 0) throw Error(ErrorCode::kFormatError, "empty IDX dataset");

  LabeledDataset data;
  data.num_samples = n;
  data.dim = dim;
  data.inputs.resize(n * dim);
  for (std::size_t i = 0; i < n * dim; ++i) data.inputs[i] = static_cast<double>(img[16 + i]) / 255.0;
  data.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    data.labels[i] = lab[8 + i];
    max_label = std::max(max_label, data.labels[i]);
  }
  data.num_classes = static_cast<std::size_t>(max_label) + 1;
  return data;
}

}  // namespace hplus
