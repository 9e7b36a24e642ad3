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

#ifndef HPLUS_CORE_HPP_
#define HPLUS_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "hplus/error.hpp"

namespace hplus {

// One client's upload (honest gradient or attack payload), length p.
using GradientVector = std::vector<double>;
using VectorView = std::span<const double>;
using ClientId = std::size_t;
// Always kept sorted ascending and duplicate free.
using ClientSet = std::vector<ClientId>;

std::vector<VectorView> as_views(std::span<const GradientVector> vectors);

// Per-client weight coefficients alpha_m = S_m / sum S. When the server holds a
// clean shard the server also carries weight, and the client weights are the
// alpha'_m of the extended population; client weights then sum to 1 - server.
class WeightCoefficients {
 public:
  WeightCoefficients() = default;

  static WeightCoefficients from_sizes(std::span<const std::size_t> client_sizes, std::size_t server_size = 0);
  // Weights that are already normalized (validated to sum to 1 within 1e-12).
  static WeightCoefficients from_values(std::vector<double> client_weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](ClientId m) const { return weights_[m]; }
  std::span<const double> values() const { return weights_; }
  double server_weight() const { return server_weight_; }
  double max_client_weight() const;
  double sum_over(const ClientSet &clients) const;

 private:
  std::vector<double> weights_;
  double server_weight_ = 0.0;
};

struct ByzantineMask {
  ClientSet members;
  double ratio = 0.0;  // realized C-bar: sum of weights over members

  bool contains(ClientId m) const;
  std::size_t count() const { return members.size(); }
};

// Keyed pseudo-random substream. Identical keys give identical draw sequences
// regardless of the order in which streams are created.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view purpose, std::uint64_t round, std::uint64_t client);

  std::uint64_t key() const { return key_; }
  std::mt19937_64 &engine() { return engine_; }

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  // Inclusive on both ends.
  std::size_t uniform_index(std::size_t lo, std::size_t hi);
  double normal(double mean, double stddev);
  double gamma(double shape);

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

RngStream derive_substream(std::uint64_t master_seed, std::string_view purpose, std::uint64_t round,
                           std::uint64_t client);

// Stable 64-bit string hash (FNV-1a) used for purpose tags and fingerprints.
std::uint64_t hash_string(std::string_view text);
std::uint64_t mix64(std::uint64_t x);

double euclidean_norm(VectorView v);
double squared_distance(VectorView a, VectorView b);
double dot(VectorView a, VectorView b);
bool all_finite(VectorView v);

// sum_m (w_m / sum w) * v_m. Weights need not be normalized; they must have a
// positive sum.
GradientVector weighted_average(std::span<const double> weights, std::span<const VectorView> vectors);
GradientVector weighted_average(std::span<const double> weights, std::span<const GradientVector> vectors);

// Weighted average over a subset of clients with the weights renormalized on
// that subset.
GradientVector weighted_average(const WeightCoefficients &weights, const ClientSet &selection,
                                std::span<const VectorView> uploads);
GradientVector weighted_average(const WeightCoefficients &weights, const ClientSet &selection,
                                std::span<const GradientVector> uploads);

// Adds clients along a seeded random permutation until their cumulative weight
// first reaches the requested ratio. Clients in `excluded` are never chosen.
ByzantineMask select_byzantine_set(const WeightCoefficients &weights, double requested_ratio, RngStream &rng,
                                   const ClientSet &excluded = {});

ClientSet set_intersection(const ClientSet &a, const ClientSet &b);
ClientSet set_difference(const ClientSet &a, const ClientSet &b);

}  // namespace hplus

#endif  // HPLUS_CORE_HPP_
