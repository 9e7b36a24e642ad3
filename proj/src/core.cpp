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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hplus {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidRatio: return "InvalidRatio";
    case ErrorCode::kInsufficientClients: return "InsufficientClients";
    case ErrorCode::kInvalidReference: return "InvalidReference";
    case ErrorCode::kInvalidSelectionSize: return "InvalidSelectionSize";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kInfeasiblePartition: return "InfeasiblePartition";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyPlot: return "EmptyPlot";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

std::vector<VectorView> as_views(std::span<const GradientVector> vectors) {
  std::vector<VectorView> views;
  views.reserve(vectors.size());
  for (const auto &v : vectors) views.emplace_back(v);
  return views;
}

// ---------------------------------------------------------------------------
// WeightCoefficients

WeightCoefficients WeightCoefficients::from_sizes(std::span<const std::size_t> client_sizes,
                                                  std::size_t server_size) {
  if (client_sizes.empty()) throw Error(ErrorCode::kEmptySelection, "no clients");
  std::size_t total = server_size;
  for (auto s : client_sizes) total += s;
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "all partition sizes are zero");

  WeightCoefficients w;
  const auto denom = static_cast<double>(total);
  w.weights_.reserve(client_sizes.size());
  for (auto s : client_sizes) w.weights_.push_back(static_cast<double>(s) / denom);
  w.server_weight_ = static_cast<double>(server_size) / denom;
  return w;
}

WeightCoefficients WeightCoefficients::from_values(std::vector<double> client_weights) {
  if (client_weights.empty()) throw Error(ErrorCode::kEmptySelection, "no clients");
  double sum = 0.0;
  for (double v : client_weights) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "weights must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::kInvalidArgument, "weights must sum to 1");
  WeightCoefficients w;
  w.weights_ = std::move(client_weights);
  return w;
}

double WeightCoefficients::max_client_weight() const {
  return weights_.empty() ? 0.0 : *std::max_element(weights_.begin(), weights_.end());
}

double WeightCoefficients::sum_over(const ClientSet &clients) const {
  double s = 0.0;
  for (auto m : clients) s += weights_.at(m);
  return s;
}

bool ByzantineMask::contains(ClientId m) const { return std::binary_search(members.begin(), members.end(), m); }

// ---------------------------------------------------------------------------
// RNG

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace {

std::uint64_t substream_key(std::uint64_t master_seed, std::string_view purpose, std::uint64_t round,
                            std::uint64_t client) {
  std::uint64_t k = mix64(master_seed);
  k = mix64(k ^ hash_string(purpose));
  k = mix64(k ^ (round * 0xD1B54A32D192ED03ULL));
  k = mix64(k ^ (client * 0xAEF17502108EF2D9ULL));
  return k;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::string_view purpose, std::uint64_t round,
                     std::uint64_t client)
    : key_(substream_key(master_seed, purpose, round, client)), engine_(key_) {}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t RngStream::uniform_index(std::size_t lo, std::size_t hi) {
  std::uniform_int_distribution<std::size_t> dist(lo, hi);
  return dist(engine_);
}

double RngStream::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

RngStream derive_substream(std::uint64_t master_seed, std::string_view purpose, std::uint64_t round,
                           std::uint64_t client) {
  return RngStream(master_seed, purpose, round, client);
}

// ---------------------------------------------------------------------------
// Vector arithmetic

double euclidean_norm(VectorView v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double squared_distance(VectorView a, VectorView b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "squared_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(VectorView a, VectorView b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(VectorView v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

GradientVector weighted_average(std::span<const double> weights, std::span<const VectorView> vectors) {
  if (vectors.empty()) throw Error(ErrorCode::kEmptySelection, "weighted_average over an empty set");
  if (weights.size() != vectors.size())
    throw Error(ErrorCode::kDimensionMismatch, "weight count differs from vector count");
  const std::size_t p = vectors.front().size();
  for (const auto &v : vectors)
    if (v.size() != p) throw Error(ErrorCode::kDimensionMismatch, "vectors have different lengths");

  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptySelection, "selected weights sum to zero");

  GradientVector out(p, 0.0);
  for (std::size_t m = 0; m < vectors.size(); ++m) {
    const double w = weights[m] / total;
    if (w == 0.0) continue;
    const auto &v = vectors[m];
    for (std::size_t i = 0; i < p; ++i) out[i] += w * v[i];
  }
  return out;
}

GradientVector weighted_average(std::span<const double> weights, std::span<const GradientVector> vectors) {
  const auto views = as_views(vectors);
  return weighted_average(weights, std::span<const VectorView>(views));
}

GradientVector weighted_average(const WeightCoefficients &weights, const ClientSet &selection,
                                std::span<const VectorView> uploads) {
  if (selection.empty()) throw Error(ErrorCode::kEmptySelection, "weighted_average over an empty selection");
  std::vector<double> w;
  std::vector<VectorView> v;
  w.reserve(selection.size());
  v.reserve(selection.size());
  for (auto m : selection) {
    if (m >= uploads.size() || m >= weights.size()) throw Error(ErrorCode::kInvalidArgument, "client id out of range");
    w.push_back(weights[m]);
    v.push_back(uploads[m]);
  }
  return weighted_average(std::span<const double>(w), std::span<const VectorView>(v));
}

GradientVector weighted_average(const WeightCoefficients &weights, const ClientSet &selection,
                                std::span<const GradientVector> uploads) {
  const auto views = as_views(uploads);
  return weighted_average(weights, selection, std::span<const VectorView>(views));
}

// ---------------------------------------------------------------------------

ByzantineMask select_byzantine_set(const WeightCoefficients &weights, double requested_ratio, RngStream &rng,
                                   const ClientSet &excluded) {
  if (!(requested_ratio >= 0.0) || requested_ratio >= 1.0)
    throw Error(ErrorCode::kInvalidRatio, "requested Byzantine ratio must lie in [0, 1)");

  ByzantineMask mask;
  if (requested_ratio == 0.0) return mask;

  std::vector<ClientId> order;
  for (ClientId m = 0; m < weights.size(); ++m)
    if (!std::binary_search(excluded.begin(), excluded.end(), m)) order.push_back(m);
  std::shuffle(order.begin(), order.end(), rng.engine());

  // Tolerance absorbs the rounding of repeated float accumulation, e.g. 20 x 0.02.
  constexpr double kSlack = 1e-12;
  double cumulative = 0.0;
  for (auto m : order) {
    if (cumulative >= requested_ratio - kSlack) break;
    mask.members.push_back(m);
    cumulative += weights[m];
  }
  if (cumulative < requested_ratio - kSlack)
    throw Error(ErrorCode::kInvalidRatio, "eligible clients cannot reach the requested Byzantine ratio");

  std::sort(mask.members.begin(), mask.members.end());
  mask.ratio = weights.sum_over(mask.members);
  return mask;
}

ClientSet set_intersection(const ClientSet &a, const ClientSet &b) {
  ClientSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

ClientSet set_difference(const ClientSet &a, const ClientSet &b) {
  ClientSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace hplus
