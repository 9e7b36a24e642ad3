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

#include "hplus/attacks.hpp"

#include <cmath>

namespace hplus {

namespace {

GradientVector honest_sum(std::span<const GradientVector> honest) {
  if (honest.empty()) throw Error(ErrorCode::kEmptySelection, "no honest gradients");
  const std::size_t p = honest.front().size();
  GradientVector sum(p, 0.0);
  for (const auto &g : honest) {
    if (g.size() != p) throw Error(ErrorCode::kDimensionMismatch, "honest gradients differ in length");
    for (std::size_t i = 0; i < p; ++i) sum[i] += g[i];
  }
  return sum;
}

void check_counts(std::size_t num_clients, std::size_t num_byzantine) {
  if (num_clients <= num_byzantine) throw Error(ErrorCode::kInvalidRatio, "attack requires M > B");
}

}  // namespace

std::string_view attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kGaussian: return "gaussian";
    case AttackKind::kSignFlip: return "signflip";
    case AttackKind::kLIE: return "lie";
    case AttackKind::kFoE: return "foe";
    case AttackKind::kOurs: return "ours";
  }
  return "?";
}

std::optional<AttackKind> parse_attack_kind(std::string_view name) {
  for (auto kind : {AttackKind::kGaussian, AttackKind::kSignFlip, AttackKind::kLIE, AttackKind::kFoE, AttackKind::kOurs})
    if (attack_name(kind) == name) return kind;
  return std::nullopt;
}

void AttackSpec::validate() const {
  if (!(gaussian_variance > 0.0) || !std::isfinite(gaussian_variance))
    throw Error(ErrorCode::kInvalidArgument, "Gaussian variance must be > 0");
  if (!std::isfinite(lie_coefficient)) throw Error(ErrorCode::kInvalidArgument, "LIE coefficient must be finite");
  if (foe_coefficient && (!std::isfinite(*foe_coefficient) || *foe_coefficient == 0.0))
    throw Error(ErrorCode::kInvalidArgument, "FoE coefficient must be finite and nonzero");
}

double default_foe_coefficient(bool victim_is_mca, std::size_t num_clients, std::size_t num_byzantine) {
  if (victim_is_mca) return -3.0 * static_cast<double>(num_clients - num_byzantine);
  return -0.1;
}

GradientVector attack_gaussian(std::size_t dimension, double variance, RngStream &rng) {
  if (!(variance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "variance must be > 0");
  const double stddev = std::sqrt(variance);
  GradientVector out(dimension);
  for (auto &x : out) x = rng.normal(0.0, stddev);
  return out;
}

GradientVector attack_signflip(std::span<const GradientVector> honest) {
  auto out = honest_sum(honest);
  for (auto &x : out) x *= -3.0;
  return out;
}

GradientVector attack_lie(std::span<const GradientVector> honest, double coefficient) {
  if (honest.size() < 2) throw Error(ErrorCode::kInsufficientClients, "LIE needs at least two honest gradients");
  const auto sum = honest_sum(honest);
  const double n = static_cast<double>(honest.size());
  GradientVector out(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    const double mean = sum[i] / n;
    double var = 0.0;
    for (const auto &g : honest) {
      const double d = g[i] - mean;
      var += d * d;
    }
    out[i] = mean + coefficient * std::sqrt(var / n);
  }
  return out;
}

GradientVector attack_foe(std::span<const GradientVector> honest, double coefficient, std::size_t num_clients,
                          std::size_t num_byzantine) {
  check_counts(num_clients, num_byzantine);
  auto out = honest_sum(honest);
  const double scale = coefficient / static_cast<double>(num_clients - num_byzantine);
  for (auto &x : out) x *= scale;
  return out;
}

GradientVector attack_ours(std::span<const GradientVector> honest, std::size_t num_clients,
                           std::size_t num_byzantine) {
  check_counts(num_clients, num_byzantine);
  auto out = honest_sum(honest);
  const double honest_count = static_cast<double>(num_clients - num_byzantine);
  for (auto &x : out) x = -x / honest_count;
  return out;
}

}  // namespace hplus
