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

#ifndef HPLUS_ATTACKS_HPP_
#define HPLUS_ATTACKS_HPP_

#include <optional>
#include <span>
#include <string_view>

#include "hplus/core.hpp"

namespace hplus {

enum class AttackKind { kGaussian, kSignFlip, kLIE, kFoE, kOurs };

std::string_view attack_name(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(std::string_view name);

struct AttackSpec {
  AttackKind kind = AttackKind::kSignFlip;
  double gaussian_variance = 90.0;
  double lie_coefficient = 0.7;
  // FoE q. Unset: -3 (M - B) against MCA, -0.1 otherwise.
  std::optional<double> foe_coefficient;

  void validate() const;
  bool operator==(const AttackSpec &) const = default;
};

double default_foe_coefficient(bool victim_is_mca, std::size_t num_clients, std::size_t num_byzantine);

// All attackers below see every honest gradient of the round.

GradientVector attack_gaussian(std::size_t dimension, double variance, RngStream &rng);

// -3 * sum of honest gradients.
GradientVector attack_signflip(std::span<const GradientVector> honest);

// Per-coordinate mean + c * population standard deviation.
GradientVector attack_lie(std::span<const GradientVector> honest, double coefficient);

// (q / (M - B)) * sum of honest gradients.
GradientVector attack_foe(std::span<const GradientVector> honest, double coefficient, std::size_t num_clients,
                          std::size_t num_byzantine);

// Negated honest mean, -(1 / (M - B)) * sum of honest gradients; its norm
// matches the honest mean so the norm penalty cannot tell it apart.
GradientVector attack_ours(std::span<const GradientVector> honest, std::size_t num_clients,
                           std::size_t num_byzantine);

}  // namespace hplus

#endif  // HPLUS_ATTACKS_HPP_
