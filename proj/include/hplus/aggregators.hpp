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

#ifndef HPLUS_AGGREGATORS_HPP_
#define HPLUS_AGGREGATORS_HPP_

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hplus/core.hpp"

namespace hplus {

enum class AggregatorKind { kMean, kMedian, kKrum, kGM, kMCA, kCClip, kFLTrust };

std::string_view aggregator_name(AggregatorKind kind);
std::optional<AggregatorKind> parse_aggregator_kind(std::string_view name);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::kMean;

  // Krum: assumed Byzantine count. Unset means the caller supplies a default.
  std::optional<std::size_t> krum_f;

  double gm_tolerance = 1e-5;
  std::size_t gm_max_iter = 1000;

  double mca_tolerance = 1e-5;
  std::size_t mca_max_iter = 1000;
  // Kernel width. Unset: median distance to the current centre, re-estimated
  // every iteration.
  std::optional<double> mca_bandwidth;

  // Infinity disables clipping.
  double cclip_radius = 10.0;
  std::size_t cclip_iterations = 3;

  void validate() const;
  bool operator==(const AggregatorSpec &) const = default;
};

// Per-call inputs that some rules need beyond the uploads themselves.
struct AggregationContext {
  const GradientVector *center = nullptr;     // CClip; zero vector when null
  const GradientVector *reference = nullptr;  // FLTrust
  std::size_t default_krum_f = 0;
};

GradientVector aggregate_mean(const WeightCoefficients &weights, std::span<const GradientVector> vectors);

// Coordinate-wise median; even counts take the midpoint of the middle pair.
GradientVector aggregate_median(std::span<const GradientVector> vectors);

struct KrumResult {
  ClientId selected = 0;
  std::vector<double> scores;
};
KrumResult krum_select(std::span<const GradientVector> vectors, std::size_t assumed_byzantine);
GradientVector aggregate_krum(std::span<const GradientVector> vectors, std::size_t assumed_byzantine);

struct GeometricMedianResult {
  GradientVector point;
  std::size_t iterations = 0;
  // Weighted objective sum_m alpha_m |c - g_m| at every iterate, starting with
  // the initial weighted mean.
  std::vector<double> objective_trace;
};
double geometric_median_objective(std::span<const double> weights, std::span<const GradientVector> vectors,
                                  VectorView point);
GeometricMedianResult weiszfeld(std::span<const double> weights, std::span<const GradientVector> vectors,
                                double tolerance, std::size_t max_iter);
GradientVector aggregate_gm(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                            double tolerance = 1e-5, std::size_t max_iter = 1000);

GradientVector aggregate_mca(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                             double tolerance, std::size_t max_iter, std::optional<double> bandwidth);
GradientVector aggregate_mca(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                             double tolerance = 1e-5, std::size_t max_iter = 1000);

GradientVector aggregate_cclip(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                               const GradientVector &center, double radius, std::size_t iterations);

struct FLTrustResult {
  GradientVector aggregate;
  std::vector<double> trust_scores;
};
FLTrustResult fltrust(const GradientVector &reference, std::span<const GradientVector> vectors);
GradientVector aggregate_fltrust(const GradientVector &reference, std::span<const GradientVector> vectors,
                                 const WeightCoefficients &weights);

GradientVector aggregate(const AggregatorSpec &spec, const WeightCoefficients &weights,
                         std::span<const GradientVector> vectors, const AggregationContext &context = {});

}  // namespace hplus

#endif  // HPLUS_AGGREGATORS_HPP_
