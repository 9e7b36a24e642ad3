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

// Similarity-aware client filtering.
//
// Every round the server holds a reference vector g (from a robust base
// aggregator, a clean server gradient, or a trusted-client average). It draws
// K random contiguous windows of length r, scores every upload on each window
// by
//
//   score_m = H(g_seg, g_m_seg) - rho * max(|g_m_seg|, tau / |g_m_seg|)
//   H(x, y) = (1/r) sum_i |x_i| / (|y_i - x_i| + |x_i|)        (0/0 := 1)
//
// keeps the N best-scoring clients per window, and aggregates only the
// clients kept in all K windows. Selection costs O(K M r + K M log M),
// independent of the full dimension p.

#ifndef HPLUS_FILTER_HPP_
#define HPLUS_FILTER_HPP_

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hplus/aggregators.hpp"
#include "hplus/core.hpp"

namespace hplus {

struct HPlusParams {
  std::size_t passes = 3;          // K
  std::size_t segment_length = 50;  // r
  std::size_t keep = 1;            // N
  double penalty_weight = 10.0;    // rho
  double norm_pivot = 0.1;         // tau

  void validate(std::size_t num_clients) const;
  bool operator==(const HPlusParams &) const = default;
};

struct SegmentIndex {
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const SegmentIndex &) const = default;
};

struct PassResult {
  std::size_t pass = 0;
  SegmentIndex segment;
  std::vector<double> scores;
  ClientSet selected;
};

struct BaseAggregatorReference {
  AggregatorSpec aggregator;
};
struct ServerCleanReference {};
struct TrustedClientReference {
  ClientSet trusted;
};
using ReferenceSource = std::variant<BaseAggregatorReference, ServerCleanReference, TrustedClientReference>;

struct SelectionResult {
  ClientSet selected;
  std::vector<PassResult> passes;
  bool empty_intersection = false;
};

struct FilterResult {
  ClientSet selected;
  GradientVector aggregate;
  std::vector<PassResult> passes;
  bool empty_intersection = false;
};

// Similarity of y to x, in [0, 1]; H(x, x) = 1.
double h_check(VectorView x, VectorView y);

std::vector<SegmentIndex> sample_segments(std::size_t dimension, std::size_t segment_length, std::size_t passes,
                                          RngStream &rng);

// Reference segment first. Returns -infinity for an all-zero client segment.
double anomaly_score(VectorView reference_segment, VectorView client_segment, double penalty_weight,
                     double norm_pivot);

PassResult run_pass(VectorView reference, std::span<const VectorView> uploads, const SegmentIndex &segment,
                    std::size_t keep, double penalty_weight, double norm_pivot, std::size_t pass_index = 0);

ClientSet intersect_passes(std::span<const PassResult> passes);

GradientVector build_reference(const ReferenceSource &source, std::span<const GradientVector> uploads,
                               const WeightCoefficients &weights, const std::optional<GradientVector> &clean_gradient,
                               const AggregationContext &context = {});

// Segment sampling, K scoring passes and their intersection. Touches only the
// sampled windows of each upload.
SelectionResult select_clients(VectorView reference, std::span<const VectorView> uploads, const HPlusParams &params,
                               RngStream &rng);

// select_clients followed by the weighted average over the surviving clients.
// An empty intersection falls back to the reference vector.
FilterResult hplus_filter(VectorView reference, std::span<const VectorView> uploads,
                          const WeightCoefficients &weights, const HPlusParams &params, RngStream &rng);
FilterResult hplus_filter(const GradientVector &reference, std::span<const GradientVector> uploads,
                          const WeightCoefficients &weights, const HPlusParams &params, RngStream &rng);

}  // namespace hplus

#endif  // HPLUS_FILTER_HPP_
