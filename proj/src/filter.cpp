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

#include "hplus/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hplus {

void HPlusParams::validate(std::size_t num_clients) const {
  if (passes < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (segment_length < 1) throw Error(ErrorCode::kInvalidArgument, "r must be >= 1");
  if (keep < 1 || keep > num_clients) throw Error(ErrorCode::kInvalidSelectionSize, "N must lie in [1, M]");
  if (!(penalty_weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "rho must be >= 0");
  if (!(norm_pivot > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be > 0");
}

double h_check(VectorView x, VectorView y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "h_check operands differ in length");
  if (x.empty()) throw Error(ErrorCode::kDimensionMismatch, "h_check on empty vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]);
    const double denom = std::abs(y[i] - x[i]) + ax;
    sum += (denom == 0.0) ? 1.0 : ax / denom;
  }
  return sum / static_cast<double>(x.size());
}

std::vector<SegmentIndex> sample_segments(std::size_t dimension, std::size_t segment_length, std::size_t passes,
                                          RngStream &rng) {
  if (dimension < 1) throw Error(ErrorCode::kDimensionMismatch, "cannot segment an empty vector");
  if (segment_length < 1) throw Error(ErrorCode::kInvalidArgument, "segment length must be >= 1");
  const std::size_t length = std::min(segment_length, dimension);
  std::vector<SegmentIndex> segments;
  segments.reserve(passes);
  for (std::size_t k = 0; k < passes; ++k) {
    const std::size_t start = (length == dimension) ? 0 : rng.uniform_index(0, dimension - length);
    segments.push_back({start, length});
  }
  return segments;
}

double anomaly_score(VectorView reference_segment, VectorView client_segment, double penalty_weight,
                     double norm_pivot) {
  const double similarity = h_check(reference_segment, client_segment);
  const double norm = euclidean_norm(client_segment);
  if (norm == 0.0) return -std::numeric_limits<double>::infinity();
  return similarity - penalty_weight * std::max(norm, norm_pivot / norm);
}

PassResult run_pass(VectorView reference, std::span<const VectorView> uploads, const SegmentIndex &segment,
                    std::size_t keep, double penalty_weight, double norm_pivot, std::size_t pass_index) {
  const std::size_t m_count = uploads.size();
  if (keep > m_count) throw Error(ErrorCode::kInvalidSelectionSize, "N exceeds the number of clients");
  if (segment.start + segment.length > reference.size())
    throw Error(ErrorCode::kDimensionMismatch, "segment lies outside the reference vector");

  PassResult result;
  result.pass = pass_index;
  result.segment = segment;
  result.scores.resize(m_count);
  const auto ref_seg = reference.subspan(segment.start, segment.length);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (uploads[m].size() != reference.size())
      throw Error(ErrorCode::kDimensionMismatch, "upload length differs from the reference");
    result.scores[m] =
        anomaly_score(ref_seg, uploads[m].subspan(segment.start, segment.length), penalty_weight, norm_pivot);
  }

  std::vector<ClientId> order(m_count);
  std::iota(order.begin(), order.end(), ClientId{0});
  const auto &scores = result.scores;
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&scores](ClientId a, ClientId b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  result.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(result.selected.begin(), result.selected.end());
  return result;
}

ClientSet intersect_passes(std::span<const PassResult> passes) {
  if (passes.empty()) throw Error(ErrorCode::kInvalidArgument, "intersection of zero passes");
  ClientSet acc = passes.front().selected;
  for (std::size_t k = 1; k < passes.size(); ++k) acc = set_intersection(acc, passes[k].selected);
  return acc;
}

GradientVector build_reference(const ReferenceSource &source, std::span<const GradientVector> uploads,
                               const WeightCoefficients &weights, const std::optional<GradientVector> &clean_gradient,
                               const AggregationContext &context) {
  if (const auto *base = std::get_if<BaseAggregatorReference>(&source))
    return aggregate(base->aggregator, weights, uploads, context);
  if (std::holds_alternative<ServerCleanReference>(source)) {
    if (!clean_gradient) throw Error(ErrorCode::kMissingReference, "server clean gradient not supplied");
    return *clean_gradient;
  }
  const auto &trusted = std::get<TrustedClientReference>(source).trusted;
  if (trusted.empty()) throw Error(ErrorCode::kEmptySelection, "trusted client set is empty");
  return weighted_average(weights, trusted, uploads);
}

SelectionResult select_clients(VectorView reference, std::span<const VectorView> uploads, const HPlusParams &params,
                               RngStream &rng) {
  params.validate(uploads.size());
  const auto segments = sample_segments(reference.size(), params.segment_length, params.passes, rng);

  SelectionResult result;
  result.passes.reserve(segments.size());
  for (std::size_t k = 0; k < segments.size(); ++k)
    result.passes.push_back(
        run_pass(reference, uploads, segments[k], params.keep, params.penalty_weight, params.norm_pivot, k));
  result.selected = intersect_passes(result.passes);
  result.empty_intersection = result.selected.empty();
  return result;
}

FilterResult hplus_filter(VectorView reference, std::span<const VectorView> uploads,
                          const WeightCoefficients &weights, const HPlusParams &params, RngStream &rng) {
  if (weights.size() != uploads.size()) throw Error(ErrorCode::kDimensionMismatch, "weight count");
  auto selection = select_clients(reference, uploads, params, rng);

  FilterResult result;
  result.selected = std::move(selection.selected);
  result.passes = std::move(selection.passes);
  result.empty_intersection = selection.empty_intersection;
  if (result.empty_intersection)
    result.aggregate.assign(reference.begin(), reference.end());
  else
    result.aggregate = weighted_average(weights, result.selected, uploads);
  return result;
}

FilterResult hplus_filter(const GradientVector &reference, std::span<const GradientVector> uploads,
                          const WeightCoefficients &weights, const HPlusParams &params, RngStream &rng) {
  const auto views = as_views(uploads);
  return hplus_filter(VectorView(reference), std::span<const VectorView>(views), weights, params, rng);
}

}  // namespace hplus
