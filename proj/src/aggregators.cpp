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

#include "hplus/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hplus {

namespace {

std::size_t common_dimension(std::span<const GradientVector> vectors) {
  if (vectors.empty()) throw Error(ErrorCode::kEmptySelection, "no vectors to aggregate");
  const std::size_t p = vectors.front().size();
  for (const auto &v : vectors)
    if (v.size() != p) throw Error(ErrorCode::kDimensionMismatch, "uploads have different lengths");
  return p;
}

void check_weights(const WeightCoefficients &weights, std::span<const GradientVector> vectors) {
  if (weights.size() != vectors.size())
    throw Error(ErrorCode::kDimensionMismatch, "weight count differs from vector count");
}

// Client weights renormalized to sum 1 (they sum to 1 - server weight when the
// server holds clean data).
std::vector<double> normalized(const WeightCoefficients &weights) {
  std::vector<double> w(weights.values().begin(), weights.values().end());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptySelection, "client weights sum to zero");
  for (auto &x : w) x /= total;
  return w;
}

double scalar_median(std::vector<double> &values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

std::string_view aggregator_name(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::kMean: return "Mean";
    case AggregatorKind::kMedian: return "Median";
    case AggregatorKind::kKrum: return "Krum";
    case AggregatorKind::kGM: return "GM";
    case AggregatorKind::kMCA: return "MCA";
    case AggregatorKind::kCClip: return "CClip";
    case AggregatorKind::kFLTrust: return "FLTrust";
  }
  return "?";
}

std::optional<AggregatorKind> parse_aggregator_kind(std::string_view name) {
  for (auto kind : {AggregatorKind::kMean, AggregatorKind::kMedian, AggregatorKind::kKrum, AggregatorKind::kGM,
                    AggregatorKind::kMCA, AggregatorKind::kCClip, AggregatorKind::kFLTrust}) {
    std::string lowered(aggregator_name(kind));
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string candidate(name);
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lowered == candidate) return kind;
  }
  return std::nullopt;
}

void AggregatorSpec::validate() const {
  if (!(gm_tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "GM tolerance must be > 0");
  if (!(mca_tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "MCA tolerance must be > 0");
  if (mca_bandwidth && !(*mca_bandwidth > 0.0)) throw Error(ErrorCode::kInvalidArgument, "MCA bandwidth must be > 0");
  if (gm_max_iter < 1 || mca_max_iter < 1 || cclip_iterations < 1)
    throw Error(ErrorCode::kInvalidArgument, "iteration caps must be >= 1");
  if (!(cclip_radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "CClip radius must be > 0");
}

GradientVector aggregate_mean(const WeightCoefficients &weights, std::span<const GradientVector> vectors) {
  common_dimension(vectors);
  check_weights(weights, vectors);
  return weighted_average(weights.values(), vectors);
}

GradientVector aggregate_median(std::span<const GradientVector> vectors) {
  const std::size_t p = common_dimension(vectors);
  GradientVector out(p);
  std::vector<double> column(vectors.size());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t m = 0; m < vectors.size(); ++m) column[m] = vectors[m][i];
    out[i] = scalar_median(column);
  }
  return out;
}

KrumResult krum_select(std::span<const GradientVector> vectors, std::size_t assumed_byzantine) {
  common_dimension(vectors);
  const std::size_t m_count = vectors.size();
  if (m_count < assumed_byzantine + 3)
    throw Error(ErrorCode::kInsufficientClients, "Krum needs M >= f + 3");
  const std::size_t neighbours = m_count - assumed_byzantine - 2;

  std::vector<double> dist(m_count * m_count, 0.0);
  for (std::size_t i = 0; i < m_count; ++i)
    for (std::size_t j = i + 1; j < m_count; ++j)
      dist[i * m_count + j] = dist[j * m_count + i] = squared_distance(vectors[i], vectors[j]);

  KrumResult result;
  result.scores.resize(m_count);
  std::vector<double> row;
  for (std::size_t i = 0; i < m_count; ++i) {
    row.clear();
    for (std::size_t j = 0; j < m_count; ++j)
      if (j != i) row.push_back(dist[i * m_count + j]);
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), row.end());
    result.scores[i] = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
  }
  // min_element returns the first minimum, i.e. the lowest id on ties.
  result.selected =
      static_cast<ClientId>(std::min_element(result.scores.begin(), result.scores.end()) - result.scores.begin());
  return result;
}

GradientVector aggregate_krum(std::span<const GradientVector> vectors, std::size_t assumed_byzantine) {
  return vectors[krum_select(vectors, assumed_byzantine).selected];
}

double geometric_median_objective(std::span<const double> weights, std::span<const GradientVector> vectors,
                                  VectorView point) {
  double f = 0.0;
  for (std::size_t m = 0; m < vectors.size(); ++m) f += weights[m] * std::sqrt(squared_distance(point, vectors[m]));
  return f;
}

GeometricMedianResult weiszfeld(std::span<const double> weights, std::span<const GradientVector> vectors,
                                double tolerance, std::size_t max_iter) {
  const std::size_t p = common_dimension(vectors);
  if (weights.size() != vectors.size()) throw Error(ErrorCode::kDimensionMismatch, "weight count");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");

  GeometricMedianResult result;
  GradientVector c = weighted_average(weights, vectors);
  result.objective_trace.push_back(geometric_median_objective(weights, vectors, c));

  const double coincide = tolerance * 1e-6;
  std::vector<double> dist(vectors.size());
  GradientVector next(p);
  for (std::size_t it = 0; it < max_iter; ++it) {
    double coincident_weight = 0.0;
    for (std::size_t m = 0; m < vectors.size(); ++m) {
      dist[m] = std::sqrt(squared_distance(c, vectors[m]));
      if (dist[m] < coincide) coincident_weight += weights[m];
    }

    if (coincident_weight > 0.0) {
      // At a data point: optimal iff the pull of the remaining points does not
      // exceed the weight sitting on it. Otherwise step off by the tolerance.
      GradientVector pull(p, 0.0);
      for (std::size_t m = 0; m < vectors.size(); ++m) {
        if (dist[m] < coincide) continue;
        for (std::size_t i = 0; i < p; ++i) pull[i] += weights[m] * (vectors[m][i] - c[i]) / dist[m];
      }
      if (euclidean_norm(pull) <= coincident_weight) break;
      const double shift = tolerance / std::sqrt(static_cast<double>(p));
      for (auto &x : c) x += shift;
      for (std::size_t m = 0; m < vectors.size(); ++m) dist[m] = std::sqrt(squared_distance(c, vectors[m]));
    }

    std::fill(next.begin(), next.end(), 0.0);
    double denom = 0.0;
    for (std::size_t m = 0; m < vectors.size(); ++m) {
      if (weights[m] == 0.0) continue;
      const double w = weights[m] / std::max(dist[m], coincide);
      denom += w;
      for (std::size_t i = 0; i < p; ++i) next[i] += w * vectors[m][i];
    }
    for (auto &x : next) x /= denom;

    const double step = std::sqrt(squared_distance(next, c));
    c.swap(next);
    ++result.iterations;
    result.objective_trace.push_back(geometric_median_objective(weights, vectors, c));
    if (step < tolerance) break;
  }
  result.point = std::move(c);
  return result;
}

GradientVector aggregate_gm(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                            double tolerance, std::size_t max_iter) {
  common_dimension(vectors);
  check_weights(weights, vectors);
  const auto w = normalized(weights);
  return weiszfeld(w, vectors, tolerance, max_iter).point;
}

GradientVector aggregate_mca(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                             double tolerance, std::size_t max_iter) {
  return aggregate_mca(weights, vectors, tolerance, max_iter, std::nullopt);
}

GradientVector aggregate_mca(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                             double tolerance, std::size_t max_iter, std::optional<double> fixed_bandwidth) {
  const std::size_t p = common_dimension(vectors);
  check_weights(weights, vectors);
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");
  if (fixed_bandwidth && !(*fixed_bandwidth > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "MCA bandwidth must be > 0");
  const auto alpha = normalized(weights);

  GradientVector c = aggregate_median(vectors);
  std::vector<double> residual(vectors.size());
  std::vector<double> scratch;
  GradientVector next(p);
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t m = 0; m < vectors.size(); ++m) residual[m] = std::sqrt(squared_distance(vectors[m], c));
    double bandwidth = 0.0;
    if (fixed_bandwidth) {
      bandwidth = *fixed_bandwidth;
    } else {
      scratch = residual;
      bandwidth = std::max(scalar_median(scratch), 1e-12);
    }
    const double inv_two_var = 1.0 / (2.0 * bandwidth * bandwidth);

    std::fill(next.begin(), next.end(), 0.0);
    double denom = 0.0;
    for (std::size_t m = 0; m < vectors.size(); ++m) {
      const double u = alpha[m] * std::exp(-residual[m] * residual[m] * inv_two_var);
      if (u == 0.0) continue;
      denom += u;
      for (std::size_t i = 0; i < p; ++i) next[i] += u * vectors[m][i];
    }
    if (denom == 0.0) break;
    for (auto &x : next) x /= denom;

    const double step = std::sqrt(squared_distance(next, c));
    c.swap(next);
    if (step < tolerance) break;
  }
  return c;
}

GradientVector aggregate_cclip(const WeightCoefficients &weights, std::span<const GradientVector> vectors,
                               const GradientVector &center, double radius, std::size_t iterations) {
  const std::size_t p = common_dimension(vectors);
  check_weights(weights, vectors);
  if (center.size() != p) throw Error(ErrorCode::kDimensionMismatch, "CClip center length");
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "CClip radius must be > 0");
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "CClip iterations must be >= 1");
  const auto alpha = normalized(weights);

  GradientVector c = center;
  GradientVector diff(p);
  GradientVector step(p);
  for (std::size_t l = 0; l < iterations; ++l) {
    std::fill(step.begin(), step.end(), 0.0);
    for (std::size_t m = 0; m < vectors.size(); ++m) {
      for (std::size_t i = 0; i < p; ++i) diff[i] = vectors[m][i] - c[i];
      const double norm = euclidean_norm(diff);
      const double scale = (norm > radius) ? radius / norm : 1.0;
      const double w = alpha[m] * scale;
      for (std::size_t i = 0; i < p; ++i) step[i] += w * diff[i];
    }
    for (std::size_t i = 0; i < p; ++i) c[i] += step[i];
  }
  return c;
}

FLTrustResult fltrust(const GradientVector &reference, std::span<const GradientVector> vectors) {
  const std::size_t p = common_dimension(vectors);
  if (reference.size() != p) throw Error(ErrorCode::kDimensionMismatch, "FLTrust reference length");
  const double ref_norm = euclidean_norm(reference);
  if (!(ref_norm > 0.0)) throw Error(ErrorCode::kInvalidReference, "FLTrust reference vector is zero");

  FLTrustResult result;
  result.trust_scores.resize(vectors.size(), 0.0);
  GradientVector acc(p, 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < vectors.size(); ++m) {
    const double norm = euclidean_norm(vectors[m]);
    if (norm < 1e-12) continue;  // zero upload: cosine 0
    const double ts = std::max(0.0, dot(vectors[m], reference) / (norm * ref_norm));
    result.trust_scores[m] = ts;
    if (ts == 0.0) continue;
    const double scale = ts * ref_norm / norm;
    for (std::size_t i = 0; i < p; ++i) acc[i] += scale * vectors[m][i];
    total += ts;
  }
  if (total == 0.0) {
    result.aggregate = reference;
  } else {
    for (auto &x : acc) x /= total;
    result.aggregate = std::move(acc);
  }
  return result;
}

GradientVector aggregate_fltrust(const GradientVector &reference, std::span<const GradientVector> vectors,
                                 const WeightCoefficients &weights) {
  check_weights(weights, vectors);
  return fltrust(reference, vectors).aggregate;
}

GradientVector aggregate(const AggregatorSpec &spec, const WeightCoefficients &weights,
                         std::span<const GradientVector> vectors, const AggregationContext &context) {
  spec.validate();
  switch (spec.kind) {
    case AggregatorKind::kMean: return aggregate_mean(weights, vectors);
    case AggregatorKind::kMedian: return aggregate_median(vectors);
    case AggregatorKind::kKrum: return aggregate_krum(vectors, spec.krum_f.value_or(context.default_krum_f));
    case AggregatorKind::kGM: return aggregate_gm(weights, vectors, spec.gm_tolerance, spec.gm_max_iter);
    case AggregatorKind::kMCA: return aggregate_mca(weights, vectors, spec.mca_tolerance, spec.mca_max_iter, spec.mca_bandwidth);
    case AggregatorKind::kCClip: {
      const std::size_t p = common_dimension(vectors);
      const GradientVector zero(p, 0.0);
      const GradientVector &center = context.center ? *context.center : zero;
      return aggregate_cclip(weights, vectors, center, spec.cclip_radius, spec.cclip_iterations);
    }
    case AggregatorKind::kFLTrust:
      if (!context.reference) throw Error(ErrorCode::kMissingReference, "FLTrust requires a clean reference vector");
      return aggregate_fltrust(*context.reference, vectors, weights);
  }
  throw Error(ErrorCode::kInternal, "unknown aggregator");
}

}  // namespace hplus
