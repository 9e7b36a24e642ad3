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

#ifndef HPLUS_MODEL_HPP_
#define HPLUS_MODEL_HPP_

#include <span>
#include <vector>

#include "hplus/core.hpp"
#include "hplus/data.hpp"

namespace hplus {

enum class ModelKind { kSoftmaxRegression, kMLP1 };

// Parameters live in one flat vector: for each layer the row-major weight
// matrix (outputs x inputs) followed by the bias.
struct ModelSpec {
  ModelKind kind = ModelKind::kSoftmaxRegression;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;  // MLP1 only
  std::size_t num_classes = 0;

  std::size_t parameter_count() const;
  void validate() const;
  bool operator==(const ModelSpec &) const = default;
};

struct DenseLayer {
  std::size_t outputs = 0;
  std::size_t inputs = 0;
  std::vector<double> weights;  // outputs x inputs
  std::vector<double> bias;     // outputs
};

std::vector<DenseLayer> unflatten(const ModelSpec &model, VectorView params);
GradientVector flatten(std::span<const DenseLayer> layers);

// Zeros for softmax regression; Glorot-uniform weights and zero biases for MLP1.
GradientVector initial_parameters(const ModelSpec &model, RngStream &rng);

struct LossAndGradient {
  double loss = 0.0;
  GradientVector gradient;
};

// Mean softmax cross-entropy over the batch and its analytic gradient. The
// ReLU subgradient at 0 is taken as 0.
LossAndGradient loss_and_gradient(const ModelSpec &model, VectorView params, const LabeledDataset &data,
                                  std::span<const SampleIndex> batch);
double loss_only(const ModelSpec &model, VectorView params, const LabeledDataset &data,
                 std::span<const SampleIndex> batch);

// argmax of the logits, lowest class index on ties.
int predict(const ModelSpec &model, VectorView params, std::span<const double> input);
double accuracy(const ModelSpec &model, VectorView params, const LabeledDataset &data,
                std::span<const SampleIndex> indices);

}  // namespace hplus

#endif  // HPLUS_MODEL_HPP_
