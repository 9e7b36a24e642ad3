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

#include "hplus/model.hpp"

#include <algorithm>
#include <cmath>

namespace hplus {

std::size_t ModelSpec::parameter_count() const {
  if (kind == ModelKind::kSoftmaxRegression) return (input_dim + 1) * num_classes;
  return (input_dim + 1) * hidden + (hidden + 1) * num_classes;
}

void ModelSpec::validate() const {
  if (input_dim < 1 || num_classes < 1) throw Error(ErrorCode::kInvalidArgument, "model needs d >= 1 and C >= 1");
  if (kind == ModelKind::kMLP1 && hidden < 1) throw Error(ErrorCode::kInvalidArgument, "MLP1 needs hidden >= 1");
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(const ModelSpec &model) {
  if (model.kind == ModelKind::kSoftmaxRegression) return {{model.num_classes, model.input_dim}};
  return {{model.hidden, model.input_dim}, {model.num_classes, model.hidden}};
}

// Softmax over logits in place; returns log-sum-exp.
double softmax_inplace(std::vector<double> &logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto &z : logits) sum += (z = std::exp(z - peak));
  for (auto &z : logits) z /= sum;
  return peak + std::log(sum);
}

struct Forward {
  std::vector<double> hidden_pre;  // MLP1 only
  std::vector<double> hidden;      // MLP1 only
  std::vector<double> logits;
};

void affine(VectorView params, std::size_t offset, std::size_t outputs, std::size_t inputs,
            std::span<const double> x, std::vector<double> &out) {
  out.assign(outputs, 0.0);
  const double *w = params.data() + offset;
  const double *b = w + outputs * inputs;
  for (std::size_t o = 0; o < outputs; ++o) {
    double acc = b[o];
    const double *row = w + o * inputs;
    for (std::size_t i = 0; i < inputs; ++i) acc += row[i] * x[i];
    out[o] = acc;
  }
}

void forward(const ModelSpec &model, VectorView params, std::span<const double> x, Forward &f) {
  if (model.kind == ModelKind::kSoftmaxRegression) {
    affine(params, 0, model.num_classes, model.input_dim, x, f.logits);
    return;
  }
  affine(params, 0, model.hidden, model.input_dim, x, f.hidden_pre);
  f.hidden.resize(model.hidden);
  for (std::size_t j = 0; j < model.hidden; ++j) f.hidden[j] = f.hidden_pre[j] > 0.0 ? f.hidden_pre[j] : 0.0;
  const std::size_t second = (model.input_dim + 1) * model.hidden;
  affine(params, second, model.num_classes, model.hidden, f.hidden, f.logits);
}

void check(const ModelSpec &model, VectorView params) {
  if (params.size() != model.parameter_count())
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector length does not match the model");
}

}  // namespace

std::vector<DenseLayer> unflatten(const ModelSpec &model, VectorView params) {
  check(model, params);
  std::vector<DenseLayer> layers;
  std::size_t offset = 0;
  for (auto [outputs, inputs] : layer_shapes(model)) {
    DenseLayer layer;
    layer.outputs = outputs;
    layer.inputs = inputs;
    layer.weights.assign(params.begin() + static_cast<std::ptrdiff_t>(offset),
                         params.begin() + static_cast<std::ptrdiff_t>(offset + outputs * inputs));
    offset += outputs * inputs;
    layer.bias.assign(params.begin() + static_cast<std::ptrdiff_t>(offset),
                      params.begin() + static_cast<std::ptrdiff_t>(offset + outputs));
    offset += outputs;
    layers.push_back(std::move(layer));
  }
  return layers;
}

GradientVector flatten(std::span<const DenseLayer> layers) {
  GradientVector out;
  for (const auto &layer : layers) {
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

GradientVector initial_parameters(const ModelSpec &model, RngStream &rng) {
  model.validate();
  GradientVector params(model.parameter_count(), 0.0);
  if (model.kind == ModelKind::kSoftmaxRegression) return params;
  std::size_t offset = 0;
  for (auto [outputs, inputs] : layer_shapes(model)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(inputs + outputs));
    for (std::size_t i = 0; i < outputs * inputs; ++i) params[offset + i] = (2.0 * rng.uniform() - 1.0) * limit;
    offset += outputs * inputs + outputs;
  }
  return params;
}

LossAndGradient loss_and_gradient(const ModelSpec &model, VectorView params, const LabeledDataset &data,
                                  std::span<const SampleIndex> batch) {
  check(model, params);
  if (batch.empty()) throw Error(ErrorCode::kEmptySelection, "empty batch");
  if (data.dim != model.input_dim) throw Error(ErrorCode::kDimensionMismatch, "dataset dimension != model input");

  LossAndGradient out;
  out.gradient.assign(params.size(), 0.0);
  auto &g = out.gradient;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t C = model.num_classes;
  Forward f;
  std::vector<double> dhidden;

  for (auto idx : batch) {
    const auto x = data.row(idx);
    const auto y = static_cast<std::size_t>(data.labels[idx]);
    forward(model, params, x, f);
    const double logit_y = f.logits[y];
    const double lse = softmax_inplace(f.logits);
    out.loss += lse - logit_y;

    auto &dlogits = f.logits;
    dlogits[y] -= 1.0;
    for (auto &v : dlogits) v *= inv_b;

    if (model.kind == ModelKind::kSoftmaxRegression) {
      const std::size_t d = model.input_dim;
      for (std::size_t c = 0; c < C; ++c) {
        double *row = g.data() + c * d;
        for (std::size_t i = 0; i < d; ++i) row[i] += dlogits[c] * x[i];
        g[C * d + c] += dlogits[c];
      }
      continue;
    }

    const std::size_t d = model.input_dim;
    const std::size_t h = model.hidden;
    const std::size_t second = (d + 1) * h;
    const double *w2 = params.data() + second;
    for (std::size_t c = 0; c < C; ++c) {
      double *row = g.data() + second + c * h;
      for (std::size_t j = 0; j < h; ++j) row[j] += dlogits[c] * f.hidden[j];
      g[second + C * h + c] += dlogits[c];
    }
    dhidden.assign(h, 0.0);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t j = 0; j < h; ++j) dhidden[j] += w2[c * h + j] * dlogits[c];
    for (std::size_t j = 0; j < h; ++j) {
      if (!(f.hidden_pre[j] > 0.0)) continue;
      double *row = g.data() + j * d;
      for (std::size_t i = 0; i < d; ++i) row[i] += dhidden[j] * x[i];
      g[h * d + j] += dhidden[j];
    }
  }
  out.loss *= inv_b;
  return out;
}

double loss_only(const ModelSpec &model, VectorView params, const LabeledDataset &data,
                 std::span<const SampleIndex> batch) {
  check(model, params);
  if (batch.empty()) throw Error(ErrorCode::kEmptySelection, "empty batch");
  Forward f;
  double loss = 0.0;
  for (auto idx : batch) {
    forward(model, params, data.row(idx), f);
    const auto y = static_cast<std::size_t>(data.labels[idx]);
    const double logit_y = f.logits[y];
    const double lse = softmax_inplace(f.logits);
    loss += lse - logit_y;
  }
  return loss / static_cast<double>(batch.size());
}

int predict(const ModelSpec &model, VectorView params, std::span<const double> input) {
  Forward f;
  forward(model, params, input, f);
  return static_cast<int>(std::max_element(f.logits.begin(), f.logits.end()) - f.logits.begin());
}

double accuracy(const ModelSpec &model, VectorView params, const LabeledDataset &data,
                std::span<const SampleIndex> indices) {
  check(model, params);
  if (indices.empty()) return 0.0;
  std::size_t correct = 0;
  for (auto idx : indices)
    if (predict(model, params, data.row(idx)) == data.labels[idx]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

}  // namespace hplus
