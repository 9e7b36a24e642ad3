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

#include "hplus_c.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <numeric>
#include <string>

#include "hplus/harness.hpp"

struct hp_config {
  hplus::ExperimentConfig config;
};

struct hp_sweep_result {
  hplus::SweepResult result;
  std::string output_dir;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_detail;

hp_status ok() {
  g_last_error.clear();
  g_last_detail.clear();
  return HP_OK;
}

hp_status fail(hp_status status, const std::string &message, const std::string &detail = "") {
  g_last_error = message;
  g_last_detail = detail;
  return status;
}

template <typename F>
hp_status guarded(F &&body) {
  try {
    body();
    return ok();
  } catch (const hplus::Error &e) {
    const bool config = e.code() == hplus::ErrorCode::kConfigError;
    return fail(static_cast<hp_status>(e.code()), e.what(), config ? e.detail() : "");
  } catch (const std::bad_alloc &) {
    return fail(HP_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(HP_INTERNAL, e.what());
  }
}

char *copy_string(const std::string &s) {
  auto *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool condition, const char *what) {
  if (!condition) throw hplus::Error(hplus::ErrorCode::kInvalidArgument, what);
}

std::vector<hplus::VectorView> row_views(const double *data, std::size_t rows, std::size_t p) {
  std::vector<hplus::VectorView> views;
  views.reserve(rows);
  for (std::size_t m = 0; m < rows; ++m) views.emplace_back(data + m * p, p);
  return views;
}

hplus::WeightCoefficients make_weights(const double *weights, std::size_t num_clients) {
  std::vector<double> w(num_clients, 1.0);
  if (weights) w.assign(weights, weights + num_clients);
  for (double v : w) require(v >= 0.0 && std::isfinite(v), "weights must be finite and >= 0");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  require(total > 0.0, "weights must not all be zero");
  for (auto &v : w) v /= total;
  return hplus::WeightCoefficients::from_values(std::move(w));
}

}  // namespace

extern "C" {

const char *hp_version(void) { return "0.1.0"; }

const char *hp_status_name(hp_status status) {
  static thread_local std::string name;
  name = std::string(hplus::ErrorCodeName(static_cast<hplus::ErrorCode>(status)));
  return name.c_str();
}

const char *hp_last_error(void) { return g_last_error.c_str(); }
const char *hp_last_error_detail(void) { return g_last_detail.c_str(); }
void hp_string_free(char *s) { std::free(s); }

hp_status hp_config_load(const char *path, hp_config **out) {
  return guarded([&] {
    require(path && out, "path and out must not be NULL");
    *out = nullptr;
    auto handle = std::make_unique<hp_config>();
    handle->config = hplus::parse_config(path);
    *out = handle.release();
  });
}

hp_status hp_config_from_json(const char *json_text, hp_config **out) {
  return guarded([&] {
    require(json_text && out, "json_text and out must not be NULL");
    *out = nullptr;
    auto handle = std::make_unique<hp_config>();
    handle->config = hplus::parse_config_text(json_text);
    *out = handle.release();
  });
}

hp_status hp_config_to_json(const hp_config *config, char **out) {
  return guarded([&] {
    require(config && out, "config and out must not be NULL");
    *out = copy_string(hplus::serialize_config(config->config));
  });
}

hp_status hp_config_cell_count(const hp_config *config, size_t *out) {
  return guarded([&] {
    require(config && out, "config and out must not be NULL");
    *out = hplus::expand_cells(config->config).size();
  });
}

void hp_config_free(hp_config *config) { delete config; }

hp_status hp_sweep_run(const hp_config *config, const hp_sweep_options *options, hp_row_callback on_row, void *user,
                       hp_sweep_result **out) {
  return guarded([&] {
    require(config && out, "config and out must not be NULL");
    *out = nullptr;
    hplus::SweepOptions opts;
    if (options) {
      opts.parallelism = options->parallelism ? options->parallelism : 1;
      opts.resume = options->resume != 0;
      if (options->output_dir) opts.output_dir = options->output_dir;
    }
    if (on_row) opts.on_row = [on_row, user](const hplus::SummaryRow &row) {
      on_row(hplus::summary_row_to_json(row).c_str(), user);
    };
    auto handle = std::make_unique<hp_sweep_result>();
    handle->result = hplus::run_sweep(config->config, opts);
    handle->output_dir = handle->result.output_dir.string();
    *out = handle.release();
  });
}

size_t hp_sweep_row_count(const hp_sweep_result *result) { return result ? result->result.rows.size() : 0; }

hp_status hp_sweep_row_json(const hp_sweep_result *result, size_t index, char **out) {
  return guarded([&] {
    require(result && out, "result and out must not be NULL");
    require(index < result->result.rows.size(), "row index out of range");
    *out = copy_string(hplus::summary_row_to_json(result->result.rows[index]));
  });
}

size_t hp_sweep_computed(const hp_sweep_result *result) { return result ? result->result.computed : 0; }
size_t hp_sweep_reused(const hp_sweep_result *result) { return result ? result->result.reused : 0; }
int hp_sweep_any_failed(const hp_sweep_result *result) { return result && result->result.any_failed() ? 1 : 0; }
const char *hp_sweep_output_dir(const hp_sweep_result *result) { return result ? result->output_dir.c_str() : ""; }
void hp_sweep_result_free(hp_sweep_result *result) { delete result; }

hp_status hp_plot_summary(const char *summary_json_path, const char *svg_path) {
  return guarded([&] {
    require(summary_json_path && svg_path, "paths must not be NULL");
    const auto rows = hplus::read_summary_json(summary_json_path);
    const auto series = hplus::ratio_series(rows);
    hplus::emit_accuracy_plot(series, svg_path, "Byzantine ratio", "max test accuracy");
  });
}

hp_status hp_plot_rounds(const char *const *csv_paths, const char *const *labels, size_t count, const char *svg_path) {
  return guarded([&] {
    require(svg_path && (count == 0 || csv_paths), "paths must not be NULL");
    std::vector<hplus::PlotSeries> series;
    for (size_t i = 0; i < count; ++i) {
      const std::filesystem::path csv = csv_paths[i];
      const std::string label = labels && labels[i] ? labels[i] : csv.stem().string();
      series.push_back(hplus::round_series(csv, label));
    }
    hplus::emit_accuracy_plot(series, svg_path, "round");
  });
}

hp_status hp_h_check(const double *x, const double *y, size_t p, double *out) {
  return guarded([&] {
    require(x && y && out, "pointers must not be NULL");
    *out = hplus::h_check({x, p}, {y, p});
  });
}

hp_status hp_aggregate(const char *name, const double *uploads, const double *weights, size_t num_clients, size_t p,
                       const double *reference, double *out) {
  return guarded([&] {
    require(name && uploads && out, "name, uploads and out must not be NULL");
    require(num_clients > 0 && p > 0, "need at least one client and p >= 1");
    const auto kind = hplus::parse_aggregator_kind(name);
    if (!kind) throw hplus::Error(hplus::ErrorCode::kInvalidArgument, std::string("unknown aggregator ") + name);
    hplus::AggregatorSpec spec;
    spec.kind = *kind;
    std::vector<hplus::GradientVector> vectors(num_clients);
    for (size_t m = 0; m < num_clients; ++m) vectors[m].assign(uploads + m * p, uploads + (m + 1) * p);
    hplus::GradientVector ref;
    hplus::AggregationContext ctx;
    if (reference) {
      ref.assign(reference, reference + p);
      ctx.reference = &ref;
      ctx.center = &ref;
    }
    const auto result = hplus::aggregate(spec, make_weights(weights, num_clients), vectors, ctx);
    std::copy(result.begin(), result.end(), out);
  });
}

hp_status hp_filter_run(const double *reference, const double *uploads, const double *weights, size_t num_clients,
                        size_t p, const hp_filter_params *params, uint64_t seed, double *aggregate_out,
                        unsigned char *selected_out, int *empty_intersection_out) {
  return guarded([&] {
    require(reference && uploads && params && aggregate_out, "reference, uploads, params and out must not be NULL");
    require(num_clients > 0 && p > 0, "need at least one client and p >= 1");
    hplus::HPlusParams hp;
    hp.passes = params->passes;
    hp.segment_length = params->segment_length;
    hp.keep = params->keep;
    hp.penalty_weight = params->penalty_weight;
    hp.norm_pivot = params->norm_pivot;
    const auto views = row_views(uploads, num_clients, p);
    auto rng = hplus::derive_substream(seed, "segments", 0, 0);
    const auto result =
        hplus::hplus_filter({reference, p}, views, make_weights(weights, num_clients), hp, rng);
    std::copy(result.aggregate.begin(), result.aggregate.end(), aggregate_out);
    if (selected_out) {
      std::fill(selected_out, selected_out + num_clients, 0);
      for (auto m : result.selected) selected_out[m] = 1;
    }
    if (empty_intersection_out) *empty_intersection_out = result.empty_intersection ? 1 : 0;
  });
}

}  // extern "C"
