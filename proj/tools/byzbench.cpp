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

// byzbench: sweep runner over the libhplus C API.
//
// Exit codes: 0 success, 1 configuration, usage or I/O error, 2 a failed
// sweep cell or any other failure.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hplus_c.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFailed = 2;

int report(hp_status status, const char *what) {
  std::fprintf(stderr, "byzbench: %s: %s\n", what, hp_last_error());
  return status == HP_CONFIG_ERROR || status == HP_IO_ERROR || status == HP_INVALID_ARGUMENT ? kExitConfig
                                                                                              : kExitFailed;
}

struct Progress {
  size_t done = 0;
  size_t total = 0;
  bool quiet = false;
};

void on_row(const char *row_json, void *user) {
  auto *progress = static_cast<Progress *>(user);
  ++progress->done;
  if (!progress->quiet) std::fprintf(stderr, "[%zu/%zu] %s\n", progress->done, progress->total, row_json);
}

int cmd_run(const std::string &config_path, const std::string &out_dir, size_t parallel, bool resume, bool quiet) {
  hp_config *config = nullptr;
  if (hp_status s = hp_config_load(config_path.c_str(), &config); s != HP_OK) return report(s, "config");

  Progress progress;
  progress.quiet = quiet;
  hp_config_cell_count(config, &progress.total);

  hp_sweep_options options{};
  options.parallelism = parallel;
  options.resume = resume ? 1 : 0;
  options.output_dir = out_dir.empty() ? nullptr : out_dir.c_str();

  hp_sweep_result *result = nullptr;
  const hp_status s = hp_sweep_run(config, &options, on_row, &progress, &result);
  hp_config_free(config);
  if (s != HP_OK) return report(s, "sweep");

  const int failed = hp_sweep_any_failed(result);
  std::printf("%zu cells (%zu computed, %zu reused) -> %s/summary.json\n", hp_sweep_row_count(result),
              hp_sweep_computed(result), hp_sweep_reused(result), hp_sweep_output_dir(result));
  hp_sweep_result_free(result);
  if (failed) {
    std::fprintf(stderr, "byzbench: at least one cell failed; see rows.jsonl\n");
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_validate(const std::string &config_path, bool print) {
  hp_config *config = nullptr;
  if (hp_status s = hp_config_load(config_path.c_str(), &config); s != HP_OK) return report(s, "config");
  size_t cells = 0;
  hp_config_cell_count(config, &cells);
  if (print) {
    char *text = nullptr;
    if (hp_config_to_json(config, &text) == HP_OK) {
      std::fputs(text, stdout);
      hp_string_free(text);
    }
  }
  std::fprintf(stderr, "%s: valid, %zu cells\n", config_path.c_str(), cells);
  hp_config_free(config);
  return kExitOk;
}

int cmd_plot(const std::string &summary, const std::vector<std::string> &csvs, const std::vector<std::string> &labels,
             const std::string &out) {
  hp_status s;
  if (!summary.empty()) {
    s = hp_plot_summary(summary.c_str(), out.c_str());
  } else {
    if (!labels.empty() && labels.size() != csvs.size()) {
      std::fprintf(stderr, "byzbench: give one --label per --csv\n");
      return kExitConfig;
    }
    std::vector<const char *> paths, names;
    for (const auto &c : csvs) paths.push_back(c.c_str());
    for (const auto &l : labels) names.push_back(l.c_str());
    s = hp_plot_rounds(paths.data(), labels.empty() ? nullptr : names.data(), paths.size(), out.c_str());
  }
  if (s != HP_OK) return report(s, "plot");
  std::printf("%s\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Byzantine-robust federated learning benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  size_t parallel = 1;
  bool resume = false, quiet = false;
  auto *run = app.add_subcommand("run", "run every cell of a sweep config");
  run->add_option("--config", config_path, "sweep config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (default: BYZ_BENCH_OUT, then the config)");
  run->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--resume", resume, "skip cells already finished in the output directory");
  run->add_flag("-q,--quiet", quiet, "no per-cell progress");

  std::string validate_path;
  bool print = false;
  auto *validate = app.add_subcommand("validate", "parse and check a config without running it");
  validate->add_option("--config", validate_path, "sweep config (JSON)")->required()->check(CLI::ExistingFile);
  validate->add_flag("--print", print, "print the fully defaulted config");

  std::string summary, plot_out;
  std::vector<std::string> csvs, labels;
  auto *plot = app.add_subcommand("plot", "render an SVG accuracy chart");
  auto *summary_opt = plot->add_option("--summary", summary, "summary.json: max accuracy against ratio")
                          ->check(CLI::ExistingFile);
  auto *csv_opt = plot->add_option("--csv", csvs, "round CSV: accuracy against round (repeatable)")
                      ->check(CLI::ExistingFile);
  plot->add_option("--label", labels, "legend label per --csv (repeatable)");
  plot->add_option("--out", plot_out, "SVG output path")->required();
  summary_opt->excludes(csv_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(config_path, out_dir, parallel, resume, quiet);
  if (*validate) return cmd_validate(validate_path, print);
  if (summary.empty() && csvs.empty()) {
    std::fprintf(stderr, "byzbench: plot needs --summary or --csv\n");
    return kExitConfig;
  }
  return cmd_plot(summary, csvs, labels, plot_out);
}
