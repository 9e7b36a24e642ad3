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

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "hplus/harness.hpp"

namespace hplus {

namespace fs = std::filesystem;

bool SweepResult::any_failed() const {
  for (const auto &r : rows)
    if (r.status == "failed") return true;
  return false;
}

fs::path resolve_output_dir(const fs::path &configured) {
  if (const char *env = std::getenv("BYZ_BENCH_OUT"); env && *env) return env;
  return configured;
}

namespace {

fs::path round_csv_path(const fs::path &dir, const std::string &fp) { return dir / "rounds" / (fp + ".csv"); }

// Rows from an earlier run, last entry per fingerprint wins. A truncated
// final line from a killed sweep is ignored.
std::map<std::string, SummaryRow> load_previous_rows(const fs::path &jsonl) {
  std::map<std::string, SummaryRow> rows;
  std::ifstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto row = summary_row_from_json(line);
      rows[row.fingerprint] = std::move(row);
    } catch (const Error &) {
    }
  }
  return rows;
}

SummaryRow failed_row(const SweepCell &cell, const std::string &message) {
  SummaryRow row;
  row.fingerprint = cell.fingerprint;
  row.status = "failed";
  row.message = message;
  row.attack = cell.attack_label;
  row.method = cell.spec.method.label();
  row.byzantine_ratio = cell.spec.byzantine_ratio;
  row.beta = cell.spec.beta;
  row.seed = cell.spec.seed;
  return row;
}

SummaryRow run_cell(const SweepCell &cell, const fs::path &dir) {
  try {
    const auto result = run_experiment(cell.spec);
    write_round_csv(result.records, result.byzantine, result.num_clients, round_csv_path(dir, cell.fingerprint));
    return summarize(cell, result);
  } catch (const std::exception &e) {
    return failed_row(cell, e.what());
  }
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig &config, const SweepOptions &options) {
  const auto cells = expand_cells(config);
  SweepResult result;
  result.output_dir = options.output_dir ? *options.output_dir : resolve_output_dir(config.output_dir);
  const auto &dir = result.output_dir;

  std::error_code ec;
  fs::create_directories(dir / "rounds", ec);
  if (ec) throw Error(ErrorCode::kIoError, dir.string(), ec.message());
  {
    std::ofstream cfg(dir / "config.json", std::ios::binary | std::ios::trunc);
    if (!cfg) throw Error(ErrorCode::kIoError, (dir / "config.json").string(), "cannot open for writing");
    cfg << serialize_config(config);
  }

  const auto jsonl_path = dir / "rows.jsonl";
  std::map<std::string, SummaryRow> previous;
  if (options.resume) previous = load_previous_rows(jsonl_path);
  std::ofstream jsonl(jsonl_path, std::ios::binary | (options.resume ? std::ios::app : std::ios::trunc));
  if (!jsonl) throw Error(ErrorCode::kIoError, jsonl_path.string(), "cannot open for writing");

  result.rows.resize(cells.size());
  std::vector<bool> reused(cells.size(), false);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto it = previous.find(cells[i].fingerprint);
    if (it != previous.end() && it->second.status != "failed" &&
        fs::exists(round_csv_path(dir, cells[i].fingerprint))) {
      result.rows[i] = it->second;
      reused[i] = true;
      ++result.reused;
    }
  }

  std::mutex writer;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      if (reused[i]) continue;
      auto row = run_cell(cells[i], dir);
      std::lock_guard<std::mutex> lock(writer);
      jsonl << summary_row_to_json(row) << '\n';
      jsonl.flush();
      if (options.on_row) options.on_row(row);
      result.rows[i] = std::move(row);
      ++result.computed;
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallelism, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }

  write_summary_json(result.rows, dir / "summary.json");
  return result;
}

}  // namespace hplus
