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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hplus/harness.hpp"

namespace hplus {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path &path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path.string(), "cannot open for writing");
  return out;
}

void close_checked(std::ofstream &out, const std::filesystem::path &path) {
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, path.string(), "write failed");
}

std::string escape_xml(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

double filter_precision(const ClientSet &selected, const ByzantineMask &byzantine) {
  if (selected.empty()) return 1.0;
  std::size_t honest = 0;
  for (auto m : selected)
    if (!byzantine.contains(m)) ++honest;
  return static_cast<double>(honest) / static_cast<double>(selected.size());
}

double filter_recall(const ClientSet &selected, const ByzantineMask &byzantine, std::size_t num_clients) {
  const std::size_t total_honest = num_clients - byzantine.count();
  if (total_honest == 0) return 1.0;
  std::size_t honest = 0;
  for (auto m : selected)
    if (!byzantine.contains(m)) ++honest;
  return static_cast<double>(honest) / static_cast<double>(total_honest);
}

SummaryRow summarize(const SweepCell &cell, const RunResult &result) {
  SummaryRow row;
  row.fingerprint = cell.fingerprint;
  row.status = result.diverged ? "diverged" : "ok";
  row.message = result.divergence_message;
  row.attack = cell.attack_label;
  row.method = cell.spec.method.label();
  row.byzantine_ratio = cell.spec.byzantine_ratio;
  row.realized_ratio = result.byzantine.ratio;
  row.num_byzantine = result.byzantine.count();
  row.beta = cell.spec.beta;
  row.seed = cell.spec.seed;
  row.rounds_completed = result.records.size();
  row.initial_accuracy = result.initial_accuracy;
  row.max_accuracy = result.max_accuracy;
  row.final_accuracy = result.final_accuracy;

  double precision = 0.0;
  double recall = 0.0;
  for (const auto &r : result.records) {
    if (r.empty_intersection) ++row.empty_intersections;
    precision += filter_precision(r.selected, result.byzantine);
    recall += filter_recall(r.selected, result.byzantine, result.num_clients);
    row.wall_ms += r.wall_ms;
  }
  if (!result.records.empty()) {
    row.filter_precision = precision / static_cast<double>(result.records.size());
    row.filter_recall = recall / static_cast<double>(result.records.size());
  }
  return row;
}

void write_round_csv(std::span<const RoundRecord> records, const ByzantineMask &byzantine, std::size_t num_clients,
                     const std::filesystem::path &path) {
  auto out = open_for_write(path);
  out << "round,train_loss,test_acc,n_selected,empty_intersection,filter_precision,filter_recall,wall_ms\n";
  for (const auto &r : records) {
    out << r.round << ',' << fmt(r.train_loss) << ',' << (r.test_accuracy ? fmt(*r.test_accuracy) : "") << ','
        << r.selected.size() << ',' << (r.empty_intersection ? 1 : 0) << ','
        << fmt(filter_precision(r.selected, byzantine)) << ',' << fmt(filter_recall(r.selected, byzantine, num_clients))
        << ',' << fmt(r.wall_ms) << '\n';
  }
  close_checked(out, path);
}

namespace {

json row_json(const SummaryRow &r) {
  json j;
  j["fingerprint"] = r.fingerprint;
  j["status"] = r.status;
  j["message"] = r.message;
  j["attack"] = r.attack;
  j["method"] = r.method;
  j["byzantine_ratio"] = r.byzantine_ratio;
  j["realized_ratio"] = r.realized_ratio;
  j["num_byzantine"] = r.num_byzantine;
  j["beta"] = r.beta;
  j["seed"] = r.seed;
  j["rounds_completed"] = r.rounds_completed;
  j["initial_accuracy"] = r.initial_accuracy;
  j["max_accuracy"] = r.max_accuracy;
  j["final_accuracy"] = r.final_accuracy ? json(*r.final_accuracy) : json(nullptr);
  j["empty_intersections"] = r.empty_intersections;
  j["filter_precision"] = r.filter_precision;
  j["filter_recall"] = r.filter_recall;
  j["wall_ms"] = r.wall_ms;
  return j;
}

SummaryRow row_from(const json &j) {
  try {
    SummaryRow r;
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.message = j.at("message").get<std::string>();
    r.attack = j.at("attack").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.byzantine_ratio = j.at("byzantine_ratio").get<double>();
    r.realized_ratio = j.at("realized_ratio").get<double>();
    r.num_byzantine = j.at("num_byzantine").get<std::size_t>();
    r.beta = j.at("beta").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.rounds_completed = j.at("rounds_completed").get<std::size_t>();
    r.initial_accuracy = j.at("initial_accuracy").get<double>();
    r.max_accuracy = j.at("max_accuracy").get<double>();
    if (!j.at("final_accuracy").is_null()) r.final_accuracy = j.at("final_accuracy").get<double>();
    r.empty_intersections = j.at("empty_intersections").get<std::size_t>();
    r.filter_precision = j.at("filter_precision").get<double>();
    r.filter_recall = j.at("filter_recall").get<double>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed summary row: ") + e.what());
  }
}

}  // namespace

std::string summary_row_to_json(const SummaryRow &row) { return row_json(row).dump(); }

SummaryRow summary_row_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed summary row: ") + e.what());
  }
  return row_from(j);
}

void write_summary_json(std::span<const SummaryRow> rows, const std::filesystem::path &path) {
  json j = json::array();
  for (const auto &r : rows) j.push_back(row_json(r));
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

std::vector<SummaryRow> read_summary_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path.string(), "cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::kFormatError, path.string() + ": expected an array of rows");
  std::vector<SummaryRow> rows;
  for (const auto &item : j) rows.push_back(row_from(item));
  return rows;
}

// ---------------------------------------------------------------------------
// Plots

std::vector<PlotSeries> ratio_series(std::span<const SummaryRow> rows) {
  // label -> ratio -> (sum, count)
  std::map<std::string, std::map<double, std::pair<double, std::size_t>>> groups;
  std::vector<std::string> order;
  for (const auto &r : rows) {
    if (r.status == "failed") continue;
    if (!groups.count(r.method)) order.push_back(r.method);
    auto &cell = groups[r.method][r.byzantine_ratio];
    cell.first += r.max_accuracy;
    ++cell.second;
  }
  std::vector<PlotSeries> series;
  for (const auto &label : order) {
    PlotSeries s{label, {}};
    for (const auto &[ratio, acc] : groups[label]) s.points.emplace_back(ratio, acc.first / static_cast<double>(acc.second));
    series.push_back(std::move(s));
  }
  return series;
}

PlotSeries round_series(const std::filesystem::path &csv, const std::string &label) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::kIoError, csv.string(), "cannot open");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kFormatError, csv.string() + ": missing header");
  PlotSeries s{label, {}};
  while (std::getline(in, line)) {
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) throw Error(ErrorCode::kFormatError, csv.string() + ": expected 8 columns");
    if (fields[2].empty()) continue;
    s.points.emplace_back(std::stod(fields[0]), std::stod(fields[2]));
  }
  return s;
}

void emit_accuracy_plot(std::span<const PlotSeries> series, const std::filesystem::path &path,
                        const std::string &x_label, const std::string &y_label) {
  std::size_t total_points = 0;
  for (const auto &s : series) total_points += s.points.size();
  if (series.empty() || total_points == 0) throw Error(ErrorCode::kEmptyPlot, "nothing to plot");

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_top = 0.0;
  for (const auto &s : series)
    for (auto [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_top = std::max(y_top, y);
    }
  y_top *= 1.05;
  if (!(y_top > 0.0)) y_top = 1.0;
  if (!(x_max > x_min)) {
    x_min -= 0.5;
    x_max += 0.5;
  }

  constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 170, kTop = 20, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - y / y_top * plot_h; };
  static const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g class=\"axes\" stroke=\"black\">\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h << "\"/>\n";
  svg << "</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = y_top * i / 5.0;
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    char ybuf[32], xbuf[32];
    std::snprintf(ybuf, sizeof(ybuf), "%.3g", yv);
    std::snprintf(xbuf, sizeof(xbuf), "%.3g", xv);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << ybuf << "</text>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kTop + plot_h + 16 << "\" text-anchor=\"middle\">" << xbuf
        << "</text>\n";
  }
  svg << "<text class=\"x-label\" x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  svg << "<text class=\"y-label\" transform=\"translate(18," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";
  svg << "<text class=\"y-range\" visibility=\"hidden\">0 " << fmt(y_top) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto *color = kColors[i % 10];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      if (k) svg << ' ';
      svg << px(series[i].points[k].first) << ',' << py(series[i].points[k].second);
    }
    svg << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    svg << "<g class=\"legend\"><line x1=\"" << kLeft + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << kLeft + plot_w + 36 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[i].label)
        << "</text></g>\n";
  }
  svg << "</svg>\n";

  auto out = open_for_write(path);
  out << svg.str();
  close_checked(out, path);
}

}  // namespace hplus
