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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hplus/harness.hpp"

namespace hplus {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &reason) {
  throw Error(ErrorCode::kConfigError, path, reason);
}

std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string &path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

// Strict view of a JSON object: every key must be consumed before finish().
class ObjectReader {
 public:
  ObjectReader(const json &node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string &key) const { return node_.contains(key); }
  const std::string &path() const { return path_; }
  std::string at(const std::string &key) const { return join(path_, key); }

  const json *get(const std::string &key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json &require(const std::string &key) {
    const json *v = get(key);
    if (!v) fail(at(key), "required field is missing");
    return *v;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

  double number(const std::string &key, double fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    return as_number(*v, at(key));
  }

  std::size_t count(const std::string &key, std::size_t fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    return as_count(*v, at(key));
  }

  bool boolean(const std::string &key, bool fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(at(key), "expected a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string &key, const std::string &fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    return as_string(*v, at(key));
  }

  static double as_number(const json &v, const std::string &path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    }
    fail(path, "expected a number");
  }

  static std::size_t as_count(const json &v, const std::string &path) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) fail(path, "must be >= 0");
    fail(path, "expected a non-negative integer");
  }

  static std::string as_string(const json &v, const std::string &path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const json &node_;
  std::string path_;
  std::set<std::string> seen_;
};

// Accepts a scalar or an array of scalars.
template <typename T, typename F>
std::vector<T> scalar_list(const json &v, const std::string &path, F convert) {
  std::vector<T> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], join(path, i)));
  } else {
    out.push_back(convert(v, path));
  }
  if (out.empty()) fail(path, "list must not be empty");
  return out;
}

DataSpec parse_dataset(const json &node, const std::string &path) {
  ObjectReader r(node, path);
  DataSpec d;
  const auto kind = r.string("kind", "synthetic");
  if (kind == "synthetic") {
    d.kind = DataSpec::Kind::kSynthetic;
    d.num_samples = r.count("samples", d.num_samples);
    d.dim = r.count("dim", d.dim);
    d.num_classes = r.count("classes", d.num_classes);
    d.class_separation = r.number("class_separation", d.class_separation);
  } else if (kind == "idx") {
    d.kind = DataSpec::Kind::kIdx;
    d.train_images = ObjectReader::as_string(r.require("train_images"), r.at("train_images"));
    d.train_labels = ObjectReader::as_string(r.require("train_labels"), r.at("train_labels"));
    d.test_images = r.string("test_images", "");
    d.test_labels = r.string("test_labels", "");
    if (d.test_images.empty() != d.test_labels.empty())
      fail(r.at("test_images"), "test_images and test_labels must be given together");
  } else {
    fail(r.at("kind"), "expected \"synthetic\" or \"idx\"");
  }
  d.test_fraction = r.number("test_fraction", d.test_fraction);
  r.finish();
  return d;
}

AttackSpec parse_attack(const json &node, const std::string &path) {
  AttackSpec a;
  if (node.is_string()) {
    const auto kind = parse_attack_kind(node.get<std::string>());
    if (!kind) fail(path, "unknown attack '" + node.get<std::string>() + "'");
    a.kind = *kind;
    return a;
  }
  ObjectReader r(node, path);
  const auto name = ObjectReader::as_string(r.require("kind"), r.at("kind"));
  const auto kind = parse_attack_kind(name);
  if (!kind) fail(r.at("kind"), "unknown attack '" + name + "'");
  a.kind = *kind;
  a.gaussian_variance = r.number("variance", a.gaussian_variance);
  a.lie_coefficient = r.number("coefficient", a.lie_coefficient);
  if (const json *q = r.get("q")) a.foe_coefficient = ObjectReader::as_number(*q, r.at("q"));
  r.finish();
  return a;
}

MethodSpec method_from_label(const std::string &label, const std::string &path) {
  MethodSpec m;
  if (label == "H+Clean data" || label == "H+Clean") {
    m.kind = MethodSpec::Kind::kHPlusClean;
    return m;
  }
  std::string rule = label;
  if (label.rfind("H+", 0) == 0) {
    m.kind = MethodSpec::Kind::kHPlusAggregator;
    rule = label.substr(2);
  }
  const auto kind = parse_aggregator_kind(rule);
  if (!kind) fail(path, "unknown method '" + label + "'");
  m.aggregator.kind = *kind;
  return m;
}

MethodSpec parse_method(const json &node, const std::string &path) {
  if (node.is_string()) return method_from_label(node.get<std::string>(), path);
  ObjectReader r(node, path);
  MethodSpec m;
  const auto kind = r.string("kind", "baseline");
  if (kind == "baseline")
    m.kind = MethodSpec::Kind::kBaseline;
  else if (kind == "hplus")
    m.kind = MethodSpec::Kind::kHPlusAggregator;
  else if (kind == "hplus_clean")
    m.kind = MethodSpec::Kind::kHPlusClean;
  else
    fail(r.at("kind"), "expected \"baseline\", \"hplus\" or \"hplus_clean\"");

  if (const json *agg = r.get("aggregator")) {
    const auto name = ObjectReader::as_string(*agg, r.at("aggregator"));
    const auto parsed = parse_aggregator_kind(name);
    if (!parsed) fail(r.at("aggregator"), "unknown aggregator '" + name + "'");
    m.aggregator.kind = *parsed;
  } else if (m.kind != MethodSpec::Kind::kHPlusClean) {
    fail(r.at("aggregator"), "required field is missing");
  }
  auto &a = m.aggregator;
  if (const json *f = r.get("krum_f")) a.krum_f = ObjectReader::as_count(*f, r.at("krum_f"));
  a.gm_tolerance = r.number("gm_tolerance", a.gm_tolerance);
  a.gm_max_iter = r.count("gm_max_iter", a.gm_max_iter);
  a.mca_tolerance = r.number("mca_tolerance", a.mca_tolerance);
  a.mca_max_iter = r.count("mca_max_iter", a.mca_max_iter);
  if (const json *bw = r.get("mca_bandwidth")) {
    if (bw->is_string() && bw->get<std::string>() == "adaptive")
      a.mca_bandwidth.reset();
    else
      a.mca_bandwidth = ObjectReader::as_number(*bw, r.at("mca_bandwidth"));
  }
  a.cclip_radius = r.number("cclip_radius", a.cclip_radius);
  a.cclip_iterations = r.count("cclip_iterations", a.cclip_iterations);
  r.finish();
  return m;
}

CleanDataSpec parse_clean(const json &node, const std::string &path) {
  ObjectReader r(node, path);
  CleanDataSpec c;
  const auto kind = r.string("kind", "none");
  if (kind == "none")
    c.kind = CleanDataSpec::Kind::kNone;
  else if (kind == "server")
    c.kind = CleanDataSpec::Kind::kServerShard;
  else if (kind == "trusted")
    c.kind = CleanDataSpec::Kind::kTrustedClients;
  else
    fail(r.at("kind"), "expected \"none\", \"server\" or \"trusted\"");
  c.fraction = r.number("fraction", c.fraction);
  if (const json *t = r.get("trusted")) {
    if (!t->is_array()) fail(r.at("trusted"), "expected an array of client ids");
    for (std::size_t i = 0; i < t->size(); ++i) c.trusted.push_back(ObjectReader::as_count((*t)[i], join(r.at("trusted"), i)));
  }
  r.finish();
  return c;
}

HPlusSettings parse_hplus(const json &node, const std::string &path) {
  ObjectReader r(node, path);
  HPlusSettings h;
  h.passes = r.count("K", h.passes);
  h.segment_length = r.count("r", h.segment_length);
  if (const json *n = r.get("N")) {
    if (n->is_number()) {
      h.keep.kind = SelectionRule::Kind::kFixed;
      h.keep.value = ObjectReader::as_count(*n, r.at("N"));
    } else if (n->is_string()) {
      try {
        h.keep = SelectionRule::parse(n->get<std::string>());
      } catch (const Error &e) {
        fail(r.at("N"), e.detail());
      }
    } else {
      fail(r.at("N"), "expected an integer or a rule such as \"M-B\"");
    }
  }
  h.penalty_weight = r.number("rho", h.penalty_weight);
  h.norm_pivot = r.number("tau", h.norm_pivot);
  r.finish();
  return h;
}

ModelKind parse_model_kind(const std::string &name, const std::string &path) {
  if (name == "softmax") return ModelKind::kSoftmaxRegression;
  if (name == "mlp1") return ModelKind::kMLP1;
  fail(path, "expected \"softmax\" or \"mlp1\"");
}

std::string model_name(ModelKind kind) { return kind == ModelKind::kMLP1 ? "mlp1" : "softmax"; }

std::string clean_name(CleanDataSpec::Kind kind) {
  switch (kind) {
    case CleanDataSpec::Kind::kNone: return "none";
    case CleanDataSpec::Kind::kServerShard: return "server";
    case CleanDataSpec::Kind::kTrustedClients: return "trusted";
  }
  return "none";
}

std::string method_kind_name(MethodSpec::Kind kind) {
  switch (kind) {
    case MethodSpec::Kind::kBaseline: return "baseline";
    case MethodSpec::Kind::kHPlusAggregator: return "hplus";
    case MethodSpec::Kind::kHPlusClean: return "hplus_clean";
  }
  return "baseline";
}

json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

json dataset_json(const DataSpec &d) {
  json j;
  if (d.kind == DataSpec::Kind::kSynthetic) {
    j["kind"] = "synthetic";
    j["samples"] = d.num_samples;
    j["dim"] = d.dim;
    j["classes"] = d.num_classes;
    j["class_separation"] = d.class_separation;
  } else {
    j["kind"] = "idx";
    j["train_images"] = d.train_images.string();
    j["train_labels"] = d.train_labels.string();
    if (!d.test_images.empty()) {
      j["test_images"] = d.test_images.string();
      j["test_labels"] = d.test_labels.string();
    }
  }
  j["test_fraction"] = d.test_fraction;
  return j;
}

json attack_json(const AttackSpec &a) {
  json j;
  j["kind"] = std::string(attack_name(a.kind));
  j["variance"] = a.gaussian_variance;
  j["coefficient"] = a.lie_coefficient;
  if (a.foe_coefficient) j["q"] = *a.foe_coefficient;
  return j;
}

json method_json(const MethodSpec &m) {
  json j;
  j["kind"] = method_kind_name(m.kind);
  const auto &a = m.aggregator;
  j["aggregator"] = std::string(aggregator_name(a.kind));
  if (a.krum_f) j["krum_f"] = *a.krum_f;
  j["gm_tolerance"] = a.gm_tolerance;
  j["gm_max_iter"] = a.gm_max_iter;
  j["mca_tolerance"] = a.mca_tolerance;
  j["mca_max_iter"] = a.mca_max_iter;
  j["mca_bandwidth"] = a.mca_bandwidth ? number_json(*a.mca_bandwidth) : json("adaptive");
  j["cclip_radius"] = number_json(a.cclip_radius);
  j["cclip_iterations"] = a.cclip_iterations;
  return j;
}

json clean_json(const CleanDataSpec &c) {
  json j;
  j["kind"] = clean_name(c.kind);
  j["fraction"] = c.fraction;
  j["trusted"] = c.trusted;
  return j;
}

json hplus_json(const HPlusSettings &h) {
  json j;
  j["K"] = h.passes;
  j["r"] = h.segment_length;
  if (h.keep.kind == SelectionRule::Kind::kFixed)
    j["N"] = h.keep.value;
  else
    j["N"] = h.keep.to_string();
  j["rho"] = h.penalty_weight;
  j["tau"] = h.norm_pivot;
  return j;
}

json lr_json(const LRSchedule &lr) { return json{{"eta0", lr.initial}, {"decay", lr.decay}}; }

void check(bool ok, const std::string &path, const std::string &reason) {
  if (!ok) fail(path, reason);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (data.kind == DataSpec::Kind::kSynthetic) {
    check(data.num_classes >= 1, "dataset.classes", "must be >= 1");
    check(data.dim >= 1, "dataset.dim", "must be >= 1");
    check(data.num_samples >= data.num_classes, "dataset.samples", "must be >= classes");
    check(data.class_separation >= 0.0 && std::isfinite(data.class_separation), "dataset.class_separation",
          "must be finite and >= 0");
  }
  check(data.test_fraction > 0.0 && data.test_fraction < 1.0, "dataset.test_fraction", "must lie in (0, 1)");
  check(model != ModelKind::kMLP1 || hidden >= 1, "model.hidden", "must be >= 1");
  check(num_clients >= 1, "clients", "must be >= 1");
  check(batch_size >= 1, "batch_size", "must be >= 1");
  check(rounds >= 1, "rounds", "must be >= 1");
  check(eval_interval >= 1, "eval_interval", "must be >= 1");
  for (std::size_t i = 0; i < betas.size(); ++i)
    check(betas[i] > 0.0 && std::isfinite(betas[i]), join("beta", i), "must be finite and > 0");
  for (std::size_t i = 0; i < byzantine_ratios.size(); ++i)
    check(byzantine_ratios[i] >= 0.0 && byzantine_ratios[i] < 1.0, join("byzantine_ratio", i), "must lie in [0, 1)");
  check(!betas.empty(), "beta", "must not be empty");
  check(!byzantine_ratios.empty(), "byzantine_ratio", "must not be empty");
  check(!attacks.empty(), "attacks", "must not be empty");
  check(!methods.empty(), "methods", "must not be empty");
  check(!seeds.empty(), "seeds", "must not be empty");

  for (std::size_t i = 0; i < attacks.size(); ++i) {
    const auto &a = attacks[i];
    const auto p = join("attacks", i);
    check(a.gaussian_variance >= 0.0 && std::isfinite(a.gaussian_variance), p + ".variance", "must be finite and >= 0");
    check(std::isfinite(a.lie_coefficient), p + ".coefficient", "must be finite");
    check(!a.foe_coefficient || std::isfinite(*a.foe_coefficient), p + ".q", "must be finite");
  }

  bool needs_server = false;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto &m = methods[i];
    const auto p = join("methods", i);
    const auto &a = m.aggregator;
    check(a.gm_tolerance > 0.0, p + ".gm_tolerance", "must be > 0");
    check(a.gm_max_iter >= 1, p + ".gm_max_iter", "must be >= 1");
    check(a.mca_tolerance > 0.0, p + ".mca_tolerance", "must be > 0");
    check(a.mca_max_iter >= 1, p + ".mca_max_iter", "must be >= 1");
    check(!a.mca_bandwidth || *a.mca_bandwidth > 0.0, p + ".mca_bandwidth", "must be > 0");
    check(a.cclip_radius > 0.0, p + ".cclip_radius", "must be > 0");
    check(a.cclip_iterations >= 1, p + ".cclip_iterations", "must be >= 1");
    if (a.krum_f) check(num_clients >= *a.krum_f + 3, p + ".krum_f", "Krum needs clients >= f + 3");
    if (m.kind == MethodSpec::Kind::kHPlusClean) {
      check(clean.kind != CleanDataSpec::Kind::kNone, p, "H+Clean data needs clean_data");
    } else if (a.kind == AggregatorKind::kFLTrust) {
      needs_server = true;
    }
  }
  if (needs_server) check(clean.kind == CleanDataSpec::Kind::kServerShard, "clean_data.kind", "FLTrust needs a server shard");
  if (clean.kind == CleanDataSpec::Kind::kServerShard)
    check(clean.fraction > 0.0 && clean.fraction < 1.0, "clean_data.fraction", "must lie in (0, 1)");
  if (clean.kind == CleanDataSpec::Kind::kTrustedClients) {
    check(!clean.trusted.empty(), "clean_data.trusted", "must not be empty");
    for (std::size_t i = 0; i < clean.trusted.size(); ++i)
      check(clean.trusted[i] < num_clients, join("clean_data.trusted", i), "client id out of range");
  }

  check(hplus.passes >= 1, "hplus.K", "must be >= 1");
  check(hplus.segment_length >= 1, "hplus.r", "must be >= 1");
  if (hplus.keep.kind == SelectionRule::Kind::kFixed)
    check(hplus.keep.value >= 1 && hplus.keep.value <= num_clients, "hplus.N", "must lie in [1, clients]");
  check(hplus.penalty_weight >= 0.0 && std::isfinite(hplus.penalty_weight), "hplus.rho", "must be finite and >= 0");
  check(hplus.norm_pivot > 0.0 && std::isfinite(hplus.norm_pivot), "hplus.tau", "must be finite and > 0");
  check(lr.initial > 0.0 && std::isfinite(lr.initial), "lr.eta0", "must be finite and > 0");
  check(lr.decay >= 0.0 && std::isfinite(lr.decay), "lr.decay", "must be finite and >= 0");
  check(!output_dir.empty(), "output_dir", "must not be empty");
}

ExperimentConfig parse_config_text(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    fail("<root>", std::string("invalid JSON: ") + e.what());
  }

  ExperimentConfig c;
  ObjectReader r(root, "");
  c.data = parse_dataset(r.require("dataset"), "dataset");
  if (const json *m = r.get("model")) {
    if (m->is_string()) {
      c.model = parse_model_kind(m->get<std::string>(), "model");
    } else {
      ObjectReader mr(*m, "model");
      c.model = parse_model_kind(mr.string("kind", "softmax"), "model.kind");
      c.hidden = mr.count("hidden", c.hidden);
      mr.finish();
    }
  }
  c.num_clients = r.count("clients", c.num_clients);
  c.batch_size = r.count("batch_size", c.batch_size);
  c.rounds = r.count("rounds", c.rounds);
  if (const json *v = r.get("beta")) c.betas = scalar_list<double>(*v, "beta", ObjectReader::as_number);
  if (const json *v = r.get("byzantine_ratio"))
    c.byzantine_ratios = scalar_list<double>(*v, "byzantine_ratio", ObjectReader::as_number);
  if (const json *v = r.get("attacks")) c.attacks = scalar_list<AttackSpec>(*v, "attacks", parse_attack);
  if (const json *v = r.get("methods")) c.methods = scalar_list<MethodSpec>(*v, "methods", parse_method);
  if (const json *v = r.get("clean_data")) c.clean = parse_clean(*v, "clean_data");
  if (const json *v = r.get("hplus")) c.hplus = parse_hplus(*v, "hplus");
  if (const json *v = r.get("lr")) {
    ObjectReader lr(*v, "lr");
    c.lr.initial = lr.number("eta0", c.lr.initial);
    c.lr.decay = lr.number("decay", c.lr.decay);
    lr.finish();
  }
  if (const json *v = r.get("seeds"))
    c.seeds = scalar_list<std::uint64_t>(*v, "seeds", [](const json &s, const std::string &p) {
      return static_cast<std::uint64_t>(ObjectReader::as_count(s, p));
    });
  c.eval_interval = r.count("eval_interval", c.eval_interval);
  c.min_partition_size = r.count("min_partition_size", c.min_partition_size);
  c.record_wall_time = r.boolean("record_wall_time", c.record_wall_time);
  c.output_dir = r.string("output_dir", c.output_dir.string());
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string serialize_config(const ExperimentConfig &c) {
  json j;
  j["dataset"] = dataset_json(c.data);
  j["model"] = json{{"kind", model_name(c.model)}, {"hidden", c.hidden}};
  j["clients"] = c.num_clients;
  j["batch_size"] = c.batch_size;
  j["rounds"] = c.rounds;
  j["beta"] = c.betas;
  j["byzantine_ratio"] = c.byzantine_ratios;
  j["attacks"] = json::array();
  for (const auto &a : c.attacks) j["attacks"].push_back(attack_json(a));
  j["methods"] = json::array();
  for (const auto &m : c.methods) j["methods"].push_back(method_json(m));
  j["clean_data"] = clean_json(c.clean);
  j["hplus"] = hplus_json(c.hplus);
  j["lr"] = lr_json(c.lr);
  j["seeds"] = c.seeds;
  j["eval_interval"] = c.eval_interval;
  j["min_partition_size"] = c.min_partition_size;
  j["record_wall_time"] = c.record_wall_time;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Cells

std::string canonical_json(const RunSpec &s) {
  json j;
  j["dataset"] = dataset_json(s.data);
  j["model"] = json{{"kind", model_name(s.model)}, {"hidden", s.model == ModelKind::kMLP1 ? s.hidden : 0}};
  j["clients"] = s.num_clients;
  j["batch_size"] = s.batch_size;
  j["rounds"] = s.rounds;
  j["beta"] = s.beta;
  j["byzantine_ratio"] = s.byzantine_ratio;
  j["attack"] = s.byzantine_ratio > 0.0 ? attack_json(s.attack) : json(nullptr);
  j["method"] = method_json(s.method);
  j["clean_data"] = clean_json(s.clean);
  j["hplus"] = hplus_json(s.hplus);
  j["lr"] = lr_json(s.lr);
  j["seed"] = s.seed;
  j["eval_interval"] = s.eval_interval;
  j["min_partition_size"] = s.min_partition_size;
  j["record_wall_time"] = s.record_wall_time;
  return j.dump();  // object keys are emitted sorted
}

std::string fingerprint(const RunSpec &spec) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_string(canonical_json(spec))));
  return buf;
}

std::vector<SweepCell> expand_cells(const ExperimentConfig &config) {
  config.validate();
  std::vector<SweepCell> cells;
  for (double ratio : config.byzantine_ratios) {
    // The control has no attacker, so the attack axis collapses.
    const std::size_t attack_count = ratio > 0.0 ? config.attacks.size() : 1;
    for (std::size_t a = 0; a < attack_count; ++a) {
      for (const auto &method : config.methods) {
        for (double beta : config.betas) {
          for (auto seed : config.seeds) {
            SweepCell cell;
            auto &s = cell.spec;
            s.data = config.data;
            s.model = config.model;
            s.hidden = config.hidden;
            s.num_clients = config.num_clients;
            s.batch_size = config.batch_size;
            s.rounds = config.rounds;
            s.beta = beta;
            s.byzantine_ratio = ratio;
            s.attack = config.attacks[a];
            s.method = method;
            s.clean = config.clean;
            s.hplus = config.hplus;
            s.lr = config.lr;
            s.seed = seed;
            s.eval_interval = config.eval_interval;
            s.min_partition_size = config.min_partition_size;
            s.record_wall_time = config.record_wall_time;
            cell.attack_label = ratio > 0.0 ? std::string(attack_name(s.attack.kind)) : "none";
            cell.fingerprint = fingerprint(s);
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

}  // namespace hplus
