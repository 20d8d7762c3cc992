// Copyright 2026 The qi-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qisim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qisim/error.hpp"

namespace qisim {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"source", {"ideal", "visibility_hv", "visibility_ad"}},
      {"detector",
       {"ideal", "pair_rate", "noise_rate", "dark_rate", "coincidence_window",
        "integration_time", "repeats"}},
      {"object", {"variant", "etas"}},
      {"noise", {"eta", "snrs"}},
      {"depolarization", {"mode", "values", "eta"}},
      {"attenuation", {"alpha_db_per_km", "distances"}},
      {"angles", {"units", "alpha", "alpha_prime", "beta", "beta_prime"}},
      {"tags",
       {"format", "window_ps", "eta", "variant", "mode", "setting",
        "include_reference"}},
      {"state", {"kind", "visibility", "theta", "p"}},
      {"output", {"directory"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

bool parse_double(std::string_view text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

void check_schema(const pt::ptree& tree) {
  for (const auto& [name, node] : tree) {
    const bool is_section = name == "channels" || schema().contains(name);
    if (node.empty() && !is_section) {
      if (name != "seed") throw ConfigError(name, "unknown top-level key");
      continue;
    }
    if (name == "channels") continue;
    const auto it = schema().find(name);
    if (it == schema().end()) throw ConfigError(name, "unknown section");
    for (const auto& [key, leaf] : node) {
      if (!it->second.contains(key)) {
        throw ConfigError(name + "." + key, "unknown key");
      }
      if (!leaf.empty()) throw ConfigError(name + "." + key, "nested value");
    }
  }
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& path) const {
    return bool(tree_.get_optional<std::string>(path));
  }

  std::string text(const std::string& path, std::string fallback) const {
    const auto v = tree_.get_optional<std::string>(path);
    return v ? trim(*v) : fallback;
  }

  double number(const std::string& path, double fallback) const {
    const auto v = tree_.get_optional<std::string>(path);
    if (!v) return fallback;
    double out = 0.0;
    if (!parse_double(*v, out)) throw ConfigError(path, "'" + *v + "' is not a number");
    return out;
  }

  std::uint64_t integer(const std::string& path, std::uint64_t fallback) const {
    const auto v = tree_.get_optional<std::string>(path);
    if (!v) return fallback;
    const std::string t = trim(*v);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError(path, "'" + *v + "' is not a non-negative integer");
    }
    return out;
  }

  bool boolean(const std::string& path, bool fallback) const {
    const auto v = tree_.get_optional<std::string>(path);
    if (!v) return fallback;
    const std::string t = trim(*v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(path, "'" + *v + "' is not a boolean");
  }

  std::vector<double> list(const std::string& path,
                           std::vector<double> fallback) const {
    const auto v = tree_.get_optional<std::string>(path);
    if (!v) return fallback;
    auto out = parse_number_list(*v, path);
    if (out.empty()) throw ConfigError(path, "list is empty");
    return out;
  }

 private:
  const pt::ptree& tree_;
};

std::vector<double> range_list(double start, double stop, double step) {
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double v = start + double(k) * step;
    if (v > stop + 1e-9 * std::abs(step)) break;
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

LossVariant parse_variant(const std::string& text, const std::string& field) {
  if (text == "postselected") return LossVariant::postselected;
  if (text == "untracked") return LossVariant::untracked;
  throw ConfigError(field, "expected postselected or untracked, got '" + text + "'");
}

Setting parse_setting(const std::string& text, const std::string& field) {
  if (text == "ab") return Setting::ab;
  if (text == "ab_prime") return Setting::ab_prime;
  if (text == "a_prime_b") return Setting::a_prime_b;
  if (text == "a_prime_b_prime") return Setting::a_prime_b_prime;
  throw ConfigError(field, "expected ab, ab_prime, a_prime_b or a_prime_b_prime");
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void require_all(const std::vector<double>& v, const std::string& field,
                 bool (*pred)(double), const std::string& what) {
  for (double x : v) {
    if (!pred(x)) {
      std::ostringstream msg;
      msg << "value " << x << " " << what;
      throw ConfigError(field, msg.str());
    }
  }
}

std::vector<double> sorted_unique(std::vector<double> v, const std::string& field) {
  std::sort(v.begin(), v.end());
  require(std::adjacent_find(v.begin(), v.end()) == v.end(), field,
          "list contains duplicate values");
  return v;
}

ChannelMap parse_channels(const pt::ptree& node) {
  ChannelMap map;
  for (const auto& [key, leaf] : node) {
    const std::string field = "channels." + key;
    unsigned id = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    require(ec == std::errc() && ptr == key.data() + key.size() && id <= 255, field,
            "channel id must be an integer in [0, 255]");
    const std::string value = trim(leaf.data());
    const auto colon = value.find(':');
    require(colon != std::string::npos, field, "expected <arm>:<label>");
    const auto arm = parse_arm(trim(value.substr(0, colon)));
    const auto label = parse_setting_label(trim(value.substr(colon + 1)));
    require(arm.has_value(), field, "unknown arm in '" + value + "'");
    require(label.has_value(), field, "unknown label in '" + value + "'");
    try {
      map.assign(static_cast<std::uint8_t>(id), *arm, *label);
    } catch (const InvalidArgument& e) {
      throw ConfigError(field, e.what());
    }
  }
  return map;
}

RunConfig build(const pt::ptree& tree) {
  check_schema(tree);
  const Reader r(tree);
  RunConfig c;

  c.seed = r.integer("seed", c.seed);

  const bool has_visibility = r.has("source.visibility_hv") || r.has("source.visibility_ad");
  c.source_ideal = r.boolean("source.ideal", !has_visibility);
  c.source.visibility_hv = r.number("source.visibility_hv", 1.0);
  c.source.visibility_ad = r.number("source.visibility_ad", 1.0);
  for (const char* key : {"source.visibility_hv", "source.visibility_ad"}) {
    const double v = r.number(key, 1.0);
    require(v >= 0.0 && v <= 1.0, key, "visibility must lie in [0, 1]");
  }

  DetectorConfig& d = c.detector;
  c.detector_ideal = r.boolean("detector.ideal", false);
  d.pair_rate = r.number("detector.pair_rate", d.pair_rate);
  d.noise_rate = r.number("detector.noise_rate", d.noise_rate);
  d.dark_rate = r.number("detector.dark_rate", d.dark_rate);
  d.coincidence_window = r.number("detector.coincidence_window", d.coincidence_window);
  d.integration_time = r.number("detector.integration_time", d.integration_time);
  c.repeats = r.integer("detector.repeats", c.repeats);
  require(d.pair_rate >= 0.0, "detector.pair_rate", "must be non-negative");
  require(d.noise_rate >= 0.0, "detector.noise_rate", "must be non-negative");
  require(d.dark_rate >= 0.0, "detector.dark_rate", "must be non-negative");
  require(d.coincidence_window > 0.0, "detector.coincidence_window", "must be positive");
  require(d.integration_time > 0.0, "detector.integration_time", "must be positive");
  require(c.repeats >= 1, "detector.repeats", "must be at least 1");

  const auto in_unit = +[](double x) { return x > 0.0 && x <= 1.0; };
  c.object_variant = parse_variant(r.text("object.variant", "untracked"), "object.variant");
  c.etas = sorted_unique(r.list("object.etas", range_list(0.05, 1.0, 0.05)), "object.etas");
  require_all(c.etas, "object.etas", in_unit, "is outside (0, 1]");

  c.noise_eta = r.number("noise.eta", c.noise_eta);
  require(in_unit(c.noise_eta), "noise.eta", "must lie in (0, 1]");
  c.snrs = sorted_unique(
      r.list("noise.snrs", {0.001, 0.002, 0.003, 0.005, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}),
      "noise.snrs");
  require_all(c.snrs, "noise.snrs", +[](double x) { return x > 0.0; }, "is not positive");

  const std::string mode = r.text("depolarization.mode", "p");
  if (mode == "p") {
    c.depol_mode = DepolarizationMode::channel_p;
  } else if (mode == "theta") {
    c.depol_mode = DepolarizationMode::qhq_theta;
  } else {
    throw ConfigError("depolarization.mode", "expected p or theta, got '" + mode + "'");
  }
  const auto depol_default = c.depol_mode == DepolarizationMode::channel_p
                                 ? range_list(0.0, 1.0, 0.1)
                                 : range_list(0.0, std::numbers::pi / 4.0, std::numbers::pi / 80.0);
  c.depol_values = sorted_unique(r.list("depolarization.values", depol_default),
                                 "depolarization.values");
  if (c.depol_mode == DepolarizationMode::channel_p) {
    require_all(c.depol_values, "depolarization.values",
                +[](double x) { return x >= 0.0 && x <= 1.0; }, "is outside [0, 1]");
  } else {
    require_all(c.depol_values, "depolarization.values",
                +[](double x) { return x >= 0.0 && x <= std::numbers::pi / 4.0 + 1e-12; },
                "is outside [0, pi/4]");
  }
  c.depol_eta = r.number("depolarization.eta", c.depol_eta);
  require(in_unit(c.depol_eta), "depolarization.eta", "must lie in (0, 1]");

  c.alpha_db_per_km = r.number("attenuation.alpha_db_per_km", c.alpha_db_per_km);
  require(c.alpha_db_per_km > 0.0, "attenuation.alpha_db_per_km", "must be positive");
  c.distances = sorted_unique(r.list("attenuation.distances", range_list(0.0, 100.0, 1.0)),
                              "attenuation.distances");
  require_all(c.distances, "attenuation.distances", +[](double x) { return x >= 0.0; },
              "is negative");

  const std::string units = r.text("angles.units", "rad");
  require(units == "rad" || units == "deg", "angles.units", "expected rad or deg");
  const double scale = units == "deg" ? std::numbers::pi / 180.0 : 1.0;
  const MeasurementAngles defaults;
  c.angles.alpha = r.has("angles.alpha") ? scale * r.number("angles.alpha", 0) : defaults.alpha;
  c.angles.alpha_prime = r.has("angles.alpha_prime")
                             ? scale * r.number("angles.alpha_prime", 0)
                             : defaults.alpha_prime;
  c.angles.beta = r.has("angles.beta") ? scale * r.number("angles.beta", 0) : defaults.beta;
  c.angles.beta_prime = r.has("angles.beta_prime")
                            ? scale * r.number("angles.beta_prime", 0)
                            : defaults.beta_prime;

  const std::string format = r.text("tags.format", "csv");
  const auto tf = parse_tag_format(format);
  require(tf.has_value(), "tags.format", "expected csv or binary, got '" + format + "'");
  c.tag_format = *tf;
  c.window_ps = r.integer("tags.window_ps", c.window_ps);
  require(c.window_ps > 0, "tags.window_ps", "must be positive");
  c.tag_eta = r.number("tags.eta", c.tag_eta);
  require(in_unit(c.tag_eta), "tags.eta", "must lie in (0, 1]");
  c.tag_variant = parse_variant(r.text("tags.variant", "postselected"), "tags.variant");
  const std::string tmode = r.text("tags.mode", "single_shot");
  require(tmode == "single_shot" || tmode == "sequential", "tags.mode",
          "expected single_shot or sequential");
  c.tag_sequential = tmode == "sequential";
  c.tag_setting = parse_setting(r.text("tags.setting", "ab"), "tags.setting");
  c.include_reference = r.boolean("tags.include_reference", true);
  if (const auto node = tree.get_child_optional("channels")) {
    c.channels = parse_channels(*node);
  }

  c.state.kind = r.text("state.kind", c.state.kind);
  static const std::set<std::string> kinds = {"source", "singlet", "phi_plus", "hv",
                                              "mixed", "werner", "qhq", "depolarized"};
  require(kinds.contains(c.state.kind), "state.kind", "unknown state kind '" + c.state.kind + "'");
  c.state.visibility = r.number("state.visibility", c.state.visibility);
  c.state.theta = r.number("state.theta", c.state.theta);
  c.state.p = r.number("state.p", c.state.p);
  require(c.state.visibility >= 0.0 && c.state.visibility <= 1.0, "state.visibility",
          "must lie in [0, 1]");
  require(c.state.theta >= 0.0 && c.state.theta <= std::numbers::pi / 4.0 + 1e-12,
          "state.theta", "must lie in [0, pi/4]");
  require(c.state.p >= 0.0 && c.state.p <= 1.0, "state.p", "must lie in [0, 1]");

  c.output_directory = r.text("output.directory", c.output_directory);
  require(!c.output_directory.empty(), "output.directory", "must not be empty");
  return c;
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text, const std::string& field) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw ConfigError(field, "empty list item");
    if (t.find(':') != std::string::npos) {
      double v[3];
      std::istringstream parts(t);
      std::string part;
      int n = 0;
      while (std::getline(parts, part, ':')) {
        if (n >= 3 || !parse_double(part, v[n])) {
          throw ConfigError(field, "'" + t + "' is not a start:stop:step range");
        }
        ++n;
      }
      if (n != 3 || !(v[2] > 0.0) || v[1] < v[0]) {
        throw ConfigError(field, "'" + t + "' is not a start:stop:step range");
      }
      const auto r = range_list(v[0], v[1], v[2]);
      out.insert(out.end(), r.begin(), r.end());
    } else {
      double v = 0.0;
      if (!parse_double(t, v)) throw ConfigError(field, "'" + t + "' is not a number");
      out.push_back(v);
    }
  }
  if (out.empty()) throw ConfigError(field, "list is empty");
  return out;
}

namespace {

// Drops trailing "; ..." or "# ..." comments that follow whitespace.
std::string strip_inline_comments(std::string_view text) {
  std::string out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view ini_text, std::span<const std::string> overrides,
                       const char* output_dir_env) {
  pt::ptree tree;
  try {
    std::istringstream in{strip_inline_comments(ini_text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  if (output_dir_env != nullptr && *output_dir_env != '\0') {
    tree.put("output.directory", std::string(output_dir_env));
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const std::string key = trim(o.substr(0, eq));
    if (eq == std::string::npos || key.empty()) {
      throw ConfigError(o, "override must have the form section.key=value");
    }
    if (std::count(key.begin(), key.end(), '.') > 1) {
      throw ConfigError(key, "override path has too many components");
    }
    tree.put(key, trim(o.substr(eq + 1)));
  }
  return build(tree);
}

RunConfig load_config(const std::optional<std::string>& path,
                      std::span<const std::string> overrides, const char* output_dir_env) {
  std::string text;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read " + *path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_config(text, overrides, output_dir_env);
}

DensityMatrix RunConfig::source_state() const {
  if (source_ideal) return DensityMatrix(singlet());
  return source_with_visibility(source);
}

DensityMatrix RunConfig::configured_state() const {
  const std::string& k = state.kind;
  if (k == "singlet") return DensityMatrix(singlet());
  if (k == "phi_plus") return DensityMatrix(phi_plus());
  if (k == "hv") return DensityMatrix(product_hv());
  if (k == "mixed") return maximally_mixed_pair();
  if (k == "werner") return werner_state(state.visibility);
  if (k == "qhq") return DensityMatrix(qhq_state(state.theta).state);
  if (k == "depolarized") return depolarize_signal(source_state(), state.p);
  return source_state();
}

DetectorConfig RunConfig::effective_detector() const {
  DetectorConfig d = detector_ideal ? ideal_detectors(detector) : detector;
  d.rng_seed = seed;
  return d;
}

Experiment RunConfig::experiment() const {
  return Experiment{source_state(), effective_detector(), angles, repeats};
}

ChannelMap RunConfig::channel_map() const {
  if (channels) return *channels;
  return tag_sequential ? ChannelMap::sequential(tag_setting, 1, include_reference)
                        : ChannelMap::single_shot(1, include_reference);
}

}  // namespace qisim
