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

#include "qisim/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qisim/channels.hpp"
#include "qisim/chsh.hpp"
#include "qisim/config.hpp"
#include "qisim/csv.hpp"
#include "qisim/detector.hpp"
#include "qisim/error.hpp"
#include "qisim/range.hpp"
#include "qisim/tagstream.hpp"

namespace qisim {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "INI configuration file");
  cmd->add_option("-s,--set", opts.overrides,
                  "Override a configuration key, section.key=value (repeatable)");
}

RunConfig load(const CommonOptions& opts) {
  return load_config(opts.config_path, opts.overrides, std::getenv("QISIM_OUTPUT_DIR"));
}

std::string fmt(double v) { return format_number(v); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  const fs::path dir(cfg.output_directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir / name;
}

SweepResult range_theory(const RunConfig& cfg) {
  const AttenuationModel model{cfg.alpha_db_per_km, 0.0};
  const RangeProfile prof = profile(model, cfg.distances, cfg.source_state(), cfg.angles);
  SweepResult out;
  out.axis = SweepAxis::distance;
  out.extra_columns = {"sbar_probability", "purity", "entropy", "survival"};
  for (std::size_t i = 0; i < prof.distances.size(); ++i) {
    SweepPoint p;
    p.x = prof.distances[i];
    p.s = prof.s_values[i];
    p.sbar = prof.sbar_values[i];
    p.verdict = classify(p.s);
    AttenuationModel m = model;
    m.distance_km = p.x;
    p.extras = {prof.sbar_probability[i], prof.purity[i], prof.entropy[i], m.survival()};
    out.points.push_back(std::move(p));
  }
  return out;
}

void print_points(const SweepResult& sweep, const char* title, std::ostream& out) {
  out << title << '\n';
  for (const SweepPoint& p : sweep.points) {
    out << "  x=" << fmt(p.x) << " S=" << fmt(p.s) << " Sbar=" << fmt(p.sbar)
        << " verdict=" << to_string(p.verdict) << '\n';
  }
}

int cmd_sweep(const std::string& axis, const RunConfig& cfg, std::ostream& out) {
  const Experiment exp = cfg.experiment();
  SweepResult sweep, theory;
  if (axis == "eta") {
    sweep = sweep_eta(cfg.etas, exp, cfg.object_variant);
    theory = theory_eta(cfg.etas, exp, cfg.object_variant);
  } else if (axis == "snr") {
    sweep = sweep_snr(cfg.snrs, cfg.noise_eta, exp);
    theory = theory_snr(cfg.snrs, cfg.noise_eta, exp);
  } else if (axis == "depol") {
    sweep = sweep_depolarization(cfg.depol_values, cfg.depol_mode, cfg.depol_eta, exp);
    theory = theory_depolarization(cfg.depol_values, cfg.depol_mode, cfg.depol_eta, exp);
  } else {
    sweep = sweep_distance(cfg.distances, cfg.alpha_db_per_km, exp);
    theory = range_theory(cfg);
  }

  const fs::path sweep_file = output_path(cfg, "sweep_" + axis + ".csv");
  const fs::path theory_file = output_path(cfg, "theory_" + axis + ".csv");
  write_file_atomic(sweep_file, sweep_to_csv(sweep, cfg.seed));
  write_file_atomic(theory_file, sweep_to_csv(theory, cfg.seed));

  out << schema_comment(axis, cfg.seed, kSnrDefinition) << '\n';
  print_points(sweep, "simulated:", out);
  if (axis == "range") {
    const AttenuationModel model{cfg.alpha_db_per_km, 0.0};
    const DensityMatrix probe = cfg.source_state();
    out << "Lambda_per_km=" << fmt(model.lambda_per_km()) << '\n';
    for (const double threshold : {std::numbers::sqrt2, 2.0}) {
      out << (threshold == 2.0 ? "bell" : "sqrt2") << "_crossing_km";
      for (auto conv : {SurvivalConvention::amplitude, SurvivalConvention::probability}) {
        out << ' ' << to_string(conv) << '='
            << fmt(max_range(model, probe, threshold, conv, cfg.angles));
      }
      out << '\n';
    }
  }
  out << "wrote " << sweep_file.string() << '\n' << "wrote " << theory_file.string() << '\n';
  return kExitOk;
}

int cmd_chsh_from_tags(const std::string& file, const RunConfig& cfg,
                       std::optional<std::string> format_name,
                       std::optional<std::uint64_t> window, bool normalized,
                       std::ostream& out) {
  TagFormat format = cfg.tag_format;
  if (format_name) {
    const auto f = parse_tag_format(*format_name);
    if (!f) throw ConfigError("--format", "expected csv or binary");
    format = *f;
  }
  const std::uint64_t window_ps = window.value_or(cfg.window_ps);
  if (window_ps == 0) throw ConfigError("--window-ps", "must be positive");

  const ChannelMap map = cfg.channel_map();
  const std::set<std::uint8_t> allowed = map.channels();
  const std::vector<TimeTagEvent> events = parse_tags(read_file(file), format, &allowed);
  const double T = cfg.detector.integration_time;
  const AggregateResult agg = aggregate_records(events, map, window_ps, T);

  out << "events=" << events.size() << " window_ps=" << window_ps
      << " integration_time_s=" << fmt(T) << '\n';
  for (const auto& [ch, tally] : agg.tallies) {
    const ChannelAssignment a = *map.lookup(ch);
    out << "  channel " << unsigned(ch) << ' ' << to_string(a.arm) << ':'
        << to_string(a.label) << " events=" << tally.events
        << " matched=" << tally.matched << " unmatched=" << tally.unmatched() << '\n';
  }

  std::vector<std::string> empty;
  for (Setting s : kAllSettings) {
    const auto it = agg.actual.find(s);
    if (it == agg.actual.end()) {
      throw MissingSetting("channel map has no complete detector set for setting " +
                           std::string(to_string(s)));
    }
    const CoincidenceRecord& r = it->second;
    out << "setting " << to_string(s) << ": total=" << r.total()
        << " accidental_estimate=" << fmt(agg.accidental_estimate.at(s));
    if (r.total() == 0) {
      out << " E=undefined (no coincidences)\n";
      empty.emplace_back(to_string(s));
    } else {
      out << " E=" << fmt(E_from_counts(r)) << '\n';
    }
  }
  if (!empty.empty()) {
    std::string list;
    for (const auto& s : empty) list += (list.empty() ? "" : " ") + s;
    throw NoCoincidences("no coincidences for setting(s): " + list);
  }

  const ChshResult s = chsh_S_from_counts(agg.actual);
  out << "S=" << fmt(s.s_value) << " S_err=" << fmt(chsh_S_stderr(agg.actual))
      << " verdict=" << to_string(s.verdict) << '\n';

  const bool have_reference = agg.reference.size() == kAllSettings.size();
  if (normalized && !have_reference) {
    throw MissingChannel("normalized value requested but the reference arm is not mapped");
  }
  if (have_reference) {
    const ChshResult sbar = chsh_S_from_counts(agg.actual, &agg.reference);
    out << "Sbar=" << fmt(sbar.s_value) << " verdict=" << to_string(sbar.verdict) << '\n';
  }
  return kExitOk;
}

int cmd_simulate_tags(const std::string& file, const RunConfig& cfg,
                      std::optional<std::string> format_name, std::ostream& out) {
  TagFormat format = cfg.tag_format;
  if (format_name) {
    const auto f = parse_tag_format(*format_name);
    if (!f) throw ConfigError("--format", "expected csv or binary");
    format = *f;
  }
  const DensityMatrix state = cfg.configured_state();
  const DensityMatrix detected = coincidence_sector(
      object_channel(with_photon_pair(state), ObjectModel{cfg.tag_eta, cfg.tag_variant}));
  const ChannelMap map = cfg.channel_map();
  const std::vector<TimeTagEvent> events = simulate_tag_stream(
      detected, cfg.effective_detector(), map, cfg.angles, cfg.seed, state);
  write_file_atomic(file, write_tags(events, format));
  out << "# detector dead time and timing jitter are not modeled\n"
      << "wrote " << events.size() << " events to " << file << '\n';
  return kExitOk;
}

int cmd_state_report(const RunConfig& cfg, std::ostream& out) {
  const DensityMatrix rho = cfg.configured_state();
  const ChshResult at_angles = chsh_S(rho, cfg.angles);
  const ChshResult best = chsh_S_max(rho);
  out << "state=" << cfg.state.kind << '\n'
      << "S=" << fmt(at_angles.s_value) << " verdict=" << to_string(at_angles.verdict) << '\n'
      << "S_max=" << fmt(best.s_value) << " verdict=" << to_string(best.verdict)
      << " alpha=" << fmt(best.angles.alpha) << " alpha_prime=" << fmt(best.angles.alpha_prime)
      << " beta=" << fmt(best.angles.beta) << " beta_prime=" << fmt(best.angles.beta_prime)
      << '\n'
      << "horodecki_bound=" << fmt(horodecki_bound(rho)) << '\n'
      << "purity=" << fmt(purity(rho)) << '\n'
      << "entropy=" << fmt(von_neumann_entropy(rho)) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entangled-photon object detection simulator", "qi-sim"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOptions common;

  std::string axis;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV data");
  sweep->add_option("axis", axis, "eta, snr, depol or range")
      ->required()
      ->check(CLI::IsMember({"eta", "snr", "depol", "range"}));
  add_common(sweep, common);

  std::string tag_file;
  std::optional<std::string> format_name;
  std::optional<std::uint64_t> window;
  bool normalized = false;
  auto* from_tags = app.add_subcommand("chsh-from-tags", "Compute S from a time-tag file");
  from_tags->add_option("file", tag_file, "Tag stream")->required();
  from_tags->add_option("-f,--format", format_name, "csv or binary");
  from_tags->add_option("-w,--window-ps", window, "Coincidence half-width in picoseconds");
  from_tags->add_flag("-n,--normalized", normalized,
                      "Require the reference arm and report the normalized value");
  add_common(from_tags, common);

  std::string out_file;
  auto* simulate = app.add_subcommand("simulate-tags", "Write a simulated time-tag stream");
  simulate->add_option("output", out_file, "Output file")->required();
  simulate->add_option("-f,--format", format_name, "csv or binary");
  add_common(simulate, common);

  auto* report = app.add_subcommand("state-report", "Print S, S_max, purity and entropy");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const RunConfig cfg = load(common);
    if (sweep->parsed()) return cmd_sweep(axis, cfg, out);
    if (from_tags->parsed()) {
      return cmd_chsh_from_tags(tag_file, cfg, format_name, window, normalized, out);
    }
    if (simulate->parsed()) return cmd_simulate_tags(out_file, cfg, format_name, out);
    return cmd_state_report(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace qisim
