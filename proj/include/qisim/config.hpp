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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qisim/channels.hpp"
#include "qisim/chsh.hpp"
#include "qisim/detector.hpp"
#include "qisim/tagstream.hpp"

namespace qisim {

inline constexpr std::string_view kVersion = "0.1.0";

// Run configuration
// -----------------
// An INI file with the sections below. Every key can also be given on the
// command line as `section.key=value` (top-level keys such as `seed` have no
// section). Lists are comma separated; an item `start:stop:step` expands to
// an inclusive arithmetic range.
//
//   seed = 1
//   [source]         ideal, visibility_hv, visibility_ad
//   [detector]       ideal, pair_rate, noise_rate, dark_rate,
//                    coincidence_window, integration_time, repeats
//   [object]         variant (postselected|untracked), etas
//   [noise]          eta, snrs
//   [depolarization] mode (p|theta), values, eta
//   [attenuation]    alpha_db_per_km, distances
//   [angles]         units (rad|deg), alpha, alpha_prime, beta, beta_prime
//   [tags]           format (csv|binary), window_ps, eta, variant,
//                    mode (single_shot|sequential), setting, include_reference
//   [channels]       <channel id> = <arm>:<label>
//   [state]          kind (source|singlet|phi_plus|hv|mixed|werner|qhq|
//                    depolarized), visibility, theta, p
//   [output]         directory

struct StateSpec {
  std::string kind = "source";
  double visibility = 1.0;
  double theta = 0.0;
  double p = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 1;

  bool source_ideal = true;
  SourceModel source;

  DetectorConfig detector;
  bool detector_ideal = false;
  std::size_t repeats = 3;

  LossVariant object_variant = LossVariant::untracked;
  std::vector<double> etas;

  double noise_eta = 0.9;
  std::vector<double> snrs;

  DepolarizationMode depol_mode = DepolarizationMode::channel_p;
  std::vector<double> depol_values;
  double depol_eta = 1.0;

  double alpha_db_per_km = 0.07;
  std::vector<double> distances;

  MeasurementAngles angles;

  TagFormat tag_format = TagFormat::csv;
  std::uint64_t window_ps = kDefaultWindowPs;
  double tag_eta = 1.0;
  LossVariant tag_variant = LossVariant::postselected;
  bool tag_sequential = false;
  Setting tag_setting = Setting::ab;
  bool include_reference = true;
  std::optional<ChannelMap> channels;

  StateSpec state;

  std::string output_directory = ".";

  /// Polarization state emitted by the source.
  DensityMatrix source_state() const;
  /// State selected by [state], used by state-report and simulate-tags.
  DensityMatrix configured_state() const;
  /// Detector settings with the run seed and the `ideal` switch applied.
  DetectorConfig effective_detector() const;
  Experiment experiment() const;
  /// The [channels] section, or the default layout for [tags] mode.
  ChannelMap channel_map() const;
};

/// Builds a configuration from INI text, then applies the output-directory
/// environment override (if non-null) and the `section.key=value` overrides
/// in order. Throws ConfigError naming the offending field.
RunConfig parse_config(std::string_view ini_text,
                       std::span<const std::string> overrides = {},
                       const char* output_dir_env = nullptr);

/// Reads `path` (when given) and forwards to parse_config.
RunConfig load_config(const std::optional<std::string>& path,
                      std::span<const std::string> overrides = {},
                      const char* output_dir_env = nullptr);

/// Parses a list value: comma-separated numbers and start:stop:step ranges.
std::vector<double> parse_number_list(std::string_view text,
                                      const std::string& field);

}  // namespace qisim
