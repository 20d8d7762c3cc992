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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qisim/chsh.hpp"
#include "qisim/detector.hpp"
#include "qisim/state.hpp"

namespace qisim {

struct TimeTagEvent {
  std::uint8_t channel = 0;
  std::uint64_t timestamp_ps = 0;

  auto operator<=>(const TimeTagEvent& other) const {
    if (auto c = timestamp_ps <=> other.timestamp_ps; c != 0) return c;
    return channel <=> other.channel;
  }
  bool operator==(const TimeTagEvent&) const = default;
};

enum class TagFormat { csv, binary };

std::optional<TagFormat> parse_tag_format(std::string_view name);

/// Size of one binary record: u8 channel, u64 little-endian picoseconds.
inline constexpr std::size_t kBinaryRecordSize = 9;

/// Parses a tag stream. CSV lines are `channel,timestamp_ps`; a first line
/// that is not numeric is treated as a header. Events are returned in file
/// order. When `allowed_channels` is given, any other channel raises
/// ValidationError.
std::vector<TimeTagEvent> parse_tags(
    std::string_view data, TagFormat format,
    const std::set<std::uint8_t>* allowed_channels = nullptr);

/// Serializes events. CSV output starts with a `channel,timestamp_ps` header.
std::string write_tags(std::span<const TimeTagEvent> events, TagFormat format);

// ---------------------------------------------------------------------------
// Coincidence matching
// ---------------------------------------------------------------------------

/// Pairs of indices (into a, into b) with |a - b| <= window. Each a event, in
/// time order, takes the earliest still-unmatched b event inside its window;
/// every event is used at most once. Because both sides are sorted the
/// candidate sets are monotone intervals, so this greedy pass is a maximum
/// matching and its size does not depend on which side is scanned.
/// Throws ContractError when either list is unsorted.
std::vector<std::pair<std::size_t, std::size_t>> match_coincidences(
    std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
    std::uint64_t window_ps);

std::uint64_t count_coincidences(std::span<const std::uint64_t> a,
                                 std::span<const std::uint64_t> b,
                                 std::uint64_t window_ps);

// ---------------------------------------------------------------------------
// Channel assignment and aggregation
// ---------------------------------------------------------------------------

enum class Arm { signal, idler, reference_signal, reference_idler };

/// Detector labels. Signal-side arms take alpha labels, idler-side arms beta.
enum class SettingLabel {
  alpha,
  alpha_perp,
  alpha_prime,
  alpha_prime_perp,
  beta,
  beta_perp,
  beta_prime,
  beta_prime_perp,
};

std::string_view to_string(Arm arm);
std::string_view to_string(SettingLabel label);
std::optional<Arm> parse_arm(std::string_view name);
std::optional<SettingLabel> parse_setting_label(std::string_view name);

struct ChannelAssignment {
  Arm arm = Arm::signal;
  SettingLabel label = SettingLabel::alpha;
  bool operator==(const ChannelAssignment&) const = default;
};

class ChannelMap {
 public:
  ChannelMap() = default;

  /// Throws InvalidArgument if the channel is taken, the (arm, label) pair is
  /// already mapped, or the label does not belong to the arm's side.
  void assign(std::uint8_t channel, Arm arm, SettingLabel label);

  /// Eight object-arm detectors on channels first..first+7 (signal alpha,
  /// alpha_perp, alpha', alpha'_perp, then idler beta..beta'_perp), plus the
  /// same layout for the reference arm on the next eight when requested.
  static ChannelMap single_shot(std::uint8_t first_channel = 1,
                                bool with_reference = true);

  /// Four object-arm detectors (two signal, two idler) for one setting, plus
  /// four reference detectors when requested.
  static ChannelMap sequential(Setting setting, std::uint8_t first_channel = 1,
                               bool with_reference = true);

  std::optional<ChannelAssignment> lookup(std::uint8_t channel) const;
  std::optional<std::uint8_t> channel_of(Arm arm, SettingLabel label) const;
  const std::map<std::uint8_t, ChannelAssignment>& assignments() const {
    return assignments_;
  }
  std::set<std::uint8_t> channels() const;
  bool has_reference() const;

 private:
  std::map<std::uint8_t, ChannelAssignment> assignments_;
};

struct ChannelTally {
  std::uint64_t events = 0;
  std::uint64_t matched = 0;
  std::uint64_t unmatched() const { return events - matched; }
};

struct AggregateResult {
  /// Records for every setting whose four object-arm labels are mapped.
  RecordSet actual;
  /// Same for the reference arm, empty when no reference channels exist.
  RecordSet reference;
  std::map<std::uint8_t, ChannelTally> tallies;
  /// Coincidences expected from uncorrelated singles, r_s r_i (2 window) T,
  /// summed over the detector pairs of each setting.
  std::map<Setting, double> accidental_estimate;
};

/// Matches the merged signal-side stream against the merged idler-side
/// stream of each arm (so every event enters at most one coincidence) and
/// bins the pairs into per-setting records. Events on unmapped channels raise
/// MissingChannel.
AggregateResult aggregate_records(std::span<const TimeTagEvent> events,
                                  const ChannelMap& map,
                                  std::uint64_t window_ps,
                                  double integration_time);

inline constexpr std::uint64_t kDefaultWindowPs = 1000;

/// Poisson-process forward model of the detectors in `map`: correlated pair
/// timestamps (zero jitter), unpolarized thermal noise on the object signal
/// arm, and dark counts on every mapped channel. Output is time-sorted.
std::vector<TimeTagEvent> simulate_tag_stream(
    const DensityMatrix& rho_pol, const DetectorConfig& config,
    const ChannelMap& map, const MeasurementAngles& angles, std::uint64_t seed,
    const std::optional<DensityMatrix>& reference = std::nullopt);

}  // namespace qisim
