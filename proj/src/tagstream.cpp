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

#include "qisim/tagstream.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>
#include <string>

#include "qisim/error.hpp"

namespace qisim {

namespace {

bool is_signal_side(Arm arm) {
  return arm == Arm::signal || arm == Arm::reference_signal;
}

bool is_signal_label(SettingLabel label) {
  return label == SettingLabel::alpha || label == SettingLabel::alpha_perp ||
         label == SettingLabel::alpha_prime ||
         label == SettingLabel::alpha_prime_perp;
}

// Labels come in families {x, x_perp}; family 0 is the unprimed angle.
int family_of(SettingLabel label) {
  switch (label) {
    case SettingLabel::alpha:
    case SettingLabel::alpha_perp:
    case SettingLabel::beta:
    case SettingLabel::beta_perp:
      return 0;
    default:
      return 1;
  }
}

int outcome_of(SettingLabel label) {
  switch (label) {
    case SettingLabel::alpha_perp:
    case SettingLabel::alpha_prime_perp:
    case SettingLabel::beta_perp:
    case SettingLabel::beta_prime_perp:
      return 1;
    default:
      return 0;
  }
}

SettingLabel label_for(bool signal, int family, int outcome) {
  static constexpr std::array<SettingLabel, 4> kSignal = {
      SettingLabel::alpha, SettingLabel::alpha_perp, SettingLabel::alpha_prime,
      SettingLabel::alpha_prime_perp};
  static constexpr std::array<SettingLabel, 4> kIdler = {
      SettingLabel::beta, SettingLabel::beta_perp, SettingLabel::beta_prime,
      SettingLabel::beta_prime_perp};
  return (signal ? kSignal : kIdler)[2 * family + outcome];
}

Setting setting_for(int signal_family, int idler_family) {
  if (signal_family == 0) return idler_family == 0 ? Setting::ab : Setting::ab_prime;
  return idler_family == 0 ? Setting::a_prime_b : Setting::a_prime_b_prime;
}

std::pair<int, int> families_of(Setting s) {
  switch (s) {
    case Setting::ab: return {0, 0};
    case Setting::ab_prime: return {0, 1};
    case Setting::a_prime_b: return {1, 0};
    case Setting::a_prime_b_prime: return {1, 1};
  }
  return {0, 0};
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

template <class T>
bool parse_integer(std::string_view text, T& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

void check_allowed(std::uint8_t channel, const std::set<std::uint8_t>* allowed,
                   const std::string& where) {
  if (allowed != nullptr && !allowed->contains(channel)) {
    throw ValidationError("unknown channel " + std::to_string(channel) + " at " +
                          where);
  }
}

std::vector<TimeTagEvent> parse_csv(std::string_view data,
                                    const std::set<std::uint8_t>* allowed) {
  std::vector<TimeTagEvent> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t end = std::min(data.find('\n', pos), data.size());
    const std::string_view line = trim_cr(data.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const std::size_t comma = line.find(',');
    unsigned channel = 0;
    std::uint64_t ts = 0;
    const bool ok = comma != std::string_view::npos &&
                    parse_integer(line.substr(0, comma), channel) &&
                    parse_integer(line.substr(comma + 1), ts) && channel <= 255;
    if (!ok) {
      if (line_no == 1 && out.empty()) continue;  // header
      throw ParseError("malformed tag record on line " + std::to_string(line_no),
                       line_no);
    }
    const auto ch = static_cast<std::uint8_t>(channel);
    check_allowed(ch, allowed, "line " + std::to_string(line_no));
    out.push_back({ch, ts});
  }
  return out;
}

std::vector<TimeTagEvent> parse_binary(std::string_view data,
                                       const std::set<std::uint8_t>* allowed) {
  if (data.size() % kBinaryRecordSize != 0) {
    const std::size_t offset = data.size() - data.size() % kBinaryRecordSize;
    throw ParseError("truncated binary tag record at byte offset " +
                         std::to_string(offset),
                     offset);
  }
  std::vector<TimeTagEvent> out;
  out.reserve(data.size() / kBinaryRecordSize);
  for (std::size_t off = 0; off < data.size(); off += kBinaryRecordSize) {
    const auto ch = static_cast<std::uint8_t>(data[off]);
    std::uint64_t ts = 0;
    for (int k = 7; k >= 0; --k) {
      ts = (ts << 8) | static_cast<std::uint8_t>(data[off + 1 + k]);
    }
    check_allowed(ch, allowed, "byte offset " + std::to_string(off));
    out.push_back({ch, ts});
  }
  return out;
}

void require_sorted(std::span<const std::uint64_t> v, const char* name) {
  if (!std::is_sorted(v.begin(), v.end())) {
    throw ContractError(std::string("timestamps of ") + name + " are not sorted");
  }
}

}  // namespace

std::optional<TagFormat> parse_tag_format(std::string_view name) {
  if (name == "csv") return TagFormat::csv;
  if (name == "binary" || name == "bin") return TagFormat::binary;
  return std::nullopt;
}

std::vector<TimeTagEvent> parse_tags(std::string_view data, TagFormat format,
                                     const std::set<std::uint8_t>* allowed) {
  return format == TagFormat::csv ? parse_csv(data, allowed)
                                  : parse_binary(data, allowed);
}

std::string write_tags(std::span<const TimeTagEvent> events, TagFormat format) {
  std::string out;
  if (format == TagFormat::csv) {
    out = "channel,timestamp_ps\n";
    char buf[32];
    for (const TimeTagEvent& e : events) {
      auto r = std::to_chars(buf, buf + sizeof buf, unsigned(e.channel));
      *r.ptr++ = ',';
      r = std::to_chars(r.ptr, buf + sizeof buf, e.timestamp_ps);
      *r.ptr++ = '\n';
      out.append(buf, r.ptr);
    }
    return out;
  }
  out.resize(events.size() * kBinaryRecordSize);
  std::size_t off = 0;
  for (const TimeTagEvent& e : events) {
    out[off] = static_cast<char>(e.channel);
    for (int k = 0; k < 8; ++k) {
      out[off + 1 + k] = static_cast<char>((e.timestamp_ps >> (8 * k)) & 0xff);
    }
    off += kBinaryRecordSize;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> match_coincidences(
    std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
    std::uint64_t window_ps) {
  require_sorted(a, "a");
  require_sorted(b, "b");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size() && j < b.size(); ++i) {
    // b events earlier than a[i] - window can no longer be matched by any a.
    while (j < b.size() && b[j] + window_ps < a[i]) ++j;
    if (j < b.size() && b[j] <= a[i] + window_ps) pairs.emplace_back(i, j++);
  }
  return pairs;
}

std::uint64_t count_coincidences(std::span<const std::uint64_t> a,
                                 std::span<const std::uint64_t> b,
                                 std::uint64_t window_ps) {
  return match_coincidences(a, b, window_ps).size();
}

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::signal: return "signal";
    case Arm::idler: return "idler";
    case Arm::reference_signal: return "reference_signal";
    case Arm::reference_idler: return "reference_idler";
  }
  return "?";
}

std::string_view to_string(SettingLabel label) {
  switch (label) {
    case SettingLabel::alpha: return "alpha";
    case SettingLabel::alpha_perp: return "alpha_perp";
    case SettingLabel::alpha_prime: return "alpha_prime";
    case SettingLabel::alpha_prime_perp: return "alpha_prime_perp";
    case SettingLabel::beta: return "beta";
    case SettingLabel::beta_perp: return "beta_perp";
    case SettingLabel::beta_prime: return "beta_prime";
    case SettingLabel::beta_prime_perp: return "beta_prime_perp";
  }
  return "?";
}

std::optional<Arm> parse_arm(std::string_view name) {
  for (Arm a : {Arm::signal, Arm::idler, Arm::reference_signal,
                Arm::reference_idler}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<SettingLabel> parse_setting_label(std::string_view name) {
  for (int k = 0; k < 8; ++k) {
    const auto label = static_cast<SettingLabel>(k);
    if (to_string(label) == name) return label;
  }
  return std::nullopt;
}

void ChannelMap::assign(std::uint8_t channel, Arm arm, SettingLabel label) {
  if (is_signal_side(arm) != is_signal_label(label)) {
    throw InvalidArgument(std::string("label ") + std::string(to_string(label)) +
                          " does not belong to arm " +
                          std::string(to_string(arm)));
  }
  if (assignments_.contains(channel)) {
    throw InvalidArgument("channel " + std::to_string(channel) +
                          " is assigned twice");
  }
  if (channel_of(arm, label)) {
    throw InvalidArgument(std::string(to_string(arm)) + ":" +
                          std::string(to_string(label)) + " is mapped twice");
  }
  assignments_[channel] = {arm, label};
}

ChannelMap ChannelMap::single_shot(std::uint8_t first, bool with_reference) {
  ChannelMap map;
  unsigned ch = first;
  const auto arms = with_reference
                        ? std::vector<std::pair<Arm, Arm>>{{Arm::signal, Arm::idler},
                                                           {Arm::reference_signal,
                                                            Arm::reference_idler}}
                        : std::vector<std::pair<Arm, Arm>>{{Arm::signal, Arm::idler}};
  for (const auto& [s, i] : arms) {
    for (int k = 0; k < 4; ++k) map.assign(std::uint8_t(ch++), s, label_for(true, k / 2, k % 2));
    for (int k = 0; k < 4; ++k) map.assign(std::uint8_t(ch++), i, label_for(false, k / 2, k % 2));
  }
  return map;
}

ChannelMap ChannelMap::sequential(Setting setting, std::uint8_t first,
                                  bool with_reference) {
  ChannelMap map;
  const auto [fs, fi] = families_of(setting);
  unsigned ch = first;
  map.assign(std::uint8_t(ch++), Arm::signal, label_for(true, fs, 0));
  map.assign(std::uint8_t(ch++), Arm::signal, label_for(true, fs, 1));
  map.assign(std::uint8_t(ch++), Arm::idler, label_for(false, fi, 0));
  map.assign(std::uint8_t(ch++), Arm::idler, label_for(false, fi, 1));
  if (with_reference) {
    map.assign(std::uint8_t(ch++), Arm::reference_signal, label_for(true, fs, 0));
    map.assign(std::uint8_t(ch++), Arm::reference_signal, label_for(true, fs, 1));
    map.assign(std::uint8_t(ch++), Arm::reference_idler, label_for(false, fi, 0));
    map.assign(std::uint8_t(ch++), Arm::reference_idler, label_for(false, fi, 1));
  }
  return map;
}

std::optional<ChannelAssignment> ChannelMap::lookup(std::uint8_t channel) const {
  const auto it = assignments_.find(channel);
  if (it == assignments_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint8_t> ChannelMap::channel_of(Arm arm,
                                                   SettingLabel label) const {
  for (const auto& [ch, a] : assignments_) {
    if (a.arm == arm && a.label == label) return ch;
  }
  return std::nullopt;
}

std::set<std::uint8_t> ChannelMap::channels() const {
  std::set<std::uint8_t> out;
  for (const auto& [ch, a] : assignments_) out.insert(ch);
  return out;
}

bool ChannelMap::has_reference() const {
  return std::any_of(assignments_.begin(), assignments_.end(), [](const auto& kv) {
    return kv.second.arm == Arm::reference_signal ||
           kv.second.arm == Arm::reference_idler;
  });
}

namespace {

struct ArmPair {
  Arm signal;
  Arm idler;
};

// Settings whose four labels exist on both sides of an arm pair.
std::vector<Setting> complete_settings(const ChannelMap& map, ArmPair arms) {
  std::vector<Setting> out;
  for (Setting s : kAllSettings) {
    const auto [fs, fi] = families_of(s);
    bool ok = true;
    for (int o = 0; o < 2; ++o) {
      ok = ok && map.channel_of(arms.signal, label_for(true, fs, o)) &&
           map.channel_of(arms.idler, label_for(false, fi, o));
    }
    if (ok) out.push_back(s);
  }
  return out;
}

RecordSet match_arm(const std::vector<TimeTagEvent>& sorted, const ChannelMap& map,
                    ArmPair arms, std::uint64_t window_ps, double T,
                    std::map<std::uint8_t, ChannelTally>& tallies) {
  std::vector<TimeTagEvent> sig, idl;
  for (const TimeTagEvent& e : sorted) {
    const Arm arm = map.lookup(e.channel)->arm;
    if (arm == arms.signal) sig.push_back(e);
    if (arm == arms.idler) idl.push_back(e);
  }
  std::vector<std::uint64_t> ts(sig.size()), ti(idl.size());
  std::transform(sig.begin(), sig.end(), ts.begin(), [](auto& e) { return e.timestamp_ps; });
  std::transform(idl.begin(), idl.end(), ti.begin(), [](auto& e) { return e.timestamp_ps; });

  RecordSet records;
  for (Setting s : complete_settings(map, arms)) {
    CoincidenceRecord r;
    r.setting = s;
    r.integration_time = T;
    records[s] = r;
  }

  for (const auto& [i, j] : match_coincidences(ts, ti, window_ps)) {
    const SettingLabel ls = map.lookup(sig[i].channel)->label;
    const SettingLabel li = map.lookup(idl[j].channel)->label;
    ++tallies[sig[i].channel].matched;
    ++tallies[idl[j].channel].matched;
    const auto it = records.find(setting_for(family_of(ls), family_of(li)));
    if (it == records.end()) continue;
    CoincidenceRecord& r = it->second;
    switch (2 * outcome_of(ls) + outcome_of(li)) {
      case 0: ++r.n_ab; break;
      case 1: ++r.n_ab_perp; break;
      case 2: ++r.n_aperp_b; break;
      default: ++r.n_aperp_bperp; break;
    }
  }
  return records;
}

}  // namespace

AggregateResult aggregate_records(std::span<const TimeTagEvent> events,
                                  const ChannelMap& map, std::uint64_t window_ps,
                                  double integration_time) {
  if (!(integration_time > 0.0)) {
    throw InvalidArgument("integration time must be positive");
  }
  AggregateResult out;
  for (std::uint8_t ch : map.channels()) out.tallies[ch] = {};
  for (const TimeTagEvent& e : events) {
    if (!map.lookup(e.channel)) {
      throw MissingChannel("channel " + std::to_string(e.channel) +
                           " has no assignment in the channel map");
    }
    ++out.tallies[e.channel].events;
  }

  std::vector<TimeTagEvent> sorted(events.begin(), events.end());
  std::sort(sorted.begin(), sorted.end());

  out.actual = match_arm(sorted, map, {Arm::signal, Arm::idler}, window_ps,
                         integration_time, out.tallies);
  if (map.has_reference()) {
    out.reference = match_arm(sorted, map,
                              {Arm::reference_signal, Arm::reference_idler},
                              window_ps, integration_time, out.tallies);
  }

  const double window_s = 2.0 * double(window_ps) * 1e-12;
  for (const auto& [setting, record] : out.actual) {
    const auto [fs, fi] = families_of(setting);
    double acc = 0.0;
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const auto cs = *map.channel_of(Arm::signal, label_for(true, fs, x));
        const auto ci = *map.channel_of(Arm::idler, label_for(false, fi, y));
        const double rs = double(out.tallies[cs].events) / integration_time;
        const double ri = double(out.tallies[ci].events) / integration_time;
        acc += rs * ri * window_s * integration_time;
      }
    }
    out.accidental_estimate[setting] = acc;
  }
  return out;
}

namespace {

// Families (0 = unprimed, 1 = primed) with at least one mapped detector.
std::vector<int> mapped_families(const ChannelMap& map, Arm arm) {
  std::vector<int> out;
  const bool signal = is_signal_side(arm);
  for (int f = 0; f < 2; ++f) {
    if (map.channel_of(arm, label_for(signal, f, 0)) ||
        map.channel_of(arm, label_for(signal, f, 1))) {
      out.push_back(f);
    }
  }
  return out;
}

class TagSimulator {
 public:
  TagSimulator(const ChannelMap& map, std::uint64_t seed, double T)
      : map_(map), rng_(seed), t_ps_(std::max<std::uint64_t>(1, std::uint64_t(T * 1e12))) {}

  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(rng_);
  }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::uint64_t time() {
    return std::uniform_int_distribution<std::uint64_t>(0, t_ps_ - 1)(rng_);
  }
  int pick(const std::vector<int>& families) {
    if (families.size() < 2) return families.empty() ? 0 : families.front();
    return coin(0.5) ? families[1] : families[0];
  }
  std::size_t draw(std::discrete_distribution<int>& d) { return std::size_t(d(rng_)); }

  void emit(Arm arm, int family, int outcome, std::uint64_t t) {
    if (auto ch = map_.channel_of(arm, label_for(is_signal_side(arm), family, outcome))) {
      events.push_back({*ch, t});
    }
  }

  std::vector<TimeTagEvent> events;

 private:
  const ChannelMap& map_;
  std::mt19937_64 rng_;
  std::uint64_t t_ps_;
};

std::array<std::discrete_distribution<int>, 4> outcome_tables(
    const DensityMatrix& rho, const MeasurementAngles& angles) {
  std::array<std::discrete_distribution<int>, 4> out;
  const std::array<double, 2> a = {angles.alpha, angles.alpha_prime};
  const std::array<double, 2> b = {angles.beta, angles.beta_prime};
  for (int fs = 0; fs < 2; ++fs) {
    for (int fi = 0; fi < 2; ++fi) {
      const JointProbabilities p = joint_probabilities(rho, a[fs], b[fi]);
      const auto clamp = [](double x) { return std::max(0.0, x); };
      out[2 * fs + fi] = std::discrete_distribution<int>(
          {clamp(p.hh), clamp(p.hv), clamp(p.vh), clamp(p.vv)});
    }
  }
  return out;
}

}  // namespace

std::vector<TimeTagEvent> simulate_tag_stream(
    const DensityMatrix& rho_pol, const DetectorConfig& config,
    const ChannelMap& map, const MeasurementAngles& angles, std::uint64_t seed,
    const std::optional<DensityMatrix>& reference) {
  config.validate();
  const double T = config.integration_time;
  const auto [object_state, weight] = renormalize(rho_pol);
  const DensityMatrix ref_state =
      reference ? renormalize(*reference).state : object_state;

  auto object_tables = outcome_tables(object_state, angles);
  auto reference_tables = outcome_tables(ref_state, angles);

  const std::array<std::vector<int>, 4> families = {
      mapped_families(map, Arm::signal), mapped_families(map, Arm::idler),
      mapped_families(map, Arm::reference_signal),
      mapped_families(map, Arm::reference_idler)};
  const auto fam = [&](Arm arm) -> const std::vector<int>& {
    return families[static_cast<int>(arm)];
  };

  TagSimulator sim(map, seed, T);

  const std::uint64_t pairs = sim.poisson(config.pair_rate * T);
  for (std::uint64_t n = 0; n < pairs; ++n) {
    const std::uint64_t t = sim.time();
    const bool signal_to_object = sim.coin(0.5);
    const bool idler_to_object = sim.coin(0.5);
    const Arm sarm = signal_to_object ? Arm::signal : Arm::reference_signal;
    const Arm iarm = idler_to_object ? Arm::idler : Arm::reference_idler;
    const bool signal_present = !signal_to_object || sim.coin(std::min(1.0, weight));

    const int fs = sim.pick(fam(sarm));
    const int fi = sim.pick(fam(iarm));
    auto& table = (signal_to_object ? object_tables : reference_tables)[2 * fs + fi];
    const std::size_t k = sim.draw(table);
    if (signal_present) sim.emit(sarm, fs, int(k / 2), t);
    sim.emit(iarm, fi, int(k % 2), t);
  }

  const std::uint64_t noise = sim.poisson(config.noise_rate * T);
  for (std::uint64_t n = 0; n < noise; ++n) {
    const std::uint64_t t = sim.time();
    const int f = sim.pick(fam(Arm::signal));
    sim.emit(Arm::signal, f, sim.coin(0.5) ? 1 : 0, t);
  }

  for (std::uint8_t ch : map.channels()) {
    const std::uint64_t darks = sim.poisson(config.dark_rate * T);
    for (std::uint64_t n = 0; n < darks; ++n) sim.events.push_back({ch, sim.time()});
  }

  std::sort(sim.events.begin(), sim.events.end());
  return std::move(sim.events);
}

}  // namespace qisim
