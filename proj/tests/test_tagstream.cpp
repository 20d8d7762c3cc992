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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qisim/channels.hpp"
#include "qisim/error.hpp"
#include "qisim/tagstream.hpp"

using namespace qisim;

namespace {

std::vector<TimeTagEvent> random_events(oracle::Rng& rng, std::size_t n) {
  std::vector<TimeTagEvent> v(n);
  for (auto& e : v) {
    e.channel = static_cast<std::uint8_t>(rng.integer(0, 255));
    e.timestamp_ps = rng.integer(0, ~std::uint64_t{0});
  }
  return v;
}

std::vector<TimeTagEvent> on_side(const std::vector<TimeTagEvent>& events, const ChannelMap& map,
                                  bool signal_side) {
  std::vector<TimeTagEvent> out;
  for (const auto& e : events) {
    const Arm arm = map.lookup(e.channel)->arm;
    const bool is_signal = arm == Arm::signal || arm == Arm::reference_signal;
    if (is_signal == signal_side) out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto ev = parse_tags("1,1000\n2,1020\n", TagFormat::csv);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == TimeTagEvent{1, 1000});
  CHECK(ev[1] == TimeTagEvent{2, 1020});

  CHECK(parse_tags("channel,timestamp_ps\r\n3,7\r\n\n", TagFormat::csv).size() == 1);
  CHECK(parse_tags("", TagFormat::csv).empty());

  try {
    parse_tags("1,10\n2,20\nbad\n", TagFormat::csv);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse_tags("1,10\n300,20\n", TagFormat::csv), ParseError);
  CHECK_THROWS_AS(parse_tags("1,5\n1,-5\n", TagFormat::csv), ParseError);

  const std::set<std::uint8_t> allowed = {1, 2};
  CHECK_NOTHROW(parse_tags("1,10\n2,20\n", TagFormat::csv, &allowed));
  CHECK_THROWS_AS(parse_tags("1,10\n9,20\n", TagFormat::csv, &allowed), ValidationError);
}

TEST_CASE("binary parsing") {
  const std::vector<TimeTagEvent> ev = {{3, 0x0102030405060708ULL}, {255, 0}};
  const std::string bytes = write_tags(ev, TagFormat::binary);
  REQUIRE(bytes.size() == 18);
  CHECK(static_cast<unsigned char>(bytes[0]) == 3);
  CHECK(static_cast<unsigned char>(bytes[1]) == 0x08);
  CHECK(static_cast<unsigned char>(bytes[8]) == 0x01);
  CHECK(parse_tags(bytes, TagFormat::binary) == ev);

  try {
    parse_tags(bytes + std::string("\x01\x02", 2), TagFormat::binary);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 18);
  }
  const std::set<std::uint8_t> allowed = {3};
  CHECK_THROWS_AS(parse_tags(bytes, TagFormat::binary, &allowed), ValidationError);
}

TEST_CASE("tag format names") {
  CHECK(parse_tag_format("csv") == TagFormat::csv);
  CHECK(parse_tag_format("binary") == TagFormat::binary);
  CHECK(parse_tag_format("bin") == TagFormat::binary);
  CHECK_FALSE(parse_tag_format("json").has_value());
}

TEST_CASE("million event round trip") {
  oracle::Rng rng(41);
  const auto ev = random_events(rng, 1000000);
  const std::string bin = write_tags(ev, TagFormat::binary);
  CHECK(parse_tags(bin, TagFormat::binary) == ev);
  CHECK(write_tags(parse_tags(bin, TagFormat::binary), TagFormat::binary) == bin);
  const std::string csv = write_tags(ev, TagFormat::csv);
  CHECK(csv.rfind("channel,timestamp_ps\n", 0) == 0);
  CHECK(parse_tags(csv, TagFormat::csv) == ev);
}

TEST_CASE("coincidence window is inclusive") {
  const std::vector<std::uint64_t> a = {0};
  CHECK(count_coincidences(a, std::vector<std::uint64_t>{1000}, 1000) == 1);
  CHECK(count_coincidences(a, std::vector<std::uint64_t>{1001}, 1000) == 0);
  CHECK(count_coincidences(std::vector<std::uint64_t>{5000}, std::vector<std::uint64_t>{4000}, 1000) == 1);
  CHECK(count_coincidences({}, a, 10) == 0);
  // Each event is used once.
  CHECK(count_coincidences(std::vector<std::uint64_t>{10, 10}, std::vector<std::uint64_t>{10}, 0) == 1);
  CHECK_THROWS_AS(count_coincidences(std::vector<std::uint64_t>{5, 1}, a, 10), ContractError);

  const std::vector<std::uint64_t> x = {0, 10}, y = {4, 30};
  const auto pairs = match_coincidences(x, y, 6);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
}

TEST_CASE("channel maps") {
  const ChannelMap m = ChannelMap::single_shot();
  CHECK(m.channels().size() == 16);
  CHECK(m.has_reference());
  CHECK(m.lookup(1) == ChannelAssignment{Arm::signal, SettingLabel::alpha});
  CHECK(m.lookup(8) == ChannelAssignment{Arm::idler, SettingLabel::beta_prime_perp});
  CHECK(m.lookup(9)->arm == Arm::reference_signal);
  CHECK_FALSE(m.lookup(17).has_value());
  CHECK(ChannelMap::single_shot(1, false).channels().size() == 8);
  CHECK(ChannelMap::sequential(Setting::ab_prime, 1, false).channels().size() == 4);
  CHECK(ChannelMap::sequential(Setting::ab_prime).channel_of(Arm::idler, SettingLabel::beta_prime).has_value());

  ChannelMap custom;
  custom.assign(4, Arm::signal, SettingLabel::alpha);
  CHECK_THROWS_AS(custom.assign(4, Arm::idler, SettingLabel::beta), InvalidArgument);
  CHECK_THROWS_AS(custom.assign(5, Arm::signal, SettingLabel::alpha), InvalidArgument);
  CHECK_THROWS_AS(custom.assign(6, Arm::signal, SettingLabel::beta), InvalidArgument);
  CHECK(parse_arm("reference_idler") == Arm::reference_idler);
  CHECK(parse_setting_label("alpha_prime_perp") == SettingLabel::alpha_prime_perp);
  CHECK(to_string(SettingLabel::beta_perp) == "beta_perp");
}

TEST_CASE("aggregation of an empty stream") {
  const AggregateResult r = aggregate_records({}, ChannelMap::single_shot(), 1000, 5.0);
  CHECK(r.actual.size() == 4);
  for (const auto& [s, rec] : r.actual) CHECK(rec.total() == 0);
  CHECK_THROWS_AS(chsh_S_from_counts(r.actual), NoCoincidences);
}

TEST_CASE("aggregation rejects unmapped channels") {
  const std::vector<TimeTagEvent> ev = {{1, 10}, {42, 20}};
  CHECK_THROWS_AS(aggregate_records(ev, ChannelMap::single_shot(), 1000, 5.0), MissingChannel);
}

TEST_CASE("aggregation of a hand-built stream") {
  const ChannelMap m = ChannelMap::sequential(Setting::ab, 1, false);
  const auto ch = [&](Arm a, SettingLabel l) { return *m.channel_of(a, l); };
  std::vector<TimeTagEvent> ev = {
      {ch(Arm::signal, SettingLabel::alpha), 100},
      {ch(Arm::idler, SettingLabel::beta), 150},
      {ch(Arm::signal, SettingLabel::alpha_perp), 5000},
      {ch(Arm::idler, SettingLabel::beta), 5100},
      {ch(Arm::signal, SettingLabel::alpha), 9000},
  };
  std::sort(ev.begin(), ev.end());
  const AggregateResult r = aggregate_records(ev, m, 200, 1.0);
  REQUIRE(r.actual.count(Setting::ab) == 1);
  const CoincidenceRecord& rec = r.actual.at(Setting::ab);
  CHECK(rec.n_ab == 1);
  CHECK(rec.n_aperp_b == 1);
  CHECK(rec.total() == 2);
  CHECK(r.tallies.at(ch(Arm::signal, SettingLabel::alpha)).unmatched() == 1);
  CHECK(r.reference.empty());
}

TEST_CASE("simulated streams") {
  DetectorConfig zero;
  zero.pair_rate = 0;
  zero.dark_rate = 0;
  CHECK(simulate_tag_stream(DensityMatrix(singlet()), zero, ChannelMap::single_shot(), {}, 1).empty());

  SUBCASE("pairs only: every signal-side event has an idler-side partner") {
    DetectorConfig c = ideal_detectors({});
    const ChannelMap m = ChannelMap::single_shot();
    const auto ev = simulate_tag_stream(DensityMatrix(singlet()), c, m, {}, 2);
    CHECK(std::is_sorted(ev.begin(), ev.end()));
    std::vector<std::uint64_t> s, i;
    for (const auto& e : on_side(ev, m, true)) s.push_back(e.timestamp_ps);
    for (const auto& e : on_side(ev, m, false)) i.push_back(e.timestamp_ps);
    CHECK(s.size() > 1000);
    CHECK(count_coincidences(s, i, kDefaultWindowPs) == s.size());
  }

  SUBCASE("seeded determinism") {
    const DetectorConfig c;
    const auto a = simulate_tag_stream(DensityMatrix(singlet()), c, ChannelMap::single_shot(), {}, 9);
    const auto b = simulate_tag_stream(DensityMatrix(singlet()), c, ChannelMap::single_shot(), {}, 9);
    CHECK(a == b);
  }
}

TEST_CASE("noise-only stream is isotropic") {
  DetectorConfig c;
  c.pair_rate = 0;
  c.noise_rate = 5e4;
  c.dark_rate = 2e4;
  const ChannelMap m = ChannelMap::single_shot(1, false);
  const auto ev = simulate_tag_stream(DensityMatrix(singlet()), c, m, {}, 5);
  const AggregateResult r = aggregate_records(ev, m, 100000, c.integration_time);
  for (const auto& [s, rec] : r.actual) {
    REQUIRE(rec.total() > 500);
    CHECK(std::abs(E_from_counts(rec)) < 5 / std::sqrt(double(rec.total())));
    CHECK(double(rec.total()) == doctest::Approx(r.accidental_estimate.at(s)).epsilon(0.2));
  }
}

TEST_CASE("end to end singlet") {
  DetectorConfig c;
  c.integration_time = 50;
  const DensityMatrix psi(singlet());
  const ChannelMap m = ChannelMap::single_shot();
  const auto ev = simulate_tag_stream(psi, c, m, {}, 17);
  const auto parsed = parse_tags(write_tags(ev, TagFormat::binary), TagFormat::binary);
  REQUIRE(parsed == ev);
  const AggregateResult r = aggregate_records(parsed, m, kDefaultWindowPs, c.integration_time);
  const double s = chsh_S_from_counts(r.actual).s_value;
  const double err = chsh_S_stderr(r.actual);
  CHECK(std::abs(s - 2 * std::numbers::sqrt2) < 5 * err);
  const double sbar = chsh_S_from_counts(r.actual, &r.reference).s_value;
  CHECK(std::abs(sbar - 2 * std::numbers::sqrt2) < 5 * std::sqrt(2.0) * err);

  // Sequential runs, one setting at a time, give the same S within error.
  RecordSet sequential;
  std::uint64_t seed = 100;
  for (Setting setting : kAllSettings) {
    const ChannelMap sm = ChannelMap::sequential(setting, 1, false);
    DetectorConfig sc = c;
    sc.integration_time = c.integration_time / 4;
    const auto sev = simulate_tag_stream(psi, sc, sm, {}, seed++);
    sequential[setting] = aggregate_records(sev, sm, kDefaultWindowPs, sc.integration_time).actual.at(setting);
  }
  const double s_seq = chsh_S_from_counts(sequential).s_value;
  const double err_seq = chsh_S_stderr(sequential);
  CHECK(std::abs(s - s_seq) < 5 * std::hypot(err, err_seq));
}

// --- properties -------------------------------------------------------------

TEST_CASE("property: two-pointer matcher equals the brute-force greedy matcher") {
  oracle::Rng rng(42);
  for (int t = 0; t < 500; ++t) {
    const std::size_t na = rng.integer(0, t < 50 ? 2000 : 300);
    const std::size_t nb = rng.integer(0, t < 50 ? 2000 : 300);
    const std::uint64_t span = rng.integer(1, 200000);
    const std::uint64_t w = rng.integer(0, 2000);
    const auto a = oracle::random_times(rng, na, span);
    const auto b = oracle::random_times(rng, nb, span);
    const std::size_t fast = count_coincidences(a, b, w);
    CHECK(fast == oracle::brute_force_greedy(a, b, w));
    CHECK(fast == count_coincidences(b, a, w));
    if (t >= 50 && t < 150) CHECK(fast == oracle::maximum_matching(a, b, w));
  }
}

TEST_CASE("property: matched pairs lie inside the window and are disjoint") {
  oracle::Rng rng(43);
  for (int t = 0; t < 100; ++t) {
    const auto a = oracle::random_times(rng, 200, 50000);
    const auto b = oracle::random_times(rng, 200, 50000);
    const std::uint64_t w = rng.integer(0, 500);
    const auto pairs = match_coincidences(a, b, w);
    std::vector<bool> ua(a.size()), ub(b.size());
    for (auto [i, j] : pairs) {
      CHECK(oracle::within(a[i], b[j], w));
      CHECK_FALSE(ua[i]);
      CHECK_FALSE(ub[j]);
      ua[i] = ub[j] = true;
    }
  }
}

TEST_CASE("property: binary round trip is bit exact") {
  oracle::Rng rng(44);
  for (int t = 0; t < 50; ++t) {
    std::string bytes(kBinaryRecordSize * rng.integer(0, 200), '\0');
    for (char& ch : bytes) ch = static_cast<char>(rng.integer(0, 255));
    CHECK(write_tags(parse_tags(bytes, TagFormat::binary), TagFormat::binary) == bytes);
  }
}

TEST_CASE("property: aggregation conserves events") {
  oracle::Rng rng(45);
  for (int t = 0; t < 10; ++t) {
    DetectorConfig c;
    c.integration_time = 1;
    c.noise_rate = rng.uniform(0, 5000);
    c.dark_rate = rng.uniform(0, 2000);
    const ChannelMap m = t % 2 ? ChannelMap::single_shot() : ChannelMap::sequential(Setting::a_prime_b);
    const auto ev = simulate_tag_stream(DensityMatrix(singlet()), c, m, {}, 1000 + t);
    const AggregateResult r = aggregate_records(ev, m, kDefaultWindowPs, c.integration_time);
    std::map<std::uint8_t, std::uint64_t> counts;
    for (const auto& e : ev) ++counts[e.channel];
    std::uint64_t matched = 0;
    for (const auto& [ch, tally] : r.tallies) {
      CHECK(tally.matched + tally.unmatched() == counts[ch]);
      CHECK(tally.matched <= tally.events);
      matched += tally.matched;
    }
    std::uint64_t coincidences = 0;
    for (const auto& [s, rec] : r.actual) coincidences += rec.total();
    for (const auto& [s, rec] : r.reference) coincidences += rec.total();
    // Each coincidence consumes one signal-side and one idler-side event.
    CHECK(matched == 2 * coincidences);
  }
}
