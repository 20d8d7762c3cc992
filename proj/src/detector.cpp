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

#include "qisim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qisim/error.hpp"

namespace qisim {

namespace {

constexpr std::uint64_t kReferenceStream = 0x7265666572656e63ULL;

struct Marginals {
  std::array<double, 4> joint;  // hh, hv, vh, vv of the renormalized state
  std::array<double, 2> signal;
  std::array<double, 2> idler;
  double weight;
};

Marginals marginals(const DensityMatrix& rho_pol, double alpha, double beta) {
  const JointProbabilities p = joint_probabilities(rho_pol, alpha, beta);
  return {{p.hh, p.hv, p.vh, p.vv},
          {p.hh + p.hv, p.vh + p.vv},
          {p.hh + p.vh, p.hv + p.vv},
          p.survival_weight};
}

ExpectedCounts counts_from(const Marginals& m, const DetectorConfig& c,
                           double weight, double noise_rate) {
  ExpectedCounts out{};
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const int k = 2 * x + y;
      const double pair_s = c.pair_rate / 2.0 * weight * m.signal[x];
      const double pair_i = c.pair_rate / 2.0 * m.idler[y];
      const double r_s = pair_s + noise_rate / 2.0 + c.dark_rate;
      const double r_i = pair_i + c.dark_rate;
      out.true_coincidences[k] =
          c.pair_rate / 4.0 * weight * m.joint[k] * c.integration_time;
      // Pair-with-pair accidentals are not counted.
      out.accidental[k] = (r_s * r_i - pair_s * pair_i) *
                          c.coincidence_window * c.integration_time;
      out.total[k] = out.true_coincidences[k] + out.accidental[k];
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::vector<double> ascending(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

SweepPoint point_from(double x, const ExperimentSummary& s) {
  SweepPoint p;
  p.x = x;
  p.s = s.s_mean;
  p.s_err = s.s_std;
  p.sbar = s.sbar_mean;
  p.sbar_err = s.sbar_std;
  p.verdict = classify(s.s_mean);
  return p;
}

DensityMatrix detected_after_object(const DensityMatrix& source, double eta,
                                    LossVariant variant) {
  return coincidence_sector(
      object_channel(with_photon_pair(source), ObjectModel{eta, variant}));
}

DensityMatrix detected_after_depolarization(const DensityMatrix& source,
                                            double value,
                                            DepolarizationMode mode,
                                            double eta) {
  if (mode == DepolarizationMode::channel_p) {
    const DensityMatrix lossy = object_channel(
        with_photon_pair(source), ObjectModel{eta, LossVariant::postselected});
    return coincidence_sector(depolarize_signal(lossy, value));
  }
  const DensityMatrix rotated(qhq_state(value).state);
  return detected_after_object(rotated, eta, LossVariant::postselected);
}

std::vector<double> depolarization_extras(const DensityMatrix& detected,
                                          double value,
                                          DepolarizationMode mode) {
  const double p_nominal =
      mode == DepolarizationMode::channel_p ? value : qhq_nominal_p(value);
  const double quarter = std::numbers::pi / 4.0;
  return {p_nominal, std::abs(correlation_E(detected, quarter, quarter))};
}

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "eta = " << eta << " is outside (0, 1]";
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(pair_rate >= 0.0) || !(noise_rate >= 0.0) || !(dark_rate >= 0.0)) {
    throw InvalidArgument("detector rates must be non-negative");
  }
  if (!(coincidence_window > 0.0)) {
    throw InvalidArgument("coincidence window must be positive");
  }
  if (!(integration_time > 0.0)) {
    throw InvalidArgument("integration time must be positive");
  }
}

DetectorConfig ideal_detectors(DetectorConfig config) {
  config.noise_rate = 0.0;
  config.dark_rate = 0.0;
  return config;
}

double reflected_singles_rate(const DetectorConfig& config, double weight) {
  return config.pair_rate / 2.0 * weight;
}

double noise_rate_for_snr(const DetectorConfig& config, double weight,
                          double snr) {
  if (!(snr > 0.0)) throw InvalidArgument("SNR must be positive");
  return reflected_singles_rate(config, weight) / snr;
}

ExpectedCounts expected_counts(const DensityMatrix& rho_pol,
                               const DetectorConfig& config, double alpha,
                               double beta) {
  config.validate();
  const Marginals m = marginals(rho_pol, alpha, beta);
  return counts_from(m, config, m.weight, config.noise_rate);
}

ExpectedCounts expected_reference_counts(const DensityMatrix& reference,
                                         const DetectorConfig& config,
                                         double alpha, double beta) {
  config.validate();
  return counts_from(marginals(reference, alpha, beta), config, 1.0, 0.0);
}

CoincidenceRecord sample_counts(const CountQuadruple& expected, Setting setting,
                                double integration_time, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::array<std::uint64_t, 4> n{};
  for (int k = 0; k < 4; ++k) {
    if (!(expected[k] >= 0.0)) {
      throw InvalidArgument("expected counts must be non-negative");
    }
    if (expected[k] > 0.0) {
      std::poisson_distribution<std::uint64_t> draw(expected[k]);
      n[k] = draw(rng);
    }
  }
  return {setting, n[0], n[1], n[2], n[3], integration_time};
}

double expected_chsh_S(const DensityMatrix& rho_pol,
                       const DetectorConfig& config,
                       const MeasurementAngles& angles) {
  double s = 0.0;
  for (Setting setting : kAllSettings) {
    const auto [a, b] = setting_angles(angles, setting);
    s += chsh_sign(setting) *
         E_from_counts(expected_counts(rho_pol, config, a, b).total);
  }
  return std::abs(s);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ExperimentSummary run_chsh_experiment(
    const DensityMatrix& rho_pol, const DetectorConfig& config,
    const MeasurementAngles& angles, std::size_t repeats,
    const std::optional<DensityMatrix>& reference) {
  if (repeats == 0) throw InvalidArgument("repeats must be >= 1");
  config.validate();
  const DensityMatrix ref =
      reference ? renormalize(*reference).state : renormalize(rho_pol).state;

  std::array<ExpectedCounts, 4> actual_expected{};
  std::array<ExpectedCounts, 4> reference_expected{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [a, b] = setting_angles(angles, kAllSettings[k]);
    actual_expected[k] = expected_counts(rho_pol, config, a, b);
    reference_expected[k] = expected_reference_counts(ref, config, a, b);
  }

  ExperimentSummary out;
  for (std::size_t r = 0; r < repeats; ++r) {
    const std::uint64_t repeat_seed = derive_seed(config.rng_seed, r);
    RecordSet actual;
    RecordSet refs;
    for (std::size_t k = 0; k < 4; ++k) {
      const Setting setting = kAllSettings[k];
      actual[setting] =
          sample_counts(actual_expected[k].total, setting,
                        config.integration_time, derive_seed(repeat_seed, k));
      refs[setting] = sample_counts(
          reference_expected[k].total, setting, config.integration_time,
          derive_seed(repeat_seed ^ kReferenceStream, k));
    }
    out.s_samples.push_back(chsh_S_from_counts(actual).s_value);
    out.sbar_samples.push_back(chsh_S_from_counts(actual, &refs).s_value);
  }
  out.s_mean = mean_of(out.s_samples);
  out.s_std = std_of(out.s_samples, out.s_mean);
  out.sbar_mean = mean_of(out.sbar_samples);
  out.sbar_std = std_of(out.sbar_samples, out.sbar_mean);
  return out;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::eta: return "eta";
    case SweepAxis::snr: return "snr";
    case SweepAxis::depolarization: return "depol";
    case SweepAxis::distance: return "range";
  }
  return "?";
}

SweepResult sweep_eta(std::span<const double> etas, const Experiment& exp,
                      LossVariant variant) {
  SweepResult result;
  result.axis = SweepAxis::eta;
  result.extra_columns = {"coincidence_weight"};
  const auto xs = ascending(etas);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_eta(xs[i]);
    const DensityMatrix detected =
        detected_after_object(exp.source, xs[i], variant);
    DetectorConfig cfg = exp.detector;
    cfg.rng_seed = derive_seed(exp.detector.rng_seed, i);
    SweepPoint p = point_from(
        xs[i], run_chsh_experiment(detected, cfg, exp.angles, exp.repeats,
                                   exp.source));
    p.extras = {detected.trace()};
    result.points.push_back(std::move(p));
  }
  return result;
}

SweepResult theory_eta(std::span<const double> etas, const Experiment& exp,
                       LossVariant variant) {
  SweepResult result;
  result.axis = SweepAxis::eta;
  result.extra_columns = {"coincidence_weight"};
  for (double eta : ascending(etas)) {
    require_eta(eta);
    const DensityMatrix out = object_channel(with_photon_pair(exp.source),
                                             ObjectModel{eta, variant});
    const DensityMatrix detected = coincidence_sector(out);
    SweepPoint p;
    p.x = eta;
    p.s = chsh_S(polarization_part(out), exp.angles).s_value;
    p.sbar = normalized_chsh_S(detected, exp.source, exp.angles).s_value;
    p.verdict = classify(p.s);
    p.extras = {detected.trace()};
    result.points.push_back(std::move(p));
  }
  return result;
}

SweepResult sweep_snr(std::span<const double> snrs, double eta,
                      const Experiment& exp) {
  require_eta(eta);
  SweepResult result;
  result.axis = SweepAxis::snr;
  result.extra_columns = {"noise_rate"};
  const DensityMatrix detected =
      detected_after_object(exp.source, eta, LossVariant::postselected);
  const auto xs = ascending(snrs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    DetectorConfig cfg = exp.detector;
    cfg.noise_rate = noise_rate_for_snr(cfg, detected.trace(), xs[i]);
    cfg.rng_seed = derive_seed(exp.detector.rng_seed, i);
    SweepPoint p = point_from(
        xs[i], run_chsh_experiment(detected, cfg, exp.angles, exp.repeats,
                                   exp.source));
    p.extras = {cfg.noise_rate};
    result.points.push_back(std::move(p));
  }
  return result;
}

SweepResult theory_snr(std::span<const double> snrs, double eta,
                       const Experiment& exp) {
  require_eta(eta);
  SweepResult result;
  result.axis = SweepAxis::snr;
  result.extra_columns = {"noise_rate"};
  const DensityMatrix detected =
      detected_after_object(exp.source, eta, LossVariant::postselected);
  const DensityMatrix ref = renormalize(exp.source).state;
  for (double snr : ascending(snrs)) {
    DetectorConfig cfg = exp.detector;
    cfg.noise_rate = noise_rate_for_snr(cfg, detected.trace(), snr);
    double sbar = 0.0;
    for (Setting setting : kAllSettings) {
      const auto [a, b] = setting_angles(exp.angles, setting);
      sbar += chsh_sign(setting) *
              normalized_E_from_counts(
                  expected_counts(detected, cfg, a, b).total,
                  expected_reference_counts(ref, cfg, a, b).total);
    }
    SweepPoint p;
    p.x = snr;
    p.s = expected_chsh_S(detected, cfg, exp.angles);
    p.sbar = std::abs(sbar);
    p.verdict = classify(p.s);
    p.extras = {cfg.noise_rate};
    result.points.push_back(std::move(p));
  }
  return result;
}

SweepResult sweep_depolarization(std::span<const double> values,
                                 DepolarizationMode mode, double eta,
                                 const Experiment& exp) {
  require_eta(eta);
  SweepResult result;
  result.axis = SweepAxis::depolarization;
  result.extra_columns = {"p_nominal", "visibility_ad"};
  const auto xs = ascending(values);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const DensityMatrix detected =
        detected_after_depolarization(exp.source, xs[i], mode, eta);
    DetectorConfig cfg = exp.detector;
    cfg.rng_seed = derive_seed(exp.detector.rng_seed, i);
    SweepPoint p = point_from(
        xs[i], run_chsh_experiment(detected, cfg, exp.angles, exp.repeats,
                                   exp.source));
    p.extras = depolarization_extras(detected, xs[i], mode);
    result.points.push_back(std::move(p));
  }
  return result;
}

SweepResult theory_depolarization(std::span<const double> values,
                                  DepolarizationMode mode, double eta,
                                  const Experiment& exp) {
  require_eta(eta);
  SweepResult result;
  result.axis = SweepAxis::depolarization;
  result.extra_columns = {"p_nominal", "visibility_ad"};
  for (double x : ascending(values)) {
    const DensityMatrix detected =
        detected_after_depolarization(exp.source, x, mode, eta);
    SweepPoint p;
    p.x = x;
    p.s = chsh_S(detected, exp.angles).s_value;
    p.sbar = normalized_chsh_S(detected, exp.source, exp.angles).s_value;
    p.verdict = classify(p.s);
    p.extras = depolarization_extras(detected, x, mode);
    result.points.push_back(std::move(p));
  }
  return result;
}

SweepResult sweep_distance(std::span<const double> distances_km,
                           double alpha_db_per_km, const Experiment& exp) {
  SweepResult result;
  result.axis = SweepAxis::distance;
  result.extra_columns = {"survival"};
  const auto xs = ascending(distances_km);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const AttenuationModel model{alpha_db_per_km, xs[i]};
    const DensityMatrix detected = coincidence_sector(attenuate_signal(
        with_photon_pair(exp.source), model, LossVariant::untracked));
    DetectorConfig cfg = exp.detector;
    cfg.rng_seed = derive_seed(exp.detector.rng_seed, i);
    SweepPoint p = point_from(
        xs[i], run_chsh_experiment(detected, cfg, exp.angles, exp.repeats,
                                   exp.source));
    p.extras = {model.survival()};
    result.points.push_back(std::move(p));
  }
  return result;
}

}  // namespace qisim
