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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qisim/channels.hpp"
#include "qisim/chsh.hpp"
#include "qisim/state.hpp"

namespace qisim {

// Detection model
// ---------------
// Source pairs are emitted at `pair_rate`. The signal photon is split 50:50
// between the object arm and the reference arm; the idler is split 50:50
// between the partner of each. A coincidence count N(x, y) at one polarizer
// setting therefore collects
//
//   true       = pair_rate/4 * w * P_xy * T
//   accidental = r_s * r_i * window * T
//
// where w is the coincidence weight of the detected state (its trace), and
// the singles behind each polarizer are
//
//   r_s = pair_rate/2 * w * P_x + noise_rate/2 + dark_rate
//   r_i = pair_rate/2 * P_y + dark_rate.
//
// Thermal noise enters the object arm only and is unpolarized. `window` is
// the full width of the coincidence acceptance interval.

struct DetectorConfig {
  double pair_rate = 7000.0;           // pairs/s
  double noise_rate = 0.0;             // thermal photons/s into the object arm
  double dark_rate = 175.0;            // counts/s per detector
  double coincidence_window = 200e-9;  // s, full width
  double integration_time = 5.0;       // s per count
  std::uint64_t rng_seed = 1;

  /// Throws InvalidArgument on negative rates or non-positive times.
  void validate() const;
};

/// The same detector with all noise sources switched off.
DetectorConfig ideal_detectors(DetectorConfig config);

/// Definition string recorded alongside SNR sweeps.
inline constexpr std::string_view kSnrDefinition =
    "object_arm_signal_pair_singles/object_arm_noise_singles";

/// Signal-pair singles at the object detector before its polarizer.
double reflected_singles_rate(const DetectorConfig& config, double weight);

/// Thermal noise rate giving `snr` at the object detector.
double noise_rate_for_snr(const DetectorConfig& config, double weight,
                          double snr);

struct ExpectedCounts {
  CountQuadruple total;   // true + accidental
  CountQuadruple true_coincidences;
  CountQuadruple accidental;
};

/// Expected counts at one (alpha, beta) setting. A sub-normalized `rho_pol`
/// scales the pair contribution of the signal arm by its trace.
ExpectedCounts expected_counts(const DensityMatrix& rho_pol,
                               const DetectorConfig& config, double alpha,
                               double beta);

/// Counts for the reference arm: unit coincidence weight, no thermal noise.
ExpectedCounts expected_reference_counts(const DensityMatrix& reference,
                                         const DetectorConfig& config,
                                         double alpha, double beta);

/// Independent Poisson draw per count.
CoincidenceRecord sample_counts(const CountQuadruple& expected, Setting setting,
                                double integration_time, std::uint64_t seed);

/// Expected S (no shot noise) at the given angles.
double expected_chsh_S(const DensityMatrix& rho_pol,
                       const DetectorConfig& config,
                       const MeasurementAngles& angles);

struct ExperimentSummary {
  double s_mean = 0.0;
  double s_std = 0.0;
  double sbar_mean = 0.0;
  double sbar_std = 0.0;
  std::vector<double> s_samples;
  std::vector<double> sbar_samples;
};

/// Simulates `repeats` full sixteen-count measurements. S uses the object-arm
/// counts alone; S-bar divides by the reference-arm denominators. The
/// reference state defaults to the renormalized `rho_pol`.
ExperimentSummary run_chsh_experiment(
    const DensityMatrix& rho_pol, const DetectorConfig& config,
    const MeasurementAngles& angles, std::size_t repeats,
    const std::optional<DensityMatrix>& reference = std::nullopt);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { eta, snr, depolarization, distance };
std::string_view to_string(SweepAxis axis);

struct SweepPoint {
  double x = 0.0;
  double s = 0.0;
  double s_err = 0.0;
  double sbar = 0.0;
  double sbar_err = 0.0;
  Verdict verdict = Verdict::unresolved;
  std::vector<double> extras;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::eta;
  std::vector<std::string> extra_columns;
  std::vector<SweepPoint> points;  // ascending x
  std::string snr_definition{kSnrDefinition};
};

struct Experiment {
  DensityMatrix source;  // polarization state emitted by the source
  DetectorConfig detector;
  MeasurementAngles angles;
  std::size_t repeats = 3;
};

/// Per-point generator seed mixed from the base seed and point index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

SweepResult sweep_eta(std::span<const double> etas, const Experiment& exp,
                      LossVariant variant);
/// Ideal-detector values straight from the density matrices: S of the
/// reduced state and S-bar of the detected coincidence sector.
SweepResult theory_eta(std::span<const double> etas, const Experiment& exp,
                       LossVariant variant);

SweepResult sweep_snr(std::span<const double> snrs, double eta,
                      const Experiment& exp);
/// Expected-count values (accidentals included, no shot noise).
SweepResult theory_snr(std::span<const double> snrs, double eta,
                       const Experiment& exp);

enum class DepolarizationMode {
  channel_p,  // depolarizing channel of strength p on the signal
  qhq_theta,  // waveplate-stack state at half-wave angle theta
};

SweepResult sweep_depolarization(std::span<const double> values,
                                 DepolarizationMode mode, double eta,
                                 const Experiment& exp);
SweepResult theory_depolarization(std::span<const double> values,
                                  DepolarizationMode mode, double eta,
                                  const Experiment& exp);

/// Monte-Carlo distance sweep on the untracked path, eta_eff = exp(-Lambda L).
SweepResult sweep_distance(std::span<const double> distances_km,
                           double alpha_db_per_km, const Experiment& exp);

}  // namespace qisim
