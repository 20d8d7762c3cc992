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

#include <array>
#include <cstdint>
#include <map>
#include <numbers>
#include <string_view>
#include <utility>

#include "qisim/state.hpp"

namespace qisim {

/// Polarizer settings (radians) on the signal (alpha) and idler (beta) arms.
struct MeasurementAngles {
  double alpha = 0.0;
  double alpha_prime = std::numbers::pi / 4.0;
  double beta = std::numbers::pi / 8.0;
  double beta_prime = 3.0 * std::numbers::pi / 8.0;

  /// (0, pi/4, pi/8, 3pi/8).
  static MeasurementAngles canonical() { return {}; }
};

/// The four angle pairs entering the CHSH combination.
enum class Setting { ab, ab_prime, a_prime_b, a_prime_b_prime };

inline constexpr std::array<Setting, 4> kAllSettings = {
    Setting::ab, Setting::ab_prime, Setting::a_prime_b,
    Setting::a_prime_b_prime};

std::string_view to_string(Setting s);
/// (signal angle, idler angle) of a setting.
std::pair<double, double> setting_angles(const MeasurementAngles& angles,
                                         Setting s);
/// Sign of the setting's E term in S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
double chsh_sign(Setting s);

enum class Outcome { H, V };

/// Rank-1 projector onto cos(a)|H> - sin(a)|V> (H) or sin(a)|H> + cos(a)|V> (V).
ComplexMatrix projector(double angle, Outcome outcome);

struct JointProbabilities {
  double hh = 0.0;
  double hv = 0.0;
  double vh = 0.0;
  double vv = 0.0;
  /// Trace of the input before renormalization.
  double survival_weight = 1.0;
};

JointProbabilities joint_probabilities(const DensityMatrix& rho_pol,
                                       double alpha, double beta);
double correlation_E(const DensityMatrix& rho_pol, double alpha, double beta);

enum class Verdict { quantum, residual_quantum, unresolved };

std::string_view to_string(Verdict v);
/// quantum if s > 2, residual_quantum if sqrt(2) <= s <= 2, else unresolved.
Verdict classify(double s);

struct ChshResult {
  double s_value = 0.0;
  Verdict verdict = Verdict::unresolved;
  MeasurementAngles angles;
  double survival_weight = 1.0;
};

ChshResult chsh_S(const DensityMatrix& rho_pol, const MeasurementAngles& angles);

/// Maximum of S over all polarizer angles. The value comes from the
/// correlation-matrix formula; the reported angles come from an independent
/// grid search with local refinement.
ChshResult chsh_S_max(const DensityMatrix& rho_pol);

/// 2 sqrt(s1^2 + s2^2) for the singular values of the X/Z block of the
/// correlation tensor T_ij = Tr(rho sigma_i (x) sigma_j). Linear polarizers
/// only reach Bloch directions in that plane.
double chsh_S_max_analytic(const DensityMatrix& rho_pol);

/// Horodecki bound over unrestricted Bloch directions, for comparison.
double horodecki_bound(const DensityMatrix& rho_pol);

struct AngleSearchResult {
  double s_value = 0.0;
  MeasurementAngles angles;
};

/// Grid search over (alpha, alpha') with the beta, beta' maxima taken per
/// grid cell, followed by exact coordinate ascent. Uses only projective
/// probabilities, never the correlation tensor.
AngleSearchResult chsh_S_max_search(const DensityMatrix& rho_pol,
                                    std::size_t grid = 60);

/// S-bar from density matrices: numerators from `actual` (possibly
/// sub-normalized), denominators from the trace of `reference`.
ChshResult normalized_chsh_S(const DensityMatrix& actual,
                             const DensityMatrix& reference,
                             const MeasurementAngles& angles);

// ---------------------------------------------------------------------------
// Coincidence counts
// ---------------------------------------------------------------------------

/// Counts N(a,b), N(a,b_perp), N(a_perp,b), N(a_perp,b_perp) for one setting.
struct CoincidenceRecord {
  Setting setting = Setting::ab;
  std::uint64_t n_ab = 0;
  std::uint64_t n_ab_perp = 0;
  std::uint64_t n_aperp_b = 0;
  std::uint64_t n_aperp_bperp = 0;
  double integration_time = 0.0;

  std::uint64_t total() const {
    return n_ab + n_ab_perp + n_aperp_b + n_aperp_bperp;
  }
  bool operator==(const CoincidenceRecord&) const = default;
};

using RecordSet = std::map<Setting, CoincidenceRecord>;

/// Real-valued count quadruple in the order ab, ab_perp, aperp_b, aperp_bperp.
using CountQuadruple = std::array<double, 4>;

CountQuadruple to_quadruple(const CoincidenceRecord& r);

/// Exact numerator/denominator of the count-based correlation.
struct CountRatio {
  std::int64_t numerator = 0;
  std::uint64_t denominator = 0;
};
CountRatio correlation_ratio(const CoincidenceRecord& r);

double E_from_counts(const CoincidenceRecord& r);
double E_from_counts(const CountQuadruple& counts);
/// Numerator from `actual` over the denominator of `reference`.
double normalized_E_from_counts(const CoincidenceRecord& actual,
                                const CoincidenceRecord& reference);
double normalized_E_from_counts(const CountQuadruple& actual,
                                const CountQuadruple& reference);

/// S from four records, or S-bar when `reference` is given.
ChshResult chsh_S_from_counts(const RecordSet& records,
                              const RecordSet* reference = nullptr);

/// Shot-noise standard error of the count-based S, propagating
/// Var(E) = (1 - E^2) / N per setting.
double chsh_S_stderr(const RecordSet& records);

}  // namespace qisim
