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

#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "qisim/channels.hpp"
#include "qisim/chsh.hpp"
#include "qisim/state.hpp"

namespace qisim {

// How single-photon survival t = exp(-Lambda L) enters the normalized value.
//   amplitude:   t is used as the untracked loss amplitude eta, so the
//                coincidence weight and S-bar scale as t^2
//   probability: t is the coincidence weight itself, S-bar = t S
enum class SurvivalConvention { amplitude, probability };

std::string_view to_string(SurvivalConvention c);

struct RangeProfile {
  AttenuationModel model;  // distance_km unused
  std::vector<double> distances;
  std::vector<double> s_values;          // post-selected path
  std::vector<double> sbar_values;       // amplitude convention
  std::vector<double> sbar_probability;  // probability convention
  std::vector<double> purity;            // single-photon number state
  std::vector<double> entropy;
};

/// Throws InvalidArgument unless distances are >= 0 and strictly increasing.
RangeProfile profile(const AttenuationModel& model,
                     std::span<const double> distances,
                     const DensityMatrix& probe_pol,
                     const MeasurementAngles& angles = {});

/// S-bar at one distance under the given convention.
double normalized_s_at(const AttenuationModel& model, double distance_km,
                       const DensityMatrix& probe_pol,
                       SurvivalConvention convention,
                       const MeasurementAngles& angles = {});

inline constexpr double kRangeDomainKm = 100.0;
inline constexpr double kRangeResolutionKm = 0.01;

/// Smallest distance where S-bar falls to `threshold`, bisected to 0.01 km on
/// [0, 100] km. Returns 0 when the curve starts at or below the threshold and
/// +infinity when it never gets there on the domain. Threshold must lie in
/// (0, 2 sqrt 2].
double max_range(const AttenuationModel& model, const DensityMatrix& probe_pol,
                 double threshold,
                 SurvivalConvention convention = SurvivalConvention::amplitude,
                 const MeasurementAngles& angles = {});

}  // namespace qisim
