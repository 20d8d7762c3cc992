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

#include "qisim/range.hpp"

#include <cmath>
#include <numbers>

#include "qisim/error.hpp"

namespace qisim {

std::string_view to_string(SurvivalConvention c) {
  return c == SurvivalConvention::amplitude ? "amplitude" : "probability";
}

namespace {

AttenuationModel at(const AttenuationModel& model, double distance_km) {
  AttenuationModel m = model;
  m.distance_km = distance_km;
  return m;
}

}  // namespace

double normalized_s_at(const AttenuationModel& model, double distance_km,
                       const DensityMatrix& probe_pol,
                       SurvivalConvention convention,
                       const MeasurementAngles& angles) {
  const AttenuationModel m = at(model, distance_km);
  if (convention == SurvivalConvention::amplitude) {
    const DensityMatrix detected = coincidence_sector(
        attenuate_signal(with_photon_pair(probe_pol), m, LossVariant::untracked));
    return normalized_chsh_S(detected, probe_pol, angles).s_value;
  }
  const DensityMatrix scaled(probe_pol.space(), probe_pol.matrix() * m.survival(),
                             TraceClass::subnormalized);
  return normalized_chsh_S(scaled, probe_pol, angles).s_value;
}

RangeProfile profile(const AttenuationModel& model,
                     std::span<const double> distances,
                     const DensityMatrix& probe_pol,
                     const MeasurementAngles& angles) {
  RangeProfile out;
  out.model = model;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double L = distances[i];
    if (!(L >= 0.0)) throw InvalidArgument("distances must be non-negative");
    if (i > 0 && !(L > distances[i - 1])) {
      throw InvalidArgument("distances must be strictly increasing");
    }
    const AttenuationModel m = at(model, L);
    const DensityMatrix post = coincidence_sector(attenuate_signal(
        with_photon_pair(probe_pol), m, LossVariant::postselected));
    out.distances.push_back(L);
    out.s_values.push_back(chsh_S(post, angles).s_value);
    out.sbar_values.push_back(normalized_s_at(
        model, L, probe_pol, SurvivalConvention::amplitude, angles));
    out.sbar_probability.push_back(normalized_s_at(
        model, L, probe_pol, SurvivalConvention::probability, angles));
    const DensityMatrix photon = attenuation_fock(1, m);
    out.purity.push_back(purity(photon));
    out.entropy.push_back(von_neumann_entropy(photon));
  }
  return out;
}

double max_range(const AttenuationModel& model, const DensityMatrix& probe_pol,
                 double threshold, SurvivalConvention convention,
                 const MeasurementAngles& angles) {
  if (!(threshold > 0.0 && threshold <= 2.0 * std::numbers::sqrt2 + 1e-12)) {
    throw InvalidArgument("threshold must lie in (0, 2 sqrt 2]");
  }
  const auto f = [&](double L) {
    return normalized_s_at(model, L, probe_pol, convention, angles);
  };
  if (f(0.0) <= threshold + 1e-12) return 0.0;
  if (f(kRangeDomainKm) > threshold) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0, hi = kRangeDomainKm;  // f(lo) > threshold >= f(hi)
  while (hi - lo > kRangeResolutionKm / 4.0) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > threshold ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace qisim
