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
#include <string_view>

#include "qisim/state.hpp"

namespace qisim {

// ---------------------------------------------------------------------------
// Reference states
// ---------------------------------------------------------------------------

/// (|HV> - |VH>)/sqrt(2) on Pol_s (x) Pol_i.
PureState singlet();
/// (|HH> + |VV>)/sqrt(2).
PureState phi_plus();
/// |H>_s |V>_i.
PureState product_hv();
/// I4 / 4 on Pol_s (x) Pol_i.
DensityMatrix maximally_mixed_pair();
/// V |Psi-><Psi-| + (1 - V) I4/4.
DensityMatrix werner_state(double visibility);

/// pol (x) |1><1|_s (x) |1><1|_i on the full four-factor space.
DensityMatrix with_photon_pair(const DensityMatrix& pol);

/// Polarization state conditioned on one photon in each arm, left
/// sub-normalized: the trace is the probability of a coincidence.
DensityMatrix coincidence_sector(const DensityMatrix& full);

/// Tr_{N_s,N_i}: the reduced polarization state.
DensityMatrix polarization_part(const DensityMatrix& full);

// ---------------------------------------------------------------------------
// Object reflection loss
// ---------------------------------------------------------------------------

enum class LossVariant {
  /// Trace-preserving loss; lost photons are kept as |0>.
  postselected,
  /// Single trace-non-increasing operator; lost photons leave the ensemble.
  untracked,
};

std::string_view to_string(LossVariant v);

struct ObjectModel {
  double eta = 1.0;
  LossVariant variant = LossVariant::postselected;
};

/// {sqrt(1-eta)|0><1|, |0><0| + sqrt(eta)|1><1|} on a two-level number space.
KrausSet loss_postselected_kraus(double eta);
/// {(1-eta)|0><0| + eta|1><1|}; requires 0 < eta <= 1.
KrausSet loss_untracked_operator(double eta);

/// Applies the object loss to N_s of a full-space state. Polarization and the
/// idler number are left alone.
DensityMatrix object_channel(const DensityMatrix& rho, const ObjectModel& model);

// ---------------------------------------------------------------------------
// Depolarization
// ---------------------------------------------------------------------------

/// {sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}.
KrausSet depolarizing_kraus(double p);

/// Depolarizing channel on the Pol_s factor of any space that has one.
DensityMatrix depolarize_signal(const DensityMatrix& rho, double p);

struct QhqState {
  PureState state;
  /// Squared norm of the vector before normalization.
  double prenormalization_norm_sq;
};

/// State after the quarter/half/quarter waveplate stack with the half-wave
/// plate at `theta` in [0, pi/4] radians.
QhqState qhq_state(double theta);

/// Nominal depolarizing strength of the waveplate stack, linear in theta with
/// p = 1 at theta = pi/4.
double qhq_nominal_p(double theta);

// ---------------------------------------------------------------------------
// Atmospheric attenuation
// ---------------------------------------------------------------------------

/// Lambda = alpha ln(10) / 10, per km, for alpha in dB/km.
double attenuation_coefficient(double alpha_db_per_km);

struct AttenuationModel {
  double alpha_db_per_km = 0.07;
  double distance_km = 0.0;

  double lambda_per_km() const { return attenuation_coefficient(alpha_db_per_km); }
  /// Single-photon survival probability exp(-Lambda L).
  double survival() const;
};

/// Binomial thinning of |N><N| over the model's distance, as a diagonal
/// (N+1)-level state on a factor labeled N_s.
DensityMatrix attenuation_fock(std::size_t n_photons,
                               const AttenuationModel& model);

/// Object-channel loss on N_s with eta_eff = exp(-Lambda L).
DensityMatrix attenuate_signal(const DensityMatrix& rho,
                               const AttenuationModel& model,
                               LossVariant variant = LossVariant::postselected);

// ---------------------------------------------------------------------------
// Source
// ---------------------------------------------------------------------------

struct SourceModel {
  double visibility_hv = 1.0;
  double visibility_ad = 1.0;

  double mean_visibility() const { return 0.5 * (visibility_hv + visibility_ad); }
};

/// Isotropic mixture of the singlet with white noise at the mean visibility.
DensityMatrix source_with_visibility(const SourceModel& model);

/// Pauli matrices.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

}  // namespace qisim
