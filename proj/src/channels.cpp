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

#include "qisim/channels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qisim/error.hpp"

namespace qisim {

namespace {

using namespace std::complex_literals;

void require_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << value << " is outside [0, 1]";
    throw InvalidArgument(msg.str());
  }
}

void require_full_space(const DensityMatrix& rho) {
  if (!(rho.space() == HilbertSpace::full())) {
    throw DimensionMismatch(
        "expected a state on Pol_s (x) Pol_i (x) N_s (x) N_i");
  }
}

ComplexMatrix number_projector(std::size_t n, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 1.0;
  return p;
}

double binomial(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0));
}

}  // namespace

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -1i, 1i, 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

PureState singlet() {
  ComplexVector v(4);
  v << 0.0, 1.0, -1.0, 0.0;
  return PureState(HilbertSpace::polarization_pair(), v);
}

PureState phi_plus() {
  ComplexVector v(4);
  v << 1.0, 0.0, 0.0, 1.0;
  return PureState(HilbertSpace::polarization_pair(), v);
}

PureState product_hv() {
  ComplexVector v(4);
  v << 0.0, 1.0, 0.0, 0.0;
  return PureState(HilbertSpace::polarization_pair(), v);
}

DensityMatrix maximally_mixed_pair() {
  return DensityMatrix(HilbertSpace::polarization_pair(),
                       ComplexMatrix::Identity(4, 4) / 4.0);
}

DensityMatrix werner_state(double visibility) {
  require_unit_interval(visibility, "visibility");
  const DensityMatrix psi(singlet());
  return DensityMatrix(HilbertSpace::polarization_pair(),
                       visibility * psi.matrix() +
                           (1.0 - visibility) / 4.0 *
                               ComplexMatrix::Identity(4, 4));
}

DensityMatrix with_photon_pair(const DensityMatrix& pol) {
  if (!(pol.space() == HilbertSpace::polarization_pair())) {
    throw DimensionMismatch("expected a state on Pol_s (x) Pol_i");
  }
  const HilbertSpace numbers{{std::string(labels::kNumSignal), 2},
                             {std::string(labels::kNumIdler), 2}};
  ComplexMatrix one_one = ComplexMatrix::Zero(4, 4);
  one_one(3, 3) = 1.0;
  return tensor(pol, DensityMatrix(numbers, one_one));
}

DensityMatrix coincidence_sector(const DensityMatrix& full) {
  require_full_space(full);
  const auto& space = full.space();
  const ComplexMatrix projector =
      embed(number_projector(1, 2), labels::kNumSignal, space) *
      embed(number_projector(1, 2), labels::kNumIdler, space);
  const DensityMatrix projected(
      space, projector * full.matrix() * projector, TraceClass::subnormalized);
  return partial_trace(projected, {labels::kPolSignal, labels::kPolIdler});
}

DensityMatrix polarization_part(const DensityMatrix& full) {
  return partial_trace(full, {labels::kPolSignal, labels::kPolIdler});
}

std::string_view to_string(LossVariant v) {
  return v == LossVariant::postselected ? "postselected" : "untracked";
}

KrausSet loss_postselected_kraus(double eta) {
  require_unit_interval(eta, "eta");
  ComplexMatrix k0 = ComplexMatrix::Zero(2, 2);
  k0(0, 1) = std::sqrt(1.0 - eta);
  ComplexMatrix k1 = ComplexMatrix::Zero(2, 2);
  k1(0, 0) = 1.0;
  k1(1, 1) = std::sqrt(eta);
  return KrausSet({k0, k1}, Completeness::trace_preserving);
}

KrausSet loss_untracked_operator(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "eta = " << eta << " is outside (0, 1]";
    throw InvalidArgument(msg.str());
  }
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0 - eta;
  m(1, 1) = eta;
  return KrausSet({m}, Completeness::trace_non_increasing);
}

DensityMatrix object_channel(const DensityMatrix& rho,
                             const ObjectModel& model) {
  require_full_space(rho);
  const KrausSet local = model.variant == LossVariant::postselected
                             ? loss_postselected_kraus(model.eta)
                             : loss_untracked_operator(model.eta);
  return apply_channel(rho, embed(local, labels::kNumSignal, rho.space()));
}

KrausSet depolarizing_kraus(double p) {
  require_unit_interval(p, "p");
  const double a = std::sqrt(1.0 - 3.0 * p / 4.0);
  const double b = std::sqrt(p / 4.0);
  return KrausSet({a * ComplexMatrix::Identity(2, 2), b * pauli_x(),
                   b * pauli_y(), b * pauli_z()},
                  Completeness::trace_preserving);
}

DensityMatrix depolarize_signal(const DensityMatrix& rho, double p) {
  return apply_channel(
      rho, embed(depolarizing_kraus(p), labels::kPolSignal, rho.space()));
}

QhqState qhq_state(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 4.0 + 1e-15)) {
    std::ostringstream msg;
    msg << "theta = " << theta << " is outside [0, pi/4]";
    throw InvalidArgument(msg.str());
  }
  const Complex global = -1i * std::exp(-2i * theta);
  const Complex extra = (1.0 - std::exp(-4i * theta)) / std::numbers::sqrt2;
  ComplexVector v(4);
  v << global / std::numbers::sqrt2, 0.0, 0.0,
      global * (1.0 / std::numbers::sqrt2 + extra);
  const double norm_sq = v.squaredNorm();
  return {PureState(HilbertSpace::polarization_pair(), v), norm_sq};
}

double qhq_nominal_p(double theta) {
  return std::abs(1.0 - std::exp(Complex(0.0, -4.0 * theta))) / 2.0;
}

double attenuation_coefficient(double alpha_db_per_km) {
  if (!(alpha_db_per_km > 0.0)) {
    throw InvalidArgument("attenuation alpha must be positive");
  }
  return alpha_db_per_km * std::numbers::ln10 / 10.0;
}

double AttenuationModel::survival() const {
  if (!(distance_km >= 0.0)) throw InvalidArgument("distance must be >= 0");
  return std::exp(-lambda_per_km() * distance_km);
}

DensityMatrix attenuation_fock(std::size_t n_photons,
                               const AttenuationModel& model) {
  if (n_photons == 0) throw InvalidArgument("attenuation_fock needs N >= 1");
  const double t = model.survival();
  const auto dim = static_cast<Eigen::Index>(n_photons + 1);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j <= n_photons; ++j) {
    const double w = binomial(n_photons, j) * std::pow(t, double(j)) *
                     std::pow(1.0 - t, double(n_photons - j));
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = w;
  }
  // Binomial weights sum to one analytically; absorb rounding.
  m /= m.trace().real();
  return DensityMatrix(
      HilbertSpace{{std::string(labels::kNumSignal), n_photons + 1}}, m);
}

DensityMatrix attenuate_signal(const DensityMatrix& rho,
                               const AttenuationModel& model,
                               LossVariant variant) {
  return object_channel(rho, ObjectModel{model.survival(), variant});
}

DensityMatrix source_with_visibility(const SourceModel& model) {
  require_unit_interval(model.visibility_hv, "visibility_hv");
  require_unit_interval(model.visibility_ad, "visibility_ad");
  return werner_state(model.mean_visibility());
}

}  // namespace qisim
