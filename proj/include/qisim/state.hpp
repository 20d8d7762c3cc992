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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qisim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kDefaultTolerance = 1e-12;
// Slack used for trace, Hermiticity and eigenvalue checks on density matrices.
inline constexpr double kStateTolerance = 1e-10;

/// Entrywise |a - b| <= tol. Shapes must agree, otherwise false.
bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                  double tol = kDefaultTolerance);

/// Kronecker product a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

namespace labels {
inline constexpr std::string_view kPolSignal = "Pol_s";
inline constexpr std::string_view kPolIdler = "Pol_i";
inline constexpr std::string_view kNumSignal = "N_s";
inline constexpr std::string_view kNumIdler = "N_i";
}  // namespace labels

struct Factor {
  std::string label;
  std::size_t dimension = 0;

  bool operator==(const Factor&) const = default;
};

/// Ordered tensor-product space with labeled factors. The first factor is the
/// most significant index of the flattened basis.
class HilbertSpace {
 public:
  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<Factor> factors);
  HilbertSpace(std::initializer_list<Factor> factors)
      : HilbertSpace(std::vector<Factor>(factors)) {}

  /// Pol_s (x) Pol_i, basis HH, HV, VH, VV.
  static HilbertSpace polarization_pair();
  /// Pol_s (x) Pol_i (x) N_s (x) N_i with two-level number spaces.
  static HilbertSpace full();

  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const Factor> factors() const noexcept { return factors_; }
  bool contains(std::string_view label) const noexcept;
  /// Position of `label` in the factor list; throws UnknownFactor.
  std::size_t index_of(std::string_view label) const;
  HilbertSpace concat(const HilbertSpace& other) const;

  bool operator==(const HilbertSpace& other) const {
    return factors_ == other.factors_;
  }

 private:
  std::vector<Factor> factors_;
  std::size_t dimension_ = 1;
};

class PureState {
 public:
  /// Normalizes `amplitudes`; throws EmptyEnsemble for a zero vector.
  PureState(HilbertSpace space, ComplexVector amplitudes);

  const HilbertSpace& space() const noexcept { return space_; }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }

 private:
  HilbertSpace space_;
  ComplexVector amplitudes_;
};

enum class TraceClass { unit, subnormalized };

/// Hermitian PSD matrix on a labeled space. Construction hermitizes the input
/// and rejects anything that is not Hermitian or PSD within kStateTolerance,
/// or whose trace does not match `trace_class`.
class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, ComplexMatrix matrix,
                TraceClass trace_class = TraceClass::unit);
  explicit DensityMatrix(const PureState& pure);

  const HilbertSpace& space() const noexcept { return space_; }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  TraceClass trace_class() const noexcept { return trace_class_; }
  double trace() const noexcept { return matrix_.trace().real(); }
  std::size_t dimension() const noexcept { return space_.dimension(); }

 private:
  HilbertSpace space_;
  ComplexMatrix matrix_;
  TraceClass trace_class_;
};

enum class Completeness { trace_preserving, trace_non_increasing };

/// A list of Kraus operators of equal square shape, validated against its
/// completeness class on construction.
class KrausSet {
 public:
  KrausSet(std::vector<ComplexMatrix> operators, Completeness completeness);

  std::span<const ComplexMatrix> operators() const noexcept {
    return operators_;
  }
  Completeness completeness() const noexcept { return completeness_; }
  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(operators_.front().rows());
  }
  /// Sum of K^dagger K.
  ComplexMatrix completeness_sum() const;

 private:
  std::vector<ComplexMatrix> operators_;
  Completeness completeness_;
};

PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Traces out every factor not named in `keep`. Kept factors stay in their
/// original order.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const std::string_view> keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::initializer_list<std::string_view> keep);

/// Sum_i K_i rho K_i^dagger. The result is sub-normalized whenever the set is
/// trace-non-increasing or the input already was.
DensityMatrix apply_channel(const DensityMatrix& rho, const KrausSet& kraus);

/// I (x) ... (x) op (x) ... (x) I with op on `target_label`.
ComplexMatrix embed(const ComplexMatrix& op, std::string_view target_label,
                    const HilbertSpace& space);
KrausSet embed(const KrausSet& kraus, std::string_view target_label,
               const HilbertSpace& space);

/// Tr(rho^2) of the renormalized state.
double purity(const DensityMatrix& rho);
/// -Tr(rho ln rho) in nats of the renormalized state.
double von_neumann_entropy(const DensityMatrix& rho);
/// Eigenvalues in ascending order, clamped at zero. Values below
/// -kStateTolerance raise NumericError.
std::vector<double> eigenvalues(const DensityMatrix& rho);

struct Renormalized {
  DensityMatrix state;
  double survival_weight;
};

/// rho / Tr(rho) with the discarded-trace weight; throws EmptyEnsemble when
/// the trace vanishes.
Renormalized renormalize(const DensityMatrix& rho);

/// |<a|b>|^2 for states on the same space.
double fidelity(const PureState& a, const PureState& b);

}  // namespace qisim
