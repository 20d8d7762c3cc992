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

#include "qisim/state.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qisim/error.hpp"

namespace qisim {

namespace {

std::string describe(const HilbertSpace& space) {
  std::ostringstream out;
  out << '[';
  bool first = true;
  for (const auto& f : space.factors()) {
    if (!first) out << ", ";
    out << f.label << ':' << f.dimension;
    first = false;
  }
  out << ']';
  return out.str();
}

// Row-major strides of the flattened basis: stride[k] = prod_{j>k} dim[j].
std::vector<std::size_t> strides_of(const HilbertSpace& space) {
  const auto factors = space.factors();
  std::vector<std::size_t> strides(factors.size(), 1);
  for (std::size_t k = factors.size(); k-- > 1;) {
    strides[k - 1] = strides[k] * factors[k].dimension;
  }
  return strides;
}

std::vector<double> checked_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m,
                                                      Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("Hermitian eigensolver failed to converge");
  }
  std::vector<double> values(solver.eigenvalues().begin(),
                             solver.eigenvalues().end());
  for (double& v : values) {
    if (v < -kStateTolerance) {
      std::ostringstream msg;
      msg << "density matrix has negative eigenvalue " << v;
      throw NumericError(msg.str());
    }
    v = std::max(v, 0.0);
  }
  return values;
}

}  // namespace

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a.data()[i] - b.data()[i]) > tol) return false;
  }
  return true;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HilbertSpace::HilbertSpace(std::vector<Factor> factors)
    : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dimension == 0) {
      throw InvalidArgument("factor '" + f.label + "' has dimension 0");
    }
    if (!seen.insert(f.label).second) {
      throw InvalidArgument("duplicate factor label '" + f.label + "'");
    }
    dimension_ *= f.dimension;
  }
}

HilbertSpace HilbertSpace::polarization_pair() {
  return HilbertSpace{{std::string(labels::kPolSignal), 2},
                      {std::string(labels::kPolIdler), 2}};
}

HilbertSpace HilbertSpace::full() {
  return HilbertSpace{{std::string(labels::kPolSignal), 2},
                      {std::string(labels::kPolIdler), 2},
                      {std::string(labels::kNumSignal), 2},
                      {std::string(labels::kNumIdler), 2}};
}

bool HilbertSpace::contains(std::string_view label) const noexcept {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

std::size_t HilbertSpace::index_of(std::string_view label) const {
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (factors_[k].label == label) return k;
  }
  throw UnknownFactor("no factor labeled '" + std::string(label) + "' in " +
                      describe(*this));
}

HilbertSpace HilbertSpace::concat(const HilbertSpace& other) const {
  std::vector<Factor> joined = factors_;
  joined.insert(joined.end(), other.factors_.begin(), other.factors_.end());
  return HilbertSpace(std::move(joined));
}

PureState::PureState(HilbertSpace space, ComplexVector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != space_.dimension()) {
    throw DimensionMismatch("amplitude vector does not match space " +
                            describe(space_));
  }
  const double norm = amplitudes_.norm();
  if (norm == 0.0) throw EmptyEnsemble("zero state vector");
  amplitudes_ /= norm;
}

DensityMatrix::DensityMatrix(HilbertSpace space, ComplexMatrix matrix,
                             TraceClass trace_class)
    : space_(std::move(space)),
      matrix_(std::move(matrix)),
      trace_class_(trace_class) {
  const auto dim = static_cast<Eigen::Index>(space_.dimension());
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw DimensionMismatch("matrix shape does not match space " +
                            describe(space_));
  }
  if (!approx_equal(matrix_, matrix_.adjoint(), kStateTolerance)) {
    throw NumericError("density matrix is not Hermitian");
  }
  matrix_ = (0.5 * (matrix_ + matrix_.adjoint())).eval();
  checked_eigenvalues(matrix_);
  const double tr = trace();
  if (trace_class_ == TraceClass::unit) {
    if (std::abs(tr - 1.0) > kStateTolerance) {
      std::ostringstream msg;
      msg << "unit-trace density matrix has trace " << tr;
      throw NumericError(msg.str());
    }
  } else {
    if (tr <= 0.0) throw EmptyEnsemble("sub-normalized state has zero trace");
    if (tr > 1.0 + kStateTolerance) {
      std::ostringstream msg;
      msg << "sub-normalized density matrix has trace " << tr << " > 1";
      throw NumericError(msg.str());
    }
  }
}

DensityMatrix::DensityMatrix(const PureState& pure)
    : DensityMatrix(pure.space(),
                    pure.amplitudes() * pure.amplitudes().adjoint()) {}

KrausSet::KrausSet(std::vector<ComplexMatrix> operators,
                   Completeness completeness)
    : operators_(std::move(operators)), completeness_(completeness) {
  if (operators_.empty()) throw InvalidArgument("empty Kraus set");
  const auto n = operators_.front().rows();
  for (const auto& k : operators_) {
    if (k.rows() != n || k.cols() != n) {
      throw DimensionMismatch("Kraus operators must be square and equal-sized");
    }
  }
  const ComplexMatrix sum = completeness_sum();
  if (completeness_ == Completeness::trace_preserving) {
    if (!approx_equal(sum, ComplexMatrix::Identity(n, n), kStateTolerance)) {
      throw NumericError("Kraus set is not trace preserving");
    }
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sum,
                                                        Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().maxCoeff() > 1.0 + kStateTolerance) {
      throw NumericError("Kraus set increases trace");
    }
  }
}

ComplexMatrix KrausSet::completeness_sum() const {
  const auto n = operators_.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (const auto& k : operators_) sum += k.adjoint() * k;
  return sum;
}

PureState tensor(const PureState& a, const PureState& b) {
  ComplexVector v(a.amplitudes().size() * b.amplitudes().size());
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    v.segment(i * b.amplitudes().size(), b.amplitudes().size()) =
        a.amplitudes()(i) * b.amplitudes();
  }
  return PureState(a.space().concat(b.space()), std::move(v));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  const bool unit = a.trace_class() == TraceClass::unit &&
                    b.trace_class() == TraceClass::unit;
  return DensityMatrix(a.space().concat(b.space()),
                       kron(a.matrix(), b.matrix()),
                       unit ? TraceClass::unit : TraceClass::subnormalized);
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const std::string_view> keep) {
  const HilbertSpace& space = rho.space();
  const auto factors = space.factors();
  std::vector<bool> kept(factors.size(), false);
  for (auto label : keep) kept[space.index_of(label)] = true;

  std::vector<Factor> kept_factors;
  std::vector<Factor> traced_factors;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    (kept[k] ? kept_factors : traced_factors).push_back(factors[k]);
  }
  const HilbertSpace kept_space(kept_factors);
  const HilbertSpace traced_space(traced_factors);
  const auto strides = strides_of(space);

  // offset[r] = flattened full-space index contributed by kept index r, and
  // likewise for the traced factors.
  auto offsets = [&](bool want_kept, std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    for (std::size_t r = 0; r < count; ++r) {
      std::size_t rem = r;
      std::size_t off = 0;
      for (std::size_t k = factors.size(); k-- > 0;) {
        if (kept[k] != want_kept) continue;
        off += (rem % factors[k].dimension) * strides[k];
        rem /= factors[k].dimension;
      }
      out[r] = off;
    }
    return out;
  };
  const auto kept_off = offsets(true, kept_space.dimension());
  const auto traced_off = offsets(false, traced_space.dimension());

  const auto n = static_cast<Eigen::Index>(kept_space.dimension());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  const ComplexMatrix& m = rho.matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t t : traced_off) {
        acc += m(static_cast<Eigen::Index>(kept_off[i] + t),
                 static_cast<Eigen::Index>(kept_off[j] + t));
      }
      out(i, j) = acc;
    }
  }
  return DensityMatrix(kept_space, std::move(out), rho.trace_class());
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::initializer_list<std::string_view> keep) {
  return partial_trace(rho, std::span<const std::string_view>(keep.begin(),
                                                              keep.size()));
}

DensityMatrix apply_channel(const DensityMatrix& rho, const KrausSet& kraus) {
  if (kraus.dimension() != rho.dimension()) {
    throw DimensionMismatch("Kraus operators do not match state dimension");
  }
  const auto n = static_cast<Eigen::Index>(rho.dimension());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& k : kraus.operators()) {
    out.noalias() += k * rho.matrix() * k.adjoint();
  }
  const bool unit = rho.trace_class() == TraceClass::unit &&
                    kraus.completeness() == Completeness::trace_preserving;
  return DensityMatrix(rho.space(), std::move(out),
                       unit ? TraceClass::unit : TraceClass::subnormalized);
}

ComplexMatrix embed(const ComplexMatrix& op, std::string_view target_label,
                    const HilbertSpace& space) {
  const std::size_t target = space.index_of(target_label);
  const auto factors = space.factors();
  if (op.rows() != op.cols() ||
      static_cast<std::size_t>(op.rows()) != factors[target].dimension) {
    throw DimensionMismatch("operator does not match factor '" +
                            std::string(target_label) + "'");
  }
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto d = static_cast<Eigen::Index>(factors[k].dimension);
    out = kron(out, k == target ? op : ComplexMatrix::Identity(d, d));
  }
  return out;
}

KrausSet embed(const KrausSet& kraus, std::string_view target_label,
               const HilbertSpace& space) {
  std::vector<ComplexMatrix> ops;
  for (const auto& k : kraus.operators()) {
    ops.push_back(embed(k, target_label, space));
  }
  return KrausSet(std::move(ops), kraus.completeness());
}

std::vector<double> eigenvalues(const DensityMatrix& rho) {
  return checked_eigenvalues(rho.matrix());
}

double purity(const DensityMatrix& rho) {
  const double tr = rho.trace();
  return (rho.matrix() * rho.matrix()).trace().real() / (tr * tr);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const double tr = rho.trace();
  double s = 0.0;
  for (double lambda : eigenvalues(rho)) {
    const double p = lambda / tr;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

Renormalized renormalize(const DensityMatrix& rho) {
  const double tr = rho.trace();
  if (!(tr > 0.0)) throw EmptyEnsemble("cannot renormalize a zero-trace state");
  if (rho.trace_class() == TraceClass::unit) return {rho, 1.0};
  return {DensityMatrix(rho.space(), rho.matrix() / tr, TraceClass::unit), tr};
}

double fidelity(const PureState& a, const PureState& b) {
  if (!(a.space() == b.space())) {
    throw DimensionMismatch("fidelity of states on different spaces");
  }
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace qisim
