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

#include "qisim/chsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qisim/channels.hpp"
#include "qisim/error.hpp"

namespace qisim {

namespace {

void require_pair_space(const DensityMatrix& rho) {
  if (rho.dimension() != 4 || rho.space().factors().size() != 2) {
    throw DimensionMismatch("expected a two-qubit polarization state");
  }
}

// Tr[(a (x) b) m] without forming the Kronecker product.
double expectation(const ComplexMatrix& a, const ComplexMatrix& b,
                   const ComplexMatrix& m) {
  Complex acc = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          acc += a(i, k) * b(j, l) * m(2 * k + l, 2 * i + j);
  return acc.real();
}

// Unnormalized P_xy for x, y in {H, V}: hh, hv, vh, vv.
std::array<double, 4> raw_probabilities(const ComplexMatrix& m, double alpha,
                                        double beta) {
  const ComplexMatrix ah = projector(alpha, Outcome::H);
  const ComplexMatrix av = projector(alpha, Outcome::V);
  const ComplexMatrix bh = projector(beta, Outcome::H);
  const ComplexMatrix bv = projector(beta, Outcome::V);
  return {expectation(ah, bh, m), expectation(ah, bv, m),
          expectation(av, bh, m), expectation(av, bv, m)};
}

double raw_correlation(const ComplexMatrix& m, double alpha, double beta) {
  const auto p = raw_probabilities(m, alpha, beta);
  return p[0] + p[3] - p[1] - p[2];
}

double signed_chsh(const ComplexMatrix& m, const MeasurementAngles& a) {
  return raw_correlation(m, a.alpha, a.beta) -
         raw_correlation(m, a.alpha, a.beta_prime) +
         raw_correlation(m, a.alpha_prime, a.beta) +
         raw_correlation(m, a.alpha_prime, a.beta_prime);
}

// T_ij = Tr(rho sigma_i (x) sigma_j), i, j over x, y, z.
Eigen::Matrix3d correlation_tensor(const ComplexMatrix& m) {
  const std::array<ComplexMatrix, 3> sigma = {pauli_x(), pauli_y(), pauli_z()};
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = expectation(sigma[i], sigma[j], m);
  return t;
}

}  // namespace

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::ab: return "a,b";
    case Setting::ab_prime: return "a,b'";
    case Setting::a_prime_b: return "a',b";
    case Setting::a_prime_b_prime: return "a',b'";
  }
  return "?";
}

std::pair<double, double> setting_angles(const MeasurementAngles& angles,
                                         Setting s) {
  switch (s) {
    case Setting::ab: return {angles.alpha, angles.beta};
    case Setting::ab_prime: return {angles.alpha, angles.beta_prime};
    case Setting::a_prime_b: return {angles.alpha_prime, angles.beta};
    case Setting::a_prime_b_prime:
      return {angles.alpha_prime, angles.beta_prime};
  }
  return {0.0, 0.0};
}

double chsh_sign(Setting s) { return s == Setting::ab_prime ? -1.0 : 1.0; }

ComplexMatrix projector(double angle, Outcome outcome) {
  Eigen::Vector2cd v;
  if (outcome == Outcome::H) {
    v << std::cos(angle), -std::sin(angle);
  } else {
    v << std::sin(angle), std::cos(angle);
  }
  return v * v.adjoint();
}

JointProbabilities joint_probabilities(const DensityMatrix& rho_pol,
                                       double alpha, double beta) {
  require_pair_space(rho_pol);
  const auto [state, weight] = renormalize(rho_pol);
  const auto p = raw_probabilities(state.matrix(), alpha, beta);
  return {p[0], p[1], p[2], p[3], weight};
}

double correlation_E(const DensityMatrix& rho_pol, double alpha, double beta) {
  const auto p = joint_probabilities(rho_pol, alpha, beta);
  return p.hh + p.vv - p.hv - p.vh;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::quantum: return "quantum";
    case Verdict::residual_quantum: return "residual_quantum";
    case Verdict::unresolved: return "unresolved";
  }
  return "?";
}

Verdict classify(double s) {
  if (s > 2.0) return Verdict::quantum;
  // Rounding slack at the sqrt 2 boundary.
  if (s >= std::numbers::sqrt2 - 1e-12) return Verdict::residual_quantum;
  return Verdict::unresolved;
}

ChshResult chsh_S(const DensityMatrix& rho_pol,
                  const MeasurementAngles& angles) {
  require_pair_space(rho_pol);
  const auto [state, weight] = renormalize(rho_pol);
  const double s = std::abs(signed_chsh(state.matrix(), angles));
  return {s, classify(s), angles, weight};
}

double chsh_S_max_analytic(const DensityMatrix& rho_pol) {
  require_pair_space(rho_pol);
  const auto [state, weight] = renormalize(rho_pol);
  const Eigen::Matrix3d t = correlation_tensor(state.matrix());
  Eigen::Matrix2d block;
  block << t(0, 0), t(0, 2), t(2, 0), t(2, 2);
  const Eigen::Vector2d sv =
      Eigen::JacobiSVD<Eigen::Matrix2d>(block).singularValues();
  return 2.0 * std::sqrt(sv.squaredNorm());
}

double horodecki_bound(const DensityMatrix& rho_pol) {
  require_pair_space(rho_pol);
  const auto [state, weight] = renormalize(rho_pol);
  const Eigen::Matrix3d t = correlation_tensor(state.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t);
  const auto& ev = solver.eigenvalues();  // ascending
  return 2.0 * std::sqrt(std::max(0.0, ev(1) + ev(2)));
}

AngleSearchResult chsh_S_max_search(const DensityMatrix& rho_pol,
                                    std::size_t grid) {
  require_pair_space(rho_pol);
  if (grid < 4) throw InvalidArgument("angle grid needs at least 4 points");
  const auto [state, weight] = renormalize(rho_pol);
  const ComplexMatrix& m = state.matrix();
  const double step = std::numbers::pi / static_cast<double>(grid);
  const std::size_t n = grid;

  std::vector<double> e(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      e[i * n + j] = raw_correlation(m, i * step, j * step);

  // S_signed = [E(a,b) + E(a',b)] + [E(a',b') - E(a,b')]; the two brackets
  // are maximized independently over b and b'.
  double best = -1.0;
  double sign = 1.0;
  MeasurementAngles best_angles;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double fmax = -4.0, fmin = 4.0, gmax = -4.0, gmin = 4.0;
      std::size_t jfmax = 0, jfmin = 0, jgmax = 0, jgmin = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double f = e[i * n + j] + e[k * n + j];
        const double g = e[k * n + j] - e[i * n + j];
        if (f > fmax) fmax = f, jfmax = j;
        if (f < fmin) fmin = f, jfmin = j;
        if (g > gmax) gmax = g, jgmax = j;
        if (g < gmin) gmin = g, jgmin = j;
      }
      if (fmax + gmax > best) {
        best = fmax + gmax;
        sign = 1.0;
        best_angles = {i * step, k * step, jfmax * step, jgmax * step};
      }
      if (-(fmin + gmin) > best) {
        best = -(fmin + gmin);
        sign = -1.0;
        best_angles = {i * step, k * step, jfmin * step, jgmin * step};
      }
    }
  }

  // Along any single angle the objective is c + a cos 2x + b sin 2x, so
  // three samples pin down the exact coordinate maximum.
  MeasurementAngles cur = best_angles;
  double value = sign * signed_chsh(m, cur);
  std::array<double*, 4> coords = {&cur.alpha, &cur.alpha_prime, &cur.beta,
                                   &cur.beta_prime};
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const double before = value;
    for (double* x : coords) {
      auto at = [&](double v) {
        *x = v;
        return sign * signed_chsh(m, cur);
      };
      const double f0 = at(0.0);
      const double f1 = at(std::numbers::pi / 4.0);
      const double f2 = at(std::numbers::pi / 2.0);
      const double c = 0.5 * (f0 + f2);
      const double a = 0.5 * (f0 - f2);
      const double b = f1 - c;
      double x_star = 0.5 * std::atan2(b, a);
      if (x_star < 0.0) x_star += std::numbers::pi;
      value = at(x_star);
    }
    if (value - before < 1e-15) break;
  }
  return {std::abs(value), cur};
}

ChshResult chsh_S_max(const DensityMatrix& rho_pol) {
  const auto [state, weight] = renormalize(rho_pol);
  const double s = chsh_S_max_analytic(state);
  const AngleSearchResult search = chsh_S_max_search(state);
  return {s, classify(s), search.angles, weight};
}

ChshResult normalized_chsh_S(const DensityMatrix& actual,
                             const DensityMatrix& reference,
                             const MeasurementAngles& angles) {
  require_pair_space(actual);
  require_pair_space(reference);
  const double ref_total = reference.trace();
  if (!(ref_total > 0.0)) throw NoCoincidences("empty reference ensemble");
  double s = 0.0;
  for (Setting setting : kAllSettings) {
    const auto [a, b] = setting_angles(angles, setting);
    s += chsh_sign(setting) * raw_correlation(actual.matrix(), a, b) /
         ref_total;
  }
  s = std::abs(s);
  return {s, classify(s), angles, actual.trace() / ref_total};
}

CountQuadruple to_quadruple(const CoincidenceRecord& r) {
  return {double(r.n_ab), double(r.n_ab_perp), double(r.n_aperp_b),
          double(r.n_aperp_bperp)};
}

CountRatio correlation_ratio(const CoincidenceRecord& r) {
  const auto same = static_cast<std::int64_t>(r.n_ab + r.n_aperp_bperp);
  const auto cross = static_cast<std::int64_t>(r.n_ab_perp + r.n_aperp_b);
  return {same - cross, r.total()};
}

double E_from_counts(const CountQuadruple& c) {
  const double den = c[0] + c[1] + c[2] + c[3];
  if (!(den > 0.0)) throw NoCoincidences("no coincidences for setting");
  return (c[0] + c[3] - c[1] - c[2]) / den;
}

double E_from_counts(const CoincidenceRecord& r) {
  if (r.total() == 0) {
    throw NoCoincidences("no coincidences for setting " +
                         std::string(to_string(r.setting)));
  }
  const CountRatio q = correlation_ratio(r);
  return double(q.numerator) / double(q.denominator);
}

double normalized_E_from_counts(const CountQuadruple& actual,
                                const CountQuadruple& reference) {
  const double den = reference[0] + reference[1] + reference[2] + reference[3];
  if (!(den > 0.0)) throw NoCoincidences("no reference coincidences");
  return (actual[0] + actual[3] - actual[1] - actual[2]) / den;
}

double normalized_E_from_counts(const CoincidenceRecord& actual,
                                const CoincidenceRecord& reference) {
  if (reference.total() == 0) {
    throw NoCoincidences("no reference coincidences for setting " +
                         std::string(to_string(reference.setting)));
  }
  return double(correlation_ratio(actual).numerator) /
         double(reference.total());
}

ChshResult chsh_S_from_counts(const RecordSet& records,
                              const RecordSet* reference) {
  double s = 0.0;
  for (Setting setting : kAllSettings) {
    const auto it = records.find(setting);
    if (it == records.end()) {
      throw MissingSetting("missing coincidence record for setting " +
                           std::string(to_string(setting)));
    }
    double e = 0.0;
    if (reference != nullptr) {
      const auto ref = reference->find(setting);
      if (ref == reference->end()) {
        throw MissingSetting("missing reference record for setting " +
                             std::string(to_string(setting)));
      }
      e = normalized_E_from_counts(it->second, ref->second);
    } else {
      e = E_from_counts(it->second);
    }
    s += chsh_sign(setting) * e;
  }
  s = std::abs(s);
  ChshResult result;
  result.s_value = s;
  result.verdict = classify(s);
  return result;
}

double chsh_S_stderr(const RecordSet& records) {
  double var = 0.0;
  for (Setting setting : kAllSettings) {
    const auto it = records.find(setting);
    if (it == records.end()) {
      throw MissingSetting("missing coincidence record for setting " +
                           std::string(to_string(setting)));
    }
    const double e = E_from_counts(it->second);
    var += (1.0 - e * e) / double(it->second.total());
  }
  return std::sqrt(var);
}

}  // namespace qisim
