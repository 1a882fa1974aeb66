#include "qbattery/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "qbattery/error.hpp"

namespace qbat {

namespace {

constexpr double kHermitianTolerance = 1e-8;
constexpr double kNegativeTolerance = 1e-7;

void require_hermitian(const DenseMat& m, const char* what) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(what) + ": matrix must be square");
  const double defect = m.size() ? (m - m.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (defect > kHermitianTolerance) {
    throw NumericalError(std::string(what) + ": non-Hermitian input (defect " + std::to_string(defect) + ")");
  }
}

Eigen::VectorXd ascending_energies(const DenseMat& h_b) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (h_b + h_b.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

DenseMat passive_state(const DenseMat& rho_b, const DenseMat& h_b) {
  require_hermitian(rho_b, "passive_state");
  require_hermitian(h_b, "passive_state");
  if (rho_b.rows() != h_b.rows()) throw ConfigError("passive_state: state and Hamiltonian dimensions differ");
  Eigen::SelfAdjointEigenSolver<DenseMat> rs(0.5 * (rho_b + rho_b.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<DenseMat> hs(0.5 * (h_b + h_b.adjoint()));
  // Eigenvalues arrive ascending; the solver's order is the index tie-break.
  const Eigen::VectorXd p = rs.eigenvalues().reverse();
  return hs.eigenvectors() * p.cast<Complex>().asDiagonal() * hs.eigenvectors().adjoint();
}

Eigen::VectorXd clamped_spectrum(const DenseMat& rho_b) {
  require_hermitian(rho_b, "ergotropy");
  Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (rho_b + rho_b.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::VectorXd p = es.eigenvalues();
  if (p.size() == 0) return p;
  if (p.minCoeff() < -kNegativeTolerance) {
    throw NumericalError("ergotropy: reduced state has eigenvalue " + std::to_string(p.minCoeff()) +
                         " below the clamp limit -1e-7");
  }
  const double trace = p.sum();
  p = p.cwiseMax(0.0);
  const double kept = p.sum();
  if (kept > 0.0) p *= trace / kept;
  return p;
}

double passive_energy(std::span<const double> populations, std::span<const double> energies_ascending) {
  if (populations.size() > energies_ascending.size()) {
    throw ConfigError("passive_energy: more populations than energy levels");
  }
  std::vector<double> p(populations.begin(), populations.end());
  std::stable_sort(p.begin(), p.end(), std::greater<>());
  double e = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) e += p[k] * energies_ascending[k];
  return e;
}

double passive_energy(const DenseMat& rho_b, const DenseMat& h_b) {
  require_hermitian(h_b, "passive_energy");
  const Eigen::VectorXd p = clamped_spectrum(rho_b);
  const Eigen::VectorXd e = ascending_energies(h_b);
  return passive_energy(std::span<const double>(p.data(), p.size()), std::span<const double>(e.data(), e.size()));
}

double ergotropy(const DenseMat& rho_b, const DenseMat& h_b) {
  const double energy = (h_b.cwiseProduct(rho_b.transpose())).sum().real();
  return std::max(0.0, energy - passive_energy(rho_b, h_b));
}

BatteryEnergetics::BatteryEnergetics(const SpaceDescriptor& space, double omega0) {
  const Eigen::Index dim = space.battery_dim();
  const int n = space.n_qubits();
  diag_energy_.resize(dim);
  for (Eigen::Index q = 0; q < dim; ++q) diag_energy_(q) = omega0 * space.excitations(q);
  // H_B levels on 2^N qubits: k w0 with multiplicity C(N, k). Only the
  // lowest `dim` are ever occupied by the passive state.
  double binom = 1.0;
  for (int k = 0; k <= n && static_cast<Eigen::Index>(levels_.size()) < dim; ++k) {
    for (long long c = 0; c < std::llround(binom) && static_cast<Eigen::Index>(levels_.size()) < dim; ++c) {
      levels_.push_back(omega0 * k);
    }
    binom = binom * (n - k) / (k + 1);
  }
}

BatteryEnergetics::Values BatteryEnergetics::evaluate(const DenseMat& rho_b) const {
  Values v;
  v.e_battery = (diag_energy_.cast<Complex>().array() * rho_b.diagonal().array()).sum().real();
  const Eigen::VectorXd p = clamped_spectrum(rho_b);
  const double passive = passive_energy(std::span<const double>(p.data(), p.size()), levels_);
  v.ergotropy = std::max(0.0, v.e_battery - passive);
  return v;
}

double quench_cost(const LindbladSpec& spec, const DenseMat& rho, Quench when) {
  const SparseMat& h = spec.hamiltonian_switched.entries();
  Complex acc{};
  for (Eigen::Index j = 0; j < h.outerSize(); ++j) {
    for (SparseMat::InnerIterator it(h, j); it; ++it) acc += it.value() * rho(j, it.row());
  }
  return when == Quench::On ? acc.real() : -acc.real();
}

double quadratic_value(std::span<const double> t, std::span<const double> y, std::size_t k, double at) {
  if (k == 0 || k + 1 >= t.size()) return y[k];
  const double t0 = t[k - 1], t1 = t[k], t2 = t[k + 1];
  const double f01 = (y[k] - y[k - 1]) / (t1 - t0);
  const double f12 = (y[k + 1] - y[k]) / (t2 - t1);
  const double a = (f12 - f01) / (t2 - t0);
  return y[k - 1] + f01 * (at - t0) + a * (at - t0) * (at - t1);
}

Peak quadratic_peak(std::span<const double> t, std::span<const double> y, std::size_t k) {
  if (k == 0 || k + 1 >= t.size()) return {t[k], y[k]};
  const double t0 = t[k - 1], t1 = t[k], t2 = t[k + 1];
  const double f01 = (y[k] - y[k - 1]) / (t1 - t0);
  const double f12 = (y[k + 1] - y[k]) / (t2 - t1);
  const double a = (f12 - f01) / (t2 - t0);
  if (!(a < 0.0)) return {t1, y[k]};
  const double ts = std::clamp(0.5 * (t0 + t1) - f01 / (2.0 * a), t0, t2);
  return {ts, std::max(y[k], quadratic_value(t, y, k, ts))};
}

double mean_power(std::span<const double> t, std::span<const double> e_b, double at) {
  if (t.empty() || t.size() != e_b.size()) throw ConfigError("mean_power: empty or inconsistent record");
  if (!(at > 0.0) || at < t.front() || at > t.back()) {
    throw ConfigError("mean_power: time must be positive and inside the record");
  }
  auto it = std::lower_bound(t.begin(), t.end(), at);
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  if (t[k] == at || k == 0) return e_b[k] / at;
  const double w = (at - t[k - 1]) / (t[k] - t[k - 1]);
  return ((1.0 - w) * e_b[k - 1] + w * e_b[k]) / at;
}

Peak max_mean_power(std::span<const double> t, std::span<const double> e_b) {
  if (t.empty() || t.size() != e_b.size()) throw ConfigError("max_mean_power: empty record");
  if (std::all_of(e_b.begin(), e_b.end(), [](double e) { return e == 0.0; })) {
    throw ConfigError("max_mean_power: battery energy is zero on the whole record");
  }
  std::vector<double> tt, pp;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] > 0.0) {
      tt.push_back(t[k]);
      pp.push_back(e_b[k] / t[k]);
    }
  }
  if (tt.empty()) throw ConfigError("max_mean_power: no samples with t > 0");
  const double best = *std::max_element(pp.begin(), pp.end());
  const double tol = 1e-12 * std::abs(best);
  std::size_t k = 0;
  while (pp[k] < best - tol) ++k;
  if (k > 0 && k + 1 < pp.size() && pp[k] > pp[k - 1] && pp[k] >= pp[k + 1]) return quadratic_peak(tt, pp, k);
  return {tt[k], pp[k]};
}

}  // namespace qbat
