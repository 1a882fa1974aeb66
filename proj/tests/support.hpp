#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

// Reference constructions built directly from Kronecker products, kept
// independent of the library's operator builders.
namespace ref {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;

inline M kron(const M& a, const M& b) {
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// Basis order |down> = 0, |up> = 1.
inline M sigma(char which) {
  M s = M::Zero(2, 2);
  switch (which) {
    case 'x':
      s(0, 1) = s(1, 0) = 1.0;
      break;
    case 'y':
      s(1, 0) = C{0, -1};
      s(0, 1) = C{0, 1};
      break;
    case 'z':
      s(0, 0) = -1.0;
      s(1, 1) = 1.0;
      break;
    case '+':
      s(1, 0) = 1.0;
      break;
    case '-':
      s(0, 1) = 1.0;
      break;
    default:
      s = M::Identity(2, 2);
  }
  return s;
}

inline M annihilation(int d) {
  M a = M::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Site operator (1-based site, site 1 leftmost) tensored with the cavity identity.
inline M site_op(int n_qubits, int site, char which, int cav) {
  M out = M::Identity(1, 1);
  for (int s = 1; s <= n_qubits; ++s) out = kron(out, s == site ? sigma(which) : M::Identity(2, 2));
  return kron(out, M::Identity(cav, cav));
}

inline M cavity_op(int n_qubits, const M& op) { return kron(M::Identity(1 << n_qubits, 1 << n_qubits), op); }

inline M collective(int n_qubits, char which, int cav) {
  M out = M::Zero((1 << n_qubits) * cav, (1 << n_qubits) * cav);
  const double f = (which == 'x' || which == 'y' || which == 'z') ? 0.5 : 1.0;
  for (int s = 1; s <= n_qubits; ++s) out += f * site_op(n_qubits, s, which, cav);
  return out;
}

// Dense Lindblad generator applied directly from its definition.
inline M lindblad(const M& h, const std::vector<std::pair<M, double>>& jumps, const M& rho) {
  M out = C{0, -1} * (h * rho - rho * h);
  for (const auto& [l, rate] : jumps) {
    const M ld = l.adjoint();
    out += rate * (l * rho * ld - 0.5 * (ld * l * rho + rho * ld * l));
  }
  return out;
}

inline M random_density(Eigen::Index dim, std::mt19937_64& rng, Eigen::Index rank = -1) {
  std::normal_distribution<double> nd;
  const Eigen::Index r = rank > 0 ? rank : dim;
  M a(dim, r);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = C{nd(rng), nd(rng)};
  M rho = a * a.adjoint();
  return rho / rho.trace();
}

inline double max_abs(const M& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace ref
