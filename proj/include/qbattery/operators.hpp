#pragma once

#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qbat {

using Complex = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
using DenseMat = Eigen::MatrixXcd;
using StateVec = Eigen::VectorXcd;

/// How the battery factor of the composite space is represented.
///   Qubits:     2^N product basis, qubit 1 is the most significant bit,
///               |down> = 0, |up> = 1.
///   Collective: the N+1 states of the maximal-j Dicke ladder, indexed by
///               the number of excitations k = m + N/2.
enum class BatteryBasis { Qubits, Collective };

/// Dimensions and ordering of battery (x) cavity. Composite index is
/// battery_index * cavity_dim + fock_index.
class SpaceDescriptor {
 public:
  /// One qubit with a two-level cavity.
  SpaceDescriptor() = default;

  static SpaceDescriptor qubits(int n_qubits, int cavity_dim);
  static SpaceDescriptor collective(int n_qubits, int cavity_dim);

  int n_qubits() const { return n_qubits_; }
  int cavity_dim() const { return cavity_dim_; }
  BatteryBasis basis() const { return basis_; }
  Eigen::Index battery_dim() const { return battery_dim_; }
  Eigen::Index total_dim() const { return battery_dim_ * cavity_dim_; }

  Eigen::Index index(Eigen::Index battery, Eigen::Index fock) const {
    return battery * cavity_dim_ + fock;
  }
  /// Number of excited qubits in a battery basis state.
  int excitations(Eigen::Index battery) const;

  std::string describe() const;

  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;

 private:
  SpaceDescriptor(int n, int cav, BatteryBasis basis);

  int n_qubits_ = 1;
  int cavity_dim_ = 2;
  BatteryBasis basis_ = BatteryBasis::Qubits;
  Eigen::Index battery_dim_ = 2;
};

/// Sparse complex operator over a described space.
class OperatorMatrix {
 public:
  OperatorMatrix(SpaceDescriptor space, SparseMat entries, bool hermitian_hint = false);

  static OperatorMatrix zero(const SpaceDescriptor& space);
  static OperatorMatrix identity(const SpaceDescriptor& space);

  const SpaceDescriptor& space() const { return space_; }
  const SparseMat& entries() const { return entries_; }
  bool hermitian_hint() const { return hermitian_hint_; }

  OperatorMatrix adjoint() const;
  /// max |A - A^dagger| over stored entries.
  double hermitian_defect() const;
  double max_abs() const;
  DenseMat dense() const { return DenseMat(entries_); }

  OperatorMatrix operator+(const OperatorMatrix& rhs) const;
  OperatorMatrix operator-(const OperatorMatrix& rhs) const;
  OperatorMatrix operator*(const OperatorMatrix& rhs) const;
  OperatorMatrix scaled(Complex factor) const;

 private:
  SpaceDescriptor space_;
  SparseMat entries_;
  bool hermitian_hint_;
};

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Dense density matrix with its space and time stamp.
struct DensityState {
  SpaceDescriptor space;
  DenseMat rho;
  double time = 0.0;

  static DensityState pure(const SpaceDescriptor& space, const StateVec& psi, double time = 0.0);

  double trace_error() const;
  double hermitian_defect() const;
  double min_eigenvalue() const;
  Complex expectation(const OperatorMatrix& op) const;
};

enum class PauliKind { X, Y, Z, Plus, Minus };

/// Single-qubit Pauli or ladder factor at `site` (1-based), identity elsewhere.
/// Only defined on the Qubits basis.
OperatorMatrix local_pauli(const SpaceDescriptor& space, int site, PauliKind which);

/// J_alpha = sum_i sigma_alpha^i / 2 for x, y, z and J_pm = sum_i sigma_pm^i.
/// On the Collective basis the standard spin-N/2 matrix elements are used.
OperatorMatrix collective_spin(const SpaceDescriptor& space, PauliKind which);

struct BosonOps {
  OperatorMatrix a;
  OperatorMatrix adag;
  OperatorMatrix n;
};
BosonOps boson_ops(const SpaceDescriptor& space);

/// |down>^N (x) |alpha>. Poisson amplitudes are renormalized after truncation.
StateVec coherent_state(const SpaceDescriptor& space, Complex alpha);
StateVec fock_state(const SpaceDescriptor& space, int m);
StateVec all_down(const SpaceDescriptor& space);

/// Cavity truncation for initial mean photon number m: 4m+1, widened when
/// the coherent-state weight of the two top levels would exceed 1e-7.
int default_cavity_dim(double mean_photons);

/// Population of the highest `levels` Fock states (leakage monitor).
double truncation_tail(const SpaceDescriptor& space, const Eigen::VectorXd& populations, int levels = 2);

/// Trace over the cavity factor; returns a battery_dim x battery_dim matrix.
DenseMat partial_trace_cavity(const DensityState& state);
DenseMat partial_trace_cavity(const SpaceDescriptor& space, const DenseMat& rho);

/// 1/2 ||a - b||_1 for Hermitian a, b.
double trace_distance(const DenseMat& a, const DenseMat& b);
/// ||a||_1 of a Hermitian matrix.
double trace_norm_hermitian(const DenseMat& a);

}  // namespace qbat
