#include "qbattery/operators.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <vector>

#include "qbattery/error.hpp"

namespace qbat {

namespace {

using Triplet = Eigen::Triplet<Complex>;

// Guard against accidental exponential blow-up of the qubit register.
constexpr int kMaxQubitsFull = 14;
constexpr double kLeakageThreshold = 1e-6;

SparseMat from_triplets(Eigen::Index dim, const std::vector<Triplet>& triplets) {
  SparseMat m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

// Bit of `site` (1-based) inside a qubit-register index.
Eigen::Index site_mask(int n_qubits, int site) { return Eigen::Index{1} << (n_qubits - site); }

// Applies a battery-only operator given as (battery index) -> list of
// (target, value) to the composite space, tensored with the cavity identity.
template <typename F>
SparseMat battery_operator(const SpaceDescriptor& space, F&& action) {
  std::vector<Triplet> triplets;
  const Eigen::Index cav = space.cavity_dim();
  for (Eigen::Index b = 0; b < space.battery_dim(); ++b) {
    action(b, [&](Eigen::Index target, Complex value) {
      if (value == Complex{}) return;
      for (Eigen::Index n = 0; n < cav; ++n) {
        triplets.emplace_back(space.index(target, n), space.index(b, n), value);
      }
    });
  }
  return from_triplets(space.total_dim(), triplets);
}

}  // namespace

// ---------------------------------------------------------------------------
// SpaceDescriptor

SpaceDescriptor::SpaceDescriptor(int n, int cav, BatteryBasis basis)
    : n_qubits_(n), cavity_dim_(cav), basis_(basis) {
  if (n < 1) throw ConfigError("n_qubits must be >= 1 (got " + std::to_string(n) + ")");
  if (cav < 2) throw ConfigError("cavity_dim must be >= 2 (got " + std::to_string(cav) + ")");
  if (basis == BatteryBasis::Qubits) {
    if (n > kMaxQubitsFull) {
      throw ConfigError("n_qubits = " + std::to_string(n) + " exceeds the full-space limit of " +
                        std::to_string(kMaxQubitsFull));
    }
    battery_dim_ = Eigen::Index{1} << n;
  } else {
    battery_dim_ = n + 1;
  }
}

SpaceDescriptor SpaceDescriptor::qubits(int n_qubits, int cavity_dim) {
  return {n_qubits, cavity_dim, BatteryBasis::Qubits};
}

SpaceDescriptor SpaceDescriptor::collective(int n_qubits, int cavity_dim) {
  return {n_qubits, cavity_dim, BatteryBasis::Collective};
}

int SpaceDescriptor::excitations(Eigen::Index battery) const {
  if (basis_ == BatteryBasis::Collective) return static_cast<int>(battery);
  return std::popcount(static_cast<unsigned long long>(battery));
}

std::string SpaceDescriptor::describe() const {
  std::ostringstream os;
  os << (basis_ == BatteryBasis::Qubits ? "qubits" : "collective") << "(N=" << n_qubits_
     << ", cavity_dim=" << cavity_dim_ << ", total_dim=" << total_dim() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// OperatorMatrix

OperatorMatrix::OperatorMatrix(SpaceDescriptor space, SparseMat entries, bool hermitian_hint)
    : space_(space), entries_(std::move(entries)), hermitian_hint_(hermitian_hint) {
  const auto dim = space_.total_dim();
  if (entries_.rows() != dim || entries_.cols() != dim) {
    throw ConfigError("operator shape " + std::to_string(entries_.rows()) + "x" +
                      std::to_string(entries_.cols()) + " does not match " + space_.describe());
  }
  entries_.makeCompressed();
  if (hermitian_hint_ && hermitian_defect() > 1e-12) {
    throw NumericalError("operator flagged Hermitian has defect " + std::to_string(hermitian_defect()));
  }
}

OperatorMatrix OperatorMatrix::zero(const SpaceDescriptor& space) {
  return {space, SparseMat(space.total_dim(), space.total_dim()), true};
}

OperatorMatrix OperatorMatrix::identity(const SpaceDescriptor& space) {
  SparseMat id(space.total_dim(), space.total_dim());
  id.setIdentity();
  return {space, std::move(id), true};
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return {space_, SparseMat(entries_.adjoint()), hermitian_hint_};
}

double OperatorMatrix::hermitian_defect() const {
  SparseMat diff = entries_ - SparseMat(entries_.adjoint());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

double OperatorMatrix::max_abs() const {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < entries_.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(entries_, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& rhs) const {
  if (!(space_ == rhs.space_)) throw ConfigError("operator spaces differ in sum");
  SparseMat sum = entries_ + rhs.entries_;
  return {space_, std::move(sum), hermitian_hint_ && rhs.hermitian_hint_};
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& rhs) const {
  if (!(space_ == rhs.space_)) throw ConfigError("operator spaces differ in difference");
  SparseMat diff = entries_ - rhs.entries_;
  return {space_, std::move(diff), hermitian_hint_ && rhs.hermitian_hint_};
}

OperatorMatrix OperatorMatrix::operator*(const OperatorMatrix& rhs) const {
  if (!(space_ == rhs.space_)) throw ConfigError("operator spaces differ in product");
  SparseMat prod = entries_ * rhs.entries_;
  return {space_, std::move(prod), false};
}

OperatorMatrix OperatorMatrix::scaled(Complex factor) const {
  SparseMat s = entries_ * factor;
  return {space_, std::move(s), hermitian_hint_ && factor.imag() == 0.0};
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

// ---------------------------------------------------------------------------
// DensityState

DensityState DensityState::pure(const SpaceDescriptor& space, const StateVec& psi, double time) {
  if (psi.size() != space.total_dim()) throw ConfigError("state vector size does not match space");
  return {space, psi * psi.adjoint(), time};
}

double DensityState::trace_error() const { return std::abs(rho.trace() - Complex{1.0}); }

double DensityState::hermitian_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double DensityState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Complex DensityState::expectation(const OperatorMatrix& op) const {
  // Tr[A rho] = sum_{ij} A_ij rho_ji
  Complex acc{};
  const SparseMat& a = op.entries();
  for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMat::InnerIterator it(a, j); it; ++it) acc += it.value() * rho(j, it.row());
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Operators

OperatorMatrix local_pauli(const SpaceDescriptor& space, int site, PauliKind which) {
  if (space.basis() != BatteryBasis::Qubits) {
    throw ConfigError("local_pauli requires the qubit basis; collective space has no site operators");
  }
  if (site < 1 || site > space.n_qubits()) {
    throw ConfigError("site " + std::to_string(site) + " out of range 1.." + std::to_string(space.n_qubits()));
  }
  const Eigen::Index mask = site_mask(space.n_qubits(), site);
  const Complex i{0.0, 1.0};
  auto entries = battery_operator(space, [&](Eigen::Index b, auto emit) {
    const bool up = (b & mask) != 0;
    switch (which) {
      case PauliKind::X: emit(b ^ mask, 1.0); break;
      case PauliKind::Y: emit(b ^ mask, up ? i : -i); break;
      case PauliKind::Z: emit(b, up ? 1.0 : -1.0); break;
      case PauliKind::Plus:
        if (!up) emit(b | mask, 1.0);
        break;
      case PauliKind::Minus:
        if (up) emit(b & ~mask, 1.0);
        break;
    }
  });
  const bool herm = which == PauliKind::X || which == PauliKind::Y || which == PauliKind::Z;
  return {space, std::move(entries), herm};
}

namespace {

SparseMat raising_collective(const SpaceDescriptor& space) {
  const int n = space.n_qubits();
  if (space.basis() == BatteryBasis::Collective) {
    // <k+1|J+|k> = sqrt(j(j+1) - m(m+1)) = sqrt((k+1)(N-k))
    return battery_operator(space, [&](Eigen::Index k, auto emit) {
      if (k < n) emit(k + 1, std::sqrt(static_cast<double>((k + 1) * (n - k))));
    });
  }
  return battery_operator(space, [&](Eigen::Index b, auto emit) {
    for (int site = 1; site <= n; ++site) {
      const Eigen::Index mask = site_mask(n, site);
      if ((b & mask) == 0) emit(b | mask, 1.0);
    }
  });
}

}  // namespace

OperatorMatrix collective_spin(const SpaceDescriptor& space, PauliKind which) {
  const double half_n = 0.5 * space.n_qubits();
  switch (which) {
    case PauliKind::Z: {
      auto entries = battery_operator(space, [&](Eigen::Index b, auto emit) {
        emit(b, static_cast<double>(space.excitations(b)) - half_n);
      });
      return {space, std::move(entries), true};
    }
    case PauliKind::Plus:
      return {space, raising_collective(space), false};
    case PauliKind::Minus:
      return {space, SparseMat(raising_collective(space).adjoint()), false};
    case PauliKind::X: {
      SparseMat up = raising_collective(space);
      SparseMat x = (up + SparseMat(up.adjoint())) * Complex{0.5};
      return {space, std::move(x), true};
    }
    case PauliKind::Y: {
      SparseMat up = raising_collective(space);
      SparseMat y = (up - SparseMat(up.adjoint())) * Complex{0.0, -0.5};
      return {space, std::move(y), true};
    }
  }
  throw ConfigError("unknown collective spin component");
}

BosonOps boson_ops(const SpaceDescriptor& space) {
  std::vector<Triplet> ta;
  std::vector<Triplet> tn;
  const Eigen::Index cav = space.cavity_dim();
  for (Eigen::Index b = 0; b < space.battery_dim(); ++b) {
    for (Eigen::Index n = 0; n < cav; ++n) {
      if (n > 0) ta.emplace_back(space.index(b, n - 1), space.index(b, n), std::sqrt(static_cast<double>(n)));
      if (n > 0) tn.emplace_back(space.index(b, n), space.index(b, n), static_cast<double>(n));
    }
  }
  SparseMat a = from_triplets(space.total_dim(), ta);
  SparseMat adag = a.adjoint();
  return {OperatorMatrix(space, std::move(a)), OperatorMatrix(space, std::move(adag)),
          OperatorMatrix(space, from_triplets(space.total_dim(), tn), true)};
}

int default_cavity_dim(double mean_photons) {
  const double m = std::max(0.0, std::ceil(mean_photons - 1e-9));
  int dim = std::max(2, 4 * static_cast<int>(m) + 1);
  // Widen until the initial Poisson weight of the two top levels stays an
  // order of magnitude below the leakage monitor threshold.
  if (mean_photons > 0.0) {
    auto log_weight = [&](int n) { return -mean_photons + n * std::log(mean_photons) - std::lgamma(n + 1.0); };
    int d = static_cast<int>(m) + 2;
    while (std::exp(log_weight(d - 2)) + std::exp(log_weight(d - 1)) > 0.1 * kLeakageThreshold) ++d;
    dim = std::max(dim, d);
  }
  return dim;
}

StateVec coherent_state(const SpaceDescriptor& space, Complex alpha) {
  const double mean = std::norm(alpha);
  const double allowed = (space.cavity_dim() - 1) / 4.0;
  if (mean > allowed + 1e-9) {
    throw ConfigError("coherent amplitude |alpha|^2 = " + std::to_string(mean) + " needs cavity_dim >= " +
                      std::to_string(default_cavity_dim(mean)) + " (got " +
                      std::to_string(space.cavity_dim()) + ")");
  }
  StateVec psi = StateVec::Zero(space.total_dim());
  Complex amp = std::exp(-0.5 * mean);
  double norm2 = 0.0;
  for (int n = 0; n < space.cavity_dim(); ++n) {
    if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
    psi(space.index(0, n)) = amp;
    norm2 += std::norm(amp);
  }
  psi /= std::sqrt(norm2);
  return psi;
}

StateVec fock_state(const SpaceDescriptor& space, int m) {
  if (m < 0 || m >= space.cavity_dim()) {
    throw ConfigError("Fock level " + std::to_string(m) + " needs cavity_dim > " + std::to_string(m) +
                      " (got " + std::to_string(space.cavity_dim()) + ")");
  }
  StateVec psi = StateVec::Zero(space.total_dim());
  psi(space.index(0, m)) = 1.0;
  return psi;
}

StateVec all_down(const SpaceDescriptor& space) { return fock_state(space, 0); }

double truncation_tail(const SpaceDescriptor& space, const Eigen::VectorXd& populations, int levels) {
  double tail = 0.0;
  const int cav = space.cavity_dim();
  for (Eigen::Index b = 0; b < space.battery_dim(); ++b) {
    for (int n = std::max(0, cav - levels); n < cav; ++n) tail += populations(space.index(b, n));
  }
  return tail;
}

DenseMat partial_trace_cavity(const SpaceDescriptor& space, const DenseMat& rho) {
  const Eigen::Index nb = space.battery_dim();
  const Eigen::Index cav = space.cavity_dim();
  DenseMat out = DenseMat::Zero(nb, nb);
  for (Eigen::Index q2 = 0; q2 < nb; ++q2) {
    for (Eigen::Index q1 = 0; q1 < nb; ++q1) {
      Complex acc{};
      for (Eigen::Index n = 0; n < cav; ++n) acc += rho(q1 * cav + n, q2 * cav + n);
      out(q1, q2) = acc;
    }
  }
  return out;
}

DenseMat partial_trace_cavity(const DensityState& state) { return partial_trace_cavity(state.space, state.rho); }

double trace_norm_hermitian(const DenseMat& a) {
  DenseMat h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DenseMat& a, const DenseMat& b) { return 0.5 * trace_norm_hermitian(a - b); }

}  // namespace qbat
