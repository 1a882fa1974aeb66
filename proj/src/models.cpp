#include "qbattery/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbattery/error.hpp"

namespace qbat {

std::string to_string(Interaction x) { return x == Interaction::Dicke ? "dicke" : "tc"; }

std::string to_string(CouplingScaling s) { return s == CouplingScaling::Standard ? "standard" : "rescaled"; }

Interaction parse_interaction(const std::string& s) {
  if (s == "dicke" || s == "D" || s == "Dicke") return Interaction::Dicke;
  if (s == "tc" || s == "TC" || s == "tavis-cummings" || s == "TavisCummings") return Interaction::TavisCummings;
  throw ConfigError("interaction: unknown value '" + s + "' (expected dicke or tc)");
}

CouplingScaling parse_scaling(const std::string& s) {
  if (s == "standard" || s == "Standard") return CouplingScaling::Standard;
  if (s == "rescaled" || s == "Rescaled") return CouplingScaling::Rescaled;
  throw ConfigError("scaling: unknown value '" + s + "' (expected standard or rescaled)");
}

int LambdaSchedule::value_at(double t) const {
  int v = values.front();
  for (std::size_t k = 0; k < switch_times.size(); ++k) {
    if (t >= switch_times[k]) v = values[k];
  }
  return v;
}

void LambdaSchedule::validate() const {
  if (switch_times.empty() || switch_times.size() != values.size()) {
    throw ConfigError("lambda_schedule: switch_times and values must be nonempty and equal length");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] != 0 && values[k] != 1) {
      throw ConfigError("lambda_schedule: value " + std::to_string(values[k]) +
                        " rejected; only instantaneous quenches between 0 and 1 are supported");
    }
    if (k > 0 && !(switch_times[k] > switch_times[k - 1])) {
      throw ConfigError("lambda_schedule: switch_times must be strictly increasing");
    }
  }
}

void ModelConfig::validate() const {
  auto nonneg = [](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "model." << key << ": must be a finite value >= 0 (got " << v << ")";
      throw ConfigError(os.str());
    }
  };
  if (n_qubits < 1) throw ConfigError("model.n_qubits: must be >= 1 (got " + std::to_string(n_qubits) + ")");
  if (cavity_dim < 2) throw ConfigError("model.cavity_dim: must be >= 2 (got " + std::to_string(cavity_dim) + ")");
  nonneg("omega0", omega0);
  nonneg("omega_c", omega_c);
  nonneg("g", g);
  nonneg("kappa", kappa);
  nonneg("gamma_down", gamma_down);
  nonneg("gamma_phi", gamma_phi);
  lambda_schedule.validate();
}

double ModelConfig::effective_coupling() const {
  return scaling == CouplingScaling::Standard ? g / std::sqrt(static_cast<double>(n_qubits)) : g;
}

OperatorMatrix h_battery(const ModelConfig& cfg, const SpaceDescriptor& space) {
  OperatorMatrix jz = collective_spin(space, PauliKind::Z);
  OperatorMatrix shift = OperatorMatrix::identity(space).scaled(0.5 * cfg.n_qubits);
  return (jz + shift).scaled(cfg.omega0);
}

OperatorMatrix h_charger(const ModelConfig& cfg, const SpaceDescriptor& space) {
  return boson_ops(space).n.scaled(cfg.omega_c);
}

OperatorMatrix h_interaction(const ModelConfig& cfg, const SpaceDescriptor& space) {
  const double geff = cfg.effective_coupling();
  BosonOps b = boson_ops(space);
  if (cfg.interaction == Interaction::Dicke) {
    OperatorMatrix jx = collective_spin(space, PauliKind::X);
    OperatorMatrix quad = b.a + b.adag;
    OperatorMatrix h = (jx * quad).scaled(2.0 * geff);
    return {space, h.entries(), true};
  }
  OperatorMatrix up = collective_spin(space, PauliKind::Plus);
  OperatorMatrix down = collective_spin(space, PauliKind::Minus);
  OperatorMatrix h = (up * b.a + down * b.adag).scaled(geff);
  return {space, h.entries(), true};
}

OperatorMatrix h_battery(const ModelConfig& cfg) { return h_battery(cfg, cfg.full_space()); }
OperatorMatrix h_charger(const ModelConfig& cfg) { return h_charger(cfg, cfg.full_space()); }
OperatorMatrix h_interaction(const ModelConfig& cfg) { return h_interaction(cfg, cfg.full_space()); }

double critical_coupling(Interaction interaction, double omega0, double omega_c) {
  if (!(omega0 > 0.0) || !(omega_c > 0.0)) throw ConfigError("critical_coupling: frequencies must be positive");
  const double root = std::sqrt(omega0 * omega_c);
  return interaction == Interaction::Dicke ? 0.5 * root : root;
}

LindbladSpec assemble_lindblad(const ModelConfig& cfg, const SpaceDescriptor& space,
                               std::vector<JumpOperator> jumps) {
  cfg.validate();
  OperatorMatrix h0 = h_battery(cfg, space) + h_charger(cfg, space);
  return {cfg, space, std::move(h0), h_interaction(cfg, space), std::move(jumps)};
}

LindbladSpec build_lindblad(const ModelConfig& cfg) {
  cfg.validate();
  const SpaceDescriptor space = cfg.full_space();
  std::vector<JumpOperator> jumps;
  if (cfg.kappa > 0.0) jumps.push_back({boson_ops(space).a, cfg.kappa, "a"});
  for (int i = 1; i <= cfg.n_qubits; ++i) {
    if (cfg.gamma_down > 0.0) {
      jumps.push_back({local_pauli(space, i, PauliKind::Minus), cfg.gamma_down, "sigma_minus_" + std::to_string(i)});
    }
  }
  for (int i = 1; i <= cfg.n_qubits; ++i) {
    if (cfg.gamma_phi > 0.0) {
      jumps.push_back({local_pauli(space, i, PauliKind::Z), cfg.gamma_phi, "sigma_z_" + std::to_string(i)});
    }
  }
  return assemble_lindblad(cfg, space, std::move(jumps));
}

OperatorMatrix excitation_parity(const SpaceDescriptor& space) {
  SparseMat p(space.total_dim(), space.total_dim());
  p.reserve(Eigen::VectorXi::Constant(space.total_dim(), 1));
  for (Eigen::Index b = 0; b < space.battery_dim(); ++b) {
    for (Eigen::Index n = 0; n < space.cavity_dim(); ++n) {
      const Eigen::Index idx = space.index(b, n);
      p.insert(idx, idx) = ((space.excitations(b) + n) % 2 == 0) ? 1.0 : -1.0;
    }
  }
  return {space, std::move(p), true};
}

GroundStateResult interacting_ground_state(const LindbladSpec& spec) {
  const SpaceDescriptor& space = spec.space;
  DenseMat h = (spec.hamiltonian_static + spec.hamiltonian_switched).dense();
  Eigen::SelfAdjointEigenSolver<DenseMat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("interacting_ground_state: eigensolver did not converge");
  const Eigen::VectorXd& evals = es.eigenvalues();
  const double e0 = evals(0);
  Eigen::Index deg = 1;
  while (deg < evals.size() && evals(deg) - e0 <= 1e-9) ++deg;

  StateVec psi = es.eigenvectors().col(0);
  if (deg > 1) {
    // Diagonalize the parity within the lowest eigenspace and keep the
    // direction closest to even parity.
    DenseMat basis = es.eigenvectors().leftCols(deg);
    Eigen::VectorXd parity = excitation_parity(space).dense().diagonal().real();
    DenseMat pm = basis.adjoint() * parity.asDiagonal() * basis;
    Eigen::SelfAdjointEigenSolver<DenseMat> ps(0.5 * (pm + pm.adjoint()));
    psi = basis * ps.eigenvectors().col(deg - 1);
    psi.normalize();
  }
  Eigen::Index pivot = 0;
  psi.cwiseAbs().maxCoeff(&pivot);
  psi *= std::conj(psi(pivot)) / std::abs(psi(pivot));

  GroundStateResult out{DensityState::pure(space, psi), e0, deg > 1, evals.size() > deg ? evals(deg) - e0 : 0.0};
  return out;
}

GroundStateResult interacting_ground_state(const ModelConfig& cfg) {
  return interacting_ground_state(build_lindblad(cfg));
}

}  // namespace qbat
