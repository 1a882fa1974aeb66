#include "qbattery/symmetry.hpp"

#include "qbattery/error.hpp"

namespace qbat {

std::string to_string(Backend b) {
  switch (b) {
    case Backend::Auto:
      return "auto";
    case Backend::Full:
      return "full";
    case Backend::Collective:
      return "collective";
  }
  return "auto";
}

Backend parse_backend(const std::string& s) {
  if (s == "auto") return Backend::Auto;
  if (s == "full") return Backend::Full;
  if (s == "collective") return Backend::Collective;
  throw ConfigError("backend: unknown value '" + s + "' (expected auto, full or collective)");
}

LindbladSpec collective_backend(const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.has_local_noise()) {
    throw ConfigError("backend: collective backend requires gamma_down = gamma_phi = 0 (got gamma_down = " +
                      std::to_string(cfg.gamma_down) + ", gamma_phi = " + std::to_string(cfg.gamma_phi) + ")");
  }
  const SpaceDescriptor space = SpaceDescriptor::collective(cfg.n_qubits, cfg.cavity_dim);
  std::vector<JumpOperator> jumps;
  if (cfg.kappa > 0.0) jumps.push_back({boson_ops(space).a, cfg.kappa, "a"});
  return assemble_lindblad(cfg, space, std::move(jumps));
}

Backend resolve_backend(const ModelConfig& cfg, Backend backend) {
  if (backend != Backend::Auto) return backend;
  return cfg.has_local_noise() ? Backend::Full : Backend::Collective;
}

LindbladSpec build_spec(const ModelConfig& cfg, Backend backend) {
  return resolve_backend(cfg, backend) == Backend::Collective ? collective_backend(cfg) : build_lindblad(cfg);
}

long long dicke_subspace_dim(int n_qubits) {
  if (n_qubits < 1) throw ConfigError("dicke_subspace_dim: N must be >= 1");
  const long long k = n_qubits + 2;
  return k * k / 4;
}

double locked_energy_bound(int n_qubits, double omega0) {
  if (n_qubits < 1) throw ConfigError("locked_energy_bound: N must be >= 1");
  return 2.0 * n_qubits / (n_qubits + 2.0) * omega0;
}

double perm_unitary_locked_bound(int n_qubits, double omega0) {
  if (n_qubits < 1) throw ConfigError("perm_unitary_locked_bound: N must be >= 1");
  return omega0 * n_qubits * (n_qubits + 1.0) / (n_qubits + 2.0);
}

}  // namespace qbat
