#pragma once

#include <string>
#include <vector>

#include "qbattery/operators.hpp"

namespace qbat {

enum class Interaction { Dicke, TavisCummings };

/// Standard: coupling g/sqrt(N) as in the interaction Hamiltonians.
/// Rescaled: g -> g sqrt(N), i.e. the bare collective coupling g.
enum class CouplingScaling { Standard, Rescaled };

std::string to_string(Interaction x);
std::string to_string(CouplingScaling s);
Interaction parse_interaction(const std::string& s);
CouplingScaling parse_scaling(const std::string& s);

/// Piecewise-constant interaction switch lambda(t). values[k] holds on
/// [switch_times[k], switch_times[k+1]); only 0 and 1 are allowed.
struct LambdaSchedule {
  std::vector<double> switch_times{0.0};
  std::vector<int> values{1};

  static LambdaSchedule always_on() { return {}; }
  int value_at(double t) const;
  void validate() const;
};

struct ModelConfig {
  int n_qubits = 1;
  double omega0 = 1.0;
  double omega_c = 1.0;
  double g = 0.0;
  Interaction interaction = Interaction::TavisCummings;
  CouplingScaling scaling = CouplingScaling::Standard;
  double kappa = 0.0;
  double gamma_down = 0.0;
  double gamma_phi = 0.0;
  int cavity_dim = 5;
  LambdaSchedule lambda_schedule;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  double effective_coupling() const;
  bool has_local_noise() const { return gamma_down > 0.0 || gamma_phi > 0.0; }
  bool has_dissipation() const { return kappa > 0.0 || has_local_noise(); }
  SpaceDescriptor full_space() const { return SpaceDescriptor::qubits(n_qubits, cavity_dim); }
};

struct JumpOperator {
  OperatorMatrix op;
  double rate;
  std::string label;
};

/// Everything the engine needs: H_B + H_C, the switched H_I, and the
/// (operator, rate) dissipator list.
struct LindbladSpec {
  ModelConfig model;
  SpaceDescriptor space;
  OperatorMatrix hamiltonian_static;
  OperatorMatrix hamiltonian_switched;
  std::vector<JumpOperator> jumps;
};

OperatorMatrix h_battery(const ModelConfig& cfg);
OperatorMatrix h_charger(const ModelConfig& cfg);
OperatorMatrix h_interaction(const ModelConfig& cfg);

// Same terms over an explicit space (qubit or collective basis).
OperatorMatrix h_battery(const ModelConfig& cfg, const SpaceDescriptor& space);
OperatorMatrix h_charger(const ModelConfig& cfg, const SpaceDescriptor& space);
OperatorMatrix h_interaction(const ModelConfig& cfg, const SpaceDescriptor& space);

/// sqrt(w0 wc)/2 for Dicke, sqrt(w0 wc) for Tavis-Cummings.
double critical_coupling(Interaction interaction, double omega0, double omega_c);

/// Full-space spec with cavity loss and per-site decay and dephasing.
/// Zero-rate channels are omitted.
LindbladSpec build_lindblad(const ModelConfig& cfg);

/// Assembles a spec over `space` with the given jump list (used by both
/// backends).
LindbladSpec assemble_lindblad(const ModelConfig& cfg, const SpaceDescriptor& space,
                               std::vector<JumpOperator> jumps);

struct GroundStateResult {
  DensityState state;
  double energy = 0.0;
  bool degenerate = false;
  double gap = 0.0;
};

/// Lowest eigenvector of H_B + H_C + H_I. On a degeneracy within 1e-9 the
/// even excitation-parity vector of the lowest eigenspace is returned.
GroundStateResult interacting_ground_state(const ModelConfig& cfg);
GroundStateResult interacting_ground_state(const LindbladSpec& spec);

/// exp(i pi (a^dag a + J_z + N/2)) as a diagonal +-1 operator.
OperatorMatrix excitation_parity(const SpaceDescriptor& space);

}  // namespace qbat
