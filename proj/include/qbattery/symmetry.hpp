#pragma once

#include <string>

#include "qbattery/models.hpp"

namespace qbat {

/// Full: 2^N qubit space. Collective: maximal-j Dicke ladder, valid when
/// gamma_down = gamma_phi = 0. Auto picks Collective whenever it is valid.
enum class Backend { Auto, Full, Collective };

std::string to_string(Backend b);
Backend parse_backend(const std::string& s);

/// Spec on the (N+1) x cavity_dim collective space with cavity loss only.
/// Throws ConfigError when local decay or dephasing is requested.
LindbladSpec collective_backend(const ModelConfig& cfg);

/// Resolves Auto and builds the matching spec.
LindbladSpec build_spec(const ModelConfig& cfg, Backend backend);
Backend resolve_backend(const ModelConfig& cfg, Backend backend);

/// Dimension of the span of permutation-invariant states built from the
/// Dicke basis: floor((N+2)^2 / 4).
long long dicke_subspace_dim(int n_qubits);

/// Locked-energy bound for permutation-invariant states, 2N/(N+2) w0.
double locked_energy_bound(int n_qubits, double omega0);

/// Weaker bound when only permutation-invariant unitaries are allowed,
/// w0 N(N+1)/(N+2).
double perm_unitary_locked_bound(int n_qubits, double omega0);

}  // namespace qbat
