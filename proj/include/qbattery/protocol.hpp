#pragma once

#include <string>
#include <vector>

#include "qbattery/energetics.hpp"
#include "qbattery/engine.hpp"
#include "qbattery/symmetry.hpp"

namespace qbat {

enum class InitialKind { Coherent, Fock, InteractingGround };

/// Initial state of the charging run: battery all down with the charger in
/// |alpha> or |m>, or the ground state of H_B + H_C + H_I.
struct InitialState {
  InitialKind kind = InitialKind::Coherent;
  double mean_photons = -1.0;  ///< |alpha|^2 or m; negative means N

  static InitialState coherent(double alpha) { return {InitialKind::Coherent, alpha * alpha}; }
  static InitialState coherent_mean(double mean) { return {InitialKind::Coherent, mean}; }
  static InitialState fock(int m) { return {InitialKind::Fock, static_cast<double>(m)}; }
  static InitialState interacting_ground() { return {InitialKind::InteractingGround, 0.0}; }

  double resolved_mean(int n_qubits) const { return mean_photons < 0.0 ? n_qubits : mean_photons; }
  /// Compact label such as coherent:4, fock:4 or ground.
  std::string describe(int n_qubits) const;
};

InitialState parse_initial(const std::string& label);

struct RunOptions {
  double t_max = 0.0;     ///< 0 selects one collective Rabi period 2 pi/(g_eff sqrt(N))
  int samples = 2000;     ///< points on [0, t_max], both ends included
  bool extend = true;     ///< grow the window while the ergotropy peak sits in its last 10%
  int max_extensions = 4;
  int cavity_retries = 3;  ///< cavity_dim grows by half (at least 4) after a truncation breach
  Backend backend = Backend::Auto;
  IntegratorOptions integrator;
};

/// Sampled trajectory with per-sample figures of merit and diagnostics.
struct ChargeRecord {
  ModelConfig config;  ///< with the cavity_dim actually used
  InitialState initial;
  Backend backend = Backend::Full;
  std::vector<double> t;
  std::vector<double> e_battery;
  std::vector<double> ergotropy;
  std::vector<double> h_interaction;
  std::vector<double> photons;
  std::vector<double> n_excitations;
  std::vector<double> trace_error;
  std::vector<double> truncation_tail;
  IntegrationStats stats;
  int extensions = 0;
  int cavity_retries = 0;
  DensityState final_state;

  std::size_t size() const { return t.size(); }
};

/// Window used when RunOptions::t_max is 0.
double default_window(const ModelConfig& cfg);

ChargeRecord run_charging(const ModelConfig& cfg, const InitialState& initial, const RunOptions& options = {});

/// Initial density matrix over the spec's space.
DensityState prepare_initial(const LindbladSpec& spec, const InitialState& initial);

struct FiguresOfMerit {
  double tau = 0.0;
  double ergotropy_at_tau = 0.0;
  double e_b_at_tau = 0.0;
  double locked_at_tau = 0.0;
  double quench_off_at_tau = 0.0;
  double tau2 = 0.0;
  double p_max = 0.0;
  double max_e_b = 0.0;
  double first_peak_tau = 0.0;
  double first_peak_ergotropy = 0.0;
  bool window_limited = false;
  std::string diagnostics;
};

/// tau at the global ergotropy maximum (quadratic refinement), the first
/// local maximum, and tau2/P_max from the mean power.
FiguresOfMerit select_tau(const ChargeRecord& record);

double mean_power(const ChargeRecord& record, double t);
Peak max_mean_power(const ChargeRecord& record);

/// True when (max - min)/mean of E_B over samples in [t_begin, t_end] is
/// below `threshold`.
bool stabilization_check(const ChargeRecord& record, double t_begin, double t_end, double threshold = 0.05);

}  // namespace qbat
