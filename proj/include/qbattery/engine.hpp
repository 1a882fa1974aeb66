#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbattery/models.hpp"

namespace qbat {

/// d rho / dt = -i[H(lambda), rho] + sum_k rate_k D[L_k] rho, with
/// D[L] rho = L rho L^dag - {L^dag L, rho}/2. Lab frame, matrix-free.
DenseMat liouvillian_apply(const LindbladSpec& spec, int lambda, const DenseMat& rho);

/// Frame used for propagation. Rotating removes the diagonal H_B + H_C
/// by an elementwise phase; it is exact whenever H_B + H_C is diagonal and
/// every jump operator shifts energy by a single amount (true for all
/// model specs). Auto picks Rotating when eligible.
enum class Frame { Auto, Lab, Rotating };

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  ///< 0 selects automatically
  double max_step = 0.0;      ///< 0 means unbounded
  std::size_t max_steps = 5'000'000;
  /// Population allowed in the two highest Fock levels; negative disables.
  double truncation_threshold = 1e-6;
  bool keep_states = false;
  Frame frame = Frame::Auto;
};

struct Sample {
  double t = 0.0;
  DenseMat rho_battery;          ///< lab-frame reduced battery state
  Eigen::VectorXd populations;   ///< diagonal of the full state
  Complex switched_expectation;  ///< Tr[H_switched rho]
  double trace_error = 0.0;
  double truncation_tail = 0.0;
  std::optional<DenseMat> state;  ///< full lab-frame state when requested
};

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  /// Sum of accepted local error estimates in Frobenius norm; bounds the
  /// global state error for contractive dynamics.
  double error_estimate = 0.0;
  double max_trace_error = 0.0;
  double max_truncation_tail = 0.0;
  bool rotating_frame = false;
};

struct Trajectory {
  std::vector<Sample> samples;
  DensityState final_state;
  IntegrationStats stats;
};

/// Adaptive Dormand-Prince 5(4) propagation from rho0.time to t_final with
/// dense output at `sample_times` (strictly increasing, inside the window).
/// Trace is never renormalized; drift is reported per sample.
Trajectory integrate(const LindbladSpec& spec, const DensityState& rho0, double t_final,
                     std::span<const double> sample_times, const IntegratorOptions& options = {},
                     const LambdaSchedule& schedule = LambdaSchedule::always_on());

enum class SteadyStateMethod { Integration, NullSpace };
std::string to_string(SteadyStateMethod m);
SteadyStateMethod parse_steady_state_method(const std::string& s);

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::NullSpace;
  double residual_tolerance = 1e-9;    ///< on ||L rho||_1
  double convergence_tolerance = 1e-10;  ///< on ||rho(t+window) - rho(t)||_1
  double max_time = 1e5;
  std::optional<DensityState> initial;  ///< integration start; maximally mixed if empty
  std::size_t null_space_max_dim = 300;
};

struct SteadyStateResult {
  DensityState state;
  double residual = 0.0;  ///< ||L rho||_1
  double elapsed_time = 0.0;
};

SteadyStateResult steady_state(const LindbladSpec& spec, const SteadyStateOptions& options = {});

/// N_ex = a^dag a + J_z + N/2.
OperatorMatrix excitation_number(const SpaceDescriptor& space);

/// Analytic Tr[N_ex L rho] = -kappa <a^dag a> - gamma_down <J_z + N/2>.
/// Tavis-Cummings only.
double lyapunov_rate(const LindbladSpec& spec, const DenseMat& rho);

/// Tr[N_ex L rho] through the generator itself.
double numeric_excitation_rate(const LindbladSpec& spec, const DenseMat& rho);

}  // namespace qbat
