#include "qbattery/checks.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "qbattery/error.hpp"
#include "qbattery/protocol.hpp"

namespace qbat {

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome within(double err, double tol) { return {err <= tol, "max error " + sci(err) + " (tol " + sci(tol) + ")"}; }

std::vector<double> grid(double t_end, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_end * i / (n - 1);
  return t;
}

Outcome rabi_law() {
  ModelConfig cfg;
  cfg.g = 0.3;
  cfg.cavity_dim = 4;
  const LindbladSpec spec = build_lindblad(cfg);
  const auto times = grid(10.0, 101);
  const Trajectory tr = integrate(spec, DensityState::pure(spec.space, fock_state(spec.space, 1)), 10.0, times);
  double err = 0.0;
  for (const auto& s : tr.samples) {
    err = std::max(err, std::abs(s.rho_battery(1, 1).real() - std::pow(std::sin(cfg.g * s.t), 2)));
  }
  return within(err, 1e-6);
}

Outcome cavity_decay() {
  ModelConfig cfg;
  cfg.kappa = 0.2;
  cfg.cavity_dim = 8;
  const LindbladSpec spec = build_lindblad(cfg);
  const auto times = grid(10.0, 51);
  const Trajectory tr = integrate(spec, DensityState::pure(spec.space, fock_state(spec.space, 3)), 10.0, times);
  double err = 0.0;
  for (const auto& s : tr.samples) {
    double n = 0.0;
    for (Eigen::Index q = 0; q < 2; ++q) {
      for (int k = 0; k < 8; ++k) n += k * s.populations(spec.space.index(q, k));
    }
    err = std::max(err, std::abs(n - 3.0 * std::exp(-cfg.kappa * s.t)) / (3.0 * std::exp(-cfg.kappa * s.t)));
  }
  return within(err, 1e-6);
}

Outcome dephasing() {
  ModelConfig cfg;
  cfg.gamma_phi = 0.1;
  cfg.cavity_dim = 2;
  const LindbladSpec spec = build_lindblad(cfg);
  StateVec psi = StateVec::Zero(4);
  psi(spec.space.index(0, 0)) = 1.0 / std::sqrt(2.0);
  psi(spec.space.index(1, 0)) = 1.0 / std::sqrt(2.0);
  const auto times = grid(10.0, 51);
  IntegratorOptions opt;
  opt.truncation_threshold = -1.0;  // the cavity stays in vacuum
  const Trajectory tr = integrate(spec, DensityState::pure(spec.space, psi), 10.0, times, opt);
  double err = 0.0;
  for (const auto& s : tr.samples) {
    const double expected = 0.5 * std::exp(-2.0 * cfg.gamma_phi * s.t);
    err = std::max(err, std::abs(std::abs(s.rho_battery(0, 1)) - expected) / expected);
  }
  return within(err, 1e-6);
}

DenseMat random_state(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  DenseMat a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = Complex{nd(rng), nd(rng)};
  DenseMat rho = a * a.adjoint();
  return rho / rho.trace();
}

Outcome generator_structure() {
  ModelConfig cfg;
  cfg.n_qubits = 2;
  cfg.g = 0.4;
  cfg.interaction = Interaction::Dicke;
  cfg.kappa = 0.15;
  cfg.gamma_down = 0.1;
  cfg.gamma_phi = 0.1;
  cfg.cavity_dim = 4;
  const LindbladSpec spec = build_lindblad(cfg);
  std::mt19937_64 rng(7);
  double err = 0.0;
  for (int k = 0; k < 5; ++k) {
    const DenseMat d = liouvillian_apply(spec, 1, random_state(spec.space.total_dim(), rng));
    err = std::max({err, std::abs(d.trace()), (d - d.adjoint()).cwiseAbs().maxCoeff()});
  }
  return within(err, 1e-12);
}

Outcome steady_state_vacuum() {
  ModelConfig cfg;
  cfg.n_qubits = 2;
  cfg.g = 0.5;
  cfg.kappa = 0.2;
  cfg.gamma_down = 0.3;
  cfg.cavity_dim = 3;
  const LindbladSpec spec = build_lindblad(cfg);
  DenseMat vac = DenseMat::Zero(spec.space.total_dim(), spec.space.total_dim());
  vac(0, 0) = 1.0;
  double err = 0.0;
  for (auto method : {SteadyStateMethod::NullSpace, SteadyStateMethod::Integration}) {
    SteadyStateOptions opt;
    opt.method = method;
    err = std::max(err, trace_distance(steady_state(spec, opt).state.rho, vac));
  }
  return within(err, 1e-6);
}

Outcome lyapunov() {
  ModelConfig cfg;
  cfg.n_qubits = 2;
  cfg.g = 0.7;
  cfg.kappa = 0.3;
  cfg.gamma_down = 0.2;
  cfg.gamma_phi = 0.4;
  cfg.cavity_dim = 4;
  const LindbladSpec spec = build_lindblad(cfg);
  std::mt19937_64 rng(11);
  double err = 0.0;
  for (int k = 0; k < 10; ++k) {
    const DenseMat rho = random_state(spec.space.total_dim(), rng);
    err = std::max(err, std::abs(lyapunov_rate(spec, rho) - numeric_excitation_rate(spec, rho)));
  }
  return within(err, 1e-9);
}

Outcome energetics_basics() {
  DenseMat h = DenseMat::Zero(2, 2);
  h(1, 1) = 1.0;
  DenseMat rho = DenseMat::Zero(2, 2);
  rho(0, 0) = 0.3;
  rho(1, 1) = 0.7;
  const double e = ergotropy(rho, h);
  const DenseMat p = passive_state(rho, h);
  const double err = std::max(std::abs(e - 0.4), std::abs(p(0, 0).real() - 0.7) + std::abs(p(1, 1).real() - 0.3));
  return within(err, 1e-12);
}

Outcome bounds() {
  const bool ok = dicke_subspace_dim(2) == 4 && dicke_subspace_dim(3) == 6 && dicke_subspace_dim(4) == 9 &&
                  std::abs(locked_energy_bound(4, 1.0) - 4.0 / 3.0) < 1e-15 &&
                  std::abs(locked_energy_bound(2, 1.0) - 1.0) < 1e-15 &&
                  std::abs(perm_unitary_locked_bound(2, 1.0) - 1.5) < 1e-15;
  return {ok, ok ? "hand values match" : "hand value mismatch"};
}

Outcome backend_agreement() {
  ModelConfig cfg;
  cfg.n_qubits = 2;
  cfg.g = 0.5;
  cfg.kappa = 0.15;
  cfg.interaction = Interaction::Dicke;
  RunOptions opt;
  opt.t_max = 3.0;
  opt.samples = 31;
  opt.backend = Backend::Full;
  const ChargeRecord full = run_charging(cfg, InitialState::coherent_mean(2.0), opt);
  opt.backend = Backend::Collective;
  const ChargeRecord coll = run_charging(cfg, InitialState::coherent_mean(2.0), opt);
  double err = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    err = std::max({err, std::abs(full.e_battery[i] - coll.e_battery[i]),
                    std::abs(full.h_interaction[i] - coll.h_interaction[i]),
                    std::abs(full.photons[i] - coll.photons[i])});
  }
  return within(err, 1e-8);
}

}  // namespace

int run_self_checks(const std::function<void(const std::string&)>& sink) {
  const std::vector<std::pair<std::string, Outcome (*)()>> checks{
      {"rabi_law", rabi_law},
      {"cavity_decay", cavity_decay},
      {"dephasing", dephasing},
      {"generator_trace_hermitian", generator_structure},
      {"tc_steady_state_vacuum", steady_state_vacuum},
      {"lyapunov_rate", lyapunov},
      {"ergotropy_two_level", energetics_basics},
      {"symmetry_bounds", bounds},
      {"backend_agreement", backend_agreement},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    sink((o.pass ? "PASS " : "FAIL ") + name + ": " + o.detail);
  }
  sink(failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed");
  return failures;
}

}  // namespace qbat
