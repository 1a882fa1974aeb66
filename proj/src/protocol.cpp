#include "qbattery/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "qbattery/error.hpp"

namespace qbat {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::size_t first_argmax(const std::vector<double>& y) {
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

bool interior_peak(const std::vector<double>& y, std::size_t k) {
  return k > 0 && k + 1 < y.size() && y[k] > y[k - 1] && y[k] >= y[k + 1];
}

void append_samples(ChargeRecord& rec, const Trajectory& traj, const BatteryEnergetics& energetics,
                    const SpaceDescriptor& space) {
  for (const Sample& s : traj.samples) {
    const auto v = energetics.evaluate(s.rho_battery);
    double photons = 0.0;
    double excitations = 0.0;
    for (Eigen::Index q = 0; q < space.battery_dim(); ++q) {
      for (Eigen::Index n = 0; n < space.cavity_dim(); ++n) {
        const double p = s.populations(space.index(q, n));
        photons += p * static_cast<double>(n);
        excitations += p * static_cast<double>(n + space.excitations(q));
      }
    }
    rec.t.push_back(s.t);
    rec.e_battery.push_back(v.e_battery);
    rec.ergotropy.push_back(v.ergotropy);
    rec.h_interaction.push_back(s.switched_expectation.real());
    rec.photons.push_back(photons);
    rec.n_excitations.push_back(excitations);
    rec.trace_error.push_back(s.trace_error);
    rec.truncation_tail.push_back(s.truncation_tail);
  }
}

void merge_stats(IntegrationStats& into, const IntegrationStats& s) {
  into.accepted_steps += s.accepted_steps;
  into.rejected_steps += s.rejected_steps;
  into.rhs_evaluations += s.rhs_evaluations;
  into.error_estimate += s.error_estimate;
  into.max_trace_error = std::max(into.max_trace_error, s.max_trace_error);
  into.max_truncation_tail = std::max(into.max_truncation_tail, s.max_truncation_tail);
  into.rotating_frame = s.rotating_frame;
}

ChargeRecord run_once(const ModelConfig& cfg, const InitialState& initial, const RunOptions& options) {
  ChargeRecord rec;
  rec.config = cfg;
  rec.initial = initial;
  rec.backend = resolve_backend(cfg, options.backend);
  const LindbladSpec spec = build_spec(cfg, rec.backend);
  const BatteryEnergetics energetics(spec.space, cfg.omega0);

  const bool auto_window = !(options.t_max > 0.0);
  double t_end = auto_window ? default_window(cfg) : options.t_max;
  const int samples = std::max(2, options.samples);
  const double dt = t_end / (samples - 1);
  std::vector<double> grid(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) grid[static_cast<std::size_t>(i)] = i * dt;
  grid.back() = t_end;

  Trajectory traj = integrate(spec, prepare_initial(spec, initial), t_end, grid, options.integrator);
  append_samples(rec, traj, energetics, spec.space);
  merge_stats(rec.stats, traj.stats);

  while (auto_window && options.extend && rec.extensions < options.max_extensions) {
    const std::size_t k = first_argmax(rec.ergotropy);
    if (rec.t[k] < 0.9 * t_end || rec.ergotropy[k] <= 0.0) break;
    const double new_end = 1.5 * t_end;
    std::vector<double> more;
    for (double t = t_end + dt; t < new_end - 0.5 * dt; t += dt) more.push_back(t);
    more.push_back(new_end);
    Trajectory next = integrate(spec, traj.final_state, new_end, more, options.integrator);
    append_samples(rec, next, energetics, spec.space);
    merge_stats(rec.stats, next.stats);
    traj = std::move(next);
    t_end = new_end;
    ++rec.extensions;
  }
  rec.final_state = std::move(traj.final_state);
  return rec;
}

}  // namespace

std::string InitialState::describe(int n_qubits) const {
  switch (kind) {
    case InitialKind::Coherent:
      return "coherent:" + fmt(resolved_mean(n_qubits));
    case InitialKind::Fock:
      return "fock:" + fmt(resolved_mean(n_qubits));
    case InitialKind::InteractingGround:
      return "ground";
  }
  return "ground";
}

InitialState parse_initial(const std::string& label) {
  if (label == "ground") return InitialState::interacting_ground();
  const auto colon = label.find(':');
  const std::string kind = label.substr(0, colon);
  double mean = -1.0;
  if (colon != std::string::npos) {
    try {
      mean = std::stod(label.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("initial: cannot parse mean photon number in '" + label + "'");
    }
    if (!(mean >= 0.0)) throw ConfigError("initial: mean photon number must be >= 0 in '" + label + "'");
  }
  if (kind == "coherent") return InitialState::coherent_mean(mean);
  if (kind == "fock") {
    if (mean >= 0.0 && mean != std::floor(mean)) throw ConfigError("initial: Fock number must be an integer");
    return {InitialKind::Fock, mean};
  }
  throw ConfigError("initial: unknown state '" + label + "' (expected coherent[:m], fock[:m] or ground)");
}

double default_window(const ModelConfig& cfg) {
  const double collective = cfg.effective_coupling() * std::sqrt(static_cast<double>(cfg.n_qubits));
  if (collective > 0.0) return 2.0 * std::numbers::pi / collective;
  return cfg.omega0 > 0.0 ? 10.0 / cfg.omega0 : 10.0;
}

DensityState prepare_initial(const LindbladSpec& spec, const InitialState& initial) {
  const int n = spec.space.n_qubits();
  switch (initial.kind) {
    case InitialKind::Coherent:
      return DensityState::pure(spec.space, coherent_state(spec.space, std::sqrt(initial.resolved_mean(n))));
    case InitialKind::Fock: {
      const double m = initial.resolved_mean(n);
      if (m + 2 >= spec.space.cavity_dim()) {
        throw ConfigError("initial: Fock state |" + fmt(m) + "> needs cavity_dim >= " + fmt(m + 3));
      }
      return DensityState::pure(spec.space, fock_state(spec.space, static_cast<int>(m)));
    }
    case InitialKind::InteractingGround:
      return interacting_ground_state(spec).state;
  }
  throw ConfigError("initial: unknown kind");
}

ChargeRecord run_charging(const ModelConfig& cfg, const InitialState& initial, const RunOptions& options) {
  cfg.validate();
  if (options.samples < 2) throw ConfigError("run.samples: must be >= 2");
  ModelConfig c = cfg;
  const double mean = initial.kind == InitialKind::InteractingGround ? cfg.n_qubits : initial.resolved_mean(cfg.n_qubits);
  c.cavity_dim = std::max(cfg.cavity_dim, default_cavity_dim(mean));
  for (int attempt = 0;; ++attempt) {
    try {
      ChargeRecord rec = run_once(c, initial, options);
      rec.cavity_retries = attempt;
      return rec;
    } catch (const TruncationError&) {
      if (attempt >= options.cavity_retries) throw;
      c.cavity_dim += std::max(4, c.cavity_dim / 2);
    }
  }
}

double mean_power(const ChargeRecord& record, double t) { return mean_power(record.t, record.e_battery, t); }

Peak max_mean_power(const ChargeRecord& record) { return max_mean_power(record.t, record.e_battery); }

FiguresOfMerit select_tau(const ChargeRecord& r) {
  if (r.t.empty()) throw ConfigError("select_tau: empty record");
  FiguresOfMerit f;
  const std::size_t k = first_argmax(r.ergotropy);
  const bool refine = interior_peak(r.ergotropy, k);
  const Peak peak = refine ? quadratic_peak(r.t, r.ergotropy, k) : Peak{r.t[k], r.ergotropy[k]};
  f.tau = peak.t;
  f.e_b_at_tau = refine ? quadratic_value(r.t, r.e_battery, k, f.tau) : r.e_battery[k];
  f.ergotropy_at_tau = std::min(peak.value, f.e_b_at_tau);
  f.locked_at_tau = f.e_b_at_tau - f.ergotropy_at_tau;
  f.quench_off_at_tau = -(refine ? quadratic_value(r.t, r.h_interaction, k, f.tau) : r.h_interaction[k]);
  f.window_limited = k + 1 == r.t.size();

  std::size_t first = k;
  const double floor = 1e-12 * (1.0 + r.ergotropy[k]);
  for (std::size_t i = 1; i + 1 < r.t.size(); ++i) {
    if (r.ergotropy[i] > floor && interior_peak(r.ergotropy, i)) {
      first = i;
      break;
    }
  }
  const Peak fp = interior_peak(r.ergotropy, first) ? quadratic_peak(r.t, r.ergotropy, first)
                                                    : Peak{r.t[first], r.ergotropy[first]};
  f.first_peak_tau = fp.t;
  f.first_peak_ergotropy = fp.value;

  const std::size_t ke = first_argmax(r.e_battery);
  const Peak ep = interior_peak(r.e_battery, ke) ? quadratic_peak(r.t, r.e_battery, ke)
                                                 : Peak{r.t[ke], r.e_battery[ke]};
  f.max_e_b = std::max(ep.value, f.e_b_at_tau);

  std::string diag = "backend=" + to_string(r.backend) + ";cavity_dim=" + std::to_string(r.config.cavity_dim) +
                     ";window=" + fmt(r.t.back()) + ";extensions=" + std::to_string(r.extensions);
  if (r.cavity_retries > 0) diag += ";cavity_retries=" + std::to_string(r.cavity_retries);
  try {
    const Peak p = max_mean_power(r);
    f.tau2 = p.t;
    f.p_max = p.value;
  } catch (const ConfigError&) {
    f.tau2 = std::numeric_limits<double>::quiet_NaN();
    f.p_max = 0.0;
    diag += ";no_power";
  }
  if (f.window_limited) diag += ";window_limited";
  if (first != k) diag += ";first_peak_tau=" + fmt(f.first_peak_tau);
  diag += ";max_trace_error=" + fmt(r.stats.max_trace_error) + ";max_tail=" + fmt(r.stats.max_truncation_tail);
  f.diagnostics = diag;
  return f;
}

bool stabilization_check(const ChargeRecord& record, double t_begin, double t_end, double threshold) {
  if (record.t.empty() || t_begin < record.t.front() || t_end > record.t.back() + 1e-12 || !(t_end > t_begin)) {
    throw ConfigError("stabilization_check: window must lie inside the record");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < record.t.size(); ++i) {
    if (record.t[i] < t_begin || record.t[i] > t_end) continue;
    lo = std::min(lo, record.e_battery[i]);
    hi = std::max(hi, record.e_battery[i]);
    sum += record.e_battery[i];
    ++count;
  }
  if (count == 0) return false;
  if (hi - lo == 0.0) return true;
  const double mean = sum / static_cast<double>(count);
  return mean > 0.0 && (hi - lo) / mean < threshold;
}

}  // namespace qbat
