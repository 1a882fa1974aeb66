#include "qbattery/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "qbattery/error.hpp"

namespace qbat {

namespace {

std::string clean_field(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

SweepRow run_row(const SweepSpec& spec, std::size_t i) {
  SweepRow row;
  try {
    auto [cfg, initial] = sweep_point(spec, i);
    row.config = cfg;
    row.initial = initial;
    const ChargeRecord rec = run_charging(cfg, initial, spec.run);
    row.config = rec.config;
    row.figures = select_tau(rec);
  } catch (const ConfigError& e) {
    row.ok = false;
    row.error = e.what();
  } catch (const std::exception& e) {
    row.ok = false;
    row.numerical_failure = true;
    row.error = e.what();
  }
  if (!row.ok) {
    const double nan = std::nan("");
    FiguresOfMerit& f = row.figures;
    f.tau = f.ergotropy_at_tau = f.e_b_at_tau = f.locked_at_tau = f.quench_off_at_tau = nan;
    f.tau2 = f.p_max = f.max_e_b = nan;
    f.diagnostics = "error=" + row.error;
  }
  return row;
}

}  // namespace

std::size_t SweepResult::failures() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.ok ? 0 : 1;
  return n;
}

std::pair<ModelConfig, InitialState> sweep_point(const SweepSpec& spec, std::size_t i) {
  ModelConfig cfg = spec.base;
  InitialState initial = spec.initial;
  switch (spec.axis) {
    case SweepAxis::N:
      cfg.n_qubits = static_cast<int>(spec.values.at(i));
      break;
    case SweepAxis::Detuning:
      cfg.omega_c = cfg.omega0 / spec.values.at(i);
      break;
    case SweepAxis::M:
      initial.mean_photons = spec.values.at(i);
      break;
    case SweepAxis::G:
      cfg.g = spec.values.at(i);
      break;
    case SweepAxis::Preset: {
      const NoiseRates r = noise_preset(spec.preset_values.at(i));
      cfg.kappa = r.kappa;
      cfg.gamma_down = r.gamma_down;
      cfg.gamma_phi = r.gamma_phi;
      break;
    }
  }
  return {cfg, initial};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError("QB_THREADS: expected a positive integer (got '" + std::string(env) + "')");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

SweepResult run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  const std::size_t n = spec.size();
  SweepResult result;
  result.rows.resize(n);
  const int workers = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(resolve_threads(threads))));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) result.rows[i] = run_row(spec, i);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (spec.axis == SweepAxis::M) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      if (result.rows[i].ok) {
        x.push_back(spec.values[i]);
        y.push_back(result.rows[i].figures.p_max);
      }
    }
    try {
      result.fit = fit_power_law(x, y);
    } catch (const ConfigError&) {
      result.fit.reset();
    }
  }
  return result;
}

SweepResult sweep_vs_n(SweepSpec spec, int threads) {
  spec.axis = SweepAxis::N;
  return run_sweep(spec, threads);
}

SweepResult sweep_vs_detuning(SweepSpec spec, int threads) {
  spec.axis = SweepAxis::Detuning;
  return run_sweep(spec, threads);
}

SweepResult sweep_vs_m(SweepSpec spec, int threads) {
  spec.axis = SweepAxis::M;
  return run_sweep(spec, threads);
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) throw ConfigError("fit_power_law: needs at least two positive points");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("fit_power_law: x values must differ");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols{
      "N",     "interaction", "scaling",          "omega0",      "omega_c", "g",       "kappa",
      "gamma_down", "gamma_phi", "initial",     "tau",     "ergotropy_at_tau", "e_b_at_tau", "locked",
      "quench_off", "tau2",      "p_max",       "max_e_b", "diagnostics"};
  return cols;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out;
  const auto& cols = sweep_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const SweepRow& r : result.rows) {
    const ModelConfig& c = r.config;
    const FiguresOfMerit& f = r.figures;
    const std::vector<std::string> fields{std::to_string(c.n_qubits),
                                          to_string(c.interaction),
                                          to_string(c.scaling),
                                          format_number(c.omega0),
                                          format_number(c.omega_c),
                                          format_number(c.g),
                                          format_number(c.kappa),
                                          format_number(c.gamma_down),
                                          format_number(c.gamma_phi),
                                          clean_field(r.initial.describe(c.n_qubits)),
                                          format_number(f.tau),
                                          format_number(f.ergotropy_at_tau),
                                          format_number(f.e_b_at_tau),
                                          format_number(f.locked_at_tau),
                                          format_number(f.quench_off_at_tau),
                                          format_number(f.tau2),
                                          format_number(f.p_max),
                                          format_number(f.max_e_b),
                                          clean_field(f.diagnostics)};
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
    out += '\n';
  }
  return out;
}

std::string fit_csv(const SweepSpec& spec, const PowerLawFit& fit) {
  return "axis,exponent,prefactor,r_squared\n" + to_string(spec.axis) + "," + format_number(fit.exponent) + "," +
         format_number(fit.prefactor) + "," + format_number(fit.r_squared) + "\n";
}

std::string trajectory_csv(const ChargeRecord& r) {
  std::string out = "t,e_b,ergotropy,h_interaction,photons,n_ex,trace_error,truncation_tail\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out += format_number(r.t[i]) + "," + format_number(r.e_battery[i]) + "," + format_number(r.ergotropy[i]) + "," +
           format_number(r.h_interaction[i]) + "," + format_number(r.photons[i]) + "," +
           format_number(r.n_excitations[i]) + "," + format_number(r.trace_error[i]) + "," +
           format_number(r.truncation_tail[i]) + "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("output: cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("output: write failed for '" + path + "'");
}

}  // namespace qbat
