// Command-line front end over the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbattery/qbattery.h"

namespace {

int exit_code(qb_status s) {
  switch (s) {
    case QB_OK:
      return 0;
    case QB_ERR_CONFIG:
    case QB_ERR_IO:
      return 1;
    default:
      return 2;
  }
}

int fail(qb_status s) {
  std::fprintf(stderr, "error: %s\n", qb_last_error());
  return exit_code(s);
}

struct Common {
  std::string config;
  std::string out = ".";
  std::string preset;
  std::string backend;
  double tol = 0.0;
  int threads = 0;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--preset", c.preset, "Noise preset: noiseless, kappa, kappa-decay, full-noise");
  cmd->add_option("--backend", c.backend, "full or collective (default: auto)")
      ->check(CLI::IsMember({"full", "collective", "auto"}));
  cmd->add_option("--tol", c.tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.threads, "Sweep workers (default: QB_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", c.sets, "Override a config key, e.g. model.kappa=0.1");
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

qb_status load(const Common& c, qb_config** cfg) {
  qb_status s = c.config.empty() ? qb_config_from_json("{}", cfg) : qb_config_from_file(c.config.c_str(), cfg);
  if (s != QB_OK) return s;
  auto set = [&](const char* key, const std::string& value) {
    if (s == QB_OK) s = qb_config_set(*cfg, key, value.c_str());
  };
  if (!c.preset.empty()) {
    set("model.kappa", "null");
    set("model.gamma_down", "null");
    set("model.gamma_phi", "null");
    set("model.noise", quoted(c.preset));
  }
  if (!c.backend.empty()) set("run.backend", quoted(c.backend));
  if (c.tol > 0.0) {
    set("run.rtol", std::to_string(c.tol));
    set("run.atol", std::to_string(c.tol * 1e-2));
  }
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value (got '%s')\n", kv.c_str());
      return QB_ERR_CONFIG;
    }
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  return s;
}

int simulate(const Common& c) {
  qb_config* cfg = nullptr;
  if (qb_status s = load(c, &cfg); s != QB_OK) {
    qb_config_free(cfg);
    return fail(s);
  }
  qb_record* rec = nullptr;
  qb_status s = qb_simulate(cfg, &rec);
  qb_config_free(cfg);
  if (s != QB_OK) return fail(s);
  const std::string path = c.out + "/trajectory.csv";
  s = qb_record_write_csv(rec, path.c_str());
  qb_figures f{};
  if (s == QB_OK) s = qb_record_figures(rec, &f);
  const std::size_t n = qb_record_size(rec);
  qb_record_free(rec);
  if (s != QB_OK) return fail(s);
  std::printf("samples          %zu\n", n);
  std::printf("tau              %.10g\n", f.tau);
  std::printf("ergotropy(tau)   %.10g\n", f.ergotropy_at_tau);
  std::printf("E_B(tau)         %.10g\n", f.e_b_at_tau);
  std::printf("locked(tau)      %.10g\n", f.locked_at_tau);
  std::printf("quench off cost  %.10g\n", f.quench_off_at_tau);
  std::printf("tau2             %.10g\n", f.tau2);
  std::printf("P_max            %.10g\n", f.p_max);
  std::printf("max E_B          %.10g\n", f.max_e_b);
  if (f.window_limited) std::printf("note: ergotropy maximum at the window end\n");
  std::printf("trajectory written to %s\n", path.c_str());
  return 0;
}

int sweep(const Common& c, const std::string& axis, const std::string& values) {
  qb_config* cfg = nullptr;
  qb_status s = load(c, &cfg);
  if (s == QB_OK && !axis.empty()) s = qb_config_set(cfg, "sweep.axis", quoted(axis).c_str());
  if (s == QB_OK && !values.empty()) s = qb_config_set(cfg, "sweep.values", quoted(values).c_str());
  if (s != QB_OK) {
    qb_config_free(cfg);
    return fail(s);
  }
  int failed = 0;
  s = qb_sweep(cfg, c.out.c_str(), c.threads, &failed);
  qb_config_free(cfg);
  if (s != QB_OK) {
    if (failed > 0) std::fprintf(stderr, "%d row(s) failed; see the diagnostics column\n", failed);
    return fail(s);
  }
  std::printf("sweep written to %s/sweep.csv\n", c.out.c_str());
  return 0;
}

int steady(const Common& c, const std::string& method) {
  qb_config* cfg = nullptr;
  qb_status s = load(c, &cfg);
  if (s == QB_OK && !method.empty()) s = qb_config_set(cfg, "steady_state.method", quoted(method).c_str());
  qb_steady_result r{};
  if (s == QB_OK) s = qb_steady_state(cfg, &r);
  qb_config_free(cfg);
  if (s != QB_OK) return fail(s);
  std::printf("energy           %.12g\n", r.energy);
  std::printf("battery energy   %.12g\n", r.battery_energy);
  std::printf("photons          %.12g\n", r.photons);
  std::printf("residual         %.3e\n", r.residual);
  std::printf("vacuum distance  %.3e\n", r.vacuum_distance);
  return 0;
}

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int check() {
  int failures = 0;
  const qb_status s = qb_run_checks(print_line, nullptr, &failures);
  if (s != QB_OK && failures == 0) return fail(s);
  return s == QB_OK ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open Dicke and Tavis-Cummings quantum battery simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qb_version()));

  Common sim_opts, sweep_opts, steady_opts;
  std::string axis, values, method;
  CLI::App* sim = app.add_subcommand("simulate", "Run one charging trajectory");
  add_common(sim, sim_opts);
  CLI::App* sw = app.add_subcommand("sweep", "Figures of merit over a parameter axis");
  add_common(sw, sweep_opts);
  sw->add_option("--axis", axis, "N, detuning, m, g or preset");
  sw->add_option("--values", values, "Range a..b[:step] or comma list");
  CLI::App* ss = app.add_subcommand("steady-state", "Steady state of the charging dynamics");
  add_common(ss, steady_opts);
  ss->add_option("--method", method, "null-space or integration");
  CLI::App* chk = app.add_subcommand("check", "Run the invariant self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (sim->parsed()) return simulate(sim_opts);
  if (sw->parsed()) return sweep(sweep_opts, axis, values);
  if (ss->parsed()) return steady(steady_opts, method);
  if (chk->parsed()) return check();
  return 1;
}
