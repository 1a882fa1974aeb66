#include "qbattery/qbattery.h"

#include <cstdio>
#include <cstring>
#include <memory>
#include <exception>
#include <new>
#include <string>

#include "qbattery/checks.hpp"
#include "qbattery/error.hpp"
#include "qbattery/sweeps.hpp"

struct qb_config {
  std::string json;
  qbat::SimulationConfig parsed;
};

struct qb_record {
  qbat::ChargeRecord record;
  qbat::FiguresOfMerit figures;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
qb_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return QB_OK;
  } catch (const qbat::ConfigError& e) {
    g_last_error = e.what();
    return QB_ERR_CONFIG;
  } catch (const qbat::NumericalError& e) {
    g_last_error = e.what();
    return QB_ERR_NUMERICAL;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QB_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw qbat::ConfigError(std::string(what) + ": null argument");
}

}  // namespace

extern "C" {

const char* qb_version(void) { return "0.1.0"; }

const char* qb_last_error(void) { return g_last_error.c_str(); }

qb_status qb_config_from_json(const char* json, qb_config** out) {
  return guarded([&] {
    require(json, "qb_config_from_json");
    require(out, "qb_config_from_json");
    auto cfg = std::make_unique<qb_config>();
    cfg->json = json;
    cfg->parsed = qbat::parse_config_text(cfg->json);
    *out = cfg.release();
  });
}

qb_status qb_config_from_file(const char* path, qb_config** out) {
  return guarded([&] {
    require(path, "qb_config_from_file");
    require(out, "qb_config_from_file");
    auto cfg = std::make_unique<qb_config>();
    std::FILE* f = std::fopen(path, "rb");
    if (!f) throw qbat::ConfigError(std::string("config: cannot open '") + path + "'");
    std::string text;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, f)) > 0;) text.append(buf, n);
    std::fclose(f);
    cfg->parsed = qbat::parse_config_text(text);
    cfg->json = std::move(text);
    *out = cfg.release();
  });
}

qb_status qb_config_set(qb_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "qb_config_set");
    require(key, "qb_config_set");
    require(value, "qb_config_set");
    std::string text = qbat::set_config_value(cfg->json, key, value);
    qbat::SimulationConfig parsed = qbat::parse_config_text(text);
    cfg->json = std::move(text);
    cfg->parsed = std::move(parsed);
  });
}

qb_status qb_config_to_json(const qb_config* cfg, char* buf, size_t len, size_t* needed) {
  return guarded([&] {
    require(cfg, "qb_config_to_json");
    if (needed) *needed = cfg->json.size() + 1;
    if (buf && len > 0) {
      const std::size_t n = std::min(len - 1, cfg->json.size());
      std::memcpy(buf, cfg->json.data(), n);
      buf[n] = '\0';
    }
  });
}

void qb_config_free(qb_config* cfg) { delete cfg; }

qb_status qb_simulate(const qb_config* cfg, qb_record** out) {
  return guarded([&] {
    require(cfg, "qb_simulate");
    require(out, "qb_simulate");
    auto rec = std::make_unique<qb_record>();
    rec->record = qbat::run_charging(cfg->parsed.model, cfg->parsed.initial, cfg->parsed.run);
    rec->figures = qbat::select_tau(rec->record);
    *out = rec.release();
  });
}

void qb_record_free(qb_record* rec) { delete rec; }

size_t qb_record_size(const qb_record* rec) { return rec ? rec->record.size() : 0; }

qb_status qb_record_series(const qb_record* rec, const char* name, double* out, size_t n) {
  return guarded([&] {
    require(rec, "qb_record_series");
    require(name, "qb_record_series");
    require(out, "qb_record_series");
    const qbat::ChargeRecord& r = rec->record;
    const std::string key = name;
    const std::vector<double>* v = nullptr;
    if (key == "t") v = &r.t;
    else if (key == "e_b") v = &r.e_battery;
    else if (key == "ergotropy") v = &r.ergotropy;
    else if (key == "h_interaction") v = &r.h_interaction;
    else if (key == "photons") v = &r.photons;
    else if (key == "n_ex") v = &r.n_excitations;
    else if (key == "trace_error") v = &r.trace_error;
    else if (key == "truncation_tail") v = &r.truncation_tail;
    else throw qbat::ConfigError("qb_record_series: unknown series '" + key + "'");
    std::memcpy(out, v->data(), std::min(n, v->size()) * sizeof(double));
  });
}

qb_status qb_record_figures(const qb_record* rec, qb_figures* out) {
  return guarded([&] {
    require(rec, "qb_record_figures");
    require(out, "qb_record_figures");
    const qbat::FiguresOfMerit& f = rec->figures;
    *out = qb_figures{f.tau,  f.ergotropy_at_tau, f.e_b_at_tau, f.locked_at_tau,   f.quench_off_at_tau,
                      f.tau2, f.p_max,            f.max_e_b,    f.first_peak_tau, f.window_limited ? 1 : 0};
  });
}

qb_status qb_record_write_csv(const qb_record* rec, const char* path) {
  const qb_status s = guarded([&] {
    require(rec, "qb_record_write_csv");
    require(path, "qb_record_write_csv");
    qbat::write_text_file(path, qbat::trajectory_csv(rec->record));
  });
  return s == QB_ERR_CONFIG && g_last_error.rfind("output:", 0) == 0 ? QB_ERR_IO : s;
}

qb_status qb_sweep(const qb_config* cfg, const char* out_dir, int threads, int* failed_rows) {
  const qb_status s = guarded([&] {
    require(cfg, "qb_sweep");
    require(out_dir, "qb_sweep");
    const qbat::SweepSpec& spec = cfg->parsed.sweep;
    const qbat::SweepResult result = qbat::run_sweep(spec, threads > 0 ? threads : cfg->parsed.threads);
    const std::string dir = out_dir;
    qbat::write_text_file(dir + "/sweep.csv", qbat::sweep_csv(result));
    if (result.fit) qbat::write_text_file(dir + "/sweep_fit.csv", qbat::fit_csv(spec, *result.fit));
    if (failed_rows) *failed_rows = static_cast<int>(result.failures());
    if (result.failures() > 0) {
      for (const auto& row : result.rows) {
        if (!row.ok) throw qbat::NumericalError(std::to_string(result.failures()) + " row(s) failed; first: " + row.error);
      }
    }
  });
  return s == QB_ERR_CONFIG && g_last_error.rfind("output:", 0) == 0 ? QB_ERR_IO : s;
}

qb_status qb_steady_state(const qb_config* cfg, qb_steady_result* out) {
  return guarded([&] {
    require(cfg, "qb_steady_state");
    require(out, "qb_steady_state");
    const qbat::LindbladSpec spec = qbat::build_spec(cfg->parsed.model, cfg->parsed.run.backend);
    const qbat::SteadyStateResult res = qbat::steady_state(spec, cfg->parsed.steady);
    const qbat::DensityState& st = res.state;
    qbat::DenseMat vac = qbat::DenseMat::Zero(st.rho.rows(), st.rho.cols());
    vac(0, 0) = 1.0;
    out->energy = st.expectation(spec.hamiltonian_static + spec.hamiltonian_switched).real();
    out->battery_energy = st.expectation(qbat::h_battery(spec.model, spec.space)).real();
    out->photons = st.expectation(qbat::boson_ops(spec.space).n).real();
    out->residual = res.residual;
    out->vacuum_distance = qbat::trace_distance(st.rho, vac);
  });
}

qb_status qb_run_checks(qb_line_sink sink, void* user, int* failures) {
  return guarded([&] {
    const int f = qbat::run_self_checks([&](const std::string& line) {
      if (sink) sink(line.c_str(), user);
    });
    if (failures) *failures = f;
    if (f > 0) throw qbat::NumericalError(std::to_string(f) + " self-check(s) failed");
  });
}

}  // extern "C"
