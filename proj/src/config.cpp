#include "qbattery/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qbattery/error.hpp"

namespace qbat {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section, const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError((section.empty() ? "" : section + ".") + it.key() + ": unknown key");
    }
  }
}

double number(const json& obj, const std::string& section, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(section + "." + key + ": expected a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& section, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number() || v.get<double>() != std::floor(v.get<double>()) || std::abs(v.get<double>()) > 1e9) {
    throw ConfigError(section + "." + key + ": expected an integer");
  }
  return static_cast<int>(v.get<double>());
}

std::string text(const json& obj, const std::string& section, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(section + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool flag(const json& obj, const std::string& section, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(section + "." + key + ": expected true or false");
  return v.get<bool>();
}

void parse_model(const json& m, ModelConfig& cfg) {
  if (!m.is_object()) throw ConfigError("model: expected an object");
  reject_unknown(m, "model",
                 {"n_qubits", "omega0", "omega_c", "g", "g_over_gc", "interaction", "scaling", "kappa", "gamma_down",
                  "gamma_phi", "noise", "cavity_dim", "lambda_schedule"});
  const std::string s = "model";
  if (m.contains("n_qubits")) cfg.n_qubits = integer(m, s, "n_qubits");
  if (m.contains("omega0")) cfg.omega0 = number(m, s, "omega0");
  if (m.contains("omega_c")) cfg.omega_c = number(m, s, "omega_c");
  if (m.contains("interaction")) cfg.interaction = parse_interaction(text(m, s, "interaction"));
  if (m.contains("scaling")) cfg.scaling = parse_scaling(text(m, s, "scaling"));
  if (m.contains("noise")) {
    const NoiseRates r = noise_preset(text(m, s, "noise"));
    cfg.kappa = r.kappa;
    cfg.gamma_down = r.gamma_down;
    cfg.gamma_phi = r.gamma_phi;
  }
  if (m.contains("kappa")) cfg.kappa = number(m, s, "kappa");
  if (m.contains("gamma_down")) cfg.gamma_down = number(m, s, "gamma_down");
  if (m.contains("gamma_phi")) cfg.gamma_phi = number(m, s, "gamma_phi");
  if (m.contains("cavity_dim")) cfg.cavity_dim = integer(m, s, "cavity_dim");
  if (m.contains("g") && m.contains("g_over_gc")) throw ConfigError("model.g_over_gc: give either g or g_over_gc");
  if (m.contains("g")) cfg.g = number(m, s, "g");
  if (m.contains("g_over_gc")) {
    const double ratio = number(m, s, "g_over_gc");
    if (!(ratio >= 0.0)) throw ConfigError("model.g_over_gc: must be >= 0");
    cfg.g = ratio * critical_coupling(cfg.interaction, cfg.omega0, cfg.omega_c);
  }
  if (m.contains("lambda_schedule")) {
    const json& l = m.at("lambda_schedule");
    if (!l.is_object()) throw ConfigError("model.lambda_schedule: expected an object");
    reject_unknown(l, "model.lambda_schedule", {"switch_times", "values"});
    LambdaSchedule sched;
    try {
      sched.switch_times = l.at("switch_times").get<std::vector<double>>();
      sched.values = l.at("values").get<std::vector<int>>();
    } catch (const json::exception&) {
      throw ConfigError("model.lambda_schedule: needs numeric arrays switch_times and values");
    }
    cfg.lambda_schedule = sched;
  }
  cfg.validate();
}

InitialState parse_initial_json(const json& v) {
  if (v.is_string()) return parse_initial(v.get<std::string>());
  if (!v.is_object()) throw ConfigError("initial: expected a label or an object");
  reject_unknown(v, "initial", {"kind", "alpha", "mean_photons", "m"});
  const std::string kind = v.contains("kind") ? text(v, "initial", "kind") : "coherent";
  InitialState st = parse_initial(kind);
  if (v.contains("alpha")) st.mean_photons = std::pow(number(v, "initial", "alpha"), 2);
  if (v.contains("mean_photons")) st.mean_photons = number(v, "initial", "mean_photons");
  if (v.contains("m")) st.mean_photons = integer(v, "initial", "m");
  if (st.kind != InitialKind::InteractingGround && v.contains("mean_photons") && !(st.mean_photons >= 0.0)) {
    throw ConfigError("initial.mean_photons: must be >= 0");
  }
  return st;
}

void parse_run(const json& r, RunOptions& run) {
  if (!r.is_object()) throw ConfigError("run: expected an object");
  reject_unknown(r, "run",
                 {"t_max", "samples", "extend", "max_extensions", "cavity_retries", "backend", "rtol", "atol",
                  "max_step", "truncation_threshold"});
  const std::string s = "run";
  if (r.contains("t_max")) run.t_max = number(r, s, "t_max");
  if (r.contains("samples")) run.samples = integer(r, s, "samples");
  if (r.contains("extend")) run.extend = flag(r, s, "extend");
  if (r.contains("max_extensions")) run.max_extensions = integer(r, s, "max_extensions");
  if (r.contains("cavity_retries")) run.cavity_retries = integer(r, s, "cavity_retries");
  if (r.contains("backend")) run.backend = parse_backend(text(r, s, "backend"));
  if (r.contains("rtol")) run.integrator.rtol = number(r, s, "rtol");
  if (r.contains("atol")) run.integrator.atol = number(r, s, "atol");
  if (r.contains("max_step")) run.integrator.max_step = number(r, s, "max_step");
  if (r.contains("truncation_threshold")) run.integrator.truncation_threshold = number(r, s, "truncation_threshold");
  if (run.t_max < 0.0) throw ConfigError("run.t_max: must be >= 0");
  if (run.samples < 2) throw ConfigError("run.samples: must be >= 2");
  if (!(run.integrator.rtol > 0.0)) throw ConfigError("run.rtol: must be > 0");
  if (!(run.integrator.atol > 0.0)) throw ConfigError("run.atol: must be > 0");
}

void parse_steady(const json& st, SteadyStateOptions& opt) {
  if (!st.is_object()) throw ConfigError("steady_state: expected an object");
  reject_unknown(st, "steady_state", {"method", "max_time", "residual_tolerance", "convergence_tolerance"});
  const std::string s = "steady_state";
  if (st.contains("method")) opt.method = parse_steady_state_method(text(st, s, "method"));
  if (st.contains("max_time")) opt.max_time = number(st, s, "max_time");
  if (st.contains("residual_tolerance")) opt.residual_tolerance = number(st, s, "residual_tolerance");
  if (st.contains("convergence_tolerance")) opt.convergence_tolerance = number(st, s, "convergence_tolerance");
}

void parse_sweep(const json& sw, SweepSpec& spec) {
  if (!sw.is_object()) throw ConfigError("sweep: expected an object");
  reject_unknown(sw, "sweep", {"axis", "values"});
  if (sw.contains("axis")) spec.axis = parse_sweep_axis(text(sw, "sweep", "axis"));
  if (!sw.contains("values")) return;
  const json& v = sw.at("values");
  if (v.is_string()) {
    if (spec.axis == SweepAxis::Preset) {
      std::stringstream ss(v.get<std::string>());
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) spec.preset_values.push_back(item);
      }
    } else {
      spec.values = parse_value_list(v.get<std::string>());
    }
    return;
  }
  if (v.is_number() && spec.axis != SweepAxis::Preset) {
    spec.values = {v.get<double>()};
    return;
  }
  if (!v.is_array()) throw ConfigError("sweep.values: expected an array or a range string");
  for (const json& x : v) {
    if (spec.axis == SweepAxis::Preset) {
      if (!x.is_string()) throw ConfigError("sweep.values: preset axis expects names");
      spec.preset_values.push_back(x.get<std::string>());
    } else {
      if (!x.is_number()) throw ConfigError("sweep.values: expected numbers");
      spec.values.push_back(x.get<double>());
    }
  }
}

}  // namespace

std::string normalize_preset_name(const std::string& name) {
  const auto first = name.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = name.find_last_not_of(" \t");
  std::string out;
  for (char c : name.substr(first, last - first + 1)) {
    if (c == ' ' || c == '_') {
      out += '-';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

const std::vector<std::string>& noise_preset_names() {
  static const std::vector<std::string> names{"noiseless", "kappa", "kappa-decay", "full-noise"};
  return names;
}

NoiseRates noise_preset(const std::string& name) {
  const std::string n = normalize_preset_name(name);
  if (n == "noiseless") return {0.0, 0.0, 0.0};
  if (n == "kappa") return {0.15, 0.0, 0.0};
  if (n == "kappa-decay") return {0.15, 0.1, 0.0};
  if (n == "full-noise") return {0.15, 0.1, 0.1};
  throw ConfigError("noise preset: unknown name '" + name + "' (expected noiseless, kappa, kappa-decay, full-noise)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::N:
      return "N";
    case SweepAxis::Detuning:
      return "detuning";
    case SweepAxis::M:
      return "m";
    case SweepAxis::G:
      return "g";
    case SweepAxis::Preset:
      return "preset";
  }
  return "N";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "N" || s == "n") return SweepAxis::N;
  if (s == "detuning") return SweepAxis::Detuning;
  if (s == "m") return SweepAxis::M;
  if (s == "g") return SweepAxis::G;
  if (s == "preset" || s == "noise") return SweepAxis::Preset;
  throw ConfigError("sweep.axis: unknown axis '" + s + "' (expected N, detuning, m, g or preset)");
}

void SweepSpec::validate() const {
  base.validate();
  if (size() == 0) throw ConfigError("sweep.values: must be nonempty");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sweep.values: non-finite value");
    switch (axis) {
      case SweepAxis::N:
        if (v < 1 || v != std::floor(v)) throw ConfigError("sweep.values: N values must be integers >= 1");
        break;
      case SweepAxis::Detuning:
        if (!(v > 0.0)) throw ConfigError("sweep.values: detuning ratios must be > 0");
        break;
      case SweepAxis::M:
      case SweepAxis::G:
        if (v < 0.0) throw ConfigError("sweep.values: values must be >= 0");
        break;
      case SweepAxis::Preset:
        break;
    }
  }
  for (const auto& p : preset_values) noise_preset(p);
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  auto to_num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw ConfigError("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("values: cannot parse '" + s + "' in '" + text + "'");
    }
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::string lo = text.substr(0, dots);
    std::string hi = text.substr(dots + 2);
    double step = 1.0;
    const auto colon = hi.find(':');
    if (colon != std::string::npos) {
      step = to_num(hi.substr(colon + 1));
      hi = hi.substr(0, colon);
    }
    const double a = to_num(lo), b = to_num(hi);
    if (!(step > 0.0) || b < a) throw ConfigError("values: bad range '" + text + "'");
    const long count = std::lround(std::floor((b - a) / step + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(a + static_cast<double>(k) * step);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (!item.empty()) out.push_back(to_num(item));
  }
  if (out.empty()) throw ConfigError("values: empty list");
  return out;
}

SimulationConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(doc, "", {"model", "initial", "run", "steady_state", "sweep", "threads"});
  SimulationConfig cfg;
  try {
    if (doc.contains("model")) parse_model(doc.at("model"), cfg.model);
    cfg.model.validate();
    if (doc.contains("initial")) cfg.initial = parse_initial_json(doc.at("initial"));
    if (doc.contains("run")) parse_run(doc.at("run"), cfg.run);
    if (doc.contains("steady_state")) parse_steady(doc.at("steady_state"), cfg.steady);
    if (doc.contains("sweep")) parse_sweep(doc.at("sweep"), cfg.sweep);
    if (doc.contains("threads")) {
      cfg.threads = integer(doc, "config", "threads");
      if (cfg.threads < 0) throw ConfigError("threads: must be >= 0");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.sweep.base = cfg.model;
  cfg.sweep.initial = cfg.initial;
  cfg.sweep.run = cfg.run;
  return cfg;
}

SimulationConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string set_config_value(const std::string& text, const std::string& key, const std::string& value) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (key.empty()) throw ConfigError("config: empty key");
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError(key + ": '" + parts[i] + "' is not a section");
    node = &next;
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  if (parsed.is_null()) {
    node->erase(parts.back());
  } else {
    (*node)[parts.back()] = parsed;
  }
  return doc.dump();
}

}  // namespace qbat
