#pragma once

#include <string>
#include <vector>

#include "qbattery/protocol.hpp"

namespace qbat {

/// Named noise sets (kappa, gamma_down, gamma_phi) in units of omega0.
struct NoiseRates {
  double kappa = 0.0;
  double gamma_down = 0.0;
  double gamma_phi = 0.0;
};

/// noiseless, kappa, kappa-decay, full-noise. Case, spaces and underscores
/// are normalized, so "full noise" is accepted.
NoiseRates noise_preset(const std::string& name);
std::string normalize_preset_name(const std::string& name);
const std::vector<std::string>& noise_preset_names();

enum class SweepAxis { N, Detuning, M, G, Preset };
std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(const std::string& s);

struct SweepSpec {
  ModelConfig base;
  SweepAxis axis = SweepAxis::N;
  std::vector<double> values;             ///< numeric axes
  std::vector<std::string> preset_values;  ///< Preset axis
  InitialState initial;                    ///< mean < 0 follows the row's N
  RunOptions run;

  std::size_t size() const { return axis == SweepAxis::Preset ? preset_values.size() : values.size(); }
  void validate() const;
};

/// Everything a config file can hold.
struct SimulationConfig {
  ModelConfig model;
  InitialState initial;
  RunOptions run;
  SteadyStateOptions steady;
  SweepSpec sweep;  ///< base/initial/run mirror the fields above
  int threads = 0;  ///< 0: QB_THREADS or hardware concurrency
};

/// JSON text with sections model, initial, run, steady_state, sweep and
/// threads. Unknown keys are rejected by name.
SimulationConfig parse_config_text(const std::string& text);
SimulationConfig load_config_file(const std::string& path);

/// Returns `text` with dotted `key` (e.g. model.kappa) set to `value`,
/// which is read as JSON when possible and as a string otherwise. A JSON
/// null removes the key.
std::string set_config_value(const std::string& text, const std::string& key, const std::string& value);

/// "2..5", "0.5..1.5:0.25" or a comma list.
std::vector<double> parse_value_list(const std::string& text);

}  // namespace qbat
