#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qbattery/config.hpp"

namespace qbat {

struct SweepRow {
  ModelConfig config;
  InitialState initial;
  FiguresOfMerit figures;
  bool ok = true;
  bool numerical_failure = false;  ///< false with !ok means a config error
  std::string error;
};

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<PowerLawFit> fit;  ///< m axis only

  std::size_t failures() const;
};

/// Row configuration for value index i of the sweep.
std::pair<ModelConfig, InitialState> sweep_point(const SweepSpec& spec, std::size_t i);

/// Runs every row on `threads` workers (0 resolves through QB_THREADS, then
/// the hardware). Failed rows are reported and do not stop the others.
/// Rows come back in input order.
SweepResult run_sweep(const SweepSpec& spec, int threads = 0);

SweepResult sweep_vs_n(SweepSpec spec, int threads = 0);
SweepResult sweep_vs_detuning(SweepSpec spec, int threads = 0);
SweepResult sweep_vs_m(SweepSpec spec, int threads = 0);

/// Least squares on log y = log c + p log x over points with x, y > 0.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

int resolve_threads(int requested);

/// Fixed column order, %.17g numbers.
const std::vector<std::string>& sweep_csv_columns();
std::string sweep_csv(const SweepResult& result);
std::string fit_csv(const SweepSpec& spec, const PowerLawFit& fit);
std::string trajectory_csv(const ChargeRecord& record);
std::string format_number(double v);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace qbat
