#pragma once

#include <span>
#include <vector>

#include "qbattery/models.hpp"

namespace qbat {

/// Passive rearrangement: eigenvalues of rho_b in descending order placed on
/// the eigenvectors of h_b in ascending energy. Ties are broken by index.
DenseMat passive_state(const DenseMat& rho_b, const DenseMat& h_b);

/// Tr[h rho_passive] from a spectrum of rho and ascending energy levels.
/// Missing populations (levels beyond the spectrum) count as zero.
double passive_energy(std::span<const double> populations, std::span<const double> energies_ascending);
double passive_energy(const DenseMat& rho_b, const DenseMat& h_b);

/// Tr[h rho] - Tr[h rho_passive], clamped at zero.
double ergotropy(const DenseMat& rho_b, const DenseMat& h_b);

/// Spectrum of rho_b after clamping small negative eigenvalues (>= -1e-7)
/// and restoring the original trace. Larger violations throw.
Eigen::VectorXd clamped_spectrum(const DenseMat& rho_b);

/// E_B and ergotropy of reduced battery states over either backend. The
/// passive energy always uses the 2^N spectrum of H_B, so a collective-basis
/// state is treated as embedded in the full qubit space.
class BatteryEnergetics {
 public:
  BatteryEnergetics(const SpaceDescriptor& space, double omega0);

  struct Values {
    double e_battery = 0.0;
    double ergotropy = 0.0;
    double locked() const { return e_battery - ergotropy; }
  };
  Values evaluate(const DenseMat& rho_b) const;

  const std::vector<double>& levels() const { return levels_; }

 private:
  Eigen::VectorXd diag_energy_;
  std::vector<double> levels_;
};

struct EnergyReport {
  double time = 0.0;
  double e_battery = 0.0;
  double ergotropy = 0.0;
  double locked = 0.0;
  double quench_on_cost = 0.0;
  double quench_off_cost = 0.0;
};

enum class Quench { On, Off };

/// Mean energy exchanged at an instantaneous switch: Tr[rho H_I] when
/// turning on, -Tr[rho H_I] when turning off.
double quench_cost(const LindbladSpec& spec, const DenseMat& rho, Quench when);

struct Peak {
  double t = 0.0;
  double value = 0.0;
};

/// Parabola through samples k-1, k, k+1 (nonuniform grid). Falls back to the
/// sample itself at the ends or without negative curvature.
Peak quadratic_peak(std::span<const double> t, std::span<const double> y, std::size_t k);

/// Value at `at` of the parabola through samples k-1, k, k+1.
double quadratic_value(std::span<const double> t, std::span<const double> y, std::size_t k, double at);

/// E_B(t)/t by linear interpolation of the record; t must be > 0 and inside.
double mean_power(std::span<const double> t, std::span<const double> e_b, double at);

/// Maximum of E_B(t)/t over samples with t > 0, refined quadratically.
/// Throws ConfigError on an empty or identically zero record.
Peak max_mean_power(std::span<const double> t, std::span<const double> e_b);

}  // namespace qbat
