#pragma once

#include <cstddef>

namespace drought::net {

// First-order radio model plus sensing and idle draw.
struct EnergyParams {
  double e_elec_nj_per_bit = 50.0;
  double e_amp_pj_per_bit_km2 = 100.0;
  double e_sense_uj = 20.0;
  double p_idle_uw = 30.0;

  void validate() const;
};

struct EnergyLedger {
  double tx_mj = 0.0;
  double rx_mj = 0.0;
  double idle_mj = 0.0;
  double sensing_mj = 0.0;

  double total_mj() const { return tx_mj + rx_mj + idle_mj + sensing_mj; }

  void charge_tx(const EnergyParams& p, std::size_t bytes, double distance_km);
  void charge_rx(const EnergyParams& p, std::size_t bytes);
  void charge_idle(const EnergyParams& p, double seconds);
  void charge_sense(const EnergyParams& p);
};

double tx_cost_mj(const EnergyParams& p, std::size_t bytes, double distance_km);
double rx_cost_mj(const EnergyParams& p, std::size_t bytes);

}  // namespace drought::net
