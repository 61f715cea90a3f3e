#include "drought/net/energy.hpp"

#include <cmath>

#include "drought/errors.hpp"

namespace drought::net {

void EnergyParams::validate() const {
  const bool ok = e_elec_nj_per_bit >= 0.0 && e_amp_pj_per_bit_km2 >= 0.0 && e_sense_uj >= 0.0 &&
                  p_idle_uw >= 0.0;
  if (!ok) throw ValidationError("energy constants must be >= 0");
}

double tx_cost_mj(const EnergyParams& p, std::size_t bytes, double distance_km) {
  const double bits = 8.0 * static_cast<double>(bytes);
  const double nj = p.e_elec_nj_per_bit * bits +
                    p.e_amp_pj_per_bit_km2 * 1e-3 * bits * distance_km * distance_km;
  return nj * 1e-6;
}

double rx_cost_mj(const EnergyParams& p, std::size_t bytes) {
  return p.e_elec_nj_per_bit * 8.0 * static_cast<double>(bytes) * 1e-6;
}

void EnergyLedger::charge_tx(const EnergyParams& p, std::size_t bytes, double distance_km) {
  tx_mj += tx_cost_mj(p, bytes, distance_km);
}

void EnergyLedger::charge_rx(const EnergyParams& p, std::size_t bytes) { rx_mj += rx_cost_mj(p, bytes); }

void EnergyLedger::charge_idle(const EnergyParams& p, double seconds) {
  idle_mj += p.p_idle_uw * 1e-3 * seconds;
}

void EnergyLedger::charge_sense(const EnergyParams& p) { sensing_mj += p.e_sense_uj * 1e-3; }

}  // namespace drought::net
