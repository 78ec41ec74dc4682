#include "leocx/link_budget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace leocx {

namespace {

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) {
    throw std::invalid_argument(std::string("RadioConfig.") + field + ": " + why);
  }
}

}  // namespace

void validate(const RadioConfig& cfg) {
  require(cfg.carrier_hz > 0.0, "carrier_hz", "must be positive");
  require(cfg.bandwidth_hz > 0.0, "bandwidth_hz", "must be positive");
  require(std::isfinite(cfg.eirp_density_primary_dbw_hz),
          "eirp_density_primary_dbw_hz", "must be finite");
  require(std::isfinite(cfg.eirp_density_secondary_dbw_hz),
          "eirp_density_secondary_dbw_hz", "must be finite");
  require(std::isfinite(cfg.noise_psd_dbm_hz), "noise_psd_dbm_hz",
          "must be finite");
  require(std::isfinite(cfg.noise_figure_db) && cfg.noise_figure_db >= 0.0,
          "noise_figure_db", "must be finite and non-negative");
  require(cfg.power_control_limit_db >= 0.0, "power_control_limit_db",
          "must be non-negative");
}

ProtectionThreshold ProtectionThreshold::unconstrained() {
  return {std::numeric_limits<double>::infinity()};
}

bool ProtectionThreshold::is_unconstrained() const {
  return std::isinf(inr_th_db) && inr_th_db > 0.0;
}

double ProtectionThreshold::linear() const { return to_linear(inr_th_db); }

double to_db(double linear) { return 10.0 * std::log10(linear); }

double to_linear(double db) { return std::pow(10.0, db / 10.0); }

double clamp_db_for_serialization(double db) {
  if (std::isnan(db)) return kDbSerializationFloorDb;
  return std::max(db, kDbSerializationFloorDb);
}

double fspl_db(double range_m, double carrier_hz) {
  if (!(range_m > 0.0)) {
    throw std::invalid_argument("fspl_db: range_m must be positive");
  }
  if (!(carrier_hz > 0.0)) {
    throw std::invalid_argument("fspl_db: carrier_hz must be positive");
  }
  return 20.0 * std::log10(4.0 * kPi * range_m * carrier_hz / kSpeedOfLightMS);
}

double noise_power_dbw(const RadioConfig& cfg, double noise_figure_db) {
  // dBm/Hz -> dBW/Hz costs 30 dB.
  return (cfg.noise_psd_dbm_hz - 30.0) + 10.0 * std::log10(cfg.bandwidth_hz) +
         noise_figure_db;
}

double noise_power_dbw(const RadioConfig& cfg) {
  return noise_power_dbw(cfg, cfg.noise_figure_db);
}

double power_control_db(const RadioConfig& cfg, double shell_altitude_km,
                        double reference_altitude_km) {
  if (!(shell_altitude_km > 0.0) || !(reference_altitude_km > 0.0)) {
    throw std::invalid_argument("power_control_db: altitudes must be positive");
  }
  // Zenith range equals the altitude, so the fspl difference collapses to
  // a ratio of altitudes.
  double delta = 20.0 * std::log10(shell_altitude_km / reference_altitude_km);
  return std::clamp(delta, -cfg.power_control_limit_db,
                    cfg.power_control_limit_db);
}

double tx_power_dbw(const RadioConfig& cfg, SystemRole role,
                    double shell_altitude_km, double reference_altitude_km,
                    double sat_peak_gain_dbi) {
  return cfg.eirp_density_dbw_hz(role) + 10.0 * std::log10(cfg.bandwidth_hz) -
         sat_peak_gain_dbi +
         power_control_db(cfg, shell_altitude_km, reference_altitude_km);
}

double received_power_dbw(double tx_power_dbw, double tx_gain_dbi,
                          double rx_gain_dbi, double path_loss_db) {
  return tx_power_dbw + tx_gain_dbi + rx_gain_dbi - path_loss_db;
}

double snr_db(double tx_power_dbw, double tx_gain_dbi, double rx_gain_dbi,
              double path_loss_db, double noise_dbw) {
  return received_power_dbw(tx_power_dbw, tx_gain_dbi, rx_gain_dbi,
                            path_loss_db) -
         noise_dbw;
}

double inr_db(double tx_power_dbw, double tx_gain_dbi, double rx_gain_dbi,
              double path_loss_db, double noise_dbw) {
  // Same budget as snr_db with the interfering link's gains and loss.
  return snr_db(tx_power_dbw, tx_gain_dbi, rx_gain_dbi, path_loss_db,
                noise_dbw);
}

double sinr_db(double snr_db, double inr_db) {
  if (std::isinf(inr_db) && inr_db < 0.0) return snr_db;
  return snr_db - 10.0 * std::log10(1.0 + to_linear(inr_db));
}

double spectral_efficiency_loss(double snr_db, double inr_db) {
  double snr = to_linear(snr_db);
  double sinr = to_linear(sinr_db(snr_db, inr_db));
  // log2(1+x) as log1p keeps precision when both rates are small.
  return 1.0 - std::log1p(sinr) / std::log1p(snr);
}

double inr_threshold_from_delta_t(double delta_t_fraction) {
  if (!(delta_t_fraction > 0.0) || !(delta_t_fraction < 1.0)) {
    throw std::invalid_argument(
        "inr_threshold_from_delta_t: fraction must be in (0, 1)");
  }
  return 10.0 * std::log10(delta_t_fraction);
}

}  // namespace leocx
