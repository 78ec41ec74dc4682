#pragma once

#include "leocx/types.hpp"

namespace leocx {

// Downlink radio parameters shared by every satellite of both networks.
// EIRP densities are regulatory-style caps in dBW/Hz; the per-satellite
// transmit power is backed out of the cap and the array's peak gain.
struct RadioConfig {
  double carrier_hz = 20.0e9;
  double bandwidth_hz = 400.0e6;
  double eirp_density_primary_dbw_hz = -54.3;
  double eirp_density_secondary_dbw_hz = -53.3;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 1.2;
  // Per-shell power control is clamped to +/- this bound, so shells far
  // above the reference altitude cannot compensate their extra path loss
  // beyond it.
  double power_control_limit_db = 1.0;

  double eirp_density_dbw_hz(SystemRole role) const {
    return role == SystemRole::primary ? eirp_density_primary_dbw_hz
                                       : eirp_density_secondary_dbw_hz;
  }
};

// Throws std::invalid_argument naming the offending field.
void validate(const RadioConfig& cfg);

// INR ceiling used by the protective selection rules. +inf disables the
// constraint (the greedy strategies).
struct ProtectionThreshold {
  double inr_th_db = 0.0;

  static ProtectionThreshold from_db(double db) { return {db}; }
  static ProtectionThreshold unconstrained();
  bool is_unconstrained() const;
  double linear() const;

  // Feasibility test of Eq-style "INR <= threshold", done in the linear
  // domain so -inf INR (zero interference) passes any finite threshold.
  bool admits_linear(double inr_linear) const { return inr_linear <= linear(); }
};

struct LinkMetrics {
  double received_signal_dbw = 0.0;
  double interference_dbw = 0.0;  // single-interferer term
  double noise_dbw = 0.0;
  double snr_db = 0.0;
  double inr_db = 0.0;
  double sinr_db = 0.0;
};

double to_db(double linear);  // 10*log10, maps 0 to -inf
double to_linear(double db);

// Serialized dB columns clamp -inf (zero gain paths) to this floor so CSV
// stays numeric; in-memory math keeps the true -inf.
inline constexpr double kDbSerializationFloorDb = -400.0;
double clamp_db_for_serialization(double db);

// Free-space path loss. range_m > 0, carrier_hz > 0.
double fspl_db(double range_m, double carrier_hz);

// Thermal noise over the full bandwidth referenced to the receiver input:
// noise PSD (dBm/Hz -> dBW/Hz) + 10log10(B) + noise figure.
double noise_power_dbw(const RadioConfig& cfg);
double noise_power_dbw(const RadioConfig& cfg, double noise_figure_db);

// Altitude compensation relative to the constellation's reference (lowest)
// shell: fspl(shell at zenith) - fspl(reference at zenith), clamped to the
// configured limit. Positive for shells above the reference.
double power_control_db(const RadioConfig& cfg, double shell_altitude_km,
                        double reference_altitude_km);

// Conducted transmit power so that peak-gain EIRP density meets the cap:
// EIRP density + 10log10(B) - peak array gain + power control.
double tx_power_dbw(const RadioConfig& cfg, SystemRole role,
                    double shell_altitude_km, double reference_altitude_km,
                    double sat_peak_gain_dbi);

// Straight-line budget composition; gains in dBi, loss in dB.
double received_power_dbw(double tx_power_dbw, double tx_gain_dbi,
                          double rx_gain_dbi, double path_loss_db);
double snr_db(double tx_power_dbw, double tx_gain_dbi, double rx_gain_dbi,
              double path_loss_db, double noise_dbw);
double inr_db(double tx_power_dbw, double tx_gain_dbi, double rx_gain_dbi,
              double path_loss_db, double noise_dbw);

// SINR from SNR and a single-interferer INR, all in dB:
// sinr = snr / (1 + inr) in the linear domain. -inf INR returns snr_db.
double sinr_db(double snr_db, double inr_db);

// Fractional spectral-efficiency loss 1 - log2(1+sinr)/log2(1+snr) caused
// by the interference level inr_db on a link that would otherwise run at
// snr_db. Zero when inr_db is -inf.
double spectral_efficiency_loss(double snr_db, double inr_db);

// Threshold that keeps the throughput loss at a given fraction for a link
// near 0 dB SNR: 10log10(delta_t). delta_t in (0, 1).
double inr_threshold_from_delta_t(double delta_t_fraction);

}  // namespace leocx
