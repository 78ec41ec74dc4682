#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "leocx/constellation.hpp"
#include "leocx/link_budget.hpp"
#include "leocx/phased_array.hpp"

namespace leocx {

// Per-timestep knobs that do not change across the sweep.
struct SceneConfig {
  RadioConfig radio;
  ArraySpec sat_array;   // transmit array on every satellite, both networks
  ArraySpec user_array;  // receive array on both ground users
  double eps_min_deg = 35.0;
};

// A visible satellite frozen at the snapshot time. tx_power_dbw already
// includes the per-shell power control.
struct SceneSatellite {
  int id = 0;
  double altitude_km = 0.0;
  double tx_power_dbw = 0.0;
  Vec3 pos_m;
  Vec3 vel_m_s;
};

// Raw inputs for building a snapshot without a full constellation; the
// harness fills this from propagation, tests can fill it synthetically.
// primary must be visible from u and secondary from v, both sorted by id.
struct SceneInputs {
  double t_s = 0.0;
  Vec3 u_pos_m;
  Vec3 v_pos_m;
  std::vector<SceneSatellite> primary;
  std::vector<SceneSatellite> secondary;
  // Per-user noise figures; NaN falls back to the RadioConfig value.
  double noise_figure_u_db = std::numeric_limits<double>::quiet_NaN();
  double noise_figure_v_db = std::numeric_limits<double>::quiet_NaN();
};

// One timestep of the two-network scene with every pairwise metric the
// selection rules consume, cached in the linear domain. Index arguments
// are positions in the visible vectors (pi into primary, si into
// secondary); ids are only for reporting.
struct SceneSnapshot {
  double t_s = 0.0;
  Vec3 u_pos_m;
  Vec3 v_pos_m;
  std::vector<SceneSatellite> primary;    // visible set P of user u
  std::vector<SceneSatellite> secondary;  // visible set S of user v
  std::vector<LinkGeometry> geo_up;       // u -> P
  std::vector<LinkGeometry> geo_us;       // u -> S (interference geometry)
  std::vector<LinkGeometry> geo_vp;       // v -> P (interference geometry)
  std::vector<LinkGeometry> geo_vs;       // v -> S
  double noise_u_dbw = 0.0;
  double noise_v_dbw = 0.0;

  std::vector<double> snr_u_lin;  // SNR(u, p), size |P|
  std::vector<double> snr_v_lin;  // SNR(v, s), size |S|
  // INR(u, p; s): u served by p, interfered by s. Row-major [|P| x |S|].
  std::vector<double> inr_u_lin;
  // INR(v, s; p): v served by s, interfered by p. Row-major [|S| x |P|].
  std::vector<double> inr_v_lin;

  std::size_t p_count() const { return primary.size(); }
  std::size_t s_count() const { return secondary.size(); }

  double inr_u(std::size_t pi, std::size_t si) const {
    return inr_u_lin[pi * secondary.size() + si];
  }
  double inr_v(std::size_t si, std::size_t pi) const {
    return inr_v_lin[si * primary.size() + pi];
  }
  double sinr_u(std::size_t pi, std::size_t si) const {
    return snr_u_lin[pi] / (1.0 + inr_u(pi, si));
  }
  double sinr_v(std::size_t si, std::size_t pi) const {
    return snr_v_lin[si] / (1.0 + inr_v(si, pi));
  }
};

// Builds the snapshot from explicit inputs. Gains use matched-filter
// steering at the serving direction; interference gains reuse those same
// steered patterns evaluated toward the interfering satellite's direction
// (receive side) and toward the victim user (transmit side, which is the
// interferer's own serving beam since users are co-located or nearly so,
// evaluated exactly at the victim's direction).
SceneSnapshot make_scene(const SceneInputs& inputs, const SceneConfig& cfg);

// Propagates both constellations to t_s, filters visibility, applies the
// per-shell transmit powers and delegates to make_scene.
SceneSnapshot make_scene(const Constellation& primary,
                         const Constellation& secondary, const GroundUser& u,
                         const GroundUser& v, double t_s,
                         const SceneConfig& cfg);

}  // namespace leocx
