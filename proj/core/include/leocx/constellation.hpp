#pragma once

#include <string>
#include <vector>

#include "leocx/phased_array.hpp"
#include "leocx/types.hpp"
#include "leocx/vec3.hpp"

namespace leocx {

// One Walker-Delta shell: num_planes evenly spaced in RAAN over 360 deg,
// sats_per_plane evenly spaced in anomaly within each plane.
struct ShellSpec {
  double altitude_km = 0.0;
  double inclination_deg = 0.0;
  int num_planes = 0;
  int sats_per_plane = 0;

  int satellite_count() const { return num_planes * sats_per_plane; }
};

struct ConstellationSpec {
  std::string name;
  SystemRole role = SystemRole::primary;
  std::vector<ShellSpec> shells;
  // Walker phasing factor F: adjacent planes are offset in anomaly by
  // F * 360 / (P*Q) degrees. Acts like a deterministic seed for the
  // relative in-plane geometry.
  int seed_phasing = 1;
  // Epoch orientation of the whole constellation, applied to every shell.
  // Defaults keep plane 0 at RAAN 0 with its first satellite at the
  // ascending node.
  double raan_offset_deg = 0.0;
  double anomaly_offset_deg = 0.0;

  int satellite_count() const;
};

// Throw std::invalid_argument naming the offending field.
void validate(const ShellSpec& shell);
void validate(const ConstellationSpec& spec);

// Epoch state of one satellite on a circular orbit. Propagation needs only
// the plane orientation, the in-plane phase at t=0 and the mean motion.
struct SatelliteState {
  int id = 0;           // unique within its constellation, dense from 0
  int shell_index = 0;  // into ConstellationSpec::shells
  double altitude_km = 0.0;
  double semi_major_axis_m = 0.0;
  double inclination_rad = 0.0;
  double raan_rad = 0.0;
  double phase_rad = 0.0;  // anomaly from the ascending node at t=0
  double mean_motion_rad_s = 0.0;
};

struct GroundUser {
  std::string name;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  ArraySpec array;
  double noise_figure_db = 1.2;
};

// Everything selection needs about one link, with the unit direction
// expressed in both endpoint array frames.
struct LinkGeometry {
  double range_m = 0.0;
  double elevation_deg = 0.0;
  Vec3 dir_user_frame;  // user -> satellite, in the user array frame
  Vec3 dir_sat_frame;   // satellite -> user, in the satellite array frame
};

// Satellite ids are assigned in (shell, plane, slot) order, matching the
// order of the returned vector. seed_phasing in the spec is used as the
// Walker F factor.
std::vector<SatelliteState> build_constellation(const ConstellationSpec& spec);

// Earth-fixed position at t seconds after epoch: the circular orbit is
// advanced by mean motion in the inertial frame, then rotated by the
// sidereal angle accumulated since t=0.
Vec3 propagate_ecef(const SatelliteState& sat, double t_s);

// Also exposes the inertial velocity (expressed in Earth-fixed axes),
// which defines the along-track axis of the satellite's array frame.
struct EcefState {
  Vec3 position_m;
  Vec3 velocity_m_s;
};
EcefState propagate_ecef_state(const SatelliteState& sat, double t_s);

// Users sit on the spherical Earth surface and rotate with it, so their
// Earth-fixed position is time independent.
Vec3 user_ecef(double lat_deg, double lon_deg);
Vec3 user_ecef(const GroundUser& user);

// Elevation of the satellite above the user's local horizon, in degrees.
// Negative below the horizon. Coincident positions throw.
double elevation_deg(const Vec3& user_pos_m, const Vec3& sat_pos_m);

// Indices (not ids) of satellites at or above eps_min_deg of elevation.
std::vector<int> visible_set(const Vec3& user_pos_m,
                             const std::vector<SatelliteState>& sats,
                             double t_s, double eps_min_deg);
std::vector<int> visible_set(const Vec3& user_pos_m,
                             const std::vector<Vec3>& sat_pos_m,
                             double eps_min_deg);

// A built constellation bundled with the data the link budget needs: the
// reference (lowest) altitude anchors per-shell power control.
struct Constellation {
  ConstellationSpec spec;
  std::vector<SatelliteState> sats;
  double reference_altitude_km = 0.0;

  static Constellation build(const ConstellationSpec& spec);
};

}  // namespace leocx
