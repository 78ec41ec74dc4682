#include "leocx/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace leocx {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument(field + ": " + why);
}

}  // namespace

int ConstellationSpec::satellite_count() const {
  int n = 0;
  for (const auto& shell : shells) n += shell.satellite_count();
  return n;
}

void validate(const ShellSpec& shell) {
  require(shell.altitude_km > 0.0, "ShellSpec.altitude_km", "must be positive");
  require(shell.inclination_deg > 0.0 && shell.inclination_deg <= 180.0,
          "ShellSpec.inclination_deg", "must be in (0, 180]");
  require(shell.num_planes >= 1, "ShellSpec.num_planes", "must be >= 1");
  require(shell.sats_per_plane >= 1, "ShellSpec.sats_per_plane",
          "must be >= 1");
}

void validate(const ConstellationSpec& spec) {
  require(!spec.shells.empty(), "ConstellationSpec.shells",
          "must not be empty");
  require(spec.seed_phasing >= 0, "ConstellationSpec.seed_phasing",
          "must be >= 0");
  for (const auto& shell : spec.shells) validate(shell);
}

std::vector<SatelliteState> build_constellation(const ConstellationSpec& spec) {
  validate(spec);
  std::vector<SatelliteState> sats;
  sats.reserve(spec.satellite_count());
  int id = 0;
  for (std::size_t shell_idx = 0; shell_idx < spec.shells.size(); ++shell_idx) {
    const ShellSpec& shell = spec.shells[shell_idx];
    double a = kEarthRadiusM + shell.altitude_km * 1000.0;
    double mean_motion = std::sqrt(kEarthMuM3S2 / (a * a * a));
    double incl = shell.inclination_deg * kRadPerDeg;
    int planes = shell.num_planes;
    int per_plane = shell.sats_per_plane;
    // Walker phasing: adjacent planes advance in anomaly by F * 360 / T
    // degrees, T the shell's total satellite count.
    double phasing_deg =
        static_cast<double>(spec.seed_phasing) * 360.0 /
        static_cast<double>(planes * per_plane);
    for (int p = 0; p < planes; ++p) {
      double raan_deg =
          spec.raan_offset_deg + 360.0 * static_cast<double>(p) / planes;
      for (int s = 0; s < per_plane; ++s) {
        double phase_deg = spec.anomaly_offset_deg +
                           360.0 * static_cast<double>(s) / per_plane +
                           phasing_deg * static_cast<double>(p);
        SatelliteState sat;
        sat.id = id++;
        sat.shell_index = static_cast<int>(shell_idx);
        sat.altitude_km = shell.altitude_km;
        sat.semi_major_axis_m = a;
        sat.inclination_rad = incl;
        sat.raan_rad = raan_deg * kRadPerDeg;
        sat.phase_rad = phase_deg * kRadPerDeg;
        sat.mean_motion_rad_s = mean_motion;
        sats.push_back(sat);
      }
    }
  }
  return sats;
}

EcefState propagate_ecef_state(const SatelliteState& sat, double t_s) {
  // Orbital-plane basis: p points at the ascending node, q 90 deg ahead
  // in the direction of motion. Equivalent to Rz(raan) * Rx(incl) applied
  // to the in-plane unit vectors.
  double cos_raan = std::cos(sat.raan_rad);
  double sin_raan = std::sin(sat.raan_rad);
  double cos_i = std::cos(sat.inclination_rad);
  double sin_i = std::sin(sat.inclination_rad);
  Vec3 p{cos_raan, sin_raan, 0.0};
  Vec3 q{-sin_raan * cos_i, cos_raan * cos_i, sin_i};

  double alpha = sat.phase_rad + sat.mean_motion_rad_s * t_s;
  double cos_a = std::cos(alpha);
  double sin_a = std::sin(alpha);
  Vec3 r_eci = sat.semi_major_axis_m * (cos_a * p + sin_a * q);
  Vec3 v_eci = sat.semi_major_axis_m * sat.mean_motion_rad_s *
               (cos_a * q - sin_a * p);

  // Earth-fixed frame has rotated by theta since epoch; positions rotate
  // by -theta. The velocity keeps its inertial value, only re-expressed
  // in the rotated axes (it feeds the along-track array axis).
  double theta = kEarthRotationRadS * t_s;
  double c = std::cos(theta);
  double s = std::sin(theta);
  auto to_ecef = [c, s](const Vec3& v) {
    return Vec3{v.x * c + v.y * s, -v.x * s + v.y * c, v.z};
  };
  return {to_ecef(r_eci), to_ecef(v_eci)};
}

Vec3 propagate_ecef(const SatelliteState& sat, double t_s) {
  return propagate_ecef_state(sat, t_s).position_m;
}

Vec3 user_ecef(double lat_deg, double lon_deg) {
  double lat = lat_deg * kRadPerDeg;
  double lon = lon_deg * kRadPerDeg;
  return {kEarthRadiusM * std::cos(lat) * std::cos(lon),
          kEarthRadiusM * std::cos(lat) * std::sin(lon),
          kEarthRadiusM * std::sin(lat)};
}

Vec3 user_ecef(const GroundUser& user) {
  return user_ecef(user.lat_deg, user.lon_deg);
}

double elevation_deg(const Vec3& user_pos_m, const Vec3& sat_pos_m) {
  Vec3 d = sat_pos_m - user_pos_m;
  double range = d.norm();
  if (range == 0.0) {
    throw std::invalid_argument("elevation_deg: coincident positions");
  }
  double ru = user_pos_m.norm();
  if (ru == 0.0) {
    throw std::invalid_argument("elevation_deg: user at the Earth's center");
  }
  double sin_elev = d.dot(user_pos_m) / (range * ru);
  return std::asin(std::clamp(sin_elev, -1.0, 1.0)) * kDegPerRad;
}

std::vector<int> visible_set(const Vec3& user_pos_m,
                             const std::vector<Vec3>& sat_pos_m,
                             double eps_min_deg) {
  if (eps_min_deg < 0.0 || eps_min_deg >= 90.0) {
    throw std::invalid_argument("visible_set: eps_min_deg must be in [0, 90)");
  }
  // Compare sines instead of calling asin per satellite; same ordering.
  double sin_min = std::sin(eps_min_deg * kRadPerDeg);
  Vec3 up = user_pos_m.normalized();
  std::vector<int> idx;
  for (std::size_t i = 0; i < sat_pos_m.size(); ++i) {
    Vec3 d = sat_pos_m[i] - user_pos_m;
    if (d.dot(up) >= sin_min * d.norm()) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

std::vector<int> visible_set(const Vec3& user_pos_m,
                             const std::vector<SatelliteState>& sats,
                             double t_s, double eps_min_deg) {
  std::vector<Vec3> pos;
  pos.reserve(sats.size());
  for (const auto& sat : sats) pos.push_back(propagate_ecef(sat, t_s));
  return visible_set(user_pos_m, pos, eps_min_deg);
}

Constellation Constellation::build(const ConstellationSpec& spec) {
  Constellation c;
  c.spec = spec;
  c.sats = build_constellation(spec);
  double ref = spec.shells.front().altitude_km;
  for (const auto& shell : spec.shells) ref = std::min(ref, shell.altitude_km);
  c.reference_altitude_km = ref;
  return c;
}

}  // namespace leocx
