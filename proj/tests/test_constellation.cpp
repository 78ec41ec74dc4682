#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "leocx/constellation.hpp"
#include "leocx/scenario.hpp"
#include "leocx/types.hpp"
#include "support/oracles.hpp"

using namespace leocx;

TEST_SUITE("constellation") {

TEST_CASE("default shell sets carry the published satellite counts") {
  ScenarioConfig cfg = default_config();
  CHECK(cfg.primary.satellite_count() == 4408);
  CHECK(cfg.secondary.satellite_count() == 3236);
  CHECK(cfg.primary.shells.size() == 5);
  CHECK(cfg.secondary.shells.size() == 3);
  CHECK(build_constellation(cfg.primary).size() == 4408);
  CHECK(build_constellation(cfg.secondary).size() == 3236);
  // Reference altitude for power control is the lowest shell.
  CHECK(Constellation::build(cfg.primary).reference_altitude_km == 540.0);
  CHECK(Constellation::build(cfg.secondary).reference_altitude_km == 590.0);
}

TEST_CASE("walker geometry: ids, planes, phasing") {
  ConstellationSpec spec;
  spec.name = "toy";
  spec.shells = {{550.0, 53.0, 6, 4}, {600.0, 97.0, 3, 5}};
  spec.seed_phasing = 2;
  auto sats = build_constellation(spec);
  REQUIRE(sats.size() == 39);

  // Ids dense and ordered shell -> plane -> slot.
  for (std::size_t i = 0; i < sats.size(); ++i) {
    CHECK(sats[i].id == static_cast<int>(i));
  }
  CHECK(sats[0].shell_index == 0);
  CHECK(sats[23].shell_index == 0);
  CHECK(sats[24].shell_index == 1);

  // Planes evenly spaced in RAAN over the full circle.
  CHECK(sats[4].raan_rad - sats[0].raan_rad ==
        doctest::Approx(kPi / 3.0).epsilon(1e-12));
  // Slots evenly spaced in anomaly within a plane.
  CHECK(sats[1].phase_rad - sats[0].phase_rad ==
        doctest::Approx(kPi / 2.0).epsilon(1e-12));
  // Adjacent planes offset in anomaly by F * 360 / (P*Q) = 2*360/24 = 30 deg.
  CHECK(sats[4].phase_rad - sats[0].phase_rad ==
        doctest::Approx(30.0 * kRadPerDeg).epsilon(1e-12));

  // Orbit constants per shell.
  CHECK(sats[0].semi_major_axis_m == kEarthRadiusM + 550.0e3);
  CHECK(sats[24].altitude_km == 600.0);
  CHECK(sats[0].inclination_rad == doctest::Approx(53.0 * kRadPerDeg));
  CHECK(sats[0].mean_motion_rad_s ==
        doctest::Approx(std::sqrt(kEarthMuM3S2 /
                                  std::pow(kEarthRadiusM + 550.0e3, 3)))
            .epsilon(1e-15));
}

TEST_CASE("epoch offsets shift every plane and slot together") {
  ConstellationSpec base;
  base.name = "toy";
  base.shells = {{550.0, 53.0, 4, 3}};
  ConstellationSpec shifted = base;
  shifted.raan_offset_deg = 12.5;
  shifted.anomaly_offset_deg = -7.0;
  auto a = build_constellation(base);
  auto b = build_constellation(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].raan_rad - a[i].raan_rad ==
          doctest::Approx(12.5 * kRadPerDeg).epsilon(1e-12));
    CHECK(b[i].phase_rad - a[i].phase_rad ==
          doctest::Approx(-7.0 * kRadPerDeg).epsilon(1e-12));
  }
}

TEST_CASE("orbital constants at 550 km") {
  double a = kEarthRadiusM + 550.0e3;
  double n = std::sqrt(kEarthMuM3S2 / (a * a * a));
  CHECK(n == doctest::Approx(0.0010965176180602308).epsilon(1e-15));
  CHECK(2.0 * kPi / n == doctest::Approx(5730.127089334606).epsilon(1e-13));
  // Sidereal day from the rotation rate constant.
  CHECK(2.0 * kPi / kEarthRotationRadS ==
        doctest::Approx(86164.09000273276).epsilon(1e-12));
}

TEST_CASE("propagation matches the explicit rotation-matrix composition") {
  ScenarioConfig cfg = default_config();
  auto sats = build_constellation(cfg.primary);
  std::mt19937 rng(4451);
  std::uniform_int_distribution<std::size_t> pick(0, sats.size() - 1);
  std::uniform_real_distribution<double> when(0.0, 86400.0);
  for (int i = 0; i < 200; ++i) {
    const auto& sat = sats[pick(rng)];
    double t = when(rng);
    Vec3 got = propagate_ecef(sat, t);
    Vec3 want = oracle::propagate_ecef_direct(sat, t);
    CHECK((got - want).norm() < 1e-5);
  }
}

TEST_CASE("circular orbit invariants hold across a full day") {
  ConstellationSpec spec;
  spec.name = "toy";
  spec.shells = {{550.0, 53.0, 3, 4}};
  auto sats = build_constellation(spec);
  const auto& sat = sats[7];
  double a = sat.semi_major_axis_m;
  double speed = std::sqrt(kEarthMuM3S2 / a);
  for (double t : {0.0, 17.0, 600.0, 5730.0, 43200.0, 86400.0}) {
    EcefState st = propagate_ecef_state(sat, t);
    CHECK(st.position_m.norm() == doctest::Approx(a).epsilon(1e-12));
    CHECK(st.velocity_m_s.norm() == doctest::Approx(speed).epsilon(1e-12));
    // Inertial velocity is tangential; the common frame rotation
    // preserves the dot product.
    CHECK(st.position_m.dot(st.velocity_m_s) /
              (a * speed) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("earth rotation moves the ground track west") {
  // A polar-orbit satellite crossing the equator: after exactly one
  // orbital period the inertial position repeats, so the Earth-fixed
  // longitude regresses by the sidereal rotation over one period.
  ConstellationSpec spec;
  spec.name = "toy";
  spec.shells = {{550.0, 90.0, 1, 1}};
  auto sats = build_constellation(spec);
  double period = 2.0 * kPi / sats[0].mean_motion_rad_s;
  Vec3 before = propagate_ecef(sats[0], 0.0);
  Vec3 after = propagate_ecef(sats[0], period);
  double lon_before = std::atan2(before.y, before.x);
  double lon_after = std::atan2(after.y, after.x);
  CHECK(lon_before == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(lon_after ==
        doctest::Approx(-kEarthRotationRadS * period).epsilon(1e-9));
}

TEST_CASE("ground users sit on the sphere at the right spot") {
  Vec3 austin = user_ecef(30.267153, -97.743057);
  CHECK(austin.x == doctest::Approx(-741361.2472568413).epsilon(1e-12));
  CHECK(austin.y == doctest::Approx(-5452364.054039954).epsilon(1e-12));
  CHECK(austin.z == doctest::Approx(3211191.480319848).epsilon(1e-12));
  CHECK(austin.norm() == doctest::Approx(kEarthRadiusM).epsilon(1e-12));
  Vec3 origin = user_ecef(0.0, 0.0);
  CHECK(origin.x == kEarthRadiusM);
  CHECK(origin.y == 0.0);
  GroundUser gu;
  gu.lat_deg = 30.267153;
  gu.lon_deg = -97.743057;
  CHECK((user_ecef(gu) - austin).norm() == 0.0);
}

TEST_CASE("elevation agrees with the law-of-cosines construction") {
  // Frozen case: user on the equator, satellite 10 degrees of arc away
  // at 550 km altitude.
  Vec3 user = user_ecef(0.0, 0.0);
  double arc = 10.0 * kRadPerDeg;
  double rs = kEarthRadiusM + 550.0e3;
  Vec3 sat{rs * std::cos(arc), rs * std::sin(arc), 0.0};
  CHECK(elevation_deg(user, sat) ==
        doctest::Approx(20.31208069146931).epsilon(1e-12));
  CHECK((sat - user).norm() ==
        doctest::Approx(1281508.6767364338).epsilon(1e-12));

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> arc_dist(0.001, 0.6);
  std::uniform_real_distribution<double> alt(400.0, 1500.0);
  for (int i = 0; i < 100; ++i) {
    double ang = arc_dist(rng);
    double r = kEarthRadiusM + alt(rng) * 1000.0;
    Vec3 s{r * std::cos(ang), r * std::sin(ang), 0.0};
    double want = oracle::elevation_law_of_cosines_deg(kEarthRadiusM, r, ang);
    CHECK(elevation_deg(user, s) ==
          doctest::Approx(want).scale(1.0).epsilon(1e-10));
  }

  // Zenith and horizon extremes.
  CHECK(elevation_deg(user, user * 1.1) == doctest::Approx(90.0));
  Vec3 antipode = -user * ((kEarthRadiusM + 550.0e3) / kEarthRadiusM);
  CHECK(elevation_deg(user, antipode) < 0.0);
  CHECK_THROWS_AS(elevation_deg(user, user), std::invalid_argument);
  CHECK_THROWS_AS(elevation_deg({0.0, 0.0, 0.0}, user),
                  std::invalid_argument);
}

TEST_CASE("visible set matches a direct elevation filter") {
  ScenarioConfig cfg = default_config();
  auto sats = build_constellation(cfg.secondary);
  Vec3 user = user_ecef(30.2672, -97.7431);
  double t = 12345.0;
  auto idx = visible_set(user, sats, t, 35.0);
  CHECK(!idx.empty());
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  std::vector<int> direct;
  for (std::size_t i = 0; i < sats.size(); ++i) {
    if (elevation_deg(user, propagate_ecef(sats[i], t)) >= 35.0) {
      direct.push_back(static_cast<int>(i));
    }
  }
  CHECK(idx == direct);

  // Position overload agrees with the state overload.
  std::vector<Vec3> pos;
  for (const auto& s : sats) pos.push_back(propagate_ecef(s, t));
  CHECK(visible_set(user, pos, 35.0) == idx);
  // Lowering the mask only adds satellites.
  auto wider = visible_set(user, pos, 25.0);
  CHECK(wider.size() >= idx.size());
  CHECK(std::includes(wider.begin(), wider.end(), idx.begin(), idx.end()));
  CHECK_THROWS_AS(visible_set(user, pos, 90.0), std::invalid_argument);
  CHECK_THROWS_AS(visible_set(user, pos, -1.0), std::invalid_argument);
}

TEST_CASE("spec validation names the offending field") {
  ConstellationSpec spec;
  spec.name = "toy";
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);  // no shells
  spec.shells = {{550.0, 53.0, 6, 4}};
  CHECK_NOTHROW(validate(spec));
  spec.shells[0].altitude_km = 0.0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.shells[0] = {550.0, 0.0, 6, 4};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.shells[0] = {550.0, 53.0, 0, 4};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.shells[0] = {550.0, 53.0, 6, 4};
  spec.seed_phasing = -1;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

}  // TEST_SUITE
