#include <cmath>
#include <limits>

#include "doctest.h"
#include "leocx/link_budget.hpp"
#include "leocx/scenario.hpp"
#include "leocx/scene.hpp"
#include "leocx/types.hpp"
#include "support/oracles.hpp"
#include "support/random_scene.hpp"

using namespace leocx;

namespace {

// dB comparison that treats two zero-gain (-inf) paths as equal.
void check_db_close(double got_db, double want_db, double tol_db) {
  if (std::isinf(got_db) && std::isinf(want_db)) {
    CHECK(std::signbit(got_db) == std::signbit(want_db));
    return;
  }
  CHECK(got_db == doctest::Approx(want_db).scale(1.0).epsilon(tol_db));
}

SceneConfig default_scene_config() {
  SceneConfig cfg;
  cfg.sat_array = {64, 64, 0.5};
  cfg.user_array = {32, 32, 0.5};
  return cfg;
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("zenith link reproduces the frozen budget") {
  SceneConfig cfg = default_scene_config();
  SceneInputs in;
  in.u_pos_m = user_ecef(0.0, 0.0);
  in.v_pos_m = in.u_pos_m;
  SceneSatellite sat;
  sat.id = 0;
  sat.altitude_km = 550.0;
  sat.tx_power_dbw = tx_power_dbw(cfg.radio, SystemRole::primary, 550.0,
                                  550.0, max_gain_dbi(cfg.sat_array));
  sat.pos_m = in.u_pos_m * ((kEarthRadiusM + 550.0e3) / kEarthRadiusM);
  sat.vel_m_s = {0.0, std::sqrt(kEarthMuM3S2 / sat.pos_m.norm()), 0.0};
  in.primary.push_back(sat);

  SceneSnapshot scene = make_scene(in, cfg);
  REQUIRE(scene.p_count() == 1);
  CHECK(scene.geo_up[0].range_m == doctest::Approx(550.0e3).epsilon(1e-12));
  CHECK(scene.geo_up[0].elevation_deg == doctest::Approx(90.0).epsilon(1e-9));
  CHECK(to_db(scene.snr_u_lin[0]) ==
        doctest::Approx(5.327362641350248).epsilon(1e-10));
  CHECK(scene.noise_u_dbw ==
        doctest::Approx(-116.77940008672037).epsilon(1e-12));
  // No secondaries: empty interference matrices, no SNR at v.
  CHECK(scene.s_count() == 0);
  CHECK(scene.snr_v_lin.empty());
  CHECK(scene.inr_u_lin.empty());
  CHECK(scene.inr_v_lin.empty());
}

TEST_CASE("matches the fully recomputed metrics on random scenes") {
  for (unsigned seed = 1; seed <= 50; ++seed) {
    testsupport::SceneGen gen(seed);
    double sep = (seed % 3 == 0) ? 10.0e3 : 0.0;
    SceneInputs in = gen.typical_scene(sep);
    SceneSnapshot scene = make_scene(in, gen.cfg);
    oracle::SceneMetrics want = oracle::scene_metrics_direct(in, gen.cfg);

    REQUIRE(scene.p_count() == want.snr_u_db.size());
    REQUIRE(scene.s_count() == want.snr_v_db.size());
    for (std::size_t pi = 0; pi < scene.p_count(); ++pi) {
      check_db_close(to_db(scene.snr_u_lin[pi]), want.snr_u_db[pi], 1e-9);
    }
    for (std::size_t si = 0; si < scene.s_count(); ++si) {
      check_db_close(to_db(scene.snr_v_lin[si]), want.snr_v_db[si], 1e-9);
    }
    // Interference paths ride sidelobe gains, where the direct phasor sum
    // and the closed form drift apart near nulls; a micro-dB bound still
    // catches any term-level mistake.
    for (std::size_t pi = 0; pi < scene.p_count(); ++pi) {
      for (std::size_t si = 0; si < scene.s_count(); ++si) {
        check_db_close(to_db(scene.inr_u(pi, si)), want.inr_u_db[pi][si],
                       1e-6);
        check_db_close(to_db(scene.inr_v(si, pi)), want.inr_v_db[si][pi],
                       1e-6);
      }
    }
  }
}

TEST_CASE("sinr accessors compose snr and inr") {
  testsupport::SceneGen gen(77);
  SceneSnapshot scene = make_scene(gen.scene(5, 6), gen.cfg);
  for (std::size_t pi = 0; pi < scene.p_count(); ++pi) {
    for (std::size_t si = 0; si < scene.s_count(); ++si) {
      double want = oracle::sinr_db_of(to_db(scene.snr_u_lin[pi]),
                                       to_db(scene.inr_u(pi, si)));
      CHECK(to_db(scene.sinr_u(pi, si)) ==
            doctest::Approx(want).scale(1.0).epsilon(1e-9));
      CHECK(to_db(scene.sinr_v(si, pi)) ==
            doctest::Approx(oracle::sinr_db_of(to_db(scene.snr_v_lin[si]),
                                               to_db(scene.inr_v(si, pi))))
                .scale(1.0)
                .epsilon(1e-9));
      // Interference only hurts.
      CHECK(scene.sinr_u(pi, si) <= scene.snr_u_lin[pi]);
      CHECK(scene.sinr_v(si, pi) <= scene.snr_v_lin[si]);
    }
  }
}

TEST_CASE("per-user noise figure shifts only that user's metrics") {
  testsupport::SceneGen gen(13);
  SceneInputs in = gen.scene(4, 5);
  SceneSnapshot base = make_scene(in, gen.cfg);
  in.noise_figure_u_db = gen.cfg.radio.noise_figure_db + 3.0;
  SceneSnapshot bumped = make_scene(in, gen.cfg);
  CHECK(bumped.noise_u_dbw - base.noise_u_dbw == doctest::Approx(3.0));
  CHECK(bumped.noise_v_dbw == base.noise_v_dbw);
  for (std::size_t pi = 0; pi < base.p_count(); ++pi) {
    CHECK(to_db(base.snr_u_lin[pi]) - to_db(bumped.snr_u_lin[pi]) ==
          doctest::Approx(3.0).epsilon(1e-9));
    for (std::size_t si = 0; si < base.s_count(); ++si) {
      CHECK(to_db(base.inr_u(pi, si)) - to_db(bumped.inr_u(pi, si)) ==
            doctest::Approx(3.0).epsilon(1e-9));
      // v-side metrics untouched.
      CHECK(bumped.inr_v(si, pi) == base.inr_v(si, pi));
    }
  }
  for (std::size_t si = 0; si < base.s_count(); ++si) {
    CHECK(bumped.snr_v_lin[si] == base.snr_v_lin[si]);
  }
}

TEST_CASE("constellation overload filters, sorts and powers the visible sets") {
  ScenarioConfig sc = default_config();
  // One middle shell from each network keeps this fast.
  ConstellationSpec pspec = sc.primary;
  pspec.shells = {sc.primary.shells[0], sc.primary.shells[4]};
  ConstellationSpec sspec = sc.secondary;
  sspec.shells = {sc.secondary.shells[0]};
  Constellation primary = Constellation::build(pspec);
  Constellation secondary = Constellation::build(sspec);

  GroundUser u;
  u.name = "austin";
  u.lat_deg = 30.2672;
  u.lon_deg = -97.7431;
  GroundUser v = u;

  SceneConfig cfg = default_scene_config();
  double t = 7890.0;
  SceneSnapshot scene = make_scene(primary, secondary, u, v, t, cfg);

  // Visible sets match the standalone filter, in id order.
  Vec3 upos = user_ecef(u);
  auto vis_p = visible_set(upos, primary.sats, t, cfg.eps_min_deg);
  REQUIRE(scene.p_count() == vis_p.size());
  for (std::size_t i = 0; i < vis_p.size(); ++i) {
    CHECK(scene.primary[i].id == primary.sats[vis_p[i]].id);
    CHECK(scene.geo_up[i].elevation_deg >= cfg.eps_min_deg);
    Vec3 want_pos = propagate_ecef(primary.sats[vis_p[i]], t);
    CHECK((scene.primary[i].pos_m - want_pos).norm() == 0.0);
    // Per-shell transmit power with the constellation's own reference.
    double want_tx = tx_power_dbw(cfg.radio, SystemRole::primary,
                                  primary.sats[vis_p[i]].altitude_km,
                                  primary.reference_altitude_km,
                                  max_gain_dbi(cfg.sat_array));
    CHECK(scene.primary[i].tx_power_dbw == want_tx);
  }
  auto vis_s = visible_set(upos, secondary.sats, t, cfg.eps_min_deg);
  REQUIRE(scene.s_count() == vis_s.size());
  // The secondary network's tx power uses its own (higher) cap and its
  // own 590 km reference.
  for (std::size_t i = 0; i < vis_s.size(); ++i) {
    double want_tx = tx_power_dbw(cfg.radio, SystemRole::secondary,
                                  secondary.sats[vis_s[i]].altitude_km,
                                  secondary.reference_altitude_km,
                                  max_gain_dbi(cfg.sat_array));
    CHECK(scene.secondary[i].tx_power_dbw == want_tx);
  }
}

TEST_CASE("empty scenes stay consistent") {
  SceneConfig cfg = default_scene_config();
  SceneInputs in;
  in.u_pos_m = user_ecef(10.0, 20.0);
  in.v_pos_m = in.u_pos_m;
  SceneSnapshot scene = make_scene(in, cfg);
  CHECK(scene.p_count() == 0);
  CHECK(scene.s_count() == 0);
  CHECK(scene.snr_u_lin.empty());
  CHECK(scene.inr_u_lin.empty());
}

}  // TEST_SUITE
