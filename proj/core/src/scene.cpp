#include "leocx/scene.hpp"

#include <cmath>
#include <stdexcept>

#include "leocx/link_budget.hpp"

namespace leocx {

namespace {

LinkGeometry link_geometry(const Vec3& user_pos, const ArrayFrame& user_frame,
                           const Vec3& sat_pos, const ArrayFrame& sat_frame) {
  LinkGeometry g;
  g.range_m = (sat_pos - user_pos).norm();
  g.elevation_deg = elevation_deg(user_pos, sat_pos);
  g.dir_user_frame = direction_in_frame(user_frame, user_pos, sat_pos);
  g.dir_sat_frame = direction_in_frame(sat_frame, sat_pos, user_pos);
  return g;
}

}  // namespace

SceneSnapshot make_scene(const SceneInputs& in, const SceneConfig& cfg) {
  validate(cfg.radio);
  validate(cfg.sat_array);
  validate(cfg.user_array);

  SceneSnapshot scene;
  scene.t_s = in.t_s;
  scene.u_pos_m = in.u_pos_m;
  scene.v_pos_m = in.v_pos_m;
  scene.primary = in.primary;
  scene.secondary = in.secondary;
  auto noise_for = [&](double nf_override) {
    return std::isnan(nf_override) ? noise_power_dbw(cfg.radio)
                                   : noise_power_dbw(cfg.radio, nf_override);
  };
  scene.noise_u_dbw = noise_for(in.noise_figure_u_db);
  scene.noise_v_dbw = noise_for(in.noise_figure_v_db);

  ArrayFrame frame_u = user_array_frame(in.u_pos_m);
  ArrayFrame frame_v = user_array_frame(in.v_pos_m);

  std::size_t np = scene.primary.size();
  std::size_t ns = scene.secondary.size();
  scene.geo_up.reserve(np);
  scene.geo_vp.reserve(np);
  scene.geo_us.reserve(ns);
  scene.geo_vs.reserve(ns);
  for (const auto& p : scene.primary) {
    ArrayFrame f = satellite_array_frame(p.pos_m, p.vel_m_s);
    scene.geo_up.push_back(link_geometry(in.u_pos_m, frame_u, p.pos_m, f));
    scene.geo_vp.push_back(link_geometry(in.v_pos_m, frame_v, p.pos_m, f));
  }
  for (const auto& s : scene.secondary) {
    ArrayFrame f = satellite_array_frame(s.pos_m, s.vel_m_s);
    scene.geo_us.push_back(link_geometry(in.u_pos_m, frame_u, s.pos_m, f));
    scene.geo_vs.push_back(link_geometry(in.v_pos_m, frame_v, s.pos_m, f));
  }

  double g_sat_peak = max_gain_dbi(cfg.sat_array);
  double g_user_peak = max_gain_dbi(cfg.user_array);

  // Serving links are steered exactly at each other, so both ends sit at
  // their peak gain.
  scene.snr_u_lin.resize(np);
  for (std::size_t pi = 0; pi < np; ++pi) {
    double snr = snr_db(scene.primary[pi].tx_power_dbw, g_sat_peak,
                        g_user_peak,
                        fspl_db(scene.geo_up[pi].range_m, cfg.radio.carrier_hz),
                        scene.noise_u_dbw);
    scene.snr_u_lin[pi] = to_linear(snr);
  }
  scene.snr_v_lin.resize(ns);
  for (std::size_t si = 0; si < ns; ++si) {
    double snr = snr_db(scene.secondary[si].tx_power_dbw, g_sat_peak,
                        g_user_peak,
                        fspl_db(scene.geo_vs[si].range_m, cfg.radio.carrier_hz),
                        scene.noise_v_dbw);
    scene.snr_v_lin[si] = to_linear(snr);
  }

  // INR(u, p; s): satellite s transmits toward its own user v; only the
  // receive gain depends on which p the user is steered at, so the rest
  // of the budget is hoisted per interferer.
  scene.inr_u_lin.assign(np * ns, 0.0);
  for (std::size_t si = 0; si < ns; ++si) {
    double tx_gain = steered_gain_dbi(cfg.sat_array,
                                      scene.geo_vs[si].dir_sat_frame,
                                      scene.geo_us[si].dir_sat_frame);
    double k_db = scene.secondary[si].tx_power_dbw + tx_gain -
                  fspl_db(scene.geo_us[si].range_m, cfg.radio.carrier_hz) -
                  scene.noise_u_dbw;
    double k_lin = to_linear(k_db);
    for (std::size_t pi = 0; pi < np; ++pi) {
      double rx = steered_gain_linear(cfg.user_array,
                                      scene.geo_up[pi].dir_user_frame,
                                      scene.geo_us[si].dir_user_frame);
      scene.inr_u_lin[pi * ns + si] = k_lin * rx;
    }
  }

  // INR(v, s; p): mirror image, primary satellite p steered at u.
  scene.inr_v_lin.assign(ns * np, 0.0);
  for (std::size_t pi = 0; pi < np; ++pi) {
    double tx_gain = steered_gain_dbi(cfg.sat_array,
                                      scene.geo_up[pi].dir_sat_frame,
                                      scene.geo_vp[pi].dir_sat_frame);
    double k_db = scene.primary[pi].tx_power_dbw + tx_gain -
                  fspl_db(scene.geo_vp[pi].range_m, cfg.radio.carrier_hz) -
                  scene.noise_v_dbw;
    double k_lin = to_linear(k_db);
    for (std::size_t si = 0; si < ns; ++si) {
      double rx = steered_gain_linear(cfg.user_array,
                                      scene.geo_vs[si].dir_user_frame,
                                      scene.geo_vp[pi].dir_user_frame);
      scene.inr_v_lin[si * np + pi] = k_lin * rx;
    }
  }

  return scene;
}

SceneSnapshot make_scene(const Constellation& primary,
                         const Constellation& secondary, const GroundUser& u,
                         const GroundUser& v, double t_s,
                         const SceneConfig& cfg) {
  SceneInputs in;
  in.t_s = t_s;
  in.u_pos_m = user_ecef(u);
  in.v_pos_m = user_ecef(v);

  double g_sat_peak = max_gain_dbi(cfg.sat_array);
  auto collect = [&](const Constellation& c, const Vec3& user_pos,
                     std::vector<SceneSatellite>& out) {
    std::vector<Vec3> pos;
    pos.reserve(c.sats.size());
    for (const auto& sat : c.sats) pos.push_back(propagate_ecef(sat, t_s));
    for (int idx : visible_set(user_pos, pos, cfg.eps_min_deg)) {
      const SatelliteState& sat = c.sats[idx];
      SceneSatellite vs;
      vs.id = sat.id;
      vs.altitude_km = sat.altitude_km;
      vs.tx_power_dbw =
          tx_power_dbw(cfg.radio, c.spec.role, sat.altitude_km,
                       c.reference_altitude_km, g_sat_peak);
      EcefState st = propagate_ecef_state(sat, t_s);
      vs.pos_m = st.position_m;
      vs.vel_m_s = st.velocity_m_s;
      out.push_back(vs);
    }
  };
  collect(primary, in.u_pos_m, in.primary);
  collect(secondary, in.v_pos_m, in.secondary);
  in.noise_figure_u_db = u.noise_figure_db;
  in.noise_figure_v_db = v.noise_figure_db;

  return make_scene(in, cfg);
}

}  // namespace leocx
