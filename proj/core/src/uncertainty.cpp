#include "leocx/uncertainty.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace leocx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double site_inr(const SceneSnapshot& scene, RobustConstraintSite site,
                std::size_t si, std::size_t pi) {
  return site == RobustConstraintSite::primary_user ? scene.inr_u(pi, si)
                                                    : scene.inr_v(si, pi);
}

}  // namespace

std::vector<std::size_t> candidate_primary_set(const SceneSnapshot& scene,
                                               const Vec3& mu_dir_ecef,
                                               double gamma_deg) {
  if (gamma_deg < 0.0) {
    throw std::invalid_argument(
        "candidate_primary_set: gamma_deg must be non-negative");
  }
  if (mu_dir_ecef.norm() == 0.0) {
    throw std::invalid_argument("candidate_primary_set: mu direction is zero");
  }
  double gamma_rad = gamma_deg * kRadPerDeg;
  std::vector<std::size_t> out;
  for (std::size_t pi = 0; pi < scene.p_count(); ++pi) {
    Vec3 d = scene.primary[pi].pos_m - scene.u_pos_m;
    if (angle_between_rad(mu_dir_ecef, d) <= gamma_rad) out.push_back(pi);
  }
  return out;
}

std::vector<std::size_t> candidate_primary_set(const SceneSnapshot& scene,
                                               std::size_t p_star,
                                               double gamma_deg) {
  if (p_star >= scene.p_count()) {
    throw std::out_of_range("candidate_primary_set: p_star outside the set");
  }
  // mu is the exact direction of p_star, so p_star itself is always in
  // the cone (angle 0), even for gamma = 0.
  Vec3 mu = scene.primary[p_star].pos_m - scene.u_pos_m;
  return candidate_primary_set(scene, mu, gamma_deg);
}

std::vector<std::size_t> robust_feasible_set(
    const SceneSnapshot& scene, const std::vector<std::size_t>& candidates,
    ProtectionThreshold th, RobustConstraintSite site) {
  std::vector<std::size_t> out;
  if (candidates.empty()) return out;
  for (std::size_t si = 0; si < scene.s_count(); ++si) {
    bool ok = true;
    for (std::size_t pi : candidates) {
      if (!th.admits_linear(site_inr(scene, site, si, pi))) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(si);
  }
  return out;
}

RobustOutcome max_guaranteed_sinr(const SceneSnapshot& scene,
                                  const std::vector<std::size_t>& candidates,
                                  double gamma_deg, ProtectionThreshold th,
                                  RobustConstraintSite site) {
  RobustOutcome out;
  out.gamma_deg = gamma_deg;
  out.inr_th_db = th.inr_th_db;
  out.candidate_count = static_cast<int>(candidates.size());
  out.guaranteed_sinr_db = kNegInf;

  if (candidates.empty() || scene.secondary.empty()) {
    out.outage = Outage::no_visible;
    return out;
  }

  std::vector<std::size_t> feasible =
      robust_feasible_set(scene, candidates, th, site);
  out.feasible_count = static_cast<int>(feasible.size());
  if (feasible.empty()) {
    out.outage = Outage::none_feasible;
    return out;
  }

  bool found = false;
  std::size_t best = 0;
  double best_g = kNegInf;
  std::size_t best_worst = 0;
  for (std::size_t si : feasible) {
    // Worst-case SINR over every primary the operator might actually be
    // serving; first minimizer wins on ties (lowest id).
    double g = std::numeric_limits<double>::infinity();
    std::size_t worst = candidates.front();
    for (std::size_t pi : candidates) {
      double v = scene.sinr_v(si, pi);
      if (v < g) {
        g = v;
        worst = pi;
      }
    }
    if (!found || g > best_g) {
      found = true;
      best = si;
      best_g = g;
      best_worst = worst;
    }
  }

  out.secondary_index = best;
  out.secondary_id = scene.secondary[best].id;
  out.worst_candidate_id = scene.primary[best_worst].id;
  out.guaranteed_sinr_db = to_db(best_g);
  out.snr_v_db = to_db(scene.snr_v_lin[best]);
  out.elevation_s_deg = scene.geo_vs[best].elevation_deg;
  return out;
}

}  // namespace leocx
