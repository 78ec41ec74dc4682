#include "leocx/selection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace leocx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_p_star(const SceneSnapshot& scene, std::size_t p_star) {
  if (p_star >= scene.p_count()) {
    throw std::out_of_range("selection: p_star outside the visible set");
  }
}

}  // namespace

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::greedy_max_snr: return "greedy_max_snr";
    case Strategy::greedy_max_sinr: return "greedy_max_sinr";
    case Strategy::protective_max_snr: return "protective_max_snr";
    case Strategy::protective_max_sinr: return "protective_max_sinr";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_string(const std::string& name) {
  if (name == "greedy_max_snr") return Strategy::greedy_max_snr;
  if (name == "greedy_max_sinr") return Strategy::greedy_max_sinr;
  if (name == "protective_max_snr") return Strategy::protective_max_snr;
  if (name == "protective_max_sinr") return Strategy::protective_max_sinr;
  return std::nullopt;
}

const char* to_string(Outage o) {
  switch (o) {
    case Outage::none: return "none";
    case Outage::no_visible: return "no_visible";
    case Outage::none_feasible: return "none_feasible";
  }
  return "unknown";
}

std::optional<std::size_t> select_primary(const SceneSnapshot& scene) {
  if (scene.primary.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t pi = 1; pi < scene.p_count(); ++pi) {
    // Strict > keeps the first maximizer, which is the lowest id.
    if (scene.snr_u_lin[pi] > scene.snr_u_lin[best]) best = pi;
  }
  return best;
}

std::optional<InrBounds> absolute_inr_bounds(const SceneSnapshot& scene) {
  if (scene.primary.empty() || scene.secondary.empty()) return std::nullopt;
  double lo = scene.inr_u_lin.front();
  double hi = lo;
  for (double v : scene.inr_u_lin) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return InrBounds{to_db(hi), to_db(lo)};
}

std::optional<InrBounds> conditional_inr_bounds(const SceneSnapshot& scene,
                                                std::size_t p_star) {
  check_p_star(scene, p_star);
  if (scene.secondary.empty()) return std::nullopt;
  double lo = scene.inr_u(p_star, 0);
  double hi = lo;
  for (std::size_t si = 1; si < scene.s_count(); ++si) {
    double v = scene.inr_u(p_star, si);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return InrBounds{to_db(hi), to_db(lo)};
}

std::vector<std::size_t> feasible_set(const SceneSnapshot& scene,
                                      std::size_t p_star,
                                      ProtectionThreshold th) {
  check_p_star(scene, p_star);
  std::vector<std::size_t> out;
  for (std::size_t si = 0; si < scene.s_count(); ++si) {
    if (th.admits_linear(scene.inr_u(p_star, si))) out.push_back(si);
  }
  return out;
}

int useful_count(const SceneSnapshot& scene, std::size_t p_star,
                 ProtectionThreshold th, double delta_db) {
  check_p_star(scene, p_star);
  if (scene.secondary.empty()) return 0;
  double best_snr = 0.0;
  for (double s : scene.snr_v_lin) best_snr = std::max(best_snr, s);
  double floor = best_snr / to_linear(delta_db);
  int n = 0;
  for (std::size_t si = 0; si < scene.s_count(); ++si) {
    if (th.admits_linear(scene.inr_u(p_star, si)) &&
        scene.sinr_v(si, p_star) >= floor) {
      ++n;
    }
  }
  return n;
}

SelectionOutcome select_secondary(const SceneSnapshot& scene,
                                  std::size_t p_star, Strategy strategy,
                                  ProtectionThreshold th,
                                  double useful_delta_db) {
  check_p_star(scene, p_star);

  SelectionOutcome out;
  out.strategy = strategy;
  out.inr_th_db = th.inr_th_db;
  out.primary_id = scene.primary[p_star].id;
  out.snr_u_db = to_db(scene.snr_u_lin[p_star]);

  bool protective = strategy == Strategy::protective_max_snr ||
                    strategy == Strategy::protective_max_sinr;
  bool by_snr = strategy == Strategy::greedy_max_snr ||
                strategy == Strategy::protective_max_snr;

  out.feasible_count =
      static_cast<int>(feasible_set(scene, p_star, th).size());
  out.useful_count = useful_count(scene, p_star, th, useful_delta_db);

  bool found = false;
  std::size_t best = 0;
  double best_metric = kNegInf;
  for (std::size_t si = 0; si < scene.s_count(); ++si) {
    if (protective && !th.admits_linear(scene.inr_u(p_star, si))) continue;
    double metric =
        by_snr ? scene.snr_v_lin[si] : scene.sinr_v(si, p_star);
    if (!found || metric > best_metric) {
      found = true;
      best = si;
      best_metric = metric;
    }
  }

  if (!found) {
    out.outage = scene.secondary.empty() ? Outage::no_visible
                                         : Outage::none_feasible;
    out.secondary_id = -1;
    // The primary keeps its clean link when no secondary transmits.
    out.sinr_u_db = out.snr_u_db;
    out.snr_v_db = kNegInf;
    out.sinr_v_db = kNegInf;
    out.inr_at_primary_db = kNegInf;
    out.separation_deg = 0.0;
    out.elevation_s_deg = 0.0;
    return out;
  }

  out.secondary_index = best;
  out.secondary_id = scene.secondary[best].id;
  out.sinr_u_db = to_db(scene.sinr_u(p_star, best));
  out.snr_v_db = to_db(scene.snr_v_lin[best]);
  out.sinr_v_db = to_db(scene.sinr_v(best, p_star));
  out.inr_at_primary_db = to_db(scene.inr_u(p_star, best));
  out.separation_deg = angular_separation_deg(
      scene.u_pos_m, scene.primary[p_star].pos_m, scene.secondary[best].pos_m);
  out.elevation_s_deg = scene.geo_vs[best].elevation_deg;
  return out;
}

double angular_separation_deg(const Vec3& user_pos_m, const Vec3& sat_a_pos_m,
                              const Vec3& sat_b_pos_m) {
  Vec3 da = sat_a_pos_m - user_pos_m;
  Vec3 db = sat_b_pos_m - user_pos_m;
  if (da.norm() == 0.0 || db.norm() == 0.0) {
    throw std::invalid_argument(
        "angular_separation_deg: satellite coincides with the user");
  }
  return angle_between_rad(da, db) * kDegPerRad;
}

}  // namespace leocx
