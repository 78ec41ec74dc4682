#pragma once

#include <optional>
#include <string>
#include <vector>

#include "leocx/link_budget.hpp"
#include "leocx/scene.hpp"

namespace leocx {

// Secondary-side selection rules. The greedy pair ignores the protection
// constraint; the protective pair restricts the choice to satellites whose
// interference at the primary user stays at or below the threshold.
enum class Strategy {
  greedy_max_snr,
  greedy_max_sinr,
  protective_max_snr,
  protective_max_sinr,
};

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(const std::string& name);

enum class Outage {
  none,
  no_visible,     // empty visible set
  none_feasible,  // visible satellites exist but all violate the threshold
};

const char* to_string(Outage o);

// Index into scene.primary of the max-SNR primary satellite, nullopt when
// nothing is visible. Ties break toward the lowest satellite id, which is
// the lowest index since the visible vectors are id-sorted.
std::optional<std::size_t> select_primary(const SceneSnapshot& scene);

struct InrBounds {
  double max_db = 0.0;
  double min_db = 0.0;  // -inf possible when some pairing has zero gain
};

// Envelope of INR(u, p; s) over all (p, s) pairings (absolute) or over s
// for a fixed serving p (conditional). nullopt when either set is empty.
std::optional<InrBounds> absolute_inr_bounds(const SceneSnapshot& scene);
std::optional<InrBounds> conditional_inr_bounds(const SceneSnapshot& scene,
                                                std::size_t p_star);

// Indices into scene.secondary admitted by the threshold given the primary
// is served by p_star: INR(u, p_star; s) <= threshold.
std::vector<std::size_t> feasible_set(const SceneSnapshot& scene,
                                      std::size_t p_star,
                                      ProtectionThreshold th);

// Secondary satellites that are both feasible and still useful to v:
// SINR(v, s; p_star) >= SNR(v, s_best) / delta, with s_best the max-SNR
// secondary and delta = to_linear(delta_db).
int useful_count(const SceneSnapshot& scene, std::size_t p_star,
                 ProtectionThreshold th, double delta_db);

struct SelectionOutcome {
  Strategy strategy = Strategy::greedy_max_snr;
  double inr_th_db = 0.0;  // +inf when unconstrained
  Outage outage = Outage::none;
  int primary_id = -1;
  int secondary_id = -1;  // -1 on outage
  // Metrics under the joint choice (p_star serving u, s serving v).
  double snr_u_db = 0.0;
  double sinr_u_db = 0.0;
  double snr_v_db = 0.0;
  double sinr_v_db = 0.0;
  double inr_at_primary_db = 0.0;  // INR(u, p_star; s)
  int feasible_count = 0;
  int useful_count = 0;
  double separation_deg = 0.0;  // angle between p_star and s seen from u
  double elevation_s_deg = 0.0;
  // Index of the chosen secondary, for callers that keep working on the
  // same snapshot. Meaningless on outage.
  std::size_t secondary_index = 0;
};

// Runs one strategy for the secondary user given the primary's choice.
// Ties break toward the lowest satellite id. useful_delta_db only feeds
// the useful_count diagnostic in the outcome.
SelectionOutcome select_secondary(const SceneSnapshot& scene,
                                  std::size_t p_star, Strategy strategy,
                                  ProtectionThreshold th,
                                  double useful_delta_db = 3.0);

// Angle subtended at the user by two satellites, degrees.
double angular_separation_deg(const Vec3& user_pos_m, const Vec3& sat_a_pos_m,
                              const Vec3& sat_b_pos_m);

}  // namespace leocx
