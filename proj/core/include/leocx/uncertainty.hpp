#pragma once

#include <cstddef>
#include <vector>

#include "leocx/selection.hpp"

namespace leocx {

// The secondary operator does not know which satellite serves the primary
// user; it only trusts a direction estimate mu up to a cone half-angle
// gamma. Candidates are every visible primary satellite inside that cone.
std::vector<std::size_t> candidate_primary_set(const SceneSnapshot& scene,
                                               const Vec3& mu_dir_ecef,
                                               double gamma_deg);

// Convenience overload: mu is the true direction from u to p_star, so the
// actual serving satellite is always a candidate.
std::vector<std::size_t> candidate_primary_set(const SceneSnapshot& scene,
                                               std::size_t p_star,
                                               double gamma_deg);

// Where the robust protection constraint is evaluated. The interference
// that matters physically lands at the primary user, which is the default;
// the secondary_user variant instead bounds INR measured at v (the
// quantity the secondary can observe locally) and is kept selectable for
// comparison.
enum class RobustConstraintSite { primary_user, secondary_user };

// Secondaries admitted against every candidate simultaneously:
// INR(site, p; s) <= threshold for all p in candidates.
std::vector<std::size_t> robust_feasible_set(
    const SceneSnapshot& scene, const std::vector<std::size_t>& candidates,
    ProtectionThreshold th,
    RobustConstraintSite site = RobustConstraintSite::primary_user);

struct RobustOutcome {
  double gamma_deg = 0.0;
  double inr_th_db = 0.0;
  Outage outage = Outage::none;
  int secondary_id = -1;
  int worst_candidate_id = -1;  // candidate attaining the guaranteed SINR
  // min over candidates of SINR(v, s; p), maximized over feasible s.
  double guaranteed_sinr_db = 0.0;
  int candidate_count = 0;        // |P'|
  int feasible_count = 0;         // robust N_s
  double snr_v_db = 0.0;          // of the chosen s
  double elevation_s_deg = 0.0;
  std::size_t secondary_index = 0;  // meaningless on outage
};

// Max-min selection: pick the robust-feasible s maximizing the worst-case
// SINR over the candidate set. With gamma = 0 (candidates = {p_star}) this
// reproduces protective_max_sinr exactly. Ties break toward the lowest
// satellite id; the worst candidate reported is the lowest-id minimizer.
RobustOutcome max_guaranteed_sinr(
    const SceneSnapshot& scene, const std::vector<std::size_t>& candidates,
    double gamma_deg, ProtectionThreshold th,
    RobustConstraintSite site = RobustConstraintSite::primary_user);

}  // namespace leocx
