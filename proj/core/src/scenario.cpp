#include "leocx/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace leocx {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument(field + ": " + why);
}

}  // namespace

std::string city_slug(const std::string& name) {
  std::string s;
  for (char c : name) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      s += static_cast<char>(std::tolower(u));
    } else if (c == ' ' || c == '-' || c == '_') {
      if (!s.empty() && s.back() != '_') s += '_';
    }
  }
  return s;
}

std::size_t ScenarioConfig::step_count() const {
  if (!(step_s > 0.0) || !(duration_s > 0.0)) return 0;
  // Steps cover [0, duration): 24 h at 30 s is 2880 steps.
  return static_cast<std::size_t>(std::floor(duration_s / step_s - 1e-12)) + 1;
}

ScenarioConfig default_config() {
  ScenarioConfig cfg;

  cfg.primary.name = "starlink";
  cfg.primary.role = SystemRole::primary;
  cfg.primary.seed_phasing = 1;
  cfg.primary.shells = {
      {540.0, 53.2, 72, 22},
      {550.0, 53.0, 72, 22},
      {560.0, 97.6, 4, 43},
      {560.0, 97.6, 6, 58},
      {570.0, 70.0, 36, 20},
  };

  cfg.secondary.name = "kuiper";
  cfg.secondary.role = SystemRole::secondary;
  cfg.secondary.seed_phasing = 1;
  cfg.secondary.shells = {
      {590.0, 33.0, 28, 28},
      {610.0, 42.0, 36, 36},
      {630.0, 51.9, 34, 34},
  };

  cfg.radio = RadioConfig{};
  cfg.sat_array = {64, 64, 0.5};
  cfg.user_arrays = {{8, 8, 0.5}, {16, 16, 0.5}, {32, 32, 0.5}};

  cfg.cities = {
      {"vancouver", 49.2827, -123.1207},
      {"madrid", 40.4168, -3.7038},
      {"seoul", 37.5519, 126.9780},
      {"cape town", -33.9249, 18.4241},
      {"austin", 30.267153, -97.743057},
      {"rio de janeiro", -22.9068, -43.1729},
      {"bangalore", 12.9716, 77.5946},
  };

  cfg.eps_min_deg = 35.0;
  cfg.duration_s = 86400.0;
  cfg.step_s = 30.0;
  cfg.inr_thresholds_db = {-15.0, -12.2, -6.0, 0.0};
  cfg.strategies = {Strategy::greedy_max_snr, Strategy::greedy_max_sinr,
                    Strategy::protective_max_snr,
                    Strategy::protective_max_sinr};
  cfg.useful_delta_db = 3.0;
  cfg.useful_deltas_db = {0.5, 2.0, 3.0};
  cfg.gammas_deg = {0.0, 10.0, 20.0, 25.0, 30.0, 40.0, 50.0};
  cfg.robust_thresholds_db = {-15.0, -12.2, -12.0, -9.0, -6.0, -3.0, 0.0};
  cfg.robust_site = RobustConstraintSite::primary_user;
  cfg.user_separation_m = 0.0;
  cfg.threads = 0;
  return cfg;
}

void validate(const ScenarioConfig& cfg) {
  validate(cfg.primary);
  validate(cfg.secondary);
  require(cfg.primary.role == SystemRole::primary, "ScenarioConfig.primary",
          "role must be primary");
  require(cfg.secondary.role == SystemRole::secondary,
          "ScenarioConfig.secondary", "role must be secondary");
  validate(cfg.radio);
  validate(cfg.sat_array);
  require(!cfg.user_arrays.empty(), "ScenarioConfig.user_arrays",
          "must not be empty");
  for (const auto& arr : cfg.user_arrays) validate(arr);
  require(!cfg.cities.empty(), "ScenarioConfig.cities", "must not be empty");
  std::vector<std::string> slugs;
  for (const auto& c : cfg.cities) {
    require(!c.name.empty(), "CitySpec.name", "must not be empty");
    require(std::abs(c.lat_deg) <= 90.0, "CitySpec.lat_deg",
            "must be in [-90, 90]");
    require(std::abs(c.lon_deg) <= 360.0, "CitySpec.lon_deg",
            "must be in [-360, 360]");
    require(std::abs(c.lat_deg) < 90.0, "CitySpec.lat_deg",
            "poles are not supported (East is undefined)");
    slugs.push_back(city_slug(c.name));
    require(!slugs.back().empty(), "CitySpec.name",
            "slug is empty: " + c.name);
  }
  std::sort(slugs.begin(), slugs.end());
  require(std::adjacent_find(slugs.begin(), slugs.end()) == slugs.end(),
          "ScenarioConfig.cities", "city slugs must be unique");
  require(cfg.eps_min_deg >= 0.0 && cfg.eps_min_deg < 90.0,
          "ScenarioConfig.eps_min_deg", "must be in [0, 90)");
  require(cfg.duration_s > 0.0, "ScenarioConfig.duration_s",
          "must be positive");
  require(cfg.step_s > 0.0 && cfg.step_s <= cfg.duration_s,
          "ScenarioConfig.step_s", "must be in (0, duration_s]");
  require(!cfg.inr_thresholds_db.empty(), "ScenarioConfig.inr_thresholds_db",
          "must not be empty");
  require(!cfg.strategies.empty(), "ScenarioConfig.strategies",
          "must not be empty");
  require(cfg.useful_delta_db > 0.0, "ScenarioConfig.useful_delta_db",
          "must be positive");
  for (double d : cfg.useful_deltas_db) {
    require(d > 0.0, "ScenarioConfig.useful_deltas_db",
            "entries must be positive");
  }
  for (double g : cfg.gammas_deg) {
    require(g >= 0.0 && g <= 180.0, "ScenarioConfig.gammas_deg",
            "entries must be in [0, 180]");
  }
  require(cfg.user_separation_m >= 0.0, "ScenarioConfig.user_separation_m",
          "must be non-negative");
  require(cfg.threads >= 0, "ScenarioConfig.threads", "must be >= 0");
  require(cfg.emit.float_precision >= 0 && cfg.emit.float_precision <= 17,
          "EmitOptions.float_precision", "must be in [0, 17]");
}

// ---- JSON ----------------------------------------------------------------

namespace {

double threshold_from_json(const json& j, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() == "unconstrained") return kInf;
    throw std::invalid_argument(field + ": expected number or 'unconstrained'");
  }
  if (!j.is_number()) {
    throw std::invalid_argument(field + ": expected number");
  }
  return j.get<double>();
}

json threshold_to_json(double th) {
  if (std::isinf(th) && th > 0.0) return "unconstrained";
  return th;
}

template <typename T>
void overlay(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void overlay_shells(const json& j, std::vector<ShellSpec>& shells,
                    const std::string& field) {
  if (!j.is_array()) throw std::invalid_argument(field + ": expected array");
  shells.clear();
  for (const auto& sj : j) {
    ShellSpec sh;
    sh.altitude_km = sj.at("altitude_km").get<double>();
    sh.inclination_deg = sj.at("inclination_deg").get<double>();
    sh.num_planes = sj.at("num_planes").get<int>();
    sh.sats_per_plane = sj.at("sats_per_plane").get<int>();
    shells.push_back(sh);
  }
}

void overlay_constellation(const json& j, ConstellationSpec& spec,
                           const std::string& field) {
  overlay(j, "name", spec.name);
  if (j.contains("shells")) overlay_shells(j.at("shells"), spec.shells, field);
  overlay(j, "seed_phasing", spec.seed_phasing);
  overlay(j, "raan_offset_deg", spec.raan_offset_deg);
  overlay(j, "anomaly_offset_deg", spec.anomaly_offset_deg);
}

void overlay_radio(const json& j, RadioConfig& r) {
  overlay(j, "carrier_hz", r.carrier_hz);
  overlay(j, "bandwidth_hz", r.bandwidth_hz);
  overlay(j, "eirp_density_primary_dbw_hz", r.eirp_density_primary_dbw_hz);
  overlay(j, "eirp_density_secondary_dbw_hz", r.eirp_density_secondary_dbw_hz);
  overlay(j, "noise_psd_dbm_hz", r.noise_psd_dbm_hz);
  overlay(j, "noise_figure_db", r.noise_figure_db);
  overlay(j, "power_control_limit_db", r.power_control_limit_db);
}

ArraySpec array_from_json(const json& j, const std::string& field) {
  ArraySpec a;
  if (j.is_array()) {
    // Compact [rows, cols] form.
    if (j.size() != 2) {
      throw std::invalid_argument(field + ": expected [rows, cols]");
    }
    a.rows = j.at(0).get<int>();
    a.cols = j.at(1).get<int>();
  } else {
    a.rows = j.at("rows").get<int>();
    a.cols = j.at("cols").get<int>();
    if (j.contains("element_spacing_wavelengths")) {
      a.element_spacing_wavelengths =
          j.at("element_spacing_wavelengths").get<double>();
    }
  }
  return a;
}

json array_to_json(const ArraySpec& a) {
  return json{{"rows", a.rows},
              {"cols", a.cols},
              {"element_spacing_wavelengths", a.element_spacing_wavelengths}};
}

std::vector<double> thresholds_from_json(const json& j,
                                         const std::string& field) {
  if (!j.is_array()) throw std::invalid_argument(field + ": expected array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(threshold_from_json(e, field));
  return out;
}

void apply_overlay(const json& j, ScenarioConfig& cfg) {
  if (j.contains("primary")) {
    overlay_constellation(j.at("primary"), cfg.primary, "primary");
  }
  if (j.contains("secondary")) {
    overlay_constellation(j.at("secondary"), cfg.secondary, "secondary");
  }
  if (j.contains("radio")) overlay_radio(j.at("radio"), cfg.radio);
  if (j.contains("sat_array")) {
    cfg.sat_array = array_from_json(j.at("sat_array"), "sat_array");
  }
  if (j.contains("user_arrays")) {
    cfg.user_arrays.clear();
    for (const auto& e : j.at("user_arrays")) {
      cfg.user_arrays.push_back(array_from_json(e, "user_arrays"));
    }
  }
  if (j.contains("cities")) {
    cfg.cities.clear();
    for (const auto& e : j.at("cities")) {
      CitySpec c;
      c.name = e.at("name").get<std::string>();
      c.lat_deg = e.at("lat_deg").get<double>();
      c.lon_deg = e.at("lon_deg").get<double>();
      cfg.cities.push_back(c);
    }
  }
  overlay(j, "eps_min_deg", cfg.eps_min_deg);
  overlay(j, "duration_s", cfg.duration_s);
  overlay(j, "step_s", cfg.step_s);
  if (j.contains("inr_thresholds_db")) {
    cfg.inr_thresholds_db =
        thresholds_from_json(j.at("inr_thresholds_db"), "inr_thresholds_db");
  }
  if (j.contains("strategies")) {
    cfg.strategies.clear();
    for (const auto& e : j.at("strategies")) {
      auto s = strategy_from_string(e.get<std::string>());
      if (!s) {
        throw std::invalid_argument("strategies: unknown strategy '" +
                                    e.get<std::string>() + "'");
      }
      cfg.strategies.push_back(*s);
    }
  }
  overlay(j, "useful_delta_db", cfg.useful_delta_db);
  overlay(j, "useful_deltas_db", cfg.useful_deltas_db);
  overlay(j, "gammas_deg", cfg.gammas_deg);
  if (j.contains("robust_thresholds_db")) {
    cfg.robust_thresholds_db = thresholds_from_json(
        j.at("robust_thresholds_db"), "robust_thresholds_db");
  }
  if (j.contains("robust_constraint_site")) {
    std::string site = j.at("robust_constraint_site").get<std::string>();
    if (site == "primary_user") {
      cfg.robust_site = RobustConstraintSite::primary_user;
    } else if (site == "secondary_user") {
      cfg.robust_site = RobustConstraintSite::secondary_user;
    } else {
      throw std::invalid_argument(
          "robust_constraint_site: expected 'primary_user' or "
          "'secondary_user'");
    }
  }
  overlay(j, "user_separation_m", cfg.user_separation_m);
  overlay(j, "threads", cfg.threads);
  if (j.contains("emit")) {
    overlay(j.at("emit"), "float_precision", cfg.emit.float_precision);
  }
}

json constellation_to_json(const ConstellationSpec& spec) {
  json shells = json::array();
  for (const auto& sh : spec.shells) {
    shells.push_back(json{{"altitude_km", sh.altitude_km},
                          {"inclination_deg", sh.inclination_deg},
                          {"num_planes", sh.num_planes},
                          {"sats_per_plane", sh.sats_per_plane}});
  }
  return json{{"name", spec.name},
              {"shells", shells},
              {"seed_phasing", spec.seed_phasing},
              {"raan_offset_deg", spec.raan_offset_deg},
              {"anomaly_offset_deg", spec.anomaly_offset_deg}};
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_config: cannot open " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("load_config: " + path.string() + ": " +
                             e.what());
  }
  // Overlay semantics: missing fields keep the default scenario's values,
  // so a config can be as small as one override.
  ScenarioConfig cfg = default_config();
  try {
    apply_overlay(j, cfg);
    validate(cfg);
  } catch (const std::exception& e) {
    throw std::runtime_error("load_config: " + path.string() + ": " +
                             e.what());
  }
  return cfg;
}

void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
  json cities = json::array();
  for (const auto& c : cfg.cities) {
    cities.push_back(json{
        {"name", c.name}, {"lat_deg", c.lat_deg}, {"lon_deg", c.lon_deg}});
  }
  json user_arrays = json::array();
  for (const auto& a : cfg.user_arrays) user_arrays.push_back(array_to_json(a));
  json thresholds = json::array();
  for (double t : cfg.inr_thresholds_db) thresholds.push_back(threshold_to_json(t));
  json robust_thresholds = json::array();
  for (double t : cfg.robust_thresholds_db) {
    robust_thresholds.push_back(threshold_to_json(t));
  }
  json strategies = json::array();
  for (Strategy s : cfg.strategies) strategies.push_back(to_string(s));

  json j{
      {"primary", constellation_to_json(cfg.primary)},
      {"secondary", constellation_to_json(cfg.secondary)},
      {"radio",
       json{{"carrier_hz", cfg.radio.carrier_hz},
            {"bandwidth_hz", cfg.radio.bandwidth_hz},
            {"eirp_density_primary_dbw_hz",
             cfg.radio.eirp_density_primary_dbw_hz},
            {"eirp_density_secondary_dbw_hz",
             cfg.radio.eirp_density_secondary_dbw_hz},
            {"noise_psd_dbm_hz", cfg.radio.noise_psd_dbm_hz},
            {"noise_figure_db", cfg.radio.noise_figure_db},
            {"power_control_limit_db", cfg.radio.power_control_limit_db}}},
      {"sat_array", array_to_json(cfg.sat_array)},
      {"user_arrays", user_arrays},
      {"cities", cities},
      {"eps_min_deg", cfg.eps_min_deg},
      {"duration_s", cfg.duration_s},
      {"step_s", cfg.step_s},
      {"inr_thresholds_db", thresholds},
      {"strategies", strategies},
      {"useful_delta_db", cfg.useful_delta_db},
      {"useful_deltas_db", cfg.useful_deltas_db},
      {"gammas_deg", cfg.gammas_deg},
      {"robust_thresholds_db", robust_thresholds},
      {"robust_constraint_site",
       cfg.robust_site == RobustConstraintSite::primary_user
           ? "primary_user"
           : "secondary_user"},
      {"user_separation_m", cfg.user_separation_m},
      {"threads", cfg.threads},
      {"emit", json{{"float_precision", cfg.emit.float_precision}}},
  };
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_config: cannot open " + path.string());
  }
  out << j.dump(2) << "\n";
}

// ---- sweep ----------------------------------------------------------------

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LEOCX_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RowLayout {
  std::size_t n_strategies = 0;
  std::size_t n_thresholds = 0;
  std::size_t n_deltas = 0;
  std::size_t n_gammas = 0;
  std::size_t n_robust_thresholds = 0;

  std::size_t selection_per_step() const { return n_strategies * n_thresholds; }
  std::size_t useful_per_step() const { return n_thresholds * n_deltas; }
  std::size_t robust_per_step() const { return n_gammas * n_robust_thresholds; }
};

struct CityContext {
  const ScenarioConfig* cfg = nullptr;
  const Constellation* primary = nullptr;
  const Constellation* secondary = nullptr;
  std::vector<double> tx_primary_by_shell;
  std::vector<double> tx_secondary_by_shell;
  Vec3 u_pos;
  Vec3 v_pos;
  RowLayout layout;
};

void append_visible(const Constellation& c, const std::vector<double>& tx,
                    const Vec3& user_pos, double t_s, double sin_min,
                    std::vector<SceneSatellite>& out) {
  Vec3 up = user_pos.normalized();
  for (const auto& sat : c.sats) {
    EcefState st = propagate_ecef_state(sat, t_s);
    Vec3 d = st.position_m - user_pos;
    if (d.dot(up) < sin_min * d.norm()) continue;
    SceneSatellite vs;
    vs.id = sat.id;
    vs.altitude_km = sat.altitude_km;
    vs.tx_power_dbw = tx[static_cast<std::size_t>(sat.shell_index)];
    vs.pos_m = st.position_m;
    vs.vel_m_s = st.velocity_m_s;
    out.push_back(vs);
  }
}

void fill_outage_rows(const CityContext& ctx, std::size_t step, double t,
                      CityArrayResults& run) {
  const ScenarioConfig& cfg = *ctx.cfg;
  const RowLayout& lay = ctx.layout;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  for (std::size_t si = 0; si < lay.n_strategies; ++si) {
    for (std::size_t ti = 0; ti < lay.n_thresholds; ++ti) {
      SelectionRow& row =
          run.selection[step * lay.selection_per_step() + si * lay.n_thresholds + ti];
      row.t_s = t;
      row.strategy = cfg.strategies[si];
      row.inr_th_db = cfg.inr_thresholds_db[ti];
      row.outage = Outage::no_visible;
      row.snr_p_db = row.sinr_p_db = kNegInf;
      row.snr_s_db = row.sinr_s_db = row.inr_p_db = kNegInf;
    }
  }
  for (std::size_t ti = 0; ti < lay.n_thresholds; ++ti) {
    for (std::size_t di = 0; di < lay.n_deltas; ++di) {
      UsefulRow& row =
          run.useful[step * lay.useful_per_step() + ti * lay.n_deltas + di];
      row.t_s = t;
      row.inr_th_db = cfg.inr_thresholds_db[ti];
      row.delta_db = cfg.useful_deltas_db[di];
      row.n_useful = 0;
    }
  }
  for (std::size_t gi = 0; gi < lay.n_gammas; ++gi) {
    for (std::size_t ri = 0; ri < lay.n_robust_thresholds; ++ri) {
      RobustRow& row =
          run.robust[step * lay.robust_per_step() + gi * lay.n_robust_thresholds + ri];
      row.t_s = t;
      row.gamma_deg = cfg.gammas_deg[gi];
      row.inr_th_db = cfg.robust_thresholds_db[ri];
      row.outage = Outage::no_visible;
      row.snr_p_db = row.sinr_p_db = kNegInf;
      row.snr_s_db = row.sinr_s_db = row.inr_p_db = kNegInf;
      row.guaranteed_sinr_db = row.guaranteed_sinr_norm_db = kNegInf;
    }
  }
}

void fill_rows(const CityContext& ctx, const SceneSnapshot& scene,
               std::size_t step, CityArrayResults& run) {
  const ScenarioConfig& cfg = *ctx.cfg;
  const RowLayout& lay = ctx.layout;
  double t = scene.t_s;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  auto p_star_opt = select_primary(scene);

  BoundsRow& bounds = run.bounds[step];
  bounds.t_s = t;
  bounds.n_visible_p = static_cast<int>(scene.p_count());
  bounds.n_visible_s = static_cast<int>(scene.s_count());
  bounds.p_star = -1;
  bounds.snr_p_db = kNegInf;
  bounds.inr_abs_max_db = bounds.inr_abs_min_db = kNegInf;
  bounds.inr_cond_max_db = bounds.inr_cond_min_db = kNegInf;
  if (auto abs = absolute_inr_bounds(scene)) {
    bounds.inr_abs_max_db = abs->max_db;
    bounds.inr_abs_min_db = abs->min_db;
  }

  if (!p_star_opt) {
    fill_outage_rows(ctx, step, t, run);
    return;
  }
  std::size_t p_star = *p_star_opt;
  bounds.p_star = scene.primary[p_star].id;
  bounds.snr_p_db = to_db(scene.snr_u_lin[p_star]);
  if (auto cond = conditional_inr_bounds(scene, p_star)) {
    bounds.inr_cond_max_db = cond->max_db;
    bounds.inr_cond_min_db = cond->min_db;
  }

  for (std::size_t si = 0; si < lay.n_strategies; ++si) {
    for (std::size_t ti = 0; ti < lay.n_thresholds; ++ti) {
      auto th = ProtectionThreshold::from_db(cfg.inr_thresholds_db[ti]);
      SelectionOutcome oc = select_secondary(scene, p_star, cfg.strategies[si],
                                             th, cfg.useful_delta_db);
      SelectionRow& row =
          run.selection[step * lay.selection_per_step() + si * lay.n_thresholds + ti];
      row.t_s = t;
      row.strategy = oc.strategy;
      row.inr_th_db = cfg.inr_thresholds_db[ti];
      row.p_star = oc.primary_id;
      row.s_choice = oc.secondary_id;
      row.snr_p_db = oc.snr_u_db;
      row.sinr_p_db = oc.sinr_u_db;
      row.snr_s_db = oc.snr_v_db;
      row.sinr_s_db = oc.sinr_v_db;
      row.inr_p_db = oc.inr_at_primary_db;
      row.n_feasible = oc.feasible_count;
      row.n_useful = oc.useful_count;
      row.sep_deg = oc.separation_deg;
      row.elev_s_deg = oc.elevation_s_deg;
      row.outage = oc.outage;
    }
  }

  for (std::size_t ti = 0; ti < lay.n_thresholds; ++ti) {
    auto th = ProtectionThreshold::from_db(cfg.inr_thresholds_db[ti]);
    for (std::size_t di = 0; di < lay.n_deltas; ++di) {
      UsefulRow& row =
          run.useful[step * lay.useful_per_step() + ti * lay.n_deltas + di];
      row.t_s = t;
      row.inr_th_db = cfg.inr_thresholds_db[ti];
      row.delta_db = cfg.useful_deltas_db[di];
      row.n_useful = useful_count(scene, p_star, th, cfg.useful_deltas_db[di]);
    }
  }

  // Benchmark for the normalized guaranteed SINR: the SNR the secondary
  // user would get from the unconstrained max-SNR choice.
  double snr_bench_db = kNegInf;
  for (double s : scene.snr_v_lin) {
    snr_bench_db = std::max(snr_bench_db, to_db(s));
  }

  for (std::size_t gi = 0; gi < lay.n_gammas; ++gi) {
    auto candidates =
        candidate_primary_set(scene, p_star, cfg.gammas_deg[gi]);
    for (std::size_t ri = 0; ri < lay.n_robust_thresholds; ++ri) {
      auto th = ProtectionThreshold::from_db(cfg.robust_thresholds_db[ri]);
      RobustOutcome oc = max_guaranteed_sinr(scene, candidates,
                                             cfg.gammas_deg[gi], th,
                                             cfg.robust_site);
      RobustRow& row =
          run.robust[step * lay.robust_per_step() + gi * lay.n_robust_thresholds + ri];
      row.t_s = t;
      row.inr_th_db = cfg.robust_thresholds_db[ri];
      row.gamma_deg = cfg.gammas_deg[gi];
      row.p_star = scene.primary[p_star].id;
      row.snr_p_db = to_db(scene.snr_u_lin[p_star]);
      row.n_feasible = static_cast<int>(feasible_set(scene, p_star, th).size());
      row.n_useful = useful_count(scene, p_star, th, cfg.useful_delta_db);
      row.outage = oc.outage;
      row.n_feasible_robust = oc.feasible_count;
      row.guaranteed_sinr_db = oc.guaranteed_sinr_db;
      if (oc.outage == Outage::none) {
        std::size_t si = oc.secondary_index;
        row.s_choice = oc.secondary_id;
        row.sinr_p_db = to_db(scene.sinr_u(p_star, si));
        row.snr_s_db = oc.snr_v_db;
        row.sinr_s_db = to_db(scene.sinr_v(si, p_star));
        row.inr_p_db = to_db(scene.inr_u(p_star, si));
        row.sep_deg = angular_separation_deg(scene.u_pos_m,
                                             scene.primary[p_star].pos_m,
                                             scene.secondary[si].pos_m);
        row.elev_s_deg = oc.elevation_s_deg;
        row.guaranteed_sinr_norm_db = oc.guaranteed_sinr_db - snr_bench_db;
      } else {
        row.s_choice = -1;
        row.sinr_p_db = row.snr_p_db;  // nothing transmits at the secondary
        row.snr_s_db = row.sinr_s_db = row.inr_p_db = kNegInf;
        row.sep_deg = 0.0;
        row.elev_s_deg = 0.0;
        row.guaranteed_sinr_norm_db = kNegInf;
      }
    }
  }
}

}  // namespace

void run_scenario(const ScenarioConfig& cfg, const RunSink& sink,
                  const ProgressFn& progress) {
  validate(cfg);
  if (!sink) throw std::invalid_argument("run_scenario: sink must be set");

  Constellation primary = Constellation::build(cfg.primary);
  Constellation secondary = Constellation::build(cfg.secondary);

  double g_sat_peak = max_gain_dbi(cfg.sat_array);
  auto shell_tx = [&](const Constellation& c) {
    std::vector<double> out;
    out.reserve(c.spec.shells.size());
    for (const auto& shell : c.spec.shells) {
      out.push_back(tx_power_dbw(cfg.radio, c.spec.role, shell.altitude_km,
                                 c.reference_altitude_km, g_sat_peak));
    }
    return out;
  };

  CityContext ctx;
  ctx.cfg = &cfg;
  ctx.primary = &primary;
  ctx.secondary = &secondary;
  ctx.tx_primary_by_shell = shell_tx(primary);
  ctx.tx_secondary_by_shell = shell_tx(secondary);
  ctx.layout.n_strategies = cfg.strategies.size();
  ctx.layout.n_thresholds = cfg.inr_thresholds_db.size();
  ctx.layout.n_deltas = cfg.useful_deltas_db.size();
  ctx.layout.n_gammas = cfg.gammas_deg.size();
  ctx.layout.n_robust_thresholds = cfg.robust_thresholds_db.size();

  std::size_t steps = cfg.step_count();
  int threads = resolve_threads(cfg.threads);
  double sin_min = std::sin(cfg.eps_min_deg * kRadPerDeg);

  for (const CitySpec& city : cfg.cities) {
    ctx.u_pos = user_ecef(city.lat_deg, city.lon_deg);
    // v sits user_separation_m east of u along the local parallel.
    double dlon_deg = cfg.user_separation_m /
                      (kEarthRadiusM * std::cos(city.lat_deg * kRadPerDeg)) *
                      kDegPerRad;
    ctx.v_pos = cfg.user_separation_m == 0.0
                    ? ctx.u_pos
                    : user_ecef(city.lat_deg, city.lon_deg + dlon_deg);

    std::vector<CityArrayResults> runs(cfg.user_arrays.size());
    for (std::size_t ai = 0; ai < cfg.user_arrays.size(); ++ai) {
      runs[ai].city = city.name;
      runs[ai].user_array = cfg.user_arrays[ai];
      runs[ai].bounds.resize(steps);
      runs[ai].selection.resize(steps * ctx.layout.selection_per_step());
      runs[ai].useful.resize(steps * ctx.layout.useful_per_step());
      runs[ai].robust.resize(steps * ctx.layout.robust_per_step());
    }

    if (progress) {
      progress("city " + city.name + ": " + std::to_string(steps) +
               " steps, " + std::to_string(cfg.user_arrays.size()) +
               " user arrays");
    }

    // Each step writes only its own preallocated row slots, so the output
    // is byte-identical no matter how steps land on threads.
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
      try {
        for (;;) {
          std::size_t step = next.fetch_add(1);
          if (step >= steps) return;
          double t = static_cast<double>(step) * cfg.step_s;
          SceneInputs in;
          in.t_s = t;
          in.u_pos_m = ctx.u_pos;
          in.v_pos_m = ctx.v_pos;
          append_visible(*ctx.primary, ctx.tx_primary_by_shell, ctx.u_pos, t,
                         sin_min, in.primary);
          append_visible(*ctx.secondary, ctx.tx_secondary_by_shell, ctx.v_pos,
                         t, sin_min, in.secondary);
          for (std::size_t ai = 0; ai < cfg.user_arrays.size(); ++ai) {
            SceneConfig scfg;
            scfg.radio = cfg.radio;
            scfg.sat_array = cfg.sat_array;
            scfg.user_array = cfg.user_arrays[ai];
            scfg.eps_min_deg = cfg.eps_min_deg;
            SceneSnapshot scene = make_scene(in, scfg);
            fill_rows(ctx, scene, step, runs[ai]);
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    };

    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (auto& run : runs) sink(std::move(run));
  }
}

ScenarioResults run_scenario(const ScenarioConfig& cfg,
                             const ProgressFn& progress) {
  ScenarioResults results;
  results.config = cfg;
  run_scenario(
      cfg,
      [&results](CityArrayResults&& run) {
        results.runs.push_back(std::move(run));
      },
      progress);
  return results;
}

}  // namespace leocx
