#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "leocx/cdf.hpp"
#include "leocx/constellation.hpp"
#include "leocx/scene.hpp"
#include "leocx/selection.hpp"
#include "leocx/uncertainty.hpp"

namespace leocx {

struct CitySpec {
  std::string name;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

// Lowercase, spaces to underscores; used in filenames and summary keys.
std::string city_slug(const std::string& name);

struct EmitOptions {
  int float_precision = 6;  // decimals for non-integer CSV fields
};

struct ScenarioConfig {
  ConstellationSpec primary;
  ConstellationSpec secondary;
  RadioConfig radio;
  ArraySpec sat_array;
  std::vector<ArraySpec> user_arrays;
  std::vector<CitySpec> cities;
  double eps_min_deg = 35.0;
  double duration_s = 86400.0;
  double step_s = 30.0;
  std::vector<double> inr_thresholds_db;
  std::vector<Strategy> strategies;
  double useful_delta_db = 3.0;          // n_useful column in selection rows
  std::vector<double> useful_deltas_db;  // extra sweep for the useful CSV
  std::vector<double> gammas_deg;
  std::vector<double> robust_thresholds_db;
  RobustConstraintSite robust_site = RobustConstraintSite::primary_user;
  double user_separation_m = 0.0;  // v displaced east of u on the ground
  int threads = 0;                 // 0 = LEOCX_THREADS env or hardware
  EmitOptions emit;

  std::size_t step_count() const;
};

// The two-constellation downlink scenario with the default dense shells,
// radio constants, seven reference cities and sweep grids.
ScenarioConfig default_config();

// JSON round trip. load_config throws std::runtime_error with the file
// and field on parse or validation problems.
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path);

void validate(const ScenarioConfig& cfg);

// One row per (step, strategy, threshold). Matches the selection CSV.
struct SelectionRow {
  double t_s = 0.0;
  Strategy strategy = Strategy::greedy_max_snr;
  double inr_th_db = 0.0;
  int p_star = -1;
  int s_choice = -1;
  double snr_p_db = 0.0;
  double sinr_p_db = 0.0;
  double snr_s_db = 0.0;
  double sinr_s_db = 0.0;
  double inr_p_db = 0.0;
  int n_feasible = 0;
  int n_useful = 0;
  double sep_deg = 0.0;
  double elev_s_deg = 0.0;
  Outage outage = Outage::none;
};

// One row per (step, gamma, robust threshold). Selection columns plus the
// robust extras; guaranteed_sinr_norm_db is relative to the SNR of the
// unconstrained max-SNR secondary at the same step.
struct RobustRow {
  double t_s = 0.0;
  double inr_th_db = 0.0;
  int p_star = -1;
  int s_choice = -1;
  double snr_p_db = 0.0;
  double sinr_p_db = 0.0;
  double snr_s_db = 0.0;
  double sinr_s_db = 0.0;
  double inr_p_db = 0.0;
  int n_feasible = 0;
  int n_useful = 0;
  double sep_deg = 0.0;
  double elev_s_deg = 0.0;
  Outage outage = Outage::none;
  double gamma_deg = 0.0;
  int n_feasible_robust = 0;
  double guaranteed_sinr_db = 0.0;
  double guaranteed_sinr_norm_db = 0.0;
};

// One row per step: visible-set sizes and the interference envelopes at
// the primary user before any secondary selection.
struct BoundsRow {
  double t_s = 0.0;
  int n_visible_p = 0;
  int n_visible_s = 0;
  int p_star = -1;
  double snr_p_db = 0.0;
  double inr_abs_max_db = 0.0;
  double inr_abs_min_db = 0.0;
  double inr_cond_max_db = 0.0;
  double inr_cond_min_db = 0.0;
};

// One row per (step, threshold, delta): size of the feasible-and-useful
// secondary set under that delta.
struct UsefulRow {
  double t_s = 0.0;
  double inr_th_db = 0.0;
  double delta_db = 0.0;
  int n_useful = 0;
};

struct CityArrayResults {
  std::string city;
  ArraySpec user_array;
  std::vector<BoundsRow> bounds;
  std::vector<SelectionRow> selection;
  std::vector<RobustRow> robust;
  std::vector<UsefulRow> useful;
};

using RunSink = std::function<void(CityArrayResults&&)>;
using ProgressFn = std::function<void(const std::string&)>;

// Runs every (city, user array) combination deterministically: results
// are byte-for-byte independent of the thread count. The sink receives
// each combination as soon as it is complete so rows can be written out
// and dropped instead of accumulating.
void run_scenario(const ScenarioConfig& cfg, const RunSink& sink,
                  const ProgressFn& progress = {});

struct ScenarioResults {
  ScenarioConfig config;
  std::vector<CityArrayResults> runs;
};

// Convenience wrapper that keeps everything in memory.
ScenarioResults run_scenario(const ScenarioConfig& cfg,
                             const ProgressFn& progress = {});

// ---- emission ----------------------------------------------------------

enum class EmitFormat { csv, json, plotdata };

std::optional<EmitFormat> emit_format_from_string(const std::string& name);

// Streams results to disk. csv writes the per-run row files, json a
// single summary.json of quantile tables and grid means, plotdata small
// per-figure CSV files ready for plotting. Files land under out_dir.
// cfg is only echoed into summary.json; aggregation derives its grids
// from the rows, so the figures path can pass nullptr.
class Emitter {
 public:
  Emitter(std::filesystem::path out_dir, std::set<EmitFormat> formats,
          const ScenarioConfig* cfg = nullptr);
  ~Emitter();

  void consume(const CityArrayResults& run);
  // Writes summary.json and the plotdata files; consume must not be
  // called afterwards. Safe to call once; the destructor calls it if the
  // caller did not.
  void finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs the scenario and emits in one go; the standard entry point for the
// CLI run subcommand.
void run_and_emit(const ScenarioConfig& cfg,
                  const std::filesystem::path& out_dir,
                  const std::set<EmitFormat>& formats,
                  const ProgressFn& progress = {});

// Reads previously written per-run CSV files back into rows, so figures
// can be rebuilt without re-running the sweep. Discovery is by filename
// pattern (<city>_<R>x<C>_selection.csv).
std::vector<std::pair<std::string, ArraySpec>> discover_runs(
    const std::filesystem::path& dir);
CityArrayResults read_run_csvs(const std::filesystem::path& dir,
                               const std::string& city_slug,
                               const ArraySpec& user_array);

// Single-timestep debug dump: satellite positions for both constellations
// (positions CSV schema) plus a JSON scene description with the visible
// sets, per-threshold selections and interference bounds.
void write_snapshot(const ScenarioConfig& cfg, const std::string& city_name,
                    double t_s, const std::filesystem::path& out_dir);

// Azimuth-cut gain pattern (angle_deg, gain_db) across the principal
// x-z plane, steered steer_off_deg away from boresight within that plane.
void write_pattern_csv(const ArraySpec& spec, double steer_off_deg,
                       double step_deg, std::ostream& out);

}  // namespace leocx
