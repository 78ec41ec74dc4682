#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leocx/scenario.hpp"

namespace {

leocx::ScenarioConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return leocx::default_config();
  return leocx::load_config(config_path);
}

// --city filters accept either the configured name or its slug.
void filter_cities(leocx::ScenarioConfig& cfg,
                   const std::vector<std::string>& cities) {
  if (cities.empty()) return;
  std::vector<leocx::CitySpec> kept;
  for (const auto& c : cfg.cities) {
    for (const auto& want : cities) {
      if (c.name == want || leocx::city_slug(c.name) == leocx::city_slug(want)) {
        kept.push_back(c);
        break;
      }
    }
  }
  if (kept.empty()) {
    throw std::runtime_error("no configured city matches the --city filter");
  }
  cfg.cities = std::move(kept);
}

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::vector<std::string>& cities, int threads,
                const std::vector<std::string>& formats, bool quiet) {
  leocx::ScenarioConfig cfg = load_or_default(config_path);
  filter_cities(cfg, cities);
  if (threads >= 0) cfg.threads = threads;

  std::set<leocx::EmitFormat> fmts;
  if (formats.empty()) {
    fmts = {leocx::EmitFormat::csv, leocx::EmitFormat::json,
            leocx::EmitFormat::plotdata};
  } else {
    for (const auto& f : formats) {
      auto fmt = leocx::emit_format_from_string(f);
      if (!fmt) {
        std::cerr << "unknown format '" << f
                  << "' (expected csv, json or plotdata)\n";
        return 2;
      }
      fmts.insert(*fmt);
    }
  }

  leocx::ProgressFn progress;
  if (!quiet) {
    progress = [](const std::string& msg) { std::cerr << msg << "\n"; };
  }
  auto start = std::chrono::steady_clock::now();
  leocx::run_and_emit(cfg, out_dir, fmts, progress);
  if (!quiet) {
    auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - start);
    std::cerr << "done in " << elapsed.count() << " s, output in " << out_dir
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Deterministic simulator of in-band downlink coexistence between two "
      "dense LEO constellations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> cities;
  int threads = -1;
  std::vector<std::string> formats;
  bool quiet = false;

  CLI::App* run = app.add_subcommand(
      "run", "Run the configured 24 h sweep and emit CSV/JSON results");
  run->add_option("--config", config_path,
                  "Scenario config JSON (defaults applied field by field)");
  run->add_option("--out-dir", out_dir, "Output directory (default: out)");
  run->add_option("--city", cities,
                  "Only simulate the named cities (repeatable)");
  run->add_option("--threads", threads,
                  "Worker threads (default: LEOCX_THREADS or all cores)");
  run->add_option("--format", formats,
                  "Emit formats: csv, json, plotdata (default: all)");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  std::string snap_city;
  double snap_t = 0.0;
  CLI::App* snapshot = app.add_subcommand(
      "snapshot",
      "Dump satellite positions and the full scene at one timestep");
  snapshot->add_option("--config", config_path, "Scenario config JSON");
  snapshot->add_option("--city", snap_city, "City name or slug")->required();
  snapshot->add_option("--t", snap_t, "Time since epoch in seconds");
  snapshot->add_option("--out-dir", out_dir, "Output directory");

  int pat_rows = 64;
  int pat_cols = 64;
  double pat_steer = 0.0;
  double pat_step = 0.1;
  std::string pat_out;
  CLI::App* pattern = app.add_subcommand(
      "pattern", "Emit an azimuth-cut gain pattern CSV (angle_deg, gain_db)");
  pattern->add_option("--rows", pat_rows, "Array rows (default 64)");
  pattern->add_option("--cols", pat_cols, "Array cols (default 64)");
  pattern->add_option("--steer-deg", pat_steer,
                      "Steering angle off boresight within the cut plane");
  pattern->add_option("--step-deg", pat_step, "Angular step (default 0.1)");
  pattern->add_option("--out", pat_out, "Output file (default: stdout)");

  std::string fig_in;
  CLI::App* figures = app.add_subcommand(
      "figures", "Rebuild summary.json and plot data from existing CSVs");
  figures->add_option("--in-dir", fig_in, "Directory with *_selection.csv etc.")
      ->required();
  figures->add_option("--out-dir", out_dir,
                      "Output directory (default: same as --in-dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(config_path, out_dir, cities, threads, formats,
                         quiet);
    }
    if (snapshot->parsed()) {
      leocx::ScenarioConfig cfg = load_or_default(config_path);
      leocx::write_snapshot(cfg, snap_city, snap_t, out_dir);
      return 0;
    }
    if (pattern->parsed()) {
      leocx::ArraySpec spec;
      spec.rows = pat_rows;
      spec.cols = pat_cols;
      if (pat_out.empty()) {
        leocx::write_pattern_csv(spec, pat_steer, pat_step, std::cout);
      } else {
        std::ofstream out(pat_out);
        if (!out) {
          std::cerr << "cannot open " << pat_out << " for writing\n";
          return 1;
        }
        leocx::write_pattern_csv(spec, pat_steer, pat_step, out);
      }
      return 0;
    }
    if (figures->parsed()) {
      std::string dest = out_dir == "out" ? fig_in : out_dir;
      auto runs = leocx::discover_runs(fig_in);
      if (runs.empty()) {
        std::cerr << "no *_selection.csv runs found in " << fig_in << "\n";
        return 1;
      }
      leocx::Emitter emitter(
          dest, {leocx::EmitFormat::json, leocx::EmitFormat::plotdata});
      for (const auto& [slug, arr] : runs) {
        emitter.consume(leocx::read_run_csvs(fig_in, slug, arr));
      }
      emitter.finish();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
