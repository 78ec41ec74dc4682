#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "leocx/scenario.hpp"

namespace leocx {

namespace {

using nlohmann::json;

constexpr const char* kRobustStrategyName = "max_guaranteed_sinr";

constexpr const char* kSelectionHeader =
    "t_s,strategy,inr_th_db,p_star,s_choice,snr_p_db,sinr_p_db,snr_s_db,"
    "sinr_s_db,inr_p_db,n_feasible,n_useful,sep_deg,elev_s_deg,outage";
constexpr const char* kRobustHeader =
    "t_s,strategy,inr_th_db,p_star,s_choice,snr_p_db,sinr_p_db,snr_s_db,"
    "sinr_s_db,inr_p_db,n_feasible,n_useful,sep_deg,elev_s_deg,outage,"
    "gamma_deg,n_feasible_robust,guaranteed_sinr_db,guaranteed_sinr_norm_db";
constexpr const char* kBoundsHeader =
    "t_s,n_visible_p,n_visible_s,p_star,snr_p_db,inr_abs_max_db,"
    "inr_abs_min_db,inr_cond_max_db,inr_cond_min_db";
constexpr const char* kUsefulHeader = "t_s,inr_th_db,delta_db,n_useful";

// Grid-valued fields (times, thresholds, gammas, deltas) print with %.12g
// so short decimals round-trip exactly and figures can group rows by
// parsed value.
std::string fmt_grid(double v) {
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_metric(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, clamp_db_for_serialization(v));
  return buf;
}

std::string fmt_plain(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string run_stem(const std::string& city, const ArraySpec& arr) {
  return city_slug(city) + "_" + std::to_string(arr.rows) + "x" +
         std::to_string(arr.cols);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

void write_selection_fields(std::string& line, double t_s,
                            const char* strategy, double th, int p_star,
                            int s_choice, double snr_p, double sinr_p,
                            double snr_s, double sinr_s, double inr_p,
                            int n_feasible, int n_useful, double sep,
                            double elev, Outage outage, int prec) {
  line += fmt_grid(t_s);
  line += ',';
  line += strategy;
  line += ',';
  line += fmt_grid(th);
  line += ',';
  line += std::to_string(p_star);
  line += ',';
  line += std::to_string(s_choice);
  line += ',';
  line += fmt_metric(snr_p, prec);
  line += ',';
  line += fmt_metric(sinr_p, prec);
  line += ',';
  line += fmt_metric(snr_s, prec);
  line += ',';
  line += fmt_metric(sinr_s, prec);
  line += ',';
  line += fmt_metric(inr_p, prec);
  line += ',';
  line += std::to_string(n_feasible);
  line += ',';
  line += std::to_string(n_useful);
  line += ',';
  line += fmt_plain(sep, prec);
  line += ',';
  line += fmt_plain(elev, prec);
  line += ',';
  line += to_string(outage);
}

void write_selection_csv(const std::filesystem::path& p,
                         const CityArrayResults& run, int prec) {
  auto out = open_out(p);
  out << kSelectionHeader << '\n';
  std::string line;
  for (const SelectionRow& r : run.selection) {
    line.clear();
    write_selection_fields(line, r.t_s, to_string(r.strategy), r.inr_th_db,
                           r.p_star, r.s_choice, r.snr_p_db, r.sinr_p_db,
                           r.snr_s_db, r.sinr_s_db, r.inr_p_db, r.n_feasible,
                           r.n_useful, r.sep_deg, r.elev_s_deg, r.outage,
                           prec);
    line += '\n';
    out << line;
  }
}

void write_robust_csv(const std::filesystem::path& p,
                      const CityArrayResults& run, int prec) {
  auto out = open_out(p);
  out << kRobustHeader << '\n';
  std::string line;
  for (const RobustRow& r : run.robust) {
    line.clear();
    write_selection_fields(line, r.t_s, kRobustStrategyName, r.inr_th_db,
                           r.p_star, r.s_choice, r.snr_p_db, r.sinr_p_db,
                           r.snr_s_db, r.sinr_s_db, r.inr_p_db, r.n_feasible,
                           r.n_useful, r.sep_deg, r.elev_s_deg, r.outage,
                           prec);
    line += ',';
    line += fmt_grid(r.gamma_deg);
    line += ',';
    line += std::to_string(r.n_feasible_robust);
    line += ',';
    line += fmt_metric(r.guaranteed_sinr_db, prec);
    line += ',';
    line += fmt_metric(r.guaranteed_sinr_norm_db, prec);
    line += '\n';
    out << line;
  }
}

void write_bounds_csv(const std::filesystem::path& p,
                      const CityArrayResults& run, int prec) {
  auto out = open_out(p);
  out << kBoundsHeader << '\n';
  std::string line;
  for (const BoundsRow& r : run.bounds) {
    line.clear();
    line += fmt_grid(r.t_s);
    line += ',';
    line += std::to_string(r.n_visible_p);
    line += ',';
    line += std::to_string(r.n_visible_s);
    line += ',';
    line += std::to_string(r.p_star);
    line += ',';
    line += fmt_metric(r.snr_p_db, prec);
    line += ',';
    line += fmt_metric(r.inr_abs_max_db, prec);
    line += ',';
    line += fmt_metric(r.inr_abs_min_db, prec);
    line += ',';
    line += fmt_metric(r.inr_cond_max_db, prec);
    line += ',';
    line += fmt_metric(r.inr_cond_min_db, prec);
    line += '\n';
    out << line;
  }
}

void write_useful_csv(const std::filesystem::path& p,
                      const CityArrayResults& run) {
  auto out = open_out(p);
  out << kUsefulHeader << '\n';
  std::string line;
  for (const UsefulRow& r : run.useful) {
    line.clear();
    line += fmt_grid(r.t_s);
    line += ',';
    line += fmt_grid(r.inr_th_db);
    line += ',';
    line += fmt_grid(r.delta_db);
    line += ',';
    line += std::to_string(r.n_useful);
    line += '\n';
    out << line;
  }
}

// ---- aggregation ----------------------------------------------------------

struct QuantTable {
  std::vector<double> q;
  std::vector<double> v;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

QuantTable quant_table(const EmpiricalCdf& cdf) {
  QuantTable t;
  t.count = cdf.count();
  if (t.count == 0) return t;
  t.mean = cdf.mean();
  t.lo = cdf.min();
  t.hi = cdf.max();
  for (int i = 0; i <= 100; ++i) {
    double q = static_cast<double>(i) / 100.0;
    t.q.push_back(q);
    t.v.push_back(cdf.quantile(q));
  }
  return t;
}

json quant_json(const QuantTable& t) {
  if (t.count == 0) return json{{"count", 0}};
  return json{{"q", t.q},     {"v", t.v},   {"mean", t.mean},
              {"min", t.lo},  {"max", t.hi}, {"count", t.count}};
}

std::string key_of(const char* prefix, double value) {
  return std::string(prefix) + "_" + fmt_grid(value);
}

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double nearest_to(const std::vector<double>& grid, double target) {
  double best = grid.front();
  for (double g : grid) {
    if (std::abs(g - target) < std::abs(best - target)) best = g;
  }
  return best;
}

// The threshold the per-strategy SINR figures and the normalized
// guaranteed-SINR figure are keyed on, picked as the grid value closest
// to the throughput-derived default.
constexpr double kFigureThresholdDb = -12.2;

struct RunAgg {
  std::string slug;
  ArraySpec arr;
  double mean_vis_p = 0.0;
  double mean_vis_s = 0.0;
  std::map<std::string, QuantTable> bounds;
  std::vector<double> sel_thresholds;
  std::vector<std::string> strategies;  // first-appearance order
  std::map<double, EmpiricalCdf> fig6;  // threshold -> CDF of n_feasible
  double fig8_th = 0.0;
  std::map<std::string, QuantTable> fig8a;  // strategy -> sinr_p CDF
  std::map<std::string, QuantTable> fig8b;  // strategy -> sinr_s CDF
  std::map<std::string, double> outage_fraction;  // "strategy_th" keys
  std::map<std::pair<double, double>, std::pair<double, double>>
      useful_stats;  // (th, delta) -> (median, mean)
  std::vector<double> gammas;
  std::vector<double> robust_ths;
  std::vector<double> fig10_mean;      // [gamma-major x robust_th]
  std::vector<double> fig12b_median;   // same layout, NaN when empty
  double fig12a_th = 0.0;
  std::map<double, QuantTable> fig12a;  // gamma -> norm guaranteed CDF
};

RunAgg aggregate_run(const CityArrayResults& run) {
  RunAgg agg;
  agg.slug = city_slug(run.city);
  agg.arr = run.user_array;

  double sum_p = 0.0, sum_s = 0.0;
  for (const BoundsRow& r : run.bounds) {
    sum_p += r.n_visible_p;
    sum_s += r.n_visible_s;
  }
  if (!run.bounds.empty()) {
    sum_p /= static_cast<double>(run.bounds.size());
    sum_s /= static_cast<double>(run.bounds.size());
  }
  agg.mean_vis_p = sum_p;
  agg.mean_vis_s = sum_s;

  {
    std::vector<double> abs_max, abs_min, cond_max, cond_min;
    for (const BoundsRow& r : run.bounds) {
      if (r.n_visible_p > 0 && r.n_visible_s > 0) {
        abs_max.push_back(r.inr_abs_max_db);
        abs_min.push_back(r.inr_abs_min_db);
      }
      if (r.p_star >= 0 && r.n_visible_s > 0) {
        cond_max.push_back(r.inr_cond_max_db);
        cond_min.push_back(r.inr_cond_min_db);
      }
    }
    agg.bounds["inr_abs_max_db"] = quant_table(EmpiricalCdf(std::move(abs_max)));
    agg.bounds["inr_abs_min_db"] = quant_table(EmpiricalCdf(std::move(abs_min)));
    agg.bounds["inr_cond_max_db"] =
        quant_table(EmpiricalCdf(std::move(cond_max)));
    agg.bounds["inr_cond_min_db"] =
        quant_table(EmpiricalCdf(std::move(cond_min)));
  }

  if (!run.selection.empty()) {
    std::vector<double> ths;
    for (const SelectionRow& r : run.selection) ths.push_back(r.inr_th_db);
    agg.sel_thresholds = sorted_unique(std::move(ths));
    for (const SelectionRow& r : run.selection) {
      std::string name = to_string(r.strategy);
      if (std::find(agg.strategies.begin(), agg.strategies.end(), name) ==
          agg.strategies.end()) {
        agg.strategies.push_back(name);
      }
    }
    agg.fig8_th = nearest_to(agg.sel_thresholds, kFigureThresholdDb);

    // n_feasible does not depend on the strategy, so one strategy's rows
    // carry the feasible-count distribution.
    const std::string& first = agg.strategies.front();
    for (double th : agg.sel_thresholds) {
      std::vector<double> ns;
      for (const SelectionRow& r : run.selection) {
        if (to_string(r.strategy) == first && r.inr_th_db == th &&
            r.p_star >= 0) {
          ns.push_back(static_cast<double>(r.n_feasible));
        }
      }
      agg.fig6.emplace(th, EmpiricalCdf(std::move(ns)));
    }

    for (const std::string& name : agg.strategies) {
      std::vector<double> sinr_p, sinr_s;
      for (const SelectionRow& r : run.selection) {
        if (to_string(r.strategy) != name) continue;
        if (r.inr_th_db != agg.fig8_th) continue;
        if (r.outage != Outage::none) continue;
        sinr_p.push_back(r.sinr_p_db);
        sinr_s.push_back(r.sinr_s_db);
      }
      agg.fig8a[name] = quant_table(EmpiricalCdf(std::move(sinr_p)));
      agg.fig8b[name] = quant_table(EmpiricalCdf(std::move(sinr_s)));
    }

    for (const std::string& name : agg.strategies) {
      for (double th : agg.sel_thresholds) {
        std::size_t total = 0, out = 0;
        for (const SelectionRow& r : run.selection) {
          if (to_string(r.strategy) != name || r.inr_th_db != th) continue;
          ++total;
          if (r.outage != Outage::none) ++out;
        }
        if (total > 0) {
          agg.outage_fraction[name + "_" + fmt_grid(th)] =
              static_cast<double>(out) / static_cast<double>(total);
        }
      }
    }
  }

  if (!run.useful.empty()) {
    std::map<std::pair<double, double>, std::vector<double>> groups;
    for (const UsefulRow& r : run.useful) {
      groups[{r.inr_th_db, r.delta_db}].push_back(
          static_cast<double>(r.n_useful));
    }
    for (auto& [key, samples] : groups) {
      EmpiricalCdf cdf(std::move(samples));
      agg.useful_stats[key] = {cdf.median(), cdf.mean()};
    }
  }

  if (!run.robust.empty()) {
    std::vector<double> gs, ths;
    for (const RobustRow& r : run.robust) {
      gs.push_back(r.gamma_deg);
      ths.push_back(r.inr_th_db);
    }
    agg.gammas = sorted_unique(std::move(gs));
    agg.robust_ths = sorted_unique(std::move(ths));
    agg.fig12a_th = nearest_to(agg.robust_ths, kFigureThresholdDb);

    agg.fig10_mean.assign(agg.gammas.size() * agg.robust_ths.size(), 0.0);
    agg.fig12b_median.assign(agg.gammas.size() * agg.robust_ths.size(),
                             std::numeric_limits<double>::quiet_NaN());
    for (std::size_t gi = 0; gi < agg.gammas.size(); ++gi) {
      for (std::size_t ri = 0; ri < agg.robust_ths.size(); ++ri) {
        std::vector<double> feas, guar;
        for (const RobustRow& r : run.robust) {
          if (r.gamma_deg != agg.gammas[gi] ||
              r.inr_th_db != agg.robust_ths[ri]) {
            continue;
          }
          if (r.p_star >= 0) {
            feas.push_back(static_cast<double>(r.n_feasible_robust));
          }
          if (r.outage == Outage::none) guar.push_back(r.guaranteed_sinr_db);
        }
        std::size_t cell = gi * agg.robust_ths.size() + ri;
        if (!feas.empty()) {
          agg.fig10_mean[cell] = EmpiricalCdf(std::move(feas)).mean();
        }
        if (!guar.empty()) {
          agg.fig12b_median[cell] = EmpiricalCdf(std::move(guar)).median();
        }
      }
    }

    for (double g : agg.gammas) {
      std::vector<double> norm;
      for (const RobustRow& r : run.robust) {
        if (r.gamma_deg == g && r.inr_th_db == agg.fig12a_th &&
            r.outage == Outage::none) {
          norm.push_back(r.guaranteed_sinr_norm_db);
        }
      }
      agg.fig12a.emplace(g, quant_table(EmpiricalCdf(std::move(norm))));
    }
  }

  return agg;
}

json agg_json(const RunAgg& agg) {
  json j;
  j["visibility"] = json{{"mean_n_visible_p", agg.mean_vis_p},
                         {"mean_n_visible_s", agg.mean_vis_s}};
  json bounds;
  for (const auto& [name, table] : agg.bounds) bounds[name] = quant_json(table);
  j["bounds"] = bounds;

  json fig6;
  for (const auto& [th, cdf] : agg.fig6) {
    fig6[key_of("th", th)] = quant_json(quant_table(cdf));
  }
  j["fig6"] = fig6;

  json fig8a, fig8b;
  for (const auto& [name, table] : agg.fig8a) fig8a[name] = quant_json(table);
  for (const auto& [name, table] : agg.fig8b) fig8b[name] = quant_json(table);
  j["fig8a"] = json{{"inr_th_db", agg.fig8_th}, {"by_strategy", fig8a}};
  j["fig8b"] = json{{"inr_th_db", agg.fig8_th}, {"by_strategy", fig8b}};

  json outage;
  for (const auto& [key, frac] : agg.outage_fraction) outage[key] = frac;
  j["outage_fraction"] = outage;

  json useful;
  for (const auto& [key, stat] : agg.useful_stats) {
    useful[key_of("th", key.first)][key_of("delta", key.second)] =
        json{{"median", stat.first}, {"mean", stat.second}};
  }
  j["useful"] = useful;

  if (!agg.gammas.empty()) {
    auto grid_json = [&](const std::vector<double>& cells) {
      json rows = json::array();
      for (std::size_t gi = 0; gi < agg.gammas.size(); ++gi) {
        json row = json::array();
        for (std::size_t ri = 0; ri < agg.robust_ths.size(); ++ri) {
          double v = cells[gi * agg.robust_ths.size() + ri];
          if (std::isnan(v)) {
            row.push_back(nullptr);
          } else {
            row.push_back(v);
          }
        }
        rows.push_back(row);
      }
      return rows;
    };
    j["fig10"] = json{{"gammas_deg", agg.gammas},
                      {"inr_thresholds_db", agg.robust_ths},
                      {"mean_n_feasible_robust", grid_json(agg.fig10_mean)}};
    j["fig12b"] = json{{"gammas_deg", agg.gammas},
                       {"inr_thresholds_db", agg.robust_ths},
                       {"median_guaranteed_sinr_db",
                        grid_json(agg.fig12b_median)}};
    json fig12a;
    for (const auto& [g, table] : agg.fig12a) {
      fig12a[key_of("gamma", g)] = quant_json(table);
    }
    j["fig12a"] = json{{"inr_th_db", agg.fig12a_th},
                       {"by_gamma", fig12a}};
  }
  return j;
}

void write_plotdata(const std::filesystem::path& plot_dir, const RunAgg& agg) {
  std::string stem =
      agg.slug + "_" + std::to_string(agg.arr.rows) + "x" +
      std::to_string(agg.arr.cols);

  if (!agg.fig6.empty()) {
    auto out = open_out(plot_dir / ("fig6_" + stem + ".csv"));
    out << "inr_th_db,n_feasible,cdf\n";
    for (const auto& [th, cdf] : agg.fig6) {
      const auto& s = cdf.sorted_samples();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i + 1] == s[i]) continue;  // last of ties
        out << fmt_grid(th) << ',' << fmt_grid(s[i]) << ','
            << fmt_plain(static_cast<double>(i + 1) /
                             static_cast<double>(s.size()),
                         6)
            << '\n';
      }
    }
  }

  auto write_strategy_cdfs = [&](const char* name,
                                 const std::map<std::string, QuantTable>& m) {
    if (m.empty()) return;
    auto out = open_out(plot_dir / (std::string(name) + "_" + stem + ".csv"));
    out << "strategy,q,value_db\n";
    for (const auto& [strategy, table] : m) {
      for (std::size_t i = 0; i < table.q.size(); ++i) {
        out << strategy << ',' << fmt_plain(table.q[i], 6) << ','
            << fmt_plain(table.v[i], 6) << '\n';
      }
    }
  };
  write_strategy_cdfs("fig8a", agg.fig8a);
  write_strategy_cdfs("fig8b", agg.fig8b);

  if (!agg.bounds.empty()) {
    auto out = open_out(plot_dir / ("bounds_" + stem + ".csv"));
    out << "metric,q,value_db\n";
    for (const auto& [metric, table] : agg.bounds) {
      for (std::size_t i = 0; i < table.q.size(); ++i) {
        out << metric << ',' << fmt_plain(table.q[i], 6) << ','
            << fmt_plain(table.v[i], 6) << '\n';
      }
    }
  }

  if (!agg.useful_stats.empty()) {
    auto out = open_out(plot_dir / ("useful_" + stem + ".csv"));
    out << "inr_th_db,delta_db,median_n_useful,mean_n_useful\n";
    for (const auto& [key, stat] : agg.useful_stats) {
      out << fmt_grid(key.first) << ',' << fmt_grid(key.second) << ','
          << fmt_grid(stat.first) << ',' << fmt_plain(stat.second, 6) << '\n';
    }
  }

  if (!agg.gammas.empty()) {
    {
      auto out = open_out(plot_dir / ("fig10_" + stem + ".csv"));
      out << "gamma_deg,inr_th_db,mean_n_feasible_robust\n";
      for (std::size_t gi = 0; gi < agg.gammas.size(); ++gi) {
        for (std::size_t ri = 0; ri < agg.robust_ths.size(); ++ri) {
          out << fmt_grid(agg.gammas[gi]) << ','
              << fmt_grid(agg.robust_ths[ri]) << ','
              << fmt_plain(agg.fig10_mean[gi * agg.robust_ths.size() + ri], 6)
              << '\n';
        }
      }
    }
    {
      auto out = open_out(plot_dir / ("fig12b_" + stem + ".csv"));
      out << "gamma_deg,inr_th_db,median_guaranteed_sinr_db\n";
      for (std::size_t gi = 0; gi < agg.gammas.size(); ++gi) {
        for (std::size_t ri = 0; ri < agg.robust_ths.size(); ++ri) {
          double v = agg.fig12b_median[gi * agg.robust_ths.size() + ri];
          out << fmt_grid(agg.gammas[gi]) << ','
              << fmt_grid(agg.robust_ths[ri]) << ','
              << (std::isnan(v) ? std::string("nan") : fmt_plain(v, 6))
              << '\n';
        }
      }
    }
    {
      auto out = open_out(plot_dir / ("fig12a_" + stem + ".csv"));
      out << "gamma_deg,q,guaranteed_sinr_norm_db\n";
      for (const auto& [g, table] : agg.fig12a) {
        for (std::size_t i = 0; i < table.q.size(); ++i) {
          out << fmt_grid(g) << ',' << fmt_plain(table.q[i], 6) << ','
              << fmt_plain(table.v[i], 6) << '\n';
        }
      }
    }
  }
}

}  // namespace

// ---- Emitter ----------------------------------------------------------------

std::optional<EmitFormat> emit_format_from_string(const std::string& name) {
  if (name == "csv") return EmitFormat::csv;
  if (name == "json") return EmitFormat::json;
  if (name == "plotdata") return EmitFormat::plotdata;
  return std::nullopt;
}

struct Emitter::Impl {
  std::filesystem::path out_dir;
  std::set<EmitFormat> formats;
  std::optional<ScenarioConfig> cfg;
  int prec = 6;
  std::vector<RunAgg> aggs;
  bool finished = false;
};

Emitter::Emitter(std::filesystem::path out_dir, std::set<EmitFormat> formats,
                 const ScenarioConfig* cfg)
    : impl_(new Impl) {
  impl_->out_dir = std::move(out_dir);
  impl_->formats = std::move(formats);
  if (cfg) {
    impl_->cfg = *cfg;
    impl_->prec = cfg->emit.float_precision;
  }
  std::filesystem::create_directories(impl_->out_dir);
  if (impl_->formats.count(EmitFormat::plotdata)) {
    std::filesystem::create_directories(impl_->out_dir / "plot");
  }
}

Emitter::~Emitter() {
  try {
    finish();
  } catch (...) {
    // Destructors must not throw; callers wanting the error call finish().
  }
}

void Emitter::consume(const CityArrayResults& run) {
  if (impl_->finished) {
    throw std::logic_error("Emitter::consume after finish");
  }
  std::string stem = run_stem(run.city, run.user_array);
  if (impl_->formats.count(EmitFormat::csv)) {
    write_selection_csv(impl_->out_dir / (stem + "_selection.csv"), run,
                        impl_->prec);
    write_robust_csv(impl_->out_dir / (stem + "_robust.csv"), run,
                     impl_->prec);
    write_bounds_csv(impl_->out_dir / (stem + "_bounds.csv"), run,
                     impl_->prec);
    write_useful_csv(impl_->out_dir / (stem + "_useful.csv"), run);
  }
  if (impl_->formats.count(EmitFormat::json) ||
      impl_->formats.count(EmitFormat::plotdata)) {
    impl_->aggs.push_back(aggregate_run(run));
  }
}

void Emitter::finish() {
  if (impl_->finished) return;
  impl_->finished = true;

  if (impl_->formats.count(EmitFormat::json)) {
    json summary;
    if (impl_->cfg) {
      const ScenarioConfig& cfg = *impl_->cfg;
      json cities = json::array();
      for (const auto& c : cfg.cities) cities.push_back(city_slug(c.name));
      summary["scenario"] = json{
          {"duration_s", cfg.duration_s},
          {"step_s", cfg.step_s},
          {"eps_min_deg", cfg.eps_min_deg},
          {"user_separation_m", cfg.user_separation_m},
          {"cities", cities},
          {"primary_satellites", cfg.primary.satellite_count()},
          {"secondary_satellites", cfg.secondary.satellite_count()},
      };
    }
    json runs;
    for (const RunAgg& agg : impl_->aggs) {
      std::string arr_key = std::to_string(agg.arr.rows) + "x" +
                            std::to_string(agg.arr.cols);
      runs[agg.slug][arr_key] = agg_json(agg);
    }
    summary["runs"] = runs;
    auto out = open_out(impl_->out_dir / "summary.json");
    out << summary.dump(2) << "\n";
  }

  if (impl_->formats.count(EmitFormat::plotdata)) {
    for (const RunAgg& agg : impl_->aggs) {
      write_plotdata(impl_->out_dir / "plot", agg);
    }
  }
}

void run_and_emit(const ScenarioConfig& cfg,
                  const std::filesystem::path& out_dir,
                  const std::set<EmitFormat>& formats,
                  const ProgressFn& progress) {
  Emitter emitter(out_dir, formats, &cfg);
  run_scenario(
      cfg,
      [&emitter](CityArrayResults&& run) { emitter.consume(run); },
      progress);
  emitter.finish();
}

// ---- reading CSVs back ------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) {
    throw std::runtime_error(where + ": bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  return static_cast<int>(parse_double(s, where));
}

Outage parse_outage(const std::string& s, const std::string& where) {
  if (s == "none") return Outage::none;
  if (s == "no_visible") return Outage::no_visible;
  if (s == "none_feasible") return Outage::none_feasible;
  throw std::runtime_error(where + ": bad outage '" + s + "'");
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  std::size_t line_no = 0;

  CsvReader(const std::filesystem::path& p, const char* expected_header)
      : in(p), path(p.string()) {
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string header;
    if (!std::getline(in, header) || header != expected_header) {
      throw std::runtime_error(path + ": unexpected header");
    }
    line_no = 1;
  }

  bool next(std::vector<std::string>& fields, std::size_t expected) {
    std::string line;
    if (!std::getline(in, line)) return false;
    ++line_no;
    fields = split_csv_line(line);
    if (fields.size() != expected) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(expected) +
                               " fields");
    }
    return true;
  }

  std::string where() const { return path + ":" + std::to_string(line_no); }
};

}  // namespace

std::vector<std::pair<std::string, ArraySpec>> discover_runs(
    const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, ArraySpec>> out;
  std::regex pattern(R"(^(.+)_(\d+)x(\d+)_selection\.csv$)");
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch m;
    std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) {
      ArraySpec arr;
      arr.rows = std::atoi(m[2].str().c_str());
      arr.cols = std::atoi(m[3].str().c_str());
      out.emplace_back(m[1].str(), arr);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.rows != b.second.rows) return a.second.rows < b.second.rows;
    return a.second.cols < b.second.cols;
  });
  return out;
}

CityArrayResults read_run_csvs(const std::filesystem::path& dir,
                               const std::string& slug,
                               const ArraySpec& user_array) {
  CityArrayResults run;
  run.city = slug;
  run.user_array = user_array;
  std::string stem = run_stem(slug, user_array);

  {
    CsvReader r(dir / (stem + "_selection.csv"), kSelectionHeader);
    std::vector<std::string> f;
    while (r.next(f, 15)) {
      SelectionRow row;
      row.t_s = parse_double(f[0], r.where());
      auto strategy = strategy_from_string(f[1]);
      if (!strategy) {
        throw std::runtime_error(r.where() + ": bad strategy '" + f[1] + "'");
      }
      row.strategy = *strategy;
      row.inr_th_db = parse_double(f[2], r.where());
      row.p_star = parse_int(f[3], r.where());
      row.s_choice = parse_int(f[4], r.where());
      row.snr_p_db = parse_double(f[5], r.where());
      row.sinr_p_db = parse_double(f[6], r.where());
      row.snr_s_db = parse_double(f[7], r.where());
      row.sinr_s_db = parse_double(f[8], r.where());
      row.inr_p_db = parse_double(f[9], r.where());
      row.n_feasible = parse_int(f[10], r.where());
      row.n_useful = parse_int(f[11], r.where());
      row.sep_deg = parse_double(f[12], r.where());
      row.elev_s_deg = parse_double(f[13], r.where());
      row.outage = parse_outage(f[14], r.where());
      run.selection.push_back(row);
    }
  }
  {
    CsvReader r(dir / (stem + "_robust.csv"), kRobustHeader);
    std::vector<std::string> f;
    while (r.next(f, 19)) {
      RobustRow row;
      row.t_s = parse_double(f[0], r.where());
      if (f[1] != kRobustStrategyName) {
        throw std::runtime_error(r.where() + ": bad strategy '" + f[1] + "'");
      }
      row.inr_th_db = parse_double(f[2], r.where());
      row.p_star = parse_int(f[3], r.where());
      row.s_choice = parse_int(f[4], r.where());
      row.snr_p_db = parse_double(f[5], r.where());
      row.sinr_p_db = parse_double(f[6], r.where());
      row.snr_s_db = parse_double(f[7], r.where());
      row.sinr_s_db = parse_double(f[8], r.where());
      row.inr_p_db = parse_double(f[9], r.where());
      row.n_feasible = parse_int(f[10], r.where());
      row.n_useful = parse_int(f[11], r.where());
      row.sep_deg = parse_double(f[12], r.where());
      row.elev_s_deg = parse_double(f[13], r.where());
      row.outage = parse_outage(f[14], r.where());
      row.gamma_deg = parse_double(f[15], r.where());
      row.n_feasible_robust = parse_int(f[16], r.where());
      row.guaranteed_sinr_db = parse_double(f[17], r.where());
      row.guaranteed_sinr_norm_db = parse_double(f[18], r.where());
      run.robust.push_back(row);
    }
  }
  {
    CsvReader r(dir / (stem + "_bounds.csv"), kBoundsHeader);
    std::vector<std::string> f;
    while (r.next(f, 9)) {
      BoundsRow row;
      row.t_s = parse_double(f[0], r.where());
      row.n_visible_p = parse_int(f[1], r.where());
      row.n_visible_s = parse_int(f[2], r.where());
      row.p_star = parse_int(f[3], r.where());
      row.snr_p_db = parse_double(f[4], r.where());
      row.inr_abs_max_db = parse_double(f[5], r.where());
      row.inr_abs_min_db = parse_double(f[6], r.where());
      row.inr_cond_max_db = parse_double(f[7], r.where());
      row.inr_cond_min_db = parse_double(f[8], r.where());
      run.bounds.push_back(row);
    }
  }
  {
    CsvReader r(dir / (stem + "_useful.csv"), kUsefulHeader);
    std::vector<std::string> f;
    while (r.next(f, 4)) {
      UsefulRow row;
      row.t_s = parse_double(f[0], r.where());
      row.inr_th_db = parse_double(f[1], r.where());
      row.delta_db = parse_double(f[2], r.where());
      row.n_useful = parse_int(f[3], r.where());
      run.useful.push_back(row);
    }
  }
  return run;
}

// ---- snapshot & pattern -----------------------------------------------------

void write_snapshot(const ScenarioConfig& cfg, const std::string& city_name,
                    double t_s, const std::filesystem::path& out_dir) {
  validate(cfg);
  const CitySpec* city = nullptr;
  for (const auto& c : cfg.cities) {
    if (c.name == city_name || city_slug(c.name) == city_slug(city_name)) {
      city = &c;
      break;
    }
  }
  if (!city) {
    throw std::runtime_error("write_snapshot: unknown city '" + city_name +
                             "'");
  }

  std::filesystem::create_directories(out_dir);
  Constellation primary = Constellation::build(cfg.primary);
  Constellation secondary = Constellation::build(cfg.secondary);

  auto write_positions = [&](const Constellation& c, const char* name) {
    auto out = open_out(out_dir / (std::string("positions_") + name + ".csv"));
    out << "t_s,sat_id,x_m,y_m,z_m\n";
    for (const auto& sat : c.sats) {
      Vec3 p = propagate_ecef(sat, t_s);
      out << fmt_grid(t_s) << ',' << sat.id << ','
          << fmt_plain(p.x, cfg.emit.float_precision) << ','
          << fmt_plain(p.y, cfg.emit.float_precision) << ','
          << fmt_plain(p.z, cfg.emit.float_precision) << '\n';
    }
  };
  write_positions(primary, "primary");
  write_positions(secondary, "secondary");

  GroundUser u{city->name, city->lat_deg, city->lon_deg,
               cfg.user_arrays.front(), cfg.radio.noise_figure_db};
  SceneConfig scfg{cfg.radio, cfg.sat_array, cfg.user_arrays.front(),
                   cfg.eps_min_deg};
  SceneSnapshot scene =
      make_scene(primary, secondary, u, u, t_s, scfg);

  json j;
  j["t_s"] = t_s;
  j["city"] = city_slug(city->name);
  j["user_array"] = std::to_string(cfg.user_arrays.front().rows) + "x" +
                    std::to_string(cfg.user_arrays.front().cols);
  j["u_pos_m"] = {scene.u_pos_m.x, scene.u_pos_m.y, scene.u_pos_m.z};

  auto sats_json = [&](const std::vector<SceneSatellite>& sats,
                       const std::vector<LinkGeometry>& geo,
                       const std::vector<double>& snr_lin) {
    json arr = json::array();
    for (std::size_t i = 0; i < sats.size(); ++i) {
      arr.push_back(json{{"id", sats[i].id},
                         {"altitude_km", sats[i].altitude_km},
                         {"elevation_deg", geo[i].elevation_deg},
                         {"range_m", geo[i].range_m},
                         {"snr_db", clamp_db_for_serialization(
                                        to_db(snr_lin[i]))}});
    }
    return arr;
  };
  j["visible_primary"] = sats_json(scene.primary, scene.geo_up, scene.snr_u_lin);
  j["visible_secondary"] =
      sats_json(scene.secondary, scene.geo_vs, scene.snr_v_lin);

  auto p_star = select_primary(scene);
  if (p_star) {
    j["p_star"] = scene.primary[*p_star].id;
    if (auto abs = absolute_inr_bounds(scene)) {
      j["inr_abs_max_db"] = clamp_db_for_serialization(abs->max_db);
      j["inr_abs_min_db"] = clamp_db_for_serialization(abs->min_db);
    }
    if (auto cond = conditional_inr_bounds(scene, *p_star)) {
      j["inr_cond_max_db"] = clamp_db_for_serialization(cond->max_db);
      j["inr_cond_min_db"] = clamp_db_for_serialization(cond->min_db);
    }
    json selections = json::array();
    for (Strategy strategy : cfg.strategies) {
      for (double th_db : cfg.inr_thresholds_db) {
        SelectionOutcome oc =
            select_secondary(scene, *p_star, strategy,
                             ProtectionThreshold::from_db(th_db),
                             cfg.useful_delta_db);
        selections.push_back(json{
            {"strategy", to_string(oc.strategy)},
            {"inr_th_db", th_db},
            {"s_choice", oc.secondary_id},
            {"outage", to_string(oc.outage)},
            {"sinr_p_db", clamp_db_for_serialization(oc.sinr_u_db)},
            {"sinr_s_db", clamp_db_for_serialization(oc.sinr_v_db)},
            {"n_feasible", oc.feasible_count},
        });
      }
    }
    j["selections"] = selections;

    json robust = json::array();
    for (double gamma : cfg.gammas_deg) {
      auto candidates = candidate_primary_set(scene, *p_star, gamma);
      for (double th_db : cfg.robust_thresholds_db) {
        RobustOutcome oc = max_guaranteed_sinr(
            scene, candidates, gamma, ProtectionThreshold::from_db(th_db),
            cfg.robust_site);
        robust.push_back(json{
            {"gamma_deg", gamma},
            {"inr_th_db", th_db},
            {"s_choice", oc.secondary_id},
            {"outage", to_string(oc.outage)},
            {"n_candidates", oc.candidate_count},
            {"n_feasible_robust", oc.feasible_count},
            {"guaranteed_sinr_db",
             clamp_db_for_serialization(oc.guaranteed_sinr_db)},
        });
      }
    }
    j["robust"] = robust;
  } else {
    j["p_star"] = nullptr;
  }

  auto out = open_out(out_dir / "scene.json");
  out << j.dump(2) << "\n";
}

void write_pattern_csv(const ArraySpec& spec, double steer_off_deg,
                       double step_deg, std::ostream& out) {
  validate(spec);
  if (!(step_deg > 0.0)) {
    throw std::invalid_argument("write_pattern_csv: step_deg must be positive");
  }
  if (std::abs(steer_off_deg) >= 90.0) {
    throw std::invalid_argument(
        "write_pattern_csv: steer_off_deg must be in (-90, 90)");
  }
  double steer_rad = steer_off_deg * kRadPerDeg;
  Vec3 steer{std::sin(steer_rad), 0.0, std::cos(steer_rad)};
  out << "angle_deg,gain_db\n";
  // Inclusive sweep across the x-z principal plane.
  long n_steps = std::lround(180.0 / step_deg);
  for (long i = 0; i <= n_steps; ++i) {
    double angle = -90.0 + static_cast<double>(i) * step_deg;
    if (angle > 90.0) angle = 90.0;
    double rad = angle * kRadPerDeg;
    Vec3 eval{std::sin(rad), 0.0, std::cos(rad)};
    double g = steered_gain_dbi(spec, steer, eval);
    out << fmt_grid(angle) << ','
        << fmt_plain(clamp_db_for_serialization(g), 6) << '\n';
  }
}

}  // namespace leocx
