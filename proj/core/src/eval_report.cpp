#include <map>
#include <sstream>

#include "eventrec/eval.hpp"

namespace eventrec {
namespace {

constexpr const char* kEvalFormat = "eventrec-eval";
constexpr int kEvalVersion = 1;

using nlohmann::json;

json footprint_value(std::size_t footprint) {
  return footprint == kFullFootprint ? json("all") : json(footprint);
}

std::string footprint_text(std::size_t footprint) {
  return footprint == kFullFootprint ? "all" : std::to_string(footprint);
}

std::string series_name(const FootprintRow& row) {
  return row.method == "raw" ? "raw" : "k=" + std::to_string(row.rank);
}

json cdf_json(const std::vector<CdfPoint>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back({{"footprint", p.footprint}, {"cumulative", p.cumulative}});
  return out;
}

json cell_json(const FusionCell& cell) {
  return {{"label", cell.label},
          {"source", to_string(cell.source)},
          {"mean", cell.mean},
          {"stddev", cell.stddev},
          {"users", cell.users}};
}

}  // namespace

json to_json(const FootprintExperimentResult& result) {
  const auto& c = result.config;
  json footprints = json::array();
  for (const auto f : c.footprint_sizes) footprints.push_back(footprint_value(f));
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"method", r.method},
                    {"rank", r.rank},
                    {"footprint", footprint_value(r.footprint)},
                    {"mean_auc", r.mean_auc},
                    {"evaluated", r.evaluated}});
  }
  return {{"format", kEvalFormat},
          {"version", kEvalVersion},
          {"experiment", "footprint"},
          {"config",
           {{"train_size", c.train_size},
            {"test_size", c.test_size},
            {"footprint_sizes", footprints},
            {"ranks", c.ranks},
            {"include_raw_baseline", c.include_raw_baseline},
            {"seed", c.seed}}},
          {"skipped", result.skipped},
          {"rows", rows}};
}

std::string to_csv(const FootprintExperimentResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "method,rank,footprint,mean_auc,evaluated\n";
  for (const auto& r : result.rows) {
    out << r.method << ',' << r.rank << ',' << footprint_text(r.footprint) << ',' << r.mean_auc << ','
        << r.evaluated << '\n';
  }
  return out.str();
}

json plot_description(const FootprintExperimentResult& result) {
  std::map<std::pair<int, std::size_t>, json> series;  // raw sorts after every rank
  for (const auto& r : result.rows) {
    auto& s = series[{r.method == "raw" ? 1 : 0, r.rank}];
    if (s.is_null()) s = {{"name", series_name(r)}, {"x", json::array()}, {"y", json::array()}};
    s["x"].push_back(footprint_value(r.footprint));
    s["y"].push_back(r.mean_auc);
  }
  json curves = json::array();
  for (auto& [key, s] : series) curves.push_back(std::move(s));
  return {{"format", kEvalFormat},
          {"version", kEvalVersion},
          {"kind", "line"},
          {"title", "AUC by digital footprint size"},
          {"x", {{"label", "footprint size"}, {"scale", "log2"}}},
          {"y", {{"label", "mean AUC"}, {"scale", "linear"}}},
          {"series", curves}};
}

json to_json(const LongTailReport& r) {
  return {{"format", kEvalFormat},
          {"version", kEvalVersion},
          {"experiment", "longtail"},
          {"artist_count", r.artist_count},
          {"event_artist_count", r.event_artist_count},
          {"top_coverage_count", r.top_coverage_count},
          {"top_coverage_fraction", r.top_coverage_fraction},
          {"event_artist_deciles", r.event_artist_deciles},
          {"bottom_three_decile_share", r.bottom_three_decile_share},
          {"footprint_rank_correlation", r.footprint_rank_correlation},
          {"all_share_at_most_15", r.all_share_at_most_15},
          {"event_share_at_most_15", r.event_share_at_most_15},
          {"footprint_cdf_all", cdf_json(r.footprint_cdf_all)},
          {"footprint_cdf_event", cdf_json(r.footprint_cdf_event)}};
}

std::string to_csv(const LongTailReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "statistic,value\n";
  out << "artist_count," << r.artist_count << '\n';
  out << "event_artist_count," << r.event_artist_count << '\n';
  out << "top_coverage_count," << r.top_coverage_count << '\n';
  out << "top_coverage_fraction," << r.top_coverage_fraction << '\n';
  out << "bottom_three_decile_share," << r.bottom_three_decile_share << '\n';
  out << "footprint_rank_correlation," << r.footprint_rank_correlation << '\n';
  out << "all_share_at_most_15," << r.all_share_at_most_15 << '\n';
  out << "event_share_at_most_15," << r.event_share_at_most_15 << '\n';
  for (std::size_t d = 0; d < r.event_artist_deciles.size(); ++d) {
    out << "event_artist_decile_" << d << ',' << r.event_artist_deciles[d] << '\n';
  }
  return out.str();
}

json plot_description(const LongTailReport& r) {
  const auto curve = [](const char* name, const std::vector<CdfPoint>& points) {
    json x = json::array();
    json y = json::array();
    for (const auto& p : points) {
      x.push_back(p.footprint);
      y.push_back(p.cumulative);
    }
    return json{{"name", name}, {"x", x}, {"y", y}};
  };
  return {{"format", kEvalFormat},
          {"version", kEvalVersion},
          {"kind", "step"},
          {"title", "Cumulative distribution of footprint sizes"},
          {"x", {{"label", "footprint size"}, {"scale", "log10"}}},
          {"y", {{"label", "fraction of artists"}, {"scale", "linear"}}},
          {"series", {curve("all artists", r.footprint_cdf_all), curve("event artists", r.footprint_cdf_event)}}};
}

json to_json(const FusionSweepReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) cells.push_back(cell_json(c));
  return {{"format", kEvalFormat},
          {"version", kEvalVersion},
          {"experiment", "fusion"},
          {"cells", cells},
          {"baselines", {cell_json(report.random), cell_json(report.popularity)}}};
}

std::string to_csv(const FusionSweepReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "label,source,mean,stddev,users\n";
  const auto row = [&](const FusionCell& c) {
    out << c.label << ',' << to_string(c.source) << ',' << c.mean << ',' << c.stddev << ',' << c.users << '\n';
  };
  for (const auto& c : report.cells) row(c);
  row(report.random);
  row(report.popularity);
  return out.str();
}

}  // namespace eventrec
