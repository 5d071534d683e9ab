#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "eventrec/error.hpp"
#include "eventrec/eval.hpp"
#include "eventrec/ingest.hpp"
#include "support.hpp"

using namespace eventrec;

namespace {

struct World {
  CorpusBundle corpus;
  RawDataMatrix raw;
  MusicEventGraph graph;
};

const World& small_world() {
  static const World w = [] {
    auto corpus = generate_synthetic_corpus(testing_support::small_world_config(5));
    auto raw = build_raw_matrix(corpus.artists, corpus.tags, corpus.affinities);
    GraphConfig config;
    config.genre_count = 8;
    auto graph = build_graph(corpus, fit(raw, 16, 0), config);
    return World{std::move(corpus), std::move(raw), std::move(graph)};
  }();
  return w;
}

FootprintExperimentConfig small_footprint_config() {
  FootprintExperimentConfig c;
  c.train_size = 300;
  c.test_size = 100;
  c.ranks = {8, 16};
  c.footprint_sizes = {1, 4, 64, kFullFootprint};
  c.seed = 3;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("auc examples") {
  const bool best[] = {true, true, false, false, false};
  const bool worst[] = {false, false, false, true, true};
  const bool mixed[] = {true, false, true, false};
  CHECK(auc(best) == 1.0);
  CHECK(auc(worst) == 0.0);
  CHECK(auc(mixed) == doctest::Approx(0.75));

  const std::vector<std::string> ranking{"a", "b", "c", "d"};
  CHECK(auc(ranking, {"a", "c"}) == doctest::Approx(0.75));
}

TEST_CASE("auc is undefined without both classes and rejects unranked ids") {
  const bool all_true[] = {true, true};
  const bool all_false[] = {false, false, false};
  for (auto labels : {std::span<const bool>(all_true), std::span<const bool>(all_false), std::span<const bool>()}) {
    try {
      auc(labels);
      FAIL("expected UndefinedMetric");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UndefinedMetric);
    }
  }
  const std::vector<std::string> ranking{"a", "b"};
  try {
    auc(ranking, {"z"});
    FAIL("expected UnknownEntity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownEntity);
  }
}

TEST_CASE("auc equals pair counting on every labeling up to length 8") {
  for (std::size_t n = 2; n <= 8; ++n) {
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::unique_ptr<bool[]> labels(new bool[n]);
      for (std::size_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1u;
      const std::span<const bool> view(labels.get(), n);
      CHECK(auc(view) == testing_support::pair_count_auc(view));
    }
  }
}

TEST_CASE("random rankings average one half") {
  std::mt19937_64 rng(99);
  std::vector<std::string> ids(40);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "x" + std::to_string(i);
  const std::unordered_set<std::string> relevant(ids.begin(), ids.begin() + 8);
  double sum = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::shuffle(ids.begin(), ids.end(), rng);
    sum += auc(ids, relevant);
  }
  CHECK(std::abs(sum / trials - 0.5) <= 0.02);
}

TEST_CASE("footprint reduction keeps a uniform subset") {
  std::vector<std::pair<std::size_t, double>> entries;
  for (std::size_t i = 0; i < 50; i += 2) entries.emplace_back(i, 0.1 + static_cast<double>(i) / 100.0);
  const SparseVector x(60, entries);
  for (std::size_t budget : {0u, 1u, 5u, 24u, 25u, 26u, 1000u}) {
    const auto r = reduce_footprint(x, budget, 7);
    CHECK(r.size() == x.size());
    CHECK(r.nnz() == std::min<std::size_t>(budget, x.nnz()));
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      const auto idx = r.indices()[k];
      const auto pos = std::lower_bound(x.indices().begin(), x.indices().end(), idx);
      REQUIRE(pos != x.indices().end());
      CHECK(*pos == idx);
      CHECK(x.values()[static_cast<std::size_t>(pos - x.indices().begin())] == r.values()[k]);
    }
    CHECK(reduce_footprint(x, budget, 7) == r);
  }
  CHECK(reduce_footprint(x, kFullFootprint, 1) == x);

  // Each feature survives a budget of one about equally often.
  std::vector<int> hits(60, 0);
  for (std::uint64_t s = 0; s < 5000; ++s) ++hits[reduce_footprint(x, 1, s).indices()[0]];
  for (std::size_t i = 0; i < 50; i += 2) CHECK(std::abs(hits[i] - 200) < 80);
}

TEST_CASE("footprint experiment structure, determinism and thread independence") {
  const auto& w = small_world();
  const auto config = small_footprint_config();
  const auto single = footprint_experiment(w.raw, config);
  CHECK(single.test_artists.size() == 100);
  CHECK(single.rows.size() == (config.ranks.size() + 1) * config.footprint_sizes.size());
  for (const auto& row : single.rows) {
    CHECK(row.evaluated + single.skipped == 100);
    CHECK(row.mean_auc >= 0.0);
    CHECK(row.mean_auc <= 1.0);
  }

  auto parallel_config = config;
  parallel_config.threads = 4;
  const auto parallel = footprint_experiment(w.raw, parallel_config);
  REQUIRE(parallel.rows.size() == single.rows.size());
  for (std::size_t i = 0; i < single.rows.size(); ++i) {
    CHECK(parallel.rows[i].mean_auc == single.rows[i].mean_auc);
    CHECK(parallel.rows[i].method == single.rows[i].method);
  }

  // More footprint helps every rank.
  for (std::size_t k : config.ranks) CHECK(single.find("lsa", k, 64)->mean_auc > single.find("lsa", k, 4)->mean_auc);
  CHECK(single.find("raw", 0, 64)->mean_auc > single.find("raw", 0, 4)->mean_auc);

  auto bad = config;
  bad.train_size = 10;
  CHECK_THROWS_AS(footprint_experiment(w.raw, bad), Error);
}

TEST_CASE("a budget above every footprint is the unreduced condition") {
  const auto& w = small_world();
  auto config = small_footprint_config();
  std::size_t widest = 0;
  for (std::size_t i = 0; i < w.raw.matrix.rows(); ++i) widest = std::max(widest, w.raw.matrix.row_nnz(i));
  config.footprint_sizes = {widest, kFullFootprint};
  config.ranks = {16};
  const auto result = footprint_experiment(w.raw, config);
  CHECK(result.find("lsa", 16, widest)->mean_auc == result.find("lsa", 16, kFullFootprint)->mean_auc);
  CHECK(result.find("raw", 0, widest)->mean_auc == result.find("raw", 0, kFullFootprint)->mean_auc);
}

TEST_CASE("uniform listener counts need 80 percent of artists for 80 percent of listens") {
  CorpusBundle corpus;
  for (int i = 0; i < 10; ++i) corpus.artists.push_back({"a" + std::to_string(i), "A", 1000, "", i >= 7});
  finalize(corpus);
  const auto report = long_tail_stats(corpus);
  CHECK(report.artist_count == 10);
  CHECK(report.top_coverage_count == 8);
  CHECK(report.top_coverage_fraction == doctest::Approx(0.8));
  // Equal counts rank by id, so a7..a9 sit in the last three deciles.
  CHECK(report.event_artist_count == 3);
  CHECK(report.bottom_three_decile_share == doctest::Approx(1.0));
  CHECK(report.all_share_at_most_15 == 1.0);
}

TEST_CASE("long tail statistics on a generated corpus") {
  const auto report = long_tail_stats(small_world().corpus);
  CHECK(report.artist_count == 400);
  CHECK(report.event_artist_count == 50);
  std::size_t total = 0;
  for (auto c : report.event_artist_deciles) total += c;
  CHECK(total == 50);
  REQUIRE(!report.footprint_cdf_all.empty());
  CHECK(report.footprint_cdf_all.back().cumulative == doctest::Approx(1.0));
  for (std::size_t i = 1; i < report.footprint_cdf_all.size(); ++i) {
    CHECK(report.footprint_cdf_all[i].footprint > report.footprint_cdf_all[i - 1].footprint);
    CHECK(report.footprint_cdf_all[i].cumulative >= report.footprint_cdf_all[i - 1].cumulative);
  }
  CHECK(report.footprint_rank_correlation < 0.0);
}

TEST_CASE("pearson") {
  const double x[] = {1, 2, 3, 4};
  const double up[] = {2, 4, 6, 8};
  const double down[] = {4, 3, 2, 1};
  CHECK(pearson(x, up) == doctest::Approx(1.0));
  CHECK(pearson(x, down) == doctest::Approx(-1.0));
}

TEST_CASE("simulated users follow the protocol bounds") {
  const auto& w = small_world();
  SimulationConfig config;
  config.users = 60;
  config.seed = 4;
  const auto users = simulate_users(w.graph, config);
  REQUIRE(users.size() == 60);
  std::set<std::string> event_artists;
  for (const auto& ea : w.graph.event_artists())
    if (ea.embedded) event_artists.insert(ea.id);
  for (const auto& u : users) {
    CHECK(u.relevant_event_artist_ids.size() >= config.min_relevant);
    CHECK(u.relevant_event_artist_ids.size() <= config.max_relevant);
    CHECK(u.relevant_event_artist_ids.size() < event_artists.size());
    for (const auto& id : u.relevant_event_artist_ids) CHECK(event_artists.contains(id));
    CHECK(!u.preferences.genre_tag_ids.empty());
    CHECK(u.preferences.genre_tag_ids.size() <= 3);
    CHECK(u.preferences.popular_artist_ids.size() <= 3 * u.preferences.genre_tag_ids.size());
    for (const auto& g : u.preferences.genre_tag_ids) CHECK(w.graph.find_genre(g) != nullptr);
    for (const auto& p : u.preferences.popular_artist_ids) CHECK(w.graph.find_popular(p) != nullptr);
  }
  const auto again = simulate_users(w.graph, config);
  for (std::size_t i = 0; i < users.size(); ++i) {
    CHECK(again[i].relevant_event_artist_ids == users[i].relevant_event_artist_ids);
    CHECK(again[i].preferences.popular_artist_ids == users[i].preferences.popular_artist_ids);
  }
}

TEST_CASE("preference source restriction") {
  const UserPreferences p{{"g1", "g2"}, {"a1"}};
  CHECK(select(p, PreferenceSource::artists).genre_tag_ids.empty());
  CHECK(select(p, PreferenceSource::artists).popular_artist_ids == std::vector<ArtistId>{"a1"});
  CHECK(select(p, PreferenceSource::genres).popular_artist_ids.empty());
  CHECK(select(p, PreferenceSource::both).all() == p.all());
  for (auto s : {PreferenceSource::artists, PreferenceSource::genres, PreferenceSource::both})
    CHECK(parse_preference_source(to_string(s)) == s);
}

TEST_CASE("fusion sweep is deterministic and its random baseline sits at one half") {
  const auto& w = small_world();
  SimulationConfig sim;
  sim.users = 300;
  sim.seed = 1;
  const auto users = simulate_users(w.graph, sim);
  const auto configs = standard_fusion_configs();
  const std::vector<PreferenceSource> sources{PreferenceSource::artists, PreferenceSource::genres,
                                              PreferenceSource::both};
  const auto report = fusion_sweep(w.graph, users, configs, sources, 2);
  CHECK(report.cells.size() == configs.size() * sources.size());
  CHECK(std::abs(report.random.mean - 0.5) <= 0.03);
  CHECK(report.random.users == users.size());
  for (const auto& c : configs)
    for (auto s : sources) {
      const auto* cell = report.find(c, s);
      REQUIRE(cell != nullptr);
      CHECK(cell->mean >= 0.0);
      CHECK(cell->mean <= 1.0);
      CHECK(cell->stddev >= 0.0);
    }
  const auto again = fusion_sweep(w.graph, users, configs, sources, 2);
  CHECK(to_json(again) == to_json(report));
}

TEST_CASE("experiment reports carry a versioned header, CSV and plot series") {
  const auto& w = small_world();
  auto config = small_footprint_config();
  config.ranks = {8};
  config.footprint_sizes = {2, kFullFootprint};
  const auto fp = footprint_experiment(w.raw, config);
  const auto doc = to_json(fp);
  CHECK(doc.at("format") == "eventrec-eval");
  CHECK(doc.at("version") == 1);
  const auto csv = to_csv(fp);
  CHECK(csv.rfind("method,rank,footprint,mean_auc,evaluated\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(fp.rows.size()));
  const auto plot = plot_description(fp);
  CHECK(plot.at("series").size() == 2);

  const auto lt = long_tail_stats(w.corpus);
  CHECK(to_json(lt).at("format") == "eventrec-eval");
  CHECK(!to_csv(lt).empty());
  CHECK(plot_description(lt).at("series").size() == 2);
}
