#include <benchmark/benchmark.h>

#include "eventrec/event_graph.hpp"
#include "eventrec/ingest.hpp"

namespace {

// One small synthetic world shared by every benchmark in this file.
struct World {
  eventrec::CorpusBundle corpus;
  eventrec::MusicEventGraph graph;
  eventrec::UserPreferences prefs;

  World() {
    eventrec::GeneratorConfig config;
    config.n_artists = 600;
    config.n_event_artists = 60;
    config.n_events = 40;
    config.n_tags = 300;
    config.min_tag_support = 5;
    corpus = eventrec::generate_synthetic_corpus(config);
    const auto raw = eventrec::build_raw_matrix(corpus.artists, corpus.tags, corpus.affinities);
    graph = eventrec::build_graph(corpus, eventrec::fit(raw, 32, 0));
    prefs.genre_tag_ids = {graph.genres().at(0).id, graph.genres().at(1).id};
    for (const auto& g : prefs.genre_tag_ids) {
      const auto offered = graph.popular_for_genre(g);
      if (!offered.empty()) prefs.popular_artist_ids.push_back(offered.front()->id);
    }
  }
};

const World& world() {
  static const World w;
  return w;
}

void BM_Recommend(benchmark::State& state) {
  const auto& w = world();
  const auto configs = eventrec::standard_fusion_configs();
  const eventrec::Ranker ranker{eventrec::Ranker::Kind::fusion, configs.at(static_cast<std::size_t>(state.range(0))), 0};
  for (auto _ : state) benchmark::DoNotOptimize(eventrec::recommend(w.graph, w.prefs, ranker).size());
  state.SetLabel(eventrec::to_string(ranker.fusion));
}
BENCHMARK(BM_Recommend)->DenseRange(0, 6);

void BM_RecommendPathSum(benchmark::State& state) {
  const auto& w = world();
  const eventrec::Ranker ranker{eventrec::Ranker::Kind::path_sum, {}, 0};
  for (auto _ : state) benchmark::DoNotOptimize(eventrec::recommend(w.graph, w.prefs, ranker).size());
}
BENCHMARK(BM_RecommendPathSum);

void BM_BuildGraph(benchmark::State& state) {
  const auto& w = world();
  const auto raw = eventrec::build_raw_matrix(w.corpus.artists, w.corpus.tags, w.corpus.affinities);
  const auto index = eventrec::fit(raw, 32, 0);
  for (auto _ : state) benchmark::DoNotOptimize(eventrec::build_graph(w.corpus, index).events().size());
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMillisecond);

}  // namespace
