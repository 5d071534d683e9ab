// eventrec command line: corpus ingestion, graph building, serving,
// one-off recommendations and the evaluation experiments.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eventrec/error.hpp"
#include "eventrec/eval.hpp"
#include "eventrec/event_graph.hpp"
#include "eventrec/http_server.hpp"
#include "eventrec/ingest.hpp"
#include "eventrec/service.hpp"

namespace fs = std::filesystem;
using namespace eventrec;

namespace {

struct CorpusSource {
  std::string corpus;  // directory; empty means "generate from seed"
  std::uint64_t seed = 0;
};

void add_source(CLI::App* app, CorpusSource& source) {
  app->add_option("--corpus", source.corpus, "corpus directory (default: generate a synthetic corpus)");
  app->add_option("--seed", source.seed, "seed for generation and every randomized step");
}

CorpusBundle obtain(const CorpusSource& source) {
  if (!source.corpus.empty()) return load_corpus(fs::path(source.corpus));
  GeneratorConfig config;
  config.seed = source.seed;
  return generate_synthetic_corpus(config);
}

struct GraphOptions {
  std::size_t rank = EmbeddingIndex::kDefaultRank;
  std::size_t genres = 20;
  std::size_t popular = 16;
  std::size_t fanout = 5;
  std::string banlist;
  std::string cutoff;
};

void add_graph_options(CLI::App* app, GraphOptions& o) {
  app->add_option("--rank", o.rank, "latent dimensions")->check(CLI::Range(std::size_t{1}, EmbeddingIndex::kMaxRank));
  app->add_option("--genres", o.genres, "genre tags in the graph");
  app->add_option("--popular", o.popular, "popular artists per genre");
  app->add_option("--fanout", o.fanout, "popular artists linked to each event artist");
  app->add_option("--banlist", o.banlist, "file of tag labels that are never genres");
  app->add_option("--cutoff", o.cutoff, "drop events starting before this time (YYYY-MM-DDTHH:MM:SSZ)");
}

MusicEventGraph make_graph(const CorpusBundle& corpus, const GraphOptions& o, std::uint64_t seed) {
  GraphConfig config;
  config.genre_count = o.genres;
  config.popular_per_genre = o.popular;
  config.fanout = o.fanout;
  if (!o.banlist.empty()) config.banlist = load_banlist(o.banlist);
  if (!o.cutoff.empty()) {
    config.cutoff = parse_timestamp(o.cutoff);
    if (!config.cutoff) throw Error(ErrorKind::InvalidConfig, "bad --cutoff '" + o.cutoff + "'");
  }
  const auto raw = build_raw_matrix(corpus.artists, corpus.tags, corpus.affinities);
  const auto index = fit(raw, o.rank, seed);
  return build_graph(corpus, index, config);
}

std::vector<std::string> split_ids(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MalformedInput, "cannot write " + path.string());
  out << content;
}

void emit(const std::string& out_dir, const std::string& stem, const nlohmann::json& json, const std::string& csv,
          const std::optional<nlohmann::json>& plot) {
  if (out_dir.empty()) {
    std::cout << csv;
    return;
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / (stem + ".json"), json.dump(2) + "\n");
  write_file(fs::path(out_dir) / (stem + ".csv"), csv);
  if (plot) write_file(fs::path(out_dir) / (stem + ".plot.json"), plot->dump(2) + "\n");
  std::cout << "wrote " << stem << " results to " << out_dir << "\n";
}

HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eventrec: local music event recommendation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "load, generate or validate corpora");
  ingest->require_subcommand(1);
  std::string load_dir, load_out;
  auto* ingest_load = ingest->add_subcommand("load", "load a corpus directory and print a summary");
  ingest_load->add_option("corpus", load_dir, "corpus directory")->required();
  ingest_load->add_option("--out", load_out, "re-serialize the validated corpus here");

  GeneratorConfig gen;
  std::string gen_out;
  auto* ingest_generate = ingest->add_subcommand("generate", "write a seeded synthetic corpus");
  ingest_generate->add_option("--out", gen_out, "output directory")->required();
  ingest_generate->add_option("--seed", gen.seed, "generator seed");
  ingest_generate->add_option("--artists", gen.n_artists);
  ingest_generate->add_option("--event-artists", gen.n_event_artists);
  ingest_generate->add_option("--tags", gen.n_tags);
  ingest_generate->add_option("--events", gen.n_events);
  ingest_generate->add_option("--genre-count", gen.n_genres);
  ingest_generate->add_option("--power-law", gen.power_law_exponent);
  ingest_generate->add_option("--correlation", gen.footprint_popularity_correlation_target);
  ingest_generate->add_option("--median-footprint", gen.median_footprint);
  ingest_generate->add_option("--min-tag-support", gen.min_tag_support, "drop generated tags on fewer artists");

  std::string validate_dir;
  std::size_t min_support = 0;
  auto* ingest_validate = ingest->add_subcommand("validate", "report every broken corpus invariant");
  ingest_validate->add_option("corpus", validate_dir, "corpus directory")->required();
  ingest_validate->add_option("--min-tag-support", min_support, "also require tags on this many artists");

  // build-graph
  CorpusSource graph_source;
  GraphOptions graph_options;
  std::string graph_out;
  auto* build = app.add_subcommand("build-graph", "fit the latent space and write the event graph");
  add_source(build, graph_source);
  add_graph_options(build, graph_options);
  build->add_option("--out", graph_out, "graph JSON path")->required();

  // serve
  CorpusSource serve_source;
  GraphOptions serve_graph;
  std::string serve_graph_file, serve_host = "127.0.0.1", serve_fusion = "none/average_cosine", serve_sessions;
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--graph", serve_graph_file, "serialized graph (otherwise built from --corpus/--seed)");
  add_source(serve, serve_source);
  add_graph_options(serve, serve_graph);
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port, "0 picks a free port");
  serve->add_option("--fusion", serve_fusion, "default fusion config, early/late");
  serve->add_option("--sessions", serve_sessions, "session store file");

  // recommend
  std::string rec_graph, rec_genres, rec_artists, rec_fusion = "none/average_cosine", rec_ranker = "fusion";
  std::size_t rec_top = 10;
  bool rec_json = false;
  auto* rec = app.add_subcommand("recommend", "rank events for a set of preferences");
  rec->add_option("--graph", rec_graph, "serialized graph")->required();
  rec->add_option("--genres", rec_genres, "comma-separated genre tag ids");
  rec->add_option("--artists", rec_artists, "comma-separated popular artist ids");
  rec->add_option("--fusion", rec_fusion, "early/late fusion config");
  rec->add_option("--ranker", rec_ranker, "fusion or path_sum")->check(CLI::IsMember({"fusion", "path_sum"}));
  rec->add_option("--top", rec_top, "events to print (0 = all)");
  rec->add_flag("--json", rec_json, "print JSON");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run an evaluation experiment");
  experiment->require_subcommand(1);
  CorpusSource fp_source;
  FootprintExperimentConfig fp;
  std::string fp_out;
  auto* exp_fp = experiment->add_subcommand("footprint", "AUC under artificially reduced footprints");
  add_source(exp_fp, fp_source);
  exp_fp->add_option("--train", fp.train_size);
  exp_fp->add_option("--test", fp.test_size);
  exp_fp->add_option("--ranks", fp.ranks)->delimiter(',');
  exp_fp->add_option("--footprints", fp.footprint_sizes)->delimiter(',');
  exp_fp->add_option("--threads", fp.threads);
  exp_fp->add_option("--out-dir", fp_out);

  CorpusSource fu_source;
  GraphOptions fu_graph;
  SimulationConfig sim;
  std::string fu_out;
  auto* exp_fu = experiment->add_subcommand("fusion", "fusion strategies on simulated users");
  add_source(exp_fu, fu_source);
  add_graph_options(exp_fu, fu_graph);
  exp_fu->add_option("--users", sim.users);
  exp_fu->add_option("--out-dir", fu_out);

  CorpusSource lt_source;
  std::string lt_out;
  auto* exp_lt = experiment->add_subcommand("longtail", "popularity and footprint statistics");
  add_source(exp_lt, lt_source);
  exp_lt->add_option("--out-dir", lt_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_load->parsed()) {
      const auto bundle = load_corpus(fs::path(load_dir));
      std::cout << "artists " << bundle.artists.size() << "\ntags " << bundle.tags.size() << "\naffinities "
                << bundle.affinities.size() << "\nevents " << bundle.events.size() << "\n";
      if (!load_out.empty()) save_corpus(bundle, load_out);
    } else if (ingest_generate->parsed()) {
      const auto bundle = generate_synthetic_corpus(gen);
      save_corpus(bundle, gen_out);
      std::cout << "generated " << bundle.artists.size() << " artists, " << bundle.tags.size() << " tags, "
                << bundle.events.size() << " events into " << gen_out << "\n";
    } else if (ingest_validate->parsed()) {
      const auto problems = validate(load_corpus(fs::path(validate_dir)), min_support);
      for (const auto& p : problems) std::cout << p << "\n";
      if (!problems.empty()) return 1;
      std::cout << "ok\n";
    } else if (build->parsed()) {
      const auto graph = make_graph(obtain(graph_source), graph_options, graph_source.seed);
      save_graph(graph, graph_out);
      std::cout << "graph: " << graph.genres().size() << " genres, " << graph.popular_artists().size()
                << " popular artists, " << graph.event_artists().size() << " event artists, "
                << graph.events().size() << " events\n";
    } else if (serve->parsed()) {
      ServiceConfig config;
      const auto fusion = parse_fusion_config(serve_fusion);
      if (!fusion) throw Error(ErrorKind::InvalidConfig, "bad --fusion '" + serve_fusion + "'");
      config.default_fusion = *fusion;
      config.seed = serve_source.seed;
      if (!serve_sessions.empty()) config.session_file = serve_sessions;
      Service service(config);
      Service::Loader loader = serve_graph_file.empty()
                                   ? Service::Loader([&] { return make_graph(obtain(serve_source), serve_graph, serve_source.seed); })
                                   : Service::Loader([&] { return load_graph(serve_graph_file); });
      service.set_loader(loader);
      service.set_graph(loader());
      HttpServer server(service);
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
      });
      const int port = server.bind(serve_host, serve_port);
      std::cout << "listening on http://" << serve_host << ":" << port << std::endl;
      server.run();
    } else if (rec->parsed()) {
      const auto graph = load_graph(rec_graph);
      const auto fusion = parse_fusion_config(rec_fusion);
      if (!fusion) throw Error(ErrorKind::InvalidConfig, "bad --fusion '" + rec_fusion + "'");
      const Ranker ranker{rec_ranker == "path_sum" ? Ranker::Kind::path_sum : Ranker::Kind::fusion, *fusion, 0};
      const auto ranked = recommend(graph, UserPreferences{split_ids(rec_genres), split_ids(rec_artists)}, ranker);
      const std::size_t shown = rec_top == 0 ? ranked.size() : std::min(rec_top, ranked.size());
      if (rec_json) {
        nlohmann::json list = nlohmann::json::array();
        for (std::size_t i = 0; i < shown; ++i) list.push_back(to_json(ranked[i]));
        std::cout << list.dump(2) << "\n";
      } else {
        for (std::size_t i = 0; i < shown; ++i) {
          const auto& r = ranked[i];
          std::cout << i + 1 << ". " << r.id << "  " << graph.find_event(r.id)->event.title << "  score " << r.score
                    << "\n";
          for (const auto& p : r.paths) std::cout << "     " << describe(graph, p) << "\n";
        }
      }
    } else if (exp_fp->parsed()) {
      const auto bundle = obtain(fp_source);
      fp.seed = fp_source.seed;
      if (fp.train_size + fp.test_size != bundle.artists.size() && fp.test_size < bundle.artists.size()) {
        fp.train_size = bundle.artists.size() - fp.test_size;
      }
      const auto result = footprint_experiment(build_raw_matrix(bundle.artists, bundle.tags, bundle.affinities), fp);
      emit(fp_out, "footprint", to_json(result), to_csv(result), plot_description(result));
    } else if (exp_fu->parsed()) {
      const auto graph = make_graph(obtain(fu_source), fu_graph, fu_source.seed);
      sim.seed = fu_source.seed;
      const auto users = simulate_users(graph, sim);
      const auto configs = standard_fusion_configs();
      const std::vector<PreferenceSource> sources{PreferenceSource::artists, PreferenceSource::genres,
                                                  PreferenceSource::both};
      const auto report = fusion_sweep(graph, users, configs, sources, fu_source.seed);
      emit(fu_out, "fusion", to_json(report), to_csv(report), std::nullopt);
    } else if (exp_lt->parsed()) {
      const auto report = long_tail_stats(obtain(lt_source));
      emit(lt_out, "longtail", to_json(report), to_csv(report), plot_description(report));
    }
  } catch (const std::exception& e) {
    std::cerr << "eventrec: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
