#include <fstream>

#include "eventrec/error.hpp"
#include "eventrec/event_graph.hpp"

namespace eventrec {
namespace {

constexpr const char* kGraphFormat = "eventrec-graph";
constexpr int kGraphVersion = 1;

using nlohmann::json;

json vector_json(const LatentVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

LatentVector vector_from(const json& node) {
  LatentVector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = node.at(i).get<double>();
  return v;
}

json edges_json(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const auto& e : edges) out.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
  return out;
}

std::vector<Edge> edges_from(const json& node) {
  std::vector<Edge> out;
  for (const auto& e : node) out.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(), e.at("weight").get<double>()});
  return out;
}

}  // namespace

json to_json(const MusicEventGraph& graph) {
  json genres = json::array();
  for (const auto& g : graph.genres()) {
    genres.push_back({{"id", g.id}, {"label", g.label}, {"frequency", g.frequency}, {"vector", vector_json(g.vector)}});
  }
  json popular = json::array();
  for (const auto& p : graph.popular_artists()) {
    popular.push_back(
        {{"id", p.id}, {"name", p.name}, {"listener_count", p.listener_count}, {"vector", vector_json(p.vector)}});
  }
  json event_artists = json::array();
  for (const auto& a : graph.event_artists()) {
    event_artists.push_back(
        {{"id", a.id}, {"name", a.name}, {"listener_count", a.listener_count}, {"embedded", a.embedded},
         {"vector", vector_json(a.vector)}});
  }
  json events = json::array();
  for (const auto& n : graph.events()) {
    events.push_back({{"id", n.event.id},
                      {"title", n.event.title},
                      {"venue", n.event.venue},
                      {"start_time", format_timestamp(n.event.start_time)},
                      {"source", to_string(n.event.source)},
                      {"artist_ids", n.event.artist_ids},
                      {"isolated", n.isolated}});
  }
  return {{"format", kGraphFormat},
          {"version", kGraphVersion},
          {"levels",
           {{"genre_tags", genres}, {"popular_artists", popular}, {"event_artists", event_artists}, {"events", events}}},
          {"edges",
           {{"tag_popular", edges_json(graph.tag_popular_edges())},
            {"popular_event_artist", edges_json(graph.popular_event_artist_edges())},
            {"event_artist_event", edges_json(graph.event_artist_event_edges())}}}};
}

MusicEventGraph graph_from_json(const json& document) {
  try {
    if (document.at("format").get<std::string>() != kGraphFormat) {
      throw Error(ErrorKind::MalformedInput, "not an event graph document");
    }
    const int version = document.at("version").get<int>();
    if (version != kGraphVersion) {
      throw Error(ErrorKind::MalformedInput, "unsupported graph version " + std::to_string(version));
    }
    const auto& levels = document.at("levels");
    std::vector<GenreNode> genres;
    for (const auto& g : levels.at("genre_tags")) {
      genres.push_back({g.at("id").get<std::string>(), g.at("label").get<std::string>(),
                        g.at("frequency").get<std::size_t>(), vector_from(g.at("vector"))});
    }
    std::vector<PopularArtistNode> popular;
    for (const auto& p : levels.at("popular_artists")) {
      popular.push_back({p.at("id").get<std::string>(), p.at("name").get<std::string>(),
                         p.at("listener_count").get<std::uint64_t>(), vector_from(p.at("vector"))});
    }
    std::vector<EventArtistNode> event_artists;
    for (const auto& a : levels.at("event_artists")) {
      event_artists.push_back({a.at("id").get<std::string>(), a.at("name").get<std::string>(),
                               a.value("listener_count", std::uint64_t{0}), a.at("embedded").get<bool>(),
                               vector_from(a.at("vector"))});
    }
    std::vector<EventNode> events;
    for (const auto& e : levels.at("events")) {
      Event event;
      event.id = e.at("id").get<std::string>();
      event.title = e.at("title").get<std::string>();
      event.venue = e.at("venue").get<std::string>();
      const auto start = parse_timestamp(e.at("start_time").get<std::string>());
      if (!start) throw Error(ErrorKind::MalformedInput, "event " + event.id + ": bad start_time");
      event.start_time = *start;
      const auto source = parse_event_source(e.at("source").get<std::string>());
      if (!source) throw Error(ErrorKind::MalformedInput, "event " + event.id + ": bad source");
      event.source = *source;
      event.artist_ids = e.at("artist_ids").get<std::vector<std::string>>();
      events.push_back({std::move(event), e.at("isolated").get<bool>()});
    }
    const auto& edges = document.at("edges");
    MusicEventGraph graph(std::move(genres), std::move(popular), std::move(event_artists), std::move(events),
                          edges_from(edges.at("tag_popular")), edges_from(edges.at("popular_event_artist")),
                          edges_from(edges.at("event_artist_event")));
    if (const auto problems = graph.violations(); !problems.empty()) {
      throw Error(ErrorKind::MalformedInput, "invalid graph: " + problems.front());
    }
    return graph;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("graph document: ") + e.what());
  }
}

void save_graph(const MusicEventGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MalformedInput, "cannot write " + path);
  out << to_json(graph).dump(1) << '\n';
}

MusicEventGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MalformedInput, "cannot open " + path);
  json document;
  try {
    in >> document;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, path + ": " + e.what());
  }
  return graph_from_json(document);
}

json to_json(const TransparencyPath& path) {
  json nodes = json::array();
  for (const auto& n : path.nodes) nodes.push_back({{"level", to_string(n.level)}, {"id", n.id}});
  return {{"nodes", nodes}, {"weights", path.weights}, {"product_weight", path.product_weight}};
}

json to_json(const RankedEvent& event) {
  json paths = json::array();
  for (const auto& p : event.paths) paths.push_back(to_json(p));
  return {{"id", event.id},
          {"score", event.score},
          {"start_time", format_timestamp(event.start_time)},
          {"contributing_artists", event.contributing_artists},
          {"paths", paths}};
}

}  // namespace eventrec
