#include "eventrec/service.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "eventrec/error.hpp"

namespace eventrec {
namespace {

using nlohmann::json;

Response error(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const auto slash = path.find('/');
    const auto part = path.substr(0, slash);
    if (!part.empty()) parts.push_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

// Ids from a JSON array of strings, or nullopt if the shape is wrong.
std::optional<std::vector<std::string>> id_list(const json& request, const char* field) {
  if (!request.is_object() || !request.contains(field) || !request.at(field).is_array()) return std::nullopt;
  std::vector<std::string> ids;
  for (const auto& item : request.at(field)) {
    if (!item.is_string()) return std::nullopt;
    const auto id = item.get<std::string>();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  return ids;
}

std::string display_name(const MusicEventGraph& graph, const NodeRef& node) {
  switch (node.level) {
    case Level::genre_tag:
      if (const auto* g = graph.find_genre(node.id)) return g->label;
      break;
    case Level::popular_artist:
      if (const auto* p = graph.find_popular(node.id)) return p->name;
      break;
    case Level::event_artist:
      if (const auto* a = graph.find_event_artist(node.id)) return a->name;
      break;
    case Level::event:
      if (const auto* e = graph.find_event(node.id)) return e->event.title;
      break;
  }
  return node.id;
}

json event_summary(const Event& event) {
  return {{"id", event.id},
          {"title", event.title},
          {"venue", event.venue},
          {"start_time", format_timestamp(event.start_time)},
          {"source", to_string(event.source)},
          {"artist_ids", event.artist_ids}};
}

}  // namespace

void check(const OnboardingBounds& b) {
  if (b.min_genres == 0 || b.min_genres > b.max_genres) {
    throw Error(ErrorKind::InvalidConfig, "genre bounds must satisfy 1 <= min <= max");
  }
  if (b.min_artists_per_genre == 0 || b.min_artists_per_genre > b.max_artists_per_genre) {
    throw Error(ErrorKind::InvalidConfig, "artist bounds must satisfy 1 <= min <= max");
  }
  if (b.popular_per_genre == 0) throw Error(ErrorKind::InvalidConfig, "popular_per_genre must be positive");
}

std::string describe(const MusicEventGraph& graph, const TransparencyPath& path) {
  std::string out;
  for (const auto& node : path.nodes) {
    if (!out.empty()) out += " -> ";
    out += display_name(graph, node);
  }
  return out;
}

json to_json(const SessionState& s) {
  return {{"session_id", s.session_id},
          {"selected_genre_ids", s.selected_genre_ids},
          {"selected_popular_artist_ids", s.selected_popular_artist_ids},
          {"fusion_config", to_string(s.fusion_config)},
          {"created_at", format_timestamp(s.created_at)}};
}

SessionState session_from_json(const json& document) {
  try {
    SessionState s;
    s.session_id = document.at("session_id").get<std::string>();
    s.selected_genre_ids = document.at("selected_genre_ids").get<std::vector<std::string>>();
    s.selected_popular_artist_ids = document.at("selected_popular_artist_ids").get<std::vector<std::string>>();
    const auto fusion = parse_fusion_config(document.at("fusion_config").get<std::string>());
    const auto created = parse_timestamp(document.at("created_at").get<std::string>());
    if (!fusion || !created) throw Error(ErrorKind::MalformedInput, "session " + s.session_id + ": bad field");
    s.fusion_config = *fusion;
    s.created_at = *created;
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("session record: ") + e.what());
  }
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  check(config_.bounds);
  restore();
}

void Service::set_graph(MusicEventGraph graph) {
  auto shared = std::make_shared<const MusicEventGraph>(std::move(graph));
  std::lock_guard lock(graph_mutex_);
  graph_ = std::move(shared);
}

void Service::set_loader(Loader loader) {
  std::lock_guard lock(graph_mutex_);
  loader_ = std::move(loader);
}

bool Service::ready() const { return graph() != nullptr; }

std::shared_ptr<const MusicEventGraph> Service::graph() const {
  std::lock_guard lock(graph_mutex_);
  return graph_;
}

std::optional<SessionState> Service::session(const std::string& id) const {
  std::lock_guard lock(session_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::size_t Service::session_count() const {
  std::lock_guard lock(session_mutex_);
  return sessions_.size();
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  if (const auto query = path.find('?'); query != std::string_view::npos) path = path.substr(0, query);
  const auto parts = split_path(path);
  const auto only = [&](std::string_view allowed) -> std::optional<Response> {
    if (method == allowed) return std::nullopt;
    return error(405, "method_not_allowed", std::string(method) + " not allowed on " + std::string(path));
  };

  if (parts.size() == 1 && parts[0] == "healthz") {
    if (auto r = only("GET")) return *r;
    return {200, {{"status", "ok"}, {"ready", ready()}}};
  }
  if (parts.empty() || parts[0] != "v1") return error(404, "not_found", "no route for " + std::string(path));

  if (parts.size() == 3 && parts[1] == "admin" && parts[2] == "reload") {
    if (auto r = only("POST")) return *r;
    return reload();
  }

  const auto current = graph();
  const bool known_route = (parts.size() == 2 && (parts[1] == "genres" || parts[1] == "sessions")) ||
                           (parts.size() == 3 && (parts[1] == "sessions" || parts[1] == "events")) ||
                           (parts.size() == 4 && parts[1] == "sessions" && parts[3] == "recommendations");
  if (!known_route) return error(404, "not_found", "no route for " + std::string(path));
  if (!current) return error(503, "not_ready", "no event graph loaded");

  json request;
  if (method == "POST") {
    request = json::parse(body.empty() ? std::string_view("{}") : body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
      return error(400, "bad_request", "request body must be a JSON object");
    }
  }

  try {
    if (parts[1] == "genres") {
      if (auto r = only("GET")) return *r;
      return genres(*current);
    }
    if (parts[1] == "events") {
      if (auto r = only("GET")) return *r;
      return event_detail(*current, std::string(parts[2]));
    }
    if (parts.size() == 2) {
      if (auto r = only("POST")) return *r;
      return create_session(*current, request);
    }
    if (parts.size() == 3) {
      if (auto r = only("GET")) return *r;
      const auto s = session(std::string(parts[2]));
      if (!s) return error(404, "unknown_session", "no session '" + std::string(parts[2]) + "'");
      return {200, to_json(*s)};
    }
    if (auto r = only("POST")) return *r;
    return recommendations(*current, std::string(parts[2]), request);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::UnknownEntity: return error(404, "unknown_entity", e.what());
      case ErrorKind::EmptyPreferences:
      case ErrorKind::InvalidConfig:
      case ErrorKind::InvalidWeight: return error(422, "invalid_selection", e.what());
      default: return error(500, "internal", e.what());
    }
  }
}

Response Service::genres(const MusicEventGraph& graph) const {
  json list = json::array();
  for (const auto& g : graph.genres()) {
    list.push_back({{"id", g.id},
                    {"label", g.label},
                    {"frequency", g.frequency},
                    {"popular_artist_count",
                     std::min(graph.popular_for_genre(g.id).size(), config_.bounds.popular_per_genre)}});
  }
  return {200,
          {{"genres", list},
           {"bounds",
            {{"min_genres", config_.bounds.min_genres},
             {"max_genres", config_.bounds.max_genres},
             {"min_artists_per_genre", config_.bounds.min_artists_per_genre},
             {"max_artists_per_genre", config_.bounds.max_artists_per_genre}}}}};
}

json Service::offered_artists(const MusicEventGraph& graph, const TagId& genre) const {
  json list = json::array();
  for (const auto* p : graph.popular_for_genre(genre)) {
    if (list.size() == config_.bounds.popular_per_genre) break;
    list.push_back({{"id", p->id},
                    {"name", p->name},
                    {"listener_count", p->listener_count},
                    {"weight", graph.edge_weight(Level::genre_tag, genre, p->id).value_or(0.0)}});
  }
  return list;
}

Response Service::create_session(const MusicEventGraph& graph, const json& request) {
  const auto ids = id_list(request, "genre_ids");
  if (!ids) return error(400, "bad_request", "genre_ids must be an array of strings");
  const auto& b = config_.bounds;
  if (ids->size() < b.min_genres || ids->size() > b.max_genres) {
    return error(422, "invalid_selection",
                 "select between " + std::to_string(b.min_genres) + " and " + std::to_string(b.max_genres) +
                     " genres");
  }
  for (const auto& id : *ids) {
    if (!graph.find_genre(id)) return error(404, "unknown_genre", "no genre '" + id + "'");
  }

  SessionState s;
  s.selected_genre_ids = *ids;
  s.fusion_config = config_.default_fusion;
  s.created_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  {
    std::lock_guard lock(session_mutex_);
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "s%06llu", static_cast<unsigned long long>(next_session_++));
    s.session_id = buffer;
    sessions_[s.session_id] = s;
    persist_locked();
  }

  json genres = json::array();
  for (const auto& id : *ids) {
    genres.push_back({{"id", id}, {"label", graph.find_genre(id)->label}, {"popular_artists", offered_artists(graph, id)}});
  }
  return {201, {{"session_id", s.session_id}, {"genres", genres}}};
}

Response Service::recommendations(const MusicEventGraph& graph, const std::string& id, const json& request) {
  auto state = session(id);
  if (!state) return error(404, "unknown_session", "no session '" + id + "'");
  const auto picks = id_list(request, "popular_artist_ids");
  if (!picks) return error(400, "bad_request", "popular_artist_ids must be an array of strings");
  if (picks->empty()) return error(422, "invalid_selection", "select at least one popular artist");

  FusionConfig fusion = state->fusion_config;
  if (request.contains("fusion_config")) {
    const auto& field = request.at("fusion_config");
    const auto parsed = field.is_string() ? parse_fusion_config(field.get<std::string>()) : std::nullopt;
    if (!parsed) return error(422, "invalid_fusion_config", "fusion_config must look like 'none/average_cosine'");
    fusion = *parsed;
  }

  // Every pick must have been offered for one of the session's genres, and
  // each genre's share must respect the per-genre bounds.
  const auto& b = config_.bounds;
  std::set<ArtistId> offered_anywhere;
  for (const auto& genre : state->selected_genre_ids) {
    std::set<ArtistId> offered;
    for (const auto& a : offered_artists(graph, genre)) offered.insert(a.at("id").get<std::string>());
    const auto count = static_cast<std::size_t>(
        std::count_if(picks->begin(), picks->end(), [&](const std::string& p) { return offered.contains(p); }));
    if (count < b.min_artists_per_genre || count > b.max_artists_per_genre) {
      return error(422, "invalid_selection",
                   "select between " + std::to_string(b.min_artists_per_genre) + " and " +
                       std::to_string(b.max_artists_per_genre) + " artists for genre '" + genre + "'");
    }
    offered_anywhere.insert(offered.begin(), offered.end());
  }
  for (const auto& p : *picks) {
    if (!offered_anywhere.contains(p)) {
      return error(422, "invalid_selection", "artist '" + p + "' was not offered in this session");
    }
  }

  UserPreferences prefs{state->selected_genre_ids, *picks};
  const auto ranked = recommend(graph, prefs, Ranker{config_.ranker, fusion, config_.seed});

  state->selected_popular_artist_ids = *picks;
  state->fusion_config = fusion;
  {
    std::lock_guard lock(session_mutex_);
    sessions_[id] = *state;
    persist_locked();
  }

  json events = json::array();
  for (const auto& r : ranked) {
    const auto* node = graph.find_event(r.id);
    json item = event_summary(node->event);
    item["score"] = r.score;
    item["contributing_artists"] = r.contributing_artists;
    json paths = json::array();
    for (const auto& p : r.paths) {
      json path = to_json(p);
      for (auto& n : path["nodes"]) {
        const auto level = n.at("level").get<std::string>();
        const NodeRef ref{level == "genre_tag"        ? Level::genre_tag
                          : level == "popular_artist" ? Level::popular_artist
                          : level == "event_artist"   ? Level::event_artist
                                                      : Level::event,
                          n.at("id").get<std::string>()};
        n["label"] = display_name(graph, ref);
      }
      path["text"] = describe(graph, p);
      paths.push_back(std::move(path));
    }
    item["paths"] = std::move(paths);
    events.push_back(std::move(item));
  }
  return {200, {{"session_id", id}, {"fusion_config", to_string(fusion)}, {"events", events}}};
}

Response Service::event_detail(const MusicEventGraph& graph, const std::string& id) const {
  const auto* node = graph.find_event(id);
  if (!node) return error(404, "unknown_event", "no event '" + id + "'");
  json out = event_summary(node->event);
  out["isolated"] = node->isolated;
  json artists = json::array();
  for (const auto& artist_id : node->event.artist_ids) {
    const auto* a = graph.find_event_artist(artist_id);
    json similar = json::array();
    for (const auto& e : graph.in_edges(Level::event_artist, artist_id)) {
      const auto* p = graph.find_popular(e.from);
      similar.push_back({{"id", e.from}, {"name", p ? p->name : e.from}, {"cosine", e.weight}});
    }
    artists.push_back({{"id", artist_id},
                       {"name", a ? a->name : artist_id},
                       {"embedded", a && a->embedded},
                       {"similar_popular_artists", similar}});
  }
  out["artists"] = std::move(artists);
  return {200, out};
}

Response Service::reload() {
  Loader loader;
  {
    std::lock_guard lock(graph_mutex_);
    loader = loader_;
  }
  if (!loader) return error(501, "no_loader", "the service was started without a reloadable source");
  try {
    set_graph(loader());
  } catch (const std::exception& e) {
    return error(500, "reload_failed", e.what());
  }
  return {200, {{"status", "reloaded"}, {"genres", graph()->genres().size()}}};
}

void Service::persist_locked() const {
  if (!config_.session_file) return;
  json list = json::array();
  for (const auto& [id, s] : sessions_) list.push_back(to_json(s));
  const auto tmp = config_.session_file->string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::MalformedInput, "cannot write " + tmp);
    out << json{{"next_session", next_session_}, {"sessions", list}}.dump() << '\n';
  }
  std::filesystem::rename(tmp, *config_.session_file);
}

void Service::restore() {
  if (!config_.session_file || !std::filesystem::exists(*config_.session_file)) return;
  std::ifstream in(*config_.session_file);
  const json document = json::parse(in, nullptr, false);
  if (document.is_discarded() || !document.is_object()) {
    throw Error(ErrorKind::MalformedInput, config_.session_file->string() + ": not a session store");
  }
  std::lock_guard lock(session_mutex_);
  for (const auto& item : document.value("sessions", json::array())) {
    auto s = session_from_json(item);
    sessions_[s.session_id] = std::move(s);
  }
  next_session_ = std::max<std::uint64_t>(document.value("next_session", std::uint64_t{1}), sessions_.size() + 1);
}

}  // namespace eventrec
