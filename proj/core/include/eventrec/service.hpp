#pragma once

// JSON-over-HTTP onboarding API, independent of any HTTP library: requests
// are routed through Service::handle so tests can drive it in-process.
//
//   GET  /healthz
//   GET  /v1/genres
//   POST /v1/sessions                          {"genre_ids": [...]}
//   POST /v1/sessions/{id}/recommendations     {"popular_artist_ids": [...], "fusion_config"?: "none/average_cosine"}
//   GET  /v1/sessions/{id}
//   GET  /v1/events/{id}
//   POST /v1/admin/reload

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventrec/corpus.hpp"
#include "eventrec/event_graph.hpp"
#include "eventrec/fusion.hpp"

namespace eventrec {

struct OnboardingBounds {
  std::size_t min_genres = 1;
  std::size_t max_genres = 3;
  std::size_t min_artists_per_genre = 1;
  std::size_t max_artists_per_genre = 3;
  std::size_t popular_per_genre = 16;
};

// Throws InvalidConfig unless 1 <= min <= max for both selections.
void check(const OnboardingBounds& bounds);

struct ServiceConfig {
  OnboardingBounds bounds;
  FusionConfig default_fusion{EarlyFusion::none, LateFusion::average_cosine};
  Ranker::Kind ranker = Ranker::Kind::fusion;
  std::uint64_t seed = 0;
  // Sessions are written here after every change and read back at startup.
  std::optional<std::filesystem::path> session_file;
};

struct SessionState {
  std::string session_id;
  std::vector<TagId> selected_genre_ids;
  std::vector<ArtistId> selected_popular_artist_ids;
  FusionConfig fusion_config{};
  Timestamp created_at{};
};

nlohmann::json to_json(const SessionState& session);
SessionState session_from_json(const nlohmann::json& document);

struct Response {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  using Loader = std::function<MusicEventGraph()>;

  explicit Service(ServiceConfig config = {});

  // Replaces the served graph; the service is ready from then on.
  void set_graph(MusicEventGraph graph);
  // Used by the reload endpoint. A failing loader keeps the current graph.
  void set_loader(Loader loader);
  bool ready() const;

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  std::optional<SessionState> session(const std::string& id) const;
  std::size_t session_count() const;

 private:
  std::shared_ptr<const MusicEventGraph> graph() const;
  Response genres(const MusicEventGraph& graph) const;
  Response create_session(const MusicEventGraph& graph, const nlohmann::json& request);
  Response recommendations(const MusicEventGraph& graph, const std::string& id, const nlohmann::json& request);
  Response event_detail(const MusicEventGraph& graph, const std::string& id) const;
  Response reload();
  nlohmann::json offered_artists(const MusicEventGraph& graph, const TagId& genre) const;
  void persist_locked() const;
  void restore();

  ServiceConfig config_;
  mutable std::mutex graph_mutex_;
  std::shared_ptr<const MusicEventGraph> graph_;
  Loader loader_;
  mutable std::mutex session_mutex_;
  std::map<std::string, SessionState> sessions_;
  std::uint64_t next_session_ = 1;
};

// "<label> -> <name> -> <name> -> <title>" using node display names.
std::string describe(const MusicEventGraph& graph, const TransparencyPath& path);

}  // namespace eventrec
