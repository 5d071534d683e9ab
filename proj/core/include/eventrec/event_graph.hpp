#pragma once

// Music event graph: four levels (genre tags -> popular artists -> event
// artists -> events) joined by weighted bipartite edge sets between adjacent
// levels only. Every node carries the latent vector it was built from, so a
// recommendation is a pure function of the graph and the user preferences.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventrec/artist_space.hpp"
#include "eventrec/corpus.hpp"
#include "eventrec/fusion.hpp"

namespace eventrec {

enum class Level { genre_tag = 0, popular_artist = 1, event_artist = 2, event = 3 };
std::string_view to_string(Level level) noexcept;

struct GenreNode {
  TagId id;
  std::string label;
  std::size_t frequency = 0;  // number of event artists carrying the tag
  LatentVector vector;
};

struct PopularArtistNode {
  ArtistId id;
  std::string name;
  std::uint64_t listener_count = 0;
  LatentVector vector;
};

struct EventArtistNode {
  ArtistId id;
  std::string name;
  std::uint64_t listener_count = 0;
  bool embedded = false;
  LatentVector vector;  // empty when not embedded
};

struct EventNode {
  Event event;
  bool isolated = false;  // none of its artists could be embedded
};

// from/to are ids on the two adjacent levels the edge set connects.
struct Edge {
  std::string from;
  std::string to;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class MusicEventGraph {
 public:
  MusicEventGraph() = default;
  MusicEventGraph(std::vector<GenreNode> genres, std::vector<PopularArtistNode> popular,
                  std::vector<EventArtistNode> event_artists, std::vector<EventNode> events,
                  std::vector<Edge> tag_popular, std::vector<Edge> popular_event_artist,
                  std::vector<Edge> event_artist_event);

  const std::vector<GenreNode>& genres() const noexcept { return genres_; }
  const std::vector<PopularArtistNode>& popular_artists() const noexcept { return popular_; }
  const std::vector<EventArtistNode>& event_artists() const noexcept { return event_artists_; }
  const std::vector<EventNode>& events() const noexcept { return events_; }

  const std::vector<Edge>& tag_popular_edges() const noexcept { return tag_popular_; }
  const std::vector<Edge>& popular_event_artist_edges() const noexcept { return popular_event_artist_; }
  const std::vector<Edge>& event_artist_event_edges() const noexcept { return event_artist_event_; }

  const GenreNode* find_genre(std::string_view id) const;
  const PopularArtistNode* find_popular(std::string_view id) const;
  const EventArtistNode* find_event_artist(std::string_view id) const;
  const EventNode* find_event(std::string_view id) const;

  // Outgoing edges of a node on the given level (empty for events).
  std::span<const Edge> out_edges(Level level, std::string_view id) const;
  // Incoming edges of a node on the given level (empty for genre tags).
  std::span<const Edge> in_edges(Level level, std::string_view id) const;
  std::optional<double> edge_weight(Level from_level, std::string_view from, std::string_view to) const;

  // Popular artists offered for a genre, in onboarding order.
  std::vector<const PopularArtistNode*> popular_for_genre(std::string_view genre_id) const;

  // Human-readable descriptions of broken invariants; empty when valid.
  std::vector<std::string> violations() const;

 private:
  void index();

  std::vector<GenreNode> genres_;
  std::vector<PopularArtistNode> popular_;
  std::vector<EventArtistNode> event_artists_;
  std::vector<EventNode> events_;
  std::vector<Edge> tag_popular_;
  std::vector<Edge> popular_event_artist_;
  std::vector<Edge> event_artist_event_;

  std::array<std::unordered_map<std::string, std::size_t>, 4> node_index_;
  // Edge sets sorted by source (out) and by target (in) with range lookups.
  std::array<std::vector<Edge>, 3> out_sorted_;
  std::array<std::vector<Edge>, 3> in_sorted_;
  std::array<std::unordered_map<std::string, std::pair<std::size_t, std::size_t>>, 3> out_range_;
  std::array<std::unordered_map<std::string, std::pair<std::size_t, std::size_t>>, 3> in_range_;
};

std::vector<std::string> default_genre_banlist();
// One label per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_banlist(const std::string& path);

struct GenreSelection {
  Tag tag;
  std::size_t frequency = 0;
};

// Tags ordered by how many event artists carry them (desc, then label, then
// id), skipping banlisted labels (case-insensitive). Returns at most count.
std::vector<GenreSelection> select_genre_tags(std::span<const Tag> tags, std::span<const AffinityRecord> affinities,
                                              const std::unordered_set<ArtistId>& event_artists, std::size_t count = 20,
                                              std::span<const std::string> banlist = {});

struct PopularPick {
  ArtistId id;
  std::uint64_t listener_count = 0;
  double cosine = 0.0;
};

// Among artists whose cosine to the genre tag exceeds threshold, the count
// with the most listeners (ties: higher cosine, then id).
std::vector<PopularPick> select_popular_artists(const TagId& genre, const EmbeddingIndex& index,
                                                const std::unordered_map<ArtistId, std::uint64_t>& listener_counts,
                                                std::size_t count = 16, double threshold = 0.3);

struct GraphConfig {
  std::size_t genre_count = 20;
  std::size_t popular_per_genre = 16;
  std::size_t fanout = 5;
  double popular_threshold = 0.3;
  std::optional<Timestamp> cutoff;  // events starting earlier are dropped
  std::vector<std::string> banlist = default_genre_banlist();
  // Embed event artists missing from the index from their corpus affinities.
  bool fold_in_unseen = true;
};

MusicEventGraph build_graph(const CorpusBundle& corpus, const EmbeddingIndex& index, const GraphConfig& config = {});

struct NodeRef {
  Level level = Level::event;
  std::string id;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

// A walk from a selected preference node to an event.
struct TransparencyPath {
  std::vector<NodeRef> nodes;
  std::vector<double> weights;  // one per edge
  double product_weight = 1.0;
};

struct RankedEvent {
  EventId id;
  double score = 0.0;
  Timestamp start_time{};
  std::vector<ArtistId> contributing_artists;
  std::vector<TransparencyPath> paths;
};
using RankedEventList = std::vector<RankedEvent>;

struct Ranker {
  enum class Kind {
    // Event artists reached from a preference score by fusion over all
    // preference vectors (clamped at 0); unreached artists score 0.
    fusion,
    // Event artists score the summed product weight of every walk reaching
    // them. Monotone in the preference set.
    path_sum,
  };
  Kind kind = Kind::fusion;
  FusionConfig fusion{};
  std::uint64_t seed = 0;
};

// Event relevance = sum of its artists' scores. Every event is returned,
// ordered by (score desc, start_time asc, id asc). Throws EmptyPreferences
// and UnknownEntity for ids that are not on the matching graph level.
RankedEventList recommend(const MusicEventGraph& graph, const UserPreferences& preferences,
                          const Ranker& ranker = {});

// Versioned JSON document: node lists per level plus the three edge lists.
nlohmann::json to_json(const MusicEventGraph& graph);
MusicEventGraph graph_from_json(const nlohmann::json& document);
void save_graph(const MusicEventGraph& graph, const std::string& path);
MusicEventGraph load_graph(const std::string& path);

nlohmann::json to_json(const TransparencyPath& path);
nlohmann::json to_json(const RankedEvent& event);

}  // namespace eventrec
