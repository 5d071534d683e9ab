#include "eventrec/event_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "eventrec/error.hpp"

namespace eventrec {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

constexpr std::size_t level_index(Level level) { return static_cast<std::size_t>(level); }

struct Walk {
  std::vector<NodeRef> nodes;
  std::vector<double> weights;
  double product = 1.0;
};

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::genre_tag: return "genre_tag";
    case Level::popular_artist: return "popular_artist";
    case Level::event_artist: return "event_artist";
    case Level::event: return "event";
  }
  return "event";
}

MusicEventGraph::MusicEventGraph(std::vector<GenreNode> genres, std::vector<PopularArtistNode> popular,
                                 std::vector<EventArtistNode> event_artists, std::vector<EventNode> events,
                                 std::vector<Edge> tag_popular, std::vector<Edge> popular_event_artist,
                                 std::vector<Edge> event_artist_event)
    : genres_(std::move(genres)),
      popular_(std::move(popular)),
      event_artists_(std::move(event_artists)),
      events_(std::move(events)),
      tag_popular_(std::move(tag_popular)),
      popular_event_artist_(std::move(popular_event_artist)),
      event_artist_event_(std::move(event_artist_event)) {
  index();
}

void MusicEventGraph::index() {
  for (auto& map : node_index_) map.clear();
  for (std::size_t i = 0; i < genres_.size(); ++i) node_index_[0].emplace(genres_[i].id, i);
  for (std::size_t i = 0; i < popular_.size(); ++i) node_index_[1].emplace(popular_[i].id, i);
  for (std::size_t i = 0; i < event_artists_.size(); ++i) node_index_[2].emplace(event_artists_[i].id, i);
  for (std::size_t i = 0; i < events_.size(); ++i) node_index_[3].emplace(events_[i].event.id, i);

  const std::array<const std::vector<Edge>*, 3> sets{&tag_popular_, &popular_event_artist_, &event_artist_event_};
  for (std::size_t s = 0; s < 3; ++s) {
    out_sorted_[s] = *sets[s];
    std::stable_sort(out_sorted_[s].begin(), out_sorted_[s].end(),
                     [](const Edge& a, const Edge& b) { return a.from < b.from; });
    in_sorted_[s] = *sets[s];
    std::stable_sort(in_sorted_[s].begin(), in_sorted_[s].end(),
                     [](const Edge& a, const Edge& b) { return a.to < b.to; });
    out_range_[s].clear();
    in_range_[s].clear();
    for (std::size_t i = 0; i < out_sorted_[s].size();) {
      std::size_t j = i;
      while (j < out_sorted_[s].size() && out_sorted_[s][j].from == out_sorted_[s][i].from) ++j;
      out_range_[s][out_sorted_[s][i].from] = {i, j};
      i = j;
    }
    for (std::size_t i = 0; i < in_sorted_[s].size();) {
      std::size_t j = i;
      while (j < in_sorted_[s].size() && in_sorted_[s][j].to == in_sorted_[s][i].to) ++j;
      in_range_[s][in_sorted_[s][i].to] = {i, j};
      i = j;
    }
  }
}

const GenreNode* MusicEventGraph::find_genre(std::string_view id) const {
  const auto it = node_index_[0].find(std::string(id));
  return it == node_index_[0].end() ? nullptr : &genres_[it->second];
}

const PopularArtistNode* MusicEventGraph::find_popular(std::string_view id) const {
  const auto it = node_index_[1].find(std::string(id));
  return it == node_index_[1].end() ? nullptr : &popular_[it->second];
}

const EventArtistNode* MusicEventGraph::find_event_artist(std::string_view id) const {
  const auto it = node_index_[2].find(std::string(id));
  return it == node_index_[2].end() ? nullptr : &event_artists_[it->second];
}

const EventNode* MusicEventGraph::find_event(std::string_view id) const {
  const auto it = node_index_[3].find(std::string(id));
  return it == node_index_[3].end() ? nullptr : &events_[it->second];
}

std::span<const Edge> MusicEventGraph::out_edges(Level level, std::string_view id) const {
  const std::size_t s = level_index(level);
  if (s >= 3) return {};
  const auto it = out_range_[s].find(std::string(id));
  if (it == out_range_[s].end()) return {};
  return std::span<const Edge>(out_sorted_[s]).subspan(it->second.first, it->second.second - it->second.first);
}

std::span<const Edge> MusicEventGraph::in_edges(Level level, std::string_view id) const {
  const std::size_t l = level_index(level);
  if (l == 0) return {};
  const std::size_t s = l - 1;
  const auto it = in_range_[s].find(std::string(id));
  if (it == in_range_[s].end()) return {};
  return std::span<const Edge>(in_sorted_[s]).subspan(it->second.first, it->second.second - it->second.first);
}

std::optional<double> MusicEventGraph::edge_weight(Level from_level, std::string_view from, std::string_view to) const {
  for (const auto& e : out_edges(from_level, from)) {
    if (e.to == to) return e.weight;
  }
  return std::nullopt;
}

std::vector<const PopularArtistNode*> MusicEventGraph::popular_for_genre(std::string_view genre_id) const {
  std::vector<const PopularArtistNode*> out;
  // Edge order in the original set is the onboarding order.
  for (const auto& e : tag_popular_) {
    if (e.from != genre_id) continue;
    if (const auto* node = find_popular(e.to)) out.push_back(node);
  }
  return out;
}

std::vector<std::string> MusicEventGraph::violations() const {
  std::vector<std::string> problems;
  const std::array<std::size_t, 4> sizes{genres_.size(), popular_.size(), event_artists_.size(), events_.size()};
  for (std::size_t l = 0; l < 4; ++l) {
    if (node_index_[l].size() != sizes[l]) {
      problems.push_back("duplicate node id on level " + std::string(to_string(static_cast<Level>(l))));
    }
  }
  const std::array<const std::vector<Edge>*, 3> sets{&tag_popular_, &popular_event_artist_, &event_artist_event_};
  for (std::size_t s = 0; s < 3; ++s) {
    for (const auto& e : *sets[s]) {
      if (!node_index_[s].contains(e.from) || !node_index_[s + 1].contains(e.to)) {
        problems.push_back("edge " + e.from + " -> " + e.to + " does not join levels " +
                           std::string(to_string(static_cast<Level>(s))) + " and " +
                           std::string(to_string(static_cast<Level>(s + 1))));
      }
      if (!std::isfinite(e.weight) || (s < 2 && (e.weight < -1.0 || e.weight > 1.0))) {
        problems.push_back("edge " + e.from + " -> " + e.to + " has weight outside [-1, 1]");
      }
      if (s == 2 && e.weight != 1.0) problems.push_back("performance edge " + e.from + " -> " + e.to + " is not 1");
    }
  }
  for (const auto& node : events_) {
    if (in_edges(Level::event, node.event.id).empty()) {
      problems.push_back("event " + node.event.id + " has no performing artist");
    }
    for (const auto& artist : node.event.artist_ids) {
      const auto w = edge_weight(Level::event_artist, artist, node.event.id);
      if (!w || *w != 1.0) problems.push_back("artist " + artist + " lacks a unit edge to event " + node.event.id);
    }
  }
  return problems;
}

std::vector<std::string> default_genre_banlist() { return {"seen live", "favorites"}; }

std::vector<std::string> load_banlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MalformedInput, "cannot open banlist " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto label = trim(line);
    if (label.empty() || label.front() == '#') continue;
    out.push_back(std::move(label));
  }
  return out;
}

std::vector<GenreSelection> select_genre_tags(std::span<const Tag> tags, std::span<const AffinityRecord> affinities,
                                              const std::unordered_set<ArtistId>& event_artists, std::size_t count,
                                              std::span<const std::string> banlist) {
  std::unordered_set<std::string> banned;
  for (const auto& label : banlist) banned.insert(lowercase(trim(label)));

  std::unordered_map<TagId, std::set<ArtistId>> carriers;
  for (const auto& t : tags) carriers[t.id];
  for (const auto& a : affinities) {
    if (a.weight <= 0.0 || !event_artists.contains(a.artist_id)) continue;
    const auto it = carriers.find(a.feature_id);
    if (it != carriers.end()) it->second.insert(a.artist_id);
  }

  std::vector<GenreSelection> eligible;
  for (const auto& t : tags) {
    if (banned.contains(lowercase(trim(t.label)))) continue;
    const std::size_t frequency = carriers[t.id].size();
    if (frequency == 0) continue;
    GenreSelection pick{t, frequency};
    pick.tag.is_genre = true;
    eligible.push_back(std::move(pick));
  }
  std::sort(eligible.begin(), eligible.end(), [](const GenreSelection& a, const GenreSelection& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    if (a.tag.label != b.tag.label) return a.tag.label < b.tag.label;
    return a.tag.id < b.tag.id;
  });
  if (eligible.size() > count) eligible.resize(count);
  return eligible;
}

std::vector<PopularPick> select_popular_artists(const TagId& genre, const EmbeddingIndex& index,
                                                const std::unordered_map<ArtistId, std::uint64_t>& listener_counts,
                                                std::size_t count, double threshold) {
  const auto scored = index.similar(genre, index.space().artist_count(), FeatureFilter::artists);
  std::vector<PopularPick> picks;
  for (const auto& s : scored) {
    if (s.score <= threshold || s.score <= 0.0) continue;
    const auto it = listener_counts.find(s.id);
    picks.push_back({s.id, it == listener_counts.end() ? 0 : it->second, s.score});
  }
  std::sort(picks.begin(), picks.end(), [](const PopularPick& a, const PopularPick& b) {
    if (a.listener_count != b.listener_count) return a.listener_count > b.listener_count;
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  });
  if (picks.size() > count) picks.resize(count);
  return picks;
}

MusicEventGraph build_graph(const CorpusBundle& corpus, const EmbeddingIndex& index, const GraphConfig& config) {
  std::unordered_map<ArtistId, const Artist*> artists;
  std::unordered_map<ArtistId, std::uint64_t> listeners;
  for (const auto& a : corpus.artists) {
    artists.emplace(a.id, &a);
    listeners.emplace(a.id, a.listener_count);
  }

  std::vector<EventNode> events;
  std::vector<ArtistId> event_artist_order;
  std::unordered_set<ArtistId> event_artist_set;
  for (const auto& e : corpus.events) {
    if (config.cutoff && e.start_time < *config.cutoff) continue;
    if (e.artist_ids.empty()) throw Error(ErrorKind::MalformedInput, "event " + e.id + " lists no artists");
    events.push_back({e, false});
    for (const auto& a : e.artist_ids) {
      if (event_artist_set.insert(a).second) event_artist_order.push_back(a);
    }
  }

  // Genre level: only tags the index can embed are eligible.
  std::vector<Tag> embeddable_tags;
  for (const auto& t : corpus.tags) {
    const auto column = index.space().column(t.id);
    if (column && index.space().kind(*column) == FeatureKind::tag) embeddable_tags.push_back(t);
  }
  const auto selected = select_genre_tags(embeddable_tags, corpus.affinities, event_artist_set, config.genre_count,
                                          config.banlist);

  std::vector<GenreNode> genres;
  std::vector<PopularArtistNode> popular;
  std::unordered_set<ArtistId> popular_seen;
  std::vector<Edge> tag_popular;
  for (const auto& g : selected) {
    genres.push_back({g.tag.id, g.tag.label, g.frequency, index.embedding(g.tag.id)});
    for (const auto& pick : select_popular_artists(g.tag.id, index, listeners, config.popular_per_genre,
                                                   config.popular_threshold)) {
      if (popular_seen.insert(pick.id).second) {
        const auto it = artists.find(pick.id);
        popular.push_back({pick.id, it == artists.end() ? pick.id : it->second->name, pick.listener_count,
                           index.embedding(pick.id)});
      }
      tag_popular.push_back({g.tag.id, pick.id, pick.cosine});
    }
  }

  // Event artists: in-vocabulary embedding, else fold-in from corpus affinities.
  std::unordered_map<ArtistId, std::vector<std::pair<FeatureId, double>>> unseen_affinities;
  if (config.fold_in_unseen) {
    for (const auto& a : corpus.affinities) {
      if (event_artist_set.contains(a.artist_id) && !index.space().contains(a.artist_id) &&
          index.space().contains(a.feature_id) && a.weight > 0.0) {
        unseen_affinities[a.artist_id].emplace_back(a.feature_id, a.weight);
      }
    }
  }
  std::vector<EventArtistNode> event_artists;
  for (const auto& id : event_artist_order) {
    EventArtistNode node{id, id, 0, false, {}};
    if (const auto it = artists.find(id); it != artists.end()) {
      node.name = it->second->name;
      node.listener_count = it->second->listener_count;
    }
    const auto column = index.space().column(id);
    if (column && index.space().kind(*column) == FeatureKind::artist) {
      node.vector = index.embedding(id);
      node.embedded = true;
    } else if (const auto found = unseen_affinities.find(id); found != unseen_affinities.end()) {
      try {
        node.vector = index.embed_new_artist(index.space().vector(found->second));
        node.embedded = node.vector.norm() > kZeroNorm;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularSpace) throw;
      }
    }
    event_artists.push_back(std::move(node));
  }

  std::vector<Edge> popular_event_artist;
  for (const auto& ea : event_artists) {
    if (!ea.embedded) continue;
    std::vector<std::pair<double, const PopularArtistNode*>> ranked;
    for (const auto& p : popular) {
      const double c = cosine(p.vector, ea.vector);
      if (c > 0.0) ranked.emplace_back(c, &p);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second->id < b.second->id;
    });
    if (ranked.size() > config.fanout) ranked.resize(config.fanout);
    for (const auto& [c, p] : ranked) popular_event_artist.push_back({p->id, ea.id, c});
  }

  std::unordered_map<ArtistId, bool> embedded;
  for (const auto& ea : event_artists) embedded[ea.id] = ea.embedded;
  std::vector<Edge> event_artist_event;
  for (auto& node : events) {
    std::set<ArtistId> seen;
    bool any_embedded = false;
    for (const auto& a : node.event.artist_ids) {
      if (!seen.insert(a).second) continue;
      event_artist_event.push_back({a, node.event.id, 1.0});
      any_embedded = any_embedded || embedded[a];
    }
    node.isolated = !any_embedded;
  }

  return MusicEventGraph(std::move(genres), std::move(popular), std::move(event_artists), std::move(events),
                         std::move(tag_popular), std::move(popular_event_artist), std::move(event_artist_event));
}

RankedEventList recommend(const MusicEventGraph& graph, const UserPreferences& preferences, const Ranker& ranker) {
  if (preferences.empty()) throw Error(ErrorKind::EmptyPreferences, "select at least one genre or artist");

  std::vector<TagId> genres;
  for (const auto& id : preferences.genre_tag_ids) {
    if (!graph.find_genre(id)) throw Error(ErrorKind::UnknownEntity, "unknown genre '" + id + "'");
    if (std::find(genres.begin(), genres.end(), id) == genres.end()) genres.push_back(id);
  }
  std::vector<ArtistId> picks;
  for (const auto& id : preferences.popular_artist_ids) {
    if (!graph.find_popular(id)) throw Error(ErrorKind::UnknownEntity, "unknown popular artist '" + id + "'");
    if (std::find(picks.begin(), picks.end(), id) == picks.end()) picks.push_back(id);
  }

  // Every walk from a selected node down to an event artist.
  std::map<ArtistId, std::vector<Walk>> walks;
  auto extend = [&](Walk prefix, const std::string& popular_id) {
    for (const auto& e : graph.out_edges(Level::popular_artist, popular_id)) {
      if (e.weight <= 0.0) continue;
      Walk w = prefix;
      w.nodes.push_back({Level::event_artist, e.to});
      w.weights.push_back(e.weight);
      w.product *= e.weight;
      walks[e.to].push_back(std::move(w));
    }
  };
  for (const auto& g : genres) {
    for (const auto& e : graph.out_edges(Level::genre_tag, g)) {
      if (e.weight <= 0.0) continue;
      extend(Walk{{{Level::genre_tag, g}, {Level::popular_artist, e.to}}, {e.weight}, e.weight}, e.to);
    }
  }
  for (const auto& p : picks) extend(Walk{{{Level::popular_artist, p}}, {}, 1.0}, p);

  std::unordered_map<ArtistId, double> artist_score;
  if (ranker.kind == Ranker::Kind::path_sum) {
    for (const auto& [artist, list] : walks) {
      double total = 0.0;
      for (const auto& w : list) total += w.product;
      artist_score[artist] = total;
    }
  } else {
    std::vector<LatentVector> vectors;
    for (const auto& g : genres) vectors.push_back(graph.find_genre(g)->vector);
    for (const auto& p : picks) vectors.push_back(graph.find_popular(p)->vector);
    std::vector<Candidate> candidates;
    for (const auto& ea : graph.event_artists()) {
      if (ea.embedded) candidates.push_back({ea.id, ea.vector});
    }
    for (const auto& s : rank_event_artists(vectors, ranker.fusion, candidates, ranker.seed)) {
      if (walks.contains(s.id)) artist_score[s.id] = std::max(0.0, s.score);
    }
  }

  RankedEventList ranked;
  ranked.reserve(graph.events().size());
  for (const auto& node : graph.events()) {
    RankedEvent out;
    out.id = node.event.id;
    out.start_time = node.event.start_time;
    std::set<ArtistId> seen;
    for (const auto& artist : node.event.artist_ids) {
      if (!seen.insert(artist).second) continue;
      const auto found = walks.find(artist);
      if (found == walks.end()) continue;
      out.contributing_artists.push_back(artist);
      out.score += artist_score[artist];
      const double weight = graph.edge_weight(Level::event_artist, artist, node.event.id).value_or(1.0);
      for (const auto& w : found->second) {
        TransparencyPath path{w.nodes, w.weights, w.product * weight};
        path.nodes.push_back({Level::event, node.event.id});
        path.weights.push_back(weight);
        out.paths.push_back(std::move(path));
      }
    }
    ranked.push_back(std::move(out));
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedEvent& a, const RankedEvent& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start_time != b.start_time) return a.start_time < b.start_time;
    return a.id < b.id;
  });
  return ranked;
}

}  // namespace eventrec
