#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eventrec {

using ArtistId = std::string;
using TagId = std::string;
using EventId = std::string;
// Either an ArtistId or a TagId; the two namespaces must not collide.
using FeatureId = std::string;

using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DDTHH:MM:SSZ" (the trailing Z is optional).
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct Artist {
  ArtistId id;
  std::string name;
  std::uint64_t listener_count = 0;
  std::string biography;
  bool is_event_artist = false;

  friend bool operator==(const Artist&, const Artist&) = default;
};

struct Tag {
  TagId id;
  std::string label;
  std::uint64_t artist_count = 0;
  bool is_genre = false;

  friend bool operator==(const Tag&, const Tag&) = default;
};

// One nonzero cell of the raw data matrix: artist row, artist-or-tag column.
struct AffinityRecord {
  ArtistId artist_id;
  FeatureId feature_id;
  double weight = 0.0;

  friend bool operator==(const AffinityRecord&, const AffinityRecord&) = default;
};

enum class EventSource { ticket_service, newspaper, both, synthetic };

std::string_view to_string(EventSource source) noexcept;
std::optional<EventSource> parse_event_source(std::string_view text) noexcept;

struct Event {
  EventId id;
  std::string title;
  std::string venue;
  Timestamp start_time{};
  EventSource source = EventSource::synthetic;
  std::vector<ArtistId> artist_ids;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class Provenance { imported, synthetic };

struct CorpusBundle {
  std::vector<Artist> artists;
  std::vector<Tag> tags;
  std::vector<AffinityRecord> affinities;
  std::vector<Event> events;
  Provenance provenance = Provenance::imported;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

}  // namespace eventrec
