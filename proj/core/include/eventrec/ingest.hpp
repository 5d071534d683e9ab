#pragma once

// File-based corpus ingestion and the seeded synthetic corpus generator.
//
// On disk a corpus is a set of newline-delimited JSON files, one per entity
// type. The first line of every file is a header
//   {"format":"eventrec-corpus","version":1,"kind":"<artists|tags|affinities|events>"}
// followed by one record per line. Several events files (one per listing
// source) may be given; events sharing (title, venue, start_time) are merged.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eventrec/corpus.hpp"

namespace eventrec {

inline constexpr const char* kCorpusFormat = "eventrec-corpus";
inline constexpr int kCorpusVersion = 1;

struct CorpusPaths {
  std::filesystem::path artists;
  std::filesystem::path tags;
  std::filesystem::path affinities;
  std::vector<std::filesystem::path> events;
  std::optional<std::filesystem::path> manifest;

  // artists.ndjson, tags.ndjson, affinities.ndjson, every events*.ndjson
  // (sorted by name) and manifest.json when present.
  static CorpusPaths in_directory(const std::filesystem::path& directory);
};

// Parses, merges duplicate events, adds missing self-affinities and checks
// referential integrity. Throws MalformedInput (with file:line and field),
// InvalidWeight or UnknownEntity.
CorpusBundle load_corpus(const CorpusPaths& paths);
CorpusBundle load_corpus(const std::filesystem::path& directory);

// Writes the directory layout understood by CorpusPaths::in_directory.
void save_corpus(const CorpusBundle& bundle, const std::filesystem::path& directory);

// Self-affinity completion and is_event_artist flags; idempotent.
void finalize(CorpusBundle& bundle);

// Every broken invariant of a bundle, as messages; empty when valid.
std::vector<std::string> validate(const CorpusBundle& bundle, std::size_t min_tag_support = 0);

// Events with equal (title, venue, start_time) collapse into the first one;
// differing sources become EventSource::both and artist lists are unioned.
std::vector<Event> merge_events(std::span<const Event> events);

struct RawTagAssignment {
  ArtistId artist_id;
  std::string label;
  double weight = 1.0;
};

// Lowercase, trimmed, inner whitespace collapsed to single spaces.
std::string normalize_label(std::string_view label);
// "tag:" + normalized label.
TagId tag_id_for(std::string_view label);

// Tags attached to at least min_support distinct artists, sorted by label.
std::vector<Tag> build_tag_vocabulary(std::span<const RawTagAssignment> raw, std::size_t min_support = 20);

// Affinity records for the raw assignments that survived into vocabulary.
std::vector<AffinityRecord> tag_affinities(std::span<const RawTagAssignment> raw, std::span<const Tag> vocabulary);

// Lowercased alphanumeric tokens; every other byte is a boundary (bytes >= 0x80
// count as alphanumeric so UTF-8 words stay whole).
std::vector<std::string> tokenize(std::string_view text);

// Whole-token, case-insensitive match of each tag label (as a contiguous token
// sequence) inside each artist's biography; every hit yields weight 1.0.
std::vector<AffinityRecord> mine_biography_tags(std::span<const Artist> artists, std::span<const Tag> vocabulary);

struct GeneratorConfig {
  std::size_t n_artists = 2000;
  std::size_t n_event_artists = 154;
  std::size_t n_tags = 1585;
  std::size_t n_events = 96;
  std::size_t n_genres = 20;
  double power_law_exponent = 1.0;
  double footprint_popularity_correlation_target = -0.56;
  std::uint64_t seed = 0;

  // Planted latent geometry behind similarity links and tags.
  std::size_t latent_dimensions = 32;
  std::size_t scenes_per_genre = 5;
  double scene_spread = 0.35;
  double artist_spread = 0.25;

  std::size_t median_footprint = 60;
  std::size_t min_footprint = 3;
  std::size_t max_footprint = 600;
  double tag_share = 0.32;  // share of an artist's footprint spent on tags
  std::size_t max_tags_per_artist = 40;
  // Chance an artist also carries the tag of the nearest other genre.
  double secondary_genre_share = 0.5;
  // Share of event artists drawn from the three least popular deciles.
  double bottom_decile_share = 0.65;
  std::size_t min_tag_support = 20;
  Timestamp first_event = std::chrono::sys_days{std::chrono::year{2018} / 2 / 15} + std::chrono::hours{19};
};

// Throws InvalidConfig for infeasible settings (non-positive counts, more
// event artists than artists, correlation target outside (-1, 0), ...).
void check(const GeneratorConfig& config);

// Deterministic for a fixed config (same seed, same bundle).
CorpusBundle generate_synthetic_corpus(const GeneratorConfig& config);

}  // namespace eventrec
