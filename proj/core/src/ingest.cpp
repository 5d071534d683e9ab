#include "eventrec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "eventrec/error.hpp"

namespace eventrec {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class RecordReader {
 public:
  RecordReader(const fs::path& path, std::string_view kind) : path_(path) {
    in_.open(path);
    if (!in_) throw Error(ErrorKind::MalformedInput, path.string() + ": cannot open");
    std::string header;
    if (!std::getline(in_, header)) return;  // empty file: no records
    line_ = 1;
    const json h = parse(header);
    if (!h.is_object() || h.value("format", "") != kCorpusFormat) fail("header is not an eventrec-corpus header");
    if (h.value("version", 0) != kCorpusVersion) fail("unsupported version");
    if (h.value("kind", "") != kind) fail("expected kind '" + std::string(kind) + "'");
  }

  bool next(json& record) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      record = parse(text);
      if (!record.is_object()) fail("record is not an object");
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorKind::MalformedInput, path_.string() + ":" + std::to_string(line_) + ": " + message);
  }

  template <typename T>
  T field(const json& record, const char* name) const {
    const auto it = record.find(name);
    if (it == record.end()) fail("missing field '" + std::string(name) + "'");
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      fail("field '" + std::string(name) + "' has the wrong type");
    }
  }

  template <typename T>
  T optional_field(const json& record, const char* name, T fallback) const {
    if (!record.contains(name)) return fallback;
    return field<T>(record, name);
  }

  std::string where() const { return path_.string() + ":" + std::to_string(line_); }

 private:
  json parse(const std::string& text) const {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
  }

  fs::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<Artist> read_artists(const fs::path& path) {
  RecordReader reader(path, "artists");
  std::vector<Artist> out;
  json r;
  while (reader.next(r)) {
    Artist a;
    a.id = reader.field<std::string>(r, "id");
    a.name = reader.optional_field<std::string>(r, "name", a.id);
    a.listener_count = reader.optional_field<std::uint64_t>(r, "listener_count", 0);
    a.biography = reader.optional_field<std::string>(r, "biography", "");
    // Biographies from several sources are concatenated.
    for (const auto& text : reader.optional_field<std::vector<std::string>>(r, "biographies", {})) {
      if (!a.biography.empty()) a.biography += "\n";
      a.biography += text;
    }
    a.is_event_artist = reader.optional_field<bool>(r, "is_event_artist", false);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Tag> read_tags(const fs::path& path) {
  RecordReader reader(path, "tags");
  std::vector<Tag> out;
  json r;
  while (reader.next(r)) {
    Tag t;
    t.id = reader.field<std::string>(r, "id");
    t.label = reader.optional_field<std::string>(r, "label", t.id);
    t.artist_count = reader.optional_field<std::uint64_t>(r, "artist_count", 0);
    t.is_genre = reader.optional_field<bool>(r, "is_genre", false);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AffinityRecord> read_affinities(const fs::path& path) {
  RecordReader reader(path, "affinities");
  std::vector<AffinityRecord> out;
  json r;
  while (reader.next(r)) {
    AffinityRecord a;
    a.artist_id = reader.field<std::string>(r, "artist_id");
    a.feature_id = reader.field<std::string>(r, "feature_id");
    a.weight = reader.field<double>(r, "weight");
    if (!std::isfinite(a.weight) || a.weight < 0.0 || a.weight > 1.0) {
      throw Error(ErrorKind::InvalidWeight, reader.where() + ": weight " + std::to_string(a.weight) + " outside [0, 1]");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Event> read_events(const fs::path& path) {
  RecordReader reader(path, "events");
  std::vector<Event> out;
  json r;
  while (reader.next(r)) {
    Event e;
    e.id = reader.field<std::string>(r, "id");
    e.title = reader.field<std::string>(r, "title");
    e.venue = reader.optional_field<std::string>(r, "venue", "");
    const auto start = parse_timestamp(reader.field<std::string>(r, "start_time"));
    if (!start) reader.fail("field 'start_time' is not YYYY-MM-DDTHH:MM:SSZ");
    e.start_time = *start;
    const auto source = parse_event_source(reader.optional_field<std::string>(r, "source", "synthetic"));
    if (!source) reader.fail("field 'source' is not a known event source");
    e.source = *source;
    e.artist_ids = reader.field<std::vector<std::string>>(r, "artist_ids");
    if (e.artist_ids.empty()) reader.fail("field 'artist_ids' is empty");
    out.push_back(std::move(e));
  }
  return out;
}

void write_header(std::ofstream& out, std::string_view kind) {
  out << json{{"format", kCorpusFormat}, {"version", kCorpusVersion}, {"kind", kind}}.dump() << '\n';
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MalformedInput, path.string() + ": cannot write");
  return out;
}

}  // namespace

CorpusPaths CorpusPaths::in_directory(const fs::path& directory) {
  if (!fs::is_directory(directory)) {
    throw Error(ErrorKind::MalformedInput, directory.string() + ": not a directory");
  }
  CorpusPaths paths;
  paths.artists = directory / "artists.ndjson";
  paths.tags = directory / "tags.ndjson";
  paths.affinities = directory / "affinities.ndjson";
  for (const auto& entry : fs::directory_iterator(directory)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("events") && entry.path().extension() == ".ndjson") paths.events.push_back(entry.path());
  }
  std::sort(paths.events.begin(), paths.events.end());
  if (fs::exists(directory / "manifest.json")) paths.manifest = directory / "manifest.json";
  return paths;
}

std::vector<Event> merge_events(std::span<const Event> events) {
  std::vector<Event> merged;
  std::map<std::tuple<std::string, std::string, Timestamp>, std::size_t> by_key;
  for (const auto& e : events) {
    const auto key = std::make_tuple(e.title, e.venue, e.start_time);
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      by_key.emplace(key, merged.size());
      merged.push_back(e);
      continue;
    }
    Event& kept = merged[it->second];
    if (kept.source != e.source) kept.source = EventSource::both;
    for (const auto& a : e.artist_ids) {
      if (std::find(kept.artist_ids.begin(), kept.artist_ids.end(), a) == kept.artist_ids.end()) {
        kept.artist_ids.push_back(a);
      }
    }
  }
  return merged;
}

void finalize(CorpusBundle& bundle) {
  std::unordered_set<ArtistId> has_self;
  for (const auto& a : bundle.affinities) {
    if (a.artist_id == a.feature_id) has_self.insert(a.artist_id);
  }
  for (auto& a : bundle.affinities) {
    if (a.artist_id == a.feature_id) a.weight = 1.0;
  }
  for (const auto& artist : bundle.artists) {
    if (!has_self.contains(artist.id)) bundle.affinities.push_back({artist.id, artist.id, 1.0});
  }
  std::unordered_set<ArtistId> performing;
  for (const auto& e : bundle.events) performing.insert(e.artist_ids.begin(), e.artist_ids.end());
  for (auto& artist : bundle.artists) artist.is_event_artist = artist.is_event_artist || performing.contains(artist.id);
}

std::vector<std::string> validate(const CorpusBundle& bundle, std::size_t min_tag_support) {
  std::vector<std::string> problems;
  std::unordered_set<std::string> artist_ids;
  std::unordered_set<std::string> tag_ids;
  for (const auto& a : bundle.artists) {
    if (!artist_ids.insert(a.id).second) problems.push_back("duplicate artist id '" + a.id + "'");
  }
  for (const auto& t : bundle.tags) {
    if (!tag_ids.insert(t.id).second) problems.push_back("duplicate tag id '" + t.id + "'");
    if (artist_ids.contains(t.id)) problems.push_back("tag id '" + t.id + "' collides with an artist id");
  }
  std::unordered_set<std::string> self;
  std::unordered_map<std::string, std::set<std::string>> tag_support;
  for (const auto& a : bundle.affinities) {
    if (!artist_ids.contains(a.artist_id)) problems.push_back("affinity references unknown artist '" + a.artist_id + "'");
    if (!artist_ids.contains(a.feature_id) && !tag_ids.contains(a.feature_id)) {
      problems.push_back("affinity references unknown feature '" + a.feature_id + "'");
    }
    if (!std::isfinite(a.weight) || a.weight < 0.0 || a.weight > 1.0) {
      problems.push_back("affinity (" + a.artist_id + ", " + a.feature_id + ") weight outside [0, 1]");
    }
    if (a.artist_id == a.feature_id && a.weight == 1.0) self.insert(a.artist_id);
    if (tag_ids.contains(a.feature_id) && a.weight > 0.0) tag_support[a.feature_id].insert(a.artist_id);
  }
  for (const auto& a : bundle.artists) {
    if (!self.contains(a.id)) problems.push_back("artist '" + a.id + "' lacks its unit self-affinity");
  }
  if (min_tag_support > 0) {
    for (const auto& t : bundle.tags) {
      if (tag_support[t.id].size() < min_tag_support) {
        problems.push_back("tag '" + t.id + "' is used by fewer than " + std::to_string(min_tag_support) + " artists");
      }
    }
  }
  std::unordered_set<std::string> event_ids;
  for (const auto& e : bundle.events) {
    if (!event_ids.insert(e.id).second) problems.push_back("duplicate event id '" + e.id + "'");
    if (e.artist_ids.empty()) problems.push_back("event '" + e.id + "' lists no artists");
    for (const auto& a : e.artist_ids) {
      if (!artist_ids.contains(a)) problems.push_back("event '" + e.id + "' references unknown artist '" + a + "'");
    }
  }
  return problems;
}

CorpusBundle load_corpus(const CorpusPaths& paths) {
  CorpusBundle bundle;
  bundle.artists = read_artists(paths.artists);
  bundle.tags = read_tags(paths.tags);
  bundle.affinities = read_affinities(paths.affinities);
  std::vector<Event> events;
  for (const auto& p : paths.events) {
    auto more = read_events(p);
    events.insert(events.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  bundle.events = merge_events(events);
  if (paths.manifest) {
    std::ifstream in(*paths.manifest);
    try {
      const json manifest = json::parse(in);
      if (manifest.value("provenance", "imported") == "synthetic") bundle.provenance = Provenance::synthetic;
      if (manifest.contains("seed") && !manifest.at("seed").is_null()) bundle.seed = manifest.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedInput, paths.manifest->string() + ": " + e.what());
    }
  }
  finalize(bundle);

  // Dangling references are reported as UnknownEntity, everything else as
  // MalformedInput.
  std::unordered_set<std::string> artist_ids;
  std::unordered_set<std::string> tag_ids;
  for (const auto& a : bundle.artists) artist_ids.insert(a.id);
  for (const auto& t : bundle.tags) tag_ids.insert(t.id);
  for (const auto& a : bundle.affinities) {
    if (!artist_ids.contains(a.artist_id)) throw Error(ErrorKind::UnknownEntity, "affinity artist '" + a.artist_id + "'");
    if (!artist_ids.contains(a.feature_id) && !tag_ids.contains(a.feature_id)) {
      throw Error(ErrorKind::UnknownEntity, "affinity feature '" + a.feature_id + "'");
    }
  }
  for (const auto& e : bundle.events) {
    for (const auto& a : e.artist_ids) {
      if (!artist_ids.contains(a)) throw Error(ErrorKind::UnknownEntity, "event '" + e.id + "' artist '" + a + "'");
    }
  }
  if (const auto problems = validate(bundle); !problems.empty()) {
    throw Error(ErrorKind::MalformedInput, problems.front());
  }
  return bundle;
}

CorpusBundle load_corpus(const fs::path& directory) { return load_corpus(CorpusPaths::in_directory(directory)); }

void save_corpus(const CorpusBundle& bundle, const fs::path& directory) {
  fs::create_directories(directory);
  {
    auto out = open_for_write(directory / "artists.ndjson");
    write_header(out, "artists");
    for (const auto& a : bundle.artists) {
      out << json{{"id", a.id},
                  {"name", a.name},
                  {"listener_count", a.listener_count},
                  {"biography", a.biography},
                  {"is_event_artist", a.is_event_artist}}
                 .dump()
          << '\n';
    }
  }
  {
    auto out = open_for_write(directory / "tags.ndjson");
    write_header(out, "tags");
    for (const auto& t : bundle.tags) {
      out << json{{"id", t.id}, {"label", t.label}, {"artist_count", t.artist_count}, {"is_genre", t.is_genre}}.dump()
          << '\n';
    }
  }
  {
    auto out = open_for_write(directory / "affinities.ndjson");
    write_header(out, "affinities");
    for (const auto& a : bundle.affinities) {
      out << json{{"artist_id", a.artist_id}, {"feature_id", a.feature_id}, {"weight", a.weight}}.dump() << '\n';
    }
  }
  {
    auto out = open_for_write(directory / "events.ndjson");
    write_header(out, "events");
    for (const auto& e : bundle.events) {
      out << json{{"id", e.id},
                  {"title", e.title},
                  {"venue", e.venue},
                  {"start_time", format_timestamp(e.start_time)},
                  {"source", to_string(e.source)},
                  {"artist_ids", e.artist_ids}}
                 .dump()
          << '\n';
    }
  }
  auto manifest = open_for_write(directory / "manifest.json");
  json m{{"format", kCorpusFormat},
         {"version", kCorpusVersion},
         {"provenance", bundle.provenance == Provenance::synthetic ? "synthetic" : "imported"},
         {"seed", bundle.seed ? json(*bundle.seed) : json(nullptr)}};
  manifest << m.dump(2) << '\n';
}

std::string normalize_label(std::string_view label) {
  std::string out;
  bool pending_space = false;
  for (const char raw : label) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

TagId tag_id_for(std::string_view label) { return "tag:" + normalize_label(label); }

std::vector<Tag> build_tag_vocabulary(std::span<const RawTagAssignment> raw, std::size_t min_support) {
  std::map<std::string, std::set<ArtistId>> carriers;
  for (const auto& r : raw) {
    const auto label = normalize_label(r.label);
    if (label.empty() || r.weight <= 0.0) continue;
    carriers[label].insert(r.artist_id);
  }
  std::vector<Tag> out;
  for (const auto& [label, artists] : carriers) {
    if (artists.size() < min_support) continue;
    out.push_back({tag_id_for(label), label, artists.size(), false});
  }
  return out;
}

std::vector<AffinityRecord> tag_affinities(std::span<const RawTagAssignment> raw, std::span<const Tag> vocabulary) {
  std::unordered_set<TagId> kept;
  for (const auto& t : vocabulary) kept.insert(t.id);
  std::map<std::pair<ArtistId, TagId>, double> cells;
  for (const auto& r : raw) {
    const auto id = tag_id_for(r.label);
    if (!kept.contains(id) || r.weight <= 0.0) continue;
    if (r.weight > 1.0 || !std::isfinite(r.weight)) {
      throw Error(ErrorKind::InvalidWeight, "tag weight for '" + r.artist_id + "' outside [0, 1]");
    }
    auto& cell = cells[{r.artist_id, id}];
    cell = std::max(cell, r.weight);
  }
  std::vector<AffinityRecord> out;
  out.reserve(cells.size());
  for (const auto& [key, weight] : cells) out.push_back({key.first, key.second, weight});
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<AffinityRecord> mine_biography_tags(std::span<const Artist> artists, std::span<const Tag> vocabulary) {
  std::vector<std::pair<const Tag*, std::vector<std::string>>> patterns;
  for (const auto& t : vocabulary) {
    auto tokens = tokenize(t.label);
    if (!tokens.empty()) patterns.emplace_back(&t, std::move(tokens));
  }
  std::vector<AffinityRecord> out;
  for (const auto& artist : artists) {
    if (artist.biography.empty()) continue;
    const auto words = tokenize(artist.biography);
    for (const auto& [tag, pattern] : patterns) {
      if (pattern.size() > words.size()) continue;
      const auto hit = std::search(words.begin(), words.end(), pattern.begin(), pattern.end());
      if (hit != words.end()) out.push_back({artist.id, tag->id, 1.0});
    }
  }
  return out;
}

}  // namespace eventrec
