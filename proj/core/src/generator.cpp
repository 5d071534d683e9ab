#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_set>

#include <Eigen/Dense>

#include "eventrec/error.hpp"
#include "eventrec/eval.hpp"
#include "eventrec/ingest.hpp"

namespace eventrec {
namespace {

constexpr std::array kGenreLabels{
    "indie rock", "hip hop",  "jazz",     "electronic", "folk",       "metal",     "punk",
    "soul",       "country",  "blues",    "reggae",     "classical",  "house",     "techno",
    "ambient",    "funk",     "pop",      "hardcore",   "shoegaze",   "bluegrass",
};

constexpr std::array kAdjectives{
    "dreamy", "lo-fi",  "dark",    "melodic", "noisy",  "acoustic", "heavy",  "upbeat", "moody",   "raw",
    "lush",   "minimal", "groovy", "psychedelic", "jangly", "fuzzy", "brooding", "sunny", "epic", "quiet",
};

constexpr std::array kNouns{
    "guitars", "vocals", "synths", "drums",  "bass",    "horns", "strings",  "beats",
    "piano",   "harmony", "riffs", "grooves", "ballads", "anthems", "jams",  "textures",
};

constexpr std::array kQualifiers{"revival", "fusion", "wave", "core", "pop", "jazz", "noise", "soul"};

constexpr std::array kFirstWords{
    "Silver", "Paper", "Velvet", "Hollow", "Golden", "Broken", "Electric", "Quiet", "Wild",   "Neon",
    "Crimson", "Lonely", "Iron",  "Glass",  "Midnight", "Northern", "Distant", "Rusty", "Static", "Wooden",
    "Amber",  "Cosmic", "Faded",  "Little", "Secret", "Summer", "Winter",  "Purple", "Lucky",  "Tiny",
    "Burning", "Frozen", "Sleepy", "Honest", "Savage", "Gentle", "Hidden", "Sacred", "Radio", "Modern",
};

constexpr std::array kSecondWords{
    "Foxes",  "Harbor",   "Lanterns", "Ghosts",  "Rivers",  "Owls",    "Engines", "Pilots",  "Saints", "Wolves",
    "Echoes", "Mountains", "Parade",  "Hearts",  "Machines", "Tigers", "Sisters", "Brothers", "Oceans", "Comets",
    "Gardens", "Signals", "Shadows", "Daggers", "Horses",  "Waves",   "Kings",   "Queens",  "Towers",  "Birds",
    "Magnets", "Canyons", "Thieves", "Mirrors", "Drifters", "Orchids", "Sparks", "Giants",  "Bells",   "Wires",
    "Fables", "Satellites", "Ravens", "Islands", "Monks", "Lions", "Bandits", "Valleys", "Rockets", "Moths",
};

constexpr std::array kVenues{
    "The Crocodile", "Neumos",          "The Showbox",   "Tractor Tavern", "Barboza",     "The Sunset",
    "Chop Suey",     "Nectar Lounge",   "High Dive",     "The Triple Door", "El Corazon", "Columbia City Theater",
};

constexpr const char* kSeenLive = "seen live";
constexpr const char* kFavorites = "favorites";

std::string padded(const char* prefix, std::size_t value, std::size_t total) {
  const int width = static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size());
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%s%0*zu", prefix, width, value);
  return buffer;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

std::vector<std::string> descriptor_labels(std::size_t count) {
  const std::size_t pairs = kAdjectives.size() * kNouns.size();
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; out.size() < count; ++i) {
    const std::size_t a = i % kAdjectives.size();
    const std::size_t n = (i / kAdjectives.size() + i) % kNouns.size();
    const std::size_t q = i / pairs;
    std::string label = std::string(kAdjectives[a]) + " " + kNouns[n];
    if (q > 0) label += q <= kQualifiers.size() ? std::string(" ") + kQualifiers[q - 1] : " " + std::to_string(q);
    out.push_back(std::move(label));
  }
  return out;
}

std::string artist_name(std::size_t i) {
  const std::size_t a = kFirstWords.size();
  const std::size_t b = kSecondWords.size();
  std::string name = std::string(kFirstWords[i % a]) + " " + kSecondWords[(i / a) % b];
  if (i >= a * b) name += " " + std::to_string(i / (a * b) + 1);
  return name;
}

// Footprints f_i = clip(round(median * exp(0.9 z_i))), z_i mixing the
// standardized rank with independent noise at mixing coefficient rho.
std::vector<std::size_t> footprints(const GeneratorConfig& config, std::span<const double> rank,
                                    std::span<const double> noise, double rho) {
  const double n = static_cast<double>(rank.size());
  const double mean = (n - 1.0) / 2.0;
  double var = 0.0;
  for (const double r : rank) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  const std::size_t hard_max = std::min(config.max_footprint, config.n_artists + config.n_tags);
  std::vector<std::size_t> out(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) {
    const double z = rho * (rank[i] - mean) / sd + std::sqrt(1.0 - rho * rho) * noise[i];
    const double f = std::round(std::exp(std::log(static_cast<double>(config.median_footprint)) + 0.9 * z));
    out[i] = static_cast<std::size_t>(
        std::clamp(f, static_cast<double>(config.min_footprint), static_cast<double>(hard_max)));
  }
  return out;
}

}  // namespace

void check(const GeneratorConfig& c) {
  const auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (c.n_artists < 2) bad("n_artists must be at least 2");
  if (c.n_event_artists == 0) bad("n_event_artists must be positive");
  if (c.n_event_artists > c.n_artists) bad("n_event_artists exceeds n_artists");
  if (c.n_genres == 0) bad("n_genres must be positive");
  if (c.n_tags <= c.n_genres + 2) bad("n_tags must exceed n_genres + 2");
  if (c.n_events == 0) bad("n_events must be positive");
  if (c.n_events > c.n_event_artists) bad("n_events exceeds n_event_artists");
  if (!(c.power_law_exponent > 0.0) || !std::isfinite(c.power_law_exponent)) bad("power_law_exponent must be positive");
  const double rho = c.footprint_popularity_correlation_target;
  if (!(rho > -1.0 && rho < 0.0)) bad("correlation target must lie in (-1, 0)");
  if (c.latent_dimensions == 0 || c.scenes_per_genre == 0) bad("latent geometry must be non-empty");
  if (!(c.scene_spread >= 0.0) || !(c.artist_spread >= 0.0)) bad("spreads must be non-negative");
  if (c.min_footprint < 2 || c.min_footprint > c.median_footprint || c.median_footprint > c.max_footprint) {
    bad("footprints must satisfy 2 <= min <= median <= max");
  }
  if (!(c.tag_share >= 0.0 && c.tag_share <= 1.0)) bad("tag_share must lie in [0, 1]");
  if (c.max_tags_per_artist == 0) bad("max_tags_per_artist must be positive");
  if (!(c.bottom_decile_share >= 0.0 && c.bottom_decile_share <= 1.0)) bad("bottom_decile_share must lie in [0, 1]");
  if (!(c.secondary_genre_share >= 0.0 && c.secondary_genre_share <= 1.0)) bad("secondary_genre_share must lie in [0, 1]");
}

CorpusBundle generate_synthetic_corpus(const GeneratorConfig& config) {
  check(config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = config.n_artists;
  const auto dims = static_cast<Eigen::Index>(config.latent_dimensions);

  // Listener counts: power law in rank with lognormal jitter, then re-sorted
  // so rank 0 is the most listened artist.
  std::vector<std::uint64_t> counts(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double c = 1e7 * std::pow(static_cast<double>(r + 1), -config.power_law_exponent) * std::exp(0.3 * normal(rng));
    counts[r] = static_cast<std::uint64_t>(std::max(1.0, std::floor(c)));
  }
  std::sort(counts.begin(), counts.end(), std::greater<>());
  std::vector<std::size_t> by_rank(n);
  std::iota(by_rank.begin(), by_rank.end(), 0);
  std::shuffle(by_rank.begin(), by_rank.end(), rng);
  std::vector<std::size_t> rank_of(n);
  for (std::size_t r = 0; r < n; ++r) rank_of[by_rank[r]] = r;

  // Planted geometry: genre centers on the unit sphere, scenes around them,
  // artists around their scene.
  std::uniform_int_distribution<std::size_t> pick_genre(0, config.n_genres - 1);
  std::uniform_int_distribution<std::size_t> pick_scene(0, config.scenes_per_genre - 1);
  Eigen::MatrixXd centers = gaussian(rng, static_cast<Eigen::Index>(config.n_genres), dims, 1.0);
  centers.rowwise().normalize();
  std::vector<Eigen::MatrixXd> scenes;
  for (std::size_t g = 0; g < config.n_genres; ++g) {
    scenes.push_back(gaussian(rng, static_cast<Eigen::Index>(config.scenes_per_genre), dims, config.scene_spread));
  }
  std::vector<std::size_t> genre(n);
  Eigen::MatrixXd position(static_cast<Eigen::Index>(n), dims);
  for (std::size_t i = 0; i < n; ++i) {
    genre[i] = pick_genre(rng);
    const std::size_t scene = pick_scene(rng);
    const auto row = static_cast<Eigen::Index>(i);
    position.row(row) = centers.row(static_cast<Eigen::Index>(genre[i])) +
                        scenes[genre[i]].row(static_cast<Eigen::Index>(scene)) +
                        gaussian(rng, 1, dims, config.artist_spread);
  }

  // Footprints correlated with popularity rank; the mixing coefficient is
  // bisected until the realized Pearson correlation meets the target.
  std::vector<double> rank(n);
  std::vector<double> noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    rank[i] = static_cast<double>(rank_of[i]);
    noise[i] = normal(rng);
  }
  const auto realized = [&](double rho) {
    const auto f = footprints(config, rank, noise, rho);
    const std::vector<double> fd(f.begin(), f.end());
    return pearson(fd, rank);
  };
  double lo = -0.999, hi = -0.001;
  for (int step = 0; step < 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    (realized(mid) > config.footprint_popularity_correlation_target ? hi : lo) = mid;
  }
  const auto footprint = footprints(config, rank, noise, 0.5 * (lo + hi));

  // Tag vocabulary: one tag per genre, two noisy listening-habit tags and
  // descriptor tags with a unit latent direction each.
  const std::size_t n_descriptors = config.n_tags - config.n_genres - 2;
  std::vector<std::string> tag_labels;
  for (std::size_t g = 0; g < config.n_genres; ++g) {
    tag_labels.push_back(g < kGenreLabels.size() ? std::string(kGenreLabels[g]) : "genre " + std::to_string(g + 1));
  }
  for (auto& label : descriptor_labels(n_descriptors)) tag_labels.push_back(std::move(label));
  const std::size_t seen_live = tag_labels.size();
  tag_labels.emplace_back(kSeenLive);
  const std::size_t favorites = tag_labels.size();
  tag_labels.emplace_back(kFavorites);
  Eigen::MatrixXd directions = gaussian(rng, static_cast<Eigen::Index>(n_descriptors), dims, 1.0);
  directions.rowwise().normalize();

  std::vector<ArtistId> artist_ids(n);
  for (std::size_t i = 0; i < n; ++i) artist_ids[i] = padded("ar", i, n);

  std::uniform_real_distribution<double> similarity_weight(0.3, 1.0);
  std::uniform_real_distribution<double> tag_weight(0.5, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<std::pair<std::size_t, double>>> raw_tags(n);
  std::vector<std::size_t> support(tag_labels.size(), 0);
  CorpusBundle bundle;
  bundle.provenance = Provenance::synthetic;
  bundle.seed = config.seed;

  std::vector<double> distance(n);
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> descriptor_order(n_descriptors);
  Eigen::VectorXd descriptor_score(static_cast<Eigen::Index>(n_descriptors));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = footprint[i];
    std::size_t nt = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.tag_share * static_cast<double>(f))), 1,
        config.max_tags_per_artist);
    nt = std::min({nt, f - 1, n_descriptors + 1});
    const std::size_t ns = std::min(f - 1 - nt, n - 1);

    // Similarity links to the nearest artists in latent space.
    for (std::size_t j = 0; j < n; ++j) {
      distance[j] = (position.row(static_cast<Eigen::Index>(i)) - position.row(static_cast<Eigen::Index>(j))).squaredNorm();
    }
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ns), order.end(),
                      [&](std::size_t a, std::size_t b) { return distance[a] != distance[b] ? distance[a] < distance[b] : a < b; });
    std::vector<double> weights(ns);
    for (auto& w : weights) w = similarity_weight(rng);
    std::sort(weights.begin(), weights.end(), std::greater<>());
    for (std::size_t s = 0; s < ns; ++s) bundle.affinities.push_back({artist_ids[i], artist_ids[order[s]], weights[s]});

    // Genre tag, often the closest neighbouring genre, then the descriptors
    // best aligned with the artist.
    auto& tags = raw_tags[i];
    tags.push_back({genre[i], tag_weight(rng)});
    if (nt > 1 && config.n_genres > 1 && unit(rng) < config.secondary_genre_share) {
      const auto row = position.row(static_cast<Eigen::Index>(i));
      std::size_t nearest = genre[i] == 0 ? 1 : 0;
      for (std::size_t g = 0; g < config.n_genres; ++g) {
        if (g == genre[i]) continue;
        if ((centers.row(static_cast<Eigen::Index>(g)) - row).squaredNorm() <
            (centers.row(static_cast<Eigen::Index>(nearest)) - row).squaredNorm()) {
          nearest = g;
        }
      }
      tags.push_back({nearest, tag_weight(rng)});
    }
    if (tags.size() < nt) {
      const std::size_t want = nt - tags.size();
      descriptor_score = directions * position.row(static_cast<Eigen::Index>(i)).transpose();
      for (Eigen::Index t = 0; t < descriptor_score.size(); ++t) descriptor_score(t) += 0.5 * normal(rng);
      std::iota(descriptor_order.begin(), descriptor_order.end(), 0);
      std::partial_sort(descriptor_order.begin(), descriptor_order.begin() + static_cast<std::ptrdiff_t>(want),
                        descriptor_order.end(), [&](std::size_t a, std::size_t b) {
                          return descriptor_score(static_cast<Eigen::Index>(a)) > descriptor_score(static_cast<Eigen::Index>(b));
                        });
      for (std::size_t t = 0; t < want; ++t) tags.push_back({config.n_genres + descriptor_order[t], tag_weight(rng)});
    }
    // Listening-habit tags displace the weakest descriptors.
    if (nt >= 4) {
      if (unit(rng) < 0.3) tags[tags.size() - 1].first = seen_live;
      if (unit(rng) < 0.2) tags[tags.size() - 2].first = favorites;
    }
    for (const auto& [t, w] : tags) ++support[t];
  }

  // Vocabulary shaping: tags below min support disappear with their affinities.
  std::vector<bool> kept(tag_labels.size());
  for (std::size_t t = 0; t < tag_labels.size(); ++t) {
    kept[t] = support[t] >= std::max<std::size_t>(config.min_tag_support, 1);
    if (!kept[t]) continue;
    bundle.tags.push_back({tag_id_for(tag_labels[t]), tag_labels[t], support[t], t < config.n_genres});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [t, w] : raw_tags[i]) {
      if (kept[t]) bundle.affinities.push_back({artist_ids[i], tag_id_for(tag_labels[t]), w});
    }
  }

  // Event artists: a fixed share from the three least popular deciles.
  std::vector<std::size_t> bottom, head;
  for (std::size_t i = 0; i < n; ++i) {
    (10 * rank_of[i] >= 7 * n ? bottom : head).push_back(i);
  }
  std::size_t from_bottom = static_cast<std::size_t>(
      std::ceil(config.bottom_decile_share * static_cast<double>(config.n_event_artists)));
  from_bottom = std::min(from_bottom, bottom.size());
  from_bottom = std::max(from_bottom, config.n_event_artists - std::min(config.n_event_artists, head.size()));
  std::vector<std::size_t> performers;
  std::sample(bottom.begin(), bottom.end(), std::back_inserter(performers), from_bottom, rng);
  std::sample(head.begin(), head.end(), std::back_inserter(performers), config.n_event_artists - from_bottom, rng);
  std::shuffle(performers.begin(), performers.end(), rng);
  std::stable_sort(performers.begin(), performers.end(), [&](std::size_t a, std::size_t b) { return genre[a] < genre[b]; });
  std::unordered_set<std::size_t> performing(performers.begin(), performers.end());

  for (std::size_t i = 0; i < n; ++i) {
    Artist a;
    a.id = artist_ids[i];
    a.name = artist_name(i);
    a.listener_count = counts[rank_of[i]];
    a.biography = a.name + " is a " + tag_labels[genre[i]] + " act";
    if (raw_tags[i].size() > 1 && raw_tags[i][1].first < config.n_genres + n_descriptors) {
      a.biography += " known for " + tag_labels[raw_tags[i][1].first];
    }
    a.biography += ".";
    a.is_event_artist = performing.contains(i);
    bundle.artists.push_back(std::move(a));
  }

  // Events: consecutive genre-sorted performers share a bill.
  std::uniform_int_distribution<int> gap_days(1, 3);
  std::uniform_int_distribution<int> start_hour(19, 22);
  std::uniform_int_distribution<std::size_t> pick_venue(0, kVenues.size() - 1);
  auto day = std::chrono::floor<std::chrono::days>(config.first_event);
  std::size_t next = 0;
  for (std::size_t e = 0; e < config.n_events; ++e) {
    const std::size_t size = (config.n_event_artists * (e + 1)) / config.n_events - next;
    Event event;
    event.id = padded("ev", e, config.n_events);
    for (std::size_t s = 0; s < size; ++s) event.artist_ids.push_back(artist_ids[performers[next + s]]);
    event.title = bundle.artists[performers[next]].name;
    if (size > 1) event.title += " with " + bundle.artists[performers[next + 1]].name;
    next += size;
    event.venue = kVenues[pick_venue(rng)];
    if (e > 0) day += std::chrono::days{gap_days(rng)};
    event.start_time = std::chrono::time_point_cast<std::chrono::seconds>(day + std::chrono::hours{start_hour(rng)});
    event.source = EventSource::synthetic;
    bundle.events.push_back(std::move(event));
  }

  finalize(bundle);
  return bundle;
}

}  // namespace eventrec
