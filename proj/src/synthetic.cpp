#include "coco/synthetic.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coco/error.hpp"
#include "coco/features.hpp"
#include "coco/rng.hpp"

namespace coco {

using nlohmann::json;

namespace {

const std::array<const char*, 8> kMoods = {"chill",  "epic",   "late night", "morning",
                                           "summer", "winter", "road trip",  "focus"};
const std::array<const char*, 6> kFlavors = {"vibes", "mix", "hits", "anthems", "classics",
                                             "party"};

std::string cluster_title(int cluster, std::uint64_t pick) {
  // six stable titles per cluster so title features repeat across playlists
  const auto mood = kMoods[(static_cast<std::size_t>(cluster) * 2 + pick % 3) % kMoods.size()];
  const auto flavor = kFlavors[(static_cast<std::size_t>(cluster) + pick / 3 % 2) % kFlavors.size()];
  return std::string(mood) + " " + flavor;
}

// Case and punctuation noise that normalizes back to the base title.
std::string decorate_title(const std::string& base, Rng& rng) {
  std::string out = base;
  switch (rng.next_below(4)) {
    case 0: break;
    case 1:
      for (char& c : out)
        if (c >= 'a' && c <= 'z' && rng.next_below(2) == 0) c = static_cast<char>(c - 'a' + 'A');
      break;
    case 2: out = "  " + out + "!!"; break;
    case 3: out += " :)"; break;
  }
  return out;
}

std::string track_uri(int t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "spotify:track:synth%06d", t);
  return buf;
}

std::string artist_uri(int a) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "spotify:artist:synth%04d", a);
  return buf;
}

}  // namespace

SyntheticPaths generate_synthetic_corpus(const SyntheticSpec& spec,
                                         const std::filesystem::path& out_dir) {
  if (spec.num_playlists < 1 || spec.num_tracks < 1 || spec.num_artists < 1 ||
      spec.num_clusters < 1 || spec.num_slices < 1)
    throw Error("synthetic corpus counts must be >= 1");
  if (spec.num_clusters > spec.num_tracks)
    throw Error("synthetic corpus needs at least one track per cluster");
  if (spec.num_artists > spec.num_tracks)
    throw Error("synthetic corpus needs num_artists <= num_tracks");
  if (spec.title_prob < 0.0 || spec.title_prob > 1.0 || spec.long_fraction < 0.0 ||
      spec.long_fraction > 1.0 || spec.cluster_affinity < 0.0 || spec.cluster_affinity > 1.0)
    throw Error("synthetic corpus fractions must be in [0, 1]");

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path slice_dir = out_dir / "slices";
  std::filesystem::create_directories(slice_dir);

  Rng rng(spec.seed);
  const int pool_size = spec.num_tracks / spec.num_clusters;

  auto artist_of = [&](int t) {
    return static_cast<int>(static_cast<std::int64_t>(t) * spec.num_artists / spec.num_tracks);
  };

  // playlists
  std::vector<json> playlist_objects;
  playlist_objects.reserve(static_cast<std::size_t>(spec.num_playlists));
  const int num_long = static_cast<int>(spec.long_fraction * spec.num_playlists);
  for (int i = 0; i < spec.num_playlists; ++i) {
    const int cluster = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.num_clusters)));
    const bool long_playlist = i < num_long;
    const int length =
        long_playlist ? 110 + static_cast<int>(rng.next_below(31))
                      : 10 + static_cast<int>(rng.next_below(31));

    // a step-1 walk over the cluster pool keeps nearby tracks adjacent, so
    // co-occurrence carries signal; occasional jumps add cross-cluster noise
    const int start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool_size)));
    std::vector<int> tracks;
    tracks.reserve(static_cast<std::size_t>(length));
    for (int s = 0; s < length; ++s) {
      if (rng.next_unit() < spec.cluster_affinity || spec.num_clusters == 1) {
        const int pool_pos = (start + s) % pool_size;
        tracks.push_back(cluster * pool_size + pool_pos);
      } else {
        const int foreign_cluster =
            (cluster + 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.num_clusters - 1)))) %
            spec.num_clusters;
        tracks.push_back(foreign_cluster * pool_size +
                         static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool_size))));
      }
    }

    json track_array = json::array();
    for (std::size_t pos = 0; pos < tracks.size(); ++pos) {
      const int t = tracks[pos];
      track_array.push_back({{"pos", pos},
                             {"track_uri", track_uri(t)},
                             {"artist_uri", artist_uri(artist_of(t))},
                             {"track_name", "Synth Track " + std::to_string(t)},
                             {"artist_name", "Synth Artist " + std::to_string(artist_of(t))}});
    }
    json obj = {{"pid", i}, {"tracks", std::move(track_array)}};
    if (rng.next_unit() < spec.title_prob)
      obj["name"] = decorate_title(cluster_title(cluster, rng.next_u64() % 6), rng);
    playlist_objects.push_back(std::move(obj));
  }

  SyntheticPaths paths;
  for (int s = 0; s < spec.num_slices; ++s) {
    const int begin = spec.num_playlists * s / spec.num_slices;
    const int end = spec.num_playlists * (s + 1) / spec.num_slices;
    json playlists = json::array();
    for (int i = begin; i < end; ++i) playlists.push_back(std::move(playlist_objects[static_cast<std::size_t>(i)]));
    json slice = {{"playlists", std::move(playlists)}};

    char name[32];
    std::snprintf(name, sizeof(name), "slice-%04d.json", s);
    const std::filesystem::path slice_path = slice_dir / name;
    std::ofstream out(slice_path);
    if (!out) throw Error("cannot write synthetic slice: " + slice_path.string());
    out << slice.dump(2) << '\n';
    paths.slices.push_back(slice_path);
  }

  // genre table: one dominant genre per cluster plus a secondary, with a
  // few tracks left out to exercise the identity-only path
  paths.genre_csv = out_dir / "genres.csv";
  {
    std::ofstream out(paths.genre_csv);
    if (!out) throw Error("cannot write synthetic genre table: " + paths.genre_csv.string());
    out << "track_uri";
    for (const char* g : kGenreNames) out << ',' << g;
    out << '\n';
    for (int t = 0; t < spec.num_tracks; ++t) {
      if (rng.next_below(20) == 0) continue;  // ~5% missing
      const int cluster = (t / pool_size) % spec.num_clusters;
      const int dominant = cluster % kNumGenres;
      const int secondary = (dominant + 5) % kNumGenres;
      std::array<double, kNumGenres> probs{};
      probs[static_cast<std::size_t>(dominant)] = 0.55 + 0.4 * rng.next_unit();
      probs[static_cast<std::size_t>(secondary)] = 0.05 + 0.2 * rng.next_unit();
      out << track_uri(t);
      for (double p : probs) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.4f", p);
        out << ',' << buf;
      }
      out << '\n';
    }
  }

  // starter config: desk-scale training settings, relative paths
  paths.config_json = out_dir / "config.json";
  {
    json config = {
        {"corpus", {"slices"}},
        {"genre_table", "genres.csv"},
        {"output_dir", "out"},
        {"per_category", std::max(1, spec.num_playlists / 100)},
        {"rng_seed", spec.seed},
        {"window", 10},
        {"threads", 1},
        {"list_length", 500},
        {"no_seed_source", "fusion"},
        {"artist_credit", false},
        {"mf",
         {{"num_factors", 48},
          {"l2_playlist", 1e-6},
          {"l2_track", 1e-6},
          {"epochs", 25},
          {"learning_rate", 0.05},
          {"max_sampled_negatives", 50},
          {"rng_seed", spec.seed},
          {"candidate_list_size", 4000},
          {"use_biases", true}}},
        {"fusion", {{"alpha_mf", 0.7}, {"alpha_tp", 0.3}}},
    };
    std::ofstream out(paths.config_json);
    if (!out) throw Error("cannot write synthetic config: " + paths.config_json.string());
    out << config.dump(2) << '\n';
  }

  return paths;
}

}  // namespace coco
