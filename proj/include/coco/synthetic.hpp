#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace coco {

/// Parameters for the seeded desk-scale corpus generator. Tracks are
/// grouped into clusters sharing a dominant genre and a small pool of
/// titles; playlists draw mostly from one cluster, so title, genre, and
/// co-occurrence signal all exist.
struct SyntheticSpec {
  int num_playlists = 200;
  int num_tracks = 800;
  int num_artists = 120;
  int num_clusters = 4;
  double title_prob = 0.85;     // fraction of playlists with a title
  double long_fraction = 0.12;  // fraction long enough for 100-seed categories
  double cluster_affinity = 0.85;
  int num_slices = 2;
  std::uint64_t seed = 1;
};

struct SyntheticPaths {
  std::vector<std::filesystem::path> slices;
  std::filesystem::path genre_csv;
  std::filesystem::path config_json;  // starter pipeline config
};

/// Writes MPD-format slice files, a genre table CSV, and a starter config
/// into out_dir. Deterministic for a fixed spec.
SyntheticPaths generate_synthetic_corpus(const SyntheticSpec& spec,
                                         const std::filesystem::path& out_dir);

}  // namespace coco
