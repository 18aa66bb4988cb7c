#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coco/types.hpp"

namespace coco {

struct Corpus {
  Catalog catalog;
  std::vector<Playlist> playlists;
};

/// Ingests MPD-format slice files in the order given. Every distinct
/// track_uri receives exactly one dense index; playlist order and track
/// order are preserved. Throws on malformed documents (naming file and
/// offset) and on a pid seen twice.
Corpus load_corpus(const std::vector<std::filesystem::path>& files);

/// Lowercases, deletes ASCII punctuation, trims, and collapses internal
/// whitespace runs to a single space. Idempotent. Bytes outside ASCII pass
/// through unchanged.
std::string normalize_title(std::string_view raw);

/// One held-out playlist: the seed view a recommender sees plus the ground
/// truth it is scored against. `seeds.tracks` keeps one entry per seed
/// position (repeats possible); ground_truth is duplicate-free, in original
/// playlist order, and disjoint from the seed track set.
struct TestPlaylist {
  Playlist seeds;
  std::vector<TrackIndex> ground_truth;
  ChallengeCategory category = ChallengeCategory::TitleOnly;
};

struct EvalSplit {
  std::vector<Playlist> train;
  std::vector<TestPlaylist> test;
};

/// Draws per_category playlists for each of the ten categories, category by
/// category in enum order, uniformly without replacement among eligible
/// playlists. Eligible means strictly more distinct tracks than the
/// category's seed count, and a nonempty normalized title where the
/// category carries one. Deterministic for a fixed rng_seed. Selected
/// playlists are removed from train.
EvalSplit make_challenge_split(const std::vector<Playlist>& playlists,
                               int per_category, std::uint64_t rng_seed);

void write_split(const EvalSplit& split, const Catalog& catalog,
                 const std::filesystem::path& train_path,
                 const std::filesystem::path& test_path);

/// Reads a persisted split back, resolving URIs through `catalog`. URIs
/// absent from the catalog are an error.
EvalSplit read_split(const Catalog& catalog,
                     const std::filesystem::path& train_path,
                     const std::filesystem::path& test_path);

/// Duplicate-free seed track set of a test playlist, ascending.
std::vector<TrackIndex> seed_track_set(const Playlist& seeds);

}  // namespace coco
