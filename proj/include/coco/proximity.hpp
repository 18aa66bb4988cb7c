#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "coco/ranked.hpp"
#include "coco/types.hpp"

namespace coco {

struct ProximityEntry {
  TrackIndex i = 0;  // i < j
  TrackIndex j = 0;
  double value = 0.0;
};

/// Sparse symmetric track-by-track matrix of windowed co-occurrence
/// weights. The canonical storage is the upper triangle (i < j); a mirrored
/// adjacency index is kept for row scans. Self-pairs are never stored.
class ProximityMatrix {
 public:
  ProximityMatrix() = default;
  /// entries must be sorted by (i, j) with i < j and positive values.
  ProximityMatrix(TrackIndex num_tracks, int window, std::vector<ProximityEntry> entries);

  TrackIndex num_tracks() const { return num_tracks_; }
  int window() const { return window_; }
  std::int64_t stored_pairs() const { return static_cast<std::int64_t>(entries_.size()); }
  const std::vector<ProximityEntry>& entries() const { return entries_; }

  /// Symmetric lookup; 0.0 when the pair is absent (including i == j).
  double at(TrackIndex i, TrackIndex j) const;

  struct Neighbor {
    TrackIndex track;
    double weight;
  };
  /// All neighbors of a track, ascending by track index.
  std::span<const Neighbor> neighbors(TrackIndex t) const;

 private:
  TrackIndex num_tracks_ = 0;
  int window_ = 10;
  std::vector<ProximityEntry> entries_;
  std::vector<std::int64_t> adj_offsets_{0};
  std::vector<Neighbor> adj_;
};

/// Accumulates, for every playlist and every position pair (a, b) with
/// a < b and b - a < window, the weight 1 - (b - a)/window onto the track
/// pair. Pairs of the same track at two positions fall on the excluded
/// diagonal and are dropped. threads > 1 shards playlists and merges the
/// partial sums in shard order.
ProximityMatrix build_proximity(std::span<const Playlist> playlists, int window = 10,
                                int threads = 1);

/// g[i] = sum over seed tracks j of S[j][i]. Seed entries are computed like
/// any other; callers exclude seeds from output lists.
std::vector<double> score_tp(const ProximityMatrix& S, std::span<const TrackIndex> seeds);

/// Full row sums of S, i.e. g over X = T. Reusable for every no-seed
/// playlist.
std::vector<double> popularity_vector(const ProximityMatrix& S);

/// Nonempty seeds: top-k of score_tp excluding seeds. Empty seeds: top-k of
/// the popularity vector. Zero-score tracks are omitted, so the list may be
/// shorter than k.
RankedList recommend_tp(const ProximityMatrix& S, std::span<const TrackIndex> seeds, int k);

// Proximity store: header plus (i, j, value) triplets for i < j, bit-exact
// round trip.
void save_proximity(const ProximityMatrix& S, const std::filesystem::path& path);
ProximityMatrix load_proximity(const std::filesystem::path& path);

}  // namespace coco
