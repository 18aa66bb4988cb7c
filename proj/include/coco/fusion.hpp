#pragma once

#include <span>
#include <vector>

#include "coco/mf.hpp"
#include "coco/proximity.hpp"
#include "coco/ranked.hpp"

namespace coco {

struct FusionWeights {
  double alpha_mf = 0.7;
  double alpha_tp = 0.3;

  void validate() const;  // both finite and in [0, 1]
};

/// Rank-normalized linear fusion. With M the longer input length and
/// r_X(t) the zero-based rank of t in list X, each track in either list
/// scores (alpha_mf * w_mf + alpha_tp * w_tp) / 2 where w_X = M - r_X, and
/// w_X = 0 for a track absent from list X. Output is top-k by that score,
/// ties by ascending track index. Inputs must be duplicate-free.
RankedList fuse(const RankedList& list_mf, const RankedList& list_tp, FusionWeights w,
                int k = 500);

enum class NoSeedSource { Fusion, Mf, Tp };

struct ContinuationConfig {
  FusionWeights weights;
  int list_length = 500;
  int candidate_k = 4000;
  NoSeedSource no_seed_source = NoSeedSource::Fusion;
};

/// Total popularity ordering of all tracks (score descending, ties by
/// ascending index), used as the padding sequence for short lists.
std::vector<TrackIndex> popularity_order(std::span<const double> popularity);

/// Everything a per-playlist continuation needs, built once.
struct ContinuationContext {
  const HybridFactorizationModel* model = nullptr;
  const TrackLatents* track_latents = nullptr;
  const FeatureMatrix* playlist_features = nullptr;
  const ProximityMatrix* proximity = nullptr;
  const std::vector<TrackIndex>* popularity_rank = nullptr;  // from popularity_order
};

/// Appends tracks from the popularity ordering (skipping seeds and tracks
/// already listed) until the list reaches `length`, then truncates. Padded
/// entries carry score 0 in popularity order.
void pad_with_popularity(RankedList& list, std::span<const TrackIndex> popularity_rank,
                         std::span<const TrackIndex> seed_tracks, int length);

/// Runs the MF and TP recommenders for one playlist, fuses them, and pads
/// to exactly config.list_length tracks disjoint from the seeds. Zero-seed
/// playlists route through config.no_seed_source. Throws when fewer than
/// list_length non-seed tracks exist.
RankedList continue_playlist(const ContinuationContext& ctx, std::int64_t playlist_row,
                             std::span<const TrackIndex> seed_tracks,
                             const ContinuationConfig& config);

}  // namespace coco
