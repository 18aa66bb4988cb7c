#pragma once

#include <span>
#include <vector>

#include "coco/types.hpp"

namespace coco {

enum class ListOrigin { MF, TP, Fused, Popularity };

struct ScoredTrack {
  TrackIndex track = 0;
  double score = 0.0;
};

/// Ordered, duplicate-free recommendation list. Scores are non-increasing
/// and ties are resolved by ascending track index at construction time.
struct RankedList {
  ListOrigin origin = ListOrigin::MF;
  std::vector<ScoredTrack> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  std::vector<TrackIndex> track_ids() const;
};

/// Selects the top k tracks of a dense score vector: score descending,
/// ties by ascending track index. `exclude`, when given, masks tracks out
/// (its size must match scores). With omit_zeros, entries with score <= 0
/// are dropped, so the result may be shorter than k.
RankedList top_k_tracks(std::span<const double> scores, int k,
                        const std::vector<char>* exclude, bool omit_zeros,
                        ListOrigin origin);

/// Throws if the list holds a duplicate track or an increasing score.
void validate_ranked(const RankedList& list);

}  // namespace coco
