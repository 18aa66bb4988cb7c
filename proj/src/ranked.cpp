#include "coco/ranked.hpp"

#include <algorithm>
#include <unordered_set>

#include "coco/error.hpp"

namespace coco {

std::vector<TrackIndex> RankedList::track_ids() const {
  std::vector<TrackIndex> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.track);
  return out;
}

RankedList top_k_tracks(std::span<const double> scores, int k,
                        const std::vector<char>* exclude, bool omit_zeros,
                        ListOrigin origin) {
  if (k < 1) throw Error("top_k_tracks: k must be >= 1");
  if (exclude && exclude->size() != scores.size())
    throw Error("top_k_tracks: exclusion mask size mismatch");

  std::vector<TrackIndex> candidates;
  candidates.reserve(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (exclude && (*exclude)[t]) continue;
    if (omit_zeros && !(scores[t] > 0.0)) continue;
    candidates.push_back(static_cast<TrackIndex>(t));
  }

  const auto better = [&scores](TrackIndex a, TrackIndex b) {
    if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    return a < b;
  };
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  candidates.resize(take);

  RankedList out;
  out.origin = origin;
  out.items.reserve(take);
  for (TrackIndex t : candidates)
    out.items.push_back({t, scores[static_cast<std::size_t>(t)]});
  return out;
}

void validate_ranked(const RankedList& list) {
  std::unordered_set<TrackIndex> seen;
  seen.reserve(list.items.size());
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    if (!seen.insert(list.items[i].track).second)
      throw Error("ranked list holds duplicate track index " +
                  std::to_string(list.items[i].track));
    if (i > 0 && list.items[i].score > list.items[i - 1].score)
      throw Error("ranked list scores increase at position " + std::to_string(i));
  }
}

}  // namespace coco
