#include "coco/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "coco/error.hpp"

namespace coco {

void FusionWeights::validate() const {
  if (!std::isfinite(alpha_mf) || alpha_mf < 0.0 || alpha_mf > 1.0)
    throw Error("alpha_mf must be in [0, 1]");
  if (!std::isfinite(alpha_tp) || alpha_tp < 0.0 || alpha_tp > 1.0)
    throw Error("alpha_tp must be in [0, 1]");
}

RankedList fuse(const RankedList& list_mf, const RankedList& list_tp, FusionWeights w, int k) {
  w.validate();
  if (k < 1) throw Error("fusion list length must be >= 1");

  const double m = static_cast<double>(std::max(list_mf.items.size(), list_tp.items.size()));

  struct Weights {
    double mf = 0.0;
    double tp = 0.0;
  };
  std::unordered_map<TrackIndex, Weights> by_track;
  by_track.reserve(list_mf.items.size() + list_tp.items.size());
  for (std::size_t r = 0; r < list_mf.items.size(); ++r) {
    auto [it, inserted] = by_track.try_emplace(list_mf.items[r].track);
    if (!inserted && it->second.mf != 0.0) throw Error("duplicate track in fusion input list");
    it->second.mf = m - static_cast<double>(r);
  }
  std::unordered_set<TrackIndex> seen_tp;
  seen_tp.reserve(list_tp.items.size());
  for (std::size_t r = 0; r < list_tp.items.size(); ++r) {
    if (!seen_tp.insert(list_tp.items[r].track).second)
      throw Error("duplicate track in fusion input list");
    by_track[list_tp.items[r].track].tp = m - static_cast<double>(r);
  }

  RankedList out;
  out.origin = ListOrigin::Fused;
  out.items.reserve(by_track.size());
  for (const auto& [track, weights] : by_track) {
    out.items.push_back(
        ScoredTrack{track, (w.alpha_mf * weights.mf + w.alpha_tp * weights.tp) / 2.0});
  }
  std::sort(out.items.begin(), out.items.end(), [](const ScoredTrack& a, const ScoredTrack& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.track < b.track;
  });
  if (out.items.size() > static_cast<std::size_t>(k)) out.items.resize(static_cast<std::size_t>(k));
  return out;
}

std::vector<TrackIndex> popularity_order(std::span<const double> popularity) {
  std::vector<TrackIndex> order(popularity.size());
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = static_cast<TrackIndex>(t);
  std::sort(order.begin(), order.end(), [&](TrackIndex a, TrackIndex b) {
    const double sa = popularity[static_cast<std::size_t>(a)];
    const double sb = popularity[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

void pad_with_popularity(RankedList& list, std::span<const TrackIndex> popularity_rank,
                         std::span<const TrackIndex> seed_tracks, int length) {
  if (length < 0) throw Error("pad length must be >= 0");
  const auto target = static_cast<std::size_t>(length);
  if (list.items.size() >= target) {
    list.items.resize(target);
    return;
  }
  std::unordered_set<TrackIndex> excluded;
  excluded.reserve(list.items.size() + seed_tracks.size());
  for (const ScoredTrack& st : list.items) excluded.insert(st.track);
  for (TrackIndex t : seed_tracks) excluded.insert(t);
  for (TrackIndex t : popularity_rank) {
    if (list.items.size() >= target) break;
    if (excluded.count(t)) continue;
    list.items.push_back(ScoredTrack{t, 0.0});
  }
}

RankedList continue_playlist(const ContinuationContext& ctx, std::int64_t playlist_row,
                             std::span<const TrackIndex> seed_tracks,
                             const ContinuationConfig& config) {
  if (!ctx.model || !ctx.track_latents || !ctx.playlist_features || !ctx.proximity ||
      !ctx.popularity_rank)
    throw Error("continuation context is missing a component");
  config.weights.validate();
  if (config.list_length < 1) throw Error("list_length must be >= 1");
  if (config.candidate_k < 1) throw Error("candidate_k must be >= 1");

  const SparseRowView playlist_row_view = ctx.playlist_features->row(playlist_row);

  RankedList result;
  if (seed_tracks.empty() && config.no_seed_source == NoSeedSource::Mf) {
    result = recommend_mf(*ctx.model, *ctx.track_latents, playlist_row_view, seed_tracks,
                          config.list_length);
  } else if (seed_tracks.empty() && config.no_seed_source == NoSeedSource::Tp) {
    result = recommend_tp(*ctx.proximity, seed_tracks, config.list_length);
  } else {
    const RankedList list_mf = recommend_mf(*ctx.model, *ctx.track_latents, playlist_row_view,
                                            seed_tracks, config.candidate_k);
    const RankedList list_tp = recommend_tp(*ctx.proximity, seed_tracks, config.candidate_k);
    result = fuse(list_mf, list_tp, config.weights, config.list_length);
  }

  pad_with_popularity(result, *ctx.popularity_rank, seed_tracks, config.list_length);
  if (result.items.size() != static_cast<std::size_t>(config.list_length))
    throw Error("cannot produce " + std::to_string(config.list_length) +
                " continuation tracks for playlist row " + std::to_string(playlist_row) +
                ": only " + std::to_string(result.items.size()) + " non-seed tracks available");
  return result;
}

}  // namespace coco
