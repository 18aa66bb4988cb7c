#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "coco/features.hpp"
#include "coco/ranked.hpp"
#include "coco/types.hpp"

namespace coco {

struct HyperParams {
  std::int32_t num_factors = 200;
  double l2_playlist = 1e-6;
  double l2_track = 1e-6;
  std::int32_t epochs = 150;
  double learning_rate = 0.05;
  std::int32_t max_sampled_negatives = 100;
  std::uint64_t rng_seed = 42;
  std::int32_t candidate_list_size = 4000;
  bool use_biases = true;

  void validate() const;  // throws on out-of-range fields
};

/// Dense row-major matrix of model parameters.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int32_t cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  double* row(std::int64_t r) { return data_.data() + r * cols_; }
  const double* row(std::int64_t r) const { return data_.data() + r * cols_; }
  std::int64_t rows() const { return rows_; }
  std::int32_t cols() const { return cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::int64_t rows_ = 0;
  std::int32_t cols_ = 0;
  std::vector<double> data_;
};

/// Sparse binary playlist-by-track matrix. Row order follows the playlist
/// list it was built from; duplicate track occurrences collapse to one.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  InteractionMatrix(std::int32_t num_playlists, std::int32_t num_tracks,
                    std::vector<std::int64_t> row_offsets, std::vector<TrackIndex> cols)
      : num_playlists_(num_playlists),
        num_tracks_(num_tracks),
        row_offsets_(std::move(row_offsets)),
        cols_(std::move(cols)) {}

  std::int32_t num_playlists() const { return num_playlists_; }
  std::int32_t num_tracks() const { return num_tracks_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(cols_.size()); }

  std::span<const TrackIndex> row(std::int32_t p) const {
    return {cols_.data() + row_offsets_[p],
            static_cast<std::size_t>(row_offsets_[p + 1] - row_offsets_[p])};
  }
  bool contains(std::int32_t p, TrackIndex t) const;

 private:
  std::int32_t num_playlists_ = 0;
  std::int32_t num_tracks_ = 0;
  std::vector<std::int64_t> row_offsets_{0};
  std::vector<TrackIndex> cols_;
};

/// Binary interactions over the given playlists (training playlists plus
/// fold-in test playlists holding only their seeds). Throws on an
/// out-of-range track index.
InteractionMatrix build_interactions(std::span<const Playlist> playlists,
                                     std::int32_t num_tracks);

/// Feature-embedding model: entity vectors are sums of the embeddings of
/// the entity's active features, weighted by the feature values.
struct HybridFactorizationModel {
  HyperParams hp;
  Matrix playlist_embeddings;  // one row per playlist feature
  Matrix track_embeddings;     // one row per track feature
  std::vector<double> playlist_biases;
  std::vector<double> track_biases;

  bool all_finite() const;
};

struct EntityVector {
  std::vector<double> latent;
  double bias = 0.0;
};

EntityVector playlist_vector(const HybridFactorizationModel& m, SparseRowView features);
EntityVector track_vector(const HybridFactorizationModel& m, SparseRowView features);

/// dot(playlist latent, track latent), plus both biases when the model was
/// trained with use_biases.
double score(const HybridFactorizationModel& m, SparseRowView playlist_features,
             SparseRowView track_features);

/// One pairwise gradient step for a found WARP violation, applied to the
/// embeddings and biases reachable through the active features of the
/// playlist, positive track, and negative track, followed by L2 shrinkage
/// of the touched rows. Latents are taken at their pre-step values.
void apply_warp_step(HybridFactorizationModel& m, SparseRowView playlist_row,
                     SparseRowView positive_row, SparseRowView negative_row,
                     double rank_weight);

using EpochCallback = std::function<void(int epoch, const HybridFactorizationModel&)>;

/// WARP training. Each epoch iterates the positive pairs in a seeded
/// shuffled order; for each pair, uniform negatives not interacted by the
/// playlist are sampled until one scores above score(positive) - 1 or the
/// sampling cap is hit. The update weight is log(floor((|T|-1)/samples)+1).
///
/// threads == 1 is bit-reproducible for a fixed seed. threads > 1 runs
/// lock-free on shared parameters and is not reproducible.
HybridFactorizationModel train_warp(const InteractionMatrix& interactions,
                                    const FeatureMatrix& playlist_features,
                                    const FeatureMatrix& track_features,
                                    const HyperParams& hp, int threads = 1,
                                    const EpochCallback& after_epoch = {});

/// Per-track latent vectors and biases, materialized once so ranking does
/// not recombine feature rows per candidate.
struct TrackLatents {
  Matrix latents;
  std::vector<double> biases;
};

TrackLatents compute_track_latents(const HybridFactorizationModel& m,
                                   const FeatureMatrix& track_features);

/// Top-k tracks by score, excluding the seed set, ties by ascending track
/// index. Length is min(k, |T| - |distinct seeds|).
RankedList recommend_mf(const HybridFactorizationModel& m, const TrackLatents& tracks,
                        SparseRowView playlist_features,
                        std::span<const TrackIndex> seed_tracks, int k);

// Model store: fixed-layout binary file, bit-exact round trip.
void save_model(const HybridFactorizationModel& m, const std::filesystem::path& path);
HybridFactorizationModel load_model(const std::filesystem::path& path);

}  // namespace coco
