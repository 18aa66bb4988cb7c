#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coco/types.hpp"

namespace coco {

inline constexpr int kNumGenres = 13;

/// Column order of the genre block, also the genre table CSV column order.
extern const std::array<const char*, kNumGenres> kGenreNames;

/// Distinct normalized nonempty titles of a corpus, indexed contiguously
/// from 0 in lexicographic order.
class TitleVocabulary {
 public:
  TitleVocabulary() = default;
  explicit TitleVocabulary(std::vector<std::string> sorted_titles);

  std::optional<std::int32_t> lookup(const std::string& normalized) const;
  std::int32_t size() const { return static_cast<std::int32_t>(titles_.size()); }
  const std::vector<std::string>& titles() const { return titles_; }

 private:
  std::vector<std::string> titles_;
  std::unordered_map<std::string, std::int32_t> index_;
};

TitleVocabulary build_title_vocabulary(std::span<const Playlist> playlists);

/// Per-track genre probability vectors. Every stored vector has exactly 13
/// entries in [0, 1]; violations are rejected naming the track_uri.
class GenreTable {
 public:
  void set(const std::string& track_uri, const std::array<double, kNumGenres>& probs);
  const std::array<double, kNumGenres>* find(const std::string& track_uri) const;
  std::size_t size() const { return table_.size(); }

  static GenreTable load_csv(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::array<double, kNumGenres>> table_;
};

struct SparseRowView {
  std::span<const std::int32_t> cols;
  std::span<const double> vals;
  std::size_t nnz() const { return cols.size(); }
};

/// Sparse row-major matrix of feature triplets. Every row carries its
/// identity feature, so no row is empty.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::int64_t cols) : cols_(cols) { row_offsets_.push_back(0); }

  /// Entries must be strictly ascending by column and finite.
  void append_row(std::span<const std::pair<std::int32_t, double>> entries);

  std::int64_t rows() const { return static_cast<std::int64_t>(row_offsets_.size()) - 1; }
  std::int64_t cols() const { return cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx_.size()); }
  SparseRowView row(std::int64_t i) const;

 private:
  std::int64_t cols_ = 0;
  std::vector<std::int64_t> row_offsets_{};
  std::vector<std::int32_t> col_idx_;
  std::vector<double> values_;
};

/// One-hot normalized title (when known and nonempty) plus the playlist
/// identity column at vocab.size() + row. Columns: |vocab| + |playlists|.
FeatureMatrix build_playlist_features(std::span<const Playlist> playlists,
                                      const TitleVocabulary& vocab);

/// 13 genre probability columns (exact zeros omitted) plus the track
/// identity column at 13 + track_index. Columns: 13 + |tracks|. Tracks
/// missing from the genre table get only the identity feature.
FeatureMatrix build_track_features(const Catalog& catalog, const GenreTable& genres);

}  // namespace coco
