#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coco/error.hpp"

namespace coco {

using TrackIndex = std::int32_t;

struct Track {
  TrackIndex track_index = 0;
  std::string track_uri;
  std::string artist_uri;
  std::string track_name;
  std::string artist_name;
};

/// Ordered track list with optional raw title. Track order is preserved
/// exactly as ingested; the zero-based list index is the track position.
struct Playlist {
  std::int64_t pid = 0;
  std::optional<std::string> title;
  std::vector<TrackIndex> tracks;
};

/// Bidirectional mapping between external track/artist URIs and dense
/// integer indices. First occurrence of a URI wins; later metadata for the
/// same URI is ignored.
class Catalog {
 public:
  TrackIndex intern(const std::string& track_uri, const std::string& artist_uri,
                    const std::string& track_name, const std::string& artist_name);

  std::optional<TrackIndex> find(const std::string& track_uri) const {
    auto it = uri_to_index_.find(track_uri);
    if (it == uri_to_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Like find() but throws a descriptive error for unknown URIs.
  TrackIndex require(const std::string& track_uri) const;

  const Track& track(TrackIndex i) const { return tracks_.at(static_cast<std::size_t>(i)); }
  TrackIndex size() const { return static_cast<TrackIndex>(tracks_.size()); }

  std::int32_t artist_of(TrackIndex i) const { return artist_ids_.at(static_cast<std::size_t>(i)); }
  std::int32_t num_artists() const { return static_cast<std::int32_t>(artist_uris_.size()); }
  const std::string& artist_uri(std::int32_t artist_id) const {
    return artist_uris_.at(static_cast<std::size_t>(artist_id));
  }

  /// Dense artist-id vector aligned with track indices.
  const std::vector<std::int32_t>& artist_ids() const { return artist_ids_; }

 private:
  std::unordered_map<std::string, TrackIndex> uri_to_index_;
  std::vector<Track> tracks_;
  std::vector<std::int32_t> artist_ids_;
  std::unordered_map<std::string, std::int32_t> artist_uri_to_id_;
  std::vector<std::string> artist_uris_;
};

// The ten challenge-set playlist profiles, in the fixed order used for
// split construction.
enum class ChallengeCategory : int {
  TitleOnly = 0,
  TitleFirst1,
  TitleFirst5,
  NoTitleFirst5,
  TitleFirst10,
  NoTitleFirst10,
  TitleFirst25,
  TitleRandom25,
  TitleFirst100,
  TitleRandom100,
};

inline constexpr int kNumCategories = 10;

struct CategoryInfo {
  bool has_title;
  int num_seeds;
  bool random_seeds;
  const char* id;     // machine name used in files
  const char* label;  // human name used in reports
};

const CategoryInfo& category_info(ChallengeCategory c);
ChallengeCategory category_from_id(std::string_view id);
std::array<ChallengeCategory, kNumCategories> all_categories();

/// Category order used by report tables (most seeds first).
std::array<ChallengeCategory, kNumCategories> report_category_order();

}  // namespace coco
