#include "coco/types.hpp"

#include <algorithm>

namespace coco {

namespace {

constexpr CategoryInfo kCategoryTable[kNumCategories] = {
    {true, 0, false, "title_only", "No seed songs"},
    {true, 1, false, "title_first_1", "First song"},
    {true, 5, false, "title_first_5", "First 5 songs - with title"},
    {false, 5, false, "no_title_first_5", "First 5 songs - without title"},
    {true, 10, false, "title_first_10", "First 10 songs - with title"},
    {false, 10, false, "no_title_first_10", "First 10 songs - without title"},
    {true, 25, false, "title_first_25", "First 25 songs"},
    {true, 25, true, "title_random_25", "Random 25 songs"},
    {true, 100, false, "title_first_100", "First 100 songs"},
    {true, 100, true, "title_random_100", "Random 100 songs"},
};

}  // namespace

const CategoryInfo& category_info(ChallengeCategory c) {
  return kCategoryTable[static_cast<int>(c)];
}

ChallengeCategory category_from_id(std::string_view id) {
  for (int i = 0; i < kNumCategories; ++i) {
    if (id == kCategoryTable[i].id) return static_cast<ChallengeCategory>(i);
  }
  throw Error("unknown challenge category id: " + std::string(id));
}

std::array<ChallengeCategory, kNumCategories> all_categories() {
  std::array<ChallengeCategory, kNumCategories> out{};
  for (int i = 0; i < kNumCategories; ++i) out[static_cast<std::size_t>(i)] = static_cast<ChallengeCategory>(i);
  return out;
}

std::array<ChallengeCategory, kNumCategories> report_category_order() {
  return {ChallengeCategory::TitleFirst100, ChallengeCategory::TitleRandom100,
          ChallengeCategory::TitleFirst25,  ChallengeCategory::TitleRandom25,
          ChallengeCategory::TitleFirst10,  ChallengeCategory::NoTitleFirst10,
          ChallengeCategory::TitleFirst5,   ChallengeCategory::NoTitleFirst5,
          ChallengeCategory::TitleFirst1,   ChallengeCategory::TitleOnly};
}

TrackIndex Catalog::intern(const std::string& track_uri, const std::string& artist_uri,
                           const std::string& track_name, const std::string& artist_name) {
  auto it = uri_to_index_.find(track_uri);
  if (it != uri_to_index_.end()) return it->second;

  std::int32_t artist_id;
  auto ait = artist_uri_to_id_.find(artist_uri);
  if (ait != artist_uri_to_id_.end()) {
    artist_id = ait->second;
  } else {
    artist_id = static_cast<std::int32_t>(artist_uris_.size());
    artist_uri_to_id_.emplace(artist_uri, artist_id);
    artist_uris_.push_back(artist_uri);
  }

  const auto index = static_cast<TrackIndex>(tracks_.size());
  tracks_.push_back(Track{index, track_uri, artist_uri, track_name, artist_name});
  artist_ids_.push_back(artist_id);
  uri_to_index_.emplace(track_uri, index);
  return index;
}

TrackIndex Catalog::require(const std::string& track_uri) const {
  auto found = find(track_uri);
  if (!found) throw Error("track uri not in catalog: " + track_uri);
  return *found;
}

}  // namespace coco
