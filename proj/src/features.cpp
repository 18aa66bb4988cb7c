#include "coco/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coco/dataset.hpp"
#include "coco/error.hpp"

namespace coco {

const std::array<const char*, kNumGenres> kGenreNames = {
    "blues", "country", "electronic", "folk", "jazz",   "latin", "metal",
    "pop",   "rap",     "reggae",     "rnb",  "rock",   "world"};

TitleVocabulary::TitleVocabulary(std::vector<std::string> sorted_titles)
    : titles_(std::move(sorted_titles)) {
  for (std::size_t i = 1; i < titles_.size(); ++i) {
    if (!(titles_[i - 1] < titles_[i]))
      throw Error("title vocabulary must be strictly sorted, violated at entry " +
                  std::to_string(i));
  }
  index_.reserve(titles_.size());
  for (std::size_t i = 0; i < titles_.size(); ++i)
    index_.emplace(titles_[i], static_cast<std::int32_t>(i));
}

std::optional<std::int32_t> TitleVocabulary::lookup(const std::string& normalized) const {
  auto it = index_.find(normalized);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TitleVocabulary build_title_vocabulary(std::span<const Playlist> playlists) {
  std::set<std::string> distinct;
  for (const Playlist& p : playlists) {
    if (!p.title) continue;
    std::string norm = normalize_title(*p.title);
    if (!norm.empty()) distinct.insert(std::move(norm));
  }
  return TitleVocabulary(std::vector<std::string>(distinct.begin(), distinct.end()));
}

void GenreTable::set(const std::string& track_uri, const std::array<double, kNumGenres>& probs) {
  for (double v : probs) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw Error("genre probability out of [0, 1] for " + track_uri);
  }
  table_[track_uri] = probs;
}

const std::array<double, kNumGenres>* GenreTable::find(const std::string& track_uri) const {
  auto it = table_.find(track_uri);
  if (it == table_.end()) return nullptr;
  return &it->second;
}

GenreTable GenreTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open genre table: " + path.string());

  std::string expected = "track_uri";
  for (const char* g : kGenreNames) {
    expected += ',';
    expected += g;
  }

  std::string line;
  if (!std::getline(in, line)) throw Error("genre table is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected)
    throw Error("genre table header mismatch in " + path.string() + ": got '" + line + "'");

  GenreTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != 1 + kNumGenres)
      throw Error("genre table " + path.string() + " line " + std::to_string(line_no) +
                  ": expected " + std::to_string(1 + kNumGenres) + " fields, got " +
                  std::to_string(fields.size()));

    std::array<double, kNumGenres> probs{};
    for (int g = 0; g < kNumGenres; ++g) {
      try {
        std::size_t consumed = 0;
        probs[static_cast<std::size_t>(g)] = std::stod(fields[static_cast<std::size_t>(g + 1)], &consumed);
        if (consumed != fields[static_cast<std::size_t>(g + 1)].size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw Error("genre table " + path.string() + " line " + std::to_string(line_no) +
                    ": bad number '" + fields[static_cast<std::size_t>(g + 1)] + "'");
      }
    }
    table.set(fields[0], probs);
  }
  return table;
}

void FeatureMatrix::append_row(std::span<const std::pair<std::int32_t, double>> entries) {
  // validate the whole row before touching storage, so a rejected row
  // leaves the matrix unchanged
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [col, val] = entries[i];
    if (col < 0 || col >= cols_)
      throw Error("feature column " + std::to_string(col) + " out of range [0, " +
                  std::to_string(cols_) + ")");
    if (i > 0 && entries[i - 1].first >= col)
      throw Error("feature columns must be strictly ascending within a row");
    if (!std::isfinite(val)) throw Error("non-finite feature value at column " + std::to_string(col));
  }
  for (const auto& [col, val] : entries) {
    col_idx_.push_back(col);
    values_.push_back(val);
  }
  row_offsets_.push_back(static_cast<std::int64_t>(col_idx_.size()));
}

SparseRowView FeatureMatrix::row(std::int64_t i) const {
  if (i < 0 || i >= rows()) throw Error("feature row " + std::to_string(i) + " out of range");
  const auto begin = static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(i)]);
  const auto end = static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(i) + 1]);
  return SparseRowView{
      std::span<const std::int32_t>(col_idx_.data() + begin, end - begin),
      std::span<const double>(values_.data() + begin, end - begin)};
}

FeatureMatrix build_playlist_features(std::span<const Playlist> playlists,
                                      const TitleVocabulary& vocab) {
  FeatureMatrix m(static_cast<std::int64_t>(vocab.size()) +
                  static_cast<std::int64_t>(playlists.size()));
  std::vector<std::pair<std::int32_t, double>> entries;
  for (std::size_t i = 0; i < playlists.size(); ++i) {
    entries.clear();
    if (playlists[i].title) {
      if (auto col = vocab.lookup(normalize_title(*playlists[i].title)))
        entries.emplace_back(*col, 1.0);
    }
    entries.emplace_back(vocab.size() + static_cast<std::int32_t>(i), 1.0);
    m.append_row(entries);
  }
  return m;
}

FeatureMatrix build_track_features(const Catalog& catalog, const GenreTable& genres) {
  FeatureMatrix m(kNumGenres + static_cast<std::int64_t>(catalog.size()));
  std::vector<std::pair<std::int32_t, double>> entries;
  for (TrackIndex i = 0; i < catalog.size(); ++i) {
    entries.clear();
    if (const auto* probs = genres.find(catalog.track(i).track_uri)) {
      for (int g = 0; g < kNumGenres; ++g) {
        const double v = (*probs)[static_cast<std::size_t>(g)];
        if (v != 0.0) entries.emplace_back(g, v);
      }
    }
    entries.emplace_back(kNumGenres + i, 1.0);
    m.append_row(entries);
  }
  return m;
}

}  // namespace coco
