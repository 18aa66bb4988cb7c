#include "coco/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "coco/rng.hpp"

namespace coco {

using nlohmann::json;

std::string normalize_title(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;  // removal set: all ASCII punctuation
    const char mapped = c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(mapped);
  }
  return out;
}

namespace {

std::string require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw Error(where + ": missing or non-string field '" + key + "'");
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it != obj.end() && it->is_string()) return it->get<std::string>();
  return {};
}

Playlist parse_playlist(const json& obj, Catalog& catalog, const std::string& where) {
  Playlist playlist;
  auto pid_it = obj.find("pid");
  if (pid_it == obj.end() || !pid_it->is_number_integer())
    throw Error(where + ": playlist object lacks integer 'pid'");
  playlist.pid = pid_it->get<std::int64_t>();

  if (auto name_it = obj.find("name"); name_it != obj.end() && name_it->is_string())
    playlist.title = name_it->get<std::string>();

  auto tracks_it = obj.find("tracks");
  if (tracks_it == obj.end() || !tracks_it->is_array())
    throw Error(where + ": playlist pid " + std::to_string(playlist.pid) +
                " lacks 'tracks' array");
  playlist.tracks.reserve(tracks_it->size());
  for (const auto& t : *tracks_it) {
    if (!t.is_object())
      throw Error(where + ": non-object track entry in pid " + std::to_string(playlist.pid));
    const std::string track_uri = require_string(t, "track_uri", where);
    const std::string artist_uri = require_string(t, "artist_uri", where);
    playlist.tracks.push_back(catalog.intern(track_uri, artist_uri,
                                             optional_string(t, "track_name"),
                                             optional_string(t, "artist_name")));
  }
  return playlist;
}

}  // namespace

Corpus load_corpus(const std::vector<std::filesystem::path>& files) {
  Corpus corpus;
  std::unordered_set<std::int64_t> seen_pids;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file: " + path.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error("failed to parse " + path.string() + ": " + e.what());
    }
    auto playlists_it = doc.find("playlists");
    if (playlists_it == doc.end() || !playlists_it->is_array())
      throw Error(path.string() + ": top-level 'playlists' array missing");
    for (const auto& obj : *playlists_it) {
      Playlist playlist = parse_playlist(obj, corpus.catalog, path.string());
      if (!seen_pids.insert(playlist.pid).second)
        throw Error("duplicate pid " + std::to_string(playlist.pid) + " ingesting " +
                    path.string());
      corpus.playlists.push_back(std::move(playlist));
    }
  }
  return corpus;
}

namespace {

std::size_t distinct_track_count(const Playlist& p) {
  std::unordered_set<TrackIndex> s(p.tracks.begin(), p.tracks.end());
  return s.size();
}

bool eligible_for(const Playlist& p, const CategoryInfo& info) {
  if (info.has_title && (!p.title || normalize_title(*p.title).empty())) return false;
  return distinct_track_count(p) > static_cast<std::size_t>(info.num_seeds);
}

TestPlaylist carve_test_playlist(const Playlist& p, ChallengeCategory category, Rng& rng) {
  const CategoryInfo& info = category_info(category);
  const int k = info.num_seeds;

  std::vector<std::size_t> seed_positions;
  seed_positions.reserve(static_cast<std::size_t>(k));
  if (info.random_seeds) {
    std::vector<std::size_t> positions(p.tracks.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    // partial Fisher-Yates, then restore playlist order among the chosen
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(rng.next_below(positions.size() - static_cast<std::size_t>(i)));
      std::swap(positions[static_cast<std::size_t>(i)], positions[j]);
    }
    seed_positions.assign(positions.begin(), positions.begin() + k);
    std::sort(seed_positions.begin(), seed_positions.end());
  } else {
    for (int i = 0; i < k; ++i) seed_positions.push_back(static_cast<std::size_t>(i));
  }

  std::vector<char> is_seed_pos(p.tracks.size(), 0);
  for (std::size_t pos : seed_positions) is_seed_pos[pos] = 1;

  TestPlaylist out;
  out.category = category;
  out.seeds.pid = p.pid;
  if (info.has_title) out.seeds.title = p.title;
  for (std::size_t pos : seed_positions) out.seeds.tracks.push_back(p.tracks[pos]);

  std::unordered_set<TrackIndex> seed_set(out.seeds.tracks.begin(), out.seeds.tracks.end());
  std::unordered_set<TrackIndex> emitted;
  for (std::size_t pos = 0; pos < p.tracks.size(); ++pos) {
    if (is_seed_pos[pos]) continue;
    const TrackIndex t = p.tracks[pos];
    if (seed_set.count(t) || !emitted.insert(t).second) continue;
    out.ground_truth.push_back(t);
  }
  return out;
}

}  // namespace

EvalSplit make_challenge_split(const std::vector<Playlist>& playlists, int per_category,
                               std::uint64_t rng_seed) {
  if (per_category < 1) throw Error("make_challenge_split: per_category must be >= 1");
  Rng rng(rng_seed);
  std::vector<char> taken(playlists.size(), 0);

  EvalSplit split;
  for (ChallengeCategory category : all_categories()) {
    const CategoryInfo& info = category_info(category);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < playlists.size(); ++i) {
      if (!taken[i] && eligible_for(playlists[i], info)) eligible.push_back(i);
    }
    if (eligible.size() < static_cast<std::size_t>(per_category))
      throw Error(std::string("insufficient eligible playlists for category ") + info.id +
                  ": need " + std::to_string(per_category) + ", have " +
                  std::to_string(eligible.size()));
    for (int n = 0; n < per_category; ++n) {
      const auto pick = static_cast<std::size_t>(n) +
                        static_cast<std::size_t>(rng.next_below(eligible.size() - static_cast<std::size_t>(n)));
      std::swap(eligible[static_cast<std::size_t>(n)], eligible[pick]);
      const std::size_t idx = eligible[static_cast<std::size_t>(n)];
      taken[idx] = 1;
      split.test.push_back(carve_test_playlist(playlists[idx], category, rng));
    }
  }

  for (std::size_t i = 0; i < playlists.size(); ++i) {
    if (!taken[i]) split.train.push_back(playlists[i]);
  }
  return split;
}

namespace {

json playlist_to_json(const Playlist& p, const Catalog& catalog) {
  json tracks = json::array();
  for (std::size_t pos = 0; pos < p.tracks.size(); ++pos) {
    const Track& t = catalog.track(p.tracks[pos]);
    tracks.push_back({{"pos", pos},
                      {"track_uri", t.track_uri},
                      {"artist_uri", t.artist_uri},
                      {"track_name", t.track_name},
                      {"artist_name", t.artist_name}});
  }
  json obj = {{"pid", p.pid}, {"tracks", std::move(tracks)}};
  if (p.title) obj["name"] = *p.title;
  return obj;
}

std::vector<std::string> uris_of(const std::vector<TrackIndex>& tracks, const Catalog& catalog) {
  std::vector<std::string> out;
  out.reserve(tracks.size());
  for (TrackIndex t : tracks) out.push_back(catalog.track(t).track_uri);
  return out;
}

}  // namespace

void write_split(const EvalSplit& split, const Catalog& catalog,
                 const std::filesystem::path& train_path,
                 const std::filesystem::path& test_path) {
  std::ofstream train_out(train_path);
  if (!train_out) throw Error("cannot write " + train_path.string());
  for (const Playlist& p : split.train) train_out << playlist_to_json(p, catalog).dump() << '\n';

  std::ofstream test_out(test_path);
  if (!test_out) throw Error("cannot write " + test_path.string());
  for (const TestPlaylist& tp : split.test) {
    json obj = {{"pid", tp.seeds.pid},
                {"category", category_info(tp.category).id},
                {"seeds", uris_of(tp.seeds.tracks, catalog)},
                {"ground_truth", uris_of(tp.ground_truth, catalog)}};
    if (tp.seeds.title) obj["title"] = *tp.seeds.title;
    test_out << obj.dump() << '\n';
  }
}

namespace {

std::vector<TrackIndex> resolve_uris(const json& arr, const Catalog& catalog,
                                     const std::string& where) {
  if (!arr.is_array()) throw Error(where + ": expected array of track uris");
  std::vector<TrackIndex> out;
  out.reserve(arr.size());
  for (const auto& u : arr) {
    if (!u.is_string()) throw Error(where + ": non-string track uri");
    out.push_back(catalog.require(u.get<std::string>()));
  }
  return out;
}

json parse_line(const std::string& line, const std::string& where, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(where + " line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

EvalSplit read_split(const Catalog& catalog, const std::filesystem::path& train_path,
                     const std::filesystem::path& test_path) {
  EvalSplit split;

  std::ifstream train_in(train_path);
  if (!train_in) throw Error("missing train split file: " + train_path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(train_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json obj = parse_line(line, train_path.string(), line_no);
    Playlist p;
    p.pid = obj.at("pid").get<std::int64_t>();
    if (auto it = obj.find("name"); it != obj.end() && it->is_string())
      p.title = it->get<std::string>();
    for (const auto& t : obj.at("tracks"))
      p.tracks.push_back(catalog.require(t.at("track_uri").get<std::string>()));
    split.train.push_back(std::move(p));
  }

  std::ifstream test_in(test_path);
  if (!test_in) throw Error("missing test split file: " + test_path.string());
  line_no = 0;
  while (std::getline(test_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json obj = parse_line(line, test_path.string(), line_no);
    TestPlaylist tp;
    tp.category = category_from_id(obj.at("category").get<std::string>());
    tp.seeds.pid = obj.at("pid").get<std::int64_t>();
    if (auto it = obj.find("title"); it != obj.end() && it->is_string())
      tp.seeds.title = it->get<std::string>();
    tp.seeds.tracks = resolve_uris(obj.at("seeds"), catalog, test_path.string());
    tp.ground_truth = resolve_uris(obj.at("ground_truth"), catalog, test_path.string());
    split.test.push_back(std::move(tp));
  }
  return split;
}

std::vector<TrackIndex> seed_track_set(const Playlist& seeds) {
  std::vector<TrackIndex> out(seeds.tracks.begin(), seeds.tracks.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace coco
