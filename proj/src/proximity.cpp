#include "coco/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>

#include "coco/error.hpp"

namespace coco {

ProximityMatrix::ProximityMatrix(TrackIndex num_tracks, int window,
                                 std::vector<ProximityEntry> entries)
    : num_tracks_(num_tracks), window_(window), entries_(std::move(entries)) {
  if (num_tracks_ < 0) throw Error("proximity matrix num_tracks must be >= 0");
  if (window_ < 1) throw Error("proximity window must be >= 1");
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const ProximityEntry& en = entries_[e];
    if (en.i < 0 || en.j >= num_tracks_ || en.i >= en.j)
      throw Error("proximity entry (" + std::to_string(en.i) + ", " + std::to_string(en.j) +
                  ") violates 0 <= i < j < num_tracks");
    if (!std::isfinite(en.value) || en.value <= 0.0)
      throw Error("proximity entry (" + std::to_string(en.i) + ", " + std::to_string(en.j) +
                  ") has non-positive value");
    if (e > 0) {
      const ProximityEntry& prev = entries_[e - 1];
      if (prev.i > en.i || (prev.i == en.i && prev.j >= en.j))
        throw Error("proximity entries must be strictly sorted by (i, j)");
    }
  }

  adj_offsets_.assign(static_cast<std::size_t>(num_tracks_) + 1, 0);
  for (const ProximityEntry& en : entries_) {
    ++adj_offsets_[static_cast<std::size_t>(en.i) + 1];
    ++adj_offsets_[static_cast<std::size_t>(en.j) + 1];
  }
  for (std::size_t t = 1; t < adj_offsets_.size(); ++t) adj_offsets_[t] += adj_offsets_[t - 1];

  adj_.resize(static_cast<std::size_t>(adj_offsets_.back()));
  std::vector<std::int64_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
  // sorted (i, j) input lands every (x, r) before every (r, y), so each
  // row fills in ascending neighbor order without another sort
  for (const ProximityEntry& en : entries_) {
    adj_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(en.i)]++)] = {en.j, en.value};
    adj_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(en.j)]++)] = {en.i, en.value};
  }
}

double ProximityMatrix::at(TrackIndex i, TrackIndex j) const {
  if (i == j || i < 0 || j < 0 || i >= num_tracks_ || j >= num_tracks_) return 0.0;
  const TrackIndex a = std::min(i, j);
  const TrackIndex b = std::max(i, j);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(a, b),
                             [](const ProximityEntry& e, const std::pair<TrackIndex, TrackIndex>& key) {
                               return e.i < key.first || (e.i == key.first && e.j < key.second);
                             });
  if (it == entries_.end() || it->i != a || it->j != b) return 0.0;
  return it->value;
}

std::span<const ProximityMatrix::Neighbor> ProximityMatrix::neighbors(TrackIndex t) const {
  if (t < 0 || t >= num_tracks_)
    throw Error("track index " + std::to_string(t) + " out of proximity range");
  const auto begin = static_cast<std::size_t>(adj_offsets_[static_cast<std::size_t>(t)]);
  const auto end = static_cast<std::size_t>(adj_offsets_[static_cast<std::size_t>(t) + 1]);
  return {adj_.data() + begin, end - begin};
}

namespace {

using PairSums = std::unordered_map<std::uint64_t, double>;

void accumulate_playlists(std::span<const Playlist> playlists, int window, TrackIndex num_tracks,
                          PairSums& sums) {
  for (const Playlist& p : playlists) {
    const auto n = p.tracks.size();
    for (std::size_t a = 0; a < n; ++a) {
      const TrackIndex ta = p.tracks[a];
      if (ta < 0 || ta >= num_tracks)
        throw Error("track index " + std::to_string(ta) + " out of range in playlist pid " +
                    std::to_string(p.pid));
      const std::size_t b_end = std::min(n, a + static_cast<std::size_t>(window));
      for (std::size_t b = a + 1; b < b_end; ++b) {
        const TrackIndex tb = p.tracks[b];
        if (ta == tb) continue;  // diagonal
        const double weight =
            1.0 - static_cast<double>(b - a) / static_cast<double>(window);
        const TrackIndex lo = std::min(ta, tb);
        const TrackIndex hi = std::max(ta, tb);
        const std::uint64_t key = static_cast<std::uint64_t>(lo) * static_cast<std::uint64_t>(num_tracks) +
                                  static_cast<std::uint64_t>(hi);
        sums[key] += weight;
      }
    }
  }
}

std::vector<ProximityEntry> sorted_entries(const PairSums& sums, TrackIndex num_tracks) {
  std::vector<ProximityEntry> entries;
  entries.reserve(sums.size());
  for (const auto& [key, value] : sums) {
    entries.push_back(ProximityEntry{static_cast<TrackIndex>(key / static_cast<std::uint64_t>(num_tracks)),
                                     static_cast<TrackIndex>(key % static_cast<std::uint64_t>(num_tracks)),
                                     value});
  }
  std::sort(entries.begin(), entries.end(), [](const ProximityEntry& a, const ProximityEntry& b) {
    return a.i < b.i || (a.i == b.i && a.j < b.j);
  });
  return entries;
}

}  // namespace

ProximityMatrix build_proximity(std::span<const Playlist> playlists, int window, int threads) {
  if (window < 1) throw Error("proximity window must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");

  TrackIndex num_tracks = 0;
  for (const Playlist& p : playlists) {
    for (TrackIndex t : p.tracks) num_tracks = std::max(num_tracks, static_cast<TrackIndex>(t + 1));
  }

  PairSums sums;
  if (threads == 1 || playlists.size() < 2) {
    accumulate_playlists(playlists, window, num_tracks, sums);
  } else {
    // shard playlists, then fold the shards back in shard order so the
    // result is deterministic for a fixed thread count
    const auto n = static_cast<std::size_t>(threads);
    std::vector<PairSums> partial(n);
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      const std::size_t begin = playlists.size() * w / n;
      const std::size_t end = playlists.size() * (w + 1) / n;
      workers.emplace_back([&, w, begin, end] {
        accumulate_playlists(playlists.subspan(begin, end - begin), window, num_tracks,
                             partial[w]);
      });
    }
    for (auto& t : workers) t.join();
    for (std::size_t w = 0; w < n; ++w) {
      for (const ProximityEntry& en : sorted_entries(partial[w], num_tracks)) {
        const std::uint64_t key = static_cast<std::uint64_t>(en.i) * static_cast<std::uint64_t>(num_tracks) +
                                  static_cast<std::uint64_t>(en.j);
        sums[key] += en.value;
      }
    }
  }

  return ProximityMatrix(num_tracks, window, sorted_entries(sums, num_tracks));
}

std::vector<double> score_tp(const ProximityMatrix& S, std::span<const TrackIndex> seeds) {
  std::vector<double> g(static_cast<std::size_t>(S.num_tracks()), 0.0);
  for (TrackIndex seed : seeds) {
    for (const auto& nb : S.neighbors(seed)) g[static_cast<std::size_t>(nb.track)] += nb.weight;
  }
  return g;
}

std::vector<double> popularity_vector(const ProximityMatrix& S) {
  std::vector<double> pop(static_cast<std::size_t>(S.num_tracks()), 0.0);
  for (TrackIndex t = 0; t < S.num_tracks(); ++t) {
    double sum = 0.0;
    for (const auto& nb : S.neighbors(t)) sum += nb.weight;
    pop[static_cast<std::size_t>(t)] = sum;
  }
  return pop;
}

RankedList recommend_tp(const ProximityMatrix& S, std::span<const TrackIndex> seeds, int k) {
  if (seeds.empty()) {
    const std::vector<double> pop = popularity_vector(S);
    return top_k_tracks(pop, k, nullptr, /*omit_zeros=*/true, ListOrigin::TP);
  }
  const std::vector<double> g = score_tp(S, seeds);
  std::vector<char> exclude(g.size(), 0);
  for (TrackIndex t : seeds) exclude[static_cast<std::size_t>(t)] = 1;
  return top_k_tracks(g, k, &exclude, /*omit_zeros=*/true, ListOrigin::TP);
}

namespace {

constexpr char kProximityMagic[8] = {'c', 'o', 'c', 'o', 't', 'p', '0', '1'};

template <class T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const char* what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(std::string("proximity file truncated reading ") + what);
  return value;
}

}  // namespace

void save_proximity(const ProximityMatrix& S, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write proximity file: " + path.string());
  out.write(kProximityMagic, sizeof(kProximityMagic));
  write_pod(out, S.num_tracks());
  write_pod(out, static_cast<std::int32_t>(S.window()));
  write_pod(out, S.stored_pairs());
  for (const ProximityEntry& en : S.entries()) {
    write_pod(out, en.i);
    write_pod(out, en.j);
    write_pod(out, en.value);
  }
  if (!out) throw Error("write failed for proximity file: " + path.string());
}

ProximityMatrix load_proximity(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open proximity file: " + path.string());
  char magic[sizeof(kProximityMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kProximityMagic))
    throw Error("not a proximity file: " + path.string());

  const auto num_tracks = read_pod<TrackIndex>(in, "num_tracks");
  const auto window = read_pod<std::int32_t>(in, "window");
  const auto count = read_pod<std::int64_t>(in, "pair count");
  if (count < 0) throw Error("negative pair count in proximity file: " + path.string());
  std::vector<ProximityEntry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (std::int64_t e = 0; e < count; ++e) {
    ProximityEntry en;
    en.i = read_pod<TrackIndex>(in, "pair row");
    en.j = read_pod<TrackIndex>(in, "pair column");
    en.value = read_pod<double>(in, "pair value");
    entries.push_back(en);
  }
  return ProximityMatrix(num_tracks, window, std::move(entries));
}

}  // namespace coco
