#include "coco/mf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "coco/error.hpp"
#include "coco/rng.hpp"

namespace coco {

namespace {

// Initialization spread before the 1/sqrt(num_factors) normalization.
constexpr double kInitScale = 0.1;

double dot(const double* a, const double* b, std::int32_t k) {
  double s = 0.0;
  for (std::int32_t j = 0; j < k; ++j) s += a[j] * b[j];
  return s;
}

// latent := sum_f value_f * table[f], bias := sum_f value_f * biases[f]
void combine(const Matrix& table, const std::vector<double>& biases, SparseRowView row,
             double* latent, double& bias, std::int32_t k) {
  std::fill(latent, latent + k, 0.0);
  bias = 0.0;
  for (std::size_t i = 0; i < row.nnz(); ++i) {
    const double v = row.vals[i];
    const double* emb = table.row(row.cols[i]);
    for (std::int32_t j = 0; j < k; ++j) latent[j] += v * emb[j];
    bias += v * biases[row.cols[i]];
  }
}

}  // namespace

void HyperParams::validate() const {
  if (num_factors < 1) throw Error("num_factors must be >= 1");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error("learning_rate must be positive");
  if (l2_playlist < 0.0 || l2_track < 0.0) throw Error("l2 terms must be >= 0");
  if (max_sampled_negatives < 1) throw Error("max_sampled_negatives must be >= 1");
  if (candidate_list_size < 1) throw Error("candidate_list_size must be >= 1");
}

bool InteractionMatrix::contains(std::int32_t p, TrackIndex t) const {
  const auto r = row(p);
  return std::binary_search(r.begin(), r.end(), t);
}

InteractionMatrix build_interactions(std::span<const Playlist> playlists,
                                     std::int32_t num_tracks) {
  std::vector<std::int64_t> offsets{0};
  std::vector<TrackIndex> cols;
  offsets.reserve(playlists.size() + 1);
  std::vector<TrackIndex> scratch;
  for (const Playlist& p : playlists) {
    scratch.assign(p.tracks.begin(), p.tracks.end());
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    for (TrackIndex t : scratch) {
      if (t < 0 || t >= num_tracks)
        throw Error("track index " + std::to_string(t) + " out of range in playlist pid " +
                    std::to_string(p.pid));
    }
    cols.insert(cols.end(), scratch.begin(), scratch.end());
    offsets.push_back(static_cast<std::int64_t>(cols.size()));
  }
  return InteractionMatrix(static_cast<std::int32_t>(playlists.size()), num_tracks,
                           std::move(offsets), std::move(cols));
}

bool HybridFactorizationModel::all_finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return ok(playlist_embeddings.data()) && ok(track_embeddings.data()) &&
         ok(playlist_biases) && ok(track_biases);
}

EntityVector playlist_vector(const HybridFactorizationModel& m, SparseRowView features) {
  EntityVector out;
  out.latent.resize(static_cast<std::size_t>(m.hp.num_factors));
  combine(m.playlist_embeddings, m.playlist_biases, features, out.latent.data(), out.bias,
          m.hp.num_factors);
  if (!m.hp.use_biases) out.bias = 0.0;
  return out;
}

EntityVector track_vector(const HybridFactorizationModel& m, SparseRowView features) {
  EntityVector out;
  out.latent.resize(static_cast<std::size_t>(m.hp.num_factors));
  combine(m.track_embeddings, m.track_biases, features, out.latent.data(), out.bias,
          m.hp.num_factors);
  if (!m.hp.use_biases) out.bias = 0.0;
  return out;
}

double score(const HybridFactorizationModel& m, SparseRowView playlist_features,
             SparseRowView track_features) {
  const EntityVector u = playlist_vector(m, playlist_features);
  const EntityVector v = track_vector(m, track_features);
  double s = dot(u.latent.data(), v.latent.data(), m.hp.num_factors);
  if (m.hp.use_biases) s += u.bias + v.bias;
  return s;
}

void apply_warp_step(HybridFactorizationModel& m, SparseRowView playlist_row,
                     SparseRowView positive_row, SparseRowView negative_row,
                     double rank_weight) {
  const std::int32_t k = m.hp.num_factors;
  const double lr = m.hp.learning_rate;
  const double step = lr * rank_weight;
  const double playlist_decay = 1.0 - lr * m.hp.l2_playlist;
  const double track_decay = 1.0 - lr * m.hp.l2_track;

  // pre-step latents; all gradients below are evaluated against these
  const EntityVector u = playlist_vector(m, playlist_row);
  const EntityVector vpos = track_vector(m, positive_row);
  const EntityVector vneg = track_vector(m, negative_row);

  for (std::size_t i = 0; i < playlist_row.nnz(); ++i) {
    const double x = playlist_row.vals[i];
    double* row = m.playlist_embeddings.row(playlist_row.cols[i]);
    for (std::int32_t j = 0; j < k; ++j) {
      row[j] += step * x * (vpos.latent[static_cast<std::size_t>(j)] -
                            vneg.latent[static_cast<std::size_t>(j)]);
      row[j] *= playlist_decay;
    }
    // the playlist bias cancels in the pairwise difference, so it decays
    // without a gradient term
    if (m.hp.use_biases) m.playlist_biases[static_cast<std::size_t>(playlist_row.cols[i])] *= playlist_decay;
  }

  for (std::size_t i = 0; i < positive_row.nnz(); ++i) {
    const double y = positive_row.vals[i];
    double* row = m.track_embeddings.row(positive_row.cols[i]);
    for (std::int32_t j = 0; j < k; ++j) {
      row[j] += step * y * u.latent[static_cast<std::size_t>(j)];
      row[j] *= track_decay;
    }
    if (m.hp.use_biases) {
      double& b = m.track_biases[static_cast<std::size_t>(positive_row.cols[i])];
      b += step * y;
      b *= track_decay;
    }
  }

  for (std::size_t i = 0; i < negative_row.nnz(); ++i) {
    const double z = negative_row.vals[i];
    double* row = m.track_embeddings.row(negative_row.cols[i]);
    for (std::int32_t j = 0; j < k; ++j) {
      row[j] -= step * z * u.latent[static_cast<std::size_t>(j)];
      row[j] *= track_decay;
    }
    if (m.hp.use_biases) {
      double& b = m.track_biases[static_cast<std::size_t>(negative_row.cols[i])];
      b -= step * z;
      b *= track_decay;
    }
  }
}

namespace {

struct PairWorkspace {
  std::vector<double> playlist_latent;
  std::vector<double> positive_latent;
};

// Runs the WARP inner loop for one positive pair: sample negatives until a
// violation or the cap, then take one weighted step.
void process_pair(HybridFactorizationModel& m, const InteractionMatrix& interactions,
                  const FeatureMatrix& playlist_features, const FeatureMatrix& track_features,
                  std::int32_t p, TrackIndex positive, Rng& rng, PairWorkspace& ws) {
  const std::int32_t num_tracks = interactions.num_tracks();
  const auto row = interactions.row(p);
  if (static_cast<std::int32_t>(row.size()) >= num_tracks) return;  // no negative exists

  const std::int32_t k = m.hp.num_factors;
  ws.playlist_latent.resize(static_cast<std::size_t>(k));
  ws.positive_latent.resize(static_cast<std::size_t>(k));

  const SparseRowView prow = playlist_features.row(p);
  const SparseRowView posrow = track_features.row(positive);

  double playlist_bias = 0.0;
  double positive_bias = 0.0;
  combine(m.playlist_embeddings, m.playlist_biases, prow, ws.playlist_latent.data(),
          playlist_bias, k);
  combine(m.track_embeddings, m.track_biases, posrow, ws.positive_latent.data(),
          positive_bias, k);

  double positive_score = dot(ws.playlist_latent.data(), ws.positive_latent.data(), k);
  if (m.hp.use_biases) positive_score += playlist_bias + positive_bias;

  std::int32_t samples = 0;
  while (samples < m.hp.max_sampled_negatives) {
    const auto candidate =
        static_cast<TrackIndex>(rng.next_below(static_cast<std::uint64_t>(num_tracks)));
    if (interactions.contains(p, candidate)) continue;  // rejection draws do not count
    ++samples;

    const SparseRowView negrow = track_features.row(candidate);
    double negative_score = 0.0;
    for (std::size_t i = 0; i < negrow.nnz(); ++i) {
      const double z = negrow.vals[i];
      negative_score += z * dot(ws.playlist_latent.data(), m.track_embeddings.row(negrow.cols[i]), k);
      if (m.hp.use_biases) negative_score += z * m.track_biases[static_cast<std::size_t>(negrow.cols[i])];
    }
    if (m.hp.use_biases) negative_score += playlist_bias;

    if (negative_score > positive_score - 1.0) {
      const auto approx_rank = (static_cast<std::int64_t>(num_tracks) - 1) / samples;
      const double weight = std::log(static_cast<double>(approx_rank + 1));
      apply_warp_step(m, prow, posrow, negrow, weight);
      return;
    }
  }
}

}  // namespace

HybridFactorizationModel train_warp(const InteractionMatrix& interactions,
                                    const FeatureMatrix& playlist_features,
                                    const FeatureMatrix& track_features, const HyperParams& hp,
                                    int threads, const EpochCallback& after_epoch) {
  hp.validate();
  if (playlist_features.rows() != interactions.num_playlists())
    throw Error("playlist feature rows do not match interaction rows");
  if (track_features.rows() != interactions.num_tracks())
    throw Error("track feature rows do not match interaction columns");
  if (threads < 1) throw Error("threads must be >= 1");

  HybridFactorizationModel m;
  m.hp = hp;
  m.playlist_embeddings = Matrix(playlist_features.cols(), hp.num_factors);
  m.track_embeddings = Matrix(track_features.cols(), hp.num_factors);
  m.playlist_biases.assign(static_cast<std::size_t>(playlist_features.cols()), 0.0);
  m.track_biases.assign(static_cast<std::size_t>(track_features.cols()), 0.0);

  Rng rng(hp.rng_seed);
  const double spread = kInitScale / std::sqrt(static_cast<double>(hp.num_factors));
  for (double& v : m.playlist_embeddings.data()) v = spread * (2.0 * rng.next_unit() - 1.0);
  for (double& v : m.track_embeddings.data()) v = spread * (2.0 * rng.next_unit() - 1.0);

  std::vector<std::pair<std::int32_t, TrackIndex>> pairs;
  pairs.reserve(static_cast<std::size_t>(interactions.nnz()));
  for (std::int32_t p = 0; p < interactions.num_playlists(); ++p) {
    for (TrackIndex t : interactions.row(p)) pairs.emplace_back(p, t);
  }

  for (std::int32_t epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(pairs);
    if (threads == 1 || pairs.size() < 2) {
      PairWorkspace ws;
      for (const auto& [p, t] : pairs)
        process_pair(m, interactions, playlist_features, track_features, p, t, rng, ws);
    } else {
      // lock-free workers on shared parameters; lost updates are accepted
      // and this path makes no reproducibility promise
      const auto n = static_cast<std::size_t>(threads);
      std::vector<std::uint64_t> worker_seeds(n);
      for (auto& s : worker_seeds) s = rng.next_u64();
      std::vector<std::thread> workers;
      workers.reserve(n);
      for (std::size_t w = 0; w < n; ++w) {
        const std::size_t begin = pairs.size() * w / n;
        const std::size_t end = pairs.size() * (w + 1) / n;
        workers.emplace_back([&, w, begin, end] {
          Rng worker_rng(worker_seeds[w]);
          PairWorkspace ws;
          for (std::size_t i = begin; i < end; ++i)
            process_pair(m, interactions, playlist_features, track_features, pairs[i].first,
                         pairs[i].second, worker_rng, ws);
        });
      }
      for (auto& t : workers) t.join();
    }
    if (!m.all_finite())
      throw Error("training diverged (non-finite parameter) at epoch " + std::to_string(epoch));
    if (after_epoch) after_epoch(epoch, m);
  }
  return m;
}

TrackLatents compute_track_latents(const HybridFactorizationModel& m,
                                   const FeatureMatrix& track_features) {
  const std::int32_t k = m.hp.num_factors;
  TrackLatents out;
  out.latents = Matrix(track_features.rows(), k);
  out.biases.assign(static_cast<std::size_t>(track_features.rows()), 0.0);
  for (std::int64_t t = 0; t < track_features.rows(); ++t) {
    combine(m.track_embeddings, m.track_biases, track_features.row(t), out.latents.row(t),
            out.biases[static_cast<std::size_t>(t)], k);
    if (!m.hp.use_biases) out.biases[static_cast<std::size_t>(t)] = 0.0;
  }
  return out;
}

RankedList recommend_mf(const HybridFactorizationModel& m, const TrackLatents& tracks,
                        SparseRowView playlist_features,
                        std::span<const TrackIndex> seed_tracks, int k) {
  const EntityVector u = playlist_vector(m, playlist_features);
  const auto num_tracks = static_cast<std::size_t>(tracks.latents.rows());
  std::vector<double> scores(num_tracks);
  for (std::size_t t = 0; t < num_tracks; ++t) {
    scores[t] = dot(u.latent.data(), tracks.latents.row(static_cast<std::int64_t>(t)),
                    m.hp.num_factors);
    if (m.hp.use_biases) scores[t] += u.bias + tracks.biases[t];
  }
  std::vector<char> exclude(num_tracks, 0);
  for (TrackIndex t : seed_tracks) {
    if (t >= 0 && static_cast<std::size_t>(t) < num_tracks) exclude[static_cast<std::size_t>(t)] = 1;
  }
  return top_k_tracks(scores, k, &exclude, /*omit_zeros=*/false, ListOrigin::MF);
}

namespace {

constexpr char kModelMagic[8] = {'c', 'o', 'c', 'o', 'm', 'f', '0', '1'};

template <class T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const char* what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(std::string("model file truncated reading ") + what);
  return value;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  write_pod(out, static_cast<std::int64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, const char* what) {
  const auto n = read_pod<std::int64_t>(in, what);
  if (n < 0) throw Error(std::string("negative array length reading ") + what);
  std::vector<double> v(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw Error(std::string("model file truncated reading ") + what);
  return v;
}

}  // namespace

void save_model(const HybridFactorizationModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file: " + path.string());
  out.write(kModelMagic, sizeof(kModelMagic));
  write_pod(out, m.hp.num_factors);
  write_pod(out, m.hp.l2_playlist);
  write_pod(out, m.hp.l2_track);
  write_pod(out, m.hp.epochs);
  write_pod(out, m.hp.learning_rate);
  write_pod(out, m.hp.max_sampled_negatives);
  write_pod(out, m.hp.rng_seed);
  write_pod(out, m.hp.candidate_list_size);
  write_pod(out, static_cast<std::uint8_t>(m.hp.use_biases ? 1 : 0));
  write_pod(out, m.playlist_embeddings.rows());
  write_pod(out, m.track_embeddings.rows());
  write_doubles(out, m.playlist_embeddings.data());
  write_doubles(out, m.track_embeddings.data());
  write_doubles(out, m.playlist_biases);
  write_doubles(out, m.track_biases);
  if (!out) throw Error("write failed for model file: " + path.string());
}

HybridFactorizationModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path.string());
  char magic[sizeof(kModelMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kModelMagic))
    throw Error("not a model file: " + path.string());

  HybridFactorizationModel m;
  m.hp.num_factors = read_pod<std::int32_t>(in, "num_factors");
  m.hp.l2_playlist = read_pod<double>(in, "l2_playlist");
  m.hp.l2_track = read_pod<double>(in, "l2_track");
  m.hp.epochs = read_pod<std::int32_t>(in, "epochs");
  m.hp.learning_rate = read_pod<double>(in, "learning_rate");
  m.hp.max_sampled_negatives = read_pod<std::int32_t>(in, "max_sampled_negatives");
  m.hp.rng_seed = read_pod<std::uint64_t>(in, "rng_seed");
  m.hp.candidate_list_size = read_pod<std::int32_t>(in, "candidate_list_size");
  m.hp.use_biases = read_pod<std::uint8_t>(in, "use_biases") != 0;

  const auto playlist_rows = read_pod<std::int64_t>(in, "playlist embedding rows");
  const auto track_rows = read_pod<std::int64_t>(in, "track embedding rows");
  auto playlist_data = read_doubles(in, "playlist embeddings");
  auto track_data = read_doubles(in, "track embeddings");
  m.playlist_biases = read_doubles(in, "playlist biases");
  m.track_biases = read_doubles(in, "track biases");

  const auto check_shape = [&](std::int64_t rows, std::size_t data_size, const char* what) {
    if (data_size != static_cast<std::size_t>(rows) * static_cast<std::size_t>(m.hp.num_factors))
      throw Error(std::string("model file shape mismatch in ") + what + ": " + path.string());
  };
  check_shape(playlist_rows, playlist_data.size(), "playlist embeddings");
  check_shape(track_rows, track_data.size(), "track embeddings");
  if (m.playlist_biases.size() != static_cast<std::size_t>(playlist_rows) ||
      m.track_biases.size() != static_cast<std::size_t>(track_rows))
    throw Error("model file bias length mismatch: " + path.string());

  m.playlist_embeddings = Matrix(playlist_rows, m.hp.num_factors);
  m.playlist_embeddings.data() = std::move(playlist_data);
  m.track_embeddings = Matrix(track_rows, m.hp.num_factors);
  m.track_embeddings.data() = std::move(track_data);
  return m;
}

}  // namespace coco
