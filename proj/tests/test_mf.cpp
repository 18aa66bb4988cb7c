#include <cmath>
#include <cstring>
#include <utility>
#include <vector>

#include <doctest.h>

#include "coco/mf.hpp"
#include "coco/rng.hpp"
#include "test_util.hpp"

using namespace coco;
using coco::test::TempDir;

namespace {

using Entries = std::vector<std::pair<std::int32_t, double>>;

std::vector<Playlist> playlists_from(const std::vector<std::vector<TrackIndex>>& track_lists) {
  std::vector<Playlist> out;
  std::int64_t pid = 0;
  for (const auto& tracks : track_lists) {
    Playlist p;
    p.pid = pid++;
    p.tracks = tracks;
    out.push_back(std::move(p));
  }
  return out;
}

// identity-only features: row i has a single 1.0 at column i
FeatureMatrix identity_features(std::int64_t n) {
  FeatureMatrix m(n);
  for (std::int64_t i = 0; i < n; ++i)
    m.append_row(Entries{{static_cast<std::int32_t>(i), 1.0}});
  return m;
}

HyperParams tiny_hp() {
  HyperParams hp;
  hp.num_factors = 4;
  hp.epochs = 20;
  hp.learning_rate = 0.05;
  hp.max_sampled_negatives = 10;
  hp.rng_seed = 5;
  return hp;
}

}  // namespace

TEST_CASE("hyperparameter validation") {
  HyperParams hp;
  hp.validate();

  HyperParams bad = hp;
  bad.num_factors = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = hp;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = hp;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.learning_rate = std::nan("");
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = hp;
  bad.l2_track = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = hp;
  bad.max_sampled_negatives = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = hp;
  bad.candidate_list_size = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("interaction matrix from playlists") {
  const auto playlists = playlists_from({{2, 0, 2}, {}, {1, 3, 4}});
  const InteractionMatrix m = build_interactions(playlists, 5);
  CHECK(m.num_playlists() == 3);
  CHECK(m.num_tracks() == 5);
  CHECK(m.nnz() == 5);

  const auto row0 = m.row(0);
  REQUIRE(row0.size() == 2);  // duplicate occurrence collapsed
  CHECK(row0[0] == 0);
  CHECK(row0[1] == 2);
  CHECK(m.row(1).empty());
  CHECK(m.row(2).size() == 3);

  CHECK(m.contains(0, 2));
  CHECK_FALSE(m.contains(0, 1));
  CHECK_FALSE(m.contains(1, 0));

  CHECK_THROWS_AS(build_interactions(playlists_from({{5}}), 5), Error);
  try {
    build_interactions(playlists_from({{7}}), 5);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("pid 0") != std::string::npos);
  }
}

TEST_CASE("entity vectors combine feature-weighted embedding rows") {
  HybridFactorizationModel m;
  m.hp.num_factors = 2;
  m.playlist_embeddings = Matrix(3, 2);
  m.track_embeddings = Matrix(3, 2);
  m.playlist_biases = {0.5, 1.0, -2.0};
  m.track_biases = {0.25, 0.0, 4.0};
  double* r0 = m.playlist_embeddings.row(0);
  r0[0] = 1.0;
  r0[1] = 2.0;
  double* r1 = m.playlist_embeddings.row(1);
  r1[0] = -3.0;
  r1[1] = 5.0;

  FeatureMatrix pf(3);
  pf.append_row(Entries{{0, 1.0}, {1, 0.5}});
  pf.append_row(Entries{});  // no active features

  const EntityVector u = playlist_vector(m, pf.row(0));
  REQUIRE(u.latent.size() == 2);
  CHECK(u.latent[0] == 1.0 + 0.5 * -3.0);
  CHECK(u.latent[1] == 2.0 + 0.5 * 5.0);
  CHECK(u.bias == 0.5 + 0.5 * 1.0);

  const EntityVector empty = playlist_vector(m, pf.row(1));
  CHECK(empty.latent[0] == 0.0);
  CHECK(empty.latent[1] == 0.0);
  CHECK(empty.bias == 0.0);

  // identity feature row reproduces the embedding row itself
  const FeatureMatrix id = identity_features(3);
  const EntityVector row1 = playlist_vector(m, id.row(1));
  CHECK(row1.latent[0] == -3.0);
  CHECK(row1.latent[1] == 5.0);
  CHECK(row1.bias == 1.0);

  // biases are zeroed when the model runs without them
  m.hp.use_biases = false;
  CHECK(playlist_vector(m, id.row(1)).bias == 0.0);
  CHECK(track_vector(m, id.row(2)).bias == 0.0);
}

TEST_CASE("score is the latent dot product plus biases") {
  HybridFactorizationModel m;
  m.hp.num_factors = 2;
  m.playlist_embeddings = Matrix(1, 2);
  m.track_embeddings = Matrix(1, 2);
  m.playlist_biases = {0.5};
  m.track_biases = {0.25};
  m.playlist_embeddings.row(0)[0] = 1.0;
  m.playlist_embeddings.row(0)[1] = 2.0;
  m.track_embeddings.row(0)[0] = 3.0;
  m.track_embeddings.row(0)[1] = 4.0;

  const FeatureMatrix id = identity_features(1);
  CHECK(score(m, id.row(0), id.row(0)) == 1.0 * 3.0 + 2.0 * 4.0 + 0.5 + 0.25);

  m.hp.use_biases = false;
  CHECK(score(m, id.row(0), id.row(0)) == 11.0);

  // orthogonal latents score zero
  m.hp.use_biases = true;
  m.playlist_biases = {0.0};
  m.track_biases = {0.0};
  m.playlist_embeddings.row(0)[1] = 0.0;
  m.track_embeddings.row(0)[0] = 0.0;
  CHECK(score(m, id.row(0), id.row(0)) == 0.0);
}

TEST_CASE("warp step moves the positive toward the playlist and the negative away") {
  HybridFactorizationModel m;
  m.hp.num_factors = 2;
  m.hp.learning_rate = 0.5;
  m.hp.l2_playlist = 0.0;
  m.hp.l2_track = 0.0;
  m.playlist_embeddings = Matrix(1, 2);
  m.track_embeddings = Matrix(2, 2);
  m.playlist_biases = {0.0};
  m.track_biases = {0.0, 0.0};
  m.playlist_embeddings.row(0)[0] = 1.0;  // u = [1, 0]
  m.track_embeddings.row(0)[1] = 1.0;     // v+ = [0, 1]
  m.track_embeddings.row(1)[0] = 1.0;     // v- = [1, 1]
  m.track_embeddings.row(1)[1] = 1.0;

  const FeatureMatrix pid = identity_features(1);
  const FeatureMatrix tid = identity_features(2);
  apply_warp_step(m, pid.row(0), tid.row(0), tid.row(1), 1.0);

  // v+ += lr * u, v- -= lr * u, u += lr * (v+ - v-) at pre-step values
  CHECK(m.track_embeddings.row(0)[0] == 0.5);
  CHECK(m.track_embeddings.row(0)[1] == 1.0);
  CHECK(m.track_embeddings.row(1)[0] == 0.5);
  CHECK(m.track_embeddings.row(1)[1] == 1.0);
  CHECK(m.playlist_embeddings.row(0)[0] == 1.0 + 0.5 * (0.0 - 1.0));
  CHECK(m.playlist_embeddings.row(0)[1] == 0.0);
  CHECK(m.track_biases[0] == 0.5);
  CHECK(m.track_biases[1] == -0.5);
  CHECK(m.playlist_biases[0] == 0.0);
}

TEST_CASE("warp step applies l2 shrinkage to touched rows only") {
  HybridFactorizationModel m;
  m.hp.num_factors = 1;
  m.hp.learning_rate = 0.1;
  m.hp.l2_playlist = 0.5;
  m.hp.l2_track = 0.25;
  m.playlist_embeddings = Matrix(2, 1);
  m.track_embeddings = Matrix(3, 1);
  m.playlist_biases = {2.0, 2.0};
  m.track_biases = {2.0, 2.0, 2.0};
  m.playlist_embeddings.row(0)[0] = 4.0;
  m.playlist_embeddings.row(1)[0] = 4.0;
  m.track_embeddings.row(0)[0] = 4.0;
  m.track_embeddings.row(1)[0] = 4.0;
  m.track_embeddings.row(2)[0] = 4.0;

  const FeatureMatrix pid = identity_features(2);
  const FeatureMatrix tid = identity_features(3);
  // zero rank weight isolates the decay
  apply_warp_step(m, pid.row(0), tid.row(0), tid.row(1), 0.0);

  CHECK(m.playlist_embeddings.row(0)[0] == 4.0 * (1.0 - 0.1 * 0.5));
  CHECK(m.playlist_biases[0] == 2.0 * (1.0 - 0.1 * 0.5));
  CHECK(m.track_embeddings.row(0)[0] == 4.0 * (1.0 - 0.1 * 0.25));
  CHECK(m.track_embeddings.row(1)[0] == 4.0 * (1.0 - 0.1 * 0.25));
  CHECK(m.track_biases[0] == 2.0 * (1.0 - 0.1 * 0.25));
  CHECK(m.track_biases[1] == 2.0 * (1.0 - 0.1 * 0.25));
  // untouched rows keep their values
  CHECK(m.playlist_embeddings.row(1)[0] == 4.0);
  CHECK(m.playlist_biases[1] == 2.0);
  CHECK(m.track_embeddings.row(2)[0] == 4.0);
  CHECK(m.track_biases[2] == 2.0);
}

TEST_CASE("training with no positive pairs reproduces the initialization") {
  const auto playlists = playlists_from({{}, {}});
  const InteractionMatrix interactions = build_interactions(playlists, 3);
  const FeatureMatrix pf = identity_features(2);
  const FeatureMatrix tf = identity_features(3);

  HyperParams hp = tiny_hp();
  hp.epochs = 1;
  const HybridFactorizationModel m = train_warp(interactions, pf, tf, hp);

  // replay the initialization stream: playlist table first, then tracks,
  // each value spread * (2u - 1) with spread = 0.1 / sqrt(num_factors)
  Rng rng(hp.rng_seed);
  const double spread = 0.1 / std::sqrt(static_cast<double>(hp.num_factors));
  for (double v : m.playlist_embeddings.data())
    CHECK(v == spread * (2.0 * rng.next_unit() - 1.0));
  for (double v : m.track_embeddings.data())
    CHECK(v == spread * (2.0 * rng.next_unit() - 1.0));
  for (double b : m.playlist_biases) CHECK(b == 0.0);
  for (double b : m.track_biases) CHECK(b == 0.0);
}

TEST_CASE("training separates an interacted track from a non-interacted one") {
  // symmetric corpus: each playlist interacts with one of the two tracks,
  // so neither side outvotes the other through the shared track biases
  const auto playlists = playlists_from({{0}, {1}});
  const InteractionMatrix interactions = build_interactions(playlists, 2);
  const FeatureMatrix pf = identity_features(2);
  const FeatureMatrix tf = identity_features(2);

  HyperParams hp = tiny_hp();
  hp.epochs = 60;
  const HybridFactorizationModel m = train_warp(interactions, pf, tf, hp);
  CHECK(score(m, pf.row(0), tf.row(0)) > score(m, pf.row(0), tf.row(1)));
  CHECK(score(m, pf.row(1), tf.row(1)) > score(m, pf.row(1), tf.row(0)));
}

TEST_CASE("training pulls block structure out of disjoint listening groups") {
  // playlists 0..9 use tracks 0..9, playlists 10..19 use tracks 10..19
  std::vector<std::vector<TrackIndex>> lists(20);
  Rng rng(17);
  for (int p = 0; p < 20; ++p) {
    const TrackIndex base = p < 10 ? 0 : 10;
    for (int i = 0; i < 6; ++i)
      lists[static_cast<std::size_t>(p)].push_back(
          base + static_cast<TrackIndex>(rng.next_below(10)));
  }
  const auto playlists = playlists_from(lists);
  const InteractionMatrix interactions = build_interactions(playlists, 20);
  const FeatureMatrix pf = identity_features(20);
  const FeatureMatrix tf = identity_features(20);

  HyperParams hp = tiny_hp();
  hp.num_factors = 8;
  hp.epochs = 40;
  const HybridFactorizationModel m = train_warp(interactions, pf, tf, hp);

  double own = 0.0;
  double other = 0.0;
  for (int p = 0; p < 20; ++p) {
    for (TrackIndex t = 0; t < 20; ++t) {
      const bool same_block = (p < 10) == (t < 10);
      (same_block ? own : other) += score(m, pf.row(p), tf.row(t));
    }
  }
  CHECK(own / 200.0 > other / 200.0);
}

TEST_CASE("single-threaded training is bit-reproducible") {
  const auto playlists = playlists_from({{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  const InteractionMatrix interactions = build_interactions(playlists, 4);
  const FeatureMatrix pf = identity_features(4);
  const FeatureMatrix tf = identity_features(4);

  const HybridFactorizationModel a = train_warp(interactions, pf, tf, tiny_hp());
  const HybridFactorizationModel b = train_warp(interactions, pf, tf, tiny_hp());
  REQUIRE(a.track_embeddings.data().size() == b.track_embeddings.data().size());
  CHECK(std::memcmp(a.playlist_embeddings.data().data(), b.playlist_embeddings.data().data(),
                    a.playlist_embeddings.data().size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.track_embeddings.data().data(), b.track_embeddings.data().data(),
                    a.track_embeddings.data().size() * sizeof(double)) == 0);
  CHECK(a.playlist_biases == b.playlist_biases);
  CHECK(a.track_biases == b.track_biases);

  // a different seed lands on different parameters
  HyperParams other = tiny_hp();
  other.rng_seed = 6;
  const HybridFactorizationModel c = train_warp(interactions, pf, tf, other);
  CHECK(c.track_embeddings.data() != a.track_embeddings.data());
}

TEST_CASE("epoch callback sees every epoch in order") {
  const auto playlists = playlists_from({{0, 1}});
  const InteractionMatrix interactions = build_interactions(playlists, 3);
  HyperParams hp = tiny_hp();
  hp.epochs = 5;
  std::vector<int> seen;
  train_warp(interactions, identity_features(1), identity_features(3), hp, 1,
             [&](int epoch, const HybridFactorizationModel& m) {
               CHECK(m.all_finite());
               seen.push_back(epoch);
             });
  CHECK(seen == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("train_warp rejects mismatched shapes") {
  const auto playlists = playlists_from({{0}});
  const InteractionMatrix interactions = build_interactions(playlists, 2);
  CHECK_THROWS_AS(train_warp(interactions, identity_features(2), identity_features(2), tiny_hp()),
                  Error);
  CHECK_THROWS_AS(train_warp(interactions, identity_features(1), identity_features(3), tiny_hp()),
                  Error);
  CHECK_THROWS_AS(
      train_warp(interactions, identity_features(1), identity_features(2), tiny_hp(), 0), Error);
}

TEST_CASE("recommend_mf excludes seeds and ranks by score") {
  const auto playlists = playlists_from({{0, 1}, {2, 3}, {1, 4}});
  const InteractionMatrix interactions = build_interactions(playlists, 5);
  const FeatureMatrix pf = identity_features(3);
  const FeatureMatrix tf = identity_features(5);
  const HybridFactorizationModel m = train_warp(interactions, pf, tf, tiny_hp());
  const TrackLatents latents = compute_track_latents(m, tf);

  const std::vector<TrackIndex> seeds = {0, 1};
  const RankedList list = recommend_mf(m, latents, pf.row(0), seeds, 4000);
  CHECK(list.origin == ListOrigin::MF);
  REQUIRE(list.items.size() == 3);  // 5 tracks minus 2 seeds
  for (const ScoredTrack& item : list.items) {
    CHECK(item.track != 0);
    CHECK(item.track != 1);
  }
  for (std::size_t i = 1; i < list.items.size(); ++i)
    CHECK(list.items[i - 1].score >= list.items[i].score);

  // k = 1 returns the argmax of the same ordering
  const RankedList top1 = recommend_mf(m, latents, pf.row(0), seeds, 1);
  REQUIRE(top1.items.size() == 1);
  CHECK(top1.items[0].track == list.items[0].track);
  CHECK(top1.items[0].score == list.items[0].score);
}

TEST_CASE("recommend_mf agrees with per-track scoring") {
  Rng rng(71);
  std::vector<std::vector<TrackIndex>> lists(12);
  for (auto& l : lists)
    for (int i = 0; i < 8; ++i) l.push_back(static_cast<TrackIndex>(rng.next_below(50)));
  const auto playlists = playlists_from(lists);
  const InteractionMatrix interactions = build_interactions(playlists, 50);
  const FeatureMatrix pf = identity_features(12);
  const FeatureMatrix tf = identity_features(50);
  HyperParams hp = tiny_hp();
  hp.epochs = 5;
  const HybridFactorizationModel m = train_warp(interactions, pf, tf, hp);
  const TrackLatents latents = compute_track_latents(m, tf);

  const RankedList list = recommend_mf(m, latents, pf.row(3), {}, 50);
  REQUIRE(list.items.size() == 50);

  // brute force: score every track through the score() path and sort with
  // the same tie rule
  std::vector<ScoredTrack> expected;
  for (TrackIndex t = 0; t < 50; ++t)
    expected.push_back({t, score(m, pf.row(3), tf.row(t))});
  std::stable_sort(expected.begin(), expected.end(), [](const ScoredTrack& a, const ScoredTrack& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.track < b.track;
  });
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(list.items[i].track == expected[i].track);
    CHECK(list.items[i].score == expected[i].score);
  }
}

TEST_CASE("model store round-trips bit for bit") {
  TempDir dir;
  const auto playlists = playlists_from({{0, 1}, {1, 2}});
  const InteractionMatrix interactions = build_interactions(playlists, 3);
  const FeatureMatrix pf = identity_features(2);
  const FeatureMatrix tf = identity_features(3);
  HyperParams hp = tiny_hp();
  hp.l2_playlist = 1e-5;
  hp.use_biases = true;
  const HybridFactorizationModel m = train_warp(interactions, pf, tf, hp);

  const auto path = dir.file("model.bin");
  save_model(m, path);
  const HybridFactorizationModel loaded = load_model(path);

  CHECK(loaded.hp.num_factors == m.hp.num_factors);
  CHECK(loaded.hp.l2_playlist == m.hp.l2_playlist);
  CHECK(loaded.hp.l2_track == m.hp.l2_track);
  CHECK(loaded.hp.epochs == m.hp.epochs);
  CHECK(loaded.hp.learning_rate == m.hp.learning_rate);
  CHECK(loaded.hp.max_sampled_negatives == m.hp.max_sampled_negatives);
  CHECK(loaded.hp.rng_seed == m.hp.rng_seed);
  CHECK(loaded.hp.candidate_list_size == m.hp.candidate_list_size);
  CHECK(loaded.hp.use_biases == m.hp.use_biases);
  CHECK(loaded.playlist_embeddings.data() == m.playlist_embeddings.data());
  CHECK(loaded.track_embeddings.data() == m.track_embeddings.data());
  CHECK(loaded.playlist_biases == m.playlist_biases);
  CHECK(loaded.track_biases == m.track_biases);

  // saving the loaded model reproduces the file byte for byte
  const auto path2 = dir.file("model2.bin");
  save_model(loaded, path2);
  CHECK(coco::test::read_file(path) == coco::test::read_file(path2));
}

TEST_CASE("model store rejects foreign and truncated files") {
  TempDir dir;
  const auto bogus = dir.file("bogus.bin");
  coco::test::write_file(bogus, "clearly not a model");
  CHECK_THROWS_AS(load_model(bogus), Error);
  CHECK_THROWS_AS(load_model(dir.file("absent.bin")), Error);

  // valid magic, then nothing
  const auto truncated = dir.file("truncated.bin");
  coco::test::write_file(truncated, "cocomf01");
  CHECK_THROWS_AS(load_model(truncated), Error);
}

TEST_CASE("multi-threaded training smoke") {
  Rng rng(23);
  std::vector<std::vector<TrackIndex>> lists(30);
  for (auto& l : lists)
    for (int i = 0; i < 10; ++i) l.push_back(static_cast<TrackIndex>(rng.next_below(40)));
  const auto playlists = playlists_from(lists);
  const InteractionMatrix interactions = build_interactions(playlists, 40);
  HyperParams hp = tiny_hp();
  hp.epochs = 3;
  const HybridFactorizationModel m =
      train_warp(interactions, identity_features(30), identity_features(40), hp, 4);
  CHECK(m.all_finite());
  CHECK(m.track_embeddings.rows() == 40);
}
