#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "coco/config.hpp"
#include "coco/pipeline.hpp"
#include "coco/submission.hpp"
#include "coco/synthetic.hpp"
#include "test_util.hpp"

using namespace coco;
using coco::test::TempDir;
using coco::test::read_file;
using coco::test::write_file;

namespace {

// restores the previous value (or absence) of an environment variable
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) previous_ = old;
    ::setenv(name, value, 1);
  }
  ~EnvGuard() {
    if (previous_)
      ::setenv(name_.c_str(), previous_->c_str(), 1);
    else
      ::unsetenv(name_.c_str());
  }
  EnvGuard(const EnvGuard&) = delete;
  EnvGuard& operator=(const EnvGuard&) = delete;

 private:
  std::string name_;
  std::optional<std::string> previous_;
};

// a minimal but valid on-disk layout: one slice, a genre table, a config
struct ConfigFixture {
  TempDir dir;
  std::filesystem::path config_path;

  explicit ConfigFixture(const nlohmann::json& overrides = {}) {
    std::filesystem::create_directories(dir.file("slices"));
    nlohmann::json slice = {{"playlists",
                             {{{"pid", 0},
                               {"name", "mix"},
                               {"tracks",
                                {{{"pos", 0},
                                  {"track_uri", "spotify:track:x"},
                                  {"artist_uri", "spotify:artist:x"}}}}}}}};
    write_file(dir.file("slices") / "slice-0000.json", slice.dump());

    std::string genre_csv = "track_uri";
    for (const char* g : kGenreNames) genre_csv += std::string(",") + g;
    genre_csv += "\n";
    write_file(dir.file("genres.csv"), genre_csv);

    nlohmann::json config = {
        {"corpus", {"slices"}}, {"genre_table", "genres.csv"}, {"output_dir", "out"},
        {"per_category", 2},    {"rng_seed", 7},               {"window", 4},
        {"threads", 2},         {"list_length", 25},           {"no_seed_source", "tp"},
        {"artist_credit", true}, {"mf", {{"num_factors", 16}, {"epochs", 9}}},
        {"fusion", {{"alpha_mf", 0.6}, {"alpha_tp", 0.4}}},
    };
    for (const auto& [key, value] : overrides.items()) config[key] = value;
    config_path = dir.file("config.json");
    write_file(config_path, config.dump());
  }
};

}  // namespace

TEST_CASE("load_config reads fields and resolves paths against the config directory") {
  const ConfigFixture f;
  const PipelineConfig config = load_config(f.config_path);

  REQUIRE(config.corpus.size() == 1);
  CHECK(config.corpus[0] == (f.dir.file("slices")).lexically_normal().string());
  CHECK(config.genre_table == f.dir.file("genres.csv").lexically_normal().string());
  CHECK(config.output_dir == f.dir.file("out").lexically_normal().string());
  CHECK(config.per_category == 2);
  CHECK(config.rng_seed == 7);
  CHECK(config.window == 4);
  CHECK(config.threads == 2);
  CHECK(config.list_length == 25);
  CHECK(config.no_seed_source == NoSeedSource::Tp);
  CHECK(config.artist_credit);
  CHECK(config.hp.num_factors == 16);
  CHECK(config.hp.epochs == 9);
  CHECK(config.hp.learning_rate == 0.05);  // untouched default
  CHECK(config.weights.alpha_mf == 0.6);
  CHECK(config.weights.alpha_tp == 0.4);

  // derived paths hang off the output directory
  CHECK(config.train_path() == std::filesystem::path(config.output_dir) / "train.jsonl");
  CHECK(config.model_path() == std::filesystem::path(config.output_dir) / "model.bin");
  CHECK(config.submission_path("fused") ==
        std::filesystem::path(config.output_dir) / "submission_fused.csv");

  // corpus directory entries expand to their sorted .json slices
  const auto files = config.corpus_files();
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename() == "slice-0000.json");

  config.validate();
}

TEST_CASE("load_config rejects unknown keys and malformed values") {
  {
    const ConfigFixture f(nlohmann::json{{"typo_key", 1}});
    try {
      load_config(f.config_path);
      FAIL("expected unknown-key error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
    }
  }
  {
    const ConfigFixture f(nlohmann::json{{"mf", {{"factors", 4}}}});
    CHECK_THROWS_AS(load_config(f.config_path), Error);
  }
  {
    const ConfigFixture f(nlohmann::json{{"no_seed_source", "both"}});
    CHECK_THROWS_AS(load_config(f.config_path), Error);
  }
  {
    const ConfigFixture f(nlohmann::json{{"corpus", 7}});
    CHECK_THROWS_AS(load_config(f.config_path), Error);
  }

  TempDir dir;
  write_file(dir.file("broken.json"), "{ nope");
  CHECK_THROWS_AS(load_config(dir.file("broken.json")), Error);
  CHECK_THROWS_AS(load_config(dir.file("absent.json")), Error);
}

TEST_CASE("environment variables override config fields") {
  const ConfigFixture f;

  {
    const EnvGuard seed("COCO_RNG_SEED", "777");
    const EnvGuard alpha("COCO_ALPHA_TP", "0.45");
    const EnvGuard source("COCO_NO_SEED_SOURCE", "mf");
    const EnvGuard biases("COCO_USE_BIASES", "off");
    const EnvGuard epochs("COCO_EPOCHS", "3");
    const PipelineConfig config = load_config(f.config_path);
    CHECK(config.rng_seed == 777);
    CHECK(config.weights.alpha_tp == 0.45);
    CHECK(config.no_seed_source == NoSeedSource::Mf);
    CHECK_FALSE(config.hp.use_biases);
    CHECK(config.hp.epochs == 3);
  }

  // guards restored the environment; the file values are back
  const PipelineConfig config = load_config(f.config_path);
  CHECK(config.rng_seed == 7);
  CHECK(config.hp.epochs == 9);

  {
    const EnvGuard bad("COCO_WINDOW", "abc");
    try {
      load_config(f.config_path);
      FAIL("expected an error naming COCO_WINDOW");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("COCO_WINDOW") != std::string::npos);
    }
  }
  {
    const EnvGuard bad("COCO_ARTIST_CREDIT", "maybe");
    CHECK_THROWS_AS(load_config(f.config_path), Error);
  }
}

TEST_CASE("source and no-seed-source names round-trip") {
  CHECK(no_seed_source_from_string("fusion") == NoSeedSource::Fusion);
  CHECK(no_seed_source_from_string("mf") == NoSeedSource::Mf);
  CHECK(no_seed_source_from_string("tp") == NoSeedSource::Tp);
  CHECK(to_string(NoSeedSource::Tp) == "tp");
  CHECK_THROWS_AS(no_seed_source_from_string("hybrid"), Error);

  CHECK(pipeline::source_from_string("mf") == pipeline::Source::Mf);
  CHECK(pipeline::source_from_string("tp") == pipeline::Source::Tp);
  CHECK(pipeline::source_from_string("fused") == pipeline::Source::Fused);
  CHECK(pipeline::to_string(pipeline::Source::Fused) == "fused");
  CHECK_THROWS_AS(pipeline::source_from_string("warp"), Error);
}

TEST_CASE("submission files round-trip") {
  TempDir dir;
  Submission submission;
  submission.team_info = "main, crew, crew@example.com";
  submission.entries = {{12, {"uri:a", "uri:b"}}, {-3, {"uri:c"}}};

  const auto path = dir.file("submission.csv");
  write_submission(path, submission);
  const Submission loaded = read_submission(path);
  REQUIRE(loaded.team_info.has_value());
  CHECK(*loaded.team_info == *submission.team_info);
  CHECK(loaded.entries == submission.entries);

  // comments and blank lines are ignored
  write_file(path, "# comment\n\nteam_info, solo\n7, uri:a, uri:b\n");
  const Submission commented = read_submission(path);
  CHECK(*commented.team_info == "solo");
  REQUIRE(commented.entries.size() == 1);
  CHECK(commented.entries[0].first == 7);
  CHECK(commented.entries[0].second == std::vector<std::string>{"uri:a", "uri:b"});

  write_file(path, "7, uri:a\nteam_info, late\n");
  CHECK_THROWS_AS(read_submission(path), Error);
  write_file(path, "notanumber, uri:a\n");
  CHECK_THROWS_AS(read_submission(path), Error);
  write_file(path, "7\n");
  CHECK_THROWS_AS(read_submission(path), Error);
}

TEST_CASE("resolve_submission maps uris and names the pid on failure") {
  Catalog catalog;
  catalog.intern("uri:a", "artist:1", "a", "1");
  catalog.intern("uri:b", "artist:1", "b", "1");

  Submission submission;
  submission.entries = {{5, {"uri:b", "uri:a"}}};
  const auto resolved = resolve_submission(submission, catalog);
  REQUIRE(resolved.size() == 1);
  CHECK(resolved[0].pid == 5);
  CHECK(resolved[0].tracks == std::vector<TrackIndex>{1, 0});

  submission.entries = {{5, {"uri:a"}}, {9, {"uri:ghost"}}};
  try {
    resolve_submission(submission, catalog);
    FAIL("expected unknown-uri error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("pid 9") != std::string::npos);
    CHECK(what.find("uri:ghost") != std::string::npos);
  }
}

TEST_CASE("synthetic corpus generation") {
  TempDir dir;
  SyntheticSpec spec;
  spec.num_playlists = 50;
  spec.num_tracks = 240;
  spec.num_artists = 30;
  spec.num_clusters = 3;
  spec.title_prob = 1.0;
  spec.long_fraction = 0.0;
  spec.num_slices = 3;
  spec.seed = 12;

  const SyntheticPaths paths = generate_synthetic_corpus(spec, dir.file("corpus"));
  REQUIRE(paths.slices.size() == 3);
  for (const auto& slice : paths.slices) CHECK(std::filesystem::is_regular_file(slice));
  CHECK(std::filesystem::is_regular_file(paths.genre_csv));
  CHECK(std::filesystem::is_regular_file(paths.config_json));

  const Corpus corpus = load_corpus(paths.slices);
  CHECK(corpus.playlists.size() == 50);
  CHECK(corpus.catalog.size() <= 240);
  for (const Playlist& p : corpus.playlists) {
    REQUIRE(p.title.has_value());
    CHECK_FALSE(normalize_title(*p.title).empty());
    CHECK(p.tracks.size() >= 10);
  }

  // the genre table parses and covers most of the catalog
  const GenreTable genres = GenreTable::load_csv(paths.genre_csv);
  CHECK(genres.size() > 150);

  // the starter config loads; only the output directory is absent so far
  const PipelineConfig config = load_config(paths.config_json);
  CHECK(config.per_category == 1);
  CHECK(config.threads == 1);
  config.validate();

  // the same spec writes the same bytes
  const SyntheticPaths again = generate_synthetic_corpus(spec, dir.file("copy"));
  for (std::size_t i = 0; i < paths.slices.size(); ++i)
    CHECK(read_file(paths.slices[i]) == read_file(again.slices[i]));
  CHECK(read_file(paths.genre_csv) == read_file(again.genre_csv));

  SyntheticSpec bad = spec;
  bad.num_clusters = 500;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad, dir.file("bad")), Error);
  bad = spec;
  bad.title_prob = 1.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad, dir.file("bad")), Error);
}

TEST_CASE("pipeline stages run end to end on a synthetic corpus") {
  TempDir dir;
  SyntheticSpec spec;
  spec.num_playlists = 60;
  spec.num_tracks = 300;
  spec.num_artists = 40;
  spec.num_clusters = 2;
  spec.title_prob = 1.0;
  spec.long_fraction = 0.25;
  spec.cluster_affinity = 0.9;
  spec.num_slices = 2;
  spec.seed = 11;
  const SyntheticPaths paths = generate_synthetic_corpus(spec, dir.file("corpus"));

  PipelineConfig config = load_config(paths.config_json);
  config.hp.num_factors = 8;
  config.hp.epochs = 3;
  config.hp.max_sampled_negatives = 20;
  config.list_length = 30;

  pipeline::cmd_split(config);
  CHECK(std::filesystem::is_regular_file(config.train_path()));
  CHECK(std::filesystem::is_regular_file(config.test_path()));

  pipeline::cmd_train(config);
  CHECK(std::filesystem::is_regular_file(config.model_path()));

  pipeline::cmd_build_proximity(config);
  CHECK(std::filesystem::is_regular_file(config.proximity_path()));

  const std::filesystem::path fused = pipeline::cmd_recommend(config, pipeline::Source::Fused);
  const std::string first_run = read_file(fused);

  // structural checks against the split
  const Corpus corpus = load_corpus(config.corpus_files());
  const EvalSplit split = read_split(corpus.catalog, config.train_path(), config.test_path());
  const std::vector<SubmissionEntry> resolved =
      resolve_submission(read_submission(fused), corpus.catalog);
  REQUIRE(resolved.size() == split.test.size());
  REQUIRE(resolved.size() == 10);  // one playlist per category
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    CHECK(resolved[i].pid == split.test[i].seeds.pid);
    REQUIRE(resolved[i].tracks.size() == 30);
    std::vector<TrackIndex> sorted = resolved[i].tracks;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    const std::vector<TrackIndex> seeds = seed_track_set(split.test[i].seeds);
    for (TrackIndex t : resolved[i].tracks)
      CHECK_FALSE(std::binary_search(seeds.begin(), seeds.end(), t));
  }

  // a second run reproduces the submission byte for byte
  pipeline::cmd_recommend(config, pipeline::Source::Fused);
  CHECK(read_file(fused) == first_run);

  // single-source submissions and their reports
  const std::filesystem::path mf = pipeline::cmd_recommend(config, pipeline::Source::Mf);
  const std::filesystem::path tp = pipeline::cmd_recommend(config, pipeline::Source::Tp);

  const pipeline::EvalOutputs eval = pipeline::cmd_evaluate(config, fused);
  CHECK(eval.report.overall.count == 10);
  CHECK(std::filesystem::is_regular_file(eval.text_path));
  CHECK(std::filesystem::is_regular_file(eval.csv_path));
  CHECK(read_file(eval.text_path).find("All playlists combined") != std::string::npos);

  const pipeline::BordaOutputs ranking = pipeline::cmd_borda(config, {fused, mf, tp});
  CHECK(ranking.table.size() == 3);
  CHECK(ranking.text.find("rank") == 0);
  for (const BordaEntry& entry : ranking.table) {
    CHECK(entry.rank >= 1);
    CHECK(entry.rank <= 3);
  }

  CHECK_THROWS_AS(pipeline::cmd_borda(config, {fused, fused}), Error);
}
