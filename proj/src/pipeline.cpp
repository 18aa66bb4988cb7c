#include "coco/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coco/error.hpp"
#include "coco/fusion.hpp"
#include "coco/mf.hpp"
#include "coco/proximity.hpp"
#include "coco/submission.hpp"

namespace coco::pipeline {

Source source_from_string(const std::string& s) {
  if (s == "mf") return Source::Mf;
  if (s == "tp") return Source::Tp;
  if (s == "fused") return Source::Fused;
  throw Error("source must be one of mf, tp, fused; got '" + s + "'");
}

std::string to_string(Source s) {
  switch (s) {
    case Source::Mf: return "mf";
    case Source::Tp: return "tp";
    case Source::Fused: return "fused";
  }
  throw Error("unknown source value");
}

namespace {

std::vector<Playlist> stacked_playlists(const EvalSplit& split) {
  std::vector<Playlist> stacked = split.train;
  stacked.reserve(split.train.size() + split.test.size());
  for (const TestPlaylist& tp : split.test) stacked.push_back(tp.seeds);
  return stacked;
}

}  // namespace

Stack load_stack(const PipelineConfig& config) {
  Stack stack;
  stack.corpus = load_corpus(config.corpus_files());
  stack.split = read_split(stack.corpus.catalog, config.train_path(), config.test_path());
  stack.stacked = stacked_playlists(stack.split);
  stack.vocab = build_title_vocabulary(stack.stacked);
  stack.playlist_features = build_playlist_features(stack.stacked, stack.vocab);
  const GenreTable genres = GenreTable::load_csv(config.genre_table);
  stack.track_features = build_track_features(stack.corpus.catalog, genres);
  return stack;
}

void cmd_split(const PipelineConfig& config) {
  config.validate();
  const Corpus corpus = load_corpus(config.corpus_files());
  const EvalSplit split =
      make_challenge_split(corpus.playlists, config.per_category, config.rng_seed);
  std::filesystem::create_directories(config.output_dir);
  write_split(split, corpus.catalog, config.train_path(), config.test_path());
  std::cout << "wrote " << config.train_path().string() << " (" << split.train.size()
            << " playlists) and " << config.test_path().string() << " (" << split.test.size()
            << " test playlists)\n";
}

void cmd_train(const PipelineConfig& config) {
  config.validate();
  const Stack stack = load_stack(config);
  const InteractionMatrix interactions =
      build_interactions(stack.stacked, stack.corpus.catalog.size());

  const int progress_step = std::max(1, config.hp.epochs / 5);
  const HybridFactorizationModel model = train_warp(
      interactions, stack.playlist_features, stack.track_features, config.hp, config.threads,
      [&](int epoch, const HybridFactorizationModel&) {
        if ((epoch + 1) % progress_step == 0 || epoch + 1 == config.hp.epochs)
          std::cout << "epoch " << (epoch + 1) << "/" << config.hp.epochs << "\n";
      });

  std::filesystem::create_directories(config.output_dir);
  save_model(model, config.model_path());
  std::cout << "saved model to " << config.model_path().string() << "\n";
}

void cmd_build_proximity(const PipelineConfig& config) {
  config.validate();
  const Corpus corpus = load_corpus(config.corpus_files());
  const EvalSplit split = read_split(corpus.catalog, config.train_path(), config.test_path());
  // train playlists plus test seed playlists: the visible side of the test
  // split carries co-occurrence signal, ground truth stays out
  const std::vector<Playlist> stacked = stacked_playlists(split);
  const ProximityMatrix S = build_proximity(stacked, config.window, config.threads);
  std::filesystem::create_directories(config.output_dir);
  save_proximity(S, config.proximity_path());
  std::cout << "saved proximity matrix (" << S.stored_pairs() << " pairs) to "
            << config.proximity_path().string() << "\n";
}

std::filesystem::path cmd_recommend(const PipelineConfig& config, Source source) {
  config.validate();
  const Stack stack = load_stack(config);
  const HybridFactorizationModel model = load_model(config.model_path());
  const ProximityMatrix S = load_proximity(config.proximity_path());

  if (model.playlist_embeddings.rows() != stack.playlist_features.cols() ||
      model.track_embeddings.rows() != stack.track_features.cols())
    throw Error("model at " + config.model_path().string() +
                " does not match the current split; re-run train");
  if (S.num_tracks() > stack.corpus.catalog.size())
    throw Error("proximity matrix at " + config.proximity_path().string() +
                " does not match the current corpus; re-run build-proximity");

  const TrackLatents latents = compute_track_latents(model, stack.track_features);

  // one popularity ordering over the whole catalog backs all padding
  std::vector<double> popularity = popularity_vector(S);
  popularity.resize(static_cast<std::size_t>(stack.corpus.catalog.size()), 0.0);
  const std::vector<TrackIndex> pop_rank = popularity_order(popularity);

  ContinuationConfig cc;
  cc.weights = config.weights;
  cc.list_length = config.list_length;
  cc.candidate_k = config.hp.candidate_list_size;
  cc.no_seed_source = config.no_seed_source;

  ContinuationContext ctx;
  ctx.model = &model;
  ctx.track_latents = &latents;
  ctx.playlist_features = &stack.playlist_features;
  ctx.proximity = &S;
  ctx.popularity_rank = &pop_rank;

  const auto finish = [&](RankedList list, std::span<const TrackIndex> seeds,
                          std::int64_t pid) {
    pad_with_popularity(list, pop_rank, seeds, config.list_length);
    if (list.items.size() != static_cast<std::size_t>(config.list_length))
      throw Error("cannot produce " + std::to_string(config.list_length) +
                  " tracks for pid " + std::to_string(pid));
    return list;
  };

  Submission submission;
  submission.entries.reserve(stack.split.test.size());
  for (std::size_t i = 0; i < stack.split.test.size(); ++i) {
    const TestPlaylist& tp = stack.split.test[i];
    const std::int64_t row = static_cast<std::int64_t>(stack.split.train.size() + i);
    const std::vector<TrackIndex> seeds = seed_track_set(tp.seeds);

    RankedList list;
    switch (source) {
      case Source::Fused:
        list = continue_playlist(ctx, row, seeds, cc);
        break;
      case Source::Mf:
        list = finish(recommend_mf(model, latents, stack.playlist_features.row(row), seeds,
                                   config.list_length),
                      seeds, tp.seeds.pid);
        break;
      case Source::Tp:
        list = finish(recommend_tp(S, seeds, config.list_length), seeds, tp.seeds.pid);
        break;
    }

    std::vector<std::string> uris;
    uris.reserve(list.items.size());
    for (const ScoredTrack& st : list.items)
      uris.push_back(stack.corpus.catalog.track(st.track).track_uri);
    submission.entries.emplace_back(tp.seeds.pid, std::move(uris));
  }

  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path path = config.submission_path(to_string(source));
  write_submission(path, submission);
  std::cout << "wrote " << path.string() << " (" << submission.entries.size() << " lines)\n";
  return path;
}

EvalOutputs cmd_evaluate(const PipelineConfig& config,
                         const std::filesystem::path& submission_path) {
  config.validate();
  const Corpus corpus = load_corpus(config.corpus_files());
  const EvalSplit split = read_split(corpus.catalog, config.train_path(), config.test_path());
  const Submission submission = read_submission(submission_path);
  const std::vector<SubmissionEntry> resolved = resolve_submission(submission, corpus.catalog);

  EvalOptions options;
  options.artist_credit = config.artist_credit;
  options.expected_length = config.list_length;

  EvalOutputs outputs;
  outputs.report = evaluate_submission(resolved, split, corpus.catalog, options);

  std::filesystem::create_directories(config.output_dir);
  const std::string stem = submission_path.stem().string();
  outputs.text_path = std::filesystem::path(config.output_dir) / ("report_" + stem + ".txt");
  outputs.csv_path = std::filesystem::path(config.output_dir) / ("report_" + stem + ".csv");
  {
    std::ofstream out(outputs.text_path);
    if (!out) throw Error("cannot write report: " + outputs.text_path.string());
    out << render_report_text(outputs.report);
  }
  {
    std::ofstream out(outputs.csv_path);
    if (!out) throw Error("cannot write report: " + outputs.csv_path.string());
    out << render_report_csv(outputs.report);
  }
  return outputs;
}

BordaOutputs cmd_borda(const PipelineConfig& config,
                       const std::vector<std::filesystem::path>& submission_paths) {
  if (submission_paths.empty()) throw Error("borda needs at least one submission file");

  struct SystemScores {
    std::string id;
    double rprec;
    double ndcg;
    double clicks;
  };
  std::vector<SystemScores> systems;
  systems.reserve(submission_paths.size());
  for (const std::filesystem::path& path : submission_paths) {
    const std::string id = path.stem().string();
    for (const SystemScores& s : systems) {
      if (s.id == id) throw Error("duplicate submission name: " + id);
    }
    const EvalOutputs outputs = cmd_evaluate(config, path);
    systems.push_back(SystemScores{id, outputs.report.overall.rprec, outputs.report.overall.ndcg,
                                   outputs.report.overall.clicks});
  }

  const auto ranking_by = [&](auto key, bool ascending) {
    std::vector<SystemScores> sorted = systems;
    std::sort(sorted.begin(), sorted.end(), [&](const SystemScores& a, const SystemScores& b) {
      const double ka = key(a);
      const double kb = key(b);
      if (ka != kb) return ascending ? ka < kb : ka > kb;
      return a.id < b.id;
    });
    std::vector<std::string> ids;
    ids.reserve(sorted.size());
    for (const SystemScores& s : sorted) ids.push_back(s.id);
    return ids;
  };

  const std::vector<std::vector<std::string>> rankings = {
      ranking_by([](const SystemScores& s) { return s.rprec; }, false),
      ranking_by([](const SystemScores& s) { return s.ndcg; }, false),
      ranking_by([](const SystemScores& s) { return s.clicks; }, true),
  };

  BordaOutputs outputs;
  outputs.table = borda(rankings);

  std::ostringstream text;
  text << "rank  points  system\n";
  for (const BordaEntry& entry : outputs.table) {
    text << std::left;
    text.width(6);
    text << entry.rank;
    text.width(8);
    text << entry.points;
    text << entry.system << '\n';
  }
  outputs.text = text.str();
  return outputs;
}

}  // namespace coco::pipeline
