#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coco/config.hpp"
#include "coco/error.hpp"
#include "coco/pipeline.hpp"
#include "coco/synthetic.hpp"

namespace {

struct ConfigArgs {
  std::string config_path;
  int threads = 0;  // 0 keeps the config value
};

void add_config_options(CLI::App& cmd, ConfigArgs& args) {
  cmd.add_option("-c,--config", args.config_path, "pipeline config JSON")->required();
  cmd.add_option("-t,--threads", args.threads,
                 "worker threads; 1 selects the deterministic paths");
}

coco::PipelineConfig load(const ConfigArgs& args) {
  coco::PipelineConfig config = coco::load_config(args.config_path);
  if (args.threads > 0) config.threads = args.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid playlist continuation pipeline"};
  app.require_subcommand(1);

  coco::SyntheticSpec spec;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synthetic", "write a seeded synthetic corpus");
  gen->add_option("-o,--out", synth_out, "output directory")->required();
  gen->add_option("--playlists", spec.num_playlists, "number of playlists");
  gen->add_option("--tracks", spec.num_tracks, "catalog size");
  gen->add_option("--artists", spec.num_artists, "number of artists");
  gen->add_option("--clusters", spec.num_clusters, "number of track clusters");
  gen->add_option("--title-prob", spec.title_prob, "fraction of playlists with titles");
  gen->add_option("--long-fraction", spec.long_fraction,
                  "fraction of playlists long enough for 100-seed categories");
  gen->add_option("--affinity", spec.cluster_affinity, "within-cluster draw probability");
  gen->add_option("--slices", spec.num_slices, "number of slice files");
  gen->add_option("--seed", spec.seed, "generator seed");

  ConfigArgs split_args, train_args, prox_args, rec_args, eval_args, borda_args;
  auto* split = app.add_subcommand("split", "carve the challenge split from the corpus");
  add_config_options(*split, split_args);

  auto* train = app.add_subcommand("train", "train the factorization model");
  add_config_options(*train, train_args);

  auto* prox = app.add_subcommand("build-proximity", "build the track proximity matrix");
  add_config_options(*prox, prox_args);

  std::string source = "fused";
  auto* rec = app.add_subcommand("recommend", "write a submission file");
  add_config_options(*rec, rec_args);
  rec->add_option("-s,--source", source, "mf, tp, or fused");

  std::string submission_path;
  auto* eval = app.add_subcommand("evaluate", "score a submission against the split");
  add_config_options(*eval, eval_args);
  eval->add_option("--submission", submission_path, "submission file")->required();

  std::vector<std::string> borda_submissions;
  auto* borda_cmd = app.add_subcommand("borda", "rank submissions by Borda count");
  add_config_options(*borda_cmd, borda_args);
  borda_cmd->add_option("--submissions", borda_submissions, "submission files")
      ->required()
      ->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const coco::SyntheticPaths paths = coco::generate_synthetic_corpus(spec, synth_out);
      std::cout << "wrote " << paths.slices.size() << " slices, " << paths.genre_csv.string()
                << ", " << paths.config_json.string() << "\n";
    } else if (split->parsed()) {
      coco::pipeline::cmd_split(load(split_args));
    } else if (train->parsed()) {
      coco::pipeline::cmd_train(load(train_args));
    } else if (prox->parsed()) {
      coco::pipeline::cmd_build_proximity(load(prox_args));
    } else if (rec->parsed()) {
      coco::pipeline::cmd_recommend(load(rec_args), coco::pipeline::source_from_string(source));
    } else if (eval->parsed()) {
      const auto outputs = coco::pipeline::cmd_evaluate(load(eval_args), submission_path);
      std::cout << coco::render_report_text(outputs.report);
      std::cout << "wrote " << outputs.text_path.string() << " and "
                << outputs.csv_path.string() << "\n";
    } else if (borda_cmd->parsed()) {
      std::vector<std::filesystem::path> paths(borda_submissions.begin(),
                                               borda_submissions.end());
      const auto outputs = coco::pipeline::cmd_borda(load(borda_args), paths);
      std::cout << outputs.text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
