#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coco/config.hpp"
#include "coco/dataset.hpp"
#include "coco/features.hpp"
#include "coco/metrics.hpp"

namespace coco::pipeline {

enum class Source { Mf, Tp, Fused };

Source source_from_string(const std::string& s);
std::string to_string(Source s);

/// Corpus + split + feature state shared by the train and recommend
/// stages. `stacked` is the training playlists followed by the test seed
/// playlists (fold-in); feature row i belongs to stacked[i].
struct Stack {
  Corpus corpus;
  EvalSplit split;
  std::vector<Playlist> stacked;
  TitleVocabulary vocab;
  FeatureMatrix playlist_features;
  FeatureMatrix track_features;
};

Stack load_stack(const PipelineConfig& config);

void cmd_split(const PipelineConfig& config);
void cmd_train(const PipelineConfig& config);
void cmd_build_proximity(const PipelineConfig& config);
std::filesystem::path cmd_recommend(const PipelineConfig& config, Source source);

struct EvalOutputs {
  EvalReport report;
  std::filesystem::path text_path;
  std::filesystem::path csv_path;
};

EvalOutputs cmd_evaluate(const PipelineConfig& config,
                         const std::filesystem::path& submission_path);

struct BordaOutputs {
  std::vector<BordaEntry> table;
  std::string text;
};

BordaOutputs cmd_borda(const PipelineConfig& config,
                       const std::vector<std::filesystem::path>& submission_paths);

}  // namespace coco::pipeline
