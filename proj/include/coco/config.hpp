#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coco/fusion.hpp"
#include "coco/mf.hpp"

namespace coco {

/// Declarative pipeline configuration. Loaded from a JSON file; every
/// scalar can be overridden through a COCO_-prefixed environment variable
/// (see apply_env_overrides). Relative paths resolve against the config
/// file's directory.
struct PipelineConfig {
  // paths
  std::vector<std::string> corpus;  // slice files and/or directories of them
  std::string genre_table;
  std::string output_dir = "out";
  std::string model_store;      // default: <output_dir>/model.bin
  std::string proximity_store;  // default: <output_dir>/proximity.bin

  // split
  int per_category = 1;
  std::uint64_t rng_seed = 42;

  // models
  HyperParams hp;
  FusionWeights weights;
  int window = 10;

  // orchestration
  int threads = 1;
  int list_length = 500;
  NoSeedSource no_seed_source = NoSeedSource::Fusion;
  bool artist_credit = false;

  std::filesystem::path train_path() const;
  std::filesystem::path test_path() const;
  std::filesystem::path model_path() const;
  std::filesystem::path proximity_path() const;
  std::filesystem::path submission_path(const std::string& source) const;

  /// Slice file list with directory entries expanded (*.json, sorted).
  std::vector<std::filesystem::path> corpus_files() const;

  void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);

/// Applies COCO_* environment overrides (e.g. COCO_RNG_SEED, COCO_THREADS,
/// COCO_ALPHA_MF, COCO_NO_SEED_SOURCE). Called by load_config.
void apply_env_overrides(PipelineConfig& config);

NoSeedSource no_seed_source_from_string(const std::string& s);
std::string to_string(NoSeedSource s);

}  // namespace coco
