#include "coco/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "coco/error.hpp"

namespace coco {

using nlohmann::json;

NoSeedSource no_seed_source_from_string(const std::string& s) {
  if (s == "fusion") return NoSeedSource::Fusion;
  if (s == "mf") return NoSeedSource::Mf;
  if (s == "tp") return NoSeedSource::Tp;
  throw Error("no_seed_source must be one of fusion, mf, tp; got '" + s + "'");
}

std::string to_string(NoSeedSource s) {
  switch (s) {
    case NoSeedSource::Fusion: return "fusion";
    case NoSeedSource::Mf: return "mf";
    case NoSeedSource::Tp: return "tp";
  }
  throw Error("unknown no_seed_source value");
}

std::filesystem::path PipelineConfig::train_path() const {
  return std::filesystem::path(output_dir) / "train.jsonl";
}

std::filesystem::path PipelineConfig::test_path() const {
  return std::filesystem::path(output_dir) / "test.jsonl";
}

std::filesystem::path PipelineConfig::model_path() const {
  if (!model_store.empty()) return model_store;
  return std::filesystem::path(output_dir) / "model.bin";
}

std::filesystem::path PipelineConfig::proximity_path() const {
  if (!proximity_store.empty()) return proximity_store;
  return std::filesystem::path(output_dir) / "proximity.bin";
}

std::filesystem::path PipelineConfig::submission_path(const std::string& source) const {
  return std::filesystem::path(output_dir) / ("submission_" + source + ".csv");
}

std::vector<std::filesystem::path> PipelineConfig::corpus_files() const {
  std::vector<std::filesystem::path> files;
  for (const std::string& entry : corpus) {
    const std::filesystem::path p(entry);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> slice_files;
      for (const auto& de : std::filesystem::directory_iterator(p)) {
        if (de.is_regular_file() && de.path().extension() == ".json")
          slice_files.push_back(de.path());
      }
      std::sort(slice_files.begin(), slice_files.end());
      if (slice_files.empty()) throw Error("corpus directory has no .json slices: " + entry);
      files.insert(files.end(), slice_files.begin(), slice_files.end());
    } else if (std::filesystem::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw Error("corpus path does not exist: " + entry);
    }
  }
  if (files.empty()) throw Error("config lists no corpus files");
  return files;
}

void PipelineConfig::validate() const {
  corpus_files();  // existence checks
  if (genre_table.empty()) throw Error("config is missing genre_table");
  if (!std::filesystem::is_regular_file(genre_table))
    throw Error("genre table does not exist: " + genre_table);
  if (per_category < 1) throw Error("per_category must be >= 1");
  if (window < 1) throw Error("window must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");
  if (list_length < 1) throw Error("list_length must be >= 1");
  hp.validate();
  weights.validate();
}

namespace {

template <class T>
T get_field(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("config field '") + key + "' has the wrong type");
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end())
      throw Error(std::string("unknown config key '") + key + "' in " + where);
  }
}

std::string resolve_against(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (base / path).lexically_normal().string();
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("failed to parse config " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error("config must be a JSON object: " + path.string());

  check_keys(doc,
             {"corpus", "genre_table", "output_dir", "model_store", "proximity_store",
              "per_category", "rng_seed", "window", "threads", "list_length", "no_seed_source",
              "artist_credit", "mf", "fusion"},
             "config");

  PipelineConfig config;
  if (auto it = doc.find("corpus"); it != doc.end()) {
    if (it->is_string()) {
      config.corpus.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& entry : *it) config.corpus.push_back(entry.get<std::string>());
    } else {
      throw Error("config field 'corpus' must be a string or array of strings");
    }
  }
  config.genre_table = get_field<std::string>(doc, "genre_table", "");
  config.output_dir = get_field<std::string>(doc, "output_dir", config.output_dir);
  config.model_store = get_field<std::string>(doc, "model_store", "");
  config.proximity_store = get_field<std::string>(doc, "proximity_store", "");
  config.per_category = get_field<int>(doc, "per_category", config.per_category);
  config.rng_seed = get_field<std::uint64_t>(doc, "rng_seed", config.rng_seed);
  config.window = get_field<int>(doc, "window", config.window);
  config.threads = get_field<int>(doc, "threads", config.threads);
  config.list_length = get_field<int>(doc, "list_length", config.list_length);
  config.no_seed_source =
      no_seed_source_from_string(get_field<std::string>(doc, "no_seed_source", "fusion"));
  config.artist_credit = get_field<bool>(doc, "artist_credit", config.artist_credit);

  if (auto it = doc.find("mf"); it != doc.end()) {
    check_keys(*it,
               {"num_factors", "l2_playlist", "l2_track", "epochs", "learning_rate",
                "max_sampled_negatives", "rng_seed", "candidate_list_size", "use_biases"},
               "config block 'mf'");
    config.hp.num_factors = get_field<std::int32_t>(*it, "num_factors", config.hp.num_factors);
    config.hp.l2_playlist = get_field<double>(*it, "l2_playlist", config.hp.l2_playlist);
    config.hp.l2_track = get_field<double>(*it, "l2_track", config.hp.l2_track);
    config.hp.epochs = get_field<std::int32_t>(*it, "epochs", config.hp.epochs);
    config.hp.learning_rate = get_field<double>(*it, "learning_rate", config.hp.learning_rate);
    config.hp.max_sampled_negatives =
        get_field<std::int32_t>(*it, "max_sampled_negatives", config.hp.max_sampled_negatives);
    config.hp.rng_seed = get_field<std::uint64_t>(*it, "rng_seed", config.hp.rng_seed);
    config.hp.candidate_list_size =
        get_field<std::int32_t>(*it, "candidate_list_size", config.hp.candidate_list_size);
    config.hp.use_biases = get_field<bool>(*it, "use_biases", config.hp.use_biases);
  }
  if (auto it = doc.find("fusion"); it != doc.end()) {
    check_keys(*it, {"alpha_mf", "alpha_tp"}, "config block 'fusion'");
    config.weights.alpha_mf = get_field<double>(*it, "alpha_mf", config.weights.alpha_mf);
    config.weights.alpha_tp = get_field<double>(*it, "alpha_tp", config.weights.alpha_tp);
  }

  const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";
  for (std::string& entry : config.corpus) entry = resolve_against(base, entry);
  config.genre_table = resolve_against(base, config.genre_table);
  config.output_dir = resolve_against(base, config.output_dir);
  config.model_store = resolve_against(base, config.model_store);
  config.proximity_store = resolve_against(base, config.proximity_store);

  apply_env_overrides(config);
  return config;
}

namespace {

const char* env_value(const char* name) { return std::getenv(name); }

void override_string(const char* name, std::string& field) {
  if (const char* v = env_value(name)) field = v;
}

void override_int(const char* name, int& field) {
  if (const char* v = env_value(name)) {
    try {
      std::size_t consumed = 0;
      const long parsed = std::stol(v, &consumed);
      if (consumed != std::string(v).size()) throw std::invalid_argument("trailing junk");
      field = static_cast<int>(parsed);
    } catch (const std::exception&) {
      throw Error(std::string(name) + " must be an integer; got '" + v + "'");
    }
  }
}

void override_i32(const char* name, std::int32_t& field) {
  int value = field;
  override_int(name, value);
  field = value;
}

void override_u64(const char* name, std::uint64_t& field) {
  if (const char* v = env_value(name)) {
    try {
      std::size_t consumed = 0;
      field = std::stoull(v, &consumed);
      if (consumed != std::string(v).size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw Error(std::string(name) + " must be a non-negative integer; got '" + v + "'");
    }
  }
}

void override_double(const char* name, double& field) {
  if (const char* v = env_value(name)) {
    try {
      std::size_t consumed = 0;
      field = std::stod(v, &consumed);
      if (consumed != std::string(v).size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw Error(std::string(name) + " must be a number; got '" + v + "'");
    }
  }
}

void override_bool(const char* name, bool& field) {
  if (const char* v = env_value(name)) {
    std::string s(v);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "1" || s == "true" || s == "on" || s == "yes") {
      field = true;
    } else if (s == "0" || s == "false" || s == "off" || s == "no") {
      field = false;
    } else {
      throw Error(std::string(name) + " must be a boolean; got '" + v + "'");
    }
  }
}

}  // namespace

void apply_env_overrides(PipelineConfig& config) {
  override_string("COCO_GENRE_TABLE", config.genre_table);
  override_string("COCO_OUTPUT_DIR", config.output_dir);
  override_string("COCO_MODEL_STORE", config.model_store);
  override_string("COCO_PROXIMITY_STORE", config.proximity_store);
  override_int("COCO_PER_CATEGORY", config.per_category);
  override_u64("COCO_RNG_SEED", config.rng_seed);
  override_int("COCO_WINDOW", config.window);
  override_int("COCO_THREADS", config.threads);
  override_int("COCO_LIST_LENGTH", config.list_length);
  if (const char* v = env_value("COCO_NO_SEED_SOURCE"))
    config.no_seed_source = no_seed_source_from_string(v);
  override_bool("COCO_ARTIST_CREDIT", config.artist_credit);

  override_i32("COCO_NUM_FACTORS", config.hp.num_factors);
  override_double("COCO_L2_PLAYLIST", config.hp.l2_playlist);
  override_double("COCO_L2_TRACK", config.hp.l2_track);
  override_i32("COCO_EPOCHS", config.hp.epochs);
  override_double("COCO_LEARNING_RATE", config.hp.learning_rate);
  override_i32("COCO_MAX_SAMPLED_NEGATIVES", config.hp.max_sampled_negatives);
  override_u64("COCO_MF_RNG_SEED", config.hp.rng_seed);
  override_i32("COCO_CANDIDATE_LIST_SIZE", config.hp.candidate_list_size);
  override_bool("COCO_USE_BIASES", config.hp.use_biases);

  override_double("COCO_ALPHA_MF", config.weights.alpha_mf);
  override_double("COCO_ALPHA_TP", config.weights.alpha_tp);
}

}  // namespace coco
