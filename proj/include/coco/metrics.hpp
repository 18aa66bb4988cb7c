#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coco/dataset.hpp"
#include "coco/types.hpp"

namespace coco {

/// Fraction of ground-truth tracks retrieved within the first |G|
/// recommendations. With artist_credit, a non-matching recommendation in
/// that prefix whose artist matches a still-uncredited ground-truth track
/// adds 0.25 to the numerator; exact matches are credited first and each
/// ground-truth track is credited at most once. G must be nonempty and
/// duplicate-free, R duplicate-free.
double r_precision(std::span<const TrackIndex> recommended,
                   std::span<const TrackIndex> ground_truth,
                   std::span<const std::int32_t> artist_of, bool artist_credit);

/// Binary-relevance NDCG with 1-based discounts 1/log2(i+1). The ideal DCG
/// sums min(|G|, |R|) terms so a perfect list scores exactly 1.
double ndcg(std::span<const TrackIndex> recommended,
            std::span<const TrackIndex> ground_truth);

/// Number of 10-track pages before the first relevant recommendation:
/// floor((p - 1) / 10) for 1-based first-hit position p, or 51 when no
/// recommendation is relevant.
int clicks(std::span<const TrackIndex> recommended,
           std::span<const TrackIndex> ground_truth);

struct PlaylistEval {
  double rprec = 0.0;
  double ndcg = 0.0;
  int clicks = 51;
};

struct MetricMeans {
  int count = 0;
  double rprec = 0.0;
  double ndcg = 0.0;
  double clicks = 0.0;
};

struct EvalReport {
  std::array<MetricMeans, kNumCategories> per_category{};
  MetricMeans overall{};
  bool artist_credit = false;
  int expected_length = 500;
};

struct SubmissionEntry {
  std::int64_t pid = 0;
  std::vector<TrackIndex> tracks;
};

struct EvalOptions {
  bool artist_credit = false;
  int expected_length = 500;
};

/// Scores one submission against a split: per-playlist metrics over the
/// full recommendation list, averaged per category and overall. Validates
/// first and reports offending pids: every test pid present exactly once,
/// no unknown pids, list length as expected, no duplicate tracks, no seed
/// leakage.
EvalReport evaluate_submission(const std::vector<SubmissionEntry>& submission,
                               const EvalSplit& split, const Catalog& catalog,
                               const EvalOptions& options);

std::string render_report_text(const EvalReport& report);
std::string render_report_csv(const EvalReport& report);

struct BordaEntry {
  std::string system;
  int points = 0;
  int rank = 0;  // ties share the rank of the first tied row
};

/// Borda count over per-metric rankings (each an ordered list of the same
/// system ids, best first). With p systems, position k earns p - k points.
/// Result is sorted by total points descending, ties by system id.
std::vector<BordaEntry> borda(const std::vector<std::vector<std::string>>& rankings);

}  // namespace coco
