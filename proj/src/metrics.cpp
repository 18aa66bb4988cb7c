#include "coco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "coco/error.hpp"

namespace coco {

double r_precision(std::span<const TrackIndex> recommended,
                   std::span<const TrackIndex> ground_truth,
                   std::span<const std::int32_t> artist_of, bool artist_credit) {
  if (ground_truth.empty()) throw Error("r_precision requires nonempty ground truth");
  const std::size_t prefix = std::min(recommended.size(), ground_truth.size());

  std::unordered_set<TrackIndex> truth(ground_truth.begin(), ground_truth.end());
  double numerator = 0.0;
  std::unordered_set<TrackIndex> credited;
  for (std::size_t i = 0; i < prefix; ++i) {
    if (truth.count(recommended[i])) {
      numerator += 1.0;
      credited.insert(recommended[i]);
    }
  }
  if (artist_credit) {
    // exact matches are already settled; a leftover prefix track can credit
    // one still-uncredited truth track by artist
    for (std::size_t i = 0; i < prefix; ++i) {
      const TrackIndex r = recommended[i];
      if (truth.count(r)) continue;
      const std::int32_t artist = artist_of[static_cast<std::size_t>(r)];
      for (TrackIndex g : ground_truth) {
        if (credited.count(g)) continue;
        if (artist_of[static_cast<std::size_t>(g)] == artist) {
          numerator += 0.25;
          credited.insert(g);
          break;
        }
      }
    }
  }
  return numerator / static_cast<double>(ground_truth.size());
}

double ndcg(std::span<const TrackIndex> recommended, std::span<const TrackIndex> ground_truth) {
  if (ground_truth.empty()) throw Error("ndcg requires nonempty ground truth");
  if (recommended.empty()) return 0.0;

  std::unordered_set<TrackIndex> truth(ground_truth.begin(), ground_truth.end());
  double dcg = 0.0;
  for (std::size_t i = 0; i < recommended.size(); ++i) {
    if (truth.count(recommended[i]))
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const std::size_t ideal_hits = std::min(truth.size(), recommended.size());
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal_hits; ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  if (idcg == 0.0) return 0.0;
  return dcg / idcg;
}

int clicks(std::span<const TrackIndex> recommended, std::span<const TrackIndex> ground_truth) {
  if (ground_truth.empty()) throw Error("clicks requires nonempty ground truth");
  std::unordered_set<TrackIndex> truth(ground_truth.begin(), ground_truth.end());
  for (std::size_t i = 0; i < recommended.size(); ++i) {
    if (truth.count(recommended[i])) return static_cast<int>(i / 10);
  }
  return 51;
}

namespace {

std::string join_pids(const std::vector<std::int64_t>& pids) {
  std::string out;
  for (std::size_t i = 0; i < pids.size() && i < 20; ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(pids[i]);
  }
  if (pids.size() > 20) out += ", ...";
  return out;
}

}  // namespace

EvalReport evaluate_submission(const std::vector<SubmissionEntry>& submission,
                               const EvalSplit& split, const Catalog& catalog,
                               const EvalOptions& options) {
  std::unordered_map<std::int64_t, const SubmissionEntry*> by_pid;
  std::vector<std::int64_t> duplicate_pids;
  for (const SubmissionEntry& entry : submission) {
    if (!by_pid.emplace(entry.pid, &entry).second) duplicate_pids.push_back(entry.pid);
  }
  if (!duplicate_pids.empty())
    throw Error("submission repeats pids: " + join_pids(duplicate_pids));

  std::unordered_set<std::int64_t> test_pids;
  for (const TestPlaylist& tp : split.test) test_pids.insert(tp.seeds.pid);
  std::vector<std::int64_t> unknown_pids;
  for (const SubmissionEntry& entry : submission) {
    if (!test_pids.count(entry.pid)) unknown_pids.push_back(entry.pid);
  }
  if (!unknown_pids.empty())
    throw Error("submission contains pids outside the test split: " + join_pids(unknown_pids));

  std::vector<std::int64_t> missing_pids, short_pids, duplicate_track_pids, leaked_pids;
  for (const TestPlaylist& tp : split.test) {
    auto it = by_pid.find(tp.seeds.pid);
    if (it == by_pid.end()) {
      missing_pids.push_back(tp.seeds.pid);
      continue;
    }
    const std::vector<TrackIndex>& tracks = it->second->tracks;
    if (tracks.size() != static_cast<std::size_t>(options.expected_length))
      short_pids.push_back(tp.seeds.pid);
    std::unordered_set<TrackIndex> seen;
    bool duplicate = false;
    for (TrackIndex t : tracks)
      if (!seen.insert(t).second) duplicate = true;
    if (duplicate) duplicate_track_pids.push_back(tp.seeds.pid);
    const std::vector<TrackIndex> seeds = seed_track_set(tp.seeds);
    bool leaked = false;
    for (TrackIndex t : tracks)
      if (std::binary_search(seeds.begin(), seeds.end(), t)) leaked = true;
    if (leaked) leaked_pids.push_back(tp.seeds.pid);
  }
  if (!missing_pids.empty())
    throw Error("submission is missing test pids: " + join_pids(missing_pids));
  if (!short_pids.empty())
    throw Error("submission lists with length != " + std::to_string(options.expected_length) +
                " for pids: " + join_pids(short_pids));
  if (!duplicate_track_pids.empty())
    throw Error("submission lists with duplicate tracks for pids: " +
                join_pids(duplicate_track_pids));
  if (!leaked_pids.empty())
    throw Error("submission lists containing seed tracks for pids: " + join_pids(leaked_pids));

  EvalReport report;
  report.artist_credit = options.artist_credit;
  report.expected_length = options.expected_length;
  const std::vector<std::int32_t>& artists = catalog.artist_ids();

  std::array<double, kNumCategories> sum_rprec{}, sum_ndcg{}, sum_clicks{};
  std::array<int, kNumCategories> counts{};
  for (const TestPlaylist& tp : split.test) {
    const SubmissionEntry& entry = *by_pid.at(tp.seeds.pid);
    const auto c = static_cast<std::size_t>(tp.category);
    sum_rprec[c] += r_precision(entry.tracks, tp.ground_truth, artists, options.artist_credit);
    sum_ndcg[c] += ndcg(entry.tracks, tp.ground_truth);
    sum_clicks[c] += static_cast<double>(clicks(entry.tracks, tp.ground_truth));
    ++counts[c];
  }

  double total_rprec = 0.0, total_ndcg = 0.0, total_clicks = 0.0;
  int total_count = 0;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    report.per_category[c].count = counts[c];
    if (counts[c] > 0) {
      report.per_category[c].rprec = sum_rprec[c] / counts[c];
      report.per_category[c].ndcg = sum_ndcg[c] / counts[c];
      report.per_category[c].clicks = sum_clicks[c] / counts[c];
    }
    total_rprec += sum_rprec[c];
    total_ndcg += sum_ndcg[c];
    total_clicks += sum_clicks[c];
    total_count += counts[c];
  }
  report.overall.count = total_count;
  if (total_count > 0) {
    report.overall.rprec = total_rprec / total_count;
    report.overall.ndcg = total_ndcg / total_count;
    report.overall.clicks = total_clicks / total_count;
  }
  return report;
}

std::string render_report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "Evaluation over lists of " << report.expected_length << " tracks";
  if (report.artist_credit) out << ", r-precision with 0.25 artist credit";
  out << "\n(ndcg ideal list capped at min(|truth|, |list|))\n\n";
  out << std::left << std::setw(34) << "category" << std::right << std::setw(10) << "playlists"
      << std::setw(13) << "r-precision" << std::setw(10) << "ndcg" << std::setw(10) << "clicks"
      << '\n';
  out << std::string(77, '-') << '\n';
  out << std::fixed << std::setprecision(4);
  auto row = [&](const char* label, const MetricMeans& m) {
    out << std::left << std::setw(34) << label << std::right << std::setw(10) << m.count
        << std::setw(13) << m.rprec << std::setw(10) << m.ndcg << std::setw(10) << m.clicks
        << '\n';
  };
  for (ChallengeCategory c : report_category_order())
    row(category_info(c).label, report.per_category[static_cast<std::size_t>(c)]);
  out << std::string(77, '-') << '\n';
  row("All playlists combined", report.overall);
  return out.str();
}

std::string render_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "category,playlists,r_precision,ndcg,clicks\n";
  out << std::setprecision(12);
  auto row = [&](const char* id, const MetricMeans& m) {
    out << id << ',' << m.count << ',' << m.rprec << ',' << m.ndcg << ',' << m.clicks << '\n';
  };
  for (ChallengeCategory c : report_category_order())
    row(category_info(c).id, report.per_category[static_cast<std::size_t>(c)]);
  row("all", report.overall);
  return out.str();
}

std::vector<BordaEntry> borda(const std::vector<std::vector<std::string>>& rankings) {
  if (rankings.empty()) throw Error("borda requires at least one ranking");
  std::set<std::string> reference(rankings[0].begin(), rankings[0].end());
  if (reference.size() != rankings[0].size())
    throw Error("borda ranking contains a repeated system id");
  for (const auto& ranking : rankings) {
    std::set<std::string> ids(ranking.begin(), ranking.end());
    if (ids.size() != ranking.size())
      throw Error("borda ranking contains a repeated system id");
    if (ids != reference) throw Error("borda rankings do not list the same systems");
  }

  const int p = static_cast<int>(reference.size());
  std::map<std::string, int> points;
  for (const auto& ranking : rankings) {
    for (std::size_t position = 0; position < ranking.size(); ++position)
      points[ranking[position]] += p - static_cast<int>(position);
  }

  std::vector<BordaEntry> out;
  out.reserve(points.size());
  for (const auto& [system, total] : points) out.push_back(BordaEntry{system, total, 0});
  std::sort(out.begin(), out.end(), [](const BordaEntry& a, const BordaEntry& b) {
    if (a.points != b.points) return a.points > b.points;
    return a.system < b.system;
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0 && out[i].points == out[i - 1].points)
      out[i].rank = out[i - 1].rank;
    else
      out[i].rank = static_cast<int>(i) + 1;
  }
  return out;
}

}  // namespace coco
