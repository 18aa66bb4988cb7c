#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coco/metrics.hpp"
#include "coco/types.hpp"

namespace coco {

/// Submission file contents, URIs unresolved. Format: optional header line
/// `team_info, <name>, <track>, <email>`, then one line per playlist
/// `pid, uri_1, ..., uri_k`. Lines starting with `#` are ignored.
struct Submission {
  std::optional<std::string> team_info;
  std::vector<std::pair<std::int64_t, std::vector<std::string>>> entries;
};

void write_submission(const std::filesystem::path& path, const Submission& submission);
Submission read_submission(const std::filesystem::path& path);

/// Maps submission URIs to catalog indices; unknown URIs are an error
/// naming the pid.
std::vector<SubmissionEntry> resolve_submission(const Submission& submission,
                                                const Catalog& catalog);

}  // namespace coco
