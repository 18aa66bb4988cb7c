#include "coco/submission.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "coco/error.hpp"

namespace coco {

void write_submission(const std::filesystem::path& path, const Submission& submission) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write submission file: " + path.string());
  if (submission.team_info) out << "team_info, " << *submission.team_info << '\n';
  for (const auto& [pid, uris] : submission.entries) {
    out << pid;
    for (const std::string& uri : uris) out << ", " << uri;
    out << '\n';
  }
  if (!out) throw Error("write failed for submission file: " + path.string());
}

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

Submission read_submission(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open submission file: " + path.string());

  Submission submission;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));

    if (fields[0] == "team_info") {
      if (!submission.entries.empty() || submission.team_info)
        throw Error(path.string() + " line " + std::to_string(line_no) +
                    ": team_info must be the single first data line");
      std::string rest;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (i > 1) rest += ", ";
        rest += fields[i];
      }
      submission.team_info = rest;
      continue;
    }

    std::int64_t pid = 0;
    try {
      std::size_t consumed = 0;
      pid = std::stoll(fields[0], &consumed);
      if (consumed != fields[0].size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw Error(path.string() + " line " + std::to_string(line_no) + ": bad pid '" +
                  fields[0] + "'");
    }
    std::vector<std::string> uris(fields.begin() + 1, fields.end());
    if (uris.empty())
      throw Error(path.string() + " line " + std::to_string(line_no) + ": pid " +
                  std::to_string(pid) + " has no tracks");
    submission.entries.emplace_back(pid, std::move(uris));
  }
  return submission;
}

std::vector<SubmissionEntry> resolve_submission(const Submission& submission,
                                                const Catalog& catalog) {
  std::vector<SubmissionEntry> out;
  out.reserve(submission.entries.size());
  for (const auto& [pid, uris] : submission.entries) {
    SubmissionEntry entry;
    entry.pid = pid;
    entry.tracks.reserve(uris.size());
    for (const std::string& uri : uris) {
      const auto idx = catalog.find(uri);
      if (!idx)
        throw Error("submission pid " + std::to_string(pid) + " references unknown track uri " +
                    uri);
      entry.tracks.push_back(*idx);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace coco
