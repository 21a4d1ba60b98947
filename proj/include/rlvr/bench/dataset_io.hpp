#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rlvr/dataset_tools.hpp"
#include "rlvr/problem.hpp"

namespace rlvr::bench {

struct LineViolation {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadedDataset {
  std::vector<Problem> problems;
  std::vector<LineViolation> violations;
  std::map<QType, std::size_t> counts;
};

/// Reads benchmark JSONL. Bad lines (including duplicate ids) are collected,
/// not fatal. Throws Error{IoFailure} when the file cannot be read and
/// Error{EmptyDataset} when it holds no non-blank line.
LoadedDataset load_dataset(const std::filesystem::path& path);

void write_dataset(const std::filesystem::path& path, const std::vector<Problem>& problems);

/// Throws Error{SchemaViolation} naming the first bad line.
std::vector<dataset::ReviewRecord> load_reviews(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace rlvr::bench
