#include "rlvr/bench/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rlvr/error.hpp"

namespace rlvr::bench {
namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  LoadedDataset out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  std::size_t non_blank = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    ++non_blank;
    try {
      const auto j = nlohmann::json::parse(line);
      Problem p = problem_from_json(j);
      if (!seen.insert(p.id).second) {
        out.violations.push_back({lineno, "duplicate id '" + p.id + "'"});
        continue;
      }
      ++out.counts[p.qtype];
      out.problems.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      out.violations.push_back({lineno, std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      out.violations.push_back({lineno, e.what()});
    }
  }
  if (non_blank == 0) throw Error(ErrorCode::EmptyDataset, path.string() + " holds no records");
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<Problem>& problems) {
  std::string out;
  for (const auto& p : problems) {
    out += problem_to_json(p).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<dataset::ReviewRecord> load_reviews(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<dataset::ReviewRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(dataset::review_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaViolation,
                  "line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaViolation,
                  "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rlvr::bench
