#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cveval::io {

struct Judgment {
  std::string prompt;
  double value;
};

// One system output. `judgments` may be empty (metric-only records are the
// common case); `precomputed_metrics` lets a dataset ship externally scored
// metrics alongside the built-in ones.
struct DatasetRecord {
  std::string item_id;
  std::string system_id;
  std::string output_text;
  std::vector<std::string> reference_texts;
  std::vector<Judgment> judgments;
  std::map<std::string, double> precomputed_metrics;

  std::string key() const { return item_id + '\x1f' + system_id; }
};

// Line-delimited JSON, one record per line; blank lines are skipped.
// item_id, system_id and output_text are required; (item_id, system_id)
// pairs must be unique; judgment values must be finite.
std::vector<DatasetRecord> load_dataset(const std::string& path);
std::vector<DatasetRecord> parse_dataset(std::istream& in);

}  // namespace cveval::io
