#include "cveval/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cveval/errors.hpp"

namespace cveval::io {

namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* field,
                           std::size_t line) {
  const auto it = obj.find(field);
  if (it == obj.end())
    throw MissingField("line " + std::to_string(line) +
                       ": missing field '" + field + "'");
  if (!it->is_string())
    throw ParseError(line, std::string("field '") + field +
                               "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<DatasetRecord> parse_dataset(std::istream& in) {
  std::vector<DatasetRecord> records;
  std::set<std::string> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object())
      throw ParseError(line_no, "record is not a JSON object");

    DatasetRecord rec;
    rec.item_id = require_string(obj, "item_id", line_no);
    rec.system_id = require_string(obj, "system_id", line_no);
    rec.output_text = require_string(obj, "output_text", line_no);

    if (const auto it = obj.find("reference_texts"); it != obj.end()) {
      if (!it->is_array())
        throw ParseError(line_no, "reference_texts must be an array");
      for (const auto& r : *it) {
        if (!r.is_string())
          throw ParseError(line_no, "reference_texts entries must be strings");
        rec.reference_texts.push_back(r.get<std::string>());
      }
    }

    if (const auto it = obj.find("judgments"); it != obj.end()) {
      if (!it->is_array())
        throw ParseError(line_no, "judgments must be an array");
      for (const auto& j : *it) {
        if (!j.is_object() || !j.contains("prompt") || !j.contains("value"))
          throw ParseError(line_no, "judgment needs 'prompt' and 'value'");
        Judgment jd;
        jd.prompt = j.at("prompt").get<std::string>();
        if (!j.at("value").is_number())
          throw ParseError(line_no, "judgment value must be a number");
        jd.value = j.at("value").get<double>();
        if (!std::isfinite(jd.value))
          throw ParseError(line_no, "judgment value must be finite");
        rec.judgments.push_back(std::move(jd));
      }
    }

    if (const auto it = obj.find("precomputed_metrics"); it != obj.end()) {
      if (!it->is_object())
        throw ParseError(line_no, "precomputed_metrics must be an object");
      for (const auto& [name, v] : it->items()) {
        if (!v.is_number())
          throw ParseError(line_no, "metric '" + name + "' must be a number");
        rec.precomputed_metrics[name] = v.get<double>();
      }
    }

    if (!keys.insert(rec.key()).second)
      throw DuplicateKey("line " + std::to_string(line_no) +
                         ": duplicate (item_id, system_id) = (" +
                         rec.item_id + ", " + rec.system_id + ")");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingField("cannot open dataset file: " + path);
  return parse_dataset(in);
}

}  // namespace cveval::io
