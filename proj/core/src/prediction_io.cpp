#include "zsl/prediction_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "zsl/error.hpp"

namespace zsl {

using nlohmann::json;

json to_json(const PredictionRecord& r) {
  json j;
  j["instance_id"] = r.instance_id;
  j["dataset"] = r.dataset;
  j["strategy"] = to_string(r.strategy);
  j["model"] = r.model;
  j["label_config"] = r.label_config;
  j["scores"] = r.scores;
  j["predicted"] = r.predicted ? json(*r.predicted) : json(nullptr);
  if (r.raw_output) j["raw_output"] = *r.raw_output;
  if (!r.nli_scores.empty()) {
    json nli = json::object();
    for (const auto& [cls, s] : r.nli_scores) nli[cls] = s;
    j["nli"] = nli;
  }
  j["flags"] = r.flags;
  if (r.error) j["error"] = *r.error;
  return j;
}

PredictionRecord record_from_json(const json& j) {
  PredictionRecord r;
  try {
    r.instance_id = j.at("instance_id").get<std::string>();
    const auto& p = j.at("predicted");
    if (!p.is_null()) r.predicted = p.get<std::string>();
    r.dataset = j.value("dataset", std::string{});
    r.strategy = parse_strategy(j.value("strategy", std::string{"external"}));
    r.model = j.value("model", std::string{});
    r.label_config = j.value("label_config", std::string{});
    if (j.contains("scores")) r.scores = j["scores"].get<std::map<ClassId, double>>();
    if (j.contains("raw_output")) r.raw_output = j["raw_output"].get<std::string>();
    if (j.contains("nli"))
      for (const auto& [cls, s] : j["nli"].items()) r.nli_scores[cls] = s.get<NliScores>();
    if (j.contains("flags")) r.flags = j["flags"].get<std::vector<std::string>>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid prediction record: ") + e.what());
  }
  return r;
}

void write_predictions(std::ostream& out, std::vector<PredictionRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) { return a.instance_id < b.instance_id; });
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_predictions(const std::filesystem::path& path, std::vector<PredictionRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_predictions(out, std::move(records));
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
    if (!seen.insert(out.back().instance_id).second)
      throw DataError("duplicate instance_id '" + out.back().instance_id + "'", line_no);
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions file " + path.string());
  return read_predictions(in);
}

}  // namespace zsl
