#include "zsl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>
#include <set>

#include "zsl/csv.hpp"
#include "zsl/error.hpp"
#include "zsl/hash.hpp"

namespace zsl {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::map<ClassId, std::vector<std::string>> word_map_from_json(const json& j) {
  std::map<ClassId, std::vector<std::string>> out;
  for (const auto& [k, v] : j.items()) out[canonical_token(k)] = v.get<std::vector<std::string>>();
  return out;
}

// Row source shared by the JSONL and CSV readers.
struct RawRow {
  std::size_t row;
  std::string id;
  std::string text;
  std::optional<std::string> gold;
  std::optional<std::string> emotion;
};

std::vector<RawRow> read_jsonl(std::string_view bytes) {
  std::vector<RawRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto nl = bytes.find('\n', pos);
    auto line = bytes.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? bytes.size() : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw DataError("row is not a JSON object", line_no);
    auto str_field = [&](const char* key) -> std::optional<std::string> {
      auto it = j.find(key);
      if (it == j.end()) return std::nullopt;
      if (!it->is_string()) throw DataError(std::string("field '") + key + "' is not a string", line_no);
      return it->get<std::string>();
    };
    auto id = str_field("id");
    auto text = str_field("text");
    if (!id || !text) throw DataError("row missing 'id' or 'text'", line_no);
    rows.push_back({line_no, *id, *text, str_field("gold"), str_field("emotion")});
  }
  return rows;
}

std::vector<RawRow> read_csv(std::string_view bytes) {
  auto records = csv::parse(bytes);
  std::vector<RawRow> rows;
  if (records.empty()) return rows;
  const auto& header = records.front();
  std::vector<std::string> cols;
  for (const auto& h : header) cols.push_back(canonical_token(h));
  bool emotion = false;
  if (cols == std::vector<std::string>{"id", "text", "emotion"}) {
    emotion = true;
  } else if (cols != std::vector<std::string>{"id", "text", "gold"}) {
    throw DataError("CSV header must be id,text,gold or id,text,emotion", 1);
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != 3) throw DataError("expected 3 fields, got " + std::to_string(rec.size()), r + 1);
    RawRow row{r + 1, rec[0], rec[1], std::nullopt, std::nullopt};
    (emotion ? row.emotion : row.gold) = rec[2];
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_instance_text(const RawRow& row, std::set<std::string>& seen) {
  if (trim(row.id).empty()) throw DataError("empty id", row.row);
  if (!seen.insert(row.id).second) throw DataError("duplicate id '" + row.id + "'", row.row);
  if (trim(row.text).empty()) throw DataError("empty text for id '" + row.id + "'", row.row);
}

void fill_counts(Dataset& ds) {
  ds.counts.clear();
  for (const auto& c : ds.profile.classes) ds.counts[c] = 0;
  for (const auto& inst : ds.instances) ++ds.counts[inst.gold];
}

}  // namespace

bool DatasetProfile::has_class(const ClassId& c) const {
  return std::find(classes.begin(), classes.end(), c) != classes.end();
}

std::size_t DatasetProfile::class_index(const ClassId& c) const {
  auto it = std::find(classes.begin(), classes.end(), c);
  if (it == classes.end()) throw PreconditionError("class '" + c + "' not in profile '" + name + "'");
  return static_cast<std::size_t>(it - classes.begin());
}

std::string canonical_token(std::string_view token) {
  std::string out(trim(token));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

DatasetProfile profile_from_json(const json& j) {
  DatasetProfile p;
  try {
    p.name = j.at("name").get<std::string>();
    for (const auto& c : j.at("classes")) p.classes.push_back(canonical_token(c.get<std::string>()));
    p.instance_noun = j.at("instance_noun").get<std::string>();
    if (j.contains("article")) p.article = j["article"].get<std::string>();
    if (j.contains("emotion_map")) {
      for (const auto& [emotion, cls] : j["emotion_map"].items())
        p.emotion_map[canonical_token(emotion)] = canonical_token(cls.get<std::string>());
    }
    if (j.contains("labels")) {
      const auto& l = j["labels"];
      if (l.contains("emotion_words")) p.words.emotion_words = word_map_from_json(l["emotion_words"]);
      if (l.contains("llm_words")) p.words.llm_words = word_map_from_json(l["llm_words"]);
      if (l.contains("overrides")) {
        for (const auto& [cfg, per_class] : l["overrides"].items())
          for (const auto& [cls, text] : per_class.items())
            p.label_overrides[cfg][canonical_token(cls)] = text.get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid profile: ") + e.what());
  }

  if (p.name.empty()) throw ConfigError("profile name is empty");
  if (p.instance_noun.empty()) throw ConfigError("profile '" + p.name + "' has no instance_noun");
  if (p.classes.size() < 2 || p.classes.size() > 3)
    throw ConfigError("profile '" + p.name + "' must declare 2 or 3 classes");
  std::set<ClassId> uniq(p.classes.begin(), p.classes.end());
  if (uniq.size() != p.classes.size()) throw ConfigError("profile '" + p.name + "' repeats a class");
  for (const auto& [emotion, cls] : p.emotion_map) {
    if (!uniq.count(cls))
      throw ConfigError("emotion '" + emotion + "' maps to unknown class '" + cls + "'");
  }
  return p;
}

json profile_to_json(const DatasetProfile& p) {
  json j;
  j["name"] = p.name;
  j["classes"] = p.classes;
  j["instance_noun"] = p.instance_noun;
  if (p.article) j["article"] = *p.article;
  if (!p.emotion_map.empty()) j["emotion_map"] = p.emotion_map;
  json labels = json::object();
  if (!p.words.emotion_words.empty()) labels["emotion_words"] = p.words.emotion_words;
  if (!p.words.llm_words.empty()) labels["llm_words"] = p.words.llm_words;
  if (!p.label_overrides.empty()) labels["overrides"] = p.label_overrides;
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

DatasetProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile " + path.string());
  try {
    return profile_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("profile " + path.string() + ": " + e.what());
  }
}

Dataset parse_dataset(std::string_view bytes, std::string_view format, const DatasetProfile& profile) {
  std::vector<RawRow> rows;
  if (format == "jsonl") {
    rows = read_jsonl(bytes);
  } else if (format == "csv") {
    rows = read_csv(bytes);
  } else {
    throw DataError("unsupported dataset format '" + std::string(format) + "'");
  }
  if (rows.empty()) throw DataError("empty dataset");

  const bool emotion = rows.front().emotion.has_value();
  std::set<std::string> seen;
  for (const auto& row : rows) {
    check_instance_text(row, seen);
    if (row.emotion.has_value() != emotion || row.gold.has_value() == emotion)
      throw DataError("row must carry exactly one of 'gold' or 'emotion', consistently", row.row);
  }

  if (emotion) {
    std::vector<EmotionRow> raw;
    raw.reserve(rows.size());
    for (auto& row : rows) raw.push_back({row.id, row.text, *row.emotion});
    return map_emotions(raw, profile);
  }

  Dataset ds;
  ds.profile = profile;
  ds.instances.reserve(rows.size());
  for (auto& row : rows) {
    auto gold = canonical_token(*row.gold);
    if (!profile.has_class(gold))
      throw DataError("unknown class '" + *row.gold + "' for id '" + row.id + "'", row.row);
    ds.instances.push_back({row.id, row.text, gold});
  }
  fill_counts(ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetProfile& profile) {
  auto ext = canonical_token(path.extension().string());
  std::string format;
  if (ext == ".jsonl") {
    format = "jsonl";
  } else if (ext == ".csv") {
    format = "csv";
  } else {
    throw DataError("unrecognised dataset extension '" + ext + "' for " + path.string());
  }
  return parse_dataset(read_file(path), format, profile);
}

Dataset map_emotions(std::span<const EmotionRow> raw, const DatasetProfile& profile) {
  if (profile.emotion_map.empty())
    throw PreconditionError("profile '" + profile.name + "' has no emotion_map");
  Dataset ds;
  ds.profile = profile;
  for (const auto& row : raw) {
    auto it = profile.emotion_map.find(canonical_token(row.emotion));
    if (it == profile.emotion_map.end()) {
      ++ds.dropped;
      continue;
    }
    ds.instances.push_back({row.id, row.text, it->second});
  }
  fill_counts(ds);
  return ds;
}

json split_to_json(const SplitAssignment& split) {
  return json{{"seed", split.seed}, {"train", split.train}, {"validation", split.validation}, {"test", split.test}};
}

SplitAssignment split_from_json(const json& j) {
  SplitAssignment s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid split file: ") + e.what());
  }
  return s;
}

void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    // Unbiased draw in [0, i) by rejection.
    const std::uint64_t range = i;
    const std::uint64_t threshold = (0 - range) % range;
    std::uint64_t x;
    do {
      x = rng();
    } while (x < threshold);
    std::swap(items[i - 1], items[x % range]);
  }
}

std::array<std::size_t, 3> allocate_class(std::size_t n, SplitRatios ratios) {
  const std::array<std::size_t, 3> r{ratios.train, ratios.validation, ratios.test};
  const std::size_t total = r[0] + r[1] + r[2];
  if (r[0] == 0 || r[1] == 0 || r[2] == 0) throw PreconditionError("split ratios must all be positive");
  if (n < 3) throw DataError("class with " + std::to_string(n) + " instance(s) cannot populate three splits");

  std::array<std::size_t, 3> alloc{};
  std::array<std::size_t, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    alloc[i] = n * r[i] / total;
    rem[i] = n * r[i] % total;
    assigned += alloc[i];
  }
  // Largest remainder; on equal remainders prefer test, then validation.
  std::array<std::size_t, 3> order{2, 1, 0};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++alloc[order[k]];

  for (std::size_t i = 0; i < 3; ++i) {
    if (alloc[i] != 0) continue;
    auto donor = static_cast<std::size_t>(std::max_element(alloc.begin(), alloc.end()) - alloc.begin());
    --alloc[donor];
    ++alloc[i];
  }
  return alloc;
}

SplitAssignment stratified_split(const Dataset& dataset, std::uint64_t seed, SplitRatios ratios) {
  SplitAssignment out;
  out.seed = seed;
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) by_class[dataset.instances[i].gold].push_back(i);

  for (const auto& cls : dataset.profile.classes) {
    auto it = by_class.find(cls);
    if (it == by_class.end()) continue;
    auto& idx = it->second;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return dataset.instances[a].id < dataset.instances[b].id;
    });
    std::array<std::size_t, 3> alloc;
    try {
      alloc = allocate_class(idx.size(), ratios);
    } catch (const DataError& e) {
      throw DataError("class '" + cls + "': " + e.what());
    }
    seeded_shuffle(idx, splitmix64(seed ^ fnv1a64(cls)));
    std::size_t k = 0;
    for (; k < alloc[0]; ++k) out.train.push_back(dataset.instances[idx[k]].id);
    for (; k < alloc[0] + alloc[1]; ++k) out.validation.push_back(dataset.instances[idx[k]].id);
    for (; k < idx.size(); ++k) out.test.push_back(dataset.instances[idx[k]].id);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace zsl
