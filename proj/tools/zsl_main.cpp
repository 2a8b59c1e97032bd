// zsl: command-line front end for the sentiment benchmark harness.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <zsl/corpus.hpp>
#include <zsl/csv.hpp>
#include <zsl/error.hpp>
#include <zsl/error_analysis.hpp>
#include <zsl/harness.hpp>
#include <zsl/metrics.hpp>
#include <zsl/prediction_io.hpp>
#include <zsl/stats.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DatasetArgs {
  std::string profile;
  std::string data;
  std::string scope = "full";
  std::uint64_t seed = 42;
  std::string split_file;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& a) {
  cmd->add_option("--profile", a.profile, "dataset profile JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--data", a.data, "dataset file (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--scope", a.scope, "full or test")->check(CLI::IsMember({"full", "test"}));
  cmd->add_option("--seed", a.seed, "split seed when scope is test");
  cmd->add_option("--split", a.split_file, "precomputed split JSON (overrides --seed)")->check(CLI::ExistingFile);
}

std::vector<std::size_t> evaluated_for(const zsl::Dataset& ds, const DatasetArgs& a) {
  auto scope = zsl::parse_scope(a.scope);
  if (scope == zsl::EvaluationScope::full || a.split_file.empty()) return zsl::evaluated_indices(ds, scope, a.seed);
  std::ifstream in(a.split_file);
  auto split = zsl::split_from_json(json::parse(in));
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < ds.instances.size(); ++i) pos[ds.instances[i].id] = i;
  std::vector<std::size_t> out;
  for (const auto& id : split.test) {
    auto it = pos.find(id);
    if (it == pos.end()) throw zsl::DataError("split names unknown id " + id);
    out.push_back(it->second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw zsl::Error("cannot write " + path);
  out << text;
}

std::string run_key_for(const fs::path& p) {
  // cells/<key>/predictions.jsonl -> <key>
  if (p.filename() == "predictions.jsonl" && p.has_parent_path()) return p.parent_path().filename().string();
  return p.stem().string();
}

std::vector<zsl::Treatment> treatments_from_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw zsl::DataError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto rows = zsl::csv::parse(ss.str());
  if (rows.empty()) throw zsl::DataError("empty CSV " + path);
  std::vector<zsl::Treatment> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < 2) throw zsl::DataError("expected treatment,value", r + 1);
    double v = 0;
    try {
      v = std::stod(rows[r][1]);
    } catch (const std::exception&) {
      throw zsl::DataError("not a number: " + rows[r][1], r + 1);
    }
    auto [it, fresh] = index.emplace(rows[r][0], out.size());
    if (fresh) out.push_back({rows[r][0], {}});
    out[it->second].samples.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot sentiment classification benchmark"};
  app.require_subcommand(1);

  // validate
  std::string plan_path;
  auto* validate = app.add_subcommand("validate", "check a plan without running it");
  validate->add_option("plan", plan_path)->required()->check(CLI::ExistingFile);

  // run
  std::string run_plan, out_override, cache_override;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "run the experiment matrix");
  run->add_option("plan", run_plan)->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", out_override);
  run->add_option("--cache-dir", cache_override);
  run->add_option("--workers", workers);

  // eval
  DatasetArgs eval_ds;
  std::string eval_preds, eval_out;
  auto* eval = app.add_subcommand("eval", "score a predictions file (e.g. from an external model)");
  add_dataset_options(eval, eval_ds);
  eval->add_option("--predictions", eval_preds)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "write evaluation JSON here (default stdout)");

  // rank
  std::string rank_dir, rank_csv, rank_out, metric = "macro_f1", split_test = "kruskal-wallis";
  double alpha = 0.05, threshold = 0.2;
  auto* rank = app.add_subcommand("rank", "Scott-Knott ESD ranking of treatments");
  auto* rank_src = rank->add_option("results_dir", rank_dir, "run output directory with results.json");
  rank->add_option("--csv", rank_csv, "long-format CSV: treatment,value")->excludes(rank_src);
  rank->add_option("--metric", metric)->check(CLI::IsMember({"macro_f1", "micro_f1"}));
  rank->add_option("--alpha", alpha);
  rank->add_option("--effect-threshold", threshold);
  rank->add_option("--split-test", split_test)->check(CLI::IsMember({"kruskal-wallis", "effect-size"}));
  rank->add_option("--out", rank_out, "directory for rank.json and rank.csv (default: print JSON)");

  // errors
  auto* errors = app.add_subcommand("errors", "misclassification analysis");
  errors->require_subcommand(1);
  DatasetArgs int_ds, exp_ds;
  std::vector<std::string> int_preds, exp_preds;
  std::string int_out, exp_out, imp_file, imp_out;
  auto* intersect = errors->add_subcommand("intersect", "ids misclassified by every run");
  add_dataset_options(intersect, int_ds);
  intersect->add_option("--predictions", int_preds)->required()->check(CLI::ExistingFile);
  intersect->add_option("--out", int_out);
  auto* exportc = errors->add_subcommand("export", "annotation worksheet for common errors");
  add_dataset_options(exportc, exp_ds);
  exportc->add_option("--predictions", exp_preds)->required()->check(CLI::ExistingFile);
  exportc->add_option("--out", exp_out);
  auto* importc = errors->add_subcommand("import", "tally categories in a filled worksheet");
  importc->add_option("worksheet", imp_file)->required()->check(CLI::ExistingFile);
  importc->add_option("--out", imp_out);

  // split
  std::string split_profile, split_data, split_out;
  std::uint64_t split_seed = 42;
  auto* split = app.add_subcommand("split", "stratified 80/10/10 split");
  split->add_option("--profile", split_profile)->required()->check(CLI::ExistingFile);
  split->add_option("--data", split_data)->required()->check(CLI::ExistingFile);
  split->add_option("--seed", split_seed);
  split->add_option("--out", split_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      auto plan = zsl::load_plan(plan_path);
      auto resolved = zsl::resolve_plan(plan);
      std::size_t cells = resolved.datasets.size() * plan.strategies.size() * plan.label_configs.size();
      json j{{"ok", true},
             {"datasets", resolved.datasets.size()},
             {"strategies", plan.strategies.size()},
             {"label_configs", plan.label_configs.size()},
             {"cells", cells}};
      std::cout << j.dump(2) << "\n";
    } else if (*run) {
      auto plan = zsl::load_plan(run_plan);
      if (!out_override.empty()) plan.output_dir = fs::absolute(out_override);
      if (!cache_override.empty()) plan.cache_dir = fs::absolute(cache_override);
      if (workers > 0) plan.workers = workers;
      auto s = zsl::run_matrix(plan);
      json j{{"cells", s.cells},
             {"failed_cells", s.failed_cells},
             {"digest", s.digest},
             {"cache_hits", s.cache.hits},
             {"cache_misses", s.cache.misses},
             {"network_calls", s.network_calls},
             {"output_dir", s.output_dir.string()}};
      std::cout << j.dump(2) << "\n";
      if (s.failed_cells > 0) return 3;
    } else if (*eval) {
      auto ds = zsl::load_dataset(eval_ds.data, zsl::load_profile(eval_ds.profile));
      auto records = zsl::read_predictions(fs::path(eval_preds));
      auto r = zsl::evaluate_predictions(ds, evaluated_for(ds, eval_ds), records);
      write_text(eval_out, zsl::to_json(r).dump(2) + "\n");
    } else if (*rank) {
      if (rank_dir.empty() && rank_csv.empty()) throw zsl::ConfigError("rank needs a results dir or --csv");
      auto treatments = rank_csv.empty() ? zsl::treatments_from_results(rank_dir, metric) : treatments_from_csv(rank_csv);
      zsl::ScottKnottOptions opt;
      opt.alpha = alpha;
      opt.effect_threshold = threshold;
      opt.test = split_test == "effect-size" ? zsl::SplitTest::effect_size_only : zsl::SplitTest::kruskal_wallis;
      auto groups = zsl::scott_knott_esd(treatments, opt);
      auto j = zsl::to_json(groups);
      if (rank_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        fs::create_directories(rank_out);
        write_text((fs::path(rank_out) / "rank.json").string(), j.dump(2) + "\n");
        std::ostringstream csv;
        std::vector<std::string> head{"rank", "treatment", "mean", "median"};
        zsl::csv::write_row(csv, head);
        char buf[32];
        for (const auto& g : groups)
          for (const auto& m : g.members) {
            std::vector<std::string> row{std::to_string(g.rank), m.name};
            std::snprintf(buf, sizeof buf, "%.4f", m.mean);
            row.emplace_back(buf);
            std::snprintf(buf, sizeof buf, "%.4f", m.median);
            row.emplace_back(buf);
            zsl::csv::write_row(csv, row);
          }
        write_text((fs::path(rank_out) / "rank.csv").string(), csv.str());
      }
    } else if (*errors) {
      if (*intersect || *exportc) {
        auto& a = *intersect ? int_ds : exp_ds;
        auto& files = *intersect ? int_preds : exp_preds;
        auto ds = zsl::load_dataset(a.data, zsl::load_profile(a.profile));
        auto evaluated = evaluated_for(ds, a);
        std::vector<zsl::MisclassificationSet> sets;
        std::vector<zsl::NamedPredictions> runs;
        for (const auto& f : files) {
          zsl::NamedPredictions np{run_key_for(f), zsl::read_predictions(fs::path(f))};
          sets.push_back(zsl::misclassifications(np.run_key, a.scope, ds, evaluated, np.records));
          runs.push_back(std::move(np));
        }
        auto common = zsl::intersect_misclassifications(sets);
        if (*intersect) {
          json per_run = json::object();
          for (const auto& s : sets) per_run[s.run_key] = s.ids.size();
          json j{{"dataset", ds.profile.name},
                 {"scope", a.scope},
                 {"evaluated", evaluated.size()},
                 {"misclassified", per_run},
                 {"common", common},
                 {"common_count", common.size()}};
          write_text(int_out, j.dump(2) + "\n");
        } else {
          if (common.empty()) throw zsl::PreconditionError("no common misclassifications to export");
          std::ostringstream out;
          zsl::export_error_candidates(out, common, ds, runs);
          write_text(exp_out, out.str());
        }
      } else {
        std::ifstream in(imp_file, std::ios::binary);
        auto t = zsl::import_error_annotations(in);
        for (const auto& w : t.warnings) std::cerr << "warning: " << w << "\n";
        json pct = json::object();
        char buf[32];
        for (const auto& [k, v] : t.percentages) {
          std::snprintf(buf, sizeof buf, "%.2f", v);
          pct[k] = buf;
        }
        json j{{"counts", t.counts},
               {"percentages", pct},
               {"annotated", t.annotated},
               {"unannotated", t.unannotated},
               {"closed", t.closed}};
        write_text(imp_out, j.dump(2) + "\n");
      }
    } else if (*split) {
      auto ds = zsl::load_dataset(split_data, zsl::load_profile(split_profile));
      auto s = zsl::stratified_split(ds, split_seed);
      write_text(split_out, zsl::split_to_json(s).dump(2) + "\n");
    }
  } catch (const zsl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const zsl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
