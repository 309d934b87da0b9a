// dicl — diversity-based in-context-learning example selection pipeline.
//
// Subcommands: prepare, vectorize, run, sweep, report. Options may come from
// a flat key-value config file (--config); command-line flags win.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dicl/corpus.hpp"
#include "dicl/eval.hpp"
#include "dicl/kv.hpp"
#include "dicl/pipeline.hpp"
#include "dicl/prompt.hpp"
#include "dicl/vectorize.hpp"

namespace {

using dicl::Method;
using dicl::RunConfig;
using dicl::Split;

/// Option resolution: flag > config file > built-in default.
class Resolver {
 public:
  void load(const std::string& config_path) {
    if (!config_path.empty()) file_ = dicl::parse_kv_file(config_path);
  }

  std::string str(const CLI::Option* flag, const std::string& key,
                  const std::string& fallback) const {
    if (flag && flag->count() > 0) return flag->as<std::string>();
    auto it = file_.find(key);
    return it != file_.end() ? it->second : fallback;
  }

  int integer(const CLI::Option* flag, const std::string& key, int fallback) const {
    if (flag && flag->count() > 0) return flag->as<int>();
    auto it = file_.find(key);
    if (it == file_.end()) return fallback;
    try {
      return std::stoi(it->second);
    } catch (const std::exception&) {
      throw dicl::ConfigError("config key \"" + key + "\": bad integer \"" + it->second + "\"");
    }
  }

  std::optional<double> real(const CLI::Option* flag, const std::string& key) const {
    if (flag && flag->count() > 0) return flag->as<double>();
    auto it = file_.find(key);
    if (it == file_.end()) return std::nullopt;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw dicl::ConfigError("config key \"" + key + "\": bad number \"" + it->second + "\"");
    }
  }

  bool flag_or_file(const CLI::Option* flag, const std::string& key, bool fallback) const {
    if (flag && flag->count() > 0) return true;
    auto it = file_.find(key);
    if (it == file_.end()) return fallback;
    return it->second == "true" || it->second == "1" || it->second == "yes";
  }

 private:
  std::map<std::string, std::string> file_;
};

struct CommonFlags {
  CLI::Option* dataset = nullptr;
  CLI::Option* method = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* similarity = nullptr;
  CLI::Option* endpoint = nullptr;
  CLI::Option* model = nullptr;
  CLI::Option* mock = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* split = nullptr;
  CLI::Option* order = nullptr;
  CLI::Option* run_id = nullptr;
  CLI::Option* max_inflight = nullptr;

  std::string dataset_v, method_v, similarity_v, endpoint_v, model_v, out_v, split_v, order_v,
      run_id_v;
  double alpha_v = 0.0;
  int k_v = 0, n_v = 0, max_inflight_v = 0;

  void add(CLI::App* cmd, bool with_method) {
    dataset = cmd->add_option("--dataset", dataset_v, "Dataset manifest path");
    if (with_method) {
      method = cmd->add_option("--method", method_v,
                               "zero_shot | tfidf | sbert | tfidf_mmr | sbert_mmr");
      alpha = cmd->add_option("--alpha", alpha_v, "MMR relevance weight in [0,1]");
      k = cmd->add_option("--k", k_v, "Number of demonstrations (shots)");
      n = cmd->add_option("--n", n_v, "Pool multiplier, K = n*k (default 3)");
      order = cmd->add_option("--order", order_v, "Demo order: selection | reversed");
      split = cmd->add_option("--split", split_v, "Evaluation split (default test)");
      run_id = cmd->add_option("--run-id", run_id_v, "Run directory name (default derived)");
    }
    similarity = cmd->add_option("--similarity", similarity_v,
                                 "lexical | semantic (validated against the method)");
    endpoint = cmd->add_option("--endpoint", endpoint_v, "Completion endpoint base URL");
    model = cmd->add_option("--model", model_v, "Completion model name");
    mock = cmd->add_flag("--mock", "Use the built-in deterministic mock endpoint");
    out = cmd->add_option("--out", out_v, "Output directory (default out)");
    max_inflight = cmd->add_option("--max-inflight", max_inflight_v,
                                   "Concurrent requests bound (default 4)");
  }
};

dicl::SimilarityKind similarity_from_string(const std::string& s) {
  if (s == "lexical") return dicl::SimilarityKind::lexical;
  if (s == "semantic") return dicl::SimilarityKind::semantic;
  throw dicl::ConfigError("unknown similarity: " + s);
}

RunConfig build_run_config(const Resolver& rc, const CommonFlags& f) {
  RunConfig cfg;
  cfg.manifest_path = rc.str(f.dataset, "dataset", "");
  cfg.method = dicl::method_from_name(rc.str(f.method, "method", "zero_shot"));
  if (std::optional<double> alpha = rc.real(f.alpha, "alpha")) cfg.alpha = alpha;
  cfg.k = rc.integer(f.k, "k", 1);
  cfg.n = rc.integer(f.n, "n", 3);
  cfg.order = dicl::demo_order_from_name(rc.str(f.order, "order", "selection"));
  cfg.eval_split = dicl::split_from_name(rc.str(f.split, "split", "test"));
  cfg.mock = rc.flag_or_file(f.mock, "mock", false);
  cfg.out_dir = rc.str(f.out, "out", "out");
  cfg.run_id = rc.str(f.run_id, "run_id", "");
  cfg.max_inflight = rc.integer(f.max_inflight, "max_inflight", 4);

  cfg.endpoint.http.base_url = rc.str(f.endpoint, "endpoint.url", "");
  cfg.endpoint.model_name = rc.str(f.model, "endpoint.model", "");
  cfg.endpoint.max_new_tokens = rc.integer(nullptr, "endpoint.max_new_tokens", 8);
  cfg.endpoint.http.timeout_sec = rc.integer(nullptr, "endpoint.timeout_sec", 30);
  cfg.endpoint.http.max_retries = rc.integer(nullptr, "endpoint.max_retries", 2);
  cfg.endpoint.http.backoff_ms = rc.integer(nullptr, "endpoint.backoff_ms", 200);
  if (const char* key = std::getenv("DICL_API_KEY")) cfg.endpoint.http.api_key = key;

  cfg.embeddings_source = rc.str(nullptr, "embedding.source", "file");
  cfg.embedding_http.base_url = rc.str(nullptr, "embedding.url", "");
  cfg.embedding_http.api_key = cfg.endpoint.http.api_key;
  cfg.embedding_model = rc.str(nullptr, "embedding.model", "");
  for (Split s : {Split::train, Split::validation, Split::test}) {
    std::string key = std::string("embedding.path.") + dicl::split_name(s);
    std::string path = rc.str(nullptr, key, "");
    if (!path.empty()) cfg.embedding_paths[s] = path;
  }

  // --similarity is redundant with the method; reject contradictions.
  std::string similarity = rc.str(f.similarity, "similarity", "");
  if (!similarity.empty() && cfg.method != Method::zero_shot &&
      similarity_from_string(similarity) != dicl::similarity_of(cfg.method)) {
    throw dicl::ConfigError("similarity \"" + similarity + "\" contradicts method " +
                            dicl::method_name(cfg.method));
  }

  if (!cfg.mock && cfg.endpoint.http.base_url.empty()) {
    throw dicl::ConfigError("either --mock or --endpoint is required");
  }
  cfg.validate();
  return cfg;
}

int cmd_prepare(const Resolver& rc, const CommonFlags& f) {
  std::string manifest = rc.str(f.dataset, "dataset", "");
  if (manifest.empty()) throw dicl::ConfigError("--dataset is required");
  dicl::Dataset ds = dicl::load_dataset(manifest);
  dicl::validate_templates(ds);
  std::cout << "dataset " << ds.name << ": " << ds.train.size() << " train / "
            << ds.validation.size() << " validation / " << ds.test.size() << " test, "
            << ds.label_set.size() << " labels, " << ds.field_names.size() << " field(s)\n";
  std::cout << "ok\n";
  return 0;
}

int cmd_vectorize(const Resolver& rc, const CommonFlags& f) {
  std::string manifest = rc.str(f.dataset, "dataset", "");
  if (manifest.empty()) throw dicl::ConfigError("--dataset is required");
  dicl::Dataset ds = dicl::load_dataset(manifest);
  std::string similarity = rc.str(f.similarity, "similarity", "lexical");
  std::string out_dir = rc.str(f.out, "out", "");

  if (similarity_from_string(similarity) == dicl::SimilarityKind::lexical) {
    std::vector<std::string> texts;
    for (const dicl::Example& e : ds.train) texts.push_back(dicl::join_fields(e));
    dicl::TfIdfModel model = dicl::fit_tfidf(texts);
    std::cout << "tfidf: " << model.vocabulary.size() << " terms over " << model.n_docs
              << " training documents\n";
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::string text = "term\tindex\tdf\n";
      for (const auto& [term, index] : model.vocabulary) {
        text += term + "\t" + std::to_string(index) + "\t" + std::to_string(model.df[index]) +
                "\n";
      }
      dicl::detail::write_text_file(std::filesystem::path(out_dir) / "tfidf_vocab.tsv", text);
      std::cout << "wrote " << out_dir << "/tfidf_vocab.tsv\n";
    }
  } else {
    std::filesystem::path dir = std::filesystem::path(manifest).parent_path();
    for (Split s : {Split::train, Split::validation, Split::test}) {
      std::string key = std::string("embedding.path.") + dicl::split_name(s);
      std::string path = rc.str(nullptr, key, "");
      if (path.empty()) {
        path = (dir / (ds.name + "." + std::string(dicl::split_name(s)) + ".emb.tsv")).string();
      }
      dicl::VectorStore store = dicl::load_embeddings(path, ds.split(s));
      std::cout << "embeddings " << dicl::split_name(s) << ": " << store.size()
                << " vectors, dim " << store.dim << "\n";
    }
  }
  std::cout << "ok\n";
  return 0;
}

int cmd_run(const Resolver& rc, const CommonFlags& f) {
  RunConfig cfg = build_run_config(rc, f);
  dicl::Pipeline pipeline(cfg.manifest_path);
  std::filesystem::path run_dir;
  dicl::RunResult result = pipeline.run_and_write(cfg, &run_dir);
  dicl::emit_report(cfg.out_dir);
  std::cout << "run " << run_dir.filename().string() << ": f1 " << dicl::detail::format_double(result.f1, "%.4f")
            << " over " << result.per_instance.size() << " instances (" << result.invalid_count
            << " invalid)\n";
  std::cout << "artifacts: " << run_dir.string() << "\n";
  return 0;
}

int cmd_sweep(const Resolver& rc, const CommonFlags& f, const CLI::Option* methods_flag,
              const std::string& methods_value) {
  RunConfig base = build_run_config(rc, f);
  std::string methods_csv =
      methods_flag->count() > 0 ? methods_value : rc.str(nullptr, "methods", "");
  if (methods_csv.empty()) {
    throw dicl::ConfigError("--methods is required (comma-separated, e.g. tfidf,tfidf_mmr)");
  }
  std::vector<Method> methods;
  for (const std::string& name : dicl::split_list(methods_csv)) {
    methods.push_back(dicl::method_from_name(name));
  }
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

  base.alpha.reset();  // per-point values come from the grid
  dicl::Pipeline pipeline(base.manifest_path);
  dicl::SweepOutcome outcome = dicl::run_sweep(pipeline, base, methods);
  dicl::write_sweep_outputs(base.out_dir, outcome);

  std::size_t points = 0;
  for (const auto& [method, result] : outcome.sweeps) {
    points += result.points.size();
    std::cout << "sweep " << dicl::method_name(method) << ": " << result.points.size()
              << " grid points, best k=" << result.best.k;
    if (result.best.alpha) {
      std::cout << " alpha=" << dicl::detail::format_double(*result.best.alpha, "%.1f");
    }
    std::cout << " (validation f1 " << dicl::detail::format_double(result.best.f1, "%.4f")
              << ")\n";
  }
  std::cout << "total grid points: " << points << "\n";
  std::cout << "wrote " << base.out_dir << "/sweep.csv and sweep_choice.json\n";
  return 0;
}

int cmd_report(const Resolver& rc, const CommonFlags& f) {
  std::string out_dir = rc.str(f.out, "out", "out");
  dicl::emit_report(out_dir);
  for (const char* name : {"report.md", "sweep.csv"}) {
    if (std::filesystem::exists(std::filesystem::path(out_dir) / name)) {
      std::cout << "wrote " << out_dir << "/" << name << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity-based in-context-learning example selection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Flat key-value config file; flags win")
      ->check(CLI::ExistingFile);

  CLI::App* prepare = app.add_subcommand("prepare", "Validate a dataset manifest and splits");
  CLI::App* vectorize =
      app.add_subcommand("vectorize", "Fit tf-idf or validate embedding files");
  CLI::App* run = app.add_subcommand("run", "Run one configuration end to end");
  CLI::App* sweep = app.add_subcommand("sweep", "Grid-search hyper-parameters on validation");
  CLI::App* report = app.add_subcommand("report", "Regenerate report.md and sweep.csv");

  CommonFlags prepare_f, vectorize_f, run_f, sweep_f, report_f;
  prepare_f.add(prepare, false);
  vectorize_f.add(vectorize, false);
  run_f.add(run, true);
  sweep_f.add(sweep, true);
  report_f.add(report, false);

  std::string methods_value;
  CLI::Option* methods_flag =
      sweep->add_option("--methods", methods_value, "Comma-separated methods to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    Resolver rc;
    rc.load(config_path);
    if (prepare->parsed()) return cmd_prepare(rc, prepare_f);
    if (vectorize->parsed()) return cmd_vectorize(rc, vectorize_f);
    if (run->parsed()) return cmd_run(rc, run_f);
    if (sweep->parsed()) return cmd_sweep(rc, sweep_f, methods_flag, methods_value);
    if (report->parsed()) return cmd_report(rc, report_f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
