#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dicl/artifacts.hpp"
#include "dicl/corpus.hpp"
#include "dicl/embedding_client.hpp"
#include "dicl/error.hpp"
#include "dicl/eval.hpp"
#include "dicl/llm_client.hpp"
#include "dicl/parallel.hpp"
#include "dicl/prompt.hpp"
#include "dicl/rerank.hpp"
#include "dicl/retrieve.hpp"
#include "dicl/vectorize.hpp"

namespace dicl {

/// Fully resolved configuration of one pipeline execution.
struct RunConfig {
  std::string manifest_path;
  Method method = Method::zero_shot;
  int k = 1;
  std::optional<double> alpha;  // present iff method is an MMR variant
  int n = 3;
  DemoOrder order = DemoOrder::selection;
  Split eval_split = Split::test;

  bool mock = false;
  LlmEndpoint endpoint;

  std::string embeddings_source = "file";       // "file" or "endpoint"
  HttpSettings embedding_http;
  std::string embedding_model;
  std::map<Split, std::string> embedding_paths;  // overrides the file convention

  std::string out_dir = "out";
  std::string run_id;  // derived from the config when empty
  int max_inflight = 4;

  // Reserved: the pipeline is deterministic end to end (temperature 0,
  // id tie-breaks), so no randomness consumes this.
  std::optional<long> seed;

  void validate() const {
    if (manifest_path.empty()) throw ConfigError("dataset manifest path is required");
    if (is_mmr(method)) {
      if (!alpha) throw ConfigError("alpha is required for MMR methods");
      if (*alpha < 0.0 || *alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
    } else if (alpha) {
      throw ConfigError("alpha is only valid for MMR methods");
    }
    if (method != Method::zero_shot && k < 1) throw ConfigError("k must be >= 1");
    if (n < 1) throw ConfigError("n must be >= 1");
    if (max_inflight < 1) throw ConfigError("max_inflight must be >= 1");
    if (embeddings_source != "file" && embeddings_source != "endpoint") {
      throw ConfigError("embeddings source must be \"file\" or \"endpoint\"");
    }
  }

  int pool_size() const { return is_mmr(method) ? n * k : k; }

  std::string derived_run_id(const std::string& dataset_name) const {
    std::string id = dataset_name + "_" + method_name(method);
    if (method != Method::zero_shot) id += "_k" + std::to_string(k);
    if (alpha) id += "_a" + detail::format_double(*alpha, "%g");
    id += "_";
    id += split_name(eval_split);
    return id;
  }

  /// Resolved config echo for the audit trail. The API key is redacted.
  std::map<std::string, std::string> resolved(const std::string& dataset_name) const {
    std::map<std::string, std::string> kv;
    kv["dataset"] = manifest_path;
    kv["dataset.name"] = dataset_name;
    kv["method"] = method_name(method);
    if (method != Method::zero_shot) {
      kv["similarity"] =
          similarity_of(method) == SimilarityKind::lexical ? "lexical" : "semantic";
      kv["k"] = std::to_string(k);
      kv["n"] = std::to_string(n);
      kv["pool_size"] = std::to_string(pool_size());
    }
    if (alpha) kv["alpha"] = detail::format_double(*alpha, "%g");
    kv["order"] = order == DemoOrder::selection ? "selection" : "reversed";
    kv["split"] = split_name(eval_split);
    kv["mock"] = mock ? "true" : "false";
    if (!mock) {
      kv["endpoint.url"] = endpoint.http.base_url;
      kv["endpoint.model"] = endpoint.model_name;
      kv["endpoint.max_new_tokens"] = std::to_string(endpoint.max_new_tokens);
      kv["endpoint.max_retries"] = std::to_string(endpoint.http.max_retries);
      kv["endpoint.api_key"] = endpoint.http.api_key.empty() ? "unset" : "set";
    }
    kv["max_inflight"] = std::to_string(max_inflight);
    kv["seed"] = "unused (deterministic pipeline)";
    return kv;
  }
};

/// Loads a dataset once and runs any number of configurations against it,
/// caching fitted models and vector stores across runs (a sweep evaluates
/// dozens of grid points on the same data).
class Pipeline {
 public:
  explicit Pipeline(const std::string& manifest_path)
      : manifest_dir_(std::filesystem::path(manifest_path).parent_path()),
        ds_(load_dataset(manifest_path)) {
    validate_templates(ds_);
  }

  const Dataset& dataset() const { return ds_; }

  RunResult run(const RunConfig& cfg) {
    cfg.validate();
    const std::vector<Example>& eval_split = ds_.split(cfg.eval_split);
    PromptTemplate tpl = PromptTemplate::from_dataset(ds_);

    RunResult out;
    out.dataset = ds_.name;
    out.split = cfg.eval_split;
    out.method = cfg.method;
    out.k = cfg.method == Method::zero_shot ? 0 : cfg.k;
    out.alpha = cfg.alpha;
    out.n = cfg.n;

    std::size_t count = eval_split.size();
    out.per_instance.resize(count);
    out.prompts.resize(count);
    std::vector<std::string> generations(count);

    if (cfg.method == Method::zero_shot) {
      parallel_for(count, cfg.max_inflight, [&](std::size_t i) {
        const Example& query = eval_split[i];
        try {
          Prompt prompt = build_prompt(tpl, ds_, {}, query, cfg.order);
          std::string generation =
              cfg.mock ? ds_.verbalizer.at(ds_.label_set.front()) : complete(cfg.endpoint, prompt.text);
          out.prompts[i] = std::move(prompt);
          generations[i] = std::move(generation);
        } catch (const std::exception& e) {
          throw Error("query " + std::to_string(query.id) + ": " + e.what());
        }
      });
    } else {
      SimilarityKind kind = similarity_of(cfg.method);
      const VectorStore& train_store = store_for(cfg, kind, Split::train);
      const VectorStore& query_store = store_for(cfg, kind, cfg.eval_split);
      int pool_k = cfg.pool_size();
      if (static_cast<std::size_t>(pool_k) > ds_.train.size()) {
        std::cerr << "warning: K=" << pool_k << " exceeds train split size " << ds_.train.size()
                  << "; clamping\n";
      }

      out.pools.resize(count);
      if (is_mmr(cfg.method)) out.selections.resize(count);

      parallel_for(count, cfg.max_inflight, [&](std::size_t i) {
        const Example& query = eval_split[i];
        try {
          CandidatePool pool = kind == SimilarityKind::lexical
                                   ? top_k_candidates(query_store.sparse.at(query.id),
                                                      train_store, pool_k, query.id)
                                   : top_k_candidates(query_store.dense.at(query.id),
                                                      train_store, pool_k, query.id);

          std::vector<int> demo_ids;
          if (is_mmr(cfg.method)) {
            SelectionConfig sel_cfg;
            sel_cfg.alpha = *cfg.alpha;
            sel_cfg.k = cfg.k;
            sel_cfg.n = cfg.n;
            sel_cfg.similarity = kind;
            SelectedContext sel =
                kind == SimilarityKind::lexical
                    ? mmr_select(
                          pool,
                          [&](int a, int b) {
                            return cosine(train_store.sparse.at(a), train_store.sparse.at(b));
                          },
                          sel_cfg)
                    : mmr_select(
                          pool,
                          [&](int a, int b) {
                            return cosine(train_store.dense.at(a), train_store.dense.at(b));
                          },
                          sel_cfg);
            demo_ids = sel.ids();
            out.selections[i] = std::move(sel);
          } else {
            for (const ScoredCandidate& c : pool.candidates) demo_ids.push_back(c.example_id);
          }

          std::vector<const Example*> demos;
          demos.reserve(demo_ids.size());
          for (int id : demo_ids) demos.push_back(&train_example(id));

          Prompt prompt = build_prompt(tpl, ds_, demos, query, cfg.order);
          std::string generation =
              cfg.mock ? ds_.verbalizer.at(train_example(pool.top1().example_id).label)
                       : complete(cfg.endpoint, prompt.text);
          out.pools[i] = std::move(pool);
          out.prompts[i] = std::move(prompt);
          generations[i] = std::move(generation);
        } catch (const std::exception& e) {
          throw Error("query " + std::to_string(query.id) + ": " + e.what());
        }
      });
    }

    for (std::size_t i = 0; i < count; ++i) {
      PredictionRecord rec;
      rec.query_id = eval_split[i].id;
      rec.raw_generation = std::move(generations[i]);
      rec.parsed_label = parse_label(rec.raw_generation, ds_.label_set, ds_.verbalizer);
      rec.gold_label = eval_split[i].label;
      rec.correct = rec.parsed_label && *rec.parsed_label == rec.gold_label;
      if (!rec.parsed_label) ++out.invalid_count;
      out.per_instance[i] = std::move(rec);
    }
    out.f1 = macro_f1(out.per_instance, ds_.label_set);
    return out;
  }

  /// Runs and writes the audit artifacts; returns the run directory.
  RunResult run_and_write(const RunConfig& cfg, std::filesystem::path* dir_out = nullptr) {
    RunResult result = run(cfg);
    std::string run_id = cfg.run_id.empty() ? cfg.derived_run_id(ds_.name) : cfg.run_id;
    std::filesystem::path dir =
        write_run_artifacts(cfg.out_dir, run_id, cfg.resolved(ds_.name), result);
    if (dir_out) *dir_out = dir;
    return result;
  }

 private:
  const Example& train_example(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= ds_.train.size()) {
      throw Error("train example id out of range: " + std::to_string(id));
    }
    return ds_.train[static_cast<std::size_t>(id)];
  }

  const VectorStore& store_for(const RunConfig& cfg, SimilarityKind kind, Split split) {
    auto key = std::make_pair(static_cast<int>(kind), static_cast<int>(split));
    auto it = stores_.find(key);
    if (it != stores_.end()) return it->second;

    VectorStore store;
    if (kind == SimilarityKind::lexical) {
      if (!tfidf_) {
        std::vector<std::string> texts;
        texts.reserve(ds_.train.size());
        for (const Example& e : ds_.train) texts.push_back(join_fields(e));
        tfidf_ = fit_tfidf(texts);
      }
      store = sparse_store(*tfidf_, ds_.split(split));
    } else if (cfg.embeddings_source == "file") {
      store = load_embeddings(embedding_path(cfg, split).string(), ds_.split(split));
    } else {
      store = fetch_embeddings(cfg, ds_.split(split));
    }
    return stores_.emplace(key, std::move(store)).first->second;
  }

  std::filesystem::path embedding_path(const RunConfig& cfg, Split split) const {
    auto it = cfg.embedding_paths.find(split);
    if (it != cfg.embedding_paths.end()) return it->second;
    return manifest_dir_ / (ds_.name + "." + std::string(split_name(split)) + ".emb.tsv");
  }

  VectorStore fetch_embeddings(const RunConfig& cfg, const std::vector<Example>& split) {
    if (!embed_client_) {
      embed_client_.emplace(cfg.embedding_http, cfg.embedding_model);
    }
    std::vector<DenseVector> vectors(split.size());
    parallel_for(split.size(), cfg.max_inflight,
                 [&](std::size_t i) { vectors[i] = embed_client_->fetch(join_fields(split[i])); });
    VectorStore store;
    store.kind = VectorStore::Kind::dense;
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (store.dim == 0) store.dim = vectors[i].dim();
      store.dense.emplace(split[i].id, std::move(vectors[i]));
    }
    return store;
  }

  std::filesystem::path manifest_dir_;
  Dataset ds_;
  std::optional<TfIdfModel> tfidf_;
  std::map<std::pair<int, int>, VectorStore> stores_;
  std::optional<EmbeddingClient> embed_client_;
};

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

struct SweepOutcome {
  std::vector<std::pair<Method, GridSearchResult>> sweeps;
};

/// Grid-searches each method on the validation split, writing per-point run
/// artifacts. MMR methods enumerate alpha x k; baselines enumerate k only.
inline SweepOutcome run_sweep(Pipeline& pipeline, const RunConfig& base,
                              const std::vector<Method>& methods,
                              const std::vector<int>& k_grid = default_k_grid(),
                              const std::vector<double>& alpha_grid = default_alpha_grid()) {
  SweepOutcome outcome;
  for (Method method : methods) {
    if (method == Method::zero_shot) {
      throw ConfigError("sweep: zero_shot has no hyper-parameters to search");
    }
    GridSearchResult result =
        grid_search(method, k_grid, alpha_grid, [&](int k, std::optional<double> alpha) {
          RunConfig cfg = base;
          cfg.method = method;
          cfg.k = k;
          cfg.alpha = alpha;
          cfg.eval_split = Split::validation;
          cfg.run_id = "";  // derived: <name>_<method>_k<k>[_a<alpha>]_validation
          return pipeline.run_and_write(cfg).f1;
        });
    outcome.sweeps.emplace_back(method, result);
  }
  return outcome;
}

/// Writes sweep.csv plus the chosen configuration per method.
inline void write_sweep_outputs(const std::filesystem::path& out_dir, const SweepOutcome& outcome) {
  std::filesystem::create_directories(out_dir);
  detail::write_text_file(out_dir / "sweep.csv", render_sweep_csv(outcome.sweeps));
  nlohmann::json chosen;
  for (const auto& [method, result] : outcome.sweeps) {
    nlohmann::json entry;
    entry["k"] = result.best.k;
    if (result.best.alpha) {
      entry["alpha"] = *result.best.alpha;
    } else {
      entry["alpha"] = nullptr;
    }
    entry["f1"] = result.best.f1;
    chosen[method_name(method)] = std::move(entry);
  }
  detail::write_text_file(out_dir / "sweep_choice.json", chosen.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Report aggregation
// ---------------------------------------------------------------------------

/// Scans out_dir/runs/*/result.json and regenerates report.md (test-split
/// table) and sweep.csv (validation grid points). When several test results
/// exist for one method, the grid tie-break (higher F1, smaller k, larger
/// alpha) picks the reported row.
inline void emit_report(const std::filesystem::path& out_dir) {
  std::filesystem::path runs_dir = out_dir / "runs";
  if (!std::filesystem::is_directory(runs_dir)) {
    throw Error("no runs directory under " + out_dir.string());
  }
  std::vector<std::filesystem::path> result_files;
  for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
    std::filesystem::path result_json = entry.path() / "result.json";
    if (std::filesystem::is_regular_file(result_json)) result_files.push_back(result_json);
  }
  std::sort(result_files.begin(), result_files.end());
  if (result_files.empty()) throw Error("no run results under " + runs_dir.string());

  std::vector<MethodResult> test_results;
  std::vector<MethodResult> validation_results;
  for (const auto& path : result_files) {
    MethodResult r = load_method_result(path);
    (r.split == "test" ? test_results : validation_results).push_back(std::move(r));
  }

  if (!test_results.empty()) {
    std::vector<MethodResult> table;
    for (Method m : {Method::zero_shot, Method::tfidf, Method::tfidf_mmr, Method::sbert,
                     Method::sbert_mmr}) {
      const MethodResult* best = nullptr;
      for (const MethodResult& r : test_results) {
        if (r.method != m) continue;
        if (!best || grid_point_better({r.k, r.alpha, r.f1}, {best->k, best->alpha, best->f1})) {
          best = &r;
        }
      }
      if (best) table.push_back(*best);
    }
    detail::write_text_file(out_dir / "report.md", render_report_md(table));
  }

  if (!validation_results.empty()) {
    std::vector<std::pair<Method, GridSearchResult>> sweeps;
    for (Method m : {Method::tfidf, Method::sbert, Method::tfidf_mmr, Method::sbert_mmr}) {
      GridSearchResult grid;
      for (const MethodResult& r : validation_results) {
        if (r.method == m) grid.points.push_back({r.k, r.alpha, r.f1});
      }
      if (grid.points.empty()) continue;
      std::sort(grid.points.begin(), grid.points.end(), [](const GridPoint& a, const GridPoint& b) {
        if (a.k != b.k) return a.k < b.k;
        return a.alpha.value_or(-1.0) < b.alpha.value_or(-1.0);
      });
      grid.best = grid.points.front();
      for (const GridPoint& p : grid.points) {
        if (grid_point_better(p, grid.best)) grid.best = p;
      }
      sweeps.emplace_back(m, grid);
    }
    detail::write_text_file(out_dir / "sweep.csv", render_sweep_csv(sweeps));
  }
}

}  // namespace dicl
