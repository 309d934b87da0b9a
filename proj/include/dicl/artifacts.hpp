#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicl/error.hpp"
#include "dicl/eval.hpp"
#include "dicl/prompt.hpp"
#include "dicl/rerank.hpp"
#include "dicl/retrieve.hpp"

namespace dicl {

/// Everything one pipeline execution produced, ordered by query id.
struct RunResult {
  std::string dataset;
  Split split = Split::test;
  Method method = Method::zero_shot;
  int k = 0;
  std::optional<double> alpha;
  int n = 3;
  double f1 = 0.0;
  int invalid_count = 0;
  std::vector<PredictionRecord> per_instance;

  // Audit trail. pools is empty for zero-shot, selections for non-MMR runs.
  std::vector<CandidatePool> pools;
  std::vector<SelectedContext> selections;
  std::vector<Prompt> prompts;

  MethodResult to_method_result() const {
    MethodResult r;
    r.method = method;
    r.k = k;
    r.alpha = alpha;
    r.f1 = f1;
    r.dataset = dataset;
    r.split = split_name(split);
    r.correct.reserve(per_instance.size());
    for (const PredictionRecord& p : per_instance) r.correct.push_back(p.correct ? 1.0 : 0.0);
    return r;
  }
};

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace detail

/// Writes the complete audit trail of a run into out_dir/runs/<run_id>/:
/// resolved config, pools, selections, prompts, raw generations, parsed
/// predictions, and the result summary. Byte-deterministic for identical
/// inputs.
inline std::filesystem::path write_run_artifacts(const std::filesystem::path& out_dir,
                                                 const std::string& run_id,
                                                 const std::map<std::string, std::string>& config,
                                                 const RunResult& run) {
  std::filesystem::path dir = out_dir / "runs" / run_id;
  std::filesystem::create_directories(dir);

  {
    std::string text;
    for (const auto& [key, value] : config) text += key + " = " + escape_value(value) + "\n";
    detail::write_text_file(dir / "config.txt", text);
  }
  if (!run.pools.empty()) {
    std::string text;
    for (const CandidatePool& pool : run.pools) {
      nlohmann::json row;
      row["query_id"] = pool.query_id;
      nlohmann::json cands = nlohmann::json::array();
      for (const ScoredCandidate& c : pool.candidates) {
        cands.push_back({{"id", c.example_id}, {"score", c.score}});
      }
      row["candidates"] = std::move(cands);
      text += row.dump() + "\n";
    }
    detail::write_text_file(dir / "pools.jsonl", text);
  }
  if (!run.selections.empty()) {
    std::string text;
    for (const SelectedContext& sel : run.selections) {
      nlohmann::json row;
      row["query_id"] = sel.query_id;
      row["alpha"] = run.alpha.value_or(0.0);
      row["k"] = run.k;
      nlohmann::json steps = nlohmann::json::array();
      for (const auto& [id, score] : sel.selected) {
        steps.push_back({{"id", id}, {"mmr_score", score}});
      }
      row["selected"] = std::move(steps);
      text += row.dump() + "\n";
    }
    detail::write_text_file(dir / "selections.jsonl", text);
  }
  {
    std::string prompts_text;
    std::string generations_text;
    std::string predictions_text;
    for (std::size_t i = 0; i < run.per_instance.size(); ++i) {
      const PredictionRecord& rec = run.per_instance[i];
      if (i < run.prompts.size()) {
        const Prompt& p = run.prompts[i];
        nlohmann::json row;
        row["query_id"] = rec.query_id;
        row["k_effective"] = p.k_effective;
        row["demo_ids"] = p.demo_ids;
        row["text"] = p.text;
        prompts_text += row.dump() + "\n";
      }
      {
        nlohmann::json row;
        row["query_id"] = rec.query_id;
        row["raw"] = rec.raw_generation;
        generations_text += row.dump() + "\n";
      }
      {
        nlohmann::json row;
        row["query_id"] = rec.query_id;
        row["raw"] = rec.raw_generation;
        if (rec.parsed_label) {
          row["parsed"] = *rec.parsed_label;
        } else {
          row["parsed"] = nullptr;
        }
        row["gold"] = rec.gold_label;
        row["correct"] = rec.correct;
        predictions_text += row.dump() + "\n";
      }
    }
    detail::write_text_file(dir / "prompts.jsonl", prompts_text);
    detail::write_text_file(dir / "generations.jsonl", generations_text);
    detail::write_text_file(dir / "predictions.jsonl", predictions_text);
  }
  {
    nlohmann::json summary;
    summary["dataset"] = run.dataset;
    summary["split"] = split_name(run.split);
    summary["method"] = method_name(run.method);
    summary["k"] = run.k;
    if (run.alpha) {
      summary["alpha"] = *run.alpha;
    } else {
      summary["alpha"] = nullptr;
    }
    summary["n"] = run.n;
    summary["f1"] = run.f1;
    summary["instances"] = run.per_instance.size();
    summary["invalid"] = run.invalid_count;
    nlohmann::json correct = nlohmann::json::array();
    for (const PredictionRecord& rec : run.per_instance) correct.push_back(rec.correct ? 1 : 0);
    summary["correct"] = std::move(correct);
    detail::write_text_file(dir / "result.json", summary.dump(2) + "\n");
  }
  return dir;
}

/// Reads one result.json back as a MethodResult (for `report`).
inline MethodResult load_method_result(const std::filesystem::path& result_json) {
  std::ifstream in(result_json);
  if (!in) throw Error("cannot open " + result_json.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("malformed JSON: " + result_json.string());

  MethodResult r;
  r.method = method_from_name(j.at("method").get<std::string>());
  r.k = j.at("k").get<int>();
  if (j.contains("alpha") && !j.at("alpha").is_null()) r.alpha = j.at("alpha").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.dataset = j.at("dataset").get<std::string>();
  r.split = j.at("split").get<std::string>();
  for (const auto& c : j.at("correct")) r.correct.push_back(c.get<double>());
  return r;
}

}  // namespace dicl
