#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dicl/error.hpp"
#include "dicl/retrieve.hpp"

namespace dicl {

enum class SimilarityKind { lexical, semantic };

/// Hyper-parameters of the greedy diversity reranker.
struct SelectionConfig {
  double alpha = 0.5;  // relevance weight in [0,1]; 1 degenerates to plain ICL
  int k = 1;           // shots to select
  int n = 3;           // pool multiplier, K = n*k
  SimilarityKind similarity = SimilarityKind::lexical;

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (n < 1) throw ConfigError("n must be >= 1");
  }
};

/// score = alpha*query_sim - (1-alpha)*max_selected_sim. With nothing
/// selected yet the penalty term is 0, so the score is alpha*query_sim.
inline double mmr_score(double query_sim, std::optional<double> max_selected_sim, double alpha) {
  return alpha * query_sim - (1.0 - alpha) * max_selected_sim.value_or(0.0);
}

/// The reranked context: ids in selection order with the score each one had
/// at its selection step.
struct SelectedContext {
  int query_id = 0;
  std::vector<std::pair<int, double>> selected;  // (example_id, mmr score at step)

  std::vector<int> ids() const {
    std::vector<int> out;
    out.reserve(selected.size());
    for (const auto& [id, score] : selected) out.push_back(id);
    return out;
  }
};

/// Greedy MMR over the candidate pool: min(k, |pool|) steps, each picking the
/// remaining candidate with the highest score; ties break toward the smaller
/// example id. `pairwise(a, b)` is the candidate-candidate similarity in the
/// same representation as the pool scores; it is evaluated at most |pool|*k
/// times (the running max to the selected set is updated incrementally).
template <class PairwiseFn>
SelectedContext mmr_select(const CandidatePool& pool, PairwiseFn&& pairwise,
                           const SelectionConfig& config) {
  config.validate();
  if (pool.candidates.empty()) throw Error("mmr_select: empty pool");

  struct Entry {
    int id;
    double query_sim;
    double max_selected_sim;
    bool has_selected_sim;
  };
  std::vector<Entry> remaining;
  remaining.reserve(pool.candidates.size());
  for (const ScoredCandidate& c : pool.candidates) {
    remaining.push_back({c.example_id, c.score, 0.0, false});
  }

  SelectedContext out;
  out.query_id = pool.query_id;
  std::size_t steps = std::min<std::size_t>(static_cast<std::size_t>(config.k), remaining.size());
  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const Entry& e = remaining[i];
      double score = mmr_score(e.query_sim,
                               e.has_selected_sim ? std::optional<double>(e.max_selected_sim)
                                                  : std::nullopt,
                               config.alpha);
      if (score > best_score ||
          (score == best_score && e.id < remaining[best].id)) {
        best = i;
        best_score = score;
      }
    }
    Entry chosen = remaining[best];
    out.selected.emplace_back(chosen.id, best_score);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    for (Entry& e : remaining) {
      double sim = pairwise(e.id, chosen.id);
      if (!e.has_selected_sim || sim > e.max_selected_sim) {
        e.max_selected_sim = sim;
        e.has_selected_sim = true;
      }
    }
  }
  return out;
}

}  // namespace dicl
