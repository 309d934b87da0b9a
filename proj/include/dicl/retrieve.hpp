#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dicl/error.hpp"
#include "dicl/vectorize.hpp"

namespace dicl {

/// dot(u,v)/(|u||v|); 0 when either norm is 0. Entries are merged in index
/// order so the summation is deterministic.
inline double cosine(const SparseVector& u, const SparseVector& v) {
  double dot = 0.0;
  auto iu = u.entries.begin();
  auto iv = v.entries.begin();
  while (iu != u.entries.end() && iv != v.entries.end()) {
    if (iu->first < iv->first) {
      ++iu;
    } else if (iv->first < iu->first) {
      ++iv;
    } else {
      dot += iu->second * iv->second;
      ++iu;
      ++iv;
    }
  }
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (nu * nv);
}

inline double cosine(const DenseVector& u, const DenseVector& v) {
  if (u.dim() != v.dim()) {
    throw DataError("cosine: dimension mismatch (" + std::to_string(u.dim()) + " vs " +
                    std::to_string(v.dim()) + ")");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

/// One element of the candidate neighborhood with its query similarity.
struct ScoredCandidate {
  int example_id = 0;
  double score = 0.0;
};

/// The K most query-similar training examples, sorted by
/// (score desc, example_id asc).
struct CandidatePool {
  int query_id = 0;
  std::vector<ScoredCandidate> candidates;

  const ScoredCandidate& top1() const { return candidates.front(); }
};

/// Exact brute-force top-K scan. K larger than the store returns the whole
/// store sorted; ties break toward the smaller example id so the result is
/// independent of store iteration order.
template <class Vec>
CandidatePool top_k_candidates(const Vec& query, const std::map<int, Vec>& store, int K,
                               int query_id = 0) {
  if (K <= 0) throw Error("top_k_candidates: K must be positive");
  if (store.empty()) throw Error("top_k_candidates: empty store");

  CandidatePool pool;
  pool.query_id = query_id;
  pool.candidates.reserve(store.size());
  for (const auto& [id, vec] : store) {
    pool.candidates.push_back({id, cosine(query, vec)});
  }
  std::sort(pool.candidates.begin(), pool.candidates.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.example_id < b.example_id;
            });
  if (static_cast<std::size_t>(K) < pool.candidates.size()) {
    pool.candidates.resize(static_cast<std::size_t>(K));
  }
  return pool;
}

inline CandidatePool top_k_candidates(const SparseVector& query, const VectorStore& store, int K,
                                      int query_id = 0) {
  return top_k_candidates(query, store.sparse, K, query_id);
}

inline CandidatePool top_k_candidates(const DenseVector& query, const VectorStore& store, int K,
                                      int query_id = 0) {
  return top_k_candidates(query, store.dense, K, query_id);
}

}  // namespace dicl
