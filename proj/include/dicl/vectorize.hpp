#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dicl/corpus.hpp"
#include "dicl/error.hpp"
#include "dicl/text.hpp"

namespace dicl {

/// L2-normalized tf-idf vector. Entries are sorted by term index and all
/// stored weights are strictly positive; the all-zero vector is empty.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }

  double norm() const {
    double sum = 0.0;
    for (const auto& [idx, w] : entries) sum += w * w;
    return std::sqrt(sum);
  }
};

struct DenseVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

/// Vocabulary + document frequencies fitted on the training split only.
/// Indices are dense 0..|V|-1, assigned in lexicographic term order.
struct TfIdfModel {
  std::map<std::string, std::uint32_t> vocabulary;
  std::vector<std::uint32_t> df;
  std::uint32_t n_docs = 0;

  double idf(std::uint32_t index) const {
    return std::log((1.0 + n_docs) / (1.0 + df[index])) + 1.0;
  }
};

inline TfIdfModel fit_tfidf(const std::vector<std::string>& train_texts) {
  if (train_texts.empty()) throw DataError("fit_tfidf: no training documents");

  std::vector<std::set<std::string>> doc_terms;
  doc_terms.reserve(train_texts.size());
  for (const auto& text : train_texts) {
    std::vector<std::string> tokens = tokenize(text);
    doc_terms.emplace_back(tokens.begin(), tokens.end());
  }

  TfIdfModel model;
  model.n_docs = static_cast<std::uint32_t>(train_texts.size());
  for (const auto& terms : doc_terms) {
    for (const auto& t : terms) model.vocabulary.emplace(t, 0);
  }
  if (model.vocabulary.empty()) {
    throw DataError("fit_tfidf: all documents are empty (empty vocabulary)");
  }
  std::uint32_t next = 0;
  for (auto& [term, index] : model.vocabulary) index = next++;

  model.df.assign(model.vocabulary.size(), 0);
  for (const auto& terms : doc_terms) {
    for (const auto& t : terms) ++model.df[model.vocabulary.at(t)];
  }
  return model;
}

/// weight(t) = tf(t) * (ln((1+N)/(1+df(t))) + 1), L2-normalized.
/// Out-of-vocabulary terms are ignored; all-OOV text yields the empty vector.
inline SparseVector tfidf_vector(const TfIdfModel& model, std::string_view text) {
  std::map<std::uint32_t, std::uint32_t> tf;
  for (const auto& token : tokenize(text)) {
    auto it = model.vocabulary.find(token);
    if (it != model.vocabulary.end()) ++tf[it->second];
  }

  SparseVector vec;
  vec.entries.reserve(tf.size());
  double sum_sq = 0.0;
  for (const auto& [index, count] : tf) {
    double w = static_cast<double>(count) * model.idf(index);
    vec.entries.emplace_back(index, w);
    sum_sq += w * w;
  }
  if (vec.entries.empty()) return vec;
  double norm = std::sqrt(sum_sq);
  for (auto& [index, w] : vec.entries) w /= norm;
  return vec;
}

/// Immutable per-split vector store; exactly one representation populated.
struct VectorStore {
  enum class Kind { sparse, dense };

  Kind kind = Kind::sparse;
  std::size_t dim = 0;  // dense only
  std::map<int, SparseVector> sparse;
  std::map<int, DenseVector> dense;

  std::size_t size() const {
    return kind == Kind::sparse ? sparse.size() : dense.size();
  }
};

/// Builds the sparse store for a split by flattening each example with
/// kFieldSeparator and vectorizing against the fitted model.
inline VectorStore sparse_store(const TfIdfModel& model, const std::vector<Example>& split) {
  VectorStore store;
  store.kind = VectorStore::Kind::sparse;
  for (const Example& e : split) {
    store.sparse.emplace(e.id, tfidf_vector(model, join_fields(e)));
  }
  return store;
}

/// Reads precomputed embeddings, one row per example: `id<TAB>v1,v2,...,vd`.
/// Every id of `split` must appear exactly once; rows must agree on the
/// dimension and contain only finite values.
inline VectorStore load_embeddings(const std::string& path, const std::vector<Example>& split) {
  std::ifstream in(path);
  if (!in) throw DataError("missing embedding file: " + path);

  std::set<int> expected;
  for (const Example& e : split) expected.insert(e.id);

  VectorStore store;
  store.kind = VectorStore::Kind::dense;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected id<TAB>values");
    int id = 0;
    try {
      id = std::stoi(line.substr(0, tab));
    } catch (const std::exception&) {
      throw DataError(where + ": bad id \"" + line.substr(0, tab) + "\"");
    }
    if (!expected.count(id)) {
      throw DataError(where + ": id " + std::to_string(id) + " not in split");
    }
    if (store.dense.count(id)) {
      throw DataError(where + ": duplicate id " + std::to_string(id));
    }
    DenseVector vec;
    std::string values = line.substr(tab + 1);
    std::size_t pos = 0;
    while (pos <= values.size()) {
      std::size_t comma = values.find(',', pos);
      std::string cell = values.substr(pos, comma == std::string::npos ? std::string::npos
                                                                       : comma - pos);
      char* end = nullptr;
      std::string trimmed = trim(cell);
      double v = std::strtod(trimmed.c_str(), &end);
      if (trimmed.empty() || end != trimmed.c_str() + trimmed.size()) {
        throw DataError(where + ": bad value \"" + trimmed + "\"");
      }
      if (!std::isfinite(v)) {
        throw DataError(where + ": non-finite value \"" + trimmed + "\"");
      }
      vec.values.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (store.dim == 0) {
      store.dim = vec.dim();
    } else if (vec.dim() != store.dim) {
      throw DataError(where + ": dimension mismatch (got " + std::to_string(vec.dim()) +
                      ", store has " + std::to_string(store.dim) + ")");
    }
    if (vec.empty()) throw DataError(where + ": empty vector");
    store.dense.emplace(id, std::move(vec));
  }
  for (int id : expected) {
    if (!store.dense.count(id)) {
      throw DataError(path + ": missing embedding for id " + std::to_string(id));
    }
  }
  if (store.dense.empty()) throw DataError(path + ": no rows");
  return store;
}

}  // namespace dicl
