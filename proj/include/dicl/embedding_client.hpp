#pragma once

#include <mutex>
#include <string>
#include <unordered_map>

#include "dicl/error.hpp"
#include "dicl/http.hpp"
#include "dicl/vectorize.hpp"

namespace dicl {

/// Client for an HTTP embedding service speaking the JSON protocol
/// POST {model, input: [text...]} -> {data: [{index, embedding: [...]}]}.
/// Responses are cached per exact text; concurrent fetches of the same text
/// may both hit the network, the second insert is a no-op (idempotent).
class EmbeddingClient {
 public:
  EmbeddingClient(HttpSettings http, std::string model_name, std::size_t expected_dim = 0)
      : http_(std::move(http)), model_name_(std::move(model_name)), expected_dim_(expected_dim) {}

  DenseVector fetch(const std::string& text) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(text);
      if (it != cache_.end()) return it->second;
    }
    DenseVector vec = fetch_uncached(text);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(text, vec);
    return vec;
  }

  std::size_t dim() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return expected_dim_;
  }

 private:
  DenseVector fetch_uncached(const std::string& text) {
    nlohmann::json body = {
        {"model", model_name_},
        {"input", nlohmann::json::array({text})},
    };
    nlohmann::json response = post_json(http_, "/embeddings", body);
    if (!response.contains("data") || !response["data"].is_array() || response["data"].empty() ||
        !response["data"][0].contains("embedding") ||
        !response["data"][0]["embedding"].is_array()) {
      throw HttpError("embedding response missing data[0].embedding");
    }
    DenseVector vec;
    for (const auto& v : response["data"][0]["embedding"]) {
      if (!v.is_number()) throw HttpError("embedding response contains a non-numeric value");
      double value = v.get<double>();
      if (!std::isfinite(value)) throw HttpError("embedding response contains a non-finite value");
      vec.values.push_back(value);
    }
    if (vec.empty()) throw HttpError("embedding response is empty");
    std::lock_guard<std::mutex> lock(mutex_);
    if (expected_dim_ == 0) {
      expected_dim_ = vec.dim();
    } else if (vec.dim() != expected_dim_) {
      throw DataError("embedding dimension mismatch: got " + std::to_string(vec.dim()) +
                      ", store has " + std::to_string(expected_dim_));
    }
    return vec;
  }

  HttpSettings http_;
  std::string model_name_;
  std::size_t expected_dim_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, DenseVector> cache_;
};

}  // namespace dicl
