#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dicl/error.hpp"
#include "dicl/http.hpp"
#include "dicl/text.hpp"

namespace dicl {

/// A text-completion endpoint. Decoding is pinned to temperature 0 so
/// repeated runs are reproducible.
struct LlmEndpoint {
  HttpSettings http;
  std::string model_name;
  int max_new_tokens = 8;
};

/// Outcome of one test instance. parsed_label is empty for generations that
/// contain no verbalizer token; such predictions always count as incorrect.
struct PredictionRecord {
  int query_id = 0;
  std::string raw_generation;
  std::optional<std::string> parsed_label;
  std::string gold_label;
  bool correct = false;
};

/// Sends the prompt to the completion endpoint and returns the generation.
/// Protocol: POST {model, prompt, temperature: 0, max_tokens} ->
/// {choices: [{text}]}. Transport errors and 5xx are retried with backoff.
inline std::string complete(const LlmEndpoint& endpoint, const std::string& prompt_text) {
  nlohmann::json body = {
      {"model", endpoint.model_name},
      {"prompt", prompt_text},
      {"temperature", 0},
      {"max_tokens", endpoint.max_new_tokens},
  };
  nlohmann::json response = post_json(endpoint.http, "/completions", body);
  if (!response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty() || !response["choices"][0].contains("text") ||
      !response["choices"][0]["text"].is_string()) {
    throw HttpError("completion response missing choices[0].text");
  }
  return response["choices"][0]["text"].get<std::string>();
}

/// Maps a raw generation to a label: the text is lowercased and stripped of
/// punctuation/whitespace (via tokenize), then the label whose verbalizer
/// token sequence appears earliest wins; position ties fall to label-set
/// order. No match yields nullopt (INVALID).
inline std::optional<std::string> parse_label(std::string_view raw,
                                              const std::vector<std::string>& label_set,
                                              const std::map<std::string, std::string>& verbalizer) {
  std::vector<std::string> words = tokenize(raw);
  std::optional<std::string> best;
  std::size_t best_pos = words.size();
  for (const std::string& label : label_set) {
    auto it = verbalizer.find(label);
    if (it == verbalizer.end()) continue;
    std::vector<std::string> target = tokenize(it->second);
    if (target.empty() || target.size() > words.size()) continue;
    for (std::size_t pos = 0; pos + target.size() <= words.size(); ++pos) {
      bool match = true;
      for (std::size_t j = 0; j < target.size(); ++j) {
        if (words[pos + j] != target[j]) {
          match = false;
          break;
        }
      }
      if (match) {
        if (pos < best_pos) {
          best_pos = pos;
          best = label;
        }
        break;  // earlier positions of later labels can still win; this label is done
      }
    }
  }
  return best;
}

}  // namespace dicl
