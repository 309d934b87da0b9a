#pragma once

#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dicl/error.hpp"

namespace dicl {

/// Connection settings shared by the completion and embedding clients.
struct HttpSettings {
  std::string base_url;  // e.g. http://127.0.0.1:8080/v1 (path prefix kept)
  std::string api_key;   // sent as a bearer token when non-empty
  int timeout_sec = 30;
  int max_retries = 2;   // retries after the first attempt
  int backoff_ms = 200;  // doubled on every retry
};

namespace detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, possibly empty
};

inline SplitUrl split_base_url(const std::string& base_url) {
  std::size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint url must start with http:// or https://: " + base_url);
  }
  std::size_t slash = base_url.find('/', scheme + 3);
  if (slash == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, slash), prefix};
}

inline bool retryable_status(int status) {
  return status == 429 || status == 408 || status >= 500;
}

}  // namespace detail

/// POSTs a JSON body and returns the parsed JSON response. Transport errors
/// and retryable statuses (408/429/5xx) are retried with exponential backoff
/// up to settings.max_retries; anything else fails immediately.
inline nlohmann::json post_json(const HttpSettings& settings, const std::string& path,
                                const nlohmann::json& body) {
  detail::SplitUrl url = detail::split_base_url(settings.base_url);
  std::string full_path = url.prefix + path;
  std::string payload = body.dump();

  int attempts = settings.max_retries + 1;
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::milliseconds(settings.backoff_ms) * (1 << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(settings.timeout_sec, 0);
    client.set_read_timeout(settings.timeout_sec, 0);
    client.set_write_timeout(settings.timeout_sec, 0);
    httplib::Headers headers;
    if (!settings.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + settings.api_key);
    }
    httplib::Result res = client.Post(full_path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) {
        throw HttpError("malformed response body from " + url.origin + full_path);
      }
      return parsed;
    }
    last_error = "HTTP " + std::to_string(res->status) + " from " + url.origin + full_path;
    if (!detail::retryable_status(res->status)) {
      throw HttpError(last_error);
    }
  }
  throw HttpError(last_error + " (after " + std::to_string(attempts) + " attempts)");
}

}  // namespace dicl
