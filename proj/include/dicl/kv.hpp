#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dicl/error.hpp"

namespace dicl {

// Flat key-value text format shared by dataset manifests and run configs:
//   key = value
// Lines starting with '#' (after leading whitespace) and blank lines are
// skipped. Values may contain the escapes \n, \t and \\ so that prompt
// templates can span logical lines.

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string unescape_value(std::string_view raw, const std::string& where) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 >= raw.size()) throw ConfigError(where + ": dangling backslash at end of value");
    char next = raw[++i];
    switch (next) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '\\': out.push_back('\\'); break;
      default:
        throw ConfigError(where + ": unknown escape \"\\" + std::string(1, next) + "\"");
    }
  }
  return out;
}

inline std::map<std::string, std::string> parse_kv_text(const std::string& text,
                                                        const std::string& where) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ":" + std::to_string(lineno) + ": expected \"key = value\"");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(where + ":" + std::to_string(lineno) + ": empty key");
    }
    if (out.count(key)) {
      throw ConfigError(where + ":" + std::to_string(lineno) + ": duplicate key \"" + key + "\"");
    }
    out[key] = unescape_value(value, where + ":" + std::to_string(lineno));
  }
  return out;
}

inline std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str(), path);
}

/// Escape a value for writing back into the kv format.
inline std::string escape_value(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view value, char sep = ',') {
  std::vector<std::string> out;
  std::string current;
  for (char c : value) {
    if (c == sep) {
      out.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(trim(current));
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

}  // namespace dicl
