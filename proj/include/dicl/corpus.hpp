#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dicl/error.hpp"
#include "dicl/kv.hpp"

namespace dicl {

enum class Split { train, validation, test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

inline Split split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split name: " + std::string(name));
}

/// Separator used when flattening multi-field examples into one text for
/// vectorization. Prompts render fields through named template slots instead.
inline constexpr std::string_view kFieldSeparator = " [SEP] ";

/// One labeled instance. `fields` aligns with Dataset::field_names.
struct Example {
  int id = 0;
  std::vector<std::string> fields;
  std::string label;
  Split split = Split::train;
};

/// Concatenates the field segments in order with `sep` between them.
inline std::string join_fields(const Example& e, std::string_view sep = kFieldSeparator) {
  std::string out;
  for (std::size_t i = 0; i < e.fields.size(); ++i) {
    if (i > 0) out += sep;
    out += e.fields[i];
  }
  return out;
}

struct Dataset {
  std::string name;
  std::vector<std::string> field_names;
  std::string label_field = "label";
  std::vector<std::string> label_set;                // ordered
  std::map<std::string, std::string> verbalizer;     // label -> generation token(s)
  std::string instruction;
  std::string demo_template;
  std::string query_template;
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;

  const std::vector<Example>& split(Split s) const {
    switch (s) {
      case Split::train: return train;
      case Split::validation: return validation;
      case Split::test: return test;
    }
    throw Error("bad split");
  }

  bool has_label(std::string_view label) const {
    return std::find(label_set.begin(), label_set.end(), label) != label_set.end();
  }
};

namespace detail {

inline std::vector<std::string> split_tsv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == '\t') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

inline std::vector<Example> load_split_tsv(const std::filesystem::path& path, Split split,
                                           const Dataset& ds) {
  std::ifstream in(path);
  if (!in) throw DataError("missing split file: " + path.string());

  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("empty split file: " + path.string());
  std::vector<std::string> header = split_tsv_line(header_line);

  auto column_of = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };

  std::vector<int> field_cols;
  for (const auto& f : ds.field_names) {
    int col = column_of(f);
    if (col < 0) {
      throw DataError(path.string() + ": missing field column \"" + f + "\"");
    }
    field_cols.push_back(col);
  }
  int label_col = column_of(ds.label_field);
  if (label_col < 0) {
    throw DataError(path.string() + ": missing label column \"" + ds.label_field + "\"");
  }
  int id_col = column_of("id");  // optional; must agree with row order when present

  std::vector<Example> out;
  std::set<int> seen_ids;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    std::vector<std::string> cells = split_tsv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    Example e;
    e.split = split;
    e.id = static_cast<int>(out.size());
    if (id_col >= 0) {
      int declared = 0;
      try {
        declared = std::stoi(cells[id_col]);
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad id \"" +
                        cells[id_col] + "\"");
      }
      if (seen_ids.count(declared)) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate id " +
                        std::to_string(declared));
      }
      seen_ids.insert(declared);
      if (declared != e.id) {
        throw DataError(path.string() + ":" + std::to_string(lineno) +
                        ": ids must be contiguous from 0 in file order (expected " +
                        std::to_string(e.id) + ", got " + std::to_string(declared) + ")");
      }
    }
    for (int col : field_cols) e.fields.push_back(cells[col]);
    e.label = cells[label_col];
    if (!ds.has_label(e.label)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown label \"" +
                      e.label + "\"");
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) throw DataError("empty split: " + path.string());
  return out;
}

inline std::string content_key(const Example& e) {
  std::string key;
  for (const auto& f : e.fields) {
    key += f;
    key.push_back('\x1f');
  }
  return key;
}

}  // namespace detail

/// Parses a dataset manifest (key-value text). Does not load split files.
inline Dataset parse_manifest(const std::map<std::string, std::string>& kv,
                              const std::string& where) {
  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(where + ": missing manifest key \"" + key + "\"");
    return it->second;
  };

  Dataset ds;
  ds.name = require("name");
  ds.field_names = split_list(require("fields"));
  if (ds.field_names.empty()) throw ConfigError(where + ": \"fields\" must name at least one column");
  if (auto it = kv.find("label_field"); it != kv.end()) ds.label_field = it->second;
  ds.label_set = split_list(require("labels"));
  if (ds.label_set.size() < 2) throw ConfigError(where + ": label set needs at least 2 entries");
  {
    std::set<std::string> distinct(ds.label_set.begin(), ds.label_set.end());
    if (distinct.size() != ds.label_set.size()) {
      throw ConfigError(where + ": duplicate entry in label set");
    }
  }
  std::set<std::string> verbal_values;
  for (const auto& label : ds.label_set) {
    const std::string& v = require("verbalizer." + label);
    if (v.empty()) throw ConfigError(where + ": empty verbalizer for label \"" + label + "\"");
    if (!verbal_values.insert(v).second) {
      throw ConfigError(where + ": verbalizer values must be distinct (\"" + v + "\")");
    }
    ds.verbalizer[label] = v;
  }
  ds.instruction = require("instruction");
  ds.demo_template = require("template.demo");
  ds.query_template = require("template.query");
  return ds;
}

/// Loads a dataset from its manifest: split files `<name>.<split>.tsv` live
/// next to the manifest. Validates every type invariant.
inline Dataset load_dataset(const std::string& manifest_path) {
  Dataset ds = parse_manifest(parse_kv_file(manifest_path), manifest_path);
  std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();

  auto split_path = [&](Split s) {
    return dir / (ds.name + "." + split_name(s) + ".tsv");
  };
  ds.train = detail::load_split_tsv(split_path(Split::train), Split::train, ds);
  ds.validation = detail::load_split_tsv(split_path(Split::validation), Split::validation, ds);
  ds.test = detail::load_split_tsv(split_path(Split::test), Split::test, ds);

  // Splits must be disjoint by content identity.
  std::map<std::string, const char*> seen;
  for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
    for (const Example& e : *split) {
      std::string key = detail::content_key(e);
      auto [it, inserted] = seen.emplace(std::move(key), split_name(e.split));
      if (!inserted && std::string_view(it->second) != split_name(e.split)) {
        throw DataError(ds.name + ": identical content appears in splits \"" +
                        it->second + "\" and \"" + split_name(e.split) + "\"");
      }
    }
  }
  return ds;
}

/// Writes manifest + split files into `dir` (inverse of load_dataset).
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (ds.name + ".manifest"));
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << "name = " << ds.name << "\n";
    out << "fields = ";
    for (std::size_t i = 0; i < ds.field_names.size(); ++i) {
      if (i) out << ",";
      out << ds.field_names[i];
    }
    out << "\n";
    out << "label_field = " << ds.label_field << "\n";
    out << "labels = ";
    for (std::size_t i = 0; i < ds.label_set.size(); ++i) {
      if (i) out << ",";
      out << ds.label_set[i];
    }
    out << "\n";
    for (const auto& label : ds.label_set) {
      out << "verbalizer." << label << " = " << escape_value(ds.verbalizer.at(label)) << "\n";
    }
    out << "instruction = " << escape_value(ds.instruction) << "\n";
    out << "template.demo = " << escape_value(ds.demo_template) << "\n";
    out << "template.query = " << escape_value(ds.query_template) << "\n";
  }
  for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
    Split s = split->front().split;
    std::ofstream out(dir / (ds.name + "." + split_name(s) + ".tsv"));
    out << "id";
    for (const auto& f : ds.field_names) out << "\t" << f;
    out << "\t" << ds.label_field << "\n";
    for (const Example& e : *split) {
      out << e.id;
      for (const auto& f : e.fields) out << "\t" << f;
      out << "\t" << e.label << "\n";
    }
  }
}

}  // namespace dicl
