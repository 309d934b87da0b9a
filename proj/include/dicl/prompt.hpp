#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dicl/corpus.hpp"
#include "dicl/error.hpp"

namespace dicl {

/// Prompt templates with `{field}` / `{label}` slots, taken from the dataset
/// manifest. The query template must end at the label slot so the model
/// continues from there.
struct PromptTemplate {
  std::string instruction;
  std::string demo_format;
  std::string query_format;

  static PromptTemplate from_dataset(const Dataset& ds) {
    return {ds.instruction, ds.demo_template, ds.query_template};
  }
};

enum class DemoOrder { selection, reversed };

inline DemoOrder demo_order_from_name(std::string_view name) {
  if (name == "selection") return DemoOrder::selection;
  if (name == "reversed") return DemoOrder::reversed;
  throw ConfigError("unknown demo order: " + std::string(name));
}

struct Prompt {
  std::string text;
  std::vector<int> demo_ids;  // in prompt order
  int k_effective = 0;
};

namespace detail {

inline std::string render_slots(std::string_view tpl,
                                const std::map<std::string, std::string>& slots,
                                const std::string& where) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    char c = tpl[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t close = tpl.find('}', i);
    std::size_t reopen = tpl.find('{', i + 1);
    if (close == std::string_view::npos || reopen < close) {
      throw ConfigError(where + ": unterminated slot in template");
    }
    std::string name(tpl.substr(i + 1, close - i - 1));
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw ConfigError(where + ": template references unknown field \"" + name + "\"");
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

inline std::map<std::string, std::string> field_slots(const Dataset& ds, const Example& e) {
  std::map<std::string, std::string> slots;
  for (std::size_t i = 0; i < ds.field_names.size(); ++i) {
    slots[ds.field_names[i]] = i < e.fields.size() ? e.fields[i] : "";
  }
  return slots;
}

}  // namespace detail

/// Checks that both templates reference only declared fields (plus {label})
/// and that the query template ends exactly at the label slot.
inline void validate_templates(const Dataset& ds) {
  std::map<std::string, std::string> slots;
  for (const auto& f : ds.field_names) slots[f] = "";
  slots["label"] = "";
  detail::render_slots(ds.demo_template, slots, ds.name + " demo template");
  detail::render_slots(ds.query_template, slots, ds.name + " query template");
  if (ds.demo_template.find("{label}") == std::string::npos) {
    throw ConfigError(ds.name + ": demo template must contain the {label} slot");
  }
  static constexpr std::string_view kLabelSlot = "{label}";
  if (ds.query_template.size() < kLabelSlot.size() ||
      ds.query_template.substr(ds.query_template.size() - kLabelSlot.size()) != kLabelSlot) {
    throw ConfigError(ds.name + ": query template must end at the {label} slot");
  }
}

/// Assembles instruction, verbalized demonstrations, and the open-ended test
/// block. Sections are separated by a blank line, demonstration blocks by a
/// single newline. Byte-exact for identical inputs.
inline Prompt build_prompt(const PromptTemplate& tpl, const Dataset& ds,
                           const std::vector<const Example*>& demos, const Example& test,
                           DemoOrder order = DemoOrder::selection) {
  Prompt prompt;
  for (const Example* d : demos) prompt.demo_ids.push_back(d->id);
  if (order == DemoOrder::reversed) {
    std::reverse(prompt.demo_ids.begin(), prompt.demo_ids.end());
  }
  prompt.k_effective = static_cast<int>(prompt.demo_ids.size());

  std::vector<const Example*> ordered = demos;
  if (order == DemoOrder::reversed) std::reverse(ordered.begin(), ordered.end());

  std::string text = tpl.instruction;
  if (!ordered.empty()) {
    text += "\n\n";
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      const Example& d = *ordered[i];
      auto slots = detail::field_slots(ds, d);
      auto verb = ds.verbalizer.find(d.label);
      if (verb == ds.verbalizer.end()) {
        throw DataError("build_prompt: demo " + std::to_string(d.id) + " has unverbalized label \"" +
                        d.label + "\"");
      }
      slots["label"] = verb->second;
      if (i > 0) text += "\n";
      text += detail::render_slots(tpl.demo_format, slots, "demo template");
    }
  }
  text += "\n\n";
  {
    auto slots = detail::field_slots(ds, test);
    std::string query = tpl.query_format;
    static constexpr std::string_view kLabelSlot = "{label}";
    if (query.size() >= kLabelSlot.size() &&
        query.substr(query.size() - kLabelSlot.size()) == kLabelSlot) {
      query.resize(query.size() - kLabelSlot.size());
    } else {
      throw ConfigError("build_prompt: query template must end at the {label} slot");
    }
    text += detail::render_slots(query, slots, "query template");
  }
  prompt.text = std::move(text);
  return prompt;
}

}  // namespace dicl
