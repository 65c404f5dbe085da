#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "awm/lm.hpp"
#include "awm/prompts.hpp"
#include "awm/serialize.hpp"
#include "awm/types.hpp"

namespace awm {

enum class InductionMode { kRule, kLm };
enum class EnvRepr { kDescription, kHtml, kBoth };

struct InductionConfig {
  InductionMode mode = InductionMode::kLm;
  int dedup_n = 1;
  std::optional<unsigned> seed;
  EnvRepr env_repr = EnvRepr::kDescription;
  int max_prompt_chars = 24000;
  std::string model = "default";
  int max_tokens = 2048;
};

inline std::vector<std::string> action_signature(const Experience& e) {
  return action_signature_of(e.steps);
}

namespace detail {

// Partial Fisher-Yates with plain modulo draws so that seeded selection is
// reproducible across standard libraries (mt19937 output is pinned by the
// standard, uniform_int_distribution is not).
inline std::vector<size_t> pick_n_of(size_t group_size, size_t n,
                                     std::optional<unsigned> seed,
                                     size_t group_index) {
  std::vector<size_t> idx(group_size);
  for (size_t i = 0; i < group_size; ++i) idx[i] = i;
  if (n >= group_size) return idx;
  if (!seed) {
    idx.resize(n);  // callers pass members ordered by id in the unseeded case
    return idx;
  }
  std::mt19937 rng(*seed + 0x9e3779b9u * static_cast<unsigned>(group_index + 1));
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + static_cast<size_t>(rng() % (group_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Shared grouping-and-select skeleton for the two dedup flavors.
// `key(e)` returns nullopt for experiences that pass through untouched.
template <typename KeyFn>
std::vector<Experience> dedup_grouped(const std::vector<Experience>& experiences,
                                      int n, std::optional<unsigned> seed,
                                      KeyFn&& key) {
  struct Group {
    std::vector<size_t> members;  // indices into `experiences`, input order
  };
  std::map<std::string, size_t> group_of;
  std::vector<Group> groups;
  // Entries in first-appearance order; ungrouped experiences form singleton
  // pseudo-groups so overall order is preserved.
  struct Slot {
    bool grouped;
    size_t index;  // group index or experience index
  };
  std::vector<Slot> order;

  for (size_t i = 0; i < experiences.size(); ++i) {
    auto k = key(experiences[i]);
    if (!k) {
      order.push_back({false, i});
      continue;
    }
    auto it = group_of.find(*k);
    if (it == group_of.end()) {
      group_of.emplace(*k, groups.size());
      order.push_back({true, groups.size()});
      groups.push_back(Group{{i}});
    } else {
      groups[it->second].members.push_back(i);
    }
  }

  std::vector<Experience> out;
  for (const Slot& slot : order) {
    if (!slot.grouped) {
      out.push_back(experiences[slot.index]);
      continue;
    }
    const Group& g = groups[slot.index];
    std::vector<size_t> members = g.members;
    if (!seed) {
      std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
        return experiences[a].id < experiences[b].id;
      });
    }
    std::vector<size_t> picked =
        pick_n_of(members.size(), static_cast<size_t>(n), seed, slot.index);
    std::vector<size_t> chosen;
    for (size_t p : picked) chosen.push_back(members[p]);
    std::sort(chosen.begin(), chosen.end());  // emit in input order
    for (size_t c : chosen) out.push_back(experiences[c]);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

/// Group experiences by action signature and keep n representatives per
/// group: the n lowest ids when no seed is given, a seeded uniform draw
/// otherwise. Output preserves first-appearance group order.
inline std::vector<Experience> dedup_by_signature(
    const std::vector<Experience>& experiences, int n = 1,
    std::optional<unsigned> seed = std::nullopt) {
  return detail::dedup_grouped(experiences, n, seed,
                               [](const Experience& e) -> std::optional<std::string> {
                                 return detail::join(action_signature(e), ",");
                               });
}

/// Same selection contract keyed on template_id; experiences without a
/// template pass through untouched.
inline std::vector<Experience> dedup_by_template(
    const std::vector<Experience>& experiences, int n = 1,
    std::optional<unsigned> seed = std::nullopt) {
  return detail::dedup_grouped(experiences, n, seed,
                               [](const Experience& e) -> std::optional<std::string> {
                                 if (!e.template_id) return std::nullopt;
                                 return *e.template_id;
                               });
}

/// Drop click/fill/type steps whose first argument is not a quoted
/// string-formatted integer (an executable element id). Surviving steps keep
/// their order.
inline Experience filter_invalid_steps(const Experience& e) {
  Experience out = e;
  out.steps.clear();
  for (const auto& step : e.steps) {
    const std::string& name = step.action.name;
    if (name == "click" || name == "fill" || name == "type") {
      if (step.action.args.empty() || !step.action.args[0].is_quoted_integer()) {
        continue;
      }
    }
    out.steps.push_back(step);
  }
  return out;
}

struct InductionSkip {
  std::string experience_id;
  std::string reason;
};

struct InductionResult {
  std::vector<Workflow> workflows;
  std::vector<InductionSkip> skips;
  std::vector<std::string> warnings;
};

/// Rule-based induction: dedup by template (when templates exist), dedup by
/// action signature, filter invalid steps, and keep each surviving experience
/// verbatim as a workflow. No argument abstraction.
inline InductionResult induce_rule(const std::vector<Experience>& experiences,
                                   const InductionConfig& cfg = {}) {
  InductionResult result;
  bool any_template =
      std::any_of(experiences.begin(), experiences.end(),
                  [](const Experience& e) { return e.template_id.has_value(); });
  std::vector<Experience> unique = experiences;
  if (any_template) unique = dedup_by_template(unique, cfg.dedup_n, cfg.seed);
  unique = dedup_by_signature(unique, cfg.dedup_n, cfg.seed);

  int counter = 0;
  for (const auto& e : unique) {
    Experience filtered = filter_invalid_steps(e);
    if (filtered.steps.size() < 2) {
      result.skips.push_back(
          {e.id, "fewer than 2 valid steps after invalid-step filtering"});
      continue;
    }
    Workflow w;
    w.id = e.website + ":rule:" + std::to_string(++counter);
    w.website = e.website;
    w.description = e.instruction;
    w.source = WorkflowSource::kRule;
    w.format = WorkflowFormat::kCode;
    for (const auto& step : filtered.steps) {
      WorkflowStep ws;
      ws.state_desc = step.state_desc;
      ws.reasoning = step.reasoning;
      ws.action = step.action;
      w.steps.push_back(std::move(ws));
    }
    result.workflows.push_back(std::move(w));
  }
  return result;
}

namespace detail {

inline std::string render_experience_for_prompt(const Experience& e,
                                                EnvRepr env_repr) {
  std::string out = "Task: " + e.instruction + "\n";
  int n = 0;
  for (const auto& step : e.steps) {
    out += "Step " + std::to_string(++n) + ":\n";
    bool want_desc = env_repr == EnvRepr::kDescription || env_repr == EnvRepr::kBoth;
    bool want_html = env_repr == EnvRepr::kHtml || env_repr == EnvRepr::kBoth;
    if (want_desc && step.state_desc && !step.state_desc->empty()) {
      out += "State: " + *step.state_desc + "\n";
    }
    if (want_html && step.html && !step.html->empty()) {
      out += "HTML: " + *step.html + "\n";
    }
    if (step.reasoning && !step.reasoning->empty()) {
      out += "Reasoning: " + *step.reasoning + "\n";
    }
    out += "Action: " + render_action(step.action) + "\n";
  }
  return out;
}

}  // namespace detail

struct InductionPrompts {
  std::vector<std::string> prompts;            // one per batch
  std::vector<std::vector<size_t>> batches;    // experience indices per batch
  std::vector<std::string> warnings;
};

/// Concatenate experiences under the induction instruction. When the render
/// would exceed cfg.max_prompt_chars the input is split greedily into
/// contiguous batches, each under budget.
inline InductionPrompts build_induction_prompts(
    const std::vector<Experience>& experiences, const InductionConfig& cfg) {
  InductionPrompts out;
  const std::string header(kInductionPromptV1);

  bool requested_field_present = false;
  for (const auto& e : experiences) {
    for (const auto& s : e.steps) {
      if ((cfg.env_repr == EnvRepr::kDescription && s.state_desc) ||
          (cfg.env_repr == EnvRepr::kHtml && s.html) ||
          (cfg.env_repr == EnvRepr::kBoth && (s.state_desc || s.html))) {
        requested_field_present = true;
      }
    }
  }
  if (!experiences.empty() && !requested_field_present) {
    out.warnings.push_back(
        "no step carries the requested environment representation; rendering "
        "actions only");
  }

  std::vector<std::string> rendered;
  rendered.reserve(experiences.size());
  for (const auto& e : experiences) {
    rendered.push_back(detail::render_experience_for_prompt(e, cfg.env_repr));
  }

  std::string current = header;
  std::vector<size_t> current_batch;
  auto flush = [&] {
    if (current_batch.empty()) return;
    out.prompts.push_back(current);
    out.batches.push_back(current_batch);
    current = header;
    current_batch.clear();
  };
  for (size_t i = 0; i < experiences.size(); ++i) {
    std::string block = "\n" + rendered[i];
    if (header.size() + block.size() > static_cast<size_t>(cfg.max_prompt_chars)) {
      throw OversizeExperienceError("experience " + experiences[i].id +
                                    " alone exceeds the prompt budget");
    }
    if (current.size() + block.size() > static_cast<size_t>(cfg.max_prompt_chars)) {
      flush();
    }
    current += block;
    current_batch.push_back(i);
  }
  flush();
  return out;
}

/// Segment generated text on blank-line boundaries and parse each block as a
/// workflow. Blocks that fail to parse are skipped and reported; survivors
/// get source=lm and sequential ids.
inline InductionResult parse_workflow_output(const std::string& lm_text,
                                             const std::string& website,
                                             int id_start = 1) {
  InductionResult result;
  std::vector<std::string> blocks;
  {
    std::istringstream in(lm_text);
    std::string line, block;
    auto flush = [&] {
      if (!detail::trim(block).empty()) blocks.push_back(block);
      block.clear();
    };
    while (std::getline(in, line)) {
      if (detail::trim(line).empty()) {
        flush();
      } else {
        block += line;
        block += "\n";
      }
    }
    flush();
  }

  int counter = id_start;
  int block_no = 0;
  for (const auto& block : blocks) {
    ++block_no;
    try {
      Workflow w = parse_workflow(block, website);
      w.id = website + ":lm:" + std::to_string(counter++);
      w.source = WorkflowSource::kLm;
      result.workflows.push_back(std::move(w));
    } catch (const Error& err) {
      result.skips.push_back({"block " + std::to_string(block_no), err.what()});
    }
  }
  return result;
}

namespace detail {

// Dedup key: action-name signature plus per-step argument pattern with
// placeholders masked. Same routine induced twice collapses; same signature
// over different concrete arguments does not.
inline std::string workflow_pattern_key(const Workflow& w) {
  std::string key = w.website + "|";
  for (const auto& step : w.steps) {
    key += step.action.name;
    for (const auto& arg : step.action.args) {
      key += "\x1f";
      key += arg.is_placeholder() ? std::string("<*>") : arg.value;
    }
    key += "\x1e";
  }
  return key;
}

}  // namespace detail

/// Keep the earliest workflow of each (website, signature, masked-args)
/// group; order preserved. Idempotent.
inline std::vector<Workflow> dedup_workflows(const std::vector<Workflow>& ws) {
  std::vector<Workflow> out;
  std::set<std::string> seen;
  for (const auto& w : ws) {
    if (seen.insert(detail::workflow_pattern_key(w)).second) {
      out.push_back(w);
    }
  }
  return out;
}

/// LM-based induction: render prompt batches, call the backend per batch,
/// parse each output, concatenate in batch order, and dedup.
inline InductionResult induce_lm(const std::vector<Experience>& experiences,
                                 const InductionConfig& cfg, LmClient& lm) {
  InductionResult result;
  if (experiences.empty()) return result;
  const std::string website = experiences.front().website;

  InductionPrompts prompts = build_induction_prompts(experiences, cfg);
  result.warnings = prompts.warnings;

  int next_id = 1;
  for (size_t b = 0; b < prompts.prompts.size(); ++b) {
    LmRequest req;
    req.prompt = prompts.prompts[b];
    req.temperature = 0.0;
    req.max_tokens = cfg.max_tokens;
    req.model = cfg.model;
    LmResponse resp;
    try {
      resp = lm.complete(req);
    } catch (const LmError& err) {
      throw LmError(std::string("induction batch failed: ") + err.what(),
                    static_cast<int>(b));
    }
    InductionResult parsed =
        parse_workflow_output(resp.text, website, next_id);
    next_id += static_cast<int>(parsed.workflows.size());
    for (auto& w : parsed.workflows) result.workflows.push_back(std::move(w));
    for (auto& s : parsed.skips) result.skips.push_back(std::move(s));
  }
  result.workflows = dedup_workflows(result.workflows);
  return result;
}

/// Replace each step's program action with a one-sentence verbalization
/// produced by the LM. State descriptions and reasoning carry over; step
/// count is preserved.
inline std::vector<Workflow> verbalize_workflows(const std::vector<Workflow>& ws,
                                                 LmClient& lm,
                                                 const std::string& model = "default") {
  std::vector<Workflow> out;
  out.reserve(ws.size());
  for (const auto& w : ws) {
    std::string prompt(kVerbalizeInstruction);
    prompt += "\n";
    for (const auto& step : w.steps) {
      prompt += render_action(step.action) + "\n";
    }
    LmRequest req;
    req.prompt = prompt;
    req.temperature = 0.0;
    req.model = model;
    LmResponse resp = lm.complete(req);

    std::vector<std::string> lines;
    std::istringstream in(resp.text);
    std::string line;
    while (std::getline(in, line)) {
      std::string t = detail::trim(line);
      if (!t.empty()) lines.push_back(t);
    }
    if (lines.size() != w.steps.size()) {
      throw LmError("verbalization returned " + std::to_string(lines.size()) +
                    " lines for " + std::to_string(w.steps.size()) + " steps");
    }
    Workflow v = w;
    v.format = WorkflowFormat::kText;
    for (size_t i = 0; i < v.steps.size(); ++i) {
      v.steps[i].action_text = lines[i];
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace awm
