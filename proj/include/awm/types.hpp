#pragma once

#include <optional>
#include <string>
#include <vector>

#include "awm/action.hpp"

namespace awm {

/// One observe-reason-act step of an experience trajectory.
struct Step {
  std::string observation;
  std::optional<std::string> state_desc;
  std::optional<std::string> html;
  std::optional<std::string> reasoning;
  Action action;

  friend bool operator==(const Step& a, const Step& b) {
    return a.observation == b.observation && a.state_desc == b.state_desc &&
           a.html == b.html && a.reasoning == b.reasoning && a.action == b.action;
  }
};

/// A completed task record: instruction plus the full trajectory, grouped by
/// website. `success` is filled by a judge when the episode has been scored.
struct Experience {
  std::string id;
  std::string website;
  std::string instruction;
  std::optional<std::string> template_id;
  std::vector<Step> steps;
  std::optional<bool> success;

  friend bool operator==(const Experience& a, const Experience& b) {
    return a.id == b.id && a.website == b.website &&
           a.instruction == b.instruction && a.template_id == b.template_id &&
           a.steps == b.steps && a.success == b.success;
  }
};

enum class WorkflowSource { kRule, kLm, kHuman, kOffline, kOnline };
enum class WorkflowFormat { kCode, kText };

/// A workflow step drops the raw observation and keeps the abstracted
/// state/reasoning/action triple. `action_text` holds the verbalized sentence
/// for text-format workflows; the program form stays in `action`.
struct WorkflowStep {
  std::optional<std::string> state_desc;
  std::optional<std::string> reasoning;
  Action action;
  std::optional<std::string> action_text;

  friend bool operator==(const WorkflowStep& a, const WorkflowStep& b) {
    return a.state_desc == b.state_desc && a.reasoning == b.reasoning &&
           a.action == b.action && a.action_text == b.action_text;
  }
};

/// A reusable routine: a one-line goal description plus at least two steps
/// whose arguments may contain `{placeholder}` slots.
struct Workflow {
  std::string id;
  std::string website;
  std::string description;
  std::vector<WorkflowStep> steps;
  WorkflowSource source = WorkflowSource::kLm;
  WorkflowFormat format = WorkflowFormat::kCode;

  friend bool operator==(const Workflow& a, const Workflow& b) {
    return a.id == b.id && a.website == b.website &&
           a.description == b.description && a.steps == b.steps &&
           a.source == b.source && a.format == b.format;
  }
};

/// The text context handed to the agent: built-in action documentation plus
/// the workflows accumulated for one website.
struct AgentMemory {
  std::string website;
  std::string base_docs;
  std::vector<Workflow> workflows;
};

inline const char* to_string(WorkflowSource s) {
  switch (s) {
    case WorkflowSource::kRule: return "rule";
    case WorkflowSource::kLm: return "lm";
    case WorkflowSource::kHuman: return "human";
    case WorkflowSource::kOffline: return "offline";
    case WorkflowSource::kOnline: return "online";
  }
  return "lm";
}

inline WorkflowSource workflow_source_from_string(const std::string& s) {
  if (s == "rule") return WorkflowSource::kRule;
  if (s == "lm") return WorkflowSource::kLm;
  if (s == "human") return WorkflowSource::kHuman;
  if (s == "offline") return WorkflowSource::kOffline;
  if (s == "online") return WorkflowSource::kOnline;
  throw SchemaError("unknown workflow source: " + s);
}

inline const char* to_string(WorkflowFormat f) {
  return f == WorkflowFormat::kCode ? "code" : "text";
}

inline WorkflowFormat workflow_format_from_string(const std::string& s) {
  if (s == "code") return WorkflowFormat::kCode;
  if (s == "text") return WorkflowFormat::kText;
  throw SchemaError("unknown workflow format: " + s);
}

/// Ordered action names of a trajectory; the unit of deduplication.
inline std::vector<std::string> action_signature_of(const std::vector<Step>& steps) {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action.name);
  return out;
}

inline std::vector<std::string> action_signature_of(
    const std::vector<WorkflowStep>& steps) {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action.name);
  return out;
}

}  // namespace awm
