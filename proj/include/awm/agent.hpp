#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "awm/action.hpp"
#include "awm/errors.hpp"
#include "awm/lm.hpp"
#include "awm/memory.hpp"
#include "awm/prompts.hpp"
#include "awm/simenv.hpp"
#include "awm/types.hpp"

namespace awm {

inline const std::string& default_action_docs() {
  static const std::string docs{kDefaultActionDocs};
  return docs;
}

struct AgentConfig {
  int max_steps = 30;
  MemoryMode memory_mode = MemoryMode::kOnline;
  bool enable_macro_actions = false;
  std::string action_docs = default_action_docs();
  std::string model = "default";
  double temperature = 0.0;
  int max_tokens = 512;
  bool retry_on_no_action = true;
  bool trace = false;  // collect per-step prompt/reply logs
};

// ---------------------------------------------------------------------------
// Workflows as callable macro actions.
// ---------------------------------------------------------------------------

struct MacroAction {
  std::string name;
  std::vector<std::string> params;  // distinct placeholders, first occurrence
  std::string workflow_id;
  std::string description;
  std::vector<WorkflowStep> steps;
};

namespace detail {

inline std::string macro_name_of(const std::string& description) {
  std::string out;
  bool pending_sep = false;
  for (char c : description) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      pending_sep = true;
    }
  }
  return out.empty() ? "workflow" : out;
}

}  // namespace detail

struct MacroSet {
  std::vector<MacroAction> macros;
  ActionRegistry registry;
  std::string docs;  // signature lines to append to the action docs

  const MacroAction* find(const std::string& name) const {
    for (const auto& m : macros) {
      if (m.name == name) return &m;
    }
    return nullptr;
  }
};

/// Turns workflows into callable macros: the name is the snake_cased
/// description (suffixed _2, _3, ... on collision, including collisions with
/// the built-in actions) and the parameters are the workflow's distinct
/// placeholders in first-occurrence order.
inline MacroSet register_macro_actions(const std::vector<Workflow>& workflows) {
  MacroSet set;
  std::set<std::string> taken;
  for (const auto& name : canonical_action_names()) taken.insert(name);

  for (const auto& w : workflows) {
    MacroAction m;
    std::string base = detail::macro_name_of(w.description);
    std::string name = base;
    for (int suffix = 2; taken.count(name); ++suffix) {
      name = base + "_" + std::to_string(suffix);
    }
    taken.insert(name);
    m.name = name;
    m.workflow_id = w.id;
    m.description = w.description;
    m.steps = w.steps;
    std::vector<ActionArg> all_args;
    for (const auto& s : w.steps) {
      for (const auto& a : s.action.args) all_args.push_back(a);
    }
    m.params = placeholder_names(all_args);
    set.registry.add(m.name, static_cast<int>(m.params.size()));
    set.docs += m.name + "(";
    for (size_t i = 0; i < m.params.size(); ++i) {
      if (i) set.docs += ", ";
      set.docs += m.params[i];
    }
    set.docs += ")  workflow: " + m.description + "\n";
    set.macros.push_back(std::move(m));
  }
  return set;
}

/// Macros for one website's stored workflows.
inline MacroSet register_macro_actions(const WorkflowStore& store,
                                       const std::string& website) {
  return register_macro_actions(store.workflows_for(website));
}

struct MacroRunResult {
  std::vector<Step> steps;  // executed prefix, pre-action observation each
  std::optional<std::string> error;  // set when execution halted early
  std::string observation;           // world state after the last attempt
};

/// Executes a macro's steps back to back without consulting the policy in
/// between. Placeholders are bound from `args` positionally; the first
/// environment error halts expansion and the partial trace is returned.
/// `budget` caps how many steps may run (the caller's remaining step budget).
inline MacroRunResult expand_macro(Environment& env, const MacroAction& macro,
                                   const std::vector<std::string>& args,
                                   size_t budget = static_cast<size_t>(-1)) {
  if (args.size() != macro.params.size()) {
    throw ArityError("macro '" + macro.name + "' takes " +
                     std::to_string(macro.params.size()) + " arguments, got " +
                     std::to_string(args.size()));
  }
  std::map<std::string, std::string> binding;
  for (size_t i = 0; i < macro.params.size(); ++i) {
    binding[macro.params[i]] = args[i];
  }

  MacroRunResult result;
  result.observation = env.observation();
  for (const auto& ws : macro.steps) {
    if (result.steps.size() >= budget) break;
    Action concrete = ws.action;
    for (auto& arg : concrete.args) {
      arg.value = detail::subst_slots(arg.value, binding);
      if (arg.is_placeholder() &&
          arg.value.find('{', 1) == std::string::npos) {
        throw UnboundPlaceholderError("macro '" + macro.name + "' leaves " +
                                      arg.value + " unbound");
      }
    }
    Step s;
    s.observation = result.observation;
    s.state_desc = result.observation;
    s.reasoning = "macro " + macro.name;
    s.action = concrete;
    ExecResult r = env.try_execute(concrete);
    if (!r.ok()) {
      result.error = r.error;
      break;
    }
    result.observation = r.observation;
    result.steps.push_back(std::move(s));
    if (env.done()) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Prompting.
// ---------------------------------------------------------------------------

/// One prompt per decision: memory (docs + workflows), action docs, task,
/// prior actions, current observation, reply contract.
inline std::string build_agent_prompt(
    const std::string& memory_text, const std::string& website,
    const std::string& instruction, const std::vector<Step>& history,
    const std::string& observation,
    const std::string& action_docs = default_action_docs(),
    const std::string& extra_action_docs = "") {
  std::string prompt;
  if (!memory_text.empty()) {
    prompt += memory_text;
    if (prompt.back() != '\n') prompt += "\n";
    prompt += "\n";
  }
  prompt += "Actions available:\n";
  prompt += action_docs;
  if (!extra_action_docs.empty()) prompt += extra_action_docs;
  prompt += "\n";
  prompt += "Website: " + website + "\n";
  prompt += "Task: " + instruction + "\n\n";
  if (!history.empty()) {
    prompt += "Previous actions:\n";
    for (size_t i = 0; i < history.size(); ++i) {
      prompt += "  " + std::to_string(i + 1) + ". " +
                render_action(history[i].action) + "\n";
    }
    prompt += "\n";
  }
  prompt += "Observation:\n" + observation + "\n\n";
  prompt += kAgentReplyInstruction;
  return prompt;
}

struct AgentReply {
  Action action;
  std::string reasoning;
  std::string raw;
};

/// Extracts the action from a model reply: the last line that parses as an
/// action call wins, and the nearest non-empty line above it is kept as the
/// reasoning. A reply with no action line raises NoActionError.
inline AgentReply parse_agent_reply(const std::string& text,
                                    const ActionRegistry* registry = nullptr) {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  int action_at = -1;
  for (int i = static_cast<int>(lines.size()) - 1; i >= 0; --i) {
    if (is_action_line(lines[i], registry)) {
      action_at = i;
      break;
    }
  }
  if (action_at < 0) throw NoActionError("reply contains no action line");

  AgentReply reply;
  reply.raw = text;
  reply.action = parse_action(detail::trim(lines[action_at]), registry);
  for (int i = action_at - 1; i >= 0; --i) {
    std::string t = detail::trim(lines[i]);
    if (!t.empty()) {
      reply.reasoning = t;
      break;
    }
  }
  return reply;
}

struct Prediction {
  Action action;
  std::string reasoning;
  std::string raw;
  std::string prompt;   // the prompt behind the reply actually used
  bool retried = false;
  bool forced = false;  // no usable reply; the action is a forced stop()
  int lm_calls = 0;
};

/// One policy decision: build the prompt, query the model, parse the reply.
/// When the reply has no action line, re-prompts once with the retry
/// reminder; if that also fails the decision is a forced stop(), so episodes
/// always terminate.
inline Prediction predict_step(LmClient& lm, const std::string& memory_text,
                               const std::string& website,
                               const std::string& instruction,
                               const std::vector<Step>& history,
                               const std::string& observation,
                               const AgentConfig& cfg = {},
                               const ActionRegistry* registry = nullptr,
                               const std::string& extra_action_docs = "") {
  std::string prompt =
      build_agent_prompt(memory_text, website, instruction, history,
                         observation, cfg.action_docs, extra_action_docs);
  LmRequest req;
  req.prompt = prompt;
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.model = cfg.model;

  Prediction p;
  p.prompt = prompt;
  LmResponse resp = lm.complete(req);
  p.lm_calls = 1;
  try {
    AgentReply reply = parse_agent_reply(resp.text, registry);
    p.action = reply.action;
    p.reasoning = reply.reasoning;
    p.raw = reply.raw;
    return p;
  } catch (const NoActionError&) {
  }
  if (cfg.retry_on_no_action) {
    LmRequest retry = req;
    retry.prompt += "\n" + std::string(kAgentRetryReminder);
    resp = lm.complete(retry);
    p.lm_calls = 2;
    p.retried = true;
    p.prompt = retry.prompt;
    try {
      AgentReply reply = parse_agent_reply(resp.text, registry);
      p.action = reply.action;
      p.reasoning = reply.reasoning;
      p.raw = reply.raw;
      return p;
    } catch (const NoActionError&) {
    }
  }
  p.forced = true;
  p.raw = resp.text;
  p.action = Action{"stop", {}};
  return p;
}

// ---------------------------------------------------------------------------
// Episode loop.
// ---------------------------------------------------------------------------

struct EpisodeResult {
  Experience experience;
  bool finished = false;  // a terminal action was executed
  bool success = false;   // the bound task's check passed
  int lm_calls = 0;
  int env_errors = 0;
  int forced_stops = 0;  // unusable replies resolved by a forced stop()
  std::string trace;     // per-step prompt/reply log when cfg.trace is on
};

/// Runs the policy against the environment until a terminal action or the
/// step budget. Environment errors do not end the episode: the error text
/// becomes the next observation and the agent may recover. Macro calls
/// expand into their concrete steps, all recorded in the experience.
inline EpisodeResult run_episode(Environment& env, const TaskSpec& task,
                                 LmClient& lm, const std::string& memory_text,
                                 const AgentConfig& cfg = {},
                                 const MacroSet* macros = nullptr) {
  EpisodeResult result;
  Experience& e = result.experience;
  e.id = task.id;
  e.website = task.website;
  e.instruction = task.instruction;
  e.template_id = task.template_id;

  std::string obs = env.reset(task);
  const ActionRegistry* registry = macros ? &macros->registry : nullptr;
  const std::string extra_docs = macros ? macros->docs : "";

  while (static_cast<int>(e.steps.size()) < cfg.max_steps && !env.done()) {
    Prediction p = predict_step(lm, memory_text, e.website, e.instruction,
                                e.steps, obs, cfg, registry, extra_docs);
    result.lm_calls += p.lm_calls;
    if (p.forced) ++result.forced_stops;
    if (cfg.trace) {
      result.trace += "=== step " + std::to_string(e.steps.size() + 1) +
                      " prompt ===\n" + p.prompt + "\n=== reply ===\n" +
                      p.raw + "\n";
    }

    const MacroAction* macro = macros ? macros->find(p.action.name) : nullptr;
    if (macro) {
      size_t budget = static_cast<size_t>(cfg.max_steps) - e.steps.size();
      MacroRunResult run = expand_macro(env, *macro, p.action.arg_values(),
                                        budget);
      for (auto& s : run.steps) e.steps.push_back(std::move(s));
      if (run.error) {
        ++result.env_errors;
        obs = "Error: " + *run.error;
      } else {
        obs = run.observation;
      }
      continue;
    }

    Step s;
    s.observation = obs;
    s.state_desc = obs;
    if (!p.reasoning.empty()) s.reasoning = p.reasoning;
    s.action = p.action;
    e.steps.push_back(std::move(s));
    ExecResult r = env.try_execute(p.action);
    if (!r.ok()) {
      ++result.env_errors;
      obs = "Error: " + *r.error;
    } else {
      obs = r.observation;
    }
  }

  result.finished = env.done();
  result.success = env.done() && env.evaluate();
  e.success = result.success;
  return result;
}

/// Store-aware episode: renders the website's memory and, when enabled,
/// registers its workflows as macro actions.
inline EpisodeResult run_episode(Environment& env, const TaskSpec& task,
                                 LmClient& lm, const WorkflowStore& store,
                                 const AgentConfig& cfg = {}) {
  std::string memory_text = store.render_memory(task.website);
  if (cfg.enable_macro_actions) {
    MacroSet macros = register_macro_actions(store, task.website);
    return run_episode(env, task, lm, memory_text, cfg, &macros);
  }
  return run_episode(env, task, lm, memory_text, cfg, nullptr);
}

}  // namespace awm
