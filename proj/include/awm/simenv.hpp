#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "awm/action.hpp"
#include "awm/errors.hpp"
#include "awm/judge.hpp"
#include "awm/serialize.hpp"
#include "awm/types.hpp"

namespace awm {

// ---------------------------------------------------------------------------
// Declarative site definition.
//
// A site is a set of pages with labeled elements plus a transition table.
// Navigation happens only through transitions (click/press/hover on a listed
// element); fill/type and select_option record values into the input map.
// Labels and transition effects may reference runtime values through
//   {input:ELEMENT_ID}   last value recorded for an element
//   {state:KEY}          current state entry
//   {lookup:TABLE:KEY}   site table lookup; KEY is itself resolved first
// which keeps every site a pure data object and every run replayable.
// ---------------------------------------------------------------------------

struct Element {
  std::string id;
  std::string role;  // link | button | textbox | select | text
  std::string label;
  std::vector<std::string> options;  // select only
};

struct Page {
  std::string name;
  std::vector<Element> elements;
};

struct Transition {
  std::string page;
  std::string element;
  std::string action;     // click | press | hover
  std::string key;        // press only; matched against the action argument
  std::string to;
  std::map<std::string, std::string> sets;  // state key -> value template
};

struct TaskCheck {
  std::string kind;   // message_contains | state_equals
  std::string key;    // state_equals only
  std::string value;
};

struct TaskTemplate {
  std::string template_id;
  std::string instruction;  // with {slot} holes
  std::map<std::string, std::vector<std::string>> slot_domains;
  std::map<std::string, std::string> derived;  // slot -> template over slots/lookups
  std::vector<Action> gold;                    // with {slot} holes in arg values
  TaskCheck check;
  std::string match_phrase;  // static instruction fragment unique to the template
};

struct SiteDef {
  std::string website;
  std::string start_page;
  std::map<std::string, std::map<std::string, std::string>> tables;
  std::vector<Page> pages;
  std::vector<Transition> transitions;
  std::vector<TaskTemplate> templates;
};

struct TaskSpec {
  std::string id;
  std::string website;
  std::string template_id;
  std::string instruction;
  std::map<std::string, std::string> slots;  // includes derived slots
  std::vector<Action> gold;
  TaskCheck check;
  std::string match_phrase;
};

namespace detail {

// Replaces every top-level {directive} in `s`. Unrecognized braces are kept
// verbatim. Lookup keys are resolved recursively before the table read.
inline std::string resolve_value(
    const std::string& s, const std::map<std::string, std::string>& inputs,
    const std::map<std::string, std::string>& state,
    const std::map<std::string, std::map<std::string, std::string>>& tables) {
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '{') {
      out += s[i++];
      continue;
    }
    int depth = 1;
    size_t j = i + 1;
    while (j < s.size() && depth > 0) {
      if (s[j] == '{') ++depth;
      if (s[j] == '}') --depth;
      ++j;
    }
    if (depth != 0) {  // unbalanced; keep the rest verbatim
      out += s.substr(i);
      break;
    }
    std::string inner = s.substr(i + 1, j - i - 2);
    if (inner.rfind("input:", 0) == 0) {
      auto it = inputs.find(inner.substr(6));
      out += it == inputs.end() ? "" : it->second;
    } else if (inner.rfind("state:", 0) == 0) {
      auto it = state.find(inner.substr(6));
      out += it == state.end() ? "" : it->second;
    } else if (inner.rfind("lookup:", 0) == 0) {
      std::string rest = inner.substr(7);
      size_t colon = rest.find(':');
      if (colon == std::string::npos) {
        out += "{" + inner + "}";
      } else {
        std::string table = rest.substr(0, colon);
        std::string k = resolve_value(rest.substr(colon + 1), inputs, state, tables);
        auto t = tables.find(table);
        if (t != tables.end()) {
          auto v = t->second.find(k);
          out += v == t->second.end() ? "" : v->second;
        }
      }
    } else {
      out += "{" + inner + "}";
    }
    i = j;
  }
  return out;
}

inline std::string subst_slots(std::string s,
                               const std::map<std::string, std::string>& slots) {
  for (const auto& [name, value] : slots) {
    const std::string hole = "{" + name + "}";
    size_t pos = 0;
    while ((pos = s.find(hole, pos)) != std::string::npos) {
      s.replace(pos, hole.size(), value);
      pos += value.size();
    }
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Runtime.
// ---------------------------------------------------------------------------

/// Outcome of one action: the observation to show next, plus the error text
/// when the action was invalid (in which case the world did not change).
struct ExecResult {
  std::string observation;
  std::optional<std::string> error;
  bool ok() const { return !error.has_value(); }
};

class Environment {
 public:
  explicit Environment(SiteDef site) : site_(std::move(site)) {
    for (const auto& p : site_.pages) page_index_[p.name] = &p - site_.pages.data();
    if (page_index_.find(site_.start_page) == page_index_.end()) {
      throw SchemaError("start page '" + site_.start_page + "' is not defined");
    }
  }

  const SiteDef& site() const { return site_; }

  std::string reset(const TaskSpec& task) {
    task_ = task;
    page_ = site_.start_page;
    state_.clear();
    inputs_.clear();
    done_ = false;
    last_message_.clear();
    steps_ = 0;
    return observation();
  }

  /// Renders the current page: a "Page:" line then one "[id] role 'label'"
  /// line per element, with label templates resolved against live state.
  std::string observation() const {
    const Page& p = page();
    std::string out = "Page: " + p.name;
    for (const auto& el : p.elements) {
      out += "\n[" + el.id + "] " + el.role + " '" +
             detail::resolve_value(el.label, inputs_, state_, site_.tables) + "'";
    }
    return out;
  }

  bool done() const { return done_; }
  int steps() const { return steps_; }
  const std::string& last_message() const { return last_message_; }
  const std::string& current_page() const { return page_; }
  const std::map<std::string, std::string>& state() const { return state_; }

  /// Applies one action and returns the resulting observation. Invalid
  /// actions throw EnvError and leave the world unchanged.
  std::string execute(const Action& action) {
    std::string obs = execute_impl(action);
    ++steps_;
    return obs;
  }

  /// Non-throwing variant: an invalid action reports the error as data and
  /// hands back the unchanged observation, so callers never need to abort.
  ExecResult try_execute(const Action& action) {
    try {
      return ExecResult{execute(action), std::nullopt};
    } catch (const EnvError& err) {
      return ExecResult{observation(), err.what()};
    }
  }

 private:
  // Throws before any mutation, so a failed action leaves the world intact.
  std::string execute_impl(const Action& action) {
    if (done_) throw EnvError("the episode has ended");
    const std::string& name = action.name;

    if (name == "send_msg_to_user" || name == "stop") {
      if (!action.args.empty()) last_message_ = action.args[0].value;
      done_ = true;
      return observation();
    }
    if (name == "fill" || name == "type") {
      const Element& el = require_element(action.args.at(0).value);
      if (el.role != "textbox") {
        throw EnvError("element [" + el.id + "] is not a textbox");
      }
      inputs_[el.id] = action.args.at(1).value;
      return observation();
    }
    if (name == "select_option") {
      const Element& el = require_element(action.args.at(0).value);
      if (el.role != "select") {
        throw EnvError("element [" + el.id + "] is not a select");
      }
      const std::string& opt = action.args.at(1).value;
      if (std::find(el.options.begin(), el.options.end(), opt) == el.options.end()) {
        throw EnvError("'" + opt + "' is not an option of [" + el.id + "]");
      }
      inputs_[el.id] = opt;
      return observation();
    }
    if (name == "click") {
      const Element& el = require_element(action.args.at(0).value);
      // Clicking a form control focuses it: a no-op that keeps recorded
      // click-then-type traces replayable.
      if (el.role == "textbox" || el.role == "select") return observation();
      if (el.role != "link" && el.role != "button") {
        throw EnvError("element [" + el.id + "] is not clickable");
      }
      const Transition* t = find_transition(el.id, "click", "");
      if (!t) throw EnvError("clicking [" + el.id + "] has no effect");
      apply(*t);
      return observation();
    }
    if (name == "press") {
      const Element& el = require_element(action.args.at(0).value);
      const std::string& k = action.args.at(1).value;
      const Transition* t = find_transition(el.id, "press", k);
      if (!t) {
        throw EnvError("pressing '" + k + "' on [" + el.id + "] has no effect");
      }
      apply(*t);
      return observation();
    }
    if (name == "hover") {
      const Element& el = require_element(action.args.at(0).value);
      const Transition* t = find_transition(el.id, "hover", "");
      if (t) apply(*t);
      return observation();
    }
    throw EnvError("action '" + name + "' is not supported here");
  }

 public:
  /// Evaluates the bound task's check against the finished episode.
  bool evaluate() const {
    if (!task_) throw UnknownTaskError("no task bound; call reset first");
    const TaskCheck& c = task_->check;
    if (c.kind == "message_contains") {
      return last_message_.find(c.value) != std::string::npos;
    }
    if (c.kind == "state_equals") {
      auto it = state_.find(c.key);
      return it != state_.end() && it->second == c.value;
    }
    throw SchemaError("unknown check kind: " + c.kind);
  }

 private:
  const Page& page() const { return site_.pages[page_index_.at(page_)]; }

  const Element& require_element(const std::string& id) const {
    for (const auto& el : page().elements) {
      if (el.id == id) return el;
    }
    throw EnvError("no element [" + id + "] on page '" + page_ + "'");
  }

  const Transition* find_transition(const std::string& element,
                                    const std::string& action,
                                    const std::string& key) const {
    for (const auto& t : site_.transitions) {
      if (t.page != page_ || t.element != element || t.action != action) continue;
      if (action == "press" && t.key != key) continue;
      return &t;
    }
    return nullptr;
  }

  // All effects are computed from the pre-transition world, then applied.
  void apply(const Transition& t) {
    std::map<std::string, std::string> updates;
    for (const auto& [k, v] : t.sets) {
      updates[k] = detail::resolve_value(v, inputs_, state_, site_.tables);
    }
    for (auto& [k, v] : updates) state_[k] = std::move(v);
    if (page_index_.find(t.to) == page_index_.end()) {
      throw SchemaError("transition targets unknown page '" + t.to + "'");
    }
    page_ = t.to;
  }

  SiteDef site_;
  std::map<std::string, size_t> page_index_;
  std::optional<TaskSpec> task_;
  std::string page_;
  std::map<std::string, std::string> state_;
  std::map<std::string, std::string> inputs_;
  bool done_ = false;
  std::string last_message_;
  int steps_ = 0;
};

// ---------------------------------------------------------------------------
// Task instantiation.
// ---------------------------------------------------------------------------

inline const TaskTemplate& find_template(const SiteDef& site,
                                         const std::string& template_id) {
  for (const auto& t : site.templates) {
    if (t.template_id == template_id) return t;
  }
  throw UnknownTaskError("site '" + site.website + "' has no template '" +
                         template_id + "'");
}

/// Builds a concrete task from a template and chosen base slot values.
/// Derived slots are computed from the base slots via the site tables, then
/// every {slot} hole in the instruction, gold actions, and check is filled.
inline TaskSpec instantiate_task(const SiteDef& site, const TaskTemplate& tmpl,
                                 std::map<std::string, std::string> slots,
                                 const std::string& task_id) {
  static const std::map<std::string, std::string> kNoInputs;
  for (int pass = 0; pass < 4; ++pass) {
    bool changed = false;
    for (const auto& [name, expr] : tmpl.derived) {
      std::string v = detail::subst_slots(expr, slots);
      v = detail::resolve_value(v, kNoInputs, kNoInputs, site.tables);
      auto it = slots.find(name);
      if (it == slots.end() || it->second != v) {
        slots[name] = v;
        changed = true;
      }
    }
    if (!changed) break;
  }

  TaskSpec task;
  task.id = task_id;
  task.website = site.website;
  task.template_id = tmpl.template_id;
  task.instruction = detail::subst_slots(tmpl.instruction, slots);
  task.slots = slots;
  for (const auto& a : tmpl.gold) {
    Action concrete = a;
    for (auto& arg : concrete.args) {
      arg.value = detail::subst_slots(arg.value, slots);
    }
    task.gold.push_back(std::move(concrete));
  }
  task.check = tmpl.check;
  task.check.value = detail::subst_slots(task.check.value, slots);
  task.check.key = detail::subst_slots(task.check.key, slots);
  task.match_phrase = tmpl.match_phrase;
  return task;
}

/// Deterministic suite: templates cycle round-robin and slot values are drawn
/// with a per-task mt19937 stream, so (site, n, seed) pins the exact tasks on
/// every platform.
inline std::vector<TaskSpec> generate_suite(const SiteDef& site, int n,
                                            unsigned seed = 7) {
  if (site.templates.empty()) {
    throw UnknownTaskError("site '" + site.website + "' defines no templates");
  }
  std::vector<TaskSpec> out;
  for (int i = 0; i < n; ++i) {
    const TaskTemplate& tmpl =
        site.templates[static_cast<size_t>(i) % site.templates.size()];
    std::mt19937 rng(seed + 1000003u * static_cast<unsigned>(i));
    std::map<std::string, std::string> slots;
    for (const auto& [name, domain] : tmpl.slot_domains) {
      slots[name] = domain[rng() % domain.size()];
    }
    out.push_back(instantiate_task(
        site, tmpl, std::move(slots),
        site.website + "-" + tmpl.template_id + "-" + std::to_string(i + 1)));
  }
  return out;
}

/// Suite over several sites: the first k_templates templates (sites in the
/// given order) each instantiated n_per_template times, interleaved so the
/// stream cycles template 1..k before repeating. Deterministic under seed.
inline std::vector<TaskSpec> generate_suite(const std::vector<SiteDef>& sites,
                                            int k_templates,
                                            int n_per_template,
                                            unsigned seed = 7) {
  std::vector<std::pair<const SiteDef*, const TaskTemplate*>> pool;
  for (const auto& site : sites) {
    for (const auto& tmpl : site.templates) pool.emplace_back(&site, &tmpl);
  }
  if (k_templates < 0 || static_cast<size_t>(k_templates) > pool.size()) {
    throw SchemaError("requested " + std::to_string(k_templates) +
                      " templates but only " + std::to_string(pool.size()) +
                      " are available");
  }
  std::vector<TaskSpec> out;
  std::vector<int> uses(static_cast<size_t>(k_templates), 0);
  for (int round = 0; round < n_per_template; ++round) {
    for (int t = 0; t < k_templates; ++t) {
      unsigned i = static_cast<unsigned>(out.size());
      const auto& [site, tmpl] = pool[static_cast<size_t>(t)];
      std::mt19937 rng(seed + 1000003u * i);
      std::map<std::string, std::string> slots;
      for (const auto& [name, domain] : tmpl->slot_domains) {
        slots[name] = domain[rng() % domain.size()];
      }
      int n = ++uses[static_cast<size_t>(t)];
      out.push_back(instantiate_task(*site, *tmpl, std::move(slots),
                                     site->website + "-" + tmpl->template_id +
                                         "-" + std::to_string(n)));
    }
  }
  return out;
}

/// Replays a task's gold solution and captures it as an experience, with the
/// pre-action observation as each step's state description.
inline Experience replay_solution(Environment& env, const TaskSpec& task) {
  Experience e;
  e.id = task.id;
  e.website = task.website;
  e.instruction = task.instruction;
  e.template_id = task.template_id;
  std::string obs = env.reset(task);
  for (const auto& a : task.gold) {
    Step s;
    s.observation = obs;
    s.state_desc = obs;
    s.action = a;
    obs = env.execute(a);
    e.steps.push_back(std::move(s));
  }
  e.success = env.evaluate();
  return e;
}

/// Ground-truth judgment of a finished trajectory against the task's check,
/// given the environment's final state. Mirrors Environment::evaluate for
/// callers holding only the recorded experience.
inline Judgment judge_oracle(
    const Experience& e, const TaskSpec& task,
    const std::map<std::string, std::string>& env_final_state) {
  const TaskCheck& c = task.check;
  bool ok = false;
  if (c.kind == "message_contains") {
    ok = terminal_message_of(e).find(c.value) != std::string::npos;
  } else if (c.kind == "state_equals") {
    auto it = env_final_state.find(c.key);
    ok = it != env_final_state.end() && it->second == c.value;
  } else {
    throw SchemaError("unknown check kind: " + c.kind);
  }
  return Judgment{ok, ok ? "oracle: success" : "oracle: failure",
                  JudgeKind::kOracle};
}

// ---------------------------------------------------------------------------
// Cross-template structure.
// ---------------------------------------------------------------------------

inline std::vector<std::string> signature_without_terminals(
    std::vector<std::string> signature) {
  signature.erase(std::remove_if(signature.begin(), signature.end(),
                                 [](const std::string& s) {
                                   return s == "stop" || s == "send_msg_to_user";
                                 }),
                  signature.end());
  return signature;
}

/// True when `a` is a proper prefix of `b`, ignoring terminal actions.
inline bool is_signature_prefix(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  auto sa = signature_without_terminals(a);
  auto sb = signature_without_terminals(b);
  if (sa.empty() || sa.size() >= sb.size()) return false;
  return std::equal(sa.begin(), sa.end(), sb.begin());
}

// ---------------------------------------------------------------------------
// JSON (sites and suites are data files).
// ---------------------------------------------------------------------------

inline nlohmann::json site_to_json(const SiteDef& site) {
  nlohmann::json j;
  j["website"] = site.website;
  j["start_page"] = site.start_page;
  j["tables"] = site.tables;
  j["pages"] = nlohmann::json::array();
  for (const auto& p : site.pages) {
    nlohmann::json pj;
    pj["name"] = p.name;
    pj["elements"] = nlohmann::json::array();
    for (const auto& el : p.elements) {
      nlohmann::json ej;
      ej["id"] = el.id;
      ej["role"] = el.role;
      ej["label"] = el.label;
      if (!el.options.empty()) ej["options"] = el.options;
      pj["elements"].push_back(ej);
    }
    j["pages"].push_back(pj);
  }
  j["transitions"] = nlohmann::json::array();
  for (const auto& t : site.transitions) {
    nlohmann::json tj;
    tj["page"] = t.page;
    tj["element"] = t.element;
    tj["action"] = t.action;
    if (!t.key.empty()) tj["key"] = t.key;
    tj["to"] = t.to;
    if (!t.sets.empty()) tj["sets"] = t.sets;
    j["transitions"].push_back(tj);
  }
  j["templates"] = nlohmann::json::array();
  for (const auto& t : site.templates) {
    nlohmann::json tj;
    tj["template_id"] = t.template_id;
    tj["instruction"] = t.instruction;
    tj["slot_domains"] = t.slot_domains;
    if (!t.derived.empty()) tj["derived"] = t.derived;
    tj["gold"] = nlohmann::json::array();
    for (const auto& a : t.gold) tj["gold"].push_back(action_to_json(a));
    tj["check"] = {{"kind", t.check.kind}};
    if (!t.check.key.empty()) tj["check"]["key"] = t.check.key;
    tj["check"]["value"] = t.check.value;
    tj["match_phrase"] = t.match_phrase;
    j["templates"].push_back(tj);
  }
  return j;
}

inline SiteDef site_from_json(const nlohmann::json& j) {
  if (!j.contains("website") || !j.contains("start_page") || !j.contains("pages")) {
    throw SchemaError("site definition needs website, start_page, and pages");
  }
  SiteDef site;
  site.website = j.at("website").get<std::string>();
  site.start_page = j.at("start_page").get<std::string>();
  if (j.contains("tables")) {
    site.tables =
        j.at("tables")
            .get<std::map<std::string, std::map<std::string, std::string>>>();
  }
  for (const auto& pj : j.at("pages")) {
    Page p;
    p.name = pj.at("name").get<std::string>();
    for (const auto& ej : pj.value("elements", nlohmann::json::array())) {
      Element el;
      el.id = ej.at("id").get<std::string>();
      el.role = ej.at("role").get<std::string>();
      el.label = ej.at("label").get<std::string>();
      if (ej.contains("options")) {
        el.options = ej.at("options").get<std::vector<std::string>>();
      }
      p.elements.push_back(std::move(el));
    }
    site.pages.push_back(std::move(p));
  }
  for (const auto& tj : j.value("transitions", nlohmann::json::array())) {
    Transition t;
    t.page = tj.at("page").get<std::string>();
    t.element = tj.at("element").get<std::string>();
    t.action = tj.at("action").get<std::string>();
    t.key = tj.value("key", "");
    t.to = tj.at("to").get<std::string>();
    if (tj.contains("sets")) {
      t.sets = tj.at("sets").get<std::map<std::string, std::string>>();
    }
    site.transitions.push_back(std::move(t));
  }
  for (const auto& tj : j.value("templates", nlohmann::json::array())) {
    TaskTemplate t;
    t.template_id = tj.at("template_id").get<std::string>();
    t.instruction = tj.at("instruction").get<std::string>();
    if (tj.contains("slot_domains")) {
      t.slot_domains =
          tj.at("slot_domains")
              .get<std::map<std::string, std::vector<std::string>>>();
    }
    if (tj.contains("derived")) {
      t.derived = tj.at("derived").get<std::map<std::string, std::string>>();
    }
    for (const auto& aj : tj.value("gold", nlohmann::json::array())) {
      t.gold.push_back(action_from_json(aj));
    }
    t.check.kind = tj.at("check").at("kind").get<std::string>();
    t.check.key = tj.at("check").value("key", "");
    t.check.value = tj.at("check").value("value", "");
    t.match_phrase = tj.value("match_phrase", "");
    site.templates.push_back(std::move(t));
  }
  return site;
}

inline nlohmann::json task_to_json(const TaskSpec& t) {
  nlohmann::json j;
  j["id"] = t.id;
  j["website"] = t.website;
  j["template_id"] = t.template_id;
  j["instruction"] = t.instruction;
  j["slots"] = t.slots;
  j["gold"] = nlohmann::json::array();
  for (const auto& a : t.gold) j["gold"].push_back(action_to_json(a));
  j["check"] = {{"kind", t.check.kind}};
  if (!t.check.key.empty()) j["check"]["key"] = t.check.key;
  j["check"]["value"] = t.check.value;
  if (!t.match_phrase.empty()) j["match_phrase"] = t.match_phrase;
  return j;
}

inline TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec t;
  t.id = j.at("id").get<std::string>();
  t.website = j.at("website").get<std::string>();
  t.template_id = j.at("template_id").get<std::string>();
  t.instruction = j.at("instruction").get<std::string>();
  if (j.contains("slots")) {
    t.slots = j.at("slots").get<std::map<std::string, std::string>>();
  }
  for (const auto& aj : j.value("gold", nlohmann::json::array())) {
    t.gold.push_back(action_from_json(aj));
  }
  t.check.kind = j.at("check").at("kind").get<std::string>();
  t.check.key = j.at("check").value("key", "");
  t.check.value = j.at("check").value("value", "");
  t.match_phrase = j.value("match_phrase", "");
  return t;
}

inline std::string suite_to_json_text(const std::vector<TaskSpec>& tasks) {
  nlohmann::json j;
  j["tasks"] = nlohmann::json::array();
  for (const auto& t : tasks) j["tasks"].push_back(task_to_json(t));
  return j.dump(2) + "\n";
}

inline std::vector<TaskSpec> suite_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<TaskSpec> out;
  for (const auto& tj : j.at("tasks")) out.push_back(task_from_json(tj));
  return out;
}

// ---------------------------------------------------------------------------
// Built-in sites.
// ---------------------------------------------------------------------------

namespace detail {

inline Action act(const std::string& name, std::vector<std::string> args) {
  Action a;
  a.name = name;
  for (auto& v : args) a.args.push_back(ActionArg{std::move(v), true});
  return a;
}

}  // namespace detail

inline SiteDef builtin_map_site() {
  using detail::act;
  SiteDef s;
  s.website = "map";
  s.start_page = "home";
  s.tables["addresses"] = {{"central park", "59th St and 5th Ave"},
                           {"city hall", "260 Broadway"},
                           {"union square", "1 Union Square West"}};
  s.tables["zips"] = {{"central park", "10024"},
                      {"city hall", "10007"},
                      {"union square", "10003"}};
  s.tables["times"] = {
      {"airport|museum|walk", "4 hours 10 minutes"},
      {"airport|museum|drive", "32 minutes"},
      {"airport|museum|bike", "1 hour 55 minutes"},
      {"airport|stadium|walk", "3 hours 5 minutes"},
      {"airport|stadium|drive", "24 minutes"},
      {"airport|stadium|bike", "1 hour 20 minutes"},
      {"downtown|museum|walk", "55 minutes"},
      {"downtown|museum|drive", "12 minutes"},
      {"downtown|museum|bike", "25 minutes"},
      {"downtown|stadium|walk", "1 hour 30 minutes"},
      {"downtown|stadium|drive", "18 minutes"},
      {"downtown|stadium|bike", "40 minutes"}};
  s.tables["dists"] = {
      {"airport|museum|walk", "18.2 km"},  {"airport|museum|drive", "21.5 km"},
      {"airport|museum|bike", "19.0 km"},  {"airport|stadium|walk", "13.6 km"},
      {"airport|stadium|drive", "16.1 km"}, {"airport|stadium|bike", "14.2 km"},
      {"downtown|museum|walk", "4.1 km"},  {"downtown|museum|drive", "5.3 km"},
      {"downtown|museum|bike", "4.4 km"},  {"downtown|stadium|walk", "6.8 km"},
      {"downtown|stadium|drive", "8.0 km"}, {"downtown|stadium|bike", "7.1 km"}};

  s.pages = {
      {"home",
       {{"1", "textbox", "Search location", {}},
        {"2", "button", "Search", {}},
        {"3", "link", "Directions", {}},
        {"4", "link", "Map home", {}}}},
      {"results",
       {{"10", "text", "Result: {state:place}", {}},
        {"11", "link", "Open details", {}},
        {"12", "link", "Directions", {}},
        {"13", "link", "Map home", {}}}},
      {"details",
       {{"20", "text", "Name: {state:place}", {}},
        {"21", "text", "Address: {lookup:addresses:{state:place}}", {}},
        {"22", "text", "Zip: {lookup:zips:{state:place}}", {}},
        {"23", "link", "Back to results", {}},
        {"24", "link", "Map home", {}}}},
      {"directions",
       {{"30", "textbox", "From", {}},
        {"31", "textbox", "To", {}},
        {"32", "select", "Mode", {"walk", "drive", "bike"}},
        {"33", "button", "Get route", {}},
        {"34", "link", "Map home", {}}}},
      {"route",
       {{"40", "text", "Time: {state:time}", {}},
        {"41", "text", "Distance: {state:dist}", {}},
        {"42", "link", "Map home", {}}}}};

  s.transitions = {
      {"home", "2", "click", "", "results", {{"place", "{input:1}"}}},
      {"home", "3", "click", "", "directions", {}},
      {"home", "4", "click", "", "home", {}},
      {"results", "11", "click", "", "details", {}},
      {"results", "12", "click", "", "directions", {}},
      {"results", "13", "click", "", "home", {}},
      {"details", "23", "click", "", "results", {}},
      {"details", "24", "click", "", "home", {}},
      {"directions",
       "33",
       "click",
       "",
       "route",
       {{"from", "{input:30}"},
        {"to", "{input:31}"},
        {"mode", "{input:32}"},
        {"time", "{lookup:times:{input:30}|{input:31}|{input:32}}"},
        {"dist", "{lookup:dists:{input:30}|{input:31}|{input:32}}"}}},
      {"directions", "34", "click", "", "home", {}},
      {"route", "42", "click", "", "home", {}}};

  TaskTemplate find_place;
  find_place.template_id = "find_place";
  find_place.instruction = "Find {place} on the map.";
  find_place.slot_domains["place"] = {"central park", "city hall", "union square"};
  find_place.gold = {act("fill", {"1", "{place}"}), act("click", {"2"}),
                     act("send_msg_to_user", {"Found {place}."})};
  find_place.check = {"message_contains", "", "Found {place}."};
  find_place.match_phrase = "on the map";

  TaskTemplate get_zip;
  get_zip.template_id = "get_zip_code";
  get_zip.instruction = "What is the zip code of {place}?";
  get_zip.slot_domains["place"] = {"central park", "city hall", "union square"};
  get_zip.derived["zip"] = "{lookup:zips:{place}}";
  get_zip.gold = {act("fill", {"1", "{place}"}), act("click", {"2"}),
                  act("click", {"11"}), act("send_msg_to_user", {"{zip}"})};
  get_zip.check = {"message_contains", "", "{zip}"};
  get_zip.match_phrase = "zip code";

  TaskTemplate get_address;
  get_address.template_id = "get_address";
  get_address.instruction = "What is the street address of {place}?";
  get_address.slot_domains["place"] = {"central park", "city hall",
                                       "union square"};
  get_address.derived["addr"] = "{lookup:addresses:{place}}";
  get_address.gold = {act("fill", {"1", "{place}"}), act("click", {"2"}),
                      act("click", {"11"}), act("send_msg_to_user", {"{addr}"})};
  get_address.check = {"message_contains", "", "{addr}"};
  get_address.match_phrase = "street address";

  TaskTemplate travel_time;
  travel_time.template_id = "travel_time";
  travel_time.instruction =
      "How long does it take to {mode} from {from_loc} to {to_loc}?";
  travel_time.slot_domains["from_loc"] = {"airport", "downtown"};
  travel_time.slot_domains["to_loc"] = {"museum", "stadium"};
  travel_time.slot_domains["mode"] = {"walk", "drive", "bike"};
  travel_time.derived["time"] = "{lookup:times:{from_loc}|{to_loc}|{mode}}";
  travel_time.gold = {act("click", {"3"}),
                      act("fill", {"30", "{from_loc}"}),
                      act("fill", {"31", "{to_loc}"}),
                      act("select_option", {"32", "{mode}"}),
                      act("click", {"33"}),
                      act("send_msg_to_user", {"{time}"})};
  travel_time.check = {"message_contains", "", "{time}"};
  travel_time.match_phrase = "How long does it take";

  TaskTemplate travel_distance;
  travel_distance.template_id = "travel_distance";
  travel_distance.instruction =
      "What is the travel distance from {from_loc} to {to_loc} when you {mode}?";
  travel_distance.slot_domains["from_loc"] = {"airport", "downtown"};
  travel_distance.slot_domains["to_loc"] = {"museum", "stadium"};
  travel_distance.slot_domains["mode"] = {"walk", "drive", "bike"};
  travel_distance.derived["dist"] = "{lookup:dists:{from_loc}|{to_loc}|{mode}}";
  travel_distance.gold = {act("click", {"3"}),
                          act("type", {"30", "{from_loc}"}),
                          act("type", {"31", "{to_loc}"}),
                          act("select_option", {"32", "{mode}"}),
                          act("click", {"33"}),
                          act("send_msg_to_user", {"{dist}"})};
  travel_distance.check = {"message_contains", "", "{dist}"};
  travel_distance.match_phrase = "travel distance";

  s.templates = {find_place, get_zip, get_address, travel_time, travel_distance};
  return s;
}

inline SiteDef builtin_shop_site() {
  using detail::act;
  SiteDef s;
  s.website = "shop";
  s.start_page = "home";
  s.tables["prices"] = {{"laptop", "$999.00"},
                        {"keyboard", "$49.00"},
                        {"monitor", "$199.00"}};
  s.tables["order_status"] = {{"1001", "shipped"},
                              {"1002", "processing"},
                              {"1003", "delivered"}};

  s.pages = {
      {"home",
       {{"1", "textbox", "Search products", {}},
        {"2", "button", "Search", {}},
        {"3", "link", "Orders", {}},
        {"4", "link", "Shop home", {}}}},
      {"results",
       {{"10", "text", "Results for {state:query}", {}},
        {"11", "link", "First result", {}},
        {"12", "select", "Sort by", {"price", "rating"}},
        {"13", "button", "Apply sort", {}},
        {"14", "link", "Shop home", {}}}},
      {"sorted",
       {{"20", "text", "Results for {state:query} sorted by {state:sort}", {}},
        {"21", "link", "First result", {}},
        {"22", "link", "Shop home", {}}}},
      {"product",
       {{"30", "text", "Product: {state:query}", {}},
        {"31", "text", "Price: {lookup:prices:{state:query}}", {}},
        {"32", "button", "Add to cart", {}},
        {"33", "link", "Shop home", {}}}},
      {"cart_confirm",
       {{"40", "text", "Added {state:cart} to cart", {}},
        {"41", "link", "Shop home", {}}}},
      {"orders",
       {{"50", "textbox", "Order number", {}},
        {"51", "button", "Look up", {}},
        {"52", "link", "Shop home", {}}}},
      {"order_status",
       {{"60", "text", "Order {state:order_id}: {state:status}", {}},
        {"61", "link", "Shop home", {}}}}};

  s.transitions = {
      {"home", "2", "click", "", "results", {{"query", "{input:1}"}}},
      {"home", "3", "click", "", "orders", {}},
      {"home", "4", "click", "", "home", {}},
      {"results", "11", "click", "", "product", {}},
      {"results", "13", "click", "", "sorted", {{"sort", "{input:12}"}}},
      {"results", "14", "click", "", "home", {}},
      {"sorted", "21", "click", "", "product", {}},
      {"sorted", "22", "click", "", "home", {}},
      {"product", "32", "click", "", "cart_confirm", {{"cart", "{state:query}"}}},
      {"product", "33", "click", "", "home", {}},
      {"cart_confirm", "41", "click", "", "home", {}},
      {"orders",
       "51",
       "click",
       "",
       "order_status",
       {{"order_id", "{input:50}"},
        {"status", "{lookup:order_status:{input:50}}"}}},
      {"orders", "52", "click", "", "home", {}},
      {"order_status", "61", "click", "", "home", {}}};

  TaskTemplate search;
  search.template_id = "search";
  search.instruction = "Search for {item} in the store.";
  search.slot_domains["item"] = {"laptop", "keyboard", "monitor"};
  search.gold = {act("fill", {"1", "{item}"}), act("click", {"2"}),
                 act("send_msg_to_user", {"Searched for {item}."})};
  search.check = {"message_contains", "", "Searched for {item}."};
  search.match_phrase = "in the store";

  TaskTemplate search_sort;
  search_sort.template_id = "search_and_sort";
  search_sort.instruction = "Search for {item} and sort the results by {sort}.";
  search_sort.slot_domains["item"] = {"laptop", "keyboard", "monitor"};
  search_sort.slot_domains["sort"] = {"price", "rating"};
  search_sort.gold = {act("fill", {"1", "{item}"}), act("click", {"2"}),
                      act("select_option", {"12", "{sort}"}),
                      act("click", {"13"}),
                      act("send_msg_to_user", {"Sorted by {sort}."})};
  search_sort.check = {"message_contains", "", "Sorted by {sort}."};
  search_sort.match_phrase = "sort the results";

  TaskTemplate price;
  price.template_id = "product_price";
  price.instruction = "How much does {item} cost?";
  price.slot_domains["item"] = {"laptop", "keyboard", "monitor"};
  price.derived["price"] = "{lookup:prices:{item}}";
  price.gold = {act("fill", {"1", "{item}"}), act("click", {"2"}),
                act("click", {"11"}), act("send_msg_to_user", {"{price}"})};
  price.check = {"message_contains", "", "{price}"};
  price.match_phrase = "How much does";

  TaskTemplate add_cart;
  add_cart.template_id = "add_to_cart";
  add_cart.instruction = "Add {item} to the shopping cart.";
  add_cart.slot_domains["item"] = {"laptop", "keyboard", "monitor"};
  add_cart.gold = {act("fill", {"1", "{item}"}), act("click", {"2"}),
                   act("click", {"11"}), act("click", {"32"}),
                   act("send_msg_to_user", {"Added {item} to the cart."})};
  add_cart.check = {"state_equals", "cart", "{item}"};
  add_cart.match_phrase = "shopping cart";

  TaskTemplate order;
  order.template_id = "order_status";
  order.instruction = "What is the status of order {order_id}?";
  order.slot_domains["order_id"] = {"1001", "1002", "1003"};
  order.derived["status"] = "{lookup:order_status:{order_id}}";
  order.gold = {act("click", {"3"}), act("fill", {"50", "{order_id}"}),
                act("click", {"51"}), act("send_msg_to_user", {"{status}"})};
  order.check = {"message_contains", "", "{status}"};
  order.match_phrase = "status of order";

  s.templates = {search, search_sort, price, add_cart, order};
  return s;
}

inline SiteDef builtin_forum_site() {
  using detail::act;
  SiteDef s;
  s.website = "forum";
  s.start_page = "home";
  s.tables["post_titles"] = {{"news", "Election results"},
                             {"funny", "Cat pictures"},
                             {"science", "Mars landing"}};
  s.tables["reps"] = {{"alice", "1200"}, {"bob", "340"}, {"carol", "87"}};

  s.pages = {
      {"home",
       {{"1", "link", "All forums", {}},
        {"2", "textbox", "Search posts", {}},
        {"3", "link", "Submit post", {}},
        {"4", "link", "Users", {}},
        {"5", "link", "Forum home", {}}}},
      {"forums",
       {{"10", "select", "Choose forum", {"news", "funny", "science"}},
        {"11", "button", "Open forum", {}},
        {"12", "link", "Forum home", {}}}},
      {"forum",
       {{"20", "text", "Forum: {state:forum}", {}},
        {"21", "link", "First post", {}},
        {"22", "link", "Forum home", {}}}},
      {"post",
       {{"30", "text", "Post: {lookup:post_titles:{state:forum}}", {}},
        {"31", "textbox", "Comment", {}},
        {"32", "button", "Reply", {}},
        {"33", "link", "Forum home", {}}}},
      {"comment_done",
       {{"40", "text", "Comment posted: {state:comment}", {}},
        {"41", "link", "Forum home", {}}}},
      {"search_results",
       {{"50", "text", "Posts matching {state:query}", {}},
        {"51", "link", "Forum home", {}}}},
      {"submit",
       {{"60", "textbox", "Title", {}},
        {"61", "select", "Post to", {"news", "funny", "science"}},
        {"62", "button", "Create post", {}},
        {"63", "link", "Forum home", {}}}},
      {"post_created",
       {{"70", "text", "Created {state:post_title} in {state:post_forum}", {}},
        {"71", "link", "Forum home", {}}}},
      {"users",
       {{"80", "textbox", "Username", {}},
        {"81", "button", "Find user", {}},
        {"82", "link", "Forum home", {}}}},
      {"user",
       {{"90", "link", "{state:user}", {}},
        {"91", "link", "Forum home", {}}}},
      {"user_rep",
       {{"95", "text", "Reputation of {state:user}: {lookup:reps:{state:user}}", {}},
        {"96", "link", "Forum home", {}}}}};

  s.transitions = {
      {"home", "1", "click", "", "forums", {}},
      {"home", "2", "press", "Enter", "search_results", {{"query", "{input:2}"}}},
      {"home", "3", "click", "", "submit", {}},
      {"home", "4", "click", "", "users", {}},
      {"home", "5", "click", "", "home", {}},
      {"forums", "11", "click", "", "forum", {{"forum", "{input:10}"}}},
      {"forums", "12", "click", "", "home", {}},
      {"forum", "21", "click", "", "post", {}},
      {"forum", "22", "click", "", "home", {}},
      {"post", "32", "click", "", "comment_done", {{"comment", "{input:31}"}}},
      {"post", "33", "click", "", "home", {}},
      {"comment_done", "41", "click", "", "home", {}},
      {"search_results", "51", "click", "", "home", {}},
      {"submit",
       "62",
       "click",
       "",
       "post_created",
       {{"post_title", "{input:60}"}, {"post_forum", "{input:61}"}}},
      {"submit", "63", "click", "", "home", {}},
      {"post_created", "71", "click", "", "home", {}},
      {"users", "81", "click", "", "user", {{"user", "{input:80}"}}},
      {"users", "82", "click", "", "home", {}},
      {"user", "90", "hover", "", "user_rep", {}},
      {"user", "91", "click", "", "home", {}},
      {"user_rep", "96", "click", "", "home", {}}};

  TaskTemplate open_forum;
  open_forum.template_id = "open_forum";
  open_forum.instruction = "Navigate to the {forum} forum.";
  open_forum.slot_domains["forum"] = {"news", "funny", "science"};
  open_forum.gold = {act("click", {"1"}), act("select_option", {"10", "{forum}"}),
                     act("click", {"11"}),
                     act("send_msg_to_user", {"Opened {forum}."})};
  open_forum.check = {"message_contains", "", "Opened {forum}."};
  open_forum.match_phrase = "Navigate to the";

  TaskTemplate comment;
  comment.template_id = "comment_post";
  comment.instruction =
      "Reply to the first post in the {forum} forum with {text}.";
  comment.slot_domains["forum"] = {"news", "funny", "science"};
  comment.slot_domains["text"] = {"Great point", "I disagree", "Nice read"};
  comment.gold = {act("click", {"1"}),
                  act("select_option", {"10", "{forum}"}),
                  act("click", {"11"}),
                  act("click", {"21"}),
                  act("fill", {"31", "{text}"}),
                  act("click", {"32"}),
                  act("send_msg_to_user", {"Posted the reply."})};
  comment.check = {"state_equals", "comment", "{text}"};
  comment.match_phrase = "Reply to the first post";

  TaskTemplate search_posts;
  search_posts.template_id = "search_posts";
  search_posts.instruction = "Search the forum for posts about {query}.";
  search_posts.slot_domains["query"] = {"rockets", "recipes", "movies"};
  search_posts.gold = {act("fill", {"2", "{query}"}),
                       act("press", {"2", "Enter"}),
                       act("send_msg_to_user", {"Searched for {query}."})};
  search_posts.check = {"message_contains", "", "Searched for {query}."};
  search_posts.match_phrase = "posts about";

  TaskTemplate submit_post;
  submit_post.template_id = "submit_post";
  submit_post.instruction = "Create a post titled {title} in the {forum} forum.";
  submit_post.slot_domains["title"] = {"Hello world", "Weekly thread", "Q and A"};
  submit_post.slot_domains["forum"] = {"news", "funny", "science"};
  submit_post.gold = {act("click", {"3"}), act("fill", {"60", "{title}"}),
                      act("select_option", {"61", "{forum}"}),
                      act("click", {"62"}),
                      act("send_msg_to_user", {"Created {title}."})};
  submit_post.check = {"state_equals", "post_title", "{title}"};
  submit_post.match_phrase = "Create a post titled";

  TaskTemplate reputation;
  reputation.template_id = "user_reputation";
  reputation.instruction = "What is the reputation of user {user}?";
  reputation.slot_domains["user"] = {"alice", "bob", "carol"};
  reputation.derived["rep"] = "{lookup:reps:{user}}";
  reputation.gold = {act("click", {"4"}), act("fill", {"80", "{user}"}),
                     act("click", {"81"}), act("hover", {"90"}),
                     act("stop", {"{rep}"})};
  reputation.check = {"message_contains", "", "{rep}"};
  reputation.match_phrase = "reputation of user";

  s.templates = {open_forum, comment, search_posts, submit_post, reputation};
  return s;
}

inline std::vector<SiteDef> builtin_sites() {
  return {builtin_map_site(), builtin_shop_site(), builtin_forum_site()};
}

inline SiteDef builtin_site(const std::string& website) {
  for (auto& s : builtin_sites()) {
    if (s.website == website) return s;
  }
  throw UnknownTaskError("no built-in site named '" + website + "'");
}

}  // namespace awm
