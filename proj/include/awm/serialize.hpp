#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "awm/errors.hpp"
#include "awm/types.hpp"

namespace awm {

// --- JSON form of actions -------------------------------------------------
//
// Quoted arguments serialize as JSON strings and bare integer arguments as
// JSON numbers, so fill('12', ...) and fill(12, ...) stay distinguishable
// across a round trip. Bare non-numeric arguments use the explicit object
// form {"value": ..., "quoted": false}.

inline nlohmann::json action_to_json(const Action& a) {
  nlohmann::json args = nlohmann::json::array();
  for (const auto& arg : a.args) {
    if (arg.quoted) {
      args.push_back(arg.value);
    } else if (arg.is_quoted_integer() ||
               (!arg.value.empty() &&
                std::all_of(arg.value.begin(), arg.value.end(), [](unsigned char c) {
                  return std::isdigit(c);
                }))) {
      args.push_back(std::stoll(arg.value));
    } else {
      args.push_back({{"value", arg.value}, {"quoted", false}});
    }
  }
  return {{"name", a.name}, {"args", args}};
}

inline Action action_from_json(const nlohmann::json& j) {
  if (!j.contains("name")) throw SchemaError("action record missing name");
  Action a;
  a.name = j.at("name").get<std::string>();
  if (j.contains("args")) {
    for (const auto& item : j.at("args")) {
      if (item.is_string()) {
        a.args.emplace_back(item.get<std::string>(), true);
      } else if (item.is_number_integer()) {
        a.args.emplace_back(std::to_string(item.get<long long>()), false);
      } else if (item.is_object()) {
        a.args.emplace_back(item.at("value").get<std::string>(),
                            item.value("quoted", true));
      } else {
        throw SchemaError("unsupported action arg encoding");
      }
    }
  }
  return a;
}

// --- Experience records (newline-delimited JSON) ---------------------------

inline nlohmann::json step_to_json(const Step& s) {
  nlohmann::json j;
  j["observation"] = s.observation;
  if (s.state_desc) j["state_desc"] = *s.state_desc;
  if (s.html) j["html"] = *s.html;
  if (s.reasoning) j["reasoning"] = *s.reasoning;
  j["action"] = action_to_json(s.action);
  return j;
}

inline Step step_from_json(const nlohmann::json& j) {
  Step s;
  s.observation = j.value("observation", std::string());
  if (j.contains("state_desc")) s.state_desc = j.at("state_desc").get<std::string>();
  if (j.contains("html")) s.html = j.at("html").get<std::string>();
  if (j.contains("reasoning")) s.reasoning = j.at("reasoning").get<std::string>();
  if (!j.contains("action")) throw SchemaError("step record missing action");
  s.action = action_from_json(j.at("action"));
  return s;
}

inline nlohmann::json experience_to_json(const Experience& e) {
  nlohmann::json j;
  j["id"] = e.id;
  j["website"] = e.website;
  j["instruction"] = e.instruction;
  if (e.template_id) j["template_id"] = *e.template_id;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : e.steps) steps.push_back(step_to_json(s));
  j["steps"] = steps;
  if (e.success) j["success"] = *e.success;
  return j;
}

inline Experience experience_from_json(const nlohmann::json& j) {
  for (const char* field : {"id", "website", "instruction"}) {
    if (!j.contains(field)) {
      throw SchemaError(std::string("experience record missing ") + field);
    }
  }
  Experience e;
  e.id = j.at("id").get<std::string>();
  e.website = j.at("website").get<std::string>();
  if (e.website.empty()) throw SchemaError("experience website is empty");
  e.instruction = j.at("instruction").get<std::string>();
  if (j.contains("template_id")) e.template_id = j.at("template_id").get<std::string>();
  if (j.contains("steps")) {
    for (const auto& s : j.at("steps")) e.steps.push_back(step_from_json(s));
  }
  if (j.contains("success")) e.success = j.at("success").get<bool>();
  return e;
}

inline std::string serialize_experience(const Experience& e) {
  return experience_to_json(e).dump();
}

inline Experience parse_experience(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(std::string("bad experience record: ") + ex.what());
  }
  return experience_from_json(j);
}

/// One experience per line, UTF-8.
inline std::string serialize_experiences(const std::vector<Experience>& es) {
  std::string out;
  for (const auto& e : es) {
    out += serialize_experience(e);
    out += "\n";
  }
  return out;
}

inline std::vector<Experience> parse_experiences(const std::string& text) {
  std::vector<Experience> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    out.push_back(parse_experience(line));
  }
  return out;
}

// --- Workflow text format ---------------------------------------------------
//
// A workflow begins with `## <website>: <title>`; a blank line separates
// workflows. Action lines are bare name('arg', ...) calls. Any other
// non-empty line is state/reasoning text attached to the following action:
// the line directly above an action is its reasoning, earlier pending lines
// join into the state description.

inline std::string render_workflow(const Workflow& w) {
  std::string out = "## " + w.website + ": " + w.description + "\n";
  for (const auto& step : w.steps) {
    if (step.state_desc && !step.state_desc->empty()) {
      out += *step.state_desc + "\n";
    }
    if (step.reasoning && !step.reasoning->empty()) {
      out += *step.reasoning + "\n";
    }
    if (w.format == WorkflowFormat::kText && step.action_text) {
      out += *step.action_text + "\n";
    } else {
      out += render_action(step.action) + "\n";
    }
  }
  return out;
}

inline Workflow parse_workflow(const std::string& text,
                               const std::string& website_hint = "") {
  std::istringstream in(detail::unescape_typeset(text));
  std::string line;

  std::string header;
  while (std::getline(in, line)) {
    if (!detail::trim(line).empty()) {
      header = detail::trim(line);
      break;
    }
  }
  if (header.rfind("## ", 0) != 0) {
    throw HeaderError("workflow block has no '## ' header");
  }
  std::string header_body = detail::trim(header.substr(3));
  std::string header_website, title;
  size_t colon = header_body.find(": ");
  if (colon != std::string::npos) {
    header_website = detail::trim(header_body.substr(0, colon));
    title = detail::trim(header_body.substr(colon + 2));
  } else {
    title = header_body;
  }

  Workflow w;
  w.website = website_hint.empty() ? header_website : website_hint;
  w.description = title;
  w.format = WorkflowFormat::kCode;

  std::vector<std::string> pending;
  bool saw_body_line = false;
  auto flush_step = [&](const Action& action) {
    WorkflowStep step;
    step.action = action;
    if (!pending.empty()) {
      step.reasoning = pending.back();
      if (pending.size() > 1) {
        std::string state;
        for (size_t i = 0; i + 1 < pending.size(); ++i) {
          if (i) state += "\n";
          state += pending[i];
        }
        step.state_desc = state;
      }
      pending.clear();
    }
    w.steps.push_back(std::move(step));
  };

  while (std::getline(in, line)) {
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    saw_body_line = true;
    try {
      Action a = parse_action(t);
      flush_step(a);
      continue;
    } catch (const Error&) {
      // not an action line
    }
    pending.push_back(t);
  }

  if (!saw_body_line) throw EmptyBodyError("workflow body is empty: " + header);
  if (w.steps.size() < 2) {
    throw MinStepsError("workflow has fewer than 2 action steps: " + header);
  }
  return w;
}

/// Render workflows separated by blank lines (store checkpoint format).
inline std::string render_workflows(const std::vector<Workflow>& ws) {
  std::string out;
  for (size_t i = 0; i < ws.size(); ++i) {
    if (i) out += "\n";
    out += render_workflow(ws[i]);
  }
  return out;
}

/// Split on blank lines and parse every block; malformed blocks throw.
/// Website comes from each block's own header.
inline std::vector<Workflow> parse_workflow_file(const std::string& text) {
  std::vector<Workflow> out;
  std::istringstream in(text);
  std::string line, block;
  auto flush = [&] {
    if (!detail::trim(block).empty()) {
      out.push_back(parse_workflow(block));
    }
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
  return out;
}

// --- Small file helpers -----------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

inline std::vector<Experience> load_experiences(const std::string& path) {
  return parse_experiences(read_text_file(path));
}

inline void save_experiences(const std::string& path,
                             const std::vector<Experience>& es) {
  write_text_file(path, serialize_experiences(es));
}

}  // namespace awm
