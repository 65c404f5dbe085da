#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "awm/errors.hpp"

namespace awm {

// Canonical browser actions. `type` is an alias of `fill` at execution time
// but keeps its own name in trajectories and signatures.
inline const std::vector<std::string>& canonical_action_names() {
  static const std::vector<std::string> names = {
      "click", "fill",  "type", "hover",
      "press", "select_option", "send_msg_to_user", "stop"};
  return names;
}

inline bool is_canonical_action(std::string_view name) {
  const auto& names = canonical_action_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

inline bool is_terminal_action(std::string_view name) {
  return name == "stop" || name == "send_msg_to_user";
}

// Arity table. stop takes 0 or 1 args; everything else is fixed.
inline std::pair<int, int> action_arity(std::string_view name) {
  if (name == "click" || name == "hover" || name == "send_msg_to_user") {
    return {1, 1};
  }
  if (name == "fill" || name == "type" || name == "press" ||
      name == "select_option") {
    return {2, 2};
  }
  if (name == "stop") {
    return {0, 1};
  }
  return {-1, -1};
}

// One action argument. `quoted` distinguishes fill('12', ...) from fill(12, ...),
// which the rule-based invalid-step filter relies on. Placeholders are always
// stored in canonical `{snake_case}` form and render quoted.
struct ActionArg {
  std::string value;
  bool quoted = true;

  ActionArg() = default;
  ActionArg(std::string v, bool q = true) : value(std::move(v)), quoted(q) {}
  ActionArg(const char* v, bool q = true) : value(v), quoted(q) {}

  bool is_placeholder() const {
    return value.size() >= 2 && value.front() == '{' && value.back() == '}';
  }
  bool is_quoted_integer() const {
    if (!quoted || value.empty()) return false;
    return std::all_of(value.begin(), value.end(),
                       [](unsigned char c) { return std::isdigit(c); });
  }

  friend bool operator==(const ActionArg& a, const ActionArg& b) {
    return a.value == b.value && a.quoted == b.quoted;
  }
};

struct Action {
  std::string name;
  std::vector<ActionArg> args;

  Action() = default;
  Action(std::string n, std::vector<ActionArg> a)
      : name(std::move(n)), args(std::move(a)) {}

  bool is_terminal() const { return is_terminal_action(name); }

  std::vector<std::string> arg_values() const {
    std::vector<std::string> out;
    out.reserve(args.size());
    for (const auto& a : args) out.push_back(a.value);
    return out;
  }

  friend bool operator==(const Action& a, const Action& b) {
    return a.name == b.name && a.args == b.args;
  }
};

namespace detail {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// "\_", "\{", "\}" appear in text copied out of typeset documents.
inline std::string unescape_typeset(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() &&
        (s[i + 1] == '_' || s[i + 1] == '{' || s[i + 1] == '}')) {
      out.push_back(s[i + 1]);
      ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// lower_snake_case: camel boundaries become underscores, runs of
// non-alphanumerics collapse to one underscore.
inline std::string to_snake_case(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 4);
  char prev = '\0';
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (std::isupper(static_cast<unsigned char>(c))) {
      bool camel_boundary =
          std::islower(static_cast<unsigned char>(prev)) ||
          (std::isupper(static_cast<unsigned char>(prev)) && i + 1 < s.size() &&
           std::islower(static_cast<unsigned char>(s[i + 1])));
      if (camel_boundary && !out.empty() && out.back() != '_') out.push_back('_');
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(c);
    } else {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    }
    prev = c;
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  size_t b = 0;
  while (b < out.size() && out[b] == '_') ++b;
  return out.substr(b);
}

// An ALL-CAPS run reads as an abstracted slot when it is at least three
// characters long and starts with a letter (FROM_LOCATION, DISTANCE), which
// leaves short initialisms like "OK" or "US" alone.
inline bool is_caps_token(std::string_view s) {
  if (s.size() < 3) return false;
  if (!std::isupper(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (std::islower(static_cast<unsigned char>(c))) return false;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace detail

/// Canonical placeholder body: {Repository-Name} and {FROM_LOCATION} both
/// become {repository_name} / {from_location}.
inline std::string canonicalize_placeholder_name(std::string_view name) {
  return detail::to_snake_case(name);
}

/// Rewrite embedded placeholder spellings inside one argument string:
/// `{...}` spans are canonicalized in place and word-boundary ALL-CAPS tokens
/// become `{snake_case}` slots. Idempotent.
inline std::string canonicalize_embedded_placeholders(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '{') {
      size_t close = s.find('}', i + 1);
      if (close == std::string_view::npos) {
        out.push_back(c);
        ++i;
        continue;
      }
      out += "{" + canonicalize_placeholder_name(s.substr(i + 1, close - i - 1)) + "}";
      i = close + 1;
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) &&
        (i == 0 || !detail::is_word_char(s[i - 1]))) {
      size_t j = i;
      while (j < s.size() && detail::is_word_char(s[j])) ++j;
      std::string_view token = s.substr(i, j - i);
      if (detail::is_caps_token(token)) {
        out += "{" + canonicalize_placeholder_name(token) + "}";
        i = j;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

/// Map one raw argument token to its canonical form. Whole-token placeholder
/// spellings ({x}, <x>, ALL_CAPS, *_id with a non-numeric stem) become
/// `{snake_case}`; other strings keep their text with embedded spellings
/// canonicalized.
inline ActionArg canonicalize_arg(std::string_view raw, bool quoted) {
  std::string s(raw);
  if (s.size() >= 2 && s.front() == '{' && s.back() == '}') {
    return {"{" + canonicalize_placeholder_name(s.substr(1, s.size() - 2)) + "}", true};
  }
  if (s.size() >= 2 && s.front() == '<' && s.back() == '>') {
    return {"{" + canonicalize_placeholder_name(s.substr(1, s.size() - 2)) + "}", true};
  }
  if (detail::is_caps_token(s)) {
    return {"{" + canonicalize_placeholder_name(s) + "}", true};
  }
  if (quoted && s.size() > 3 && s.rfind("_id") == s.size() - 3) {
    std::string_view stem = std::string_view(s).substr(0, s.size() - 3);
    bool stem_has_letter = std::any_of(stem.begin(), stem.end(), [](unsigned char c) {
      return std::isalpha(c);
    });
    if (stem_has_letter) {
      return {"{" + canonicalize_placeholder_name(s) + "}", true};
    }
  }
  return {canonicalize_embedded_placeholders(s), quoted};
}

/// Names an agent may call beyond the canonical set, with their arity.
/// Workflow-derived macro actions register here.
struct ActionRegistry {
  std::map<std::string, int> extra;  // name -> arity

  void add(const std::string& name, int arity) { extra[name] = arity; }
  std::optional<int> arity_of(const std::string& name) const {
    auto it = extra.find(name);
    if (it == extra.end()) return std::nullopt;
    return it->second;
  }
};

/// Parse one `name('arg', ...)` line. Recognizes the canonical action set plus
/// any registered macro names; trailing `# comment` text is ignored.
inline Action parse_action(std::string_view text,
                           const ActionRegistry* registry = nullptr) {
  std::string line = detail::unescape_typeset(text);

  size_t i = 0;
  auto skip_ws = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  skip_ws();

  size_t name_begin = i;
  while (i < line.size() && detail::is_word_char(line[i])) ++i;
  if (i == name_begin) throw ParseError("no action name in: " + line);
  std::string raw_name = line.substr(name_begin, i - name_begin);
  std::string name;
  for (char c : raw_name) {
    name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }

  skip_ws();
  if (i >= line.size() || line[i] != '(') {
    throw ParseError("expected '(' after action name in: " + line);
  }
  ++i;

  std::vector<ActionArg> args;
  skip_ws();
  bool closed = false;
  if (i < line.size() && line[i] == ')') {
    closed = true;
    ++i;
  }
  while (!closed) {
    skip_ws();
    if (i >= line.size()) throw ParseError("unbalanced parentheses in: " + line);
    if (line[i] == '\'' || line[i] == '"') {
      char quote = line[i];
      ++i;
      std::string value;
      bool terminated = false;
      while (i < line.size()) {
        char c = line[i];
        if (c == '\\' && i + 1 < line.size() &&
            (line[i + 1] == quote || line[i + 1] == '\\')) {
          value.push_back(line[i + 1]);
          i += 2;
          continue;
        }
        if (c == quote) {
          terminated = true;
          ++i;
          break;
        }
        value.push_back(c);
        ++i;
      }
      if (!terminated) throw ParseError("unbalanced quote in: " + line);
      args.push_back(canonicalize_arg(value, /*quoted=*/true));
    } else {
      size_t begin = i;
      while (i < line.size() && line[i] != ',' && line[i] != ')') ++i;
      if (i >= line.size()) throw ParseError("unbalanced parentheses in: " + line);
      std::string value = detail::trim(line.substr(begin, i - begin));
      if (value.empty()) throw ParseError("empty argument in: " + line);
      if (value.find('\'') != std::string::npos ||
          value.find('"') != std::string::npos) {
        throw ParseError("unbalanced quote in: " + line);
      }
      args.push_back(canonicalize_arg(value, /*quoted=*/false));
    }
    skip_ws();
    if (i < line.size() && line[i] == ',') {
      ++i;
      continue;
    }
    if (i < line.size() && line[i] == ')') {
      closed = true;
      ++i;
      break;
    }
    throw ParseError("expected ',' or ')' in: " + line);
  }

  skip_ws();
  if (i < line.size() && line[i] != '#') {
    throw ParseError("trailing text after action in: " + line);
  }

  std::pair<int, int> arity{-1, -1};
  if (is_canonical_action(name)) {
    arity = action_arity(name);
  } else if (registry) {
    if (auto a = registry->arity_of(name)) arity = {*a, *a};
  }
  if (arity.first < 0) throw UnknownActionError("unknown action: " + name);
  int n = static_cast<int>(args.size());
  if (n < arity.first || n > arity.second) {
    throw ArityError("action " + name + " takes " + std::to_string(arity.first) +
                     (arity.second != arity.first
                          ? ".." + std::to_string(arity.second)
                          : "") +
                     " args, got " + std::to_string(n));
  }
  return Action{std::move(name), std::move(args)};
}

/// Render to the canonical one-line program form; parse_action(render_action(a))
/// reproduces `a` exactly.
inline std::string render_action(const Action& a) {
  std::string out = a.name + "(";
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ", ";
    const ActionArg& arg = a.args[i];
    if (arg.quoted) {
      out += "'";
      for (char c : arg.value) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      out += "'";
    } else {
      out += arg.value;
    }
  }
  out += ")";
  return out;
}

/// True when the line parses as an action under the given registry.
inline bool is_action_line(std::string_view line,
                           const ActionRegistry* registry = nullptr) {
  try {
    parse_action(line, registry);
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// Distinct `{placeholder}` names in an argument list, first-occurrence order.
inline std::vector<std::string> placeholder_names(const std::vector<ActionArg>& args) {
  std::vector<std::string> out;
  for (const auto& arg : args) {
    const std::string& s = arg.value;
    size_t i = 0;
    while ((i = s.find('{', i)) != std::string::npos) {
      size_t close = s.find('}', i + 1);
      if (close == std::string::npos) break;
      std::string name = s.substr(i + 1, close - i - 1);
      if (std::find(out.begin(), out.end(), name) == out.end()) {
        out.push_back(name);
      }
      i = close + 1;
    }
  }
  return out;
}

}  // namespace awm
