#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "awm/lm.hpp"
#include "awm/prompts.hpp"
#include "awm/types.hpp"

namespace awm {

enum class JudgeKind { kLm, kOracle };

inline std::string to_string(JudgeKind k) {
  return k == JudgeKind::kLm ? "lm" : "oracle";
}

struct Judgment {
  bool success = false;
  std::string rationale;
  JudgeKind judge_kind = JudgeKind::kOracle;
};

namespace detail {

inline std::string render_trajectory_for_judge(const Experience& e) {
  std::string out = "Instruction: " + e.instruction + "\n";
  int n = 0;
  for (const auto& step : e.steps) {
    out += "Step " + std::to_string(++n) + ": " + render_action(step.action) + "\n";
  }
  return out;
}

inline std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// True iff some line of `text`, after trimming, equals `token` exactly.
// Supersets such as "Status: SUCCESSFUL" or quoted echoes do not count.
inline bool has_verdict_line(const std::string& text, std::string_view token) {
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (trim_copy(line) == token) return true;
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return false;
}

}  // namespace detail

/// LM judge over a finished trajectory. Success requires a reply line that
/// is exactly the affirmative status line; anything else, including a
/// refused or failed call, is conservatively a failure.
inline Judgment judge_lm(const Experience& e, LmClient& lm,
                         const std::string& model = "default") {
  LmRequest req;
  req.system = std::string(kJudgeInstruction);
  req.prompt = detail::render_trajectory_for_judge(e);
  req.temperature = 0.0;
  req.model = model;
  LmResponse resp;
  try {
    resp = lm.complete(req);
  } catch (const LmError& err) {
    return Judgment{false, std::string("judge call failed: ") + err.what(),
                    JudgeKind::kLm};
  }
  bool ok = detail::has_verdict_line(resp.text, kJudgeAffirmativeToken);
  return Judgment{ok, resp.text, JudgeKind::kLm};
}

/// Deterministic check used where ground truth is available in tests and the
/// simulated environment. Receives the trajectory plus the terminal message
/// (empty when the agent never messaged) and any final environment state the
/// caller exposes.
using OracleCheck = std::function<bool(const Experience& e,
                                       const std::string& terminal_message)>;

/// Last message the agent surfaced, scanning from the end; empty when the
/// trajectory never messaged.
inline std::string terminal_message_of(const Experience& e) {
  for (auto it = e.steps.rbegin(); it != e.steps.rend(); ++it) {
    if ((it->action.name == "send_msg_to_user" || it->action.name == "stop") &&
        !it->action.args.empty()) {
      return it->action.args[0].value;
    }
  }
  return "";
}

inline Judgment judge_oracle(const Experience& e, const OracleCheck& check) {
  bool ok = check(e, terminal_message_of(e));
  return Judgment{ok, ok ? "oracle: success" : "oracle: failure",
                  JudgeKind::kOracle};
}

/// Oracle that passes when the terminal message contains `needle`.
inline OracleCheck message_contains(std::string needle) {
  return [needle = std::move(needle)](const Experience&,
                                      const std::string& terminal) {
    return terminal.find(needle) != std::string::npos;
  };
}

}  // namespace awm
