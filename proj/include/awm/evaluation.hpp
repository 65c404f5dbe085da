#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "awm/action.hpp"
#include "awm/serialize.hpp"
#include "awm/types.hpp"

namespace awm {

// Gold element slot for steps whose action takes no element (terminals).
inline constexpr std::string_view kTerminalElement = "<terminal>";

namespace detail {

inline bool takes_element(const std::string& name) {
  return name == "click" || name == "fill" || name == "type" ||
         name == "hover" || name == "press" || name == "select_option";
}

inline std::vector<std::string> tokenize_lower(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

/// The element an action operates on: its first argument, or the terminal
/// marker for stop / send_msg_to_user.
inline std::string element_of(const Action& a) {
  if (detail::takes_element(a.name)) {
    return a.args.empty() ? "" : a.args[0].value;
  }
  return std::string(kTerminalElement);
}

/// Acceptable elements for a gold step. Kept as a list so callers can widen
/// it when several elements are equally correct.
inline std::vector<std::string> gold_elements_of(const Action& gold) {
  return {element_of(gold)};
}

/// 1 iff the predicted action operates on one of the gold elements
/// (membership, so multiple acceptable ids are supported).
inline int element_accuracy(const Action& predicted,
                            const std::vector<std::string>& gold_elements) {
  std::string el = element_of(predicted);
  bool ok = std::find(gold_elements.begin(), gold_elements.end(), el) !=
            gold_elements.end();
  return ok ? 1 : 0;
}

/// Tokens an action is scored on: the action name plus every argument word,
/// with the element id excluded so ids are judged only by element accuracy.
inline std::vector<std::string> action_tokens(const Action& a) {
  std::vector<std::string> out;
  out.push_back(a.name);
  size_t first = detail::takes_element(a.name) ? 1 : 0;
  for (size_t i = first; i < a.args.size(); ++i) {
    for (auto& t : detail::tokenize_lower(a.args[i].value)) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

/// Multiset F1 over action tokens. 1.0 iff the token multisets match.
inline double action_f1(const Action& predicted, const Action& gold) {
  std::map<std::string, int> pc, gc;
  for (const auto& t : action_tokens(predicted)) ++pc[t];
  for (const auto& t : action_tokens(gold)) ++gc[t];
  int overlap = 0, np = 0, ng = 0;
  for (const auto& [t, n] : pc) np += n;
  for (const auto& [t, n] : gc) ng += n;
  for (const auto& [t, n] : pc) {
    auto it = gc.find(t);
    if (it != gc.end()) overlap += std::min(n, it->second);
  }
  if (np == 0 || ng == 0 || overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / np;
  double recall = static_cast<double>(overlap) / ng;
  return 2.0 * precision * recall / (precision + recall);
}

struct StepScore {
  int element_correct = 0;
  double action_f1 = 0.0;
  int step_success = 0;  // element_correct and action_f1 == 1.0
};

inline StepScore score_step(const Action& predicted, const Action& gold,
                            const std::vector<std::string>& gold_elements) {
  StepScore s;
  s.element_correct = element_accuracy(predicted, gold_elements);
  s.action_f1 = ::awm::action_f1(predicted, gold);
  s.step_success = (s.element_correct == 1 && s.action_f1 == 1.0) ? 1 : 0;
  return s;
}

inline StepScore score_step(const Action& predicted, const Action& gold) {
  return score_step(predicted, gold, gold_elements_of(gold));
}

inline int step_success(const Action& predicted, const Action& gold) {
  return score_step(predicted, gold).step_success;
}

/// 1 iff every step of the task scored a step success.
inline int task_success(const std::vector<StepScore>& scores) {
  for (const auto& s : scores) {
    if (s.step_success != 1) return 0;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Aggregates.
// ---------------------------------------------------------------------------

struct StepRecord {
  std::string task_id;
  std::string website;
  int step = 0;
  StepScore score;
};

struct MetricSummary {
  int n_tasks = 0;
  int n_steps = 0;
  double element_acc = 0.0;
  double action_f1 = 0.0;
  double step_sr = 0.0;
  double task_sr = 0.0;
  double avg_steps = 0.0;
};

namespace detail {

inline MetricSummary summarize(const std::vector<const StepRecord*>& records) {
  MetricSummary m;
  if (records.empty()) return m;
  // Tasks keyed by id, in order of first appearance.
  std::vector<std::string> task_order;
  std::map<std::string, std::vector<StepScore>> by_task;
  double el = 0, f1 = 0, ss = 0;
  for (const StepRecord* r : records) {
    el += r->score.element_correct;
    f1 += r->score.action_f1;
    ss += r->score.step_success;
    if (by_task.find(r->task_id) == by_task.end()) task_order.push_back(r->task_id);
    by_task[r->task_id].push_back(r->score);
  }
  m.n_steps = static_cast<int>(records.size());
  m.n_tasks = static_cast<int>(task_order.size());
  m.element_acc = el / m.n_steps;
  m.action_f1 = f1 / m.n_steps;
  m.step_sr = ss / m.n_steps;
  double tasks_ok = 0;
  for (const auto& id : task_order) {
    tasks_ok += task_success(by_task[id]);
  }
  m.task_sr = tasks_ok / m.n_tasks;
  m.avg_steps = static_cast<double>(m.n_steps) / m.n_tasks;
  return m;
}

}  // namespace detail

/// Step-level scores rolled up overall and per website. The cumulative
/// series is filled by streaming callers; empty otherwise.
struct EvalReport {
  std::vector<StepRecord> steps;
  double element_acc = 0.0;
  double action_f1 = 0.0;
  double step_sr = 0.0;
  double task_sr = 0.0;
  double avg_steps = 0.0;
  std::map<std::string, MetricSummary> per_website;
  std::vector<double> cumulative_sr;

  void finalize() {
    per_website.clear();
    std::vector<const StepRecord*> all;
    std::map<std::string, std::vector<const StepRecord*>> site_records;
    for (const auto& r : steps) {
      all.push_back(&r);
      site_records[r.website].push_back(&r);
    }
    MetricSummary overall = detail::summarize(all);
    element_acc = overall.element_acc;
    action_f1 = overall.action_f1;
    step_sr = overall.step_sr;
    task_sr = overall.task_sr;
    avg_steps = overall.avg_steps;
    for (const auto& [site, records] : site_records) {
      per_website[site] = detail::summarize(records);
    }
  }
};

inline double success_rate(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) return 0.0;
  double n = 0;
  for (bool b : outcomes) n += b ? 1.0 : 0.0;
  return n / outcomes.size();
}

/// Running mean of the outcome stream; entry k covers outcomes 0..k.
inline std::vector<double> cumulative_sr(const std::vector<bool>& outcomes) {
  std::vector<double> out;
  out.reserve(outcomes.size());
  double sum = 0;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    sum += outcomes[i] ? 1.0 : 0.0;
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Workflow-set quality.
// ---------------------------------------------------------------------------

struct QualityReport {
  int n_workflows = 0;
  double coverage = 0.0;          // gold steps matched by some workflow step
  double function_overlap = 0.0;  // bigrams shared by >=2 workflows / distinct
  double utility_rate = 0.0;      // predicted experiences reusing a workflow
};

namespace detail {

inline bool contains_contiguous(const std::vector<std::string>& haystack,
                                const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

// A workflow step matches a concrete step when the action names agree and
// every workflow argument is either a placeholder or token-equal to the
// corresponding concrete argument.
inline bool workflow_step_matches(const WorkflowStep& w, const Step& g) {
  if (w.action.name != g.action.name) return false;
  if (w.action.args.size() != g.action.args.size()) return false;
  for (size_t i = 0; i < w.action.args.size(); ++i) {
    if (w.action.args[i].is_placeholder()) continue;
    if (tokenize_lower(w.action.args[i].value) !=
        tokenize_lower(g.action.args[i].value)) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Fraction of action-name bigrams shared by two or more workflows, over all
/// distinct bigrams; 0 with fewer than two workflows. High overlap means
/// redundant workflows.
inline double function_overlap(const std::vector<Workflow>& workflows) {
  if (workflows.size() < 2) return 0.0;
  std::map<std::string, std::set<size_t>> owners;
  for (size_t i = 0; i < workflows.size(); ++i) {
    auto sig = action_signature_of(workflows[i].steps);
    for (size_t j = 0; j + 1 < sig.size(); ++j) {
      owners[sig[j] + "\x1f" + sig[j + 1]].insert(i);
    }
  }
  if (owners.empty()) return 0.0;
  size_t shared = 0;
  for (const auto& [bigram, who] : owners) {
    if (who.size() >= 2) ++shared;
  }
  return static_cast<double>(shared) / static_cast<double>(owners.size());
}

/// Coverage counts gold steps matched by some workflow step; utility counts
/// predicted experiences whose action-name sequence contains the full
/// signature of some workflow contiguously. Macro-expanded runs inline
/// their steps, so macro use is caught by the containment rule.
inline QualityReport quality_report(
    const std::vector<Workflow>& workflows,
    const std::vector<Experience>& gold_experiences,
    const std::vector<Experience>& predicted_experiences) {
  QualityReport q;
  q.n_workflows = static_cast<int>(workflows.size());
  if (workflows.empty()) return q;
  q.function_overlap = function_overlap(workflows);

  size_t gold_steps = 0, matched = 0;
  for (const auto& e : gold_experiences) {
    for (const auto& step : e.steps) {
      ++gold_steps;
      for (const auto& w : workflows) {
        bool hit = false;
        for (const auto& ws : w.steps) {
          if (detail::workflow_step_matches(ws, step)) {
            hit = true;
            break;
          }
        }
        if (hit) {
          ++matched;
          break;
        }
      }
    }
  }
  if (gold_steps > 0) {
    q.coverage = static_cast<double>(matched) / static_cast<double>(gold_steps);
  }

  std::vector<std::vector<std::string>> wf_sigs;
  for (const auto& w : workflows) {
    wf_sigs.push_back(action_signature_of(w.steps));
  }
  size_t used = 0;
  for (const auto& e : predicted_experiences) {
    auto sig = action_signature_of(e.steps);
    for (const auto& ws : wf_sigs) {
      if (detail::contains_contiguous(sig, ws)) {
        ++used;
        break;
      }
    }
  }
  if (!predicted_experiences.empty()) {
    q.utility_rate = static_cast<double>(used) /
                     static_cast<double>(predicted_experiences.size());
  }
  return q;
}

// ---------------------------------------------------------------------------
// Report files.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace detail

inline std::string eval_report_to_csv(const EvalReport& report) {
  std::string out = "task_id,website,step,element_correct,action_f1,step_success\n";
  for (const auto& r : report.steps) {
    out += r.task_id + "," + r.website + "," + std::to_string(r.step) + "," +
           std::to_string(r.score.element_correct) + "," +
           detail::fmt(r.score.action_f1) + "," +
           std::to_string(r.score.step_success) + "\n";
  }
  return out;
}

inline std::string eval_report_summary(const EvalReport& report) {
  std::string out;
  out += "element_acc " + detail::fmt(report.element_acc) + "\n";
  out += "action_f1 " + detail::fmt(report.action_f1) + "\n";
  out += "step_sr " + detail::fmt(report.step_sr) + "\n";
  out += "task_sr " + detail::fmt(report.task_sr) + "\n";
  out += "avg_steps " + detail::fmt(report.avg_steps) + "\n";
  for (const auto& [site, m] : report.per_website) {
    out += site + " tasks " + std::to_string(m.n_tasks) + " element_acc " +
           detail::fmt(m.element_acc) + " action_f1 " + detail::fmt(m.action_f1) +
           " step_sr " + detail::fmt(m.step_sr) + " task_sr " +
           detail::fmt(m.task_sr) + " avg_steps " + detail::fmt(m.avg_steps) +
           "\n";
  }
  return out;
}

/// CSV with one row per stream index: the running success-rate series.
inline std::string curve_to_csv(const std::vector<bool>& outcomes) {
  std::vector<double> curve = cumulative_sr(outcomes);
  std::string out = "index,cum_sr\n";
  for (size_t i = 0; i < curve.size(); ++i) {
    out += std::to_string(i) + "," + detail::fmt(curve[i]) + "\n";
  }
  return out;
}

/// Episode-level CSV, one row per streamed task with its outcome.
inline std::string episodes_to_csv(const std::vector<std::string>& task_ids,
                                   const std::vector<bool>& outcomes) {
  std::vector<double> curve = cumulative_sr(outcomes);
  std::string out = "episode,task_id,success,cumulative_sr\n";
  for (size_t i = 0; i < outcomes.size(); ++i) {
    out += std::to_string(i + 1) + "," +
           (i < task_ids.size() ? task_ids[i] : "") + "," +
           (outcomes[i] ? "1" : "0") + "," + detail::fmt(curve[i]) + "\n";
  }
  return out;
}

inline nlohmann::json quality_report_to_json(const QualityReport& q) {
  nlohmann::json j;
  j["n_workflows"] = q.n_workflows;
  j["coverage"] = q.coverage;
  j["function_overlap"] = q.function_overlap;
  j["utility_rate"] = q.utility_rate;
  return j;
}

inline nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["element_acc"] = report.element_acc;
  j["action_f1"] = report.action_f1;
  j["step_sr"] = report.step_sr;
  j["task_sr"] = report.task_sr;
  j["avg_steps"] = report.avg_steps;
  j["cumulative_sr"] = report.cumulative_sr;
  nlohmann::json sites = nlohmann::json::object();
  for (const auto& [site, m] : report.per_website) {
    nlohmann::json s;
    s["n_tasks"] = m.n_tasks;
    s["n_steps"] = m.n_steps;
    s["element_acc"] = m.element_acc;
    s["action_f1"] = m.action_f1;
    s["step_sr"] = m.step_sr;
    s["task_sr"] = m.task_sr;
    s["avg_steps"] = m.avg_steps;
    sites[site] = s;
  }
  j["per_website"] = sites;
  return j;
}

}  // namespace awm
