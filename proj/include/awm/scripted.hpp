#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "awm/action.hpp"
#include "awm/lm.hpp"
#include "awm/simenv.hpp"

namespace awm {

/// Deterministic stand-in policy for pipeline tests. Behavior per episode,
/// decided when the first prompt of the episode arrives:
///   - first ever sight of a task template: fail (apologize and quit);
///   - second sight: succeed from scratch, replaying the task's solution;
///   - any later sight: succeed only when the rendered memory contains a
///     workflow whose header line carries the template's match phrase.
/// Workflow presence is read from "## " header lines only, so the task
/// instruction itself never satisfies the check. Episodes must run one at a
/// time; the per-episode decision is keyed off the step-zero prompt.
class ScriptedPolicy : public LmClient {
 public:
  explicit ScriptedPolicy(std::vector<TaskSpec> tasks)
      : tasks_(std::move(tasks)) {}

  LmResponse complete(const LmRequest& req) override {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
    const TaskSpec* task = match_task(req.prompt);
    if (!task) {
      throw ScriptExhaustedError("prompt does not name a known task");
    }
    int step = count_prior_actions(req.prompt);
    if (step == 0) {
      int sighting = ++sightings_[task->template_id];
      succeed_ = sighting == 2 ||
                 workflow_present(req.prompt, task->match_phrase);
    }
    if (!succeed_) {
      return LmResponse{
          "I do not know how to do this yet.\n"
          "send_msg_to_user('I could not complete this task.')"};
    }
    if (step >= static_cast<int>(task->gold.size())) {
      return LmResponse{"Nothing left to do.\nstop()"};
    }
    return LmResponse{"Executing the known procedure.\n" +
                      render_action(task->gold[static_cast<size_t>(step)])};
  }

  int call_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
  }

  int sightings_of(const std::string& template_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sightings_.find(template_id);
    return it == sightings_.end() ? 0 : it->second;
  }

  void reset_sightings() {
    std::lock_guard<std::mutex> lock(mu_);
    sightings_.clear();
  }

 private:
  const TaskSpec* match_task(const std::string& prompt) const {
    std::istringstream in(prompt);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("Task: ", 0) != 0) continue;
      std::string instruction = line.substr(6);
      for (const auto& t : tasks_) {
        if (t.instruction == instruction) return &t;
      }
    }
    return nullptr;
  }

  static int count_prior_actions(const std::string& prompt) {
    std::istringstream in(prompt);
    std::string line;
    bool in_section = false;
    int n = 0;
    while (std::getline(in, line)) {
      if (line == "Previous actions:") {
        in_section = true;
        continue;
      }
      if (in_section) {
        if (line.rfind("  ", 0) == 0) {
          ++n;
        } else {
          in_section = false;
        }
      }
    }
    return n;
  }

  static bool workflow_present(const std::string& prompt,
                               const std::string& phrase) {
    if (phrase.empty()) return false;
    std::istringstream in(prompt);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("## ", 0) == 0 && line.find(phrase) != std::string::npos) {
        return true;
      }
    }
    return false;
  }

  std::vector<TaskSpec> tasks_;
  mutable std::mutex mu_;
  std::map<std::string, int> sightings_;
  bool succeed_ = false;
  int calls_ = 0;
};

}  // namespace awm
