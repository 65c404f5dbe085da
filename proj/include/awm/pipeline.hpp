#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "awm/agent.hpp"
#include "awm/evaluation.hpp"
#include "awm/induction.hpp"
#include "awm/judge.hpp"
#include "awm/memory.hpp"
#include "awm/simenv.hpp"

namespace awm {

using JudgeFn =
    std::function<Judgment(const Experience&, const EpisodeResult&)>;

/// Judge that trusts the environment's own task check.
inline JudgeFn make_env_judge() {
  return [](const Experience& e, const EpisodeResult& r) {
    (void)e;
    return Judgment{r.success,
                    r.success ? "env check passed" : "env check failed",
                    JudgeKind::kOracle};
  };
}

/// Judge that asks a model; conservative on any model failure.
inline JudgeFn make_lm_judge(LmClient& lm, std::string model = "default") {
  return [&lm, model = std::move(model)](const Experience& e,
                                         const EpisodeResult&) {
    return judge_lm(e, lm, model);
  };
}

namespace detail {

inline InductionResult induce(const std::vector<Experience>& experiences,
                              const InductionConfig& cfg, LmClient* lm) {
  if (cfg.mode == InductionMode::kRule) return induce_rule(experiences, cfg);
  if (!lm) throw ModeError("lm induction requested but no backend was given");
  return induce_lm(experiences, cfg, *lm);
}

}  // namespace detail

/// Replays every task's reference solution, yielding successful experiences
/// to induce from.
inline std::vector<Experience> collect_seed_experiences(
    const SiteDef& site, const std::vector<TaskSpec>& tasks) {
  Environment env(site);
  std::vector<Experience> out;
  for (const auto& t : tasks) out.push_back(replay_solution(env, t));
  return out;
}

inline std::vector<Experience> collect_seed_experiences(
    const std::vector<SiteDef>& sites, const std::vector<TaskSpec>& tasks) {
  std::map<std::string, Environment> envs;
  for (const auto& s : sites) envs.emplace(s.website, Environment(s));
  std::vector<Experience> out;
  for (const auto& t : tasks) {
    auto it = envs.find(t.website);
    if (it == envs.end()) {
      throw UnknownTaskError("no site definition for website '" + t.website +
                             "'");
    }
    out.push_back(replay_solution(it->second, t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Offline mode.
// ---------------------------------------------------------------------------

struct OfflineRunResult {
  std::map<std::string, InductionResult> induction;  // per website
  std::map<std::string, std::string> errors;  // website -> induction error
  WorkflowStore store{MemoryMode::kOffline};
  std::vector<TaskSpec> tasks;  // the tasks actually run, in order
  std::vector<Experience> episodes;
  std::vector<bool> outcomes;
  std::vector<std::string> traces;  // per episode, when cfg.trace is on
  double success_rate = 0.0;
};

/// Offline mode: per website, induce once from that website's seed
/// experiences and freeze the memory, then run that website's tasks against
/// it. A website whose induction fails is skipped with an error entry;
/// the others still run.
inline OfflineRunResult run_offline_sim(
    const std::vector<SiteDef>& sites, const std::vector<Experience>& seed,
    const std::vector<TaskSpec>& tasks, LmClient& policy,
    const InductionConfig& icfg = {}, const AgentConfig& acfg = {},
    LmClient* induction_lm = nullptr, const std::string& base_docs = "") {
  OfflineRunResult result;
  result.store = WorkflowStore(MemoryMode::kOffline, base_docs);

  std::map<std::string, std::vector<Experience>> seed_by_site;
  for (const auto& e : seed) seed_by_site[e.website].push_back(e);

  std::map<std::string, Environment> envs;
  for (const auto& s : sites) {
    envs.emplace(s.website, Environment(s));
    auto it = seed_by_site.find(s.website);
    if (it == seed_by_site.end()) continue;  // baseline site: M_w = M
    try {
      InductionResult induced = detail::induce(it->second, icfg, induction_lm);
      result.store.seed_offline(induced.workflows);
      result.induction[s.website] = std::move(induced);
    } catch (const Error& err) {
      result.errors[s.website] = err.what();
    }
  }
  if (result.store.size() == 0) result.store.seed_offline({});  // freeze

  for (const auto& task : tasks) {
    if (result.errors.count(task.website)) continue;
    auto it = envs.find(task.website);
    if (it == envs.end()) {
      throw UnknownTaskError("no site definition for website '" +
                             task.website + "'");
    }
    EpisodeResult ep = run_episode(it->second, task, policy,
                                   result.store, acfg);
    result.tasks.push_back(task);
    result.outcomes.push_back(ep.success);
    if (acfg.trace) {
      result.traces.push_back("## " + task.id + "\n" + ep.trace);
    }
    result.episodes.push_back(std::move(ep.experience));
  }
  result.success_rate = awm::success_rate(result.outcomes);
  return result;
}

inline OfflineRunResult run_offline_sim(
    const SiteDef& site, const std::vector<Experience>& seed,
    const std::vector<TaskSpec>& tasks, LmClient& policy,
    const InductionConfig& icfg = {}, const AgentConfig& acfg = {},
    LmClient* induction_lm = nullptr, const std::string& base_docs = "") {
  return run_offline_sim(std::vector<SiteDef>{site}, seed, tasks, policy,
                         icfg, acfg, induction_lm, base_docs);
}

/// Teacher-forced stepwise evaluation over gold experiences: at every gold
/// step the policy predicts one action from the gold history, and the
/// prediction is scored against the gold action. The memory stays frozen.
inline EvalReport evaluate_stepwise(const std::vector<Experience>& gold,
                                    LmClient& policy,
                                    const WorkflowStore& store,
                                    const AgentConfig& acfg = {}) {
  EvalReport report;
  for (const auto& e : gold) {
    std::string memory = store.render_memory(e.website);
    std::vector<Step> history;
    for (size_t i = 0; i < e.steps.size(); ++i) {
      const Step& gold_step = e.steps[i];
      std::string obs = gold_step.state_desc && !gold_step.state_desc->empty()
                            ? *gold_step.state_desc
                            : gold_step.observation;
      Prediction p = predict_step(policy, memory, e.website, e.instruction,
                                  history, obs, acfg);
      StepRecord rec;
      rec.task_id = e.id;
      rec.website = e.website;
      rec.step = static_cast<int>(i) + 1;
      rec.score = score_step(p.action, gold_step.action);
      report.steps.push_back(rec);
      history.push_back(gold_step);  // teacher forcing: gold history regardless
    }
  }
  report.finalize();
  return report;
}

// ---------------------------------------------------------------------------
// Online mode.
// ---------------------------------------------------------------------------

struct OnlineOptions {
  // Default: induce from the single newest judged success. The switch feeds
  // every accumulated success for the website back through induction instead.
  bool induce_from_all_successes = false;
};

struct OnlineEpisodeRow {
  std::string task_id;
  std::string website;
  bool success = false;         // environment's own check
  bool judged_success = false;  // the judge's verdict (what is scored)
  JudgeKind judge_kind = JudgeKind::kOracle;
  int workflows_after = 0;
};

struct OnlineRunResult {
  std::vector<OnlineEpisodeRow> rows;
  std::vector<bool> outcomes;  // judged outcomes, in stream order
  std::vector<double> curve;   // cumulative success rate over the stream
  std::vector<Experience> episodes;
  std::vector<std::string> traces;  // per episode, when cfg.trace is on
  int induction_calls = 0;
  double success_rate = 0.0;
};

/// Streaming mode: run each task in order; after each episode the judge
/// decides whether it counts, every judged success is immediately induced
/// into the store (unless the store is frozen offline), and later tasks see
/// the grown memory. Judged outcomes are what the curve scores; episode or
/// judge failures score 0 and never mutate the store.
inline OnlineRunResult run_online(const std::vector<SiteDef>& sites,
                                  const std::vector<TaskSpec>& stream,
                                  LmClient& policy, WorkflowStore& store,
                                  const JudgeFn& judge,
                                  const InductionConfig& icfg = {},
                                  const AgentConfig& acfg = {},
                                  LmClient* induction_lm = nullptr,
                                  const OnlineOptions& opts = {}) {
  std::map<std::string, Environment> envs;
  for (const auto& s : sites) envs.emplace(s.website, Environment(s));
  std::map<std::string, std::vector<Experience>> successes_by_site;

  OnlineRunResult result;
  for (const auto& task : stream) {
    auto it = envs.find(task.website);
    if (it == envs.end()) {
      throw UnknownTaskError("no site definition for website '" +
                             task.website + "'");
    }

    OnlineEpisodeRow row;
    row.task_id = task.id;
    row.website = task.website;
    Experience recorded;
    Judgment verdict;  // defaults to failure
    try {
      EpisodeResult ep = run_episode(it->second, task, policy, store, acfg);
      row.success = ep.success;
      try {
        verdict = judge(ep.experience, ep);
      } catch (const std::exception& err) {
        verdict = Judgment{false, std::string("judge failed: ") + err.what()};
      }
      if (acfg.trace) {
        result.traces.push_back("## " + task.id + "\n" + ep.trace);
      }
      recorded = std::move(ep.experience);
    } catch (const std::exception& err) {
      verdict = Judgment{false, std::string("episode failed: ") + err.what()};
      recorded.id = task.id;
      recorded.website = task.website;
      recorded.instruction = task.instruction;
      recorded.template_id = task.template_id;
    }

    if (verdict.success && store.mode() != MemoryMode::kOffline) {
      recorded.success = true;
      auto& bucket = successes_by_site[task.website];
      bucket.push_back(recorded);
      const std::vector<Experience> single{recorded};
      const std::vector<Experience>& input =
          opts.induce_from_all_successes ? bucket : single;
      InductionResult induced = detail::induce(input, icfg, induction_lm);
      ++result.induction_calls;
      store.add_workflows(induced.workflows);
    }

    row.judged_success = verdict.success;
    row.judge_kind = verdict.judge_kind;
    row.workflows_after = static_cast<int>(store.size());
    result.rows.push_back(row);
    result.outcomes.push_back(verdict.success);
    result.episodes.push_back(std::move(recorded));
  }
  result.curve = cumulative_sr(result.outcomes);
  result.success_rate = awm::success_rate(result.outcomes);
  return result;
}

// ---------------------------------------------------------------------------
// Cross-template structure.
// ---------------------------------------------------------------------------

/// One task per template_id. Unseeded, the first task of each template is
/// kept; under a seed the pick within each template group is drawn from a
/// deterministic per-group stream. Output preserves the order in which
/// templates first appear.
inline std::vector<TaskSpec> cross_template_subset(
    const std::vector<TaskSpec>& tasks,
    std::optional<unsigned> seed = std::nullopt) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const std::string& key = tasks[i].template_id;
    if (groups.find(key) == groups.end()) order.push_back(key);
    groups[key].push_back(i);
  }
  std::vector<TaskSpec> out;
  for (size_t g = 0; g < order.size(); ++g) {
    const auto& members = groups[order[g]];
    size_t pick = 0;
    if (seed.has_value() && members.size() > 1) {
      std::mt19937 rng(*seed + 0x9e3779b9u * static_cast<unsigned>(g + 1));
      pick = rng() % members.size();
    }
    out.push_back(tasks[members[pick]]);
  }
  return out;
}

/// Template pairs (a, b) where a's reference solution is a proper prefix of
/// b's, ignoring terminal actions: the site's smaller routines recur inside
/// its larger ones.
inline std::vector<std::pair<std::string, std::string>>
compositional_template_pairs(const SiteDef& site) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : site.templates) {
    for (const auto& b : site.templates) {
      if (a.template_id == b.template_id) continue;
      std::vector<std::string> sa, sb;
      for (const auto& act : a.gold) sa.push_back(act.name);
      for (const auto& act : b.gold) sb.push_back(act.name);
      if (is_signature_prefix(sa, sb)) {
        out.emplace_back(a.template_id, b.template_id);
      }
    }
  }
  return out;
}

}  // namespace awm
