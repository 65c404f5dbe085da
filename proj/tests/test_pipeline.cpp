// Offline and online memory pipelines over the simulated sites.

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "awm/pipeline.hpp"
#include "awm/scripted.hpp"

#include "support/fixtures.hpp"

using namespace awm;

namespace {

std::vector<TaskSpec> find_place_tasks(const SiteDef& map) {
  const TaskTemplate& fp = find_template(map, "find_place");
  return {instantiate_task(map, fp, {{"place", "central park"}}, "fp-1"),
          instantiate_task(map, fp, {{"place", "city hall"}}, "fp-2"),
          instantiate_task(map, fp, {{"place", "union square"}}, "fp-3")};
}

// Alternating find_place / get_zip_code stream, three instantiations each.
std::vector<TaskSpec> two_template_stream(const SiteDef& map) {
  const TaskTemplate& fp = find_template(map, "find_place");
  const TaskTemplate& zip = find_template(map, "get_zip_code");
  std::vector<std::string> places = {"central park", "city hall",
                                     "union square"};
  std::vector<TaskSpec> out;
  for (size_t i = 0; i < places.size(); ++i) {
    out.push_back(instantiate_task(map, fp, {{"place", places[i]}},
                                   "fp-" + std::to_string(i + 1)));
    out.push_back(instantiate_task(map, zip, {{"place", places[i]}},
                                   "zip-" + std::to_string(i + 1)));
  }
  return out;
}

std::vector<std::string> gold_replay_replies(
    const std::vector<TaskSpec>& tasks) {
  std::vector<std::string> out;
  for (const auto& t : tasks) {
    for (const auto& a : t.gold) {
      out.push_back("following the procedure\n" + render_action(a));
    }
  }
  return out;
}

InductionConfig rule_config() {
  InductionConfig cfg;
  cfg.mode = InductionMode::kRule;
  return cfg;
}

}  // namespace

TEST_CASE("seed collection replays every task successfully") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> tasks = generate_suite(map, 5, 3);
  std::vector<Experience> seed = collect_seed_experiences(map, tasks);
  REQUIRE(seed.size() == 5);
  for (size_t i = 0; i < seed.size(); ++i) {
    CHECK(seed[i].id == tasks[i].id);
    CHECK(seed[i].website == "map");
    CHECK(seed[i].success == std::optional<bool>{true});
    CHECK(seed[i].steps.size() == tasks[i].gold.size());
    CHECK(seed[i].template_id == std::optional<std::string>{tasks[i].template_id});
  }
}

TEST_CASE("multi-site seed collection routes tasks to their site") {
  std::vector<SiteDef> sites = {builtin_site("map"), builtin_site("shop")};
  std::vector<TaskSpec> tasks = generate_suite(sites, 7, 1, 5);
  std::vector<Experience> seed = collect_seed_experiences(sites, tasks);
  REQUIRE(seed.size() == 7);
  CHECK(seed[0].website == "map");
  CHECK(seed[6].website == "shop");

  TaskSpec stray;
  stray.id = "x";
  stray.website = "intranet";
  CHECK_THROWS_AS(collect_seed_experiences(sites, {stray}), UnknownTaskError);
}

TEST_CASE("the env judge passes the environment verdict through") {
  JudgeFn judge = make_env_judge();
  EpisodeResult ok;
  ok.success = true;
  Judgment good = judge(Experience{}, ok);
  CHECK(good.success);
  CHECK(good.judge_kind == JudgeKind::kOracle);
  CHECK(good.rationale == "env check passed");
  Judgment bad = judge(Experience{}, EpisodeResult{});
  CHECK_FALSE(bad.success);
  CHECK(bad.rationale == "env check failed");
}

TEST_CASE("the lm judge asks the model and fails conservatively") {
  Experience e = testsupport::experience_of(
      "j-1", "map", "Find city hall on the map.",
      {testsupport::act("fill", {"1", "city hall"}),
       testsupport::act("send_msg_to_user", {"Found city hall."})});
  MockLm lm({"Status: SUCCESS"});
  Judgment good = make_lm_judge(lm)(e, EpisodeResult{});
  CHECK(good.success);
  CHECK(good.judge_kind == JudgeKind::kLm);

  FailingLm down;
  Judgment bad = make_lm_judge(down)(e, EpisodeResult{});
  CHECK_FALSE(bad.success);
  CHECK(bad.judge_kind == JudgeKind::kLm);
  CHECK(bad.rationale.find("backend unavailable") != std::string::npos);
}

TEST_CASE("offline induction freezes the memory that every episode then sees") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> stream = two_template_stream(map);
  std::vector<Experience> seed =
      collect_seed_experiences(map, {stream[0], stream[1]});

  ScriptedPolicy policy(stream);
  OfflineRunResult result =
      run_offline_sim(map, seed, stream, policy, rule_config());

  REQUIRE(result.errors.empty());
  REQUIRE(result.induction.count("map") == 1);
  CHECK(result.induction.at("map").workflows.size() == 2);
  CHECK(result.store.size() == 2);
  CHECK(result.store.frozen());
  CHECK_THROWS_AS(result.store.add_workflows({testsupport::login_workflow()}),
                  ModeError);

  // Workflows for both templates are in memory from the start, so even the
  // first sighting of each template succeeds.
  REQUIRE(result.outcomes.size() == stream.size());
  for (bool ok : result.outcomes) CHECK(ok);
  CHECK(result.success_rate == Catch::Approx(1.0).margin(1e-12));
  CHECK(result.tasks.size() == stream.size());
  CHECK(result.episodes.size() == stream.size());
}

TEST_CASE("a website without seed runs against the base memory") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> stream = two_template_stream(map);
  ScriptedPolicy policy(stream);
  OfflineRunResult result =
      run_offline_sim(map, {}, stream, policy, rule_config());

  CHECK(result.store.size() == 0);
  CHECK(result.store.frozen());
  // Sighting 1 fails, sighting 2 succeeds from scratch, sighting 3 has no
  // workflow to lean on and fails again.
  std::vector<bool> expected = {false, false, true, true, false, false};
  CHECK(result.outcomes == expected);
  CHECK(result.success_rate == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("a website whose induction fails is skipped with an error entry") {
  std::vector<SiteDef> sites = {builtin_site("map"), builtin_site("shop")};
  SiteDef map = sites[0];
  SiteDef shop = sites[1];
  std::vector<TaskSpec> map_tasks = find_place_tasks(map);
  std::vector<TaskSpec> shop_tasks = generate_suite(shop, 2, 9);
  std::vector<Experience> seed;
  {
    Environment menv(map);
    seed.push_back(replay_solution(menv, map_tasks[0]));
    Environment senv(shop);
    seed.push_back(replay_solution(senv, shop_tasks[0]));
  }

  // One valid response for the map batch; the shop batch exhausts the mock.
  MockLm induction_lm(
      {"## map: Look up a location\nfill('1', '{place}')\nclick('2')"});
  std::vector<TaskSpec> stream = map_tasks;
  stream.insert(stream.end(), shop_tasks.begin(), shop_tasks.end());
  ScriptedPolicy policy(stream);
  InductionConfig icfg;
  icfg.mode = InductionMode::kLm;
  OfflineRunResult result = run_offline_sim(sites, seed, stream, policy, icfg,
                                            AgentConfig{}, &induction_lm);

  REQUIRE(result.errors.count("shop") == 1);
  CHECK(result.errors.count("map") == 0);
  REQUIRE(result.induction.count("map") == 1);
  CHECK(result.induction.at("map").workflows.size() == 1);
  // Only the map tasks actually ran.
  REQUIRE(result.tasks.size() == map_tasks.size());
  for (const auto& t : result.tasks) CHECK(t.website == "map");
  CHECK(result.outcomes.size() == map_tasks.size());
}

TEST_CASE("lm induction without a backend is an error entry, not a crash") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> stream = find_place_tasks(map);
  std::vector<Experience> seed;
  {
    Environment env(map);
    seed.push_back(replay_solution(env, stream[0]));
  }
  ScriptedPolicy policy(stream);
  OfflineRunResult result = run_offline_sim(map, seed, stream, policy);
  REQUIRE(result.errors.count("map") == 1);
  CHECK(result.errors.at("map").find("no backend") != std::string::npos);
  CHECK(result.tasks.empty());
  CHECK(result.episodes.empty());
}

TEST_CASE("online induction follows each judged success immediately") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> tasks = find_place_tasks(map);
  MockLm policy(gold_replay_replies(tasks));
  WorkflowStore store(MemoryMode::kOnline);
  int idx = 0;
  JudgeFn judge = [&idx](const Experience&, const EpisodeResult& r) {
    bool accept = idx != 1;
    ++idx;
    return Judgment{accept && r.success, "scripted", JudgeKind::kOracle};
  };

  OnlineRunResult result =
      run_online({map}, tasks, policy, store, judge, rule_config());

  REQUIRE(result.rows.size() == 3);
  CHECK(result.induction_calls == 2);
  CHECK(result.rows[0].workflows_after == 1);
  CHECK(result.rows[1].workflows_after == 1);
  CHECK(result.rows[2].workflows_after == 2);
  CHECK(result.outcomes == std::vector<bool>{true, false, true});
  REQUIRE(result.curve.size() == 3);
  CHECK(result.curve[1] == Catch::Approx(0.5).margin(1e-12));
  CHECK(result.curve[2] == Catch::Approx(2.0 / 3.0).margin(1e-12));
  CHECK(result.success_rate == Catch::Approx(2.0 / 3.0).margin(1e-12));

  // The middle episode succeeded in the environment but was vetoed.
  CHECK(result.rows[1].success);
  CHECK_FALSE(result.rows[1].judged_success);

  REQUIRE(store.size() == 2);
  const std::vector<Workflow>& wfs = store.workflows_for("map");
  CHECK(wfs[0].description == tasks[0].instruction);
  CHECK(wfs[1].description == tasks[2].instruction);
  CHECK(wfs[0].source == WorkflowSource::kRule);
}

TEST_CASE("failed episodes never touch the store or the backend") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> tasks = find_place_tasks(map);
  MockLm policy(gold_replay_replies(tasks));
  MockLm induction_backend;
  WorkflowStore store(MemoryMode::kOnline);
  JudgeFn reject_all = [](const Experience&, const EpisodeResult&) {
    return Judgment{false, "never", JudgeKind::kOracle};
  };
  InductionConfig icfg;
  icfg.mode = InductionMode::kLm;

  OnlineRunResult result = run_online({map}, tasks, policy, store, reject_all,
                                      icfg, AgentConfig{}, &induction_backend);

  CHECK(induction_backend.call_count() == 0);
  CHECK(store.size() == 0);
  CHECK(result.induction_calls == 0);
  REQUIRE(result.rows.size() == 3);
  for (const auto& row : result.rows) {
    CHECK(row.success);  // the environment was satisfied
    CHECK_FALSE(row.judged_success);
    CHECK(row.workflows_after == 0);
  }
  for (bool b : result.outcomes) CHECK_FALSE(b);
}

TEST_CASE("judge and episode failures score zero and keep streaming") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> tasks = find_place_tasks(map);
  WorkflowStore store(MemoryMode::kOnline);

  SECTION("a throwing judge is a failure verdict") {
    MockLm policy(gold_replay_replies(tasks));
    JudgeFn judge = [](const Experience&, const EpisodeResult&) -> Judgment {
      throw std::runtime_error("boom");
    };
    OnlineRunResult result =
        run_online({map}, tasks, policy, store, judge, rule_config());
    REQUIRE(result.rows.size() == 3);
    for (bool b : result.outcomes) CHECK_FALSE(b);
    CHECK(store.size() == 0);
  }

  SECTION("a crashing episode records a stub experience") {
    MockLm empty_policy;  // exhausted on the first request
    OnlineRunResult result = run_online({map}, tasks, empty_policy, store,
                                        make_env_judge(), rule_config());
    REQUIRE(result.rows.size() == 3);
    REQUIRE(result.episodes.size() == 3);
    CHECK(result.episodes[0].id == tasks[0].id);
    CHECK(result.episodes[0].website == "map");
    CHECK(result.episodes[0].steps.empty());
    for (bool b : result.outcomes) CHECK_FALSE(b);
  }
}

TEST_CASE("the store only grows across an online stream") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> stream = two_template_stream(map);
  ScriptedPolicy policy(stream);
  WorkflowStore store(MemoryMode::kOnline);
  OnlineRunResult result = run_online({map}, stream, policy, store,
                                      make_env_judge(), rule_config());
  std::vector<bool> expected = {false, false, true, true, true, true};
  CHECK(result.outcomes == expected);
  int prev = 0;
  for (const auto& row : result.rows) {
    CHECK(row.workflows_after >= prev);
    prev = row.workflows_after;
  }
  // Workflows appear only after the first judged success.
  CHECK(result.rows[1].workflows_after == 0);
  CHECK(result.rows[2].workflows_after == 1);
  CHECK(static_cast<int>(store.size()) == result.rows.back().workflows_after);
}

TEST_CASE("offline+online behaves like online when the seed is empty") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> stream = two_template_stream(map);

  WorkflowStore mixed(MemoryMode::kOfflineOnline);
  mixed.seed_offline({});
  ScriptedPolicy policy_a(stream);
  OnlineRunResult a = run_online({map}, stream, policy_a, mixed,
                                 make_env_judge(), rule_config());

  WorkflowStore online(MemoryMode::kOnline);
  ScriptedPolicy policy_b(stream);
  OnlineRunResult b = run_online({map}, stream, policy_b, online,
                                 make_env_judge(), rule_config());

  CHECK(a.outcomes == b.outcomes);
  CHECK(mixed.size() == online.size());
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].workflows_after == b.rows[i].workflows_after);
  }
}

TEST_CASE("offline+online keeps seeding and growing apart") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> stream = two_template_stream(map);
  std::vector<Experience> seed =
      collect_seed_experiences(map, {stream[0], stream[1]});
  InductionResult induced = induce_rule(seed, rule_config());
  WorkflowStore store(MemoryMode::kOfflineOnline);
  store.seed_offline(induced.workflows);
  CHECK(store.size() == 2);

  ScriptedPolicy policy(stream);
  OnlineRunResult result = run_online({map}, stream, policy, store,
                                      make_env_judge(), rule_config());
  // Seeded workflows cover both templates, so every episode succeeds.
  for (bool b : result.outcomes) CHECK(b);
  CHECK(store.size() >= 2);
}

TEST_CASE("induce_from_all_successes reuses the accumulated bucket") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> tasks = find_place_tasks(map);

  WorkflowStore grow(MemoryMode::kOnline);
  MockLm policy_a(gold_replay_replies(tasks));
  OnlineRunResult defaults = run_online({map}, tasks, policy_a, grow,
                                        make_env_judge(), rule_config());
  REQUIRE(defaults.rows.size() == 3);
  CHECK(defaults.rows[0].workflows_after == 1);
  CHECK(defaults.rows[1].workflows_after == 2);
  CHECK(defaults.rows[2].workflows_after == 3);

  WorkflowStore dedup(MemoryMode::kOnline);
  MockLm policy_b(gold_replay_replies(tasks));
  OnlineOptions opts;
  opts.induce_from_all_successes = true;
  OnlineRunResult bucketed =
      run_online({map}, tasks, policy_b, dedup, make_env_judge(),
                 rule_config(), AgentConfig{}, nullptr, opts);
  CHECK(bucketed.rows[0].workflows_after == 1);
  CHECK(bucketed.rows[1].workflows_after == 1);
  CHECK(bucketed.rows[2].workflows_after == 1);
}

TEST_CASE("an unknown website in the stream throws") {
  SiteDef map = builtin_site("map");
  TaskSpec stray;
  stray.id = "x";
  stray.website = "intranet";
  MockLm policy;
  WorkflowStore store(MemoryMode::kOnline);
  CHECK_THROWS_AS(run_online({map}, {stray}, policy, store, make_env_judge(),
                             rule_config()),
                  UnknownTaskError);
}

TEST_CASE("the cross-template subset keeps one task per template") {
  SiteDef map = builtin_site("map");
  std::vector<TaskSpec> tasks = generate_suite(map, 15, 21);
  std::vector<TaskSpec> sub = cross_template_subset(tasks);
  REQUIRE(sub.size() == 5);
  for (size_t g = 0; g < sub.size(); ++g) {
    CHECK(sub[g].id == tasks[g].id);  // unseeded: first member of each group
    CHECK(sub[g].template_id == tasks[g].template_id);
  }

  std::vector<TaskSpec> pick1 = cross_template_subset(tasks, 5u);
  std::vector<TaskSpec> pick2 = cross_template_subset(tasks, 5u);
  REQUIRE(pick1.size() == 5);
  bool any_differs_from_first = false;
  for (size_t g = 0; g < pick1.size(); ++g) {
    CHECK(pick1[g].id == pick2[g].id);
    CHECK(pick1[g].template_id == tasks[g].template_id);
    bool member = false;
    for (const auto& t : tasks) {
      if (t.id == pick1[g].id && t.template_id == pick1[g].template_id) {
        member = true;
      }
    }
    CHECK(member);
  }
  for (unsigned seed = 0; seed < 20 && !any_differs_from_first; ++seed) {
    std::vector<TaskSpec> p = cross_template_subset(tasks, seed);
    for (size_t g = 0; g < p.size(); ++g) {
      if (p[g].id != tasks[g].id) any_differs_from_first = true;
    }
  }
  CHECK(any_differs_from_first);
}

TEST_CASE("smaller routines recur as prefixes of larger ones") {
  SiteDef map = builtin_site("map");
  auto pairs = compositional_template_pairs(map);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::make_pair(std::string("find_place"),
                                   std::string("get_zip_code")));
  CHECK(pairs[1] == std::make_pair(std::string("find_place"),
                                   std::string("get_address")));
}

TEST_CASE("induced workflows nest the way their templates do") {
  SiteDef map = builtin_site("map");
  const TaskTemplate& fp = find_template(map, "find_place");
  const TaskTemplate& zip = find_template(map, "get_zip_code");
  TaskSpec a = instantiate_task(map, fp, {{"place", "city hall"}}, "a-1");
  TaskSpec b = instantiate_task(map, zip, {{"place", "city hall"}}, "b-1");
  Environment env(map);
  std::vector<Experience> seed = {replay_solution(env, a),
                                  replay_solution(env, b)};
  InductionResult induced = induce_rule(seed, rule_config());
  REQUIRE(induced.workflows.size() == 2);
  std::vector<std::string> sa, sb;
  for (const auto& s : induced.workflows[0].steps) sa.push_back(s.action.name);
  for (const auto& s : induced.workflows[1].steps) sb.push_back(s.action.name);
  CHECK(is_signature_prefix(sa, sb));
  CHECK_FALSE(is_signature_prefix(sb, sa));
}

TEST_CASE("memory lifts the scripted policy from 0.20 to 0.80") {
  std::vector<SiteDef> sites = {builtin_site("map"), builtin_site("shop")};
  std::vector<TaskSpec> suite = generate_suite(sites, 10, 5, 7);
  REQUIRE(suite.size() == 50);
  for (const auto& t : suite) {
    REQUIRE_FALSE(t.match_phrase.empty());
    CHECK(t.instruction.find(t.match_phrase) != std::string::npos);
  }

  WorkflowStore store(MemoryMode::kOnline);
  ScriptedPolicy policy(suite);
  OnlineRunResult online = run_online(sites, suite, policy, store,
                                      make_env_judge(), rule_config());
  REQUIRE(online.outcomes.size() == 50);
  for (size_t i = 0; i < 10; ++i) CHECK_FALSE(online.outcomes[i]);
  for (size_t i = 10; i < 50; ++i) CHECK(online.outcomes[i]);
  CHECK(online.success_rate == Catch::Approx(0.80).margin(1e-12));
  CHECK(online.curve[9] == Catch::Approx(0.0).margin(1e-12));
  CHECK(online.curve[49] == Catch::Approx(0.80).margin(1e-12));
  for (size_t i = 10; i < 50; ++i) {
    CHECK(online.curve[i] >= online.curve[i - 1] - 1e-12);
  }
  int prev = 0;
  for (const auto& row : online.rows) {
    CHECK(row.workflows_after >= prev);
    prev = row.workflows_after;
  }
  CHECK(online.rows[9].workflows_after == 0);
  CHECK(static_cast<int>(store.size()) == online.rows.back().workflows_after);

  // Baseline: the same stream against a frozen empty memory only ever wins
  // the one bootstrap round.
  WorkflowStore frozen(MemoryMode::kOffline);
  frozen.seed_offline({});
  ScriptedPolicy fresh(suite);
  OnlineRunResult baseline = run_online(sites, suite, fresh, frozen,
                                        make_env_judge(), rule_config());
  CHECK(baseline.success_rate == Catch::Approx(0.20).margin(1e-12));
  for (size_t i = 0; i < 10; ++i) CHECK_FALSE(baseline.outcomes[i]);
  for (size_t i = 10; i < 20; ++i) CHECK(baseline.outcomes[i]);
  for (size_t i = 20; i < 50; ++i) CHECK_FALSE(baseline.outcomes[i]);
  CHECK(frozen.size() == 0);

  // The whole run is deterministic.
  WorkflowStore store2(MemoryMode::kOnline);
  ScriptedPolicy again(suite);
  OnlineRunResult repeat = run_online(sites, suite, again, store2,
                                      make_env_judge(), rule_config());
  CHECK(repeat.outcomes == online.outcomes);
  CHECK(store2.size() == store.size());
}

TEST_CASE("stepwise evaluation teacher-forces the gold history") {
  SiteDef map = builtin_site("map");
  const TaskTemplate& fp = find_template(map, "find_place");
  TaskSpec a = instantiate_task(map, fp, {{"place", "central park"}}, "fp-a");
  TaskSpec b = instantiate_task(map, fp, {{"place", "city hall"}}, "fp-b");
  Environment env(map);
  std::vector<Experience> gold = {replay_solution(env, a),
                                  replay_solution(env, b)};

  ScriptedPolicy policy({a, b});
  WorkflowStore store(MemoryMode::kOffline);
  store.seed_offline({});
  EvalReport report = evaluate_stepwise(gold, policy, store);

  REQUIRE(report.steps.size() == 6);
  for (size_t i = 0; i < 3; ++i) CHECK(report.steps[i].task_id == "fp-a");
  for (size_t i = 3; i < 6; ++i) CHECK(report.steps[i].task_id == "fp-b");
  CHECK(report.steps[0].step == 1);
  CHECK(report.steps[5].step == 3);

  // First sighting fails every step except agreeing on the terminal slot;
  // the second sighting is teacher-forced onto gold and scores perfectly.
  CHECK(report.element_acc == Catch::Approx(2.0 / 3.0).margin(1e-12));
  CHECK(report.step_sr == Catch::Approx(0.5).margin(1e-12));
  CHECK(report.task_sr == Catch::Approx(0.5).margin(1e-12));
  CHECK(report.action_f1 == Catch::Approx(35.0 / 66.0).margin(1e-12));
  CHECK(report.avg_steps == Catch::Approx(3.0).margin(1e-12));
  CHECK(store.size() == 0);
}
