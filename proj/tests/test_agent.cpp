// Agent loop: prompt assembly, reply parsing, workflow macros, episodes.

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "awm/agent.hpp"
#include "awm/lm.hpp"
#include "awm/memory.hpp"
#include "awm/prompts.hpp"
#include "awm/simenv.hpp"

#include "support/fixtures.hpp"

using namespace awm;
using testsupport::act;

namespace {

Workflow two_click_workflow(const std::string& id, const std::string& desc) {
  Workflow w;
  w.id = id;
  w.website = "login";
  w.description = desc;
  w.source = WorkflowSource::kRule;
  WorkflowStep a;
  a.action = act("click", {"1"});
  WorkflowStep b;
  b.action = act("click", {"2"});
  w.steps = {a, b};
  return w;
}

Step history_step(Action a) {
  Step s;
  s.action = std::move(a);
  return s;
}

}  // namespace

TEST_CASE("prompt sections appear in order with exact separators") {
  std::vector<Step> history = {history_step(act("click", {"1"})),
                               history_step(act("fill", {"2", "cat"}))};
  std::string p = build_agent_prompt("Site notes", "shop", "Find a mouse",
                                     history, "[1] button 'Go'");
  std::string expected = "Site notes\n\n";
  expected += "Actions available:\n";
  expected += std::string(kDefaultActionDocs);
  expected += "\n";
  expected += "Website: shop\n";
  expected += "Task: Find a mouse\n\n";
  expected += "Previous actions:\n";
  expected += "  1. click('1')\n";
  expected += "  2. fill('2', 'cat')\n\n";
  expected += "Observation:\n[1] button 'Go'\n\n";
  expected += std::string(kAgentReplyInstruction);
  CHECK(p == expected);
}

TEST_CASE("empty memory leaves no leading block") {
  std::string p = build_agent_prompt("", "shop", "Buy", {}, "obs");
  CHECK(p.rfind("Actions available:\n", 0) == 0);
  CHECK(p.find("Previous actions:") == std::string::npos);
}

TEST_CASE("memory with a trailing newline is not double spaced") {
  std::string p = build_agent_prompt("notes\n", "shop", "Buy", {}, "obs");
  CHECK(p.rfind("notes\n\nActions available:\n", 0) == 0);
  CHECK(p.find("notes\n\n\n") == std::string::npos);
}

TEST_CASE("extra action docs follow the built-in docs") {
  std::string p = build_agent_prompt("", "shop", "Buy", {}, "obs",
                                     std::string(kDefaultActionDocs),
                                     "do_login(user)  workflow: Log in\n");
  std::string tail = std::string(kDefaultActionDocs) +
                     "do_login(user)  workflow: Log in\n\nWebsite: shop\n";
  CHECK(p.find(tail) != std::string::npos);
}

TEST_CASE("reply parsing keeps the last action line and nearest reasoning") {
  std::string text =
      "Let me look around.\n"
      "\n"
      "click('3')\n"
      "Actually the search box is better.\n"
      "fill('2', 'cat')\n"
      "thanks";
  AgentReply r = parse_agent_reply(text);
  CHECK(r.action == act("fill", {"2", "cat"}));
  CHECK(r.reasoning == "Actually the search box is better.");
  CHECK(r.raw == text);
}

TEST_CASE("a padded action line still parses") {
  AgentReply r = parse_agent_reply("go\n   stop()  ");
  CHECK(r.action.name == "stop");
  CHECK(r.reasoning == "go");
}

TEST_CASE("a reply with no action line raises") {
  CHECK_THROWS_AS(parse_agent_reply("no actions here\njust words"),
                  NoActionError);
  CHECK_THROWS_AS(parse_agent_reply(""), NoActionError);
}

TEST_CASE("a registry makes macro calls parse as action lines") {
  std::string text = "use the macro\ndo_login('a', 'b')";
  CHECK_THROWS_AS(parse_agent_reply(text), NoActionError);
  ActionRegistry reg;
  reg.add("do_login", 2);
  AgentReply r = parse_agent_reply(text, &reg);
  CHECK(r.action.name == "do_login");
  CHECK(r.action.arg_values() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("predict_step returns the parsed action and records the prompt") {
  MockLm lm({"pick the buy button\nclick('5')"});
  Prediction p = predict_step(lm, "", "shop", "Buy", {}, "[5] button 'Buy'");
  CHECK(p.action == act("click", {"5"}));
  CHECK(p.reasoning == "pick the buy button");
  CHECK(p.lm_calls == 1);
  CHECK_FALSE(p.retried);
  CHECK_FALSE(p.forced);
  std::string expected =
      build_agent_prompt("", "shop", "Buy", {}, "[5] button 'Buy'");
  CHECK(p.prompt == expected);
  REQUIRE(lm.requests().size() == 1);
  CHECK(lm.requests()[0].prompt == expected);
}

TEST_CASE("predict_step passes the sampling config through") {
  MockLm lm({"ok\nstop()"});
  AgentConfig cfg;
  cfg.model = "tiny";
  cfg.temperature = 0.5;
  cfg.max_tokens = 99;
  predict_step(lm, "", "shop", "Buy", {}, "obs", cfg);
  REQUIRE(lm.requests().size() == 1);
  CHECK(lm.requests()[0].model == "tiny");
  CHECK(lm.requests()[0].temperature == 0.5);
  CHECK(lm.requests()[0].max_tokens == 99);
}

TEST_CASE("a reply without an action is retried once with the reminder") {
  MockLm lm({"thinking out loud, no call", "second try\nstop()"});
  Prediction p = predict_step(lm, "", "shop", "Buy", {}, "obs");
  CHECK(p.retried);
  CHECK_FALSE(p.forced);
  CHECK(p.lm_calls == 2);
  CHECK(p.action.name == "stop");
  REQUIRE(lm.requests().size() == 2);
  std::string first = lm.requests()[0].prompt;
  CHECK(lm.requests()[1].prompt ==
        first + "\n" + std::string(kAgentRetryReminder));
  CHECK(p.prompt == lm.requests()[1].prompt);
}

TEST_CASE("two unusable replies force a stop") {
  MockLm lm({"nope", "still nope"});
  Prediction p = predict_step(lm, "", "shop", "Buy", {}, "obs");
  CHECK(p.forced);
  CHECK(p.retried);
  CHECK(p.lm_calls == 2);
  CHECK(p.action == Action{"stop", {}});
  CHECK(p.raw == "still nope");
}

TEST_CASE("retry can be disabled") {
  MockLm lm({"nope"});
  AgentConfig cfg;
  cfg.retry_on_no_action = false;
  Prediction p = predict_step(lm, "", "shop", "Buy", {}, "obs", cfg);
  CHECK(p.forced);
  CHECK_FALSE(p.retried);
  CHECK(p.lm_calls == 1);
  CHECK(lm.call_count() == 1);
}

TEST_CASE("macro names snake_case the description and dodge collisions") {
  MacroSet set = register_macro_actions(
      {two_click_workflow("w1", "Click"), two_click_workflow("w2", "Click!"),
       two_click_workflow("w3", ""), two_click_workflow("w4", "  Fancy--Name ")});
  REQUIRE(set.macros.size() == 4);
  CHECK(set.macros[0].name == "click_2");
  CHECK(set.macros[1].name == "click_3");
  CHECK(set.macros[2].name == "workflow");
  CHECK(set.macros[3].name == "fancy_name");
  CHECK(set.find("click_2") == &set.macros[0]);
  CHECK(set.find("missing") == nullptr);
  CHECK(set.docs.find("click_2()  workflow: Click\n") != std::string::npos);
  Action parsed = parse_action("click_2()", &set.registry);
  CHECK(parsed.name == "click_2");
}

TEST_CASE("duplicate descriptions get increasing suffixes") {
  MacroSet set = register_macro_actions({two_click_workflow("a", "Open it"),
                                         two_click_workflow("b", "Open it"),
                                         two_click_workflow("c", "Open it")});
  CHECK(set.macros[0].name == "open_it");
  CHECK(set.macros[1].name == "open_it_2");
  CHECK(set.macros[2].name == "open_it_3");
}

TEST_CASE("macro parameters are distinct placeholders in first-use order") {
  MacroSet set = register_macro_actions({testsupport::login_workflow()});
  REQUIRE(set.macros.size() == 1);
  const MacroAction& m = set.macros[0];
  CHECK(m.name == "log_in_with_a_username_and_password");
  CHECK(m.params == std::vector<std::string>{"username", "password"});
  CHECK(m.workflow_id == "login:human:1");
  CHECK(set.docs ==
        "log_in_with_a_username_and_password(username, password)  "
        "workflow: Log in with a username and password\n");
}

TEST_CASE("a login macro runs all five steps and binds its arguments") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  TaskSpec task = testsupport::login_task("bob");
  std::string initial = env.reset(task);

  MacroSet set = register_macro_actions({testsupport::login_workflow()});
  const MacroAction* m = set.find("log_in_with_a_username_and_password");
  REQUIRE(m != nullptr);
  MacroRunResult run = expand_macro(env, *m, {"bob", "hunter2"});

  REQUIRE(run.steps.size() == 5);
  CHECK_FALSE(run.error.has_value());
  CHECK(run.steps[0].action == act("click", {"1"}));
  CHECK(run.steps[1].action == act("type", {"1", "bob"}));
  CHECK(run.steps[2].action == act("click", {"2"}));
  CHECK(run.steps[3].action == act("type", {"2", "hunter2"}));
  CHECK(run.steps[4].action == act("click", {"3"}));
  for (const auto& s : run.steps) {
    REQUIRE(s.reasoning.has_value());
    CHECK(*s.reasoning == "macro log_in_with_a_username_and_password");
  }
  CHECK(run.steps[0].observation == initial);
  CHECK(run.observation == env.observation());
  CHECK(env.current_page() == "account");
  REQUIRE(env.state().count("user") == 1);
  CHECK(env.state().at("user") == "bob");
  CHECK(env.evaluate());
}

TEST_CASE("a broken workflow halts at the failing step with a partial trace") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  env.reset(testsupport::login_task("bob"));

  MacroSet set = register_macro_actions({testsupport::broken_login_workflow()});
  REQUIRE(set.macros.size() == 1);
  CHECK(set.macros[0].params == std::vector<std::string>{"username"});
  MacroRunResult run = expand_macro(env, set.macros[0], {"bob"});

  REQUIRE(run.steps.size() == 2);
  REQUIRE(run.error.has_value());
  CHECK(run.steps[0].action == act("click", {"1"}));
  CHECK(run.steps[1].action == act("type", {"1", "bob"}));
  CHECK(env.current_page() == "signin");
  CHECK(env.state().count("user") == 0);
}

TEST_CASE("macro expansion validates arity and bindings") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  env.reset(testsupport::login_task("bob"));
  MacroSet set = register_macro_actions({testsupport::login_workflow()});
  const MacroAction& m = set.macros[0];
  CHECK_THROWS_AS(expand_macro(env, m, {"bob"}), ArityError);
  CHECK_THROWS_AS(expand_macro(env, m, {"{username}", "pw"}),
                  UnboundPlaceholderError);
}

TEST_CASE("macro expansion stops at the step budget") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  env.reset(testsupport::login_task("bob"));
  MacroSet set = register_macro_actions({testsupport::login_workflow()});
  MacroRunResult run = expand_macro(env, set.macros[0], {"bob", "pw"}, 3);
  CHECK(run.steps.size() == 3);
  CHECK_FALSE(run.error.has_value());
  CHECK(env.current_page() == "signin");
}

TEST_CASE("an episode follows the script to success") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  TaskSpec task = testsupport::login_task("bob");
  MockLm lm({"focus the field\nclick('1')", "enter the name\ntype('1', 'bob')",
             "submit\nclick('3')", "done\nstop()"});
  EpisodeResult r = run_episode(env, task, lm, "");

  CHECK(r.finished);
  CHECK(r.success);
  CHECK(r.lm_calls == 4);
  CHECK(r.env_errors == 0);
  CHECK(r.forced_stops == 0);
  const Experience& e = r.experience;
  CHECK(e.id == "login-1");
  CHECK(e.website == "login");
  CHECK(e.instruction == task.instruction);
  CHECK(e.template_id == task.template_id);
  CHECK(e.success == std::optional<bool>{true});
  REQUIRE(e.steps.size() == 4);
  CHECK(e.steps[0].action == act("click", {"1"}));
  CHECK(e.steps[3].action == Action{"stop", {}});
  CHECK(e.steps[0].reasoning == std::optional<std::string>{"focus the field"});
  CHECK(e.steps[0].state_desc == std::optional<std::string>{e.steps[0].observation});
}

TEST_CASE("environment errors feed back as the next observation") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  TaskSpec task = testsupport::login_task("bob");
  MockLm lm({"oops\nclick('99')", "fine\nclick('1')",
             "report\nsend_msg_to_user('hi')"});
  EpisodeResult r = run_episode(env, task, lm, "");

  CHECK(r.env_errors == 1);
  CHECK(r.finished);
  CHECK_FALSE(r.success);
  REQUIRE(r.experience.steps.size() == 3);
  REQUIRE(lm.requests().size() == 3);
  std::string second = lm.requests()[1].prompt;
  CHECK(second.find("Observation:\nError: ") != std::string::npos);
  std::string third = lm.requests()[2].prompt;
  CHECK(third.find("Observation:\nError: ") == std::string::npos);
}

TEST_CASE("episodes stop at the step budget") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  AgentConfig cfg;
  cfg.max_steps = 2;
  MockLm lm({"a\nclick('1')", "b\nclick('1')"});
  EpisodeResult r = run_episode(env, testsupport::login_task("bob"), lm, "",
                                cfg);
  CHECK(r.experience.steps.size() == 2);
  CHECK_FALSE(r.finished);
  CHECK_FALSE(r.success);
  CHECK(lm.call_count() == 2);
}

TEST_CASE("a forced stop terminates the episode") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  MockLm lm({"word salad", "more salad"});
  EpisodeResult r = run_episode(env, testsupport::login_task("bob"), lm, "");
  CHECK(r.forced_stops == 1);
  CHECK(r.lm_calls == 2);
  CHECK(r.finished);
  CHECK_FALSE(r.success);
  REQUIRE(r.experience.steps.size() == 1);
  CHECK(r.experience.steps[0].action == Action{"stop", {}});
}

TEST_CASE("trace captures prompts and replies when enabled") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  AgentConfig cfg;
  cfg.trace = true;
  MockLm lm({"done\nstop()"});
  EpisodeResult r = run_episode(env, testsupport::login_task("bob"), lm, "",
                                cfg);
  CHECK(r.trace.find("=== step 1 prompt ===\n") != std::string::npos);
  CHECK(r.trace.find("=== reply ===\ndone\nstop()\n") != std::string::npos);

  MockLm quiet({"done\nstop()"});
  Environment env2(site);
  EpisodeResult r2 = run_episode(env2, testsupport::login_task("bob"), quiet,
                                 "");
  CHECK(r2.trace.empty());
}

TEST_CASE("the store-aware episode renders memory and registers macros") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  TaskSpec task = testsupport::login_task("bob");
  WorkflowStore store(MemoryMode::kOnline);
  REQUIRE(store.add_workflows({testsupport::login_workflow()}) == 1);

  AgentConfig cfg;
  cfg.enable_macro_actions = true;
  MockLm lm({"use the stored routine\n"
             "log_in_with_a_username_and_password('bob', 'hunter2')",
             "finish\nstop()"});
  EpisodeResult r = run_episode(env, task, lm, store, cfg);

  CHECK(r.success);
  CHECK(r.finished);
  REQUIRE(r.experience.steps.size() == 6);
  CHECK(r.experience.steps[0].reasoning ==
        std::optional<std::string>{"macro log_in_with_a_username_and_password"});
  CHECK(r.experience.steps[4].action == act("click", {"3"}));
  CHECK(r.experience.steps[5].action == Action{"stop", {}});

  REQUIRE(lm.requests().size() == 2);
  const std::string& first = lm.requests()[0].prompt;
  CHECK(first.find("Workflows:\n\n## login: Log in with a username and "
                   "password\n") != std::string::npos);
  CHECK(first.find("log_in_with_a_username_and_password(username, password)  "
                   "workflow:") != std::string::npos);
}

TEST_CASE("macro expansion respects the episode step budget") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  WorkflowStore store(MemoryMode::kOnline);
  store.add_workflows({testsupport::login_workflow()});
  AgentConfig cfg;
  cfg.enable_macro_actions = true;
  cfg.max_steps = 3;
  MockLm lm({"go\nlog_in_with_a_username_and_password('bob', 'pw')"});
  EpisodeResult r = run_episode(env, testsupport::login_task("bob"), lm, store,
                                cfg);
  CHECK(r.experience.steps.size() == 3);
  CHECK_FALSE(r.finished);
  CHECK(lm.call_count() == 1);
}

TEST_CASE("macros are off without the config flag") {
  SiteDef site = testsupport::login_site();
  Environment env(site);
  WorkflowStore store(MemoryMode::kOnline);
  store.add_workflows({testsupport::login_workflow()});
  MockLm lm;
  lm.push_response("try the macro\nlog_in_with_a_username_and_password('b', 'p')");
  lm.push_response("give up");
  lm.push_response("really give up");
  EpisodeResult r = run_episode(env, testsupport::login_task("bob"), lm, store);
  CHECK(r.forced_stops == 1);
  REQUIRE(r.experience.steps.size() == 1);
  CHECK(r.experience.steps[0].action == Action{"stop", {}});
}
