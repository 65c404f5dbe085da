#pragma once

// Hand-built inputs with hand-computed expected values, shared by the unit
// suites and the acceptance runner. Numbers quoted in comments were worked
// out by hand from the metric definitions, not by running the code.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "awm/action.hpp"
#include "awm/simenv.hpp"
#include "awm/types.hpp"

namespace testsupport {

inline awm::Action act(const std::string& name,
                       std::vector<std::string> args) {
  awm::Action a;
  a.name = name;
  for (auto& v : args) a.args.push_back(awm::ActionArg{std::move(v), true});
  return a;
}

inline awm::Action act_bare(const std::string& name,
                            std::vector<std::pair<std::string, bool>> args) {
  awm::Action a;
  a.name = name;
  for (auto& [v, quoted] : args) a.args.push_back(awm::ActionArg{v, quoted});
  return a;
}

inline awm::Step step_of(awm::Action a) {
  awm::Step s;
  s.observation = "obs";
  s.action = std::move(a);
  return s;
}

inline awm::Experience experience_of(std::string id, std::string website,
                                     std::string instruction,
                                     std::vector<awm::Action> actions) {
  awm::Experience e;
  e.id = std::move(id);
  e.website = std::move(website);
  e.instruction = std::move(instruction);
  for (auto& a : actions) e.steps.push_back(step_of(std::move(a)));
  return e;
}

// ---------------------------------------------------------------------------
// Step filtering: a five-step trajectory where the unquoted element ids are
// stale and must be dropped, keeping the three executable steps.
// ---------------------------------------------------------------------------

inline awm::Experience filter_fixture_experience() {
  return experience_of(
      "filter-1", "shop", "Filter the results down to cat items.",
      {act_bare("click", {{"12", false}}),
       act("click", {"12"}),
       act("click", {"30"}),
       act_bare("type", {{"44", false}, {"cat", true}}),
       act("type", {"44", "cat"})});
}

inline std::vector<std::string> filter_fixture_expected_rendered() {
  return {"click('12')", "click('30')", "type('44', 'cat')"};
}

// Same action signature twice; rule induction must keep exactly one. The
// lexicographically lower id arrives second, so survivor choice is visible.
inline std::vector<awm::Experience> duplicate_pair() {
  return {experience_of("dup-b", "shop", "Find a cheap keyboard.",
                        {act("click", {"12"}), act("click", {"30"}),
                         act("type", {"44", "cat"})}),
          experience_of("dup-a", "shop", "Find a cheap monitor.",
                        {act("click", {"5"}), act("click", {"6"}),
                         act("type", {"7", "dog"})})};
}

// ---------------------------------------------------------------------------
// Login flow used for macro-action tests: two textboxes and a submit button,
// with the signed-in user recorded in state.
// ---------------------------------------------------------------------------

inline awm::SiteDef login_site() {
  awm::SiteDef s;
  s.website = "login";
  s.start_page = "signin";
  s.pages = {
      {"signin",
       {{"1", "textbox", "Username", {}},
        {"2", "textbox", "Password", {}},
        {"3", "button", "Log in", {}}}},
      {"account",
       {{"10", "text", "Signed in as {state:user}", {}},
        {"11", "link", "Sign out", {}}}}};
  s.transitions = {
      {"signin", "3", "click", "", "account", {{"user", "{input:1}"}}},
      {"account", "11", "click", "", "signin", {}}};
  return s;
}

inline awm::TaskSpec login_task(const std::string& username) {
  awm::TaskSpec t;
  t.id = "login-1";
  t.website = "login";
  t.template_id = "login";
  t.instruction = "Log in as " + username + ".";
  t.slots = {{"username", username}};
  t.check = {"state_equals", "user", username};
  return t;
}

inline awm::Workflow login_workflow() {
  awm::Workflow w;
  w.id = "login:human:1";
  w.website = "login";
  w.description = "Log in with a username and password";
  w.source = awm::WorkflowSource::kHuman;
  auto add = [&](awm::Action a) {
    awm::WorkflowStep s;
    s.action = std::move(a);
    w.steps.push_back(std::move(s));
  };
  add(act("click", {"1"}));
  add(act("type", {"1", "{username}"}));
  add(act("click", {"2"}));
  add(act("type", {"2", "{password}"}));
  add(act("click", {"3"}));
  return w;
}

// Third step targets an element the page does not have, so expansion must
// halt there with the first two steps executed.
inline awm::Workflow broken_login_workflow() {
  awm::Workflow w;
  w.id = "login:human:2";
  w.website = "login";
  w.description = "Log in through the missing shortcut";
  w.source = awm::WorkflowSource::kHuman;
  auto add = [&](awm::Action a) {
    awm::WorkflowStep s;
    s.action = std::move(a);
    w.steps.push_back(std::move(s));
  };
  add(act("click", {"1"}));
  add(act("type", {"1", "{username}"}));
  add(act("click", {"9"}));
  add(act("click", {"3"}));
  return w;
}

// ---------------------------------------------------------------------------
// Ten hand-scored steps across three tasks.
//
// shop/fx-1: 4 steps, all exact. shop/fx-2: wrong element, a partial-token
// fill, one exact. map/fx-3: one exact, wrong element with same name, and a
// bare stop() against a message terminal.
//
// element_acc 8/10, action_f1 62/70, step_sr 6/10, task_sr 1/3, avg 10/3.
// ---------------------------------------------------------------------------

struct ScoredStepFixture {
  std::string task_id;
  std::string website;
  awm::Action predicted;
  awm::Action gold;
};

struct MetricFixture {
  std::vector<ScoredStepFixture> steps;
  double element_acc = 8.0 / 10.0;
  double action_f1 = 62.0 / 70.0;
  double step_sr = 6.0 / 10.0;
  double task_sr = 1.0 / 3.0;
  double avg_steps = 10.0 / 3.0;
};

inline MetricFixture metric_fixture() {
  MetricFixture f;
  auto add = [&](const std::string& id, const std::string& site,
                 awm::Action pred, awm::Action gold) {
    f.steps.push_back({id, site, std::move(pred), std::move(gold)});
  };
  add("fx-1", "shop", act("click", {"5"}), act("click", {"5"}));
  add("fx-1", "shop", act("fill", {"1", "laptop"}), act("fill", {"1", "laptop"}));
  add("fx-1", "shop", act("click", {"2"}), act("click", {"2"}));
  add("fx-1", "shop", act("send_msg_to_user", {"done"}),
      act("send_msg_to_user", {"done"}));
  add("fx-2", "shop", act("click", {"7"}), act("click", {"5"}));
  add("fx-2", "shop", act("type", {"44", "cat food"}),
      act("type", {"44", "dry cat food"}));
  add("fx-2", "shop", act("click", {"9"}), act("click", {"9"}));
  add("fx-3", "map", act("fill", {"1", "paris"}), act("fill", {"1", "paris"}));
  add("fx-3", "map", act("click", {"3"}), act("click", {"2"}));
  add("fx-3", "map", act("stop", {}), act("send_msg_to_user", {"42"}));
  return f;
}

// ---------------------------------------------------------------------------
// Workflow quality fixture: three workflows over four distinct action-name
// bigrams, exactly one of which (click,fill) appears in two workflows, so
// function_overlap is 1/4. Against the gold and predicted experiences below,
// coverage is 3/4 and utility_rate is 2/3.
// ---------------------------------------------------------------------------

inline std::vector<awm::Workflow> overlap_workflows() {
  auto wf = [](std::string id, std::string description,
               std::vector<awm::Action> actions) {
    awm::Workflow w;
    w.id = std::move(id);
    w.website = "shop";
    w.description = std::move(description);
    for (auto& a : actions) {
      awm::WorkflowStep s;
      s.action = std::move(a);
      w.steps.push_back(std::move(s));
    }
    return w;
  };
  return {wf("shop:rule:1", "Search the catalog",
             {act("click", {"1"}), act("fill", {"2", "{query}"}),
              act("click", {"3"})}),
          wf("shop:rule:2", "Search by keyboard",
             {act("click", {"1"}), act("fill", {"2", "laptop"}),
              act("press", {"2", "Enter"})}),
          wf("shop:rule:3", "Peek at a tooltip",
             {act("hover", {"9"}), act("click", {"10"})})};
}

inline std::vector<awm::Experience> overlap_gold_experiences() {
  return {experience_of("gold-1", "shop", "Search for a wireless mouse.",
                        {act("click", {"1"}),
                         act("fill", {"2", "wireless mouse"}),
                         act("click", {"99"})}),
          experience_of("gold-2", "shop", "Check the tooltip.",
                        {act("hover", {"9"})})};
}

inline std::vector<awm::Experience> overlap_predicted_experiences() {
  return {experience_of("pred-1", "shop", "Search for a lamp.",
                        {act("click", {"1"}), act("fill", {"2", "lamp"}),
                         act("click", {"3"})}),
          experience_of("pred-2", "shop", "Give up early.",
                        {act("fill", {"2", "lamp"}), act("stop", {})}),
          experience_of("pred-3", "shop", "Tooltip then leave.",
                        {act("hover", {"9"}), act("click", {"10"}),
                         act("stop", {})})};
}

// ---------------------------------------------------------------------------
// Judge replies that must never count as success: the verdict line has to be
// exactly "Status: SUCCESS" after trimming, on a line of its own.
// ---------------------------------------------------------------------------

inline std::vector<std::string> adversarial_judge_replies() {
  return {"Status: SUCCESSFUL",
          "status: success",
          "Status:SUCCESS",
          "SUCCESS",
          "Status: FAILURE",
          "Status: SUCCESS.",
          "The line Status: SUCCESS was expected but never earned.",
          "Result: SUCCESS\nStatus: FAILURE",
          "Status: SUCCES\nEverything else looked fine.",
          "",
          "Status:\nSUCCESS",
          "prefix Status: SUCCESS",
          "Status: SUCCESS suffix"};
}

// ---------------------------------------------------------------------------
// Randomized inputs. Ids are unique so id-ordered selection is total.
// ---------------------------------------------------------------------------

inline awm::Experience random_experience(std::mt19937& rng, int serial) {
  static const std::vector<awm::Action> kPool = {
      act("click", {"12"}),
      act("click", {"30"}),
      act_bare("click", {{"7", false}}),
      act("fill", {"3", "blue socks"}),
      act("type", {"44", "cat"}),
      act("hover", {"9"}),
      act("press", {"2", "Enter"}),
      act("select_option", {"5", "price"}),
      act("send_msg_to_user", {"all done"}),
      act("stop", {})};
  static const std::vector<std::string> kSites = {"alpha", "beta"};
  static const std::vector<std::string> kTemplates = {"t1", "t2", "t3"};

  awm::Experience e;
  e.id = std::string(1, static_cast<char>('a' + rng() % 26)) +
         std::string(1, static_cast<char>('a' + rng() % 26)) + "-" +
         std::to_string(serial);
  e.website = kSites[rng() % kSites.size()];
  e.instruction = "Do task number " + std::to_string(serial) + ".";
  if (rng() % 2) e.template_id = kTemplates[rng() % kTemplates.size()];
  if (rng() % 3 == 0) e.success = rng() % 2 == 0;
  size_t n_steps = 1 + rng() % 5;
  for (size_t s = 0; s < n_steps; ++s) {
    awm::Step st = step_of(kPool[rng() % kPool.size()]);
    st.observation = "Page: p" + std::to_string(rng() % 4);
    if (rng() % 2) st.state_desc = "on page " + std::to_string(rng() % 4);
    if (rng() % 3 == 0) st.html = "<div id='" + std::to_string(rng() % 9) + "'/>";
    if (rng() % 2) st.reasoning = "step " + std::to_string(s) + " seems right";
    e.steps.push_back(std::move(st));
  }
  return e;
}

inline std::vector<awm::Experience> random_experiences(std::mt19937& rng,
                                                       size_t max_n = 20) {
  std::vector<awm::Experience> out;
  size_t n = 1 + rng() % max_n;
  for (size_t i = 0; i < n; ++i) out.push_back(random_experience(rng, static_cast<int>(i)));
  return out;
}

// Workflows in canonical text shape: a step carries a state line only when a
// reasoning line follows, which is exactly what the text format can encode.
inline awm::Workflow random_workflow(std::mt19937& rng, int serial) {
  static const std::vector<awm::Action> kPool = {
      act("click", {"12"}),
      act_bare("click", {{"7", false}}),
      act("fill", {"3", "{query}"}),
      act("type", {"44", "cat"}),
      act("press", {"2", "Enter"}),
      act("select_option", {"5", "price"}),
      act("hover", {"9"}),
      act("send_msg_to_user", {"the answer is 7"}),
      act("stop", {})};
  static const std::vector<std::string> kLines = {
      "the results page lists matching items",
      "the form is empty and waiting",
      "a detail panel is open",
      "this narrows the search",
      "the button submits the form"};

  awm::Workflow w;
  w.id = "rand:" + std::to_string(serial);
  w.website = (rng() % 2) ? "alpha" : "beta";
  w.description = "Routine number " + std::to_string(serial);
  size_t n_steps = 2 + rng() % 4;
  for (size_t s = 0; s < n_steps; ++s) {
    awm::WorkflowStep st;
    st.action = kPool[rng() % kPool.size()];
    unsigned shape = rng() % 3;
    if (shape >= 1) st.reasoning = kLines[rng() % kLines.size()];
    if (shape == 2) {
      st.state_desc = kLines[rng() % kLines.size()];
      if (rng() % 2) {
        *st.state_desc += "\n" + kLines[rng() % kLines.size()];
      }
    }
    w.steps.push_back(std::move(st));
  }
  return w;
}

}  // namespace testsupport
