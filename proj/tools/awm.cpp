// Command-line front end: induction, simulated-site runs, and evaluation.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "awm/awm.hpp"

namespace fs = std::filesystem;

namespace {

struct EndpointFlags {
  std::string base_url;
  std::string api_key;
  std::string model;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lm-base-url", base_url, "LM endpoint base URL");
    cmd->add_option("--lm-api-key", api_key, "LM endpoint API key");
    cmd->add_option("--lm-model", model, "LM model name");
  }

  awm::LmEndpointConfig resolve() const {
    awm::LmEndpointConfig cfg;
    if (!base_url.empty()) cfg.base_url = base_url;
    if (!api_key.empty()) cfg.api_key = api_key;
    if (!model.empty()) cfg.model = model;
    awm::apply_env_overrides(cfg);
    return cfg;
  }
};

std::unique_ptr<awm::LmClient> make_http_lm(const EndpointFlags& flags) {
  awm::LmEndpointConfig cfg = flags.resolve();
  if (cfg.base_url.empty()) {
    throw CLI::ValidationError(
        "an LM endpoint is required; pass --lm-base-url or set AWM_LM_BASE_URL");
  }
  return std::make_unique<awm::HttpLm>(cfg);
}

// Replays gold actions from a dataset: used to sanity-check the stepwise
// evaluator without a live model.
class GoldEchoPolicy : public awm::LmClient {
 public:
  explicit GoldEchoPolicy(std::vector<awm::Experience> gold)
      : gold_(std::move(gold)) {}

  awm::LmResponse complete(const awm::LmRequest& req) override {
    const awm::Experience* match = nullptr;
    std::istringstream in(req.prompt);
    std::string line;
    int prior = 0;
    bool in_actions = false;
    while (std::getline(in, line)) {
      if (line.rfind("Task: ", 0) == 0) {
        std::string instruction = line.substr(6);
        for (const auto& e : gold_) {
          if (e.instruction == instruction) {
            match = &e;
            break;
          }
        }
      } else if (line == "Previous actions:") {
        in_actions = true;
      } else if (in_actions) {
        if (line.rfind("  ", 0) == 0) {
          ++prior;
        } else {
          in_actions = false;
        }
      }
    }
    if (!match || prior >= static_cast<int>(match->steps.size())) {
      return awm::LmResponse{"stop()"};
    }
    return awm::LmResponse{
        awm::render_action(match->steps[static_cast<size_t>(prior)].action)};
  }

 private:
  std::vector<awm::Experience> gold_;
};

std::vector<awm::SiteDef> load_sites(const std::string& spec) {
  std::vector<awm::SiteDef> out;
  std::stringstream ss(spec);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (name == "all") {
      for (auto& s : awm::builtin_sites()) out.push_back(std::move(s));
    } else if (name.size() > 5 && name.substr(name.size() - 5) == ".json") {
      // A site file holds either one site object or an array of them.
      nlohmann::json j = nlohmann::json::parse(awm::read_text_file(name));
      if (j.is_array()) {
        for (const auto& e : j) out.push_back(awm::site_from_json(e));
      } else {
        out.push_back(awm::site_from_json(j));
      }
    } else {
      out.push_back(awm::builtin_site(name));
    }
  }
  if (out.empty()) throw CLI::ValidationError("no site given");
  return out;
}

// One instance of every template per round, sites interleaved round-major.
std::vector<awm::TaskSpec> build_stream(const std::vector<awm::SiteDef>& sites,
                                        int rounds, unsigned seed) {
  std::vector<std::vector<awm::TaskSpec>> per_site;
  for (const auto& s : sites) {
    per_site.push_back(awm::generate_suite(
        s, rounds * static_cast<int>(s.templates.size()), seed));
  }
  std::vector<awm::TaskSpec> stream;
  for (int r = 0; r < rounds; ++r) {
    for (size_t si = 0; si < sites.size(); ++si) {
      size_t width = sites[si].templates.size();
      for (size_t k = 0; k < width; ++k) {
        stream.push_back(per_site[si][static_cast<size_t>(r) * width + k]);
      }
    }
  }
  return stream;
}

void write_summary(const fs::path& dir, const nlohmann::json& j) {
  awm::write_text_file((dir / "summary.json").string(), j.dump(2) + "\n");
}

std::string online_rows_csv(const std::vector<awm::OnlineEpisodeRow>& rows) {
  std::string out =
      "episode,task_id,website,success,judged_success,judge_kind,workflows_after\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i + 1) + "," + rows[i].task_id + "," +
           rows[i].website + "," + (rows[i].success ? "1" : "0") + "," +
           (rows[i].judged_success ? "1" : "0") + "," +
           awm::to_string(rows[i].judge_kind) + "," +
           std::to_string(rows[i].workflows_after) + "\n";
  }
  return out;
}

void write_traces(const fs::path& dir, const std::vector<std::string>& traces) {
  if (traces.empty()) return;
  std::string all;
  for (const auto& t : traces) all += t + "\n";
  awm::write_text_file((dir / "trace.txt").string(), all);
}

int cmd_induce(const std::string& in, const std::string& out,
               const std::string& mode, int dedup_n, unsigned seed,
               bool seeded, int max_prompt_chars, const EndpointFlags& flags) {
  awm::InductionConfig cfg;
  cfg.mode = mode == "lm" ? awm::InductionMode::kLm : awm::InductionMode::kRule;
  cfg.dedup_n = dedup_n;
  if (seeded) cfg.seed = seed;
  cfg.max_prompt_chars = max_prompt_chars;

  std::vector<awm::Experience> experiences = awm::load_experiences(in);
  std::map<std::string, std::vector<awm::Experience>> by_site;
  std::vector<std::string> site_order;
  for (auto& e : experiences) {
    if (by_site.find(e.website) == by_site.end()) site_order.push_back(e.website);
    by_site[e.website].push_back(std::move(e));
  }

  std::unique_ptr<awm::LmClient> lm;
  if (cfg.mode == awm::InductionMode::kLm) lm = make_http_lm(flags);

  std::vector<awm::Workflow> workflows;
  int skips = 0;
  for (const auto& site : site_order) {
    awm::InductionResult r =
        cfg.mode == awm::InductionMode::kLm
            ? awm::induce_lm(by_site[site], cfg, *lm)
            : awm::induce_rule(by_site[site], cfg);
    for (auto& w : r.workflows) workflows.push_back(std::move(w));
    for (const auto& s : r.skips) {
      ++skips;
      std::cerr << "skip [" << site << "] " << s.experience_id << ": "
                << s.reason << "\n";
    }
    for (const auto& w : r.warnings) {
      std::cerr << "warning [" << site << "] " << w << "\n";
    }
  }
  awm::write_text_file(out, awm::render_workflows(workflows));
  std::cout << "experiences: " << experiences.size()
            << "\nworkflows: " << workflows.size() << "\nskips: " << skips
            << "\nwrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agent workflow memory over simulated and recorded web tasks"};
  app.require_subcommand(1);

  // --- induce ---------------------------------------------------------
  auto* induce = app.add_subcommand(
      "induce", "Induce workflows from an experience file");
  std::string in_path, out_path = "workflows.txt", mode = "rule";
  int dedup_n = 1, max_prompt_chars = 24000;
  unsigned seed = 0;
  bool seeded = false;
  EndpointFlags induce_flags;
  induce->add_option("--in", in_path, "experience JSONL file")->required();
  induce->add_option("--out", out_path, "output workflow file");
  induce->add_option("--mode", mode, "rule or lm")
      ->check(CLI::IsMember({"rule", "lm"}));
  induce->add_option("--dedup-n", dedup_n, "representatives kept per group");
  induce->add_option("--seed", seed, "seeded representative selection")
      ->each([&](const std::string&) { seeded = true; });
  induce->add_option("--max-prompt-chars", max_prompt_chars,
                     "prompt batching budget");
  induce_flags.attach(induce);

  // --- simgen ---------------------------------------------------------
  auto* simgen = app.add_subcommand(
      "simgen", "Generate a task suite for a simulated site");
  std::string sg_site = "map", sg_suite = "suite.json", sg_experiences,
              sg_site_json;
  int sg_n = 25;
  unsigned sg_seed = 7;
  simgen->add_option("--site", sg_site,
                     "map, shop, forum, all, or a site .json file");
  simgen->add_option("--n", sg_n, "tasks per site");
  simgen->add_option("--seed", sg_seed, "suite seed");
  simgen->add_option("--suite", sg_suite, "output suite file");
  simgen->add_option("--experiences", sg_experiences,
                     "also replay reference solutions to this JSONL file");
  simgen->add_option("--site-json", sg_site_json,
                     "also write the site definition(s) as JSON");

  // --- run-offline ----------------------------------------------------
  auto* offline = app.add_subcommand(
      "run-offline", "Induce once from seed tasks, then run with frozen memory");
  std::string off_site = "map", off_out = "runs/offline", off_mode = "rule";
  int off_seed_tasks = 15, off_eval_tasks = 10;
  unsigned off_seed = 7;
  int off_max_steps = 30;
  bool off_scripted = false, off_no_memory = false, off_trace = false,
       off_macros = false;
  EndpointFlags off_flags;
  offline->add_option("--site", off_site, "simulated site");
  offline->add_option("--n-seed", off_seed_tasks, "seed tasks to induce from");
  offline->add_option("--n-tasks", off_eval_tasks, "evaluation tasks");
  offline->add_option("--seed", off_seed, "suite seed");
  offline->add_option("--mode", off_mode, "induction mode: rule or lm")
      ->check(CLI::IsMember({"rule", "lm"}));
  offline->add_option("--max-steps", off_max_steps, "per-episode step budget");
  offline->add_option("--out-dir", off_out, "run output directory");
  offline->add_flag("--scripted", off_scripted,
                    "use the built-in scripted policy instead of an LM");
  offline->add_flag("--no-memory", off_no_memory,
                    "skip induction (baseline without workflows)");
  offline->add_flag("--macro-actions", off_macros,
                    "register workflows as callable macro actions");
  offline->add_flag("--trace", off_trace, "log every prompt and reply");
  off_flags.attach(offline);

  // --- run-online -----------------------------------------------------
  auto* online = app.add_subcommand(
      "run-online", "Stream tasks; induce from each judged success");
  std::string on_sites = "map,shop", on_out = "runs/online", on_mode = "rule",
              on_memory = "online";
  int on_rounds = 5, on_max_steps = 30;
  unsigned on_seed = 7;
  bool on_scripted = false, on_no_memory = false, on_trace = false,
       on_macros = false, on_induce_all = false;
  EndpointFlags on_flags;
  online->add_option("--sites", on_sites, "comma-separated simulated sites");
  online->add_option("--rounds", on_rounds,
                     "rounds through the template set");
  online->add_option("--seed", on_seed, "suite seed");
  online->add_option("--mode", on_mode, "induction mode: rule or lm")
      ->check(CLI::IsMember({"rule", "lm"}));
  online->add_option("--memory-mode", on_memory,
                     "online or offline+online (offline+online seeds first)");
  online->add_option("--max-steps", on_max_steps, "per-episode step budget");
  online->add_option("--out-dir", on_out, "run output directory");
  online->add_flag("--scripted", on_scripted,
                   "use the built-in scripted policy instead of an LM");
  online->add_flag("--no-memory", on_no_memory,
                   "never add workflows (baseline)");
  online->add_flag("--macro-actions", on_macros,
                   "register workflows as callable macro actions");
  online->add_flag("--induce-all", on_induce_all,
                   "re-induce from every accumulated success, not just the newest");
  online->add_flag("--trace", on_trace, "log every prompt and reply");
  on_flags.attach(online);

  // --- eval-steps -----------------------------------------------------
  auto* evalsteps = app.add_subcommand(
      "eval-steps", "Teacher-forced stepwise evaluation on gold experiences");
  std::string es_in, es_workflows, es_out = "steps.csv", es_policy = "http";
  EndpointFlags es_flags;
  evalsteps->add_option("--in", es_in, "gold experience JSONL file")->required();
  evalsteps->add_option("--workflows", es_workflows,
                        "workflow file to put in memory");
  evalsteps->add_option("--out", es_out, "per-step CSV report");
  evalsteps->add_option("--policy", es_policy, "http or gold (echo the gold)")
      ->check(CLI::IsMember({"http", "gold"}));
  es_flags.attach(evalsteps);

  // --- quality --------------------------------------------------------
  auto* quality = app.add_subcommand(
      "quality", "Workflow-set quality against experience files");
  std::string q_workflows, q_experiences, q_predicted, q_out;
  quality->add_option("--workflows", q_workflows, "workflow file")->required();
  quality->add_option("--experiences", q_experiences,
                      "gold experience JSONL file (coverage)")
      ->required();
  quality->add_option("--predicted", q_predicted,
                      "predicted experience JSONL file (utility); defaults to "
                      "the gold file");
  quality->add_option("--out", q_out, "write the report JSON here too");

  // --- curve ----------------------------------------------------------
  auto* curve = app.add_subcommand(
      "curve", "Cumulative success curve from an episode CSV");
  std::string c_in, c_out = "curve.csv";
  curve->add_option("--in", c_in, "episode CSV with a success column")
      ->required();
  curve->add_option("--out", c_out, "output curve CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*induce) {
      return cmd_induce(in_path, out_path, mode, dedup_n, seed, seeded,
                        max_prompt_chars, induce_flags);
    }

    if (*simgen) {
      std::vector<awm::SiteDef> sites = load_sites(sg_site);
      std::vector<awm::TaskSpec> tasks;
      std::vector<awm::Experience> replays;
      for (const auto& s : sites) {
        auto suite = awm::generate_suite(s, sg_n, sg_seed);
        if (!sg_experiences.empty()) {
          awm::Environment env(s);
          for (const auto& t : suite) {
            replays.push_back(awm::replay_solution(env, t));
          }
        }
        for (auto& t : suite) tasks.push_back(std::move(t));
      }
      awm::write_text_file(sg_suite, awm::suite_to_json_text(tasks));
      std::cout << "tasks: " << tasks.size() << "\nwrote " << sg_suite << "\n";
      if (!sg_experiences.empty()) {
        awm::save_experiences(sg_experiences, replays);
        std::cout << "wrote " << sg_experiences << "\n";
      }
      if (!sg_site_json.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& s : sites) j.push_back(awm::site_to_json(s));
        awm::write_text_file(sg_site_json, j.dump(2) + "\n");
        std::cout << "wrote " << sg_site_json << "\n";
      }
      return 0;
    }

    if (*offline) {
      awm::SiteDef site = awm::builtin_site(off_site);
      auto seed_tasks = awm::generate_suite(site, off_seed_tasks, off_seed);
      auto eval_tasks = awm::generate_suite(site, off_eval_tasks, off_seed + 1);
      std::vector<awm::Experience> seeds =
          off_no_memory ? std::vector<awm::Experience>{}
                        : awm::collect_seed_experiences(site, seed_tasks);

      awm::InductionConfig icfg;
      icfg.mode = off_mode == "lm" ? awm::InductionMode::kLm
                                   : awm::InductionMode::kRule;
      awm::AgentConfig acfg;
      acfg.max_steps = off_max_steps;
      acfg.memory_mode = awm::MemoryMode::kOffline;
      acfg.enable_macro_actions = off_macros;
      acfg.trace = off_trace;

      std::unique_ptr<awm::LmClient> http;
      awm::ScriptedPolicy scripted([&] {
        std::vector<awm::TaskSpec> all = seed_tasks;
        all.insert(all.end(), eval_tasks.begin(), eval_tasks.end());
        return all;
      }());
      awm::LmClient* policy = &scripted;
      if (!off_scripted) {
        http = make_http_lm(off_flags);
        policy = http.get();
      }
      std::unique_ptr<awm::LmClient> induction_lm;
      if (icfg.mode == awm::InductionMode::kLm) {
        induction_lm = make_http_lm(off_flags);
      }

      awm::OfflineRunResult r = awm::run_offline_sim(
          site, seeds, eval_tasks, *policy, icfg, acfg, induction_lm.get());

      fs::create_directories(off_out);
      fs::path dir(off_out);
      awm::write_text_file((dir / "workflows.txt").string(),
                           r.store.save_checkpoint());
      awm::save_experiences((dir / "experiences.jsonl").string(), r.episodes);
      std::vector<std::string> ids;
      for (const auto& t : r.tasks) ids.push_back(t.id);
      awm::write_text_file((dir / "episodes.csv").string(),
                           awm::episodes_to_csv(ids, r.outcomes));
      awm::write_text_file((dir / "curve.csv").string(),
                           awm::curve_to_csv(r.outcomes));
      write_traces(dir, r.traces);
      nlohmann::json errors = nlohmann::json::object();
      for (const auto& [site_name, what] : r.errors) errors[site_name] = what;
      write_summary(dir, {{"success_rate", r.success_rate},
                          {"n_tasks", r.outcomes.size()},
                          {"n_workflows", r.store.size()},
                          {"induction_errors", errors}});
      std::cout << "success rate: " << r.success_rate << " over "
                << r.outcomes.size() << " tasks\nworkflows: "
                << r.store.size() << "\nwrote " << off_out << "\n";
      return 0;
    }

    if (*online) {
      std::vector<awm::SiteDef> sites = load_sites(on_sites);
      std::vector<awm::TaskSpec> stream =
          build_stream(sites, on_rounds, on_seed);

      awm::MemoryMode mmode = on_no_memory
                                  ? awm::MemoryMode::kOffline
                                  : awm::memory_mode_from_string(on_memory);
      awm::WorkflowStore store(mmode);
      if (on_no_memory) store.seed_offline({});  // freeze empty: baseline

      awm::InductionConfig icfg;
      icfg.mode = on_mode == "lm" ? awm::InductionMode::kLm
                                  : awm::InductionMode::kRule;
      awm::AgentConfig acfg;
      acfg.max_steps = on_max_steps;
      acfg.memory_mode = mmode;
      acfg.enable_macro_actions = on_macros;
      acfg.trace = on_trace;
      awm::OnlineOptions opts;
      opts.induce_from_all_successes = on_induce_all;

      std::unique_ptr<awm::LmClient> http;
      awm::ScriptedPolicy scripted(stream);
      awm::LmClient* policy = &scripted;
      if (!on_scripted) {
        http = make_http_lm(on_flags);
        policy = http.get();
      }
      std::unique_ptr<awm::LmClient> induction_lm;
      if (icfg.mode == awm::InductionMode::kLm) {
        induction_lm = make_http_lm(on_flags);
      }

      if (mmode == awm::MemoryMode::kOfflineOnline) {
        std::vector<awm::Workflow> seeded_wf;
        for (const auto& s : sites) {
          auto seed_tasks = awm::generate_suite(
              s, static_cast<int>(s.templates.size()), on_seed + 100);
          auto seeds = awm::collect_seed_experiences(s, seed_tasks);
          awm::InductionResult ir =
              icfg.mode == awm::InductionMode::kLm
                  ? awm::induce_lm(seeds, icfg, *induction_lm)
                  : awm::induce_rule(seeds, icfg);
          for (auto& w : ir.workflows) seeded_wf.push_back(std::move(w));
        }
        store.seed_offline(seeded_wf);
      }

      awm::OnlineRunResult r =
          awm::run_online(sites, stream, *policy, store, awm::make_env_judge(),
                          icfg, acfg, induction_lm.get(), opts);

      fs::create_directories(on_out);
      fs::path dir(on_out);
      awm::write_text_file((dir / "episodes.csv").string(),
                           online_rows_csv(r.rows));
      awm::write_text_file((dir / "curve.csv").string(),
                           awm::curve_to_csv(r.outcomes));
      awm::write_text_file((dir / "workflows.txt").string(),
                           store.save_checkpoint());
      awm::save_experiences((dir / "experiences.jsonl").string(), r.episodes);
      write_traces(dir, r.traces);
      write_summary(dir, {{"success_rate", r.success_rate},
                          {"n_tasks", r.outcomes.size()},
                          {"n_workflows", store.size()},
                          {"induction_calls", r.induction_calls},
                          {"judge", "oracle"}});
      std::cout << "success rate: " << r.success_rate << " over "
                << r.outcomes.size() << " tasks\nworkflows in memory: "
                << store.size() << "\nwrote " << on_out << "\n";
      return 0;
    }

    if (*evalsteps) {
      std::vector<awm::Experience> gold = awm::load_experiences(es_in);
      awm::WorkflowStore store(awm::MemoryMode::kOnline);
      if (!es_workflows.empty()) {
        store.add_workflows(
            awm::parse_workflow_file(awm::read_text_file(es_workflows)));
      }
      std::unique_ptr<awm::LmClient> policy;
      if (es_policy == "gold") {
        policy = std::make_unique<GoldEchoPolicy>(gold);
      } else {
        policy = make_http_lm(es_flags);
      }
      awm::EvalReport report =
          awm::evaluate_stepwise(gold, *policy, store);
      awm::write_text_file(es_out, awm::eval_report_to_csv(report));
      std::cout << "steps: " << report.steps.size() << "\n"
                << awm::eval_report_summary(report) << "wrote " << es_out
                << "\n";
      return 0;
    }

    if (*quality) {
      std::vector<awm::Workflow> ws =
          awm::parse_workflow_file(awm::read_text_file(q_workflows));
      std::vector<awm::Experience> gold = awm::load_experiences(q_experiences);
      std::vector<awm::Experience> predicted =
          q_predicted.empty() ? gold : awm::load_experiences(q_predicted);
      awm::QualityReport q = awm::quality_report(ws, gold, predicted);
      nlohmann::json j = awm::quality_report_to_json(q);
      std::cout << j.dump(2) << "\n";
      if (!q_out.empty()) awm::write_text_file(q_out, j.dump(2) + "\n");
      return 0;
    }

    if (*curve) {
      std::string text = awm::read_text_file(c_in);
      std::istringstream in(text);
      std::string line;
      std::vector<std::string> ids;
      std::vector<bool> outcomes;
      int success_col = -1, id_col = -1;
      bool header = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (header) {
          for (size_t i = 0; i < cells.size(); ++i) {
            if (cells[i] == "success") success_col = static_cast<int>(i);
            if (cells[i] == "task_id") id_col = static_cast<int>(i);
          }
          if (success_col < 0) {
            throw awm::SchemaError("input CSV has no 'success' column");
          }
          header = false;
          continue;
        }
        if (static_cast<int>(cells.size()) <= success_col) continue;
        outcomes.push_back(cells[static_cast<size_t>(success_col)] == "1");
        ids.push_back(id_col >= 0 && id_col < static_cast<int>(cells.size())
                          ? cells[static_cast<size_t>(id_col)]
                          : "");
      }
      awm::write_text_file(c_out, awm::episodes_to_csv(ids, outcomes));
      std::cout << "episodes: " << outcomes.size() << "\nwrote " << c_out
                << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
