#pragma once

#include <string>

#include "awm/induction.hpp"
#include "awm/lm.hpp"
#include "awm/memory.hpp"
#include "awm/serialize.hpp"

namespace awm {

/// File-level run settings shared by the command-line entry points. Every
/// field has a workable default so a config file only states deviations.
struct RunConfig {
  MemoryMode memory_mode = MemoryMode::kOnline;
  InductionMode induction_mode = InductionMode::kRule;
  std::string website;
  int n_tasks = 25;
  unsigned seed = 7;
  int max_steps = 30;
  int dedup_n = 1;
  std::string base_docs;
  LmEndpointConfig endpoint;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("memory_mode")) {
    c.memory_mode = memory_mode_from_string(j.at("memory_mode").get<std::string>());
  }
  if (j.contains("induction_mode")) {
    std::string m = j.at("induction_mode").get<std::string>();
    if (m == "rule") {
      c.induction_mode = InductionMode::kRule;
    } else if (m == "lm") {
      c.induction_mode = InductionMode::kLm;
    } else {
      throw SchemaError("unknown induction mode: " + m);
    }
  }
  c.website = j.value("website", "");
  c.n_tasks = j.value("n_tasks", c.n_tasks);
  c.seed = j.value("seed", c.seed);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.dedup_n = j.value("dedup_n", c.dedup_n);
  c.base_docs = j.value("base_docs", "");
  c.endpoint.base_url = j.value("lm_base_url", c.endpoint.base_url);
  c.endpoint.api_key = j.value("lm_api_key", c.endpoint.api_key);
  c.endpoint.model = j.value("lm_model", c.endpoint.model);
  return c;
}

/// Loads a config file and then lets AWM_LM_* environment variables override
/// the endpoint settings.
inline RunConfig load_run_config(const std::string& path) {
  RunConfig c = run_config_from_json(nlohmann::json::parse(read_text_file(path)));
  apply_env_overrides(c.endpoint);
  return c;
}

}  // namespace awm
