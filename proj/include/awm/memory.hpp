#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "awm/errors.hpp"
#include "awm/induction.hpp"
#include "awm/serialize.hpp"
#include "awm/types.hpp"

namespace awm {

enum class MemoryMode { kOffline, kOnline, kOfflineOnline };

inline std::string to_string(MemoryMode m) {
  switch (m) {
    case MemoryMode::kOffline: return "offline";
    case MemoryMode::kOnline: return "online";
    case MemoryMode::kOfflineOnline: return "offline+online";
  }
  return "offline";
}

inline MemoryMode memory_mode_from_string(const std::string& s) {
  if (s == "offline") return MemoryMode::kOffline;
  if (s == "online") return MemoryMode::kOnline;
  if (s == "offline+online" || s == "offlineluonline" || s == "both") {
    return MemoryMode::kOfflineOnline;
  }
  throw ModeError("unknown memory mode: " + s);
}

/// Per-website workflow memory. Workflows for one site never leak into
/// another site's rendered context. In offline mode the store is frozen
/// after seeding and later additions are rejected.
class WorkflowStore {
 public:
  explicit WorkflowStore(MemoryMode mode = MemoryMode::kOnline,
                         std::string base_docs = "")
      : mode_(mode), base_docs_(std::move(base_docs)) {}

  MemoryMode mode() const { return mode_; }
  const std::string& base_docs() const { return base_docs_; }
  void set_base_docs(std::string docs) { base_docs_ = std::move(docs); }

  /// Seed with offline-induced workflows. Dedups against current contents,
  /// so repeating a seed with the same set is a no-op; freezes the store
  /// when the mode is offline-only. Returns the number actually added.
  size_t seed_offline(const std::vector<Workflow>& workflows) {
    if (mode_ == MemoryMode::kOnline) {
      throw ModeError("offline seeding is not available in online mode");
    }
    size_t added = insert_deduped(workflows);
    seeded_ = true;
    if (mode_ == MemoryMode::kOffline) frozen_ = true;
    return added;
  }

  /// Append online-induced workflows, deduped against what the store already
  /// holds. Returns the number actually added; rejected while frozen.
  size_t add_workflows(const std::vector<Workflow>& workflows) {
    if (frozen_) {
      throw ModeError("memory is frozen; offline mode accepts no additions");
    }
    if (mode_ == MemoryMode::kOffline) {
      throw ModeError("offline mode accepts workflows only via seeding");
    }
    return insert_deduped(workflows);
  }

  const std::vector<Workflow>& workflows_for(const std::string& website) const {
    static const std::vector<Workflow> kEmpty;
    auto it = by_site_.find(website);
    return it == by_site_.end() ? kEmpty : it->second;
  }

  std::vector<std::string> websites() const {
    std::vector<std::string> out;
    for (const auto& [site, _] : by_site_) out.push_back(site);
    return out;
  }

  size_t size() const {
    size_t n = 0;
    for (const auto& [_, ws] : by_site_) n += ws.size();
    return n;
  }

  bool frozen() const { return frozen_; }

  /// Render the auxiliary memory for one site: base docs followed by that
  /// site's workflows under a "Workflows:" heading. With no workflows the
  /// render equals the base docs byte for byte.
  std::string render_memory(const std::string& website) const {
    const auto& ws = workflows_for(website);
    if (ws.empty()) return base_docs_;
    std::string out = base_docs_;
    if (!out.empty() && out.back() != '\n') out += "\n";
    if (!out.empty()) out += "\n";
    out += "Workflows:\n\n";
    out += render_workflows(ws);
    return out;
  }

  AgentMemory memory_for(const std::string& website) const {
    return AgentMemory{website, base_docs_, workflows_for(website)};
  }

  /// Checkpoint: every workflow in the store, blank-line separated, readable
  /// with load_checkpoint. Site order is lexicographic for stability.
  std::string save_checkpoint() const {
    std::vector<Workflow> all;
    for (const auto& [_, ws] : by_site_) {
      all.insert(all.end(), ws.begin(), ws.end());
    }
    return render_workflows(all);
  }

  void save_checkpoint_file(const std::string& path) const {
    write_text_file(path, save_checkpoint());
  }

  /// Restore from checkpoint text. Replaces current contents; the mode and
  /// freeze state carry over from the constructor, not the file.
  void load_checkpoint(const std::string& text) {
    std::vector<Workflow> all = parse_workflow_file(text);
    by_site_.clear();
    for (auto& w : all) by_site_[w.website].push_back(std::move(w));
    rebuild_keys();
  }

  void load_checkpoint_file(const std::string& path) {
    load_checkpoint(read_text_file(path));
  }

 private:
  // Inserts only workflows whose pattern key is new to the store.
  size_t insert_deduped(const std::vector<Workflow>& workflows) {
    size_t added = 0;
    for (const auto& w : workflows) {
      if (keys_.insert(detail::workflow_pattern_key(w)).second) {
        by_site_[w.website].push_back(w);
        ++added;
      }
    }
    return added;
  }

  void rebuild_keys() {
    keys_.clear();
    for (const auto& [_, ws] : by_site_) {
      for (const auto& w : ws) keys_.insert(detail::workflow_pattern_key(w));
    }
  }

  MemoryMode mode_;
  std::string base_docs_;
  std::map<std::string, std::vector<Workflow>> by_site_;
  std::set<std::string> keys_;
  bool seeded_ = false;
  bool frozen_ = false;
};

}  // namespace awm
