#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "plots/bps.hpp"
#include "plots/core.hpp"

namespace plots::repeats {

struct RepeatCandidate {
  ActionSeq seq;
  std::size_t count = 0;           // occurrences in the plan (overlaps included)
  std::size_t last_match_end = 0;  // plan length when last updated
};

struct RepeatConfig {
  std::size_t min_repeat_len = 2;
  std::size_t max_candidates = 0;  // 0 = unbounded; otherwise evict least recently matched
};

/// z[k] = longest common prefix of s and s[k..]; z[0] = |s|.
inline std::vector<std::size_t> z_function(std::span<const Action> s) {
  const auto n = s.size();
  std::vector<std::size_t> z(n, 0);
  if (n == 0) return z;
  z[0] = n;
  for (std::size_t i = 1, l = 0, r = 0; i < n; ++i) {
    if (i < r) z[i] = std::min(r - i, z[i - l]);
    while (i + z[i] < n && s[z[i]] == s[i + z[i]]) ++z[i];
    if (i + z[i] > r) {
      l = i;
      r = i + z[i];
    }
  }
  return z;
}

/// Repeated action subsequences of the confirmed plan, keyed by sequence.
/// Only suffixes of the plan are touched on each update; every other
/// substring's count cannot change when one action is appended.
class RepeatStore {
 public:
  explicit RepeatStore(RepeatConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.min_repeat_len == 0) throw ContractError("min_repeat_len must be >= 1");
  }

  const std::map<ActionSeq, RepeatCandidate>& candidates() const { return store_; }
  const RepeatConfig& config() const { return cfg_; }

  void clear() { store_.clear(); }

  /// Plan just grew by one action.
  void update(std::span<const Action> plan) {
    const auto t = plan.size();
    if (t < cfg_.min_repeat_len) return;
    ActionSeq rev(plan.rbegin(), plan.rend());
    const auto z = z_function(rev);
    // occurrences[len] = 1 + #{k >= 1 : z[k] >= len}
    std::vector<std::size_t> at_least(t + 2, 0);
    for (std::size_t k = 1; k < t; ++k) ++at_least[z[k]];
    for (std::size_t len = t; len >= 1; --len) {
      at_least[len] += at_least[len + 1];
      if (len == 1) break;
    }
    for (std::size_t len = cfg_.min_repeat_len; len <= t; ++len) {
      const auto occ = 1 + at_least[len];
      if (occ < 2) break;
      ActionSeq suffix(plan.end() - static_cast<std::ptrdiff_t>(len), plan.end());
      auto& c = store_[suffix];
      c.seq = std::move(suffix);
      c.count = occ;
      c.last_match_end = t;
    }
    evict();
  }

  /// Recomputes the store for `plan` from scratch (after a backtrack).
  void rebuild(std::span<const Action> plan) {
    clear();
    for (std::size_t k = 1; k <= plan.size(); ++k) update(plan.first(k));
  }

  /// Next actions proposed by candidates whose proper prefix matches the end
  /// of the plan (longest matching prefix per candidate), ranked by repeat
  /// count, then longer candidate, then lexicographic order; duplicates keep
  /// their best rank.
  std::vector<Action> suggest_ranked(std::span<const Action> plan) const {
    struct Entry {
      const RepeatCandidate* cand;
      Action next;
    };
    std::vector<Entry> entries;
    const auto t = plan.size();
    for (const auto& [seq, cand] : store_) {
      for (std::size_t k = std::min(seq.size() - 1, t); k >= 1; --k) {
        if (std::equal(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(k),
                       plan.end() - static_cast<std::ptrdiff_t>(k))) {
          entries.push_back({&cand, seq[k]});
          break;
        }
      }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.cand->count != b.cand->count) return a.cand->count > b.cand->count;
      if (a.cand->seq.size() != b.cand->seq.size()) return a.cand->seq.size() > b.cand->seq.size();
      return a.cand->seq < b.cand->seq;
    });
    std::vector<Action> out;
    for (const auto& e : entries) {
      if (std::find(out.begin(), out.end(), e.next) == out.end()) out.push_back(e.next);
    }
    return out;
  }

 private:
  void evict() {
    if (cfg_.max_candidates == 0) return;
    while (store_.size() > cfg_.max_candidates) {
      auto victim = std::min_element(store_.begin(), store_.end(), [](const auto& a, const auto& b) {
        return a.second.last_match_end < b.second.last_match_end;
      });
      store_.erase(victim);
    }
  }

  RepeatConfig cfg_;
  std::map<ActionSeq, RepeatCandidate> store_;
};

}  // namespace plots::repeats

namespace plots {

/// PLOTS-NoSketch frontier strategy: follow the most-repeated candidate
/// subtasks that are consistent with the plan tail.
class RepeatSuggester final : public ActionSuggester {
 public:
  explicit RepeatSuggester(repeats::RepeatConfig cfg = {}) : store_(cfg) {}

  std::optional<Action> suggest(std::size_t, const PartialPlan& plan, const std::vector<bool>& excluded) override {
    if (!ranked_ || ranked_for_ != plan.frontier()) {
      ranked_ = store_.suggest_ranked(plan.confirmed());
      ranked_for_ = plan.frontier();
    }
    for (auto a : *ranked_) {
      if (a < excluded.size() && !excluded[a]) return a;
    }
    return std::nullopt;
  }

  void on_confirm(const PartialPlan& plan) override {
    store_.update(plan.confirmed());
    ranked_.reset();
  }

  void on_backtrack(const PartialPlan& plan) override {
    store_.rebuild(plan.confirmed());
    ranked_.reset();
  }

  const repeats::RepeatStore& store() const { return store_; }

 private:
  repeats::RepeatStore store_;
  std::optional<std::vector<Action>> ranked_;
  std::size_t ranked_for_ = 0;
};

}  // namespace plots
