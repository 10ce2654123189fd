#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "plots/core.hpp"

namespace plots {

using Rng = std::mt19937_64;

/// Raised when backtracking runs out of alternatives at position 0: no plan
/// reproduces the demonstration.
class UnsatisfiableDemonstration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Confirmed action prefix plus, for every position, the actions known not
/// to work under the current prefix.
///
///  - failed[i]: tried at i and produced the wrong observation.
///  - banned[i]: confirmed at i once, then unrolled by a backtrack.
///
/// Ledgers at positions beyond a backtrack point are cleared because their
/// prefix context changed.
class PartialPlan {
 public:
  PartialPlan(std::size_t horizon, std::size_t num_actions)
      : num_actions_(num_actions),
        failed_(horizon, std::vector<bool>(num_actions, false)),
        banned_(horizon, std::vector<bool>(num_actions, false)) {
    if (horizon == 0 || num_actions == 0) throw ContractError("plan needs H >= 1 and |A| >= 1");
  }

  std::size_t horizon() const { return failed_.size(); }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t frontier() const { return confirmed_.size(); }
  bool complete() const { return confirmed_.size() == horizon(); }
  const ActionSeq& confirmed() const { return confirmed_; }

  bool is_failed(std::size_t pos, Action a) const { return failed_.at(pos).at(a); }
  bool is_banned(std::size_t pos, Action a) const { return banned_.at(pos).at(a); }
  bool is_excluded(std::size_t pos, Action a) const { return is_failed(pos, a) || is_banned(pos, a); }

  std::vector<bool> excluded(std::size_t pos) const {
    std::vector<bool> out(num_actions_);
    for (std::size_t a = 0; a < num_actions_; ++a) out[a] = failed_[pos][a] || banned_[pos][a];
    return out;
  }

  std::size_t excluded_count(std::size_t pos) const {
    std::size_t n = 0;
    for (std::size_t a = 0; a < num_actions_; ++a) n += (failed_[pos][a] || banned_[pos][a]) ? 1 : 0;
    return n;
  }

  /// Dead end: every action is failed or banned at `pos`.
  bool exhausted(std::size_t pos) const { return excluded_count(pos) == num_actions_; }

  void confirm(Action a) {
    if (complete()) throw ContractError("plan already complete");
    if (is_excluded(frontier(), a)) throw ContractError("confirming an excluded action");
    confirmed_.push_back(a);
  }

  void mark_failed(std::size_t pos, Action a) { failed_.at(pos).at(a) = true; }

  /// Unrolls the last confirmed action and bans it at its position.
  Action unroll() {
    if (confirmed_.empty()) throw UnsatisfiableDemonstration("no plan reproduces the demonstration");
    const Action a = confirmed_.back();
    confirmed_.pop_back();
    const auto pos = confirmed_.size();
    banned_[pos][a] = true;
    for (std::size_t i = pos + 1; i < horizon(); ++i) {
      std::fill(failed_[i].begin(), failed_[i].end(), false);
      std::fill(banned_[i].begin(), banned_[i].end(), false);
    }
    return a;
  }

 private:
  std::size_t num_actions_;
  ActionSeq confirmed_;
  std::vector<std::vector<bool>> failed_;
  std::vector<std::vector<bool>> banned_;
};

/// Strategy hook for the frontier action. Implementations: uniform (BPS),
/// sketch hypotheses, repeat statistics, and oracle alignment.
class ActionSuggester {
 public:
  virtual ~ActionSuggester() = default;

  /// An action for position `t` that is not excluded, or nullopt.
  virtual std::optional<Action> suggest(std::size_t t, const PartialPlan& plan,
                                        const std::vector<bool>& excluded) = 0;
  /// Called after plan.confirmed() grew by one action.
  virtual void on_confirm(const PartialPlan& /*plan*/) {}
  /// Called after a backtrack shortened plan.confirmed().
  virtual void on_backtrack(const PartialPlan& /*plan*/) {}
};

class UniformSuggester final : public ActionSuggester {
 public:
  std::optional<Action> suggest(std::size_t, const PartialPlan&, const std::vector<bool>&) override {
    return std::nullopt;
  }
};

struct EpisodeOptions {
  // Stop the episode at the first mismatch instead of playing random actions
  // up to the horizon. Off by default so episode lengths stay comparable.
  bool early_reset = false;
};

struct EpisodeResult {
  std::size_t matched_prefix_len = 0;
  std::size_t steps_taken = 0;
  bool new_action_confirmed = false;
  bool dead_end = false;
};

namespace detail {

inline Action uniform_untried(const std::vector<bool>& excluded, Rng& rng) {
  std::vector<Action> candidates;
  for (std::size_t a = 0; a < excluded.size(); ++a) {
    if (!excluded[a]) candidates.push_back(static_cast<Action>(a));
  }
  if (candidates.empty()) throw ContractError("no untried action available");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

}  // namespace detail

/// One episode: replay the confirmed prefix, then extend it action by action
/// until the first mismatch, after which random actions fill the episode up
/// to the horizon. A frontier whose actions are all excluded is reported as a
/// dead end without touching the environment.
inline EpisodeResult run_episode(Environment& env, const Demonstration& demo, PartialPlan& plan,
                                 ActionSuggester& suggester, Rng& rng, const EpisodeOptions& opts = {}) {
  const auto horizon = demo.horizon();
  EpisodeResult res;
  if (plan.complete()) {
    res.matched_prefix_len = horizon;
    return res;
  }
  if (plan.exhausted(plan.frontier())) {
    res.dead_end = true;
    res.matched_prefix_len = plan.frontier();
    return res;
  }

  env.reset();
  std::size_t steps = 0;
  for (auto a : plan.confirmed()) {
    env.step(a);
    ++steps;
  }

  while (!plan.complete()) {
    const auto t = plan.frontier();
    const auto excluded = plan.excluded(t);
    auto choice = suggester.suggest(t, plan, excluded);
    const Action a = (choice && *choice < excluded.size() && !excluded[*choice])
                         ? *choice
                         : detail::uniform_untried(excluded, rng);
    const auto obs = env.step(a);
    ++steps;
    if (obs == demo.observations[t]) {
      plan.confirm(a);
      res.new_action_confirmed = true;
      suggester.on_confirm(plan);
      // The next frontier starts with clean ledgers, so it cannot be a dead
      // end; keep extending within this episode.
      continue;
    }
    plan.mark_failed(t, a);
    if (!opts.early_reset) {
      std::uniform_int_distribution<Action> any(0, static_cast<Action>(plan.num_actions() - 1));
      for (; steps < horizon; ++steps) env.step(any(rng));
    }
    break;
  }
  res.steps_taken = steps;
  res.matched_prefix_len = plan.frontier();
  return res;
}

/// Dead-end recovery: unroll one confirmed action and let the suggester
/// rebuild whatever it derived from the removed suffix.
inline void backtrack(PartialPlan& plan, ActionSuggester& suggester) {
  plan.unroll();
  suggester.on_backtrack(plan);
}

struct LearnOptions {
  std::size_t max_episodes = 100000;
  EpisodeOptions episode;
};

struct EpisodeStats {
  std::size_t episode = 0;  // 1-based
  std::size_t steps = 0;
  std::size_t matched = 0;
  std::size_t backtracks = 0;  // cumulative
  bool done = false;
};

struct LearnReport {
  ActionSeq plan;
  bool complete = false;
  std::size_t episodes = 0;
  std::size_t total_steps = 0;
  std::size_t backtracks = 0;
};

using EpisodeCallback = std::function<void(const EpisodeStats&)>;

/// Backtracking procedure search driven by `suggester`. Stops when the plan
/// covers the horizon or after `max_episodes` episodes.
inline LearnReport learn(Environment& env, const Demonstration& demo, ActionSuggester& suggester, Rng& rng,
                         const LearnOptions& opts = {}, const EpisodeCallback& on_episode = {}) {
  if (opts.max_episodes == 0) throw ContractError("budget must allow at least one episode");
  PartialPlan plan(demo.horizon(), env.num_actions());
  LearnReport report;
  while (!plan.complete() && report.episodes < opts.max_episodes) {
    if (plan.exhausted(plan.frontier())) {
      backtrack(plan, suggester);
      ++report.backtracks;
      continue;
    }
    const auto res = run_episode(env, demo, plan, suggester, rng, opts.episode);
    ++report.episodes;
    report.total_steps += res.steps_taken;
    if (on_episode) {
      on_episode(EpisodeStats{report.episodes, res.steps_taken, res.matched_prefix_len, report.backtracks,
                              plan.complete()});
    }
  }
  report.plan = plan.confirmed();
  report.complete = plan.complete();
  return report;
}

}  // namespace plots
