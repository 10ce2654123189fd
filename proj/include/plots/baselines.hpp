#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "plots/bps.hpp"
#include "plots/core.hpp"

namespace plots {

/// BPS with oracle subtask spans: at a position inside element j, reuse the
/// actions of the first fully confirmed occurrence of the same label.
class AlignmentSuggester final : public ActionSuggester {
 public:
  AlignmentSuggester(Sketch sketch, OracleAlignment alignment)
      : sketch_(std::move(sketch)), alignment_(std::move(alignment)) {
    sketch_.validate();
    if (alignment_.segments.size() != sketch_.length()) {
      throw ContractError("alignment and sketch lengths differ");
    }
  }

  std::optional<Action> suggest(std::size_t t, const PartialPlan& plan, const std::vector<bool>& excluded) override {
    auto a = suggest_at(t, plan.confirmed());
    if (a && *a < excluded.size() && !excluded[*a]) return a;
    return std::nullopt;
  }

  std::optional<Action> suggest_at(std::size_t t, const ActionSeq& confirmed) const {
    const auto& segs = alignment_.segments;
    std::size_t j = 0;
    while (j < segs.size() && segs[j].end <= t) ++j;
    if (j == segs.size()) return std::nullopt;
    const auto label = sketch_.elements[j];
    for (std::size_t k = 0; k < j; ++k) {
      if (sketch_.elements[k] != label) continue;
      if (segs[k].end > confirmed.size()) return std::nullopt;
      const auto offset = t - segs[j].begin;
      if (offset >= segs[k].size()) return std::nullopt;
      return confirmed[segs[k].begin + offset];
    }
    return std::nullopt;
  }

 private:
  Sketch sketch_;
  OracleAlignment alignment_;
};

namespace baselines {

struct Transition {
  Observation from;
  Action action;
  Observation to;
};

/// One episode driven by `policy(t, token)`. Steps are reported to
/// `observe` while the observations still follow the demonstration; after
/// the first mismatch the episode is padded with uniform random actions.
template <class Policy, class Observe>
std::size_t run_policy_episode(Environment& env, const Demonstration& demo, Policy&& policy, Observe&& observe,
                               ActionSeq& played, Rng& rng) {
  const auto horizon = demo.horizon();
  played.clear();
  auto tok = env.reset();
  std::size_t t = 0;
  for (; t < horizon; ++t) {
    const Action a = policy(t, tok);
    const auto next = env.step(a);
    observe(t, Transition{tok, a, next});
    if (next != demo.observations[t]) {
      ++t;
      std::uniform_int_distribution<Action> any(0, static_cast<Action>(env.num_actions() - 1));
      for (; t < horizon; ++t) env.step(any(rng));
      return played.size();
    }
    played.push_back(a);
    tok = next;
  }
  return played.size();
}

struct KeyHash {
  std::size_t operator()(const std::pair<std::uint32_t, Action>& k) const {
    return (static_cast<std::size_t>(k.first) << 20) ^ k.second;
  }
};

/// Optimistic model-based planner over a deterministic token model.
/// Unknown (token, action) pairs are worth every remaining step; known pairs
/// earn 1 and continue when they reproduce Z*[t], otherwise end the value.
/// The model keeps the first outcome seen for each pair.
class RMaxPlanner {
 public:
  RMaxPlanner(const Demonstration& demo, std::size_t num_actions, Rng& rng)
      : demo_(demo), num_actions_(num_actions), rng_(rng) {}

  Action act(std::size_t t, Observation tok) {
    std::vector<Action> best;
    long best_v = -1;
    bool best_unknown = false;
    for (Action a = 0; a < num_actions_; ++a) {
      const bool unknown = !model_.contains({tok.id, a});
      const long v = q(t, tok, a);
      if (v > best_v || (v == best_v && unknown && !best_unknown)) {
        best = {a};
        best_v = v;
        best_unknown = unknown;
      } else if (v == best_v && unknown == best_unknown) {
        best.push_back(a);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
    return best[pick(rng_)];
  }

  void observe(const Transition& tr) {
    if (model_.emplace(std::pair{tr.from.id, tr.action}, tr.to).second) memo_.clear();
  }

  std::size_t model_size() const { return model_.size(); }

 private:
  long q(std::size_t t, Observation tok, Action a) {
    const auto horizon = demo_.horizon();
    auto it = model_.find({tok.id, a});
    if (it == model_.end()) return static_cast<long>(horizon - t);
    if (it->second != demo_.observations[t]) return 0;
    return 1 + value(t + 1, it->second);
  }

  long value(std::size_t t, Observation tok) {
    if (t >= demo_.horizon()) return 0;
    const auto key = std::pair{static_cast<std::uint32_t>(t), tok.id};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    long best = 0;
    for (Action a = 0; a < num_actions_; ++a) best = std::max(best, q(t, tok, a));
    memo_[key] = best;
    return best;
  }

  const Demonstration& demo_;
  std::size_t num_actions_;
  Rng& rng_;
  std::unordered_map<std::pair<std::uint32_t, Action>, Observation, KeyHash> model_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, long> memo_;
};

/// Per-token bandit: untried arms first (uniformly), then the arm with the
/// highest UCB index. The reward of an arm is fixed at its first pull.
class UcbBandit {
 public:
  UcbBandit(const Demonstration& demo, std::size_t num_actions, Rng& rng, double exploration = 0.0)
      : demo_(demo), num_actions_(num_actions), rng_(rng), c_(exploration) {}

  Action act(std::size_t, Observation tok) {
    auto& arms = arms_for(tok);
    std::vector<Action> untried;
    std::size_t total = 0;
    for (Action a = 0; a < num_actions_; ++a) {
      if (arms[a].pulls == 0) untried.push_back(a);
      total += arms[a].pulls;
    }
    if (!untried.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, untried.size() - 1);
      return untried[pick(rng_)];
    }
    Action best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (Action a = 0; a < num_actions_; ++a) {
      const double v = arms[a].reward +
                       c_ * std::sqrt(2.0 * std::log(static_cast<double>(total)) / static_cast<double>(arms[a].pulls));
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }

  void observe(std::size_t t, const Transition& tr) {
    auto& arm = arms_for(tr.from)[tr.action];
    if (arm.pulls == 0) arm.reward = tr.to == demo_.observations[t] ? 1.0 : 0.0;
    ++arm.pulls;
  }

 private:
  struct Arm {
    std::size_t pulls = 0;
    double reward = 0.0;
  };

  std::vector<Arm>& arms_for(Observation tok) {
    auto it = arms_.find(tok.id);
    if (it == arms_.end()) it = arms_.emplace(tok.id, std::vector<Arm>(num_actions_)).first;
    return it->second;
  }

  const Demonstration& demo_;
  std::size_t num_actions_;
  Rng& rng_;
  double c_;
  std::unordered_map<std::uint32_t, std::vector<Arm>> arms_;
};

template <class Agent, class Observe>
LearnReport learn_with(Environment& env, const Demonstration& demo, Agent& agent, Observe&& observe, Rng& rng,
                       const LearnOptions& opts, const EpisodeCallback& on_episode) {
  if (opts.max_episodes == 0) throw ContractError("budget must allow at least one episode");
  LearnReport report;
  ActionSeq played;
  const auto horizon = demo.horizon();
  while (report.episodes < opts.max_episodes) {
    const auto matched = run_policy_episode(
        env, demo, [&](std::size_t t, Observation tok) { return agent.act(t, tok); }, observe, played, rng);
    ++report.episodes;
    report.total_steps += horizon;
    const bool done = matched == horizon;
    if (on_episode) on_episode(EpisodeStats{report.episodes, horizon, matched, 0, done});
    if (done) {
      report.plan = played;
      report.complete = true;
      break;
    }
  }
  return report;
}

}  // namespace baselines

/// RMax+ baseline: optimistic planning over a learned token model.
inline LearnReport rmax_learn(Environment& env, const Demonstration& demo, Rng& rng, const LearnOptions& opts = {},
                              const EpisodeCallback& on_episode = {}) {
  baselines::RMaxPlanner planner(demo, env.num_actions(), rng);
  return baselines::learn_with(
      env, demo, planner, [&](std::size_t, const baselines::Transition& tr) { planner.observe(tr); }, rng, opts,
      on_episode);
}

/// UCB+ baseline: independent bandit per observation token.
/// With deterministic rewards the exploration bonus only reorders arms that
/// were already pulled, so it defaults to 0.
inline LearnReport ucb_learn(Environment& env, const Demonstration& demo, Rng& rng, const LearnOptions& opts = {},
                             const EpisodeCallback& on_episode = {}, double exploration = 0.0) {
  baselines::UcbBandit bandit(demo, env.num_actions(), rng, exploration);
  return baselines::learn_with(
      env, demo, bandit, [&](std::size_t t, const baselines::Transition& tr) { bandit.observe(t, tr); }, rng, opts,
      on_episode);
}

}  // namespace plots
