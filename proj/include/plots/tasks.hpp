#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "plots/core.hpp"
#include "plots/cpr.hpp"
#include "plots/gridcraft.hpp"
#include "plots/piano.hpp"
#include "plots/scripted_env.hpp"

namespace plots {

/// A registered domain: an environment factory plus the scripted solution
/// that generates its demonstration and, when known, the sketch and the
/// ground-truth element spans.
struct Task {
  std::string name;
  std::function<std::unique_ptr<Environment>()> make_env;
  ActionSeq solution;
  std::optional<Sketch> sketch;
  std::optional<OracleAlignment> alignment;

  std::size_t horizon() const { return solution.size(); }

  /// Fresh environment plus the demonstration recorded on it.
  std::pair<std::unique_ptr<Environment>, Demonstration> instantiate() const {
    auto env = make_env();
    auto demo = record_demonstration(*env, solution, sketch);
    return {std::move(env), std::move(demo)};
  }
};

struct SubtaskBlock {
  std::string label;
  ActionSeq actions;
};

/// Concatenates labelled blocks into a solution, sketch, and oracle
/// alignment. Every occurrence of a label must carry the same actions.
inline Task compose_task(std::string name, std::function<std::unique_ptr<Environment>()> make_env,
                         const std::vector<SubtaskBlock>& blocks) {
  Task task;
  task.name = std::move(name);
  task.make_env = std::move(make_env);
  std::vector<std::string> labels;
  std::map<std::string, ActionSeq> seen;
  OracleAlignment align;
  for (const auto& b : blocks) {
    if (b.actions.empty()) throw ContractError("subtask '" + b.label + "' is empty");
    auto [it, inserted] = seen.emplace(b.label, b.actions);
    if (!inserted && it->second != b.actions) {
      throw ContractError("subtask '" + b.label + "' used with two different action sequences");
    }
    const auto begin = task.solution.size();
    task.solution.insert(task.solution.end(), b.actions.begin(), b.actions.end());
    align.segments.push_back(Span{begin, task.solution.size()});
    labels.push_back(b.label);
  }
  task.sketch = Sketch::from_labels(labels);
  align.validate(task.solution.size());
  task.alignment = std::move(align);
  return task;
}

namespace tasks {

inline ActionSeq repeat(Action a, std::size_t n) { return ActionSeq(n, a); }

inline ActionSeq cat(std::initializer_list<ActionSeq> parts) {
  ActionSeq out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline Task chain() {
  Task t;
  t.name = "chain";
  t.make_env = [] { return std::make_unique<ScriptedEnv>(make_chain_env()); };
  t.solution = make_chain_env().script();
  return t;
}

/// Markov scripted chain, |A| = 5, H = 20.
inline Task scripted(std::size_t num_actions = 5, std::size_t horizon = 20, std::uint64_t script_seed = 0) {
  Task t;
  t.name = "scripted";
  auto proto = make_markov_chain(num_actions, horizon, script_seed);
  t.solution = proto.script();
  t.make_env = [proto] { return std::make_unique<ScriptedEnv>(proto); };
  return t;
}

inline Task island() {
  using G = GridCraftEnv;
  const ActionSeq start_to_forest = cat({repeat(G::kLeft, 3), repeat(G::kDown, 3), {G::kLeft}});
  const ActionSeq to_forest = cat({repeat(G::kDown, 5), {G::kLeft}});
  const ActionSeq to_workshop = cat({{G::kRight}, repeat(G::kUp, 5)});
  const ActionSeq use{G::kUse};
  std::vector<SubtaskBlock> blocks{{"start_to_forest", start_to_forest}, {"chop", use},
                                   {"to_workshop", to_workshop},         {"craft", use}};
  for (int trip = 0; trip < 2; ++trip) {
    blocks.push_back({"to_forest", to_forest});
    blocks.push_back({"chop", use});
    blocks.push_back({"to_workshop", to_workshop});
    blocks.push_back({"craft", use});
  }
  blocks.push_back({"build_raft", use});
  blocks.push_back({"to_shore", repeat(G::kRight, 8)});
  blocks.push_back({"cross", repeat(G::kDown, 9)});
  blocks.push_back({"land", cat({{G::kDown}, repeat(G::kRight, 5)})});
  return compose_task("island", [] { return std::make_unique<G>(G::load_grid_map(maps::kIsland, "island")); },
                      blocks);
}

inline Task gem() {
  using G = GridCraftEnv;
  std::vector<SubtaskBlock> blocks{
      {"to_wood", cat({repeat(G::kRight, 4), {G::kDown}})},
      {"chop", {G::kUse}},
      {"to_workshop", cat({repeat(G::kLeft, 4), {G::kDown}})},
      {"craft", {G::kUse}},
      {"to_gem", cat({repeat(G::kRight, 6), repeat(G::kDown, 2)})},
      {"mine", {G::kUse}},
  };
  return compose_task("gem", [] { return std::make_unique<G>(G::load_grid_map(maps::kGem, "gem")); }, blocks);
}

inline Task cpr() {
  std::vector<SubtaskBlock> blocks{{"assess_and_breathe", cpr::assess_block()}};
  for (int i = 0; i < 5; ++i) blocks.push_back({"compression_cycle", cpr::compression_cycle()});
  return compose_task("cpr", [] { return std::make_unique<CprEnv>(); }, blocks);
}

/// Right-hand arpeggio figures: 24 sketch elements over 5 subtasks, 64 notes.
inline Task piano() {
  using P = PianoEnv;
  const std::map<std::string, ActionSeq> figures{
      {"triad", {P::kFinger1, P::kFinger3, P::kFinger5}},
      {"upper", {P::kFinger2, P::kFinger4, P::kFinger5}},
      {"shift_up", {P::kWristUp, P::kFinger1, P::kFinger3, P::kFinger5}},
      {"shift_down", {P::kWristDown, P::kFinger1, P::kFinger3, P::kFinger5}},
      {"turn", {P::kThumbDown, P::kFinger1, P::kThumbUp, P::kFinger2}},
  };
  const std::vector<std::string> order{
      "triad", "upper", "turn", "shift_up", "triad", "turn", "upper", "triad", "turn",
      "shift_down", "upper", "turn", "triad", "shift_up", "turn", "upper", "shift_down", "turn",
      "triad", "upper", "turn", "shift_up", "shift_down", "turn"};
  std::vector<SubtaskBlock> blocks;
  for (const auto& label : order) blocks.push_back({label, figures.at(label)});
  return compose_task("piano", [] { return std::make_unique<P>(); }, blocks);
}

}  // namespace tasks

inline std::vector<std::string> task_names() { return {"chain", "scripted", "island", "gem", "cpr", "piano"}; }

/// Registry lookup; throws ConfigError for unknown names.
inline Task make_task(const std::string& name) {
  if (name == "chain") return tasks::chain();
  if (name == "scripted") return tasks::scripted();
  if (name == "island") return tasks::island();
  if (name == "gem") return tasks::gem();
  if (name == "cpr") return tasks::cpr();
  if (name == "piano") return tasks::piano();
  throw ConfigError("unknown environment '" + name + "'");
}

/// Full piano trace (notes and "silence") with its sketch, as shipped.
inline PianoScore piano_score() {
  const auto task = tasks::piano();
  auto [env, demo] = task.instantiate();
  PianoScore score;
  for (auto o : demo.observations) score.tokens.push_back(env->tokens().name(o));
  score.sketch = task.sketch;
  return score;
}

}  // namespace plots
