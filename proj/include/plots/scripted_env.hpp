#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "plots/core.hpp"

namespace plots {

/// Scripted test domain. While the agent follows `script`, the observation
/// after k correct actions is prefix_tokens[k]; any deviation leaves the
/// script for good and emits off-script tokens (the "OFF" sink by default).
///
/// An optional aliasing map renames emitted tokens, and a non-empty
/// off_tokens alphabet replaces the sink with a hash of the action history,
/// which lets off-script histories collide with on-script tokens.
class ScriptedEnv : public Environment {
 public:
  struct Options {
    std::vector<std::string> prefix_tokens;  // size H+1, empty => "S<k>"
    std::map<std::string, std::string> aliasing;
    std::vector<std::string> off_tokens;  // empty => "OFF" sink
  };

  ScriptedEnv(std::size_t num_actions, ActionSeq script, Options options = {})
      : num_actions_(num_actions), script_(std::move(script)), options_(std::move(options)) {
    if (num_actions_ == 0) throw ContractError("scripted env needs at least one action");
    if (script_.empty()) throw ContractError("scripted env needs a non-empty script");
    for (auto a : script_) {
      if (a >= num_actions_) throw ContractError("script action out of range");
    }
    if (options_.prefix_tokens.empty()) {
      for (std::size_t k = 0; k <= script_.size(); ++k) options_.prefix_tokens.push_back("S" + std::to_string(k));
    }
    if (options_.prefix_tokens.size() != script_.size() + 1) {
      throw ContractError("prefix_tokens must have H+1 entries");
    }
  }

  std::string_view name() const override { return "scripted"; }
  std::size_t num_actions() const override { return num_actions_; }
  const ActionSeq& script() const { return script_; }

  std::string describe_state() const override {
    std::string s = on_script_ ? "on-script k=" + std::to_string(matched_) : "off-script";
    s += " history=";
    for (auto a : history_) s += std::to_string(a);
    return s;
  }

 protected:
  std::string do_reset() override {
    on_script_ = true;
    matched_ = 0;
    history_.clear();
    return emit(options_.prefix_tokens[0]);
  }

  std::string do_step(Action a) override {
    history_.push_back(a);
    if (on_script_ && matched_ < script_.size() && script_[matched_] == a) {
      ++matched_;
      return emit(options_.prefix_tokens[matched_]);
    }
    on_script_ = false;
    if (options_.off_tokens.empty()) return emit("OFF");
    return emit(options_.off_tokens[history_hash() % options_.off_tokens.size()]);
  }

 private:
  std::string emit(const std::string& raw) const {
    auto it = options_.aliasing.find(raw);
    return it == options_.aliasing.end() ? raw : it->second;
  }

  std::uint64_t history_hash() const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (auto a : history_) {
      h ^= static_cast<std::uint64_t>(a) + 1;
      h *= 1099511628211ULL;
    }
    h ^= h >> 29;
    return h;
  }

  std::size_t num_actions_;
  ActionSeq script_;
  Options options_;
  bool on_script_ = true;
  std::size_t matched_ = 0;
  ActionSeq history_;
};

namespace detail {

// Scripts draw from their own stream so a learner seeded with the same
// integer does not replay the generator.
inline std::mt19937_64 script_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5c17e9u};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// |A| = 2, script (0, 1, 0): the smallest Markov chain used in examples.
inline ScriptedEnv make_chain_env() { return ScriptedEnv(2, ActionSeq{0, 1, 0}); }

/// Markov chain with unique per-prefix tokens and a random script.
inline ScriptedEnv make_markov_chain(std::size_t num_actions, std::size_t horizon, std::uint64_t seed) {
  auto rng = detail::script_rng(seed);
  std::uniform_int_distribution<Action> pick(0, static_cast<Action>(num_actions - 1));
  ActionSeq script(horizon);
  for (auto& a : script) a = pick(rng);
  return ScriptedEnv(num_actions, std::move(script));
}

/// Heavily aliased instance: on-script tokens and off-script tokens are both
/// drawn from a small alphabet, so wrong actions frequently reproduce the
/// demonstrated token and only reveal themselves later.
inline ScriptedEnv make_aliased_chain(std::size_t num_actions, std::size_t horizon, std::size_t alphabet,
                                      std::uint64_t seed) {
  auto rng = detail::script_rng(seed);
  std::uniform_int_distribution<Action> pick(0, static_cast<Action>(num_actions - 1));
  std::uniform_int_distribution<std::size_t> tok(0, alphabet - 1);
  ActionSeq script(horizon);
  for (auto& a : script) a = pick(rng);
  ScriptedEnv::Options opt;
  for (std::size_t k = 0; k <= horizon; ++k) opt.prefix_tokens.push_back("T" + std::to_string(tok(rng)));
  for (std::size_t i = 0; i < alphabet; ++i) opt.off_tokens.push_back("T" + std::to_string(i));
  return ScriptedEnv(num_actions, std::move(script), std::move(opt));
}

}  // namespace plots
