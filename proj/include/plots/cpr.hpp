#pragma once

#include <array>
#include <string>

#include "plots/scripted_env.hpp"

namespace plots {

namespace cpr {

inline constexpr std::array<const char*, 23> kActionNames{
    "check_scene",  "tap_shoulder", "shout",        "call_911",    "get_aed",     "check_breathing",
    "place_on_back", "kneel",       "tilt_head",    "lift_chin",   "pinch_nose",  "seal_mouth",
    "give_breath",  "watch_chest",  "place_hands",  "lock_elbows", "compress",    "release",
    "count_aloud",  "check_pulse",  "turn_on_aed",  "attach_pads", "stand_clear"};

inline Action id(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (name == kActionNames[i]) return static_cast<Action>(i);
  }
  throw ContractError("unknown CPR action " + std::string(name));
}

/// Scene check, call for help, first rescue breath (12 actions).
inline ActionSeq assess_block() {
  ActionSeq s;
  for (auto n : {"check_scene", "tap_shoulder", "shout", "call_911", "get_aed", "place_on_back",
                 "check_breathing", "kneel", "tilt_head", "lift_chin", "pinch_nose", "give_breath"}) {
    s.push_back(id(n));
  }
  return s;
}

/// 30 compressions then two rescue breaths (37 actions).
inline ActionSeq compression_cycle() {
  ActionSeq s{id("place_hands"), id("lock_elbows")};
  s.insert(s.end(), 30, id("compress"));
  for (auto n : {"tilt_head", "lift_chin", "seal_mouth", "give_breath", "give_breath"}) s.push_back(id(n));
  return s;
}

}  // namespace cpr

/// Scripted CPR procedure over the 23-action vocabulary. On-script tokens
/// describe the procedure step reached; leaving the script is terminal.
class CprEnv final : public ScriptedEnv {
 public:
  static constexpr std::size_t kNumActions = cpr::kActionNames.size();

  CprEnv() : ScriptedEnv(kNumActions, canonical_script(), token_options()) {}

  static ActionSeq canonical_script() {
    ActionSeq s = cpr::assess_block();
    for (int i = 0; i < 5; ++i) {
      auto c = cpr::compression_cycle();
      s.insert(s.end(), c.begin(), c.end());
    }
    return s;
  }

  std::string_view name() const override { return "cpr"; }
  std::string action_name(Action a) const override { return a < kNumActions ? cpr::kActionNames[a] : "?"; }

 private:
  static Options token_options() {
    const auto script = canonical_script();
    Options o;
    o.prefix_tokens.push_back("patient_down");
    for (std::size_t k = 0; k < script.size(); ++k) {
      o.prefix_tokens.push_back("step" + std::to_string(k + 1) + ":" + cpr::kActionNames[script[k]]);
    }
    return o;
  }
};

}  // namespace plots
