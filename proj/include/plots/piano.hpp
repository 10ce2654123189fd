#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <string>
#include <vector>

#include "plots/core.hpp"

namespace plots {

/// Five-finger hand over a diatonic keyboard. The observation is the sounded
/// note, never the hand position, so different hand configurations that hit
/// the same key are indistinguishable.
///
/// Finger 1 (thumb) sounds key wrist + thumb_offset with thumb_offset in
/// [-3, 0]; finger k in 2..5 sounds key wrist + (k - 1).
class PianoEnv final : public Environment {
 public:
  enum Act : Action {
    kFinger1 = 0, kFinger2, kFinger3, kFinger4, kFinger5,
    kWristUp, kWristDown, kThumbUp, kThumbDown
  };
  static constexpr std::size_t kNumActions = 9;
  static constexpr int kNumKeys = 29;  // C2 .. C6
  static constexpr int kMinWrist = 3;
  static constexpr int kMaxWrist = kNumKeys - 5;
  static constexpr int kMinThumb = -3;
  static constexpr int kStartWrist = 14;  // C4

  static std::string note_name(int key) {
    static constexpr std::array<char, 7> letters{'C', 'D', 'E', 'F', 'G', 'A', 'B'};
    return std::string(1, letters[key % 7]) + std::to_string(2 + key / 7);
  }

  static int finger_offset(int finger, int thumb_offset) { return finger == 1 ? thumb_offset : finger - 1; }

  std::string_view name() const override { return "piano"; }
  std::size_t num_actions() const override { return kNumActions; }
  std::string action_name(Action a) const override {
    static constexpr std::array<const char*, kNumActions> names{
        "f1", "f2", "f3", "f4", "f5", "wrist_up", "wrist_down", "thumb_up", "thumb_down"};
    return a < kNumActions ? names[a] : "?";
  }

  int wrist() const { return wrist_; }
  int thumb_offset() const { return thumb_; }

  /// Test hook: place the hand directly.
  void set_hand(int wrist, int thumb_offset) {
    if (wrist < kMinWrist || wrist > kMaxWrist || thumb_offset < kMinThumb || thumb_offset > 0) {
      throw ContractError("hand position out of range");
    }
    wrist_ = wrist;
    thumb_ = thumb_offset;
  }

  std::string describe_state() const override {
    return "wrist=" + std::to_string(wrist_) + " thumb=" + std::to_string(thumb_);
  }

 protected:
  std::string do_reset() override {
    wrist_ = kStartWrist;
    thumb_ = 0;
    return "silence";
  }

  std::string do_step(Action a) override {
    if (a <= kFinger5) return note_name(wrist_ + finger_offset(static_cast<int>(a) + 1, thumb_));
    switch (a) {
      case kWristUp: wrist_ = std::min(wrist_ + 1, kMaxWrist); break;
      case kWristDown: wrist_ = std::max(wrist_ - 1, kMinWrist); break;
      case kThumbUp: thumb_ = std::min(thumb_ + 1, 0); break;
      default: thumb_ = std::max(thumb_ - 1, kMinThumb); break;
    }
    return "silence";
  }

 private:
  int wrist_ = kStartWrist;
  int thumb_ = 0;
};

/// Score file: one token per line (a note name or "silence"), optionally
/// followed by a `SKETCH <label> ...` line.
struct PianoScore {
  std::vector<std::string> tokens;
  std::optional<Sketch> sketch;

  std::size_t note_count() const {
    return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(),
                                                  [](const std::string& t) { return t != "silence"; }));
  }
};

inline PianoScore read_piano_score(std::istream& is) {
  PianoScore score;
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    if (line.rfind("SKETCH", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::vector<std::string> labels;
      for (std::string l; ss >> l;) labels.push_back(l);
      score.sketch = Sketch::from_labels(labels);
      continue;
    }
    score.tokens.push_back(line);
  }
  if (score.tokens.empty()) throw ConfigError("piano score has no notes");
  return score;
}

inline void write_piano_score(std::ostream& os, const PianoScore& score) {
  for (const auto& t : score.tokens) os << t << '\n';
  if (score.sketch) {
    os << "SKETCH";
    for (auto e : score.sketch->elements) os << ' ' << score.sketch->label_names[e];
    os << '\n';
  }
}

}  // namespace plots
