#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace plots {

/// Raised when a caller breaks an operation's precondition (bad action id,
/// stepping before reset, malformed map, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for bad user-facing configuration (unknown env/agent names,
/// unparsable files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Action = std::uint32_t;
using ActionSeq = std::vector<Action>;

/// Interned observation token. Equality is token identity; the printable
/// name lives in the owning TokenTable.
struct Observation {
  std::uint32_t id = 0;
  friend bool operator==(Observation, Observation) = default;
};

struct ObservationHash {
  std::size_t operator()(Observation o) const noexcept { return std::hash<std::uint32_t>{}(o.id); }
};

class TokenTable {
 public:
  Observation intern(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return Observation{it->second};
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return Observation{id};
  }

  std::optional<Observation> find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return Observation{it->second};
  }

  const std::string& name(Observation o) const {
    if (o.id >= names_.size()) throw ContractError("unknown observation id");
    return names_[o.id];
  }

  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Deterministic, possibly aliased environment. Agents only see tokens.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::string action_name(Action a) const { return std::to_string(a); }

  Observation reset() {
    was_reset_ = true;
    return tokens_.intern(do_reset());
  }

  Observation step(Action a) {
    if (!was_reset_) throw ContractError("step called before reset");
    if (a >= num_actions()) {
      throw ContractError("action id " + std::to_string(a) + " out of range for " +
                          std::string(name()));
    }
    return tokens_.intern(do_step(a));
  }

  TokenTable& tokens() { return tokens_; }
  const TokenTable& tokens() const { return tokens_; }

  /// Printable dump of the latent state, for tests and debugging only.
  virtual std::string describe_state() const = 0;

 protected:
  virtual std::string do_reset() = 0;
  virtual std::string do_step(Action a) = 0;

 private:
  TokenTable tokens_;
  bool was_reset_ = false;
};

/// Ordered subtask labels, e.g. (b1, b2, b1, b3, b1). Elements index into
/// label_names.
struct Sketch {
  std::vector<std::size_t> elements;
  std::vector<std::string> label_names;

  std::size_t num_labels() const { return label_names.size(); }
  std::size_t length() const { return elements.size(); }

  void validate() const {
    if (elements.empty()) throw ContractError("sketch must contain at least one element");
    for (auto e : elements) {
      if (e >= label_names.size()) throw ContractError("sketch element references unknown label");
    }
  }

  /// Builds a sketch from label strings, interning labels in first-seen order.
  static Sketch from_labels(const std::vector<std::string>& labels) {
    Sketch s;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& l : labels) {
      auto [it, inserted] = index.emplace(l, s.label_names.size());
      if (inserted) s.label_names.push_back(l);
      s.elements.push_back(it->second);
    }
    s.validate();
    return s;
  }
};

/// Half-open range of plan positions [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Ground-truth placement of each sketch element within the demonstration.
struct OracleAlignment {
  std::vector<Span> segments;

  void validate(std::size_t horizon) const {
    std::size_t cursor = 0;
    for (const auto& s : segments) {
      if (s.begin != cursor || s.end <= s.begin) {
        throw ContractError("oracle alignment must partition the horizon into non-empty spans");
      }
      cursor = s.end;
    }
    if (cursor != horizon) throw ContractError("oracle alignment does not cover the horizon");
  }
};

struct Demonstration {
  std::vector<Observation> observations;
  std::optional<Sketch> sketch;

  std::size_t horizon() const { return observations.size(); }
};

/// Executes `solution` from reset and records Z*.
inline Demonstration record_demonstration(Environment& env, const ActionSeq& solution,
                                          std::optional<Sketch> sketch = std::nullopt) {
  if (solution.empty()) throw ContractError("demonstration needs at least one action");
  Demonstration demo;
  env.reset();
  demo.observations.reserve(solution.size());
  for (auto a : solution) demo.observations.push_back(env.step(a));
  demo.sketch = std::move(sketch);
  return demo;
}

/// Replays `plan` from reset; returns the emitted observations.
inline std::vector<Observation> replay(Environment& env, const ActionSeq& plan) {
  std::vector<Observation> out;
  out.reserve(plan.size());
  env.reset();
  for (auto a : plan) out.push_back(env.step(a));
  return out;
}

inline bool reproduces(Environment& env, const ActionSeq& plan, const Demonstration& demo) {
  return plan.size() == demo.horizon() && replay(env, plan) == demo.observations;
}

// Demonstration file format:
//   H=<int> A=<int>
//   <token>            (H lines)
//   SKETCH <label> ... (optional)

inline void write_demonstration(std::ostream& os, const Demonstration& demo, const Environment& env) {
  os << "H=" << demo.horizon() << " A=" << env.num_actions() << '\n';
  for (auto o : demo.observations) os << env.tokens().name(o) << '\n';
  if (demo.sketch) {
    os << "SKETCH";
    for (auto e : demo.sketch->elements) os << ' ' << demo.sketch->label_names[e];
    os << '\n';
  }
}

/// Parses a demonstration file, interning tokens into `env`'s table.
/// Throws ConfigError on malformed input or an action-count mismatch.
inline Demonstration read_demonstration(std::istream& is, Environment& env) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty demonstration file");
  std::size_t horizon = 0;
  std::size_t actions = 0;
  {
    std::istringstream hs(line);
    std::string h_field, a_field;
    hs >> h_field >> a_field;
    if (h_field.rfind("H=", 0) != 0 || a_field.rfind("A=", 0) != 0) {
      throw ConfigError("demonstration header must read 'H=<int> A=<int>'");
    }
    try {
      horizon = std::stoul(h_field.substr(2));
      actions = std::stoul(a_field.substr(2));
    } catch (const std::exception&) {
      throw ConfigError("demonstration header has non-numeric fields");
    }
  }
  if (horizon == 0) throw ConfigError("demonstration horizon must be >= 1");
  if (actions != env.num_actions()) {
    throw ConfigError("demonstration action count " + std::to_string(actions) +
                      " does not match environment (" + std::to_string(env.num_actions()) + ")");
  }
  Demonstration demo;
  while (demo.observations.size() < horizon && std::getline(is, line)) {
    if (line.empty()) continue;
    demo.observations.push_back(env.tokens().intern(line));
  }
  if (demo.observations.size() != horizon) throw ConfigError("demonstration truncated");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw != "SKETCH") throw ConfigError("unexpected trailer line: " + line);
    std::vector<std::string> labels;
    for (std::string l; ss >> l;) labels.push_back(l);
    try {
      demo.sketch = Sketch::from_labels(labels);
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
  }
  return demo;
}

}  // namespace plots
