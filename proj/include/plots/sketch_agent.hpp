#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "plots/bps.hpp"
#include "plots/core.hpp"

namespace plots::sketch {

using PlanView = std::span<const Action>;

/// Partial instantiation of a sketch: some labels mapped to action
/// sequences, and some sketch elements pinned to complete plan spans.
///
/// Invariants after normalize():
///  - every placed element's label is assigned and its span matches the plan
///  - placed spans are ordered, and each gap between them leaves room for the
///    unplaced elements inside it (>= 1 action each, exact length if assigned)
///  - the element after the last placed one, if assigned, is a partial match
///    of the plan tail
struct Hypothesis {
  std::vector<std::optional<ActionSeq>> assign;  // per label
  std::vector<std::optional<Span>> span;         // per sketch element
  std::uint64_t id = 0;                          // creation order

  static Hypothesis empty(const Sketch& sk) {
    Hypothesis h;
    h.assign.resize(sk.num_labels());
    h.span.resize(sk.length());
    return h;
  }

  std::size_t assigned_count() const {
    return static_cast<std::size_t>(std::count_if(assign.begin(), assign.end(), [](const auto& a) { return a.has_value(); }));
  }

  /// Index of the last placed element, or -1.
  long last_placed() const {
    for (long j = static_cast<long>(span.size()) - 1; j >= 0; --j) {
      if (span[static_cast<std::size_t>(j)]) return j;
    }
    return -1;
  }

  std::size_t placed_end() const {
    const long p = last_placed();
    return p < 0 ? 0 : span[static_cast<std::size_t>(p)]->end;
  }

  /// Canonical identity (assignments and placements; ignores id).
  std::string key() const {
    std::string k;
    for (const auto& a : assign) {
      k += '[';
      if (a) {
        for (auto x : *a) k += std::to_string(x) + ',';
      } else {
        k += '?';
      }
      k += ']';
    }
    k += '|';
    for (const auto& s : span) {
      if (s) {
        k += std::to_string(s->begin) + '-' + std::to_string(s->end);
      }
      k += ';';
    }
    return k;
  }
};

namespace detail {

inline bool equal_range(PlanView plan, std::size_t begin, const ActionSeq& seq) {
  if (begin + seq.size() > plan.size()) return false;
  return std::equal(seq.begin(), seq.end(), plan.begin() + static_cast<std::ptrdiff_t>(begin));
}

inline ActionSeq slice(PlanView plan, std::size_t begin, std::size_t end) {
  return ActionSeq(plan.begin() + static_cast<std::ptrdiff_t>(begin), plan.begin() + static_cast<std::ptrdiff_t>(end));
}

inline std::size_t min_len(const Hypothesis& h, const Sketch& sk, std::size_t j) {
  const auto& a = h.assign[sk.elements[j]];
  return a ? a->size() : 1;
}

/// Sum of minimum lengths of elements in [lo, hi).
inline std::size_t min_sum(const Hypothesis& h, const Sketch& sk, long lo, long hi) {
  std::size_t s = 0;
  for (long j = lo; j < hi; ++j) s += min_len(h, sk, static_cast<std::size_t>(j));
  return s;
}

/// A region of `gap` actions holding `count` unplaced elements whose minimum
/// total is `need`: empty regions must be exactly empty.
inline bool gap_fits(long count, std::size_t need, std::size_t gap) { return count == 0 ? gap == 0 : gap >= need; }

inline bool all_assigned(const Hypothesis& h, const Sketch& sk, long lo, long hi) {
  for (long j = lo; j < hi; ++j) {
    if (!h.assign[sk.elements[static_cast<std::size_t>(j)]]) return false;
  }
  return true;
}

// Gap between placed anchors holding elements [lo, hi) over plan [x, y).
// Places whatever the gap forces; returns false on contradiction.
inline bool settle_gap(Hypothesis& h, const Sketch& sk, PlanView plan, long lo, long hi, std::size_t x, std::size_t y,
                       bool& changed) {
  if (lo == hi) return x == y;
  if (y < x) return false;
  const auto first = static_cast<std::size_t>(lo);
  const auto last = static_cast<std::size_t>(hi - 1);
  if (const auto& a = h.assign[sk.elements[first]]) {
    if (x + a->size() > y || !equal_range(plan, x, *a)) return false;
    h.span[first] = Span{x, x + a->size()};
    changed = true;
    return true;
  }
  if (const auto& a = h.assign[sk.elements[last]]) {
    if (a->size() > y - x || !equal_range(plan, y - a->size(), *a)) return false;
    h.span[last] = Span{y - a->size(), y};
    changed = true;
    return true;
  }
  if (hi - lo == 1) {
    if (y - x < 1) return false;
    h.span[first] = Span{x, y};
    changed = true;
    return true;
  }
  return y - x >= min_sum(h, sk, lo, hi);
}

}  // namespace detail

inline bool repeat_tail_consistent(const Hypothesis& h, const Sketch& sk, PlanView plan);

/// Propagates forced placements/assignments and checks consistency with the
/// confirmed plan. Returns false if the hypothesis is contradicted.
inline bool normalize(Hypothesis& h, const Sketch& sk, PlanView plan, std::size_t horizon) {
  using namespace detail;
  const auto t = plan.size();
  const long L = static_cast<long>(sk.length());
  for (;;) {
    bool changed = false;

    for (std::size_t j = 0; j < h.span.size(); ++j) {
      if (!h.span[j]) continue;
      const auto s = *h.span[j];
      if (s.end > t || s.end <= s.begin) return false;
      auto& a = h.assign[sk.elements[j]];
      if (!a) {
        a = slice(plan, s.begin, s.end);
        changed = true;
      } else if (a->size() != s.size() || !equal_range(plan, s.begin, *a)) {
        return false;
      }
    }
    if (changed) continue;

    long prev = -1;
    std::size_t prev_end = 0;
    for (long j = 0; j < L; ++j) {
      const auto& s = h.span[static_cast<std::size_t>(j)];
      if (!s) continue;
      if (s->begin < prev_end) return false;
      if (!settle_gap(h, sk, plan, prev + 1, j, prev_end, s->begin, changed)) return false;
      if (changed) break;
      prev = j;
      prev_end = s->end;
    }
    if (changed) continue;

    const long next = prev + 1;
    if (next >= L) return prev_end == t;
    if (const auto& a = h.assign[sk.elements[static_cast<std::size_t>(next)]]) {
      if (prev_end + a->size() <= t) {
        if (!equal_range(plan, prev_end, *a)) return false;
        h.span[static_cast<std::size_t>(next)] = Span{prev_end, prev_end + a->size()};
        continue;
      }
      if (!std::equal(plan.begin() + static_cast<std::ptrdiff_t>(prev_end), plan.end(), a->begin())) return false;
    }
    const auto need = min_sum(h, sk, next, L);
    if (prev_end + need > horizon) return false;
    if (all_assigned(h, sk, next, L) && prev_end + need != horizon) return false;
    return repeat_tail_consistent(h, sk, plan);
  }
}

/// Eq.-1 style score: total known length of the sketch elements that are not
/// yet completed under this hypothesis (elements after the last placed one).
/// Unassigned labels contribute 0.
inline std::size_t score(const Hypothesis& h, const Sketch& sk) {
  std::size_t s = 0;
  for (std::size_t j = static_cast<std::size_t>(h.last_placed() + 1); j < sk.length(); ++j) {
    if (const auto& a = h.assign[sk.elements[j]]) s += a->size();
  }
  return s;
}

/// The subtask this hypothesis is trying to pin down: the first element whose
/// label is unassigned and recurs, with its next occurrence still ahead.
struct MainElement {
  std::size_t first;   // first occurrence
  std::size_t repeat;  // next occurrence, always after the last placed element
};

inline std::optional<MainElement> main_element(const Hypothesis& h, const Sketch& sk) {
  const long p = h.last_placed();
  for (std::size_t j1 = 0; j1 < sk.length(); ++j1) {
    const auto label = sk.elements[j1];
    if (h.assign[label]) continue;
    for (std::size_t j2 = j1 + 1; j2 < sk.length(); ++j2) {
      if (sk.elements[j2] != label) continue;
      if (static_cast<long>(j2) > p) return MainElement{j1, j2};
      break;
    }
  }
  return std::nullopt;
}

namespace detail {

// Where the first occurrence of the main element may sit.
struct FirstOccurrenceWindow {
  std::size_t anchor_end;  // end of the nearest placed element before it
  long before_count;       // unplaced elements between that anchor and it
  std::size_t before_need;
  std::optional<std::size_t> bound_start;  // start of nearest placed element after it
  long after_count;                        // unplaced elements between it and that bound
  std::size_t after_need;
};

inline FirstOccurrenceWindow window_for(const Hypothesis& h, const Sketch& sk, const MainElement& m) {
  FirstOccurrenceWindow w{};
  long a = static_cast<long>(m.first) - 1;
  while (a >= 0 && !h.span[static_cast<std::size_t>(a)]) --a;
  w.anchor_end = a < 0 ? 0 : h.span[static_cast<std::size_t>(a)]->end;
  w.before_count = static_cast<long>(m.first) - a - 1;
  w.before_need = min_sum(h, sk, a + 1, static_cast<long>(m.first));
  long b = static_cast<long>(m.first) + 1;
  while (b < static_cast<long>(m.repeat) && !h.span[static_cast<std::size_t>(b)]) ++b;
  if (b < static_cast<long>(m.repeat)) {
    w.bound_start = h.span[static_cast<std::size_t>(b)]->begin;
    w.after_count = b - static_cast<long>(m.first) - 1;
    w.after_need = min_sum(h, sk, static_cast<long>(m.first) + 1, b);
  } else {
    w.after_count = static_cast<long>(m.repeat - m.first) - 1;
    w.after_need = min_sum(h, sk, static_cast<long>(m.first) + 1, static_cast<long>(m.repeat));
  }
  return w;
}

// Largest first-occurrence length allowed when it starts at s1 and the
// repeat starts at r; nullopt if the placement is infeasible.
inline std::optional<std::size_t> max_first_len(const FirstOccurrenceWindow& w, std::size_t s1, std::size_t r) {
  if (s1 < w.anchor_end || !gap_fits(w.before_count, w.before_need, s1 - w.anchor_end)) return std::nullopt;
  const std::size_t limit = w.bound_start ? *w.bound_start : r;
  if (limit <= s1) return std::nullopt;
  const std::size_t room = limit - s1;
  if (w.after_count == 0) return room;
  if (room < w.after_need + 1) return std::nullopt;
  return room - w.after_need;
}

// Exact-length variant: is [s1, s1+len) a feasible first occurrence?
inline bool first_fits(const FirstOccurrenceWindow& w, std::size_t s1, std::size_t len, std::size_t r) {
  const auto m = max_first_len(w, s1, r);
  if (!m) return false;
  return w.after_count == 0 ? *m == len : *m >= len;
}

// Can the repeat start at r given the unplaced elements after the last
// placed one? (Only constrains when the first occurrence is inside a gap.)
inline bool repeat_start_fits(const Hypothesis& h, const Sketch& sk, const MainElement& m, std::size_t r) {
  const long p = h.last_placed();
  if (static_cast<long>(m.first) > p) return true;  // handled through the window
  const auto e = h.placed_end();
  if (r < e) return false;
  return gap_fits(static_cast<long>(m.repeat) - p - 1, min_sum(h, sk, p + 1, static_cast<long>(m.repeat)), r - e);
}

}  // namespace detail

/// When the element right after the last placed one is the repeat of the
/// main subtask, the plan tail since then must still be a prefix of some
/// feasible first occurrence.
inline bool repeat_tail_consistent(const Hypothesis& h, const Sketch& sk, PlanView plan) {
  using namespace detail;
  const auto m = main_element(h, sk);
  if (!m || static_cast<long>(m->repeat) != h.last_placed() + 1) return true;
  const auto e = h.placed_end();
  const auto t = plan.size();
  const auto done = t - e;
  if (done == 0) return true;
  const auto w = window_for(h, sk, *m);
  for (std::size_t s1 = w.anchor_end; s1 + done <= e; ++s1) {
    const auto len = max_first_len(w, s1, e);
    if (!len || *len < done) continue;
    if (std::equal(plan.begin() + static_cast<std::ptrdiff_t>(e), plan.end(),
                   plan.begin() + static_cast<std::ptrdiff_t>(s1))) {
      return true;
    }
  }
  return false;
}

/// Action suggested by `h` for the next plan position, or nullopt.
///
/// If the plan tail sits inside an assigned element, its next action.
/// Otherwise, when `optimistic`, assume the main subtask is already repeating
/// (earliest feasible repeat start) and is as long as the layout allows, and
/// continue the copy of its first occurrence.
inline std::optional<Action> suggest(const Hypothesis& h, const Sketch& sk, PlanView plan, bool optimistic = true) {
  using namespace detail;
  const auto t = plan.size();
  const long p = h.last_placed();
  const auto e = h.placed_end();
  const auto next = static_cast<std::size_t>(p + 1);
  if (next >= sk.length()) return std::nullopt;
  if (const auto& a = h.assign[sk.elements[next]]) {
    const auto k = t - e;
    return k < a->size() ? std::optional<Action>((*a)[k]) : std::nullopt;
  }
  if (!optimistic) return std::nullopt;
  const auto m = main_element(h, sk);
  if (!m) return std::nullopt;
  const auto w = window_for(h, sk, *m);
  for (std::size_t r = e; r < t; ++r) {
    if (!repeat_start_fits(h, sk, *m, r)) continue;
    const auto done = t - r;
    for (std::size_t s1 = w.anchor_end; s1 + done < t && s1 < r; ++s1) {
      const auto len = max_first_len(w, s1, r);
      if (!len || *len <= done || s1 + *len > t) continue;
      if (std::equal(plan.begin() + static_cast<std::ptrdiff_t>(r), plan.end(),
                     plan.begin() + static_cast<std::ptrdiff_t>(s1))) {
        return plan[s1 + done];
      }
    }
  }
  return std::nullopt;
}

/// Children of `h` after the plan grew: for every suffix S of the plan that
/// can be the main subtask's repeat with an earlier matching first
/// occurrence, assign it (earliest feasible first occurrence per length) and
/// propagate the implied neighbours. At most t/2 children.
inline std::vector<Hypothesis> branch(const Hypothesis& h, const Sketch& sk, PlanView plan, std::size_t horizon) {
  using namespace detail;
  std::vector<Hypothesis> out;
  const auto m = main_element(h, sk);
  if (!m) return out;
  const auto t = plan.size();
  const auto w = window_for(h, sk, *m);
  const auto label = sk.elements[m->first];
  for (std::size_t len = 1; 2 * len <= t; ++len) {
    const auto r = t - len;
    if (!repeat_start_fits(h, sk, *m, r)) continue;
    const Action first_action = plan[r];
    const Action last_action = plan[t - 1];
    for (std::size_t s1 = w.anchor_end; s1 + len <= r; ++s1) {
      if (plan[s1] != first_action || plan[s1 + len - 1] != last_action) continue;
      if (!first_fits(w, s1, len, r)) continue;
      if (!std::equal(plan.begin() + static_cast<std::ptrdiff_t>(s1),
                      plan.begin() + static_cast<std::ptrdiff_t>(s1 + len),
                      plan.begin() + static_cast<std::ptrdiff_t>(r))) {
        continue;
      }
      Hypothesis child = h;
      child.assign[label] = slice(plan, r, t);
      child.span[m->first] = Span{s1, s1 + len};
      child.span[m->repeat] = Span{r, t};
      if (normalize(child, sk, plan, horizon)) {
        out.push_back(std::move(child));
        break;
      }
    }
  }
  return out;
}

struct PoolConfig {
  std::size_t n_hypotheses = 4;  // N1, the active set size
  bool optimistic = true;
  std::size_t capacity_factor = 1;  // stored hypotheses <= factor * H^2
};

struct PoolStats {
  std::size_t max_children_per_parent = 0;
  std::size_t max_stored = 0;
  std::size_t unfreezes = 0;
  std::size_t evictions = 0;
};

/// Active (top-N1) and frozen hypotheses. Frozen hypotheses are stored
/// verbatim and only re-validated when the active set runs dry.
class HypothesisPool {
 public:
  HypothesisPool(Sketch sketch, std::size_t horizon, PoolConfig cfg = {})
      : sketch_(std::move(sketch)), horizon_(horizon), cfg_(cfg) {
    sketch_.validate();
    if (cfg_.n_hypotheses == 0) throw ContractError("n_hypotheses must be >= 1");
    reset();
  }

  const Sketch& sketch() const { return sketch_; }
  const PoolConfig& config() const { return cfg_; }
  const std::vector<Hypothesis>& active() const { return active_; }
  const std::vector<Hypothesis>& frozen() const { return frozen_; }
  std::size_t stored() const { return active_.size() + frozen_.size(); }
  std::size_t capacity() const { return std::max<std::size_t>(1, cfg_.capacity_factor * horizon_ * horizon_); }
  const PoolStats& stats() const { return stats_; }

  void reset() {
    active_.clear();
    frozen_.clear();
    keys_.clear();
    add_unique(Hypothesis::empty(sketch_), active_);
  }

  /// Adds an externally built hypothesis to the active set (tests, seeding).
  bool insert(Hypothesis h) { return add_unique(std::move(h), active_); }

  /// Best eligible active hypothesis: its suggestion exists and is not
  /// excluded. Ties: higher score, more assigned labels, then older.
  std::optional<std::pair<const Hypothesis*, Action>> select(PlanView plan, const std::vector<bool>& excluded) const {
    const Hypothesis* best = nullptr;
    Action best_action = 0;
    for (const auto& h : active_) {
      const auto a = suggest(h, sketch_, plan, cfg_.optimistic);
      if (!a || *a >= excluded.size() || excluded[*a]) continue;
      if (!best || ranks_before(h, *best)) {
        best = &h;
        best_action = *a;
      }
    }
    if (!best) return std::nullopt;
    return std::make_pair(best, best_action);
  }

  /// Drops contradicted active hypotheses, branches the survivors, re-ranks,
  /// and unfreezes if nothing active is left.
  void update(PlanView plan) {
    keys_.clear();
    for (const auto& h : frozen_) keys_.insert(h.key());
    std::vector<Hypothesis> pool;
    for (auto& h : active_) {
      // normalize may extend placements, so keys are taken afterwards.
      if (normalize(h, sketch_, plan, horizon_) && keys_.insert(h.key()).second) pool.push_back(std::move(h));
    }
    active_.clear();
    const auto parents = pool.size();
    for (std::size_t i = 0; i < parents; ++i) {
      auto children = branch(pool[i], sketch_, plan, horizon_);
      stats_.max_children_per_parent = std::max(stats_.max_children_per_parent, children.size());
      for (auto& c : children) add_unique(std::move(c), pool);
    }
    std::stable_sort(pool.begin(), pool.end(), [this](const Hypothesis& a, const Hypothesis& b) { return ranks_before(a, b); });
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (i < cfg_.n_hypotheses ? active_ : frozen_).push_back(std::move(pool[i]));
    }
    if (active_.empty()) unfreeze(plan);
    enforce_capacity();
    stats_.max_stored = std::max(stats_.max_stored, stored());
  }

  /// Replaces the pool after a backtrack: rebuilt from the empty hypothesis by
  /// replaying the surviving prefix; stored hypotheses whose placements lie
  /// entirely inside that prefix are kept frozen.
  void rebuild(PlanView plan) {
    std::vector<Hypothesis> keep;
    for (auto* group : {&active_, &frozen_}) {
      for (auto& h : *group) {
        if (h.placed_end() <= plan.size() && normalize(h, sketch_, plan, horizon_)) keep.push_back(std::move(h));
      }
    }
    reset();
    for (std::size_t k = 1; k <= plan.size(); ++k) update(plan.first(k));
    for (auto& h : keep) add_unique(std::move(h), frozen_);
    enforce_capacity();
  }

 private:
  bool ranks_before(const Hypothesis& a, const Hypothesis& b) const {
    const auto sa = score(a, sketch_);
    const auto sb = score(b, sketch_);
    if (sa != sb) return sa > sb;
    const auto na = a.assigned_count();
    const auto nb = b.assigned_count();
    if (na != nb) return na > nb;
    return a.id < b.id;
  }

  bool add_unique(Hypothesis h, std::vector<Hypothesis>& into) {
    if (!keys_.insert(h.key()).second) return false;
    h.id = next_id_++;
    into.push_back(std::move(h));
    return true;
  }

  void rebuild_keys(const std::vector<Hypothesis>& pool) {
    keys_.clear();
    for (const auto& h : frozen_) keys_.insert(h.key());
    for (const auto& h : pool) keys_.insert(h.key());
  }

  void unfreeze(PlanView plan) {
    std::stable_sort(frozen_.begin(), frozen_.end(), [this](const Hypothesis& a, const Hypothesis& b) { return ranks_before(a, b); });
    std::vector<Hypothesis> rest;
    std::unordered_set<std::string> seen;
    for (auto& h : frozen_) {
      if (active_.size() >= cfg_.n_hypotheses) {
        rest.push_back(std::move(h));
        continue;
      }
      if (normalize(h, sketch_, plan, horizon_) && seen.insert(h.key()).second) active_.push_back(std::move(h));
    }
    frozen_ = std::move(rest);
    rebuild_keys(active_);
    if (!active_.empty()) ++stats_.unfreezes;
  }

  void enforce_capacity() {
    if (stored() <= capacity()) return;
    std::stable_sort(frozen_.begin(), frozen_.end(), [this](const Hypothesis& a, const Hypothesis& b) { return ranks_before(a, b); });
    while (stored() > capacity() && !frozen_.empty()) {
      keys_.erase(frozen_.back().key());
      frozen_.pop_back();
      ++stats_.evictions;
    }
  }

  Sketch sketch_;
  std::size_t horizon_;
  PoolConfig cfg_;
  std::vector<Hypothesis> active_;
  std::vector<Hypothesis> frozen_;
  std::unordered_set<std::string> keys_;
  std::uint64_t next_id_ = 0;
  PoolStats stats_;
};

}  // namespace plots::sketch

namespace plots {

/// PLOTS-Sketch frontier strategy on top of backtracking procedure search.
class SketchSuggester final : public ActionSuggester {
 public:
  SketchSuggester(Sketch sketch, std::size_t horizon, sketch::PoolConfig cfg = {})
      : pool_(std::move(sketch), horizon, cfg) {}

  std::optional<Action> suggest(std::size_t, const PartialPlan& plan, const std::vector<bool>& excluded) override {
    auto pick = pool_.select(plan.confirmed(), excluded);
    if (!pick) return std::nullopt;
    return pick->second;
  }

  void on_confirm(const PartialPlan& plan) override { pool_.update(plan.confirmed()); }
  void on_backtrack(const PartialPlan& plan) override { pool_.rebuild(plan.confirmed()); }

  const sketch::HypothesisPool& pool() const { return pool_; }

 private:
  sketch::HypothesisPool pool_;
};

}  // namespace plots
