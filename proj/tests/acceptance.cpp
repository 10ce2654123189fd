// Acceptance suite: one PASS/FAIL line per criterion, exit code = failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "plots/plots.hpp"

using namespace plots;
using Clock = std::chrono::steady_clock;

namespace tol {
constexpr double kEq1MaxMs = 1.0;
constexpr std::size_t kMarkovSeeds = 100;
constexpr std::size_t kMarkovMaxEpisodes = 100;  // |A| * H
constexpr std::size_t kMarkovMaxSteps = 2000;    // |A| * H^2
constexpr double kMarkovMaxSeconds = 5.0;
constexpr std::size_t kAliasedInstances = 200;
constexpr double kAliasedMaxSeconds = 60.0;
constexpr std::size_t kTableSeeds = 10;
constexpr std::size_t kBudget = 30000;
constexpr double kCprRatio = 0.5;
constexpr double kGemSketchBand = 0.2;
constexpr double kGemBaselineLo = 1.5;
constexpr double kGemBaselineHi = 3.0;
constexpr double kNoiseStderrs = 2.0;   // |a - b| <= 2 * combined standard error
constexpr double kNoiseRelative = 0.05;  // ... or 5% of the larger mean
constexpr double kN1Spread = 0.15;
constexpr std::size_t kPoolFuzzRuns = 300;
constexpr double kSweepMaxSeconds = 600.0;
}  // namespace tol

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

enum : Action { e, f, g, h, i };

// ---- worked examples ----

void eq1_example() {
  const auto sk = Sketch::from_labels({"b1", "b2", "b1", "b3", "b1"});
  const ActionSeq plan{e, f, g, e, f};
  const auto t0 = Clock::now();
  auto m1 = sketch::Hypothesis::empty(sk);
  m1.assign[0] = ActionSeq{e, f};
  m1.assign[1] = ActionSeq{g};
  m1.span[0] = Span{0, 2};
  const bool ok = sketch::normalize(m1, sk, plan, 8);
  const auto s = sketch::score(m1, sk);
  const double ms = seconds_since(t0) * 1e3;
  report("score_worked_example", ok && s == 2 && ms < tol::kEq1MaxMs, fmt("score=%zu (want 2), %.3f ms", s, ms));
}

void optimistic_example() {
  const auto sk = Sketch::from_labels({"b1", "b2", "b1", "b3", "b1"});
  const auto a = sketch::suggest(sketch::Hypothesis::empty(sk), sk, ActionSeq{e, f, g, e}, true);
  report("optimistic_suggestion", a == std::optional<Action>(f),
         a ? fmt("suggested action %u (want f=%u)", *a, unsigned{f}) : std::string("no suggestion"));
}

void branching_example() {
  const auto sk = Sketch::from_labels({"b3", "b1", "b2", "b1", "b4"});
  const ActionSeq plan{e, f, g, h, i, f, g, h};
  const auto kids = sketch::branch(sketch::Hypothesis::empty(sk), sk, plan, 12);
  std::set<ActionSeq> b1;
  bool residual_ok = true;
  for (const auto& k : kids) {
    if (!k.assign[0] || !k.assign[1] || !k.assign[2]) {
      residual_ok = false;
      continue;
    }
    b1.insert(*k.assign[1]);
    ActionSeq b3b1 = *k.assign[0];
    b3b1.insert(b3b1.end(), k.assign[1]->begin(), k.assign[1]->end());
    residual_ok = residual_ok && b3b1 == ActionSeq{e, f, g, h} && k.assign[2]->front() == i;
    if (*k.assign[1] == ActionSeq{f, g, h}) residual_ok = residual_ok && *k.assign[2] == ActionSeq{i};
  }
  const std::set<ActionSeq> want{{h}, {g, h}, {f, g, h}};
  report("branching_example", kids.size() == 3 && b1 == want && residual_ok,
         fmt("%zu children, b1 set %s, residuals %s", kids.size(), b1 == want ? "exact" : "WRONG",
             residual_ok ? "consistent" : "WRONG"));
}

// ---- BPS guarantees ----

void markov_bound() {
  const auto t0 = Clock::now();
  std::size_t worst_eps = 0, worst_steps = 0, backtracks = 0;
  bool complete = true;
  for (std::uint64_t seed = 0; seed < tol::kMarkovSeeds; ++seed) {
    auto env = make_markov_chain(5, 20, seed);
    auto demo = record_demonstration(env, env.script());
    UniformSuggester s;
    Rng rng(seed);
    const auto r = learn(env, demo, s, rng);
    complete = complete && r.complete && reproduces(env, r.plan, demo);
    worst_eps = std::max(worst_eps, r.episodes);
    worst_steps = std::max(worst_steps, r.total_steps);
    backtracks += r.backtracks;
  }
  const double secs = seconds_since(t0);
  report("markov_sample_bound",
         complete && worst_eps <= tol::kMarkovMaxEpisodes && worst_steps <= tol::kMarkovMaxSteps && backtracks == 0 &&
             secs < tol::kMarkovMaxSeconds,
         fmt("max episodes %zu<=%zu, max steps %zu<=%zu, backtracks %zu, %.2fs", worst_eps, tol::kMarkovMaxEpisodes,
             worst_steps, tol::kMarkovMaxSteps, backtracks, secs));
}

void aliased_completeness() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  std::size_t ok = 0, with_backtracks = 0;
  std::string first_bad;
  for (std::size_t n = 0; n < tol::kAliasedInstances; ++n) {
    const std::size_t A = 2 + gen() % 2;
    const std::size_t H = 1 + gen() % 8;
    const std::size_t alphabet = 2 + gen() % 2;
    auto env = make_aliased_chain(A, H, alphabet, gen());
    auto demo = record_demonstration(env, env.script());
    UniformSuggester s;
    Rng rng(n);
    const auto r = learn(env, demo, s, rng);
    const auto all = oracles::reproducing_plans(env, demo);
    const bool in_set = std::find(all.begin(), all.end(), r.plan) != all.end();
    if (r.complete && reproduces(env, r.plan, demo) && in_set) {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = fmt(" (first failure: instance %zu)", n);
    }
    with_backtracks += r.backtracks > 0;
  }
  const double secs = seconds_since(t0);
  report("aliased_completeness", ok == tol::kAliasedInstances && secs < tol::kAliasedMaxSeconds,
         fmt("%zu/%zu reproduce Z* and match brute force, %zu needed backtracking, %.2fs%s", ok,
             tol::kAliasedInstances, with_backtracks, secs, first_bad.c_str()));
}

// ---- Table 1 ----

struct Cell {
  double mean = 0;
  double stderr_ = 0;
  std::size_t completed = 0;
  std::size_t runs = 0;
};

std::vector<harness::RunRecord> all_records;

Cell cell(const std::string& env, const std::string& agent, std::size_t n_hyp = 4) {
  std::vector<double> eps;
  Cell c;
  for (const auto& r : all_records) {
    if (r.config.env != env || r.config.agent != agent || r.config.n_hypotheses != n_hyp) continue;
    eps.push_back(static_cast<double>(r.episodes));
    c.completed += r.complete;
  }
  c.runs = eps.size();
  if (eps.empty()) return c;
  for (auto x : eps) c.mean += x / static_cast<double>(eps.size());
  double var = 0;
  for (auto x : eps) var += (x - c.mean) * (x - c.mean);
  if (eps.size() > 1) c.stderr_ = std::sqrt(var / static_cast<double>(eps.size() - 1) / static_cast<double>(eps.size()));
  return c;
}

bool within_noise(const Cell& a, const Cell& b) {
  const double combined = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
  return std::abs(a.mean - b.mean) <= std::max(tol::kNoiseStderrs * combined, tol::kNoiseRelative * std::max(a.mean, b.mean));
}

void run_table_sweep() {
  std::vector<harness::RunConfig> cfgs;
  for (const auto* env : {"cpr", "gem", "island", "piano"}) {
    for (const auto& agent : harness::agent_names()) {
      for (std::uint64_t s = 0; s < tol::kTableSeeds; ++s) {
        harness::RunConfig c;
        c.env = env;
        c.agent = agent;
        c.seed = s;
        c.max_episodes = tol::kBudget;
        cfgs.push_back(c);
      }
    }
  }
  for (std::size_t n : {1, 2, 8}) {
    for (std::uint64_t s = 0; s < tol::kTableSeeds; ++s) {
      harness::RunConfig c;
      c.env = "island";
      c.agent = "plots_sketch";
      c.n_hypotheses = n;
      c.seed = s;
      cfgs.push_back(c);
    }
  }
  const auto t0 = Clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "plots_acceptance_sweep";
  std::filesystem::remove_all(dir);
  auto res = harness::sweep(cfgs, dir.string());
  const double secs = seconds_since(t0);
  std::size_t errors = 0;
  for (const auto& r : res.records) errors += !r.error.empty();
  all_records = std::move(res.records);
  std::filesystem::remove_all(dir);
  report("sweep_runtime", errors == 0 && secs < tol::kSweepMaxSeconds,
         fmt("%zu runs, %zu errors, %.1fs (< %.0fs)", cfgs.size(), errors, secs, tol::kSweepMaxSeconds));
}

void table_cpr() {
  const auto bps = cell("cpr", "bps"), sk = cell("cpr", "plots_sketch"), ns = cell("cpr", "plots_nosketch"),
             osa = cell("cpr", "bpsosa");
  const bool ok = bps.completed == bps.runs && sk.mean <= tol::kCprRatio * bps.mean &&
                  ns.mean <= tol::kCprRatio * bps.mean && osa.mean < bps.mean;
  report("table1_cpr", ok,
         fmt("BPS %.1f, Sketch %.1f (<=%.2fx), NoSketch %.1f (<=%.2fx), BPSOSA %.1f (<BPS)", bps.mean, sk.mean,
             tol::kCprRatio, ns.mean, tol::kCprRatio, osa.mean));
}

void table_gem() {
  const auto bps = cell("gem", "bps"), sk = cell("gem", "plots_sketch"), rm = cell("gem", "rmax_plus"),
             ucb = cell("gem", "ucb_plus");
  const double rel = std::abs(sk.mean - bps.mean) / bps.mean;
  const double r_rm = rm.mean / bps.mean, r_ucb = ucb.mean / bps.mean;
  const bool ok = rel <= tol::kGemSketchBand && r_rm >= tol::kGemBaselineLo && r_rm <= tol::kGemBaselineHi &&
                  r_ucb >= tol::kGemBaselineLo && r_ucb <= tol::kGemBaselineHi && within_noise(rm, ucb);
  report("table1_gem", ok,
         fmt("BPS %.1f, Sketch %.1f (|rel|=%.2f<=%.2f), RMax+ %.1f (%.2fx), UCB+ %.1f (%.2fx), baselines %s", bps.mean,
             sk.mean, rel, tol::kGemSketchBand, rm.mean, r_rm, ucb.mean, r_ucb,
             within_noise(rm, ucb) ? "agree" : "DIFFER"));
}

void table_island() {
  const auto bps = cell("island", "bps"), sk = cell("island", "plots_sketch"), ns = cell("island", "plots_nosketch"),
             osa = cell("island", "bpsosa"), rm = cell("island", "rmax_plus"), ucb = cell("island", "ucb_plus");
  const bool ok = sk.mean < bps.mean && ns.mean < bps.mean && osa.mean < bps.mean && within_noise(rm, ucb) &&
                  rm.mean > bps.mean && ucb.mean > bps.mean;
  report("table1_island", ok,
         fmt("BPS %.1f; Sketch %.1f, NoSketch %.1f, BPSOSA %.1f (<BPS); RMax+ %.1f ~ UCB+ %.1f (>BPS)", bps.mean,
             sk.mean, ns.mean, osa.mean, rm.mean, ucb.mean));
}

void table_piano() {
  std::string detail;
  bool ok = true;
  for (const auto* agent : {"bps", "plots_sketch", "plots_nosketch", "bpsosa"}) {
    const auto c = cell("piano", agent);
    ok = ok && c.completed == c.runs && c.runs == tol::kTableSeeds;
    detail += fmt("%s %zu/%zu (%.0f) ", agent, c.completed, c.runs, c.mean);
  }
  for (const auto* agent : {"rmax_plus", "ucb_plus"}) {
    const auto c = cell("piano", agent);
    ok = ok && c.completed == 0 && c.runs == tol::kTableSeeds;
    detail += fmt("%s %zu/%zu within %zu ", agent, c.completed, c.runs, tol::kBudget);
  }
  report("table1_piano", ok, detail);
}

void n1_sensitivity() {
  const auto n1 = cell("island", "plots_sketch", 1), n2 = cell("island", "plots_sketch", 2),
             n4 = cell("island", "plots_sketch", 4), n8 = cell("island", "plots_sketch", 8);
  const double lo = std::min({n2.mean, n4.mean, n8.mean}), hi = std::max({n2.mean, n4.mean, n8.mean});
  const double spread = (hi - lo) / lo;
  report("n1_sensitivity", n2.mean < n1.mean && spread <= tol::kN1Spread,
         fmt("N1=1 %.1f, N1=2 %.1f, N1=4 %.1f, N1=8 %.1f; spread of {2,4,8} %.2f<=%.2f", n1.mean, n2.mean, n4.mean,
             n8.mean, spread, tol::kN1Spread));
}

void soundness() {
  std::size_t checked = 0, bad = 0;
  std::map<std::string, Task> tasks;
  for (const auto& r : all_records) {
    if (!r.complete) continue;
    auto it = tasks.find(r.config.env);
    if (it == tasks.end()) it = tasks.emplace(r.config.env, make_task(r.config.env)).first;
    auto [env, demo] = it->second.instantiate();
    ++checked;
    bad += !reproduces(*env, r.plan, demo);
  }
  // Small domains, every agent, many seeds.
  for (const auto* env_name : {"chain", "scripted"}) {
    for (const auto& agent : {"bps", "plots_nosketch", "rmax_plus", "ucb_plus"}) {
      for (std::uint64_t s = 0; s < 20; ++s) {
        harness::RunConfig c;
        c.env = env_name;
        c.agent = agent;
        c.seed = s;
        const auto r = harness::run(c);
        if (!r.complete) {
          ++bad;
          continue;
        }
        auto [env, demo] = make_task(env_name).instantiate();
        ++checked;
        bad += !reproduces(*env, r.plan, demo);
      }
    }
  }
  report("soundness", bad == 0 && checked > 0, fmt("%zu completed plans replayed, %zu mismatches", checked, bad));
}

void pool_bounds() {
  std::mt19937_64 gen(77);
  std::size_t worst_children = 0, worst_stored = 0, violations = 0, runs = 0;
  auto check = [&](const SketchSuggester& agent, std::size_t H) {
    const auto& st = agent.pool().stats();
    worst_children = std::max(worst_children, st.max_children_per_parent);
    worst_stored = std::max(worst_stored, st.max_stored);
    violations += st.max_children_per_parent > H / 2 || st.max_stored > H * H;
    ++runs;
  };
  for (std::size_t n = 0; n < tol::kPoolFuzzRuns; ++n) {
    const auto inst = oracles::random_sketched(gen, 8, 24);
    ScriptedEnv env(3, inst.plan);
    auto demo = record_demonstration(env, inst.plan, inst.sketch);
    SketchSuggester agent(inst.sketch, inst.plan.size(), {.n_hypotheses = 1 + n % 8});
    Rng rng(n);
    learn(env, demo, agent, rng);
    check(agent, inst.plan.size());
  }
  for (const auto* name : {"cpr", "gem", "island", "piano"}) {
    const auto task = make_task(name);
    auto [env, demo] = task.instantiate();
    SketchSuggester agent(*task.sketch, demo.horizon());
    Rng rng(5);
    learn(*env, demo, agent, rng);
    check(agent, demo.horizon());
  }
  report("hypothesis_pool_bounds", violations == 0,
         fmt("%zu runs, %zu violations (children<=H/2, stored<=H^2); worst children %zu, worst stored %zu", runs,
             violations, worst_children, worst_stored));
}

void oracle_equivalence() {
  std::mt19937_64 gen(99);
  std::size_t score_checks = 0, score_bad = 0;
  for (int n = 0; n < 500; ++n) {
    const auto inst = oracles::random_sketched(gen, 6, 12);
    sketch::HypothesisPool pool(inst.sketch, inst.plan.size(), {.n_hypotheses = 64});
    for (std::size_t t = 1; t <= inst.plan.size(); ++t) {
      const ActionSeq plan(inst.plan.begin(), inst.plan.begin() + static_cast<long>(t));
      pool.update(plan);
      for (const auto* group : {&pool.active(), &pool.frozen()}) {
        for (auto hyp : *group) {
          if (!sketch::normalize(hyp, inst.sketch, plan, inst.plan.size())) continue;
          ++score_checks;
          score_bad += static_cast<long>(sketch::score(hyp, inst.sketch)) != oracles::score(hyp, inst.sketch, plan);
        }
      }
    }
  }
  std::size_t repeat_checks = 0, repeat_bad = 0;
  for (int n = 0; n < 200; ++n) {
    const std::size_t len = 1 + gen() % 64, alpha = 1 + gen() % 4, min_len = 1 + gen() % 3;
    ActionSeq plan(len);
    for (auto& a : plan) a = static_cast<Action>(gen() % alpha);
    repeats::RepeatStore store({min_len, 0});
    for (std::size_t k = 1; k <= len; ++k) {
      store.update(std::span<const Action>(plan).first(k));
      std::map<ActionSeq, std::size_t> got;
      for (const auto& [seq, c] : store.candidates()) got[seq] = c.count;
      ++repeat_checks;
      repeat_bad += got != oracles::repeats(ActionSeq(plan.begin(), plan.begin() + static_cast<long>(k)), min_len);
    }
  }
  report("oracle_equivalence", score_bad == 0 && repeat_bad == 0 && score_checks > 0,
         fmt("score %zu/%zu exact, repeat store %zu/%zu exact", score_checks - score_bad, score_checks,
             repeat_checks - repeat_bad, repeat_checks));
}

void determinism() {
  std::size_t identical = 0, total = 0;
  const auto dir_a = std::filesystem::temp_directory_path() / "plots_det_a";
  const auto dir_b = std::filesystem::temp_directory_path() / "plots_det_b";
  std::vector<harness::RunConfig> cfgs;
  for (const auto& [env, agent, seed] : std::vector<std::tuple<std::string, std::string, std::uint64_t>>{
           {"chain", "bps", 7}, {"island", "plots_sketch", 3}, {"cpr", "plots_nosketch", 1},
           {"gem", "rmax_plus", 2}, {"gem", "ucb_plus", 2}, {"piano", "bpsosa", 4}}) {
    harness::RunConfig c;
    c.env = env;
    c.agent = agent;
    c.seed = seed;
    cfgs.push_back(c);
  }
  for (auto c : cfgs) {
    std::string bytes[2];
    for (int pass = 0; pass < 2; ++pass) {
      c.out = (pass == 0 ? dir_a : dir_b).string();
      harness::run(c);
      std::ifstream f(std::filesystem::path(c.out) / (c.run_name() + ".csv"), std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      bytes[pass] = ss.str();
    }
    ++total;
    identical += !bytes[0].empty() && bytes[0] == bytes[1];
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  report("determinism", identical == total, fmt("%zu/%zu configs byte-identical across two executions", identical, total));
}

}  // namespace

int main() {
  eq1_example();
  optimistic_example();
  branching_example();
  markov_bound();
  aliased_completeness();
  run_table_sweep();
  table_cpr();
  table_gem();
  table_island();
  table_piano();
  n1_sensitivity();
  pool_bounds();
  soundness();
  oracle_equivalence();
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
