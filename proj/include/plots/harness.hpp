#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "plots/baselines.hpp"
#include "plots/bps.hpp"
#include "plots/nosketch_agent.hpp"
#include "plots/sketch_agent.hpp"
#include "plots/tasks.hpp"

namespace plots::harness {

inline std::vector<std::string> agent_names() {
  return {"bps", "plots_sketch", "plots_nosketch", "bpsosa", "rmax_plus", "ucb_plus"};
}

struct RunConfig {
  std::string env = "chain";
  std::string agent = "bps";
  std::uint64_t seed = 0;
  std::size_t n_hypotheses = 4;
  std::size_t max_episodes = 30000;
  bool optimistic = true;
  bool early_reset = false;
  std::size_t min_repeat_len = 2;
  double ucb_exploration = 0.0;
  std::string out;  // directory for the run CSV; empty = none

  void validate() const {
    const auto envs = task_names();
    if (std::find(envs.begin(), envs.end(), env) == envs.end()) throw ConfigError("unknown environment '" + env + "'");
    const auto agents = agent_names();
    if (std::find(agents.begin(), agents.end(), agent) == agents.end()) {
      throw ConfigError("unknown agent '" + agent + "'");
    }
    if (max_episodes == 0) throw ConfigError("max_episodes must be >= 1");
    if (n_hypotheses == 0) throw ConfigError("n_hypotheses must be >= 1");
    if (min_repeat_len == 0) throw ConfigError("min_repeat_len must be >= 1");
  }

  std::string run_name() const {
    return env + "_" + agent + "_n" + std::to_string(n_hypotheses) + "_s" + std::to_string(seed);
  }
};

struct RunRecord {
  RunConfig config;
  std::size_t horizon = 0;
  std::vector<EpisodeStats> rows;
  bool complete = false;
  std::size_t episodes = 0;
  std::size_t total_steps = 0;
  std::size_t backtracks = 0;
  ActionSeq plan;
  std::string error;  // set when the run failed (sweeps keep going)
};

inline void write_csv(std::ostream& os, const RunRecord& rec) {
  os << "episode,steps,matched,backtracks,done\n";
  for (const auto& r : rec.rows) {
    os << r.episode << ',' << r.steps << ',' << r.matched << ',' << r.backtracks << ',' << (r.done ? 1 : 0) << '\n';
  }
}

inline std::vector<EpisodeStats> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "episode,steps,matched,backtracks,done") {
    throw ConfigError("not a run CSV");
  }
  std::vector<EpisodeStats> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    EpisodeStats r;
    char c1, c2, c3, c4;
    int done = 0;
    if (!(ss >> r.episode >> c1 >> r.steps >> c2 >> r.matched >> c3 >> r.backtracks >> c4 >> done)) {
      throw ConfigError("malformed CSV row: " + line);
    }
    r.done = done != 0;
    rows.push_back(r);
  }
  return rows;
}

/// One seeded learn run. Throws ConfigError for invalid configs; budget
/// exhaustion is reported through `complete == false`.
inline RunRecord run(const RunConfig& cfg) {
  cfg.validate();
  const auto task = make_task(cfg.env);
  auto [env, demo] = task.instantiate();
  RunRecord rec;
  rec.config = cfg;
  rec.horizon = demo.horizon();
  Rng rng(cfg.seed);
  LearnOptions opts;
  opts.max_episodes = cfg.max_episodes;
  opts.episode.early_reset = cfg.early_reset;
  auto on_episode = [&rec](const EpisodeStats& s) { rec.rows.push_back(s); };

  LearnReport report;
  if (cfg.agent == "bps") {
    UniformSuggester s;
    report = learn(*env, demo, s, rng, opts, on_episode);
  } else if (cfg.agent == "plots_sketch") {
    if (!task.sketch) throw ConfigError("environment '" + cfg.env + "' has no sketch");
    SketchSuggester s(*task.sketch, demo.horizon(), {cfg.n_hypotheses, cfg.optimistic, 1});
    report = learn(*env, demo, s, rng, opts, on_episode);
  } else if (cfg.agent == "plots_nosketch") {
    RepeatSuggester s({cfg.min_repeat_len, 0});
    report = learn(*env, demo, s, rng, opts, on_episode);
  } else if (cfg.agent == "bpsosa") {
    if (!task.sketch || !task.alignment) throw ConfigError("environment '" + cfg.env + "' has no oracle alignment");
    AlignmentSuggester s(*task.sketch, *task.alignment);
    report = learn(*env, demo, s, rng, opts, on_episode);
  } else if (cfg.agent == "rmax_plus") {
    report = rmax_learn(*env, demo, rng, opts, on_episode);
  } else {
    report = ucb_learn(*env, demo, rng, opts, on_episode, cfg.ucb_exploration);
  }
  rec.complete = report.complete;
  rec.episodes = report.episodes;
  rec.total_steps = report.total_steps;
  rec.backtracks = report.backtracks;
  rec.plan = std::move(report.plan);

  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    std::ofstream f(std::filesystem::path(cfg.out) / (cfg.run_name() + ".csv"));
    if (!f) throw ConfigError("cannot write to '" + cfg.out + "'");
    write_csv(f, rec);
  }
  return rec;
}

// ---- sweep ----

inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::istringstream ss(v);
  for (std::string part; std::getline(ss, part, ',');) {
    if (part.empty()) continue;
    try {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("empty seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seeds value '" + v + "'");
    }
  }
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream ss(v);
  for (std::string part; std::getline(ss, part, ',');) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

inline std::size_t parse_size(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const auto n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
}

struct SweepSpec {
  std::vector<RunConfig> configs;
  std::string out = "sweep_out";
  std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Blank-line separated blocks of `key=value` lines ('#' starts a comment).
/// `env`, `agent`, and `n_hypotheses` accept comma lists and `seeds` accepts
/// ranges like `0-9`; each block expands to the cross product. Top-level keys
/// `out` and `threads` may appear in any block.
inline SweepSpec parse_sweep_spec(std::istream& is) {
  SweepSpec spec;
  std::vector<std::map<std::string, std::string>> blocks(1);
  std::size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    if (key == "out") {
      spec.out = value;
    } else if (key == "threads") {
      spec.threads = parse_size(key, value);
    } else {
      blocks.back()[key] = value;
    }
  }
  for (const auto& b : blocks) {
    if (b.empty()) continue;
    RunConfig base;
    std::vector<std::string> envs, agents;
    std::vector<std::size_t> ns{base.n_hypotheses};
    std::vector<std::uint64_t> seeds{0};
    for (const auto& [k, v] : b) {
      if (k == "env") envs = split_list(v);
      else if (k == "agent") agents = split_list(v);
      else if (k == "seeds" || k == "seed") seeds = parse_seeds(v);
      else if (k == "n_hypotheses") {
        ns.clear();
        for (const auto& x : split_list(v)) ns.push_back(parse_size(k, x));
      }
      else if (k == "max_episodes") base.max_episodes = parse_size(k, v);
      else if (k == "optimistic") base.optimistic = parse_bool(k, v);
      else if (k == "early_reset") base.early_reset = parse_bool(k, v);
      else if (k == "min_repeat_len") base.min_repeat_len = parse_size(k, v);
      else if (k == "ucb_exploration") base.ucb_exploration = std::stod(v);
      else throw ConfigError("unknown sweep key '" + k + "'");
    }
    if (envs.empty() || agents.empty()) throw ConfigError("every sweep block needs env= and agent=");
    for (const auto& e : envs) {
      for (const auto& a : agents) {
        for (auto n : ns) {
          for (auto s : seeds) {
            RunConfig c = base;
            c.env = e;
            c.agent = a;
            c.n_hypotheses = n;
            c.seed = s;
            c.validate();
            spec.configs.push_back(c);
          }
        }
      }
    }
  }
  return spec;
}

struct SummaryRow {
  std::string env;
  std::string agent;
  std::size_t n_hypotheses = 0;
  std::size_t runs = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mean_episodes = 0;
  double stddev_episodes = 0;
  double mean_steps = 0;
};

/// Groups by (env, agent, n_hypotheses) in first-seen order. Episodes of
/// incomplete runs count at their budget; errored runs are excluded.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<const RunRecord*>> members;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
      return s.env == r.config.env && s.agent == r.config.agent && s.n_hypotheses == r.config.n_hypotheses;
    });
    if (it == rows.end()) {
      rows.push_back({r.config.env, r.config.agent, r.config.n_hypotheses});
      members.emplace_back();
      it = rows.end() - 1;
    }
    members[static_cast<std::size_t>(it - rows.begin())].push_back(&r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& s = rows[i];
    std::vector<double> eps;
    double steps = 0;
    for (const auto* r : members[i]) {
      ++s.runs;
      if (!r->error.empty()) {
        ++s.failed;
        continue;
      }
      if (r->complete) ++s.completed;
      eps.push_back(static_cast<double>(r->episodes));
      steps += static_cast<double>(r->total_steps);
    }
    if (eps.empty()) continue;
    const double n = static_cast<double>(eps.size());
    for (auto e : eps) s.mean_episodes += e / n;
    s.mean_steps = steps / n;
    if (eps.size() > 1) {
      double var = 0;
      for (auto e : eps) var += (e - s.mean_episodes) * (e - s.mean_episodes);
      s.stddev_episodes = std::sqrt(var / (n - 1));
    }
  }
  return rows;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "env,agent,n_hypotheses,runs,completed,failed,mean_episodes,stddev_episodes,mean_steps\n";
  os.setf(std::ios::fixed);
  os.precision(3);
  for (const auto& r : rows) {
    os << r.env << ',' << r.agent << ',' << r.n_hypotheses << ',' << r.runs << ',' << r.completed << ',' << r.failed
       << ',' << r.mean_episodes << ',' << r.stddev_episodes << ',' << r.mean_steps << '\n';
  }
}

/// Mean matched fraction per episode over a group of runs; a run that has
/// stopped holds its last value.
inline std::vector<double> mean_curve(const std::vector<const RunRecord*>& runs) {
  std::size_t len = 0;
  for (const auto* r : runs) len = std::max(len, r->rows.size());
  std::vector<double> curve(len, 0.0);
  if (runs.empty()) return curve;
  for (const auto* r : runs) {
    double last = 0;
    for (std::size_t k = 0; k < len; ++k) {
      if (k < r->rows.size()) last = static_cast<double>(r->rows[k].matched) / static_cast<double>(r->horizon);
      curve[k] += last / static_cast<double>(runs.size());
    }
  }
  return curve;
}

/// Learning curves for one environment: x = episode, y = matched fraction.
inline void write_curves_svg(std::ostream& os, const std::string& title,
                             const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                                            "#e377c2", "#7f7f7f"};
  const double w = 640, h = 400, ml = 60, mr = 170, mt = 30, mb = 45;
  std::size_t xmax = 1;
  for (const auto& [_, c] : series) xmax = std::max(xmax, c.size());
  const double pw = w - ml - mr, ph = h - mt - mb;
  auto px = [&](double x) { return ml + pw * x / static_cast<double>(xmax); };
  auto py = [&](double y) { return mt + ph * (1.0 - y); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << ml + pw << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << ml << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
    const auto xv = static_cast<std::size_t>(std::llround(static_cast<double>(xmax) * i / 4.0));
    os << "<text x=\"" << px(static_cast<double>(xv)) << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">" << xv
       << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\">episode</text>\n";
  os << "<text x=\"14\" y=\"" << mt + ph / 2 << "\" transform=\"rotate(-90 14 " << mt + ph / 2
     << ")\" text-anchor=\"middle\">matched fraction</text>\n";
  std::size_t idx = 0;
  for (const auto& [name, c] : series) {
    const char* color = palette[idx % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // Thin long curves to at most ~600 points.
    const std::size_t stride = std::max<std::size_t>(1, c.size() / 600);
    for (std::size_t k = 0; k < c.size(); k += stride) os << px(static_cast<double>(k + 1)) << ',' << py(c[k]) << ' ';
    if (!c.empty()) os << px(static_cast<double>(c.size())) << ',' << py(c.back());
    os << "\"/>\n";
    const double ly = mt + 16.0 * static_cast<double>(idx) + 10;
    os << "<line x1=\"" << w - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << w - mr + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << w - mr + 35 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
}

struct SweepResult {
  std::vector<RunRecord> records;  // in config order
  std::vector<SummaryRow> summary;
};

/// Runs every config (concurrently, `threads` workers), then writes
/// `<out>/runs/*.csv`, `<out>/summary.csv`, and `<out>/curves_<env>.svg`.
inline SweepResult sweep(std::vector<RunConfig> configs, const std::string& out, std::size_t threads = 0) {
  if (configs.empty()) throw ConfigError("sweep needs at least one config");
  for (const auto& c : configs) c.validate();
  const auto runs_dir = std::filesystem::path(out) / "runs";
  std::filesystem::create_directories(runs_dir);
  for (auto& c : configs) c.out = runs_dir.string();

  SweepResult result;
  result.records.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        result.records[i] = run(configs[i]);
      } catch (const std::exception& e) {
        result.records[i].config = configs[i];
        result.records[i].error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, configs.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.summary = summarize(result.records);
  {
    std::ofstream f(std::filesystem::path(out) / "summary.csv");
    write_summary_csv(f, result.summary);
  }
  std::map<std::string, std::vector<std::pair<std::string, std::vector<double>>>> by_env;
  for (const auto& s : result.summary) {
    std::vector<const RunRecord*> group;
    for (const auto& r : result.records) {
      if (r.error.empty() && r.config.env == s.env && r.config.agent == s.agent &&
          r.config.n_hypotheses == s.n_hypotheses) {
        group.push_back(&r);
      }
    }
    auto label = s.agent;
    if (s.agent == "plots_sketch") label += " N1=" + std::to_string(s.n_hypotheses);
    by_env[s.env].emplace_back(label, mean_curve(group));
  }
  for (const auto& [env, series] : by_env) {
    std::ofstream f(std::filesystem::path(out) / ("curves_" + env + ".svg"));
    write_curves_svg(f, env, series);
  }
  return result;
}

}  // namespace plots::harness
