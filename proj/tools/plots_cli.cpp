#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "plots/plots.hpp"

using namespace plots;

int main(int argc, char** argv) {
  CLI::App app{"Procedure learning from a single observation trajectory"};
  app.require_subcommand(1);

  harness::RunConfig rc;
  rc.max_episodes = 30000;
  auto* run_cmd = app.add_subcommand("run", "One seeded learn run; writes <out>/<run>.csv");
  run_cmd->add_option("--env", rc.env, "Environment name")->required();
  run_cmd->add_option("--agent", rc.agent, "Agent name")->required();
  run_cmd->add_option("--seed", rc.seed, "RNG seed")->required();
  run_cmd->add_option("--n-hypotheses", rc.n_hypotheses, "Active hypotheses (plots_sketch)");
  run_cmd->add_option("--max-episodes", rc.max_episodes, "Episode budget");
  run_cmd->add_option("--out", rc.out, "Output directory for the CSV (default: print to stdout)");
  run_cmd->add_flag("--early-reset", rc.early_reset, "End episodes at the first mismatch");
  run_cmd->add_option("--min-repeat-len", rc.min_repeat_len, "Shortest repeat tracked (plots_nosketch)");

  std::string spec_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Batch of runs from a spec file");
  sweep_cmd->add_option("--spec", spec_path, "Sweep spec file")->required()->check(CLI::ExistingFile);

  std::string demo_env, demo_out;
  auto* demo_cmd = app.add_subcommand("demo-gen", "Write an environment's demonstration file");
  demo_cmd->add_option("--env", demo_env, "Environment name")->required();
  demo_cmd->add_option("--out", demo_out, "Output file")->required();

  auto* list_cmd = app.add_subcommand("list", "List environments and agents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      const auto rec = harness::run(rc);
      if (rc.out.empty()) harness::write_csv(std::cout, rec);
      std::cerr << rc.run_name() << ": " << (rec.complete ? "complete" : "budget exhausted") << " after "
                << rec.episodes << " episodes, " << rec.total_steps << " steps, " << rec.backtracks << " backtracks\n";
      return 0;
    }
    if (*sweep_cmd) {
      std::ifstream f(spec_path);
      auto spec = harness::parse_sweep_spec(f);
      const auto res = harness::sweep(spec.configs, spec.out, spec.threads);
      harness::write_summary_csv(std::cout, res.summary);
      std::size_t errors = 0;
      for (const auto& r : res.records) {
        if (!r.error.empty()) {
          ++errors;
          std::cerr << r.config.run_name() << ": " << r.error << '\n';
        }
      }
      std::cerr << res.records.size() << " runs, " << errors << " errors, output in " << spec.out << '\n';
      return 0;
    }
    if (*demo_cmd) {
      const auto task = make_task(demo_env);
      auto [env, demo] = task.instantiate();
      std::ofstream f(demo_out);
      if (!f) throw ConfigError("cannot write '" + demo_out + "'");
      write_demonstration(f, demo, *env);
      return 0;
    }
    if (*list_cmd) {
      std::cout << "environments:";
      for (const auto& n : task_names()) std::cout << ' ' << n;
      std::cout << "\nagents:";
      for (const auto& n : harness::agent_names()) std::cout << ' ' << n;
      std::cout << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
