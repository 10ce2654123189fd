#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "plots/tasks.hpp"

using namespace plots;
using G = GridCraftEnv;

namespace {

std::vector<std::string> names_of(Environment& env, const ActionSeq& plan) {
  std::vector<std::string> out;
  for (auto o : replay(env, plan)) out.push_back(env.tokens().name(o));
  return out;
}

G tiny(std::string_view map) { return G::load_grid_map(map); }

}  // namespace

TEST(ScriptedEnv, ChainTokens) {
  auto env = make_chain_env();
  EXPECT_EQ(names_of(env, {0, 1, 0}), (std::vector<std::string>{"S1", "S2", "S3"}));
  EXPECT_EQ(names_of(env, {0, 0, 0}), (std::vector<std::string>{"S1", "OFF", "OFF"}));
}

TEST(ScriptedEnv, MarkovChainHasDistinctPrefixTokens) {
  auto env = make_markov_chain(5, 20, 3);
  auto toks = names_of(env, env.script());
  EXPECT_EQ(std::set<std::string>(toks.begin(), toks.end()).size(), 20u);
}

TEST(ScriptedEnv, AliasedChainCollidesOffScript) {
  // Some wrong first action must reproduce the demonstrated token somewhere.
  std::size_t collisions = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto env = make_aliased_chain(3, 6, 2, seed);
    auto demo = record_demonstration(env, env.script());
    for (Action a = 0; a < 3; ++a) {
      if (a == env.script()[0]) continue;
      env.reset();
      collisions += env.step(a) == demo.observations[0];
    }
  }
  EXPECT_GT(collisions, 0u);
}

TEST(ScriptedEnv, RejectsBadScripts) {
  EXPECT_THROW(ScriptedEnv(2, {}), ContractError);
  EXPECT_THROW(ScriptedEnv(2, {0, 2}), ContractError);
  EXPECT_THROW(ScriptedEnv(0, {0}), ContractError);
}

TEST(GridCraft, MapValidation) {
  EXPECT_THROW(tiny("###\n#@#\n##\n"), ContractError);
  EXPECT_THROW(tiny("###\n#.#\n###\n"), ContractError);
  EXPECT_THROW(tiny("####\n#@@#\n####\n"), ContractError);
  EXPECT_THROW(tiny("###\n#@x\n###\n"), ContractError);
  EXPECT_THROW(tiny(""), ContractError);
  EXPECT_NO_THROW(tiny("###\n#@#\n###\n"));
}

TEST(GridCraft, WallsAndWaterBlockMovement) {
  auto env = tiny("#####\n#@~.#\n#####\n");
  env.reset();
  env.step(G::kUp);
  env.step(G::kLeft);
  env.step(G::kRight);
  EXPECT_EQ(env.agent_pos(), (G::Pos{1, 1}));
}

TEST(GridCraft, WoodPlankRaftGem) {
  auto env = tiny("######\n#W@K.#\n#~.G.#\n######\n");
  env.reset();
  env.step(G::kUse);  // right neighbour is K, nothing to craft; left has wood
  EXPECT_EQ(env.inventory().wood, 1);
  EXPECT_EQ(env.cell(1, 1), '.');
  env.step(G::kUse);  // K turns wood into a plank
  EXPECT_EQ(env.inventory(), (G::Inventory{0, 1, 0, 0}));
  env.step(G::kDown);
  env.step(G::kUse);  // gem on the right, plank in hand
  EXPECT_EQ(env.inventory().gem, 1);
  env.step(G::kLeft);  // water without raft
  EXPECT_EQ(env.agent_pos(), (G::Pos{2, 2}));
}

TEST(GridCraft, GemNeedsPlank) {
  auto env = tiny("####\n#@G#\n####\n");
  env.reset();
  env.step(G::kUse);
  EXPECT_EQ(env.inventory().gem, 0);
  EXPECT_EQ(env.cell(1, 2), 'G');
}

TEST(Tasks, IslandSolutionReachesIsland) {
  const auto task = make_task("island");
  EXPECT_EQ(task.horizon(), 67u);
  EXPECT_EQ(task.sketch->length(), 16u);
  EXPECT_EQ(task.sketch->num_labels(), 9u);
  auto env = G::load_grid_map(maps::kIsland);
  replay(env, task.solution);
  EXPECT_EQ(env.inventory().raft, 1);
  EXPECT_EQ(env.cell(env.agent_pos().row, env.agent_pos().col), 'I');
}

TEST(Tasks, GemSolutionMinesGem) {
  const auto task = make_task("gem");
  EXPECT_EQ(task.horizon(), 21u);
  auto env = G::load_grid_map(maps::kGem);
  replay(env, task.solution);
  EXPECT_EQ(env.inventory().gem, 1);
}

TEST(Tasks, CprShape) {
  const auto task = make_task("cpr");
  EXPECT_EQ(task.horizon(), 197u);
  EXPECT_EQ(task.sketch->length(), 6u);
  EXPECT_EQ(task.sketch->num_labels(), 2u);
  EXPECT_EQ(cpr::compression_cycle().size(), 37u);
  EXPECT_EQ(cpr::assess_block().size(), 12u);
  EXPECT_THROW(cpr::id("dance"), ContractError);
}

TEST(Tasks, PianoShape) {
  const auto score = piano_score();
  EXPECT_EQ(score.tokens.size(), 86u);
  EXPECT_EQ(score.note_count(), 64u);
  EXPECT_EQ(score.sketch->length(), 24u);
  EXPECT_EQ(score.sketch->num_labels(), 5u);
  std::stringstream ss;
  write_piano_score(ss, score);
  const auto back = read_piano_score(ss);
  EXPECT_EQ(back.tokens, score.tokens);
  EXPECT_EQ(back.sketch->elements, score.sketch->elements);
}

TEST(Tasks, AlignmentMatchesSketch) {
  for (const auto& name : {"island", "gem", "cpr", "piano"}) {
    const auto task = make_task(name);
    ASSERT_TRUE(task.alignment);
    EXPECT_EQ(task.alignment->segments.size(), task.sketch->length());
    EXPECT_NO_THROW(task.alignment->validate(task.horizon()));
  }
  EXPECT_THROW(make_task("moon"), ConfigError);
}

TEST(Tasks, ComposeRejectsInconsistentLabels) {
  auto mk = [] { return std::make_unique<ScriptedEnv>(make_chain_env()); };
  EXPECT_THROW(compose_task("x", mk, {{"a", {0}}, {"a", {1}}}), ContractError);
  EXPECT_THROW(compose_task("x", mk, {{"a", {}}}), ContractError);
}

TEST(Piano, FingerMapping) {
  PianoEnv env;
  env.reset();
  EXPECT_EQ(env.tokens().name(env.step(PianoEnv::kFinger1)), "C4");
  EXPECT_EQ(env.tokens().name(env.step(PianoEnv::kFinger3)), "E4");
  EXPECT_EQ(env.tokens().name(env.step(PianoEnv::kFinger5)), "G4");
  EXPECT_EQ(env.tokens().name(env.step(PianoEnv::kThumbDown)), "silence");
  EXPECT_EQ(env.tokens().name(env.step(PianoEnv::kFinger1)), "B3");
}

TEST(Piano, HandPositionsAlias) {
  PianoEnv a, b;
  a.reset();
  b.reset();
  a.set_hand(14, -1);
  b.set_hand(13, 0);
  EXPECT_EQ(a.tokens().name(a.step(PianoEnv::kFinger1)), b.tokens().name(b.step(PianoEnv::kFinger1)));
  EXPECT_NE(a.tokens().name(a.step(PianoEnv::kFinger2)), b.tokens().name(b.step(PianoEnv::kFinger2)));
  EXPECT_THROW(a.set_hand(2, 0), ContractError);
  EXPECT_THROW(a.set_hand(10, 1), ContractError);
}

TEST(Piano, HandClampsAtLimits) {
  PianoEnv env;
  env.reset();
  for (int i = 0; i < 40; ++i) env.step(PianoEnv::kWristUp);
  EXPECT_EQ(env.wrist(), PianoEnv::kMaxWrist);
  for (int i = 0; i < 10; ++i) env.step(PianoEnv::kThumbDown);
  EXPECT_EQ(env.thumb_offset(), PianoEnv::kMinThumb);
  EXPECT_EQ(env.tokens().name(env.step(PianoEnv::kFinger5)), PianoEnv::note_name(PianoEnv::kNumKeys - 1));
}

// Same action sequence on two fresh instances and twice on one instance
// gives identical token names.
TEST(Determinism, RandomSequencesPerEnv) {
  for (const auto& name : task_names()) {
    const auto task = make_task(name);
    auto a = task.make_env();
    auto b = task.make_env();
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<Action> pick(0, static_cast<Action>(a->num_actions() - 1));
    for (int k = 0; k < 1000; ++k) {
      ActionSeq seq(task.horizon());
      for (auto& x : seq) x = pick(rng);
      const auto first = names_of(*a, seq);
      ASSERT_EQ(first, names_of(*b, seq)) << name;
      ASSERT_EQ(first, names_of(*a, seq)) << name;
    }
  }
}
