#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "plots/core.hpp"

namespace plots {

// ASCII map legend:
//   #  wall        ~  water (passable once a raft is built)
//   W  wood        G  gem
//   K  workshop    I  island (walkable)
//   @  agent start .  empty
//
// Actions: up, down, left, right, use. `use` tries the four neighbours in the
// order up, right, down, left and performs the first interaction that
// succeeds:
//   wood      -> +1 wood, cell becomes empty
//   gem       -> +1 gem, cell becomes empty (needs at least one plank)
//   workshop  -> raft from 3 planks if no raft yet, otherwise 1 wood -> 1 plank
// Moves into walls, objects, or water without a raft are no-ops.
class GridCraftEnv final : public Environment {
 public:
  enum Move : Action { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kUse = 4 };
  static constexpr std::size_t kNumActions = 5;

  struct Inventory {
    int wood = 0;
    int plank = 0;
    int raft = 0;
    int gem = 0;
    friend bool operator==(const Inventory&, const Inventory&) = default;
  };

  struct Pos {
    int row = 0;
    int col = 0;
    friend bool operator==(const Pos&, const Pos&) = default;
  };

  /// Parses a rectangular map. Throws ContractError for ragged rows, unknown
  /// glyphs, or anything other than exactly one '@'.
  static GridCraftEnv load_grid_map(std::string_view text, std::string env_name = "gridcraft") {
    std::vector<std::string> rows;
    std::string cur;
    for (char c : text) {
      if (c == '\r') continue;
      if (c == '\n') {
        if (!cur.empty()) rows.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) rows.push_back(cur);
    if (rows.empty()) throw ContractError("empty map");
    const auto width = rows.front().size();
    int agents = 0;
    Pos start;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != width) throw ContractError("map is not rectangular");
      for (std::size_t c = 0; c < width; ++c) {
        const char g = rows[r][c];
        if (g == '@') {
          ++agents;
          start = Pos{static_cast<int>(r), static_cast<int>(c)};
          rows[r][c] = '.';
        } else if (std::string_view("#~WGKI.").find(g) == std::string_view::npos) {
          throw ContractError(std::string("unknown map glyph '") + g + "'");
        }
      }
    }
    if (agents != 1) throw ContractError("map must contain exactly one agent cell, found " + std::to_string(agents));
    return GridCraftEnv(std::move(rows), start, std::move(env_name));
  }

  std::string_view name() const override { return name_; }
  std::size_t num_actions() const override { return kNumActions; }
  std::string action_name(Action a) const override {
    static constexpr std::array<const char*, kNumActions> names{"up", "down", "left", "right", "use"};
    return a < kNumActions ? names[a] : "?";
  }

  const Inventory& inventory() const { return inv_; }
  Pos agent_pos() const { return pos_; }
  char cell(int row, int col) const { return grid_[row][col]; }

  std::string describe_state() const override { return serialize(); }

 protected:
  std::string do_reset() override {
    grid_ = initial_;
    pos_ = start_;
    inv_ = {};
    return serialize();
  }

  std::string do_step(Action a) override {
    switch (a) {
      case kUp: try_move(-1, 0); break;
      case kDown: try_move(1, 0); break;
      case kLeft: try_move(0, -1); break;
      case kRight: try_move(0, 1); break;
      default: use(); break;
    }
    return serialize();
  }

 private:
  GridCraftEnv(std::vector<std::string> grid, Pos start, std::string env_name)
      : initial_(grid), grid_(std::move(grid)), start_(start), pos_(start), name_(std::move(env_name)) {}

  bool in_bounds(int r, int c) const {
    return r >= 0 && c >= 0 && r < static_cast<int>(grid_.size()) && c < static_cast<int>(grid_[0].size());
  }

  void try_move(int dr, int dc) {
    const int r = pos_.row + dr;
    const int c = pos_.col + dc;
    if (!in_bounds(r, c)) return;
    const char g = grid_[r][c];
    if (g == '.' || g == 'I' || (g == '~' && inv_.raft > 0)) pos_ = Pos{r, c};
  }

  bool interact(int r, int c) {
    if (!in_bounds(r, c)) return false;
    char& g = grid_[r][c];
    switch (g) {
      case 'W':
        ++inv_.wood;
        g = '.';
        return true;
      case 'G':
        if (inv_.plank < 1) return false;
        ++inv_.gem;
        g = '.';
        return true;
      case 'K':
        if (inv_.raft == 0 && inv_.plank >= 3) {
          inv_.plank -= 3;
          inv_.raft = 1;
          return true;
        }
        if (inv_.wood >= 1) {
          --inv_.wood;
          ++inv_.plank;
          return true;
        }
        return false;
      default:
        return false;
    }
  }

  void use() {
    static constexpr std::array<std::array<int, 2>, 4> order{{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};
    for (const auto& d : order) {
      if (interact(pos_.row + d[0], pos_.col + d[1])) return;
    }
  }

  // Bijective encoding of (grid, inventory, position).
  std::string serialize() const {
    std::string s;
    s.reserve(grid_.size() * (grid_[0].size() + 1) + 48);
    for (const auto& row : grid_) {
      s += row;
      s += '/';
    }
    s += "w" + std::to_string(inv_.wood) + "p" + std::to_string(inv_.plank) + "r" + std::to_string(inv_.raft) +
         "g" + std::to_string(inv_.gem) + "@" + std::to_string(pos_.row) + "," + std::to_string(pos_.col);
    return s;
  }

  std::vector<std::string> initial_;
  std::vector<std::string> grid_;
  Pos start_;
  Pos pos_;
  Inventory inv_;
  std::string name_;
};

namespace maps {

/// Collect three wood, turn it into planks, build a raft, cross to the island.
inline constexpr std::string_view kIsland =
    "###################\n"
    "#.................#\n"
    "#.K...............#\n"
    "#........~~~~~~~~~#\n"
    "#.....@..~~~~~~~~~#\n"
    "#........~~~~~~~~~#\n"
    "#.W......~~~~~~~~~#\n"
    "#W.......~~~~~~~~~#\n"
    "#.W......~~~~~~~~~#\n"
    "#........~~~~~~~~~#\n"
    "#........~~~~~~~~~#\n"
    "#........~~~~~~~~~#\n"
    "#........~IIIIIIII#\n"
    "#........~IIIIIIII#\n"
    "###################\n";

/// Single pass wood -> plank -> gem; no subtask repeats.
inline constexpr std::string_view kGem =
    "##########\n"
    "#@.......#\n"
    "#.....W..#\n"
    "#........#\n"
    "#K.......#\n"
    "#........#\n"
    "#......G.#\n"
    "##########\n";

}  // namespace maps

}  // namespace plots
