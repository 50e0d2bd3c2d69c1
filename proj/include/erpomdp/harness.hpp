#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "erpomdp/estimation.hpp"
#include "erpomdp/model.hpp"
#include "erpomdp/solver.hpp"

namespace erpomdp {

enum class Direction : std::uint8_t { North = 0, South = 1, East = 2, West = 3 };

/// Grid actions; kStay is the last action index.
inline constexpr ActionIndex kMoveNorth = 0, kMoveSouth = 1, kMoveEast = 2, kMoveWest = 3, kStay = 4;
inline constexpr std::size_t kGridActions = 5;
inline constexpr std::size_t kGridObservations = 16;

Direction parse_direction(const std::string& s);
const char* direction_name(Direction d);

/// Maze with a wall sensor. Cells are numbered row-major from the top-left.
/// The outer boundary is always blocked; `walls` lists internal (cell, side)
/// edges, and either side of an edge blocks both ways.
struct GridSpec {
  std::size_t width = 12;
  std::size_t height = 12;
  std::vector<std::pair<std::size_t, Direction>> walls;
  std::size_t goal = 143;
  double false_wall_prob = 0.2;  ///< P(detect wall | no wall)
  double miss_prob = 0.0;        ///< P(no detection | wall)
};

struct GridParams {
  double discount = 0.99;
  double beta = 0.0;
  double lambda = 0.0;
};

/// Symmetric blocked-edge set of a spec, boundary included; index is
/// cell * 4 + direction.
std::vector<char> blocked_edges(const GridSpec& spec);

/// Observation bit d (d = N,S,E,W) set means "wall detected" on that side.
PomdpModel build_gridworld(const GridSpec& spec, const GridParams& params = {});

/// Geometric horizon with P(T = t) = g^t (1 - g).
std::size_t sample_horizon(double discount, Rng& rng);

struct EpisodeResult {
  TrajectoryRecord record;
  EntropyLedger ledger;
  double goal_cost = 0.0;  ///< sum_{k=0}^{T} c(x_k, u_k), undiscounted
  ActionIndex final_action = 0;
};

EpisodeResult run_episode(const PomdpModel& model, const AlphaPolicy& policy, std::size_t horizon, Rng& rng);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct EpisodeRow {
  std::size_t episode = 0;
  std::size_t horizon = 0;
  double goal_cost = 0.0;
  EntropyLedger ledger;
  bool map_error = false;
  std::vector<StateIndex> path;
};

struct CriteriaReport {
  std::size_t episodes = 0;
  Estimate goal_cost;
  Estimate io_entropy;
  Estimate smoother_entropy;
  Estimate joint_entropy;
  Estimate belief_entropy_sum;
  Estimate map_error_prob;
  Estimate solve_time_seconds;
  std::vector<EpisodeRow> rows;
};

/// Fixed horizon, or a fresh geometric draw per episode.
struct HorizonSpec {
  bool geometric = false;
  std::size_t fixed = 100;
};

/// Episode i draws from derived_rng(seed, i); aggregation runs in episode
/// order, so results do not depend on `threads`.
CriteriaReport monte_carlo(const PomdpModel& model, const AlphaPolicy& policy, std::size_t episodes,
                           HorizonSpec horizon, std::uint64_t seed, std::size_t threads = 1);

struct DiscountCheck {
  Estimate geometric;   ///< E_T[ G_T(pi_T) + sum_{k<T} G~(pi_k, u_k) ]
  Estimate discounted;  ///< E[ sum_{k<K} g^k G(pi_k, u_k) ]
  double truncation_bound = 0.0;
  double tolerance = 0.0;  ///< 3 sigma + truncation bound
  bool agree() const;
};

/// Upper bound on |G| over the simplex for this model.
double stage_cost_bound(const PomdpModel& model);

DiscountCheck geometric_discount_check(const PomdpModel& model, const AlphaPolicy& policy, std::size_t truncation,
                                       std::size_t episodes, std::uint64_t seed);

}  // namespace erpomdp
