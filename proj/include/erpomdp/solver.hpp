#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "erpomdp/entropy.hpp"
#include "erpomdp/model.hpp"

namespace erpomdp {

/// Starting value function for point-based iteration.
///   UpperBound: the constant C/(1-g) with C bounding every stage cost from
///     above; a belief keeps its previous vector when the new backup is not
///     lower, so values on the belief set are nonincreasing and converge.
///   Zero: plain point-based iteration from the zero vector.
enum class ValueInit { UpperBound, Zero };

struct SolverConfig {
  std::size_t belief_set_size = 500;
  std::size_t expansion_rounds = 3;
  double bellman_residual_tol = 1e-6;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 0;
  /// Probability of a uniformly random action during policy-guided expansion.
  double explore_epsilon = 0.25;
  /// Longest simulated belief trajectory during expansion.
  std::size_t max_depth = 100;
  /// Consecutive trajectories without a new belief before expansion stops.
  std::size_t stall_limit = 50;
  std::size_t threads = 1;
  /// Add every simplex vertex to the belief set before expansion.
  bool vertex_beliefs = true;
  ValueInit init = ValueInit::UpperBound;

  void validate() const;
};

/// Alpha-vector value function V(pi) = min_i <pi, alpha_i>; the minimizing
/// vector's action is the policy.
struct AlphaPolicy {
  std::vector<AlphaVector> vectors;
  SolverConfig config;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  /// Constant subtracted from every cost plane during solving (added back).
  double cost_shift = 0.0;
  std::size_t belief_count = 0;

  std::size_t num_states() const { return vectors.empty() ? 0 : vectors.front().weights.size(); }
  double value(const Belief& b) const;
};

/// Lowest-index action among the vectors attaining the minimum.
ActionIndex policy_action(const AlphaPolicy& policy, const Belief& belief);

/// Initial beliefs pi_0 for every y_0 with p(y_0) > 0.
std::vector<Belief> initial_beliefs(const PomdpModel& model);

/// Reachable-belief sampling. Without a guide, actions are uniform; with one,
/// actions follow the guide except with probability explore_epsilon.
/// Returns seeds plus new beliefs (L1-deduplicated at 1e-9), at most
/// max(belief_set_size, |seeds|) entries.
std::vector<Belief> expand_beliefs(const PomdpModel& model, const std::vector<Belief>& seeds,
                                   const SolverConfig& config, const AlphaPolicy* guide = nullptr);

/// Point-based Bellman backup at `belief` against the value vectors.
AlphaVector bellman_backup(const PomdpModel& model, const CostPlanes& cost_planes,
                           const std::vector<AlphaVector>& value, const Belief& belief);

/// Exact right-hand side min_u { Ghat(b,u) + g sum_y p(y|b,u) V(Pi(b,u,y)) }
/// computed through the filter, for checking backups.
double bellman_rhs(const PomdpModel& model, const CostPlanes& cost_planes, const std::vector<AlphaVector>& value,
                   const Belief& belief);

/// Diagnostics emitted after every value-iteration sweep.
struct SweepInfo {
  std::size_t round = 0;
  std::size_t iteration = 0;
  double residual = 0.0;
  std::size_t vector_count = 0;
  std::size_t belief_count = 0;
};
using SweepObserver = std::function<void(const SweepInfo&, const std::vector<Belief>&, const AlphaPolicy&)>;

/// Point-based value iteration with alternating belief expansion rounds.
AlphaPolicy solve(const PomdpModel& model, const CostPlanes& cost_planes, const SolverConfig& config,
                  const SweepObserver& observer = {});

/// Value iteration restricted to a fixed belief set.
AlphaPolicy solve_on_beliefs(const PomdpModel& model, const CostPlanes& cost_planes,
                             const std::vector<Belief>& beliefs, const SolverConfig& config,
                             const SweepObserver& observer = {});

}  // namespace erpomdp
