#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "erpomdp/random.hpp"

namespace erpomdp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;
using ObsIndex = std::size_t;

/// Tolerance on row sums of every stochastic vector in a model.
inline constexpr double kRowSumTolerance = 1e-12;

/// A point on the probability simplex over states.
class Belief {
 public:
  Belief() = default;
  explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {}

  static Belief uniform(std::size_t n) { return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n))); }
  static Belief vertex(std::size_t n, StateIndex i) {
    std::vector<double> p(n, 0.0);
    p.at(i) = 1.0;
    return Belief(std::move(p));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  double& operator[](std::size_t i) { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vec() const { return probs_; }

  bool operator==(const Belief&) const = default;

 private:
  std::vector<double> probs_;
};

/// Tabular entropy-regularized POMDP.
///
/// Kernels are stored action-major as dense row-stochastic matrices:
///   transition          A[u][from][to]
///   observation         B[u][x][y]   (x is the state reached under u)
///   initial_observation B0[x][y]
///   stage_cost          c[x][u]
struct PomdpModel {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::size_t num_obs = 0;

  std::vector<double> transition;
  std::vector<double> observation;
  std::vector<double> initial_observation;
  std::vector<double> prior;
  std::vector<double> stage_cost;
  std::vector<double> terminal_cost;

  double discount = 0.9;
  double beta = 0.0;
  double lambda = 0.0;

  /// Allocates zero-filled tables of the right shape.
  static PomdpModel zeros(std::size_t num_states, std::size_t num_actions, std::size_t num_obs);

  double trans(ActionIndex u, StateIndex from, StateIndex to) const {
    return transition[(u * num_states + from) * num_states + to];
  }
  double& trans(ActionIndex u, StateIndex from, StateIndex to) {
    return transition[(u * num_states + from) * num_states + to];
  }
  std::span<const double> trans_row(ActionIndex u, StateIndex from) const {
    return {transition.data() + (u * num_states + from) * num_states, num_states};
  }

  double obs(ActionIndex u, StateIndex x, ObsIndex y) const {
    return observation[(u * num_states + x) * num_obs + y];
  }
  double& obs(ActionIndex u, StateIndex x, ObsIndex y) {
    return observation[(u * num_states + x) * num_obs + y];
  }
  std::span<const double> obs_row(ActionIndex u, StateIndex x) const {
    return {observation.data() + (u * num_states + x) * num_obs, num_obs};
  }

  double obs0(StateIndex x, ObsIndex y) const { return initial_observation[x * num_obs + y]; }
  double& obs0(StateIndex x, ObsIndex y) { return initial_observation[x * num_obs + y]; }

  double cost(StateIndex x, ActionIndex u) const { return stage_cost[x * num_actions + u]; }
  double& cost(StateIndex x, ActionIndex u) { return stage_cost[x * num_actions + u]; }
};

/// Realized trajectory of one episode: |observations| = T+1, |actions| = T,
/// |beliefs| = T+1, |states| = T+1.
struct TrajectoryRecord {
  std::vector<StateIndex> states;
  std::vector<ObsIndex> observations;
  std::vector<ActionIndex> actions;
  std::vector<Belief> beliefs;

  std::size_t horizon() const { return actions.size(); }
};

/// Throws ValidationError (or DimensionMismatch) unless every invariant holds.
void validate_model(const PomdpModel& model);

/// Rescales rows whose sums already lie within kRowSumTolerance of one.
void renormalize_rows(PomdpModel& model);

void validate_belief(const PomdpModel& model, const Belief& belief);

Belief initial_belief(const PomdpModel& model, ObsIndex y0);

/// Bayesian filter Pi(pi, u, y).
Belief filter_update(const PomdpModel& model, const Belief& belief, ActionIndex u, ObsIndex y);

/// One-step state prediction sum_xbar A[u][xbar][x] pi(xbar).
std::vector<double> predict_state(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// Joint pmf over (x_k, x_{k+1}); row-major [x_k][x_{k+1}].
std::vector<double> predict_joint(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// p(y_{k+1} | pi_k, u_k).
std::vector<double> obs_predictive(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// p(y_0) = sum_x rho(x) B0[x][y].
std::vector<double> initial_obs_distribution(const PomdpModel& model);

std::pair<StateIndex, ObsIndex> sample_step(const PomdpModel& model, StateIndex x, ActionIndex u, Rng& rng);

std::pair<StateIndex, ObsIndex> sample_initial(const PomdpModel& model, Rng& rng);

/// Checks the TrajectoryRecord length invariants and that each belief is the
/// filter recursion of its predecessor (max abs deviation `tol`).
void validate_record(const PomdpModel& model, const TrajectoryRecord& record, double tol = 1e-9);

}  // namespace erpomdp
