#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erpomdp/model.hpp"

namespace erpomdp {

/// Entropies are in bits throughout; 0 log 0 = 0.
double entropy_bits(std::span<const double> pmf);

/// Minimum coordinate a belief may have before entropy gradients are evaluated.
inline constexpr double kInteriorFloor = 1e-4;

/// Hyperplane <pi, weights> with the action it prescribes (value functions)
/// or belongs to (cost planes).
struct AlphaVector {
  std::vector<double> weights;
  ActionIndex action = 0;
  std::string tag;

  double dot(const Belief& b) const;
};

/// Per-action sets of cost hyperplanes; Ghat(pi,u) = min over planes[u].
using CostPlanes = std::vector<std::vector<AlphaVector>>;

struct PwlcApproximation {
  std::vector<Belief> base_points;
  CostPlanes planes;

  /// Ghat(pi, u).
  double evaluate(const Belief& b, ActionIndex u) const;
};

double belief_entropy(const Belief& belief);

/// H(X_k, X_{k+1} | .) - H(X_{k+1} | .) under the one-step prediction.
double smoother_increment(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// Entropy of the predictive observation pmf.
double obs_entropy_term(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// Entropy of the (next state, observation) pair given (x, u).
double joint_stage_cost(const PomdpModel& model, StateIndex x, ActionIndex u);

/// (1-g) c_T(x) + g c(x,u): the expected-cost part of both belief costs.
double expected_cost_weight(const PomdpModel& model, StateIndex x, ActionIndex u);

/// Nonlinear belief-MDP stage cost G(pi, u).
double stage_cost_G(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// Analytic gradient of G(., u). Throws BoundaryBelief when any coordinate is
/// below kInteriorFloor.
std::vector<double> grad_G(const PomdpModel& model, const Belief& belief, ActionIndex u);

/// Pulls every coordinate up to `floor` and renormalizes.
Belief clamp_to_interior(const Belief& belief, double floor = kInteriorFloor);

/// Tangent planes of G(., u) at each base point, for every action.
PwlcApproximation build_pwlc(const PomdpModel& model, const std::vector<Belief>& base_points);

/// Barycenter plus one near-vertex point per state (largest coordinate
/// 1 - 0.001 (N-1), others 0.001).
std::vector<Belief> default_base_points(std::size_t num_states);

/// `count` evenly spaced interior points on the 2-state simplex, strictly
/// between the vertices.
std::vector<Belief> even_base_points_2state(std::size_t count);

/// Exact linear cost vectors alpha^u[x] = l(x, u). Requires beta == lambda.
std::vector<AlphaVector> linear_cost_vectors(const PomdpModel& model);

/// One plane per action wrapped as CostPlanes.
CostPlanes linear_cost_planes(const PomdpModel& model);

/// Monte Carlo estimate of the covering radius max_pi min_xi ||pi - xi||_1
/// from `samples` uniform draws on the simplex.
double sparsity(const std::vector<Belief>& base_points, std::size_t samples, std::uint64_t seed);

/// Uniform draw from the simplex (flat Dirichlet).
Belief sample_simplex(std::size_t n, Rng& rng);

}  // namespace erpomdp
