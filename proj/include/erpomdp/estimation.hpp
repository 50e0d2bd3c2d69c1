#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "erpomdp/model.hpp"

namespace erpomdp {

/// Per-episode sample-path accumulation of the belief-form entropy terms (bits).
struct EntropyLedger {
  double smoother_sum = 0.0;        ///< G1(pi_T) + sum_{k<T} G2(pi_k, u_k)
  double io_sum = 0.0;              ///< H(Y_0) + sum_{k<T} G3(pi_k, u_k)
  double belief_entropy_sum = 0.0;  ///< sum_{k<=T} G1(pi_k)
  double joint_sum = 0.0;           ///< smoother_sum + io_sum
};

/// Most probable state trajectory given observations and actions.
/// Ties resolve to the lowest state index.
std::vector<StateIndex> viterbi_map(const PomdpModel& model, const std::vector<ObsIndex>& observations,
                                    const std::vector<ActionIndex>& actions);

/// log2 p(x^T, y^T | u^{T-1}) with the policy factors omitted; -inf when impossible.
double log_path_likelihood(const PomdpModel& model, const std::vector<StateIndex>& states,
                           const std::vector<ObsIndex>& observations, const std::vector<ActionIndex>& actions);

/// H(Y_0).
double initial_obs_entropy(const PomdpModel& model);

EntropyLedger accumulate_ledger(const PomdpModel& model, const TrajectoryRecord& record);

/// Information state i_k = (y^k, u^{k-1}).
struct InfoState {
  std::vector<ObsIndex> observations;
  std::vector<ActionIndex> actions;

  auto operator<=>(const InfoState&) const = default;
};

/// Explicit (possibly stochastic) output-feedback policy mu_k^{i_k}.
class PolicyTable {
 public:
  PolicyTable() = default;

  /// Builds the table by evaluating `rule` on every information state of
  /// length k = 0..horizon-1.
  static PolicyTable from_rule(const PomdpModel& model, std::size_t horizon,
                               const std::function<std::vector<double>(const InfoState&)>& rule);

  void set(InfoState state, std::vector<double> pmf);
  /// Throws ValidationError when the information state has no entry.
  const std::vector<double>& at(const InfoState& state) const;
  bool is_deterministic() const;
  const std::map<InfoState, std::vector<double>>& entries() const { return entries_; }

 private:
  std::map<InfoState, std::vector<double>> entries_;
};

/// Random stochastic (or deterministic) policy table for small instances.
PolicyTable random_policy_table(const PomdpModel& model, std::size_t horizon, bool deterministic, Rng& rng);

inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

/// Exact trajectory entropies by enumerating the joint pmf, plus the belief-form
/// right-hand sides of the decompositions they satisfy.
struct ExactEntropies {
  double smoother = 0.0;        ///< H(X^T | Y^T, U^{T-1})
  double io = 0.0;              ///< H(Y^T, U^{T-1})
  double joint = 0.0;           ///< H(X^T, Y^T, U^{T-1})
  double causal_obs = 0.0;      ///< H(Y^T || U^{T-1})
  double causal_control = 0.0;  ///< H(U^{T-1} || Y^{T-1})

  double initial_joint = 0.0;        ///< H(X_0, Y_0)
  double initial_obs = 0.0;          ///< H(Y_0)
  double expected_ctilde_sum = 0.0;  ///< E[sum_{k<T} c~(X_k, U_k)]
  double belief_smoother = 0.0;      ///< E[G1(pi_T) + sum G2(pi_k, U_k)]
  double belief_io = 0.0;            ///< H(Y_0) + E[sum G3(pi_k, U_k)]

  /// io - (causal_obs + causal_control)
  double causal_split_residual() const { return io - (causal_obs + causal_control); }
  /// joint - (H(X0,Y0) + causal_control + E sum c~)
  double joint_decomposition_residual() const {
    return joint - (initial_joint + causal_control + expected_ctilde_sum);
  }
  double smoother_belief_residual() const { return smoother - belief_smoother; }
  double causal_obs_belief_residual() const { return causal_obs - belief_io; }
};

/// Throws TooLarge when N_x^{T+1} N_y^{T+1} N_u^T exceeds kEnumerationGuard.
void check_enumeration_size(const PomdpModel& model, std::size_t horizon);

/// Calls check_enumeration_size first.
ExactEntropies brute_force_entropies(const PomdpModel& model, const PolicyTable& policy, std::size_t horizon);

}  // namespace erpomdp
