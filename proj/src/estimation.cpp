#include "erpomdp/estimation.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "erpomdp/entropy.hpp"
#include "erpomdp/errors.hpp"

namespace erpomdp {

namespace {

double safe_log2(double p) { return p > 0.0 ? std::log2(p) : -std::numeric_limits<double>::infinity(); }

double entropy_of(const std::map<std::vector<std::size_t>, double>& marginal) {
  double h = 0.0;
  for (const auto& [key, p] : marginal) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

struct Atom {
  std::vector<StateIndex> xs;
  std::vector<ObsIndex> ys;
  std::vector<ActionIndex> us;
  double p = 0.0;
};

void enumerate_info_states(const PomdpModel& model, std::size_t k, InfoState& current,
                           const std::function<void(const InfoState&)>& visit) {
  // current holds y^{j}, u^{j-1} for some j <= k; extend to y^k, u^{k-1}.
  if (current.observations.size() == k + 1) {
    visit(current);
    return;
  }
  if (current.observations.empty()) {
    for (std::size_t y = 0; y < model.num_obs; ++y) {
      current.observations.push_back(y);
      enumerate_info_states(model, k, current, visit);
      current.observations.pop_back();
    }
    return;
  }
  for (std::size_t u = 0; u < model.num_actions; ++u) {
    for (std::size_t y = 0; y < model.num_obs; ++y) {
      current.actions.push_back(u);
      current.observations.push_back(y);
      enumerate_info_states(model, k, current, visit);
      current.observations.pop_back();
      current.actions.pop_back();
    }
  }
}

}  // namespace

double log_path_likelihood(const PomdpModel& model, const std::vector<StateIndex>& xs,
                           const std::vector<ObsIndex>& ys, const std::vector<ActionIndex>& us) {
  double lp = safe_log2(model.prior[xs[0]]) + safe_log2(model.obs0(xs[0], ys[0]));
  for (std::size_t k = 0; k < us.size(); ++k) {
    lp += safe_log2(model.trans(us[k], xs[k], xs[k + 1])) + safe_log2(model.obs(us[k], xs[k + 1], ys[k + 1]));
  }
  return lp;
}

std::vector<StateIndex> viterbi_map(const PomdpModel& model, const std::vector<ObsIndex>& observations,
                                    const std::vector<ActionIndex>& actions) {
  if (observations.size() != actions.size() + 1) {
    throw DimensionMismatch("viterbi_map needs |observations| = |actions| + 1");
  }
  const std::size_t nx = model.num_states;
  const std::size_t T = actions.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<double> delta(nx), next(nx);
  std::vector<std::size_t> back((T + 1) * nx, 0);
  for (std::size_t x = 0; x < nx; ++x) delta[x] = safe_log2(model.prior[x]) + safe_log2(model.obs0(x, observations[0]));

  for (std::size_t k = 0; k < T; ++k) {
    const ActionIndex u = actions[k];
    for (std::size_t x = 0; x < nx; ++x) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t from = 0; from < nx; ++from) {
        const double s = delta[from] + safe_log2(model.trans(u, from, x));
        if (s > best) {
          best = s;
          arg = from;
        }
      }
      next[x] = best + safe_log2(model.obs(u, x, observations[k + 1]));
      back[(k + 1) * nx + x] = arg;
    }
    delta.swap(next);
  }

  double best = kNegInf;
  std::size_t last = 0;
  for (std::size_t x = 0; x < nx; ++x) {
    if (delta[x] > best) {
      best = delta[x];
      last = x;
    }
  }
  if (best == kNegInf) throw ZeroLikelihood("observation sequence has zero likelihood under the model");

  std::vector<StateIndex> path(T + 1);
  path[T] = last;
  for (std::size_t k = T; k > 0; --k) path[k - 1] = back[k * nx + path[k]];
  return path;
}

double initial_obs_entropy(const PomdpModel& model) { return entropy_bits(initial_obs_distribution(model)); }

EntropyLedger accumulate_ledger(const PomdpModel& model, const TrajectoryRecord& record) {
  const std::size_t T = record.actions.size();
  if (record.beliefs.size() != T + 1) throw DimensionMismatch("record must hold T+1 beliefs");
  EntropyLedger ledger;
  double smoother = 0.0, io = initial_obs_entropy(model), beliefs = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    smoother += smoother_increment(model, record.beliefs[k], record.actions[k]);
    io += obs_entropy_term(model, record.beliefs[k], record.actions[k]);
  }
  for (const auto& b : record.beliefs) beliefs += belief_entropy(b);
  smoother += belief_entropy(record.beliefs[T]);
  ledger.smoother_sum = smoother;
  ledger.io_sum = io;
  ledger.belief_entropy_sum = beliefs;
  ledger.joint_sum = smoother + io;
  return ledger;
}

PolicyTable PolicyTable::from_rule(const PomdpModel& model, std::size_t horizon,
                                   const std::function<std::vector<double>(const InfoState&)>& rule) {
  PolicyTable table;
  for (std::size_t k = 0; k < horizon; ++k) {
    InfoState current;
    enumerate_info_states(model, k, current, [&](const InfoState& s) { table.set(s, rule(s)); });
  }
  return table;
}

void PolicyTable::set(InfoState state, std::vector<double> pmf) {
  if (state.observations.size() != state.actions.size() + 1) {
    throw DimensionMismatch("information state needs |y| = |u| + 1");
  }
  double sum = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw ValidationError("policy probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("policy pmf does not sum to 1");
  entries_[std::move(state)] = std::move(pmf);
}

const std::vector<double>& PolicyTable::at(const InfoState& state) const {
  const auto it = entries_.find(state);
  if (it == entries_.end()) {
    throw ValidationError("policy table has no entry for an information state at time " +
                          std::to_string(state.actions.size()));
  }
  return it->second;
}

bool PolicyTable::is_deterministic() const {
  for (const auto& [state, pmf] : entries_) {
    int support = 0;
    for (double p : pmf) support += p > 0.0 ? 1 : 0;
    if (support != 1) return false;
  }
  return true;
}

PolicyTable random_policy_table(const PomdpModel& model, std::size_t horizon, bool deterministic, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<std::size_t> pick(0, model.num_actions - 1);
  return PolicyTable::from_rule(model, horizon, [&](const InfoState&) {
    std::vector<double> pmf(model.num_actions, 0.0);
    if (deterministic) {
      pmf[pick(rng)] = 1.0;
    } else {
      double sum = 0.0;
      for (double& p : pmf) {
        p = expo(rng);
        sum += p;
      }
      for (double& p : pmf) p /= sum;
    }
    return pmf;
  });
}

void check_enumeration_size(const PomdpModel& model, std::size_t horizon) {
  const double T = static_cast<double>(horizon);
  const double atoms = std::pow(static_cast<double>(model.num_states), T + 1) *
                       std::pow(static_cast<double>(model.num_obs), T + 1) *
                       std::pow(static_cast<double>(model.num_actions), T);
  if (atoms > static_cast<double>(kEnumerationGuard)) {
    throw TooLarge("enumeration needs " + std::to_string(atoms) + " atoms; guard is " +
                   std::to_string(kEnumerationGuard));
  }
}

ExactEntropies brute_force_entropies(const PomdpModel& model, const PolicyTable& policy, std::size_t horizon) {
  const std::size_t T = horizon;
  check_enumeration_size(model, T);

  // Enumerate the joint pmf of (x^T, y^T, u^{T-1}) step by step.
  std::vector<Atom> atoms_k;
  for (std::size_t x = 0; x < model.num_states; ++x) {
    for (std::size_t y = 0; y < model.num_obs; ++y) {
      const double p = model.prior[x] * model.obs0(x, y);
      if (p > 0.0) atoms_k.push_back({{x}, {y}, {}, p});
    }
  }
  for (std::size_t k = 0; k < T; ++k) {
    std::vector<Atom> next;
    for (const Atom& a : atoms_k) {
      const std::vector<double>& mu = policy.at(InfoState{a.ys, a.us});
      for (std::size_t u = 0; u < model.num_actions; ++u) {
        if (mu[u] <= 0.0) continue;
        for (std::size_t x = 0; x < model.num_states; ++x) {
          const double pa = model.trans(u, a.xs.back(), x);
          if (pa <= 0.0) continue;
          for (std::size_t y = 0; y < model.num_obs; ++y) {
            const double p = a.p * mu[u] * pa * model.obs(u, x, y);
            if (p <= 0.0) continue;
            Atom b = a;
            b.xs.push_back(x);
            b.ys.push_back(y);
            b.us.push_back(u);
            b.p = p;
            next.push_back(std::move(b));
          }
        }
      }
    }
    atoms_k.swap(next);
  }

  auto marginal = [&](std::size_t n_y, std::size_t n_u) {
    std::map<std::vector<std::size_t>, double> m;
    for (const Atom& a : atoms_k) {
      std::vector<std::size_t> key(a.ys.begin(), a.ys.begin() + static_cast<std::ptrdiff_t>(n_y));
      key.push_back(static_cast<std::size_t>(-1));
      key.insert(key.end(), a.us.begin(), a.us.begin() + static_cast<std::ptrdiff_t>(n_u));
      m[key] += a.p;
    }
    return m;
  };

  ExactEntropies out;
  for (const Atom& a : atoms_k) out.joint -= a.p * std::log2(a.p);
  out.io = entropy_of(marginal(T + 1, T));
  out.smoother = out.joint - out.io;

  // Causally conditioned entropies as telescoping differences of prefix entropies.
  double prev = 0.0;
  for (std::size_t k = 0; k <= T; ++k) {
    const double h_obs = entropy_of(marginal(k + 1, k));  // H(Y^k, U^{k-1})
    out.causal_obs += h_obs - prev;
    if (k < T) {
      const double h_ctrl = entropy_of(marginal(k + 1, k + 1));  // H(Y^k, U^k)
      out.causal_control += h_ctrl - h_obs;
      prev = h_ctrl;
    }
  }

  std::map<std::vector<std::size_t>, double> xy0;
  for (const Atom& a : atoms_k) {
    xy0[{a.xs[0], a.ys[0]}] += a.p;
    double c = 0.0;
    for (std::size_t k = 0; k < T; ++k) c += joint_stage_cost(model, a.xs[k], a.us[k]);
    out.expected_ctilde_sum += a.p * c;
  }
  out.initial_joint = entropy_of(xy0);
  out.initial_obs = entropy_of(marginal(1, 0));

  // Belief-form expectations over information trajectories.
  out.belief_io = out.initial_obs;
  for (const auto& [key, p] : marginal(T + 1, T)) {
    const std::vector<ObsIndex> ys(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(T + 1));
    const std::vector<ActionIndex> us(key.begin() + static_cast<std::ptrdiff_t>(T + 2), key.end());
    Belief b = initial_belief(model, ys[0]);
    double smoother = 0.0, io = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
      smoother += smoother_increment(model, b, us[k]);
      io += obs_entropy_term(model, b, us[k]);
      b = filter_update(model, b, us[k], ys[k + 1]);
    }
    smoother += belief_entropy(b);
    out.belief_smoother += p * smoother;
    out.belief_io += p * io;
  }
  return out;
}

}  // namespace erpomdp
