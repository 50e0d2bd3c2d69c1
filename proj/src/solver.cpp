#include "erpomdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "erpomdp/errors.hpp"

namespace erpomdp {

namespace {

constexpr double kDedupL1 = 1e-9;

/// Flat row-major set of hyperplanes.
struct PlaneSet {
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<ActionIndex> actions;

  std::vector<double> columns;  // state-major copy of weights, see index()
  std::vector<std::uint64_t> ids;  // identity of each vector across sweeps

  std::size_t size() const { return actions.size(); }
  const double* row(std::size_t i) const { return weights.data() + i * dim; }
  void index() {
    const std::size_t n = size();
    columns.resize(weights.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t x = 0; x < dim; ++x) columns[x * n + i] = weights[i * dim + x];
    }
  }
};

PlaneSet flatten(const std::vector<AlphaVector>& vectors, std::size_t dim, double offset = 0.0) {
  PlaneSet set;
  set.dim = dim;
  set.weights.reserve(vectors.size() * dim);
  for (const auto& v : vectors) {
    if (v.weights.size() != dim) throw DimensionMismatch("alpha vector length does not match the model");
    for (double w : v.weights) set.weights.push_back(w + offset);
    set.actions.push_back(v.action);
  }
  return set;
}

/// Sparse view of a belief and of every unnormalized successor
/// tau_{u,y}(x') = B[u][x'][y] sum_x A[u][x][x'] b(x).
struct BeliefCache {
  std::vector<std::uint32_t> support;
  std::vector<double> mass;
  std::vector<std::uint32_t> tau_offsets;  // (nu * ny + 1) offsets into tau_idx / tau_val
  std::vector<std::uint32_t> tau_idx;
  std::vector<double> tau_val;
};

BeliefCache make_cache(const PomdpModel& model, const Belief& b) {
  const std::size_t nx = model.num_states, nu = model.num_actions, ny = model.num_obs;
  BeliefCache c;
  for (std::size_t x = 0; x < nx; ++x) {
    if (b[x] > 0.0) {
      c.support.push_back(static_cast<std::uint32_t>(x));
      c.mass.push_back(b[x]);
    }
  }
  c.tau_offsets.reserve(nu * ny + 1);
  std::vector<double> pred(nx);
  std::vector<std::uint32_t> pred_support;
  for (std::size_t u = 0; u < nu; ++u) {
    std::fill(pred.begin(), pred.end(), 0.0);
    for (std::size_t k = 0; k < c.support.size(); ++k) {
      const auto row = model.trans_row(u, c.support[k]);
      const double w = c.mass[k];
      for (std::size_t to = 0; to < nx; ++to) pred[to] += w * row[to];
    }
    pred_support.clear();
    for (std::size_t to = 0; to < nx; ++to) {
      if (pred[to] > 0.0) pred_support.push_back(static_cast<std::uint32_t>(to));
    }
    for (std::size_t y = 0; y < ny; ++y) {
      c.tau_offsets.push_back(static_cast<std::uint32_t>(c.tau_idx.size()));
      for (std::uint32_t to : pred_support) {
        const double v = pred[to] * model.obs(u, to, y);
        if (v > 0.0) {
          c.tau_idx.push_back(to);
          c.tau_val.push_back(v);
        }
      }
    }
  }
  c.tau_offsets.push_back(static_cast<std::uint32_t>(c.tau_idx.size()));
  return c;
}

double sparse_dot(const std::uint32_t* idx, const double* val, std::size_t n, const double* row) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += val[k] * row[idx[k]];
  return s;
}

/// Returns (value, index) of the plane minimizing the sparse inner product;
/// lowest index on ties. Empty sparse vectors select index 0 with value 0.
std::pair<double, std::size_t> sparse_argmin(const PlaneSet& set, const std::uint32_t* idx, const double* val,
                                             std::size_t n) {
  if (n == 0) return {0.0, 0};
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  if (set.columns.size() == set.weights.size()) {
    const std::size_t m = set.size();
    thread_local std::vector<double> acc;
    acc.assign(m, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double* col = set.columns.data() + idx[k] * m;
      const double v = val[k];
      for (std::size_t i = 0; i < m; ++i) acc[i] += v * col[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (acc[i] < best) {
        best = acc[i];
        arg = i;
      }
    }
    return {best, arg};
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double s = sparse_dot(idx, val, n, set.row(i));
    if (s < best) {
      best = s;
      arg = i;
    }
  }
  return {best, arg};
}

/// Backup choice: [action, cost plane, alpha_y for each y], or
/// [kKeepOld, index] to carry a previous vector forward.
using BackupKey = std::vector<std::uint32_t>;
constexpr std::uint32_t kKeepOld = std::numeric_limits<std::uint32_t>::max();

struct BackupChoice {
  BackupKey key;
  double value = 0.0;
};

BackupChoice choose_backup(const PomdpModel& model, const std::vector<PlaneSet>& costs, const PlaneSet& value,
                           const BeliefCache& c) {
  const std::size_t nu = model.num_actions, ny = model.num_obs;
  const double g = model.discount;
  BackupChoice best;
  best.value = std::numeric_limits<double>::infinity();
  BackupKey key(2 + ny);
  for (std::size_t u = 0; u < nu; ++u) {
    const auto [cost, plane] = sparse_argmin(costs[u], c.support.data(), c.mass.data(), c.support.size());
    double total = cost;
    key[0] = static_cast<std::uint32_t>(u);
    key[1] = static_cast<std::uint32_t>(plane);
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t lo = c.tau_offsets[u * ny + y], hi = c.tau_offsets[u * ny + y + 1];
      const auto [v, arg] = sparse_argmin(value, c.tau_idx.data() + lo, c.tau_val.data() + lo, hi - lo);
      total += g * v;
      key[2 + y] = static_cast<std::uint32_t>(arg);
    }
    if (total < best.value) {
      best.value = total;
      best.key = key;
    }
  }
  return best;
}

constexpr std::uint64_t kNoId = std::numeric_limits<std::uint64_t>::max();

/// Minimizers found at one belief in the previous sweep. Vectors carried over
/// unchanged keep their id and inner products, so while the previous minimizer
/// survives only the vectors created since need to be scanned.
struct Memo {
  std::vector<std::uint32_t> plane;  // per action
  std::vector<double> cost;
  std::vector<std::uint64_t> id;  // per (action, observation)
  std::vector<double> value;
};

/// Vectors created in the last sweep and their positions in the full set.
struct Fresh {
  PlaneSet set;
  std::vector<std::uint32_t> position;
  std::unordered_map<std::uint64_t, std::uint32_t> where;  // id -> position, all vectors
};

BackupChoice choose_backup(const PomdpModel& model, const std::vector<PlaneSet>& costs, const PlaneSet& value,
                           const BeliefCache& c, Memo& memo, const Fresh& fresh) {
  const std::size_t nu = model.num_actions, ny = model.num_obs;
  const double g = model.discount;
  if (memo.plane.empty()) {
    memo.plane.resize(nu);
    memo.cost.resize(nu);
    for (std::size_t u = 0; u < nu; ++u) {
      const auto [cost, plane] = sparse_argmin(costs[u], c.support.data(), c.mass.data(), c.support.size());
      memo.cost[u] = cost;
      memo.plane[u] = static_cast<std::uint32_t>(plane);
    }
    memo.id.assign(nu * ny, kNoId);
    memo.value.assign(nu * ny, 0.0);
  }
  BackupChoice best;
  best.value = std::numeric_limits<double>::infinity();
  BackupKey key(2 + ny);
  for (std::size_t u = 0; u < nu; ++u) {
    double total = memo.cost[u];
    key[0] = static_cast<std::uint32_t>(u);
    key[1] = memo.plane[u];
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t j = u * ny + y;
      const std::size_t lo = c.tau_offsets[j], hi = c.tau_offsets[j + 1];
      const std::uint32_t* idx = c.tau_idx.data() + lo;
      const double* val = c.tau_val.data() + lo;
      if (hi == lo) {
        key[2 + y] = 0;
        continue;
      }
      double v = 0.0;
      std::size_t arg = 0;
      const auto hit = memo.id[j] == kNoId ? fresh.where.end() : fresh.where.find(memo.id[j]);
      if (hit != fresh.where.end()) {
        v = memo.value[j];
        arg = hit->second;
        if (fresh.set.size() > 0) {
          const auto [fv, fi] = sparse_argmin(fresh.set, idx, val, hi - lo);
          if (fv < v) {
            v = fv;
            arg = fresh.position[fi];
          }
        }
      } else {
        std::tie(v, arg) = sparse_argmin(value, idx, val, hi - lo);
      }
      memo.id[j] = value.ids[arg];
      memo.value[j] = v;
      total += g * v;
      key[2 + y] = static_cast<std::uint32_t>(arg);
    }
    if (total < best.value) {
      best.value = total;
      best.key = key;
    }
  }
  return best;
}

std::vector<double> build_backup_vector(const PomdpModel& model, const std::vector<PlaneSet>& costs,
                                        const PlaneSet& value, const BackupKey& key) {
  const std::size_t nx = model.num_states, ny = model.num_obs;
  const ActionIndex u = key[0];
  const double* plane = costs[u].row(key[1]);
  std::vector<double> w(nx, 0.0);
  for (std::size_t to = 0; to < nx; ++to) {
    const auto obs = model.obs_row(u, to);
    double s = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      if (obs[y] != 0.0) s += obs[y] * value.row(key[2 + y])[to];
    }
    w[to] = s;
  }
  std::vector<double> out(nx);
  for (std::size_t from = 0; from < nx; ++from) {
    const auto row = model.trans_row(u, from);
    double s = 0.0;
    for (std::size_t to = 0; to < nx; ++to) s += row[to] * w[to];
    out[from] = plane[from] + model.discount * s;
  }
  return out;
}

double min_value(const PlaneSet& set, const BeliefCache& c, std::size_t* arg = nullptr) {
  const auto [v, i] = sparse_argmin(set, c.support.data(), c.mass.data(), c.support.size());
  if (arg != nullptr) *arg = i;
  return v;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<PlaneSet> flatten_costs(const PomdpModel& model, const CostPlanes& planes, double offset) {
  if (planes.size() != model.num_actions) throw DimensionMismatch("cost planes must have one set per action");
  std::vector<PlaneSet> out;
  for (std::size_t u = 0; u < planes.size(); ++u) {
    if (planes[u].empty()) throw ValidationError("action " + std::to_string(u) + " has no cost planes");
    out.push_back(flatten(planes[u], model.num_states, offset));
    out.back().index();
  }
  return out;
}

double min_component(const CostPlanes& planes) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& set : planes) {
    for (const auto& v : set) {
      for (double w : v.weights) m = std::min(m, w);
    }
  }
  return m;
}

AlphaPolicy to_policy(const PlaneSet& set, double add) {
  AlphaPolicy p;
  p.vectors.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    AlphaVector v;
    v.weights.assign(set.row(i), set.row(i) + set.dim);
    for (double& w : v.weights) w += add;
    v.action = set.actions[i];
    v.tag = "backup";
    p.vectors.push_back(std::move(v));
  }
  return p;
}

/// L1 deduplication index: beliefs within 1e-9 in L1 have projections within
/// 1e-9 under weights in [0, 1].
class BeliefIndex {
 public:
  explicit BeliefIndex(std::size_t dim) : weights_(dim) {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& w : weights_) w = unit(rng);
  }

  /// Inserts when no stored belief is within kDedupL1; returns true if inserted.
  bool insert(const Belief& b, std::vector<Belief>& store) {
    const double key = project(b);
    for (auto it = index_.lower_bound(key - kDedupL1); it != index_.end() && it->first <= key + kDedupL1; ++it) {
      const Belief& other = store[it->second];
      double d = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) d += std::abs(b[i] - other[i]);
      if (d < kDedupL1) return false;
    }
    index_.emplace(key, store.size());
    store.push_back(b);
    return true;
  }

 private:
  double project(const Belief& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += weights_[i] * b[i];
    return s;
  }

  std::vector<double> weights_;
  std::multimap<double, std::size_t> index_;
};

std::vector<Belief> expand_from(const PomdpModel& model, const std::vector<Belief>& existing,
                                const std::vector<Belief>& starts, const SolverConfig& config,
                                const AlphaPolicy* guide, std::uint64_t stream) {
  std::vector<Belief> store;
  BeliefIndex index(model.num_states);
  for (const auto& b : existing) index.insert(b, store);
  const std::size_t cap = std::max(config.belief_set_size, store.size());
  if (starts.empty()) return store;

  Rng rng = derived_rng(config.seed, stream);
  std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_action(0, model.num_actions - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::size_t stall = 0;
  while (store.size() < cap && stall < config.stall_limit) {
    Belief b = starts[pick_start(rng)];
    bool added = false;
    for (std::size_t depth = 0; depth < config.max_depth && store.size() < cap; ++depth) {
      ActionIndex u = pick_action(rng);
      if (guide != nullptr && unit(rng) >= config.explore_epsilon) u = policy_action(*guide, b);
      const std::vector<double> py = obs_predictive(model, b, u);
      const ObsIndex y = sample_categorical(py, rng);
      b = filter_update(model, b, u, y);
      if (index.insert(b, store)) added = true;
    }
    stall = added ? 0 : stall + 1;
  }
  return store;
}

/// Value iteration on a fixed belief set from `start` (flat, already shifted).
struct IterationResult {
  PlaneSet value;
  std::size_t iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

IterationResult iterate(const PomdpModel& model, const std::vector<PlaneSet>& costs, const std::vector<Belief>& beliefs,
                        PlaneSet start, const SolverConfig& config, double shift, std::size_t round,
                        const SweepObserver& observer) {
  const std::size_t n = beliefs.size();
  std::vector<BeliefCache> caches(n);
  parallel_for(n, config.threads, [&](std::size_t i) { caches[i] = make_cache(model, beliefs[i]); });

  IterationResult result;
  result.value = std::move(start);
  std::vector<double> v_old(n);
  for (std::size_t i = 0; i < n; ++i) v_old[i] = min_value(result.value, caches[i]);

  // Upper-bound runs first lift the value by max(HV - V)/(1-g) over the set,
  // which makes V >= HV there. Each sweep then adds a backup only where it is
  // strictly lower and keeps every vector a best backup refers to, so the best
  // action's continuation value never rises, V >= HV persists and values on the
  // set decrease to a fixed point.
  const bool keep_old = config.init == ValueInit::UpperBound;
  bool lifted = !keep_old;
  std::vector<BackupChoice> choices(n);
  std::vector<BackupKey> referenced(n);
  std::vector<double> v_new(n), backed(n);
  std::vector<std::size_t> argmins(n), old_argmins(n);
  std::vector<Memo> memos(n);
  Fresh fresh;
  std::uint64_t next_id = 0;
  auto renumber = [&] {
    result.value.ids.resize(result.value.size());
    for (auto& id : result.value.ids) id = next_id++;
  };
  renumber();
  while (result.iterations < config.max_iterations) {
    result.value.index();
    fresh.set.index();
    fresh.where.clear();
    for (std::size_t k = 0; k < result.value.size(); ++k) {
      fresh.where.emplace(result.value.ids[k], static_cast<std::uint32_t>(k));
    }
    parallel_for(n, config.threads, [&](std::size_t i) {
      choices[i] = choose_backup(model, costs, result.value, caches[i], memos[i], fresh);
      backed[i] = choices[i].value;
      if (keep_old) {
        referenced[i] = choices[i].key;
        min_value(result.value, caches[i], &old_argmins[i]);
        if (!(choices[i].value < v_old[i])) choices[i].key = {kKeepOld, static_cast<std::uint32_t>(old_argmins[i])};
      }
    });
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(backed[i] - v_old[i]));
    result.residual = residual;
    if (observer && result.iterations > 0) {
      SweepInfo info{round, result.iterations, residual, result.value.size(), n};
      AlphaPolicy snapshot = to_policy(result.value, shift / (1.0 - model.discount));
      observer(info, beliefs, snapshot);
    }
    if (residual <= config.bellman_residual_tol) {
      result.converged = true;
      break;
    }
    if (!lifted) {
      lifted = true;
      double gap = 0.0;
      for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, backed[i] - v_old[i]);
      if (gap > 0.0) {
        const double lift = gap / (1.0 - model.discount);
        for (double& w : result.value.weights) w += lift;
        for (double& v : v_old) v += lift;
        renumber();
        fresh = Fresh{};
        continue;
      }
    }

    // Merge in belief order; identical choices share one vector.
    std::map<BackupKey, std::size_t> slot;
    std::vector<BackupKey> keys;
    auto add_key = [&](const BackupKey& key) {
      if (slot.emplace(key, keys.size()).second) keys.push_back(key);
    };
    for (std::size_t i = 0; i < n; ++i) add_key(choices[i].key);
    std::vector<char> pinned;
    if (keep_old) {
      for (std::size_t i = 0; i < n; ++i) {
        add_key({kKeepOld, static_cast<std::uint32_t>(old_argmins[i])});
        for (std::size_t y = 2; y < referenced[i].size(); ++y) add_key({kKeepOld, referenced[i][y]});
      }
      pinned.assign(keys.size(), 0);
      for (std::size_t k = 0; k < keys.size(); ++k) pinned[k] = keys[k][0] == kKeepOld ? 1 : 0;
    }
    PlaneSet next;
    next.dim = model.num_states;
    next.weights.resize(keys.size() * next.dim);
    next.actions.resize(keys.size());
    next.ids.resize(keys.size());
    const std::uint64_t first_new = next_id;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      next.ids[k] = keys[k][0] == kKeepOld ? result.value.ids[keys[k][1]] : next_id++;
    }
    parallel_for(keys.size(), config.threads, [&](std::size_t k) {
      const BackupKey& key = keys[k];
      auto dst = next.weights.begin() + static_cast<std::ptrdiff_t>(k * next.dim);
      if (key[0] == kKeepOld) {
        std::copy(result.value.row(key[1]), result.value.row(key[1]) + next.dim, dst);
        next.actions[k] = result.value.actions[key[1]];
      } else {
        const std::vector<double> w = build_backup_vector(model, costs, result.value, key);
        std::copy(w.begin(), w.end(), dst);
        next.actions[k] = key[0];
      }
    });

    next.index();
    parallel_for(n, config.threads, [&](std::size_t i) { v_new[i] = min_value(next, caches[i], &argmins[i]); });

    // Keep only vectors that are the minimizer at some belief, plus pinned ones.
    std::vector<char> used = keep_old ? pinned : std::vector<char>(next.size(), 0);
    for (std::size_t a : argmins) used[a] = 1;
    PlaneSet pruned;
    pruned.dim = next.dim;
    fresh = Fresh{};
    fresh.set.dim = next.dim;
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (!used[k]) continue;
      if (next.ids[k] >= first_new) {
        fresh.set.weights.insert(fresh.set.weights.end(), next.row(k), next.row(k) + next.dim);
        fresh.set.actions.push_back(next.actions[k]);
        fresh.position.push_back(static_cast<std::uint32_t>(pruned.size()));
      }
      pruned.weights.insert(pruned.weights.end(), next.row(k), next.row(k) + next.dim);
      pruned.actions.push_back(next.actions[k]);
      pruned.ids.push_back(next.ids[k]);
    }
    result.value = std::move(pruned);

    v_old.swap(v_new);
    ++result.iterations;

  }
  return result;
}

PlaneSet constant_value(std::size_t dim, double v) {
  PlaneSet z;
  z.dim = dim;
  z.weights.assign(dim, v);
  z.actions.push_back(0);
  return z;
}

/// Zero, or C/(1-g) with C = min_u min_plane max_x of the shifted cost planes,
/// so that min_u Ghat(pi,u) <= C everywhere.
PlaneSet initial_value(const PomdpModel& model, const std::vector<PlaneSet>& costs, const SolverConfig& config) {
  if (config.init == ValueInit::Zero) return constant_value(model.num_states, 0.0);
  double c = std::numeric_limits<double>::infinity();
  for (const PlaneSet& set : costs) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      c = std::min(c, *std::max_element(set.row(i), set.row(i) + set.dim));
    }
  }
  return constant_value(model.num_states, c / (1.0 - model.discount));
}

}  // namespace

void SolverConfig::validate() const {
  if (!(bellman_residual_tol > 0.0)) throw ValidationError("bellman_residual_tol must be > 0");
  if (belief_set_size < 1) throw ValidationError("belief_set_size must be >= 1");
  if (expansion_rounds < 1) throw ValidationError("expansion_rounds must be >= 1");
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(explore_epsilon >= 0.0 && explore_epsilon <= 1.0)) throw ValidationError("explore_epsilon must be in [0,1]");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

double AlphaPolicy::value(const Belief& b) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vectors) best = std::min(best, v.dot(b));
  return best;
}

ActionIndex policy_action(const AlphaPolicy& policy, const Belief& belief) {
  if (policy.vectors.empty()) throw ValidationError("policy has no vectors");
  if (belief.size() != policy.num_states()) throw DimensionMismatch("belief and policy dimensions differ");
  double best = std::numeric_limits<double>::infinity();
  ActionIndex action = 0;
  for (const auto& v : policy.vectors) {
    const double s = v.dot(belief);
    if (s < best || (s == best && v.action < action)) {
      best = s;
      action = v.action;
    }
  }
  return action;
}

std::vector<Belief> initial_beliefs(const PomdpModel& model) {
  std::vector<Belief> seeds;
  const std::vector<double> py = initial_obs_distribution(model);
  for (std::size_t y = 0; y < model.num_obs; ++y) {
    if (py[y] > 0.0) seeds.push_back(initial_belief(model, y));
  }
  std::vector<Belief> unique;
  BeliefIndex index(model.num_states);
  for (const auto& b : seeds) index.insert(b, unique);
  return unique;
}

std::vector<Belief> expand_beliefs(const PomdpModel& model, const std::vector<Belief>& seeds,
                                   const SolverConfig& config, const AlphaPolicy* guide) {
  if (seeds.empty()) throw ValidationError("expand_beliefs needs at least one seed belief");
  for (const auto& b : seeds) validate_belief(model, b);
  return expand_from(model, seeds, seeds, config, guide, 0);
}

AlphaVector bellman_backup(const PomdpModel& model, const CostPlanes& cost_planes,
                           const std::vector<AlphaVector>& value, const Belief& belief) {
  validate_belief(model, belief);
  if (value.empty()) throw ValidationError("value function has no vectors");
  const std::vector<PlaneSet> costs = flatten_costs(model, cost_planes, 0.0);
  const PlaneSet flat = flatten(value, model.num_states);
  const BeliefCache cache = make_cache(model, belief);
  const BackupChoice choice = choose_backup(model, costs, flat, cache);
  AlphaVector out;
  out.weights = build_backup_vector(model, costs, flat, choice.key);
  out.action = choice.key[0];
  out.tag = "backup";
  return out;
}

double bellman_rhs(const PomdpModel& model, const CostPlanes& cost_planes, const std::vector<AlphaVector>& value,
                   const Belief& belief) {
  auto v_of = [&](const Belief& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : value) best = std::min(best, a.dot(b));
    return best;
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < model.num_actions; ++u) {
    double cost = std::numeric_limits<double>::infinity();
    for (const auto& plane : cost_planes[u]) cost = std::min(cost, plane.dot(belief));
    const std::vector<double> py = obs_predictive(model, belief, u);
    double future = 0.0;
    for (std::size_t y = 0; y < model.num_obs; ++y) {
      if (py[y] <= 0.0) continue;
      future += py[y] * v_of(filter_update(model, belief, u, y));
    }
    best = std::min(best, cost + model.discount * future);
  }
  return best;
}

AlphaPolicy solve_on_beliefs(const PomdpModel& model, const CostPlanes& cost_planes, const std::vector<Belief>& beliefs,
                             const SolverConfig& config, const SweepObserver& observer) {
  validate_model(model);
  config.validate();
  if (beliefs.empty()) throw ValidationError("belief set is empty");
  const double shift = std::min(0.0, min_component(cost_planes));
  const std::vector<PlaneSet> costs = flatten_costs(model, cost_planes, -shift);
  IterationResult r = iterate(model, costs, beliefs, initial_value(model, costs, config), config, shift, 0, observer);
  AlphaPolicy policy = to_policy(r.value, shift / (1.0 - model.discount));
  policy.config = config;
  policy.iterations = r.iterations;
  policy.residual = r.residual;
  policy.converged = r.converged;
  policy.cost_shift = shift;
  policy.belief_count = beliefs.size();
  return policy;
}

AlphaPolicy solve(const PomdpModel& model, const CostPlanes& cost_planes, const SolverConfig& config,
                  const SweepObserver& observer) {
  validate_model(model);
  config.validate();
  const double shift = std::min(0.0, min_component(cost_planes));
  const std::vector<PlaneSet> costs = flatten_costs(model, cost_planes, -shift);
  const double add_back = shift / (1.0 - model.discount);

  const std::vector<Belief> seeds = initial_beliefs(model);
  std::vector<Belief> beliefs = seeds;
  if (config.vertex_beliefs) {
    for (std::size_t x = 0; x < model.num_states; ++x) beliefs.push_back(Belief::vertex(model.num_states, x));
  }
  PlaneSet value = initial_value(model, costs, config);
  AlphaPolicy policy;
  std::size_t total_iterations = 0;
  IterationResult last;

  const std::size_t rounds = config.expansion_rounds;
  const std::size_t base = beliefs.size();
  const std::size_t target = std::max(config.belief_set_size, base);
  for (std::size_t round = 0; round < rounds; ++round) {
    SolverConfig round_config = config;
    round_config.belief_set_size = base + (target - base) * (round + 1) / rounds;
    const AlphaPolicy* guide = round == 0 ? nullptr : &policy;
    beliefs = expand_from(model, beliefs, seeds, round_config, guide, round + 1);
    last = iterate(model, costs, beliefs, std::move(value), config, shift, round, observer);
    total_iterations += last.iterations;
    value = last.value;
    policy = to_policy(value, add_back);
  }

  policy.config = config;
  policy.iterations = total_iterations;
  policy.residual = last.residual;
  policy.converged = last.converged;
  policy.cost_shift = shift;
  policy.belief_count = beliefs.size();
  return policy;
}

}  // namespace erpomdp
