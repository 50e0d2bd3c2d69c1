#include "erpomdp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "erpomdp/entropy.hpp"
#include "erpomdp/errors.hpp"

namespace erpomdp {

namespace {

constexpr std::size_t kDirections = 4;

/// Neumaier-compensated running sums for mean and standard error.
class Accumulator {
 public:
  void add(double v) {
    add_compensated(sum_, comp_, v);
    add_compensated(sq_, sq_comp_, v * v);
    ++n_;
  }

  Estimate estimate() const {
    Estimate e;
    if (n_ == 0) return e;
    const double n = static_cast<double>(n_);
    e.mean = (sum_ + comp_) / n;
    if (n_ > 1) {
      const double var = std::max(0.0, ((sq_ + sq_comp_) - n * e.mean * e.mean) / (n - 1.0));
      e.std_error = std::sqrt(var / n);
    }
    return e;
  }

 private:
  static void add_compensated(double& sum, double& comp, double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  double sum_ = 0.0, comp_ = 0.0, sq_ = 0.0, sq_comp_ = 0.0;
  std::size_t n_ = 0;
};

/// Neighbor in direction d, or nullopt-style sentinel when leaving the grid.
bool neighbor(const GridSpec& spec, std::size_t cell, Direction d, std::size_t& out) {
  const std::size_t row = cell / spec.width, col = cell % spec.width;
  switch (d) {
    case Direction::North:
      if (row == 0) return false;
      out = cell - spec.width;
      return true;
    case Direction::South:
      if (row + 1 >= spec.height) return false;
      out = cell + spec.width;
      return true;
    case Direction::East:
      if (col + 1 >= spec.width) return false;
      out = cell + 1;
      return true;
    case Direction::West:
      if (col == 0) return false;
      out = cell - 1;
      return true;
  }
  return false;
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::North:
      return Direction::South;
    case Direction::South:
      return Direction::North;
    case Direction::East:
      return Direction::West;
    case Direction::West:
      return Direction::East;
  }
  return d;
}

}  // namespace

Direction parse_direction(const std::string& s) {
  if (s == "N" || s == "north") return Direction::North;
  if (s == "S" || s == "south") return Direction::South;
  if (s == "E" || s == "east") return Direction::East;
  if (s == "W" || s == "west") return Direction::West;
  throw ValidationError("unknown wall direction '" + s + "' (expected N, S, E or W)");
}

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::North:
      return "N";
    case Direction::South:
      return "S";
    case Direction::East:
      return "E";
    case Direction::West:
      return "W";
  }
  return "?";
}

std::vector<char> blocked_edges(const GridSpec& spec) {
  if (spec.width == 0 || spec.height == 0) throw ValidationError("grid dimensions must be positive");
  const std::size_t n = spec.width * spec.height;
  std::vector<char> blocked(n * kDirections, 0);
  for (std::size_t cell = 0; cell < n; ++cell) {
    for (std::size_t d = 0; d < kDirections; ++d) {
      std::size_t other = 0;
      if (!neighbor(spec, cell, static_cast<Direction>(d), other)) blocked[cell * kDirections + d] = 1;
    }
  }
  for (const auto& [cell, dir] : spec.walls) {
    if (cell >= n) {
      throw ValidationError("invalid wall reference: cell " + std::to_string(cell) + " outside a " +
                            std::to_string(spec.width) + "x" + std::to_string(spec.height) + " grid");
    }
    blocked[cell * kDirections + static_cast<std::size_t>(dir)] = 1;
    std::size_t other = 0;
    if (neighbor(spec, cell, dir, other)) blocked[other * kDirections + static_cast<std::size_t>(opposite(dir))] = 1;
  }
  return blocked;
}

PomdpModel build_gridworld(const GridSpec& spec, const GridParams& params) {
  const std::vector<char> blocked = blocked_edges(spec);
  const std::size_t n = spec.width * spec.height;
  if (spec.goal >= n) throw ValidationError("goal cell outside the grid");
  if (!(spec.false_wall_prob >= 0.0 && spec.false_wall_prob <= 1.0) ||
      !(spec.miss_prob >= 0.0 && spec.miss_prob <= 1.0)) {
    throw ValidationError("sensor probabilities must lie in [0,1]");
  }

  PomdpModel m = PomdpModel::zeros(n, kGridActions, kGridObservations);
  m.discount = params.discount;
  m.beta = params.beta;
  m.lambda = params.lambda;

  for (std::size_t cell = 0; cell < n; ++cell) {
    for (std::size_t d = 0; d < kDirections; ++d) {
      std::size_t to = cell;
      if (!blocked[cell * kDirections + d]) neighbor(spec, cell, static_cast<Direction>(d), to);
      m.trans(d, cell, to) = 1.0;
    }
    m.trans(kStay, cell, cell) = 1.0;
  }

  for (std::size_t cell = 0; cell < n; ++cell) {
    for (std::size_t y = 0; y < kGridObservations; ++y) {
      double p = 1.0;
      for (std::size_t d = 0; d < kDirections; ++d) {
        const bool detected = (y >> d) & 1U;
        const bool wall = blocked[cell * kDirections + d] != 0;
        const double p_detect = wall ? 1.0 - spec.miss_prob : spec.false_wall_prob;
        p *= detected ? p_detect : 1.0 - p_detect;
      }
      m.obs0(cell, y) = p;
      for (std::size_t u = 0; u < kGridActions; ++u) m.obs(u, cell, y) = p;
    }
  }

  for (std::size_t cell = 0; cell < n; ++cell) {
    m.prior[cell] = 1.0 / static_cast<double>(n);
    for (std::size_t u = 0; u < kGridActions; ++u) m.cost(cell, u) = cell == spec.goal ? 0.0 : 1.0;
  }
  renormalize_rows(m);
  validate_model(m);
  return m;
}

std::size_t sample_horizon(double discount, Rng& rng) {
  if (!(discount > 0.0 && discount < 1.0)) throw ValidationError("discount out of (0,1)");
  std::geometric_distribution<std::size_t> geo(1.0 - discount);
  return geo(rng);
}

EpisodeResult run_episode(const PomdpModel& model, const AlphaPolicy& policy, std::size_t horizon, Rng& rng) {
  if (policy.num_states() != model.num_states) {
    throw DimensionMismatch("policy has " + std::to_string(policy.num_states()) + " states, model has " +
                            std::to_string(model.num_states));
  }
  EpisodeResult out;
  TrajectoryRecord& r = out.record;
  r.states.reserve(horizon + 1);
  r.observations.reserve(horizon + 1);
  r.actions.reserve(horizon);
  r.beliefs.reserve(horizon + 1);

  auto [x, y] = sample_initial(model, rng);
  r.states.push_back(x);
  r.observations.push_back(y);
  r.beliefs.push_back(initial_belief(model, y));
  for (std::size_t k = 0;; ++k) {
    const ActionIndex u = policy_action(policy, r.beliefs.back());
    out.goal_cost += model.cost(r.states.back(), u);
    if (k == horizon) {
      out.final_action = u;
      break;
    }
    const auto [next_x, next_y] = sample_step(model, r.states.back(), u, rng);
    r.actions.push_back(u);
    r.beliefs.push_back(filter_update(model, r.beliefs.back(), u, next_y));
    r.states.push_back(next_x);
    r.observations.push_back(next_y);
  }
  out.ledger = accumulate_ledger(model, r);
  return out;
}

CriteriaReport monte_carlo(const PomdpModel& model, const AlphaPolicy& policy, std::size_t episodes,
                           HorizonSpec horizon, std::uint64_t seed, std::size_t threads) {
  if (episodes < 1) throw ValidationError("monte_carlo needs at least one episode");
  std::vector<EpisodeRow> rows(episodes);
  auto work = [&](std::size_t i) {
    Rng rng = derived_rng(seed, i);
    const std::size_t T = horizon.geometric ? sample_horizon(model.discount, rng) : horizon.fixed;
    EpisodeResult ep = run_episode(model, policy, T, rng);
    EpisodeRow& row = rows[i];
    row.episode = i;
    row.horizon = T;
    row.goal_cost = ep.goal_cost;
    row.ledger = ep.ledger;
    row.map_error = viterbi_map(model, ep.record.observations, ep.record.actions) != ep.record.states;
    row.path = std::move(ep.record.states);
  };
  threads = std::max<std::size_t>(1, std::min(threads, episodes));
  if (threads == 1) {
    for (std::size_t i = 0; i < episodes; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < episodes; i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  Accumulator goal, io, smoother, joint, beliefs, map_error;
  for (const EpisodeRow& row : rows) {
    goal.add(row.goal_cost);
    io.add(row.ledger.io_sum);
    smoother.add(row.ledger.smoother_sum);
    joint.add(row.ledger.joint_sum);
    beliefs.add(row.ledger.belief_entropy_sum);
    map_error.add(row.map_error ? 1.0 : 0.0);
  }
  CriteriaReport report;
  report.episodes = episodes;
  report.goal_cost = goal.estimate();
  report.io_entropy = io.estimate();
  report.smoother_entropy = smoother.estimate();
  report.joint_entropy = joint.estimate();
  report.belief_entropy_sum = beliefs.estimate();
  report.map_error_prob = map_error.estimate();
  report.rows = std::move(rows);
  return report;
}

bool DiscountCheck::agree() const { return std::abs(geometric.mean - discounted.mean) <= tolerance; }

double stage_cost_bound(const PomdpModel& model) {
  const double g = model.discount;
  const double hx = std::log2(static_cast<double>(model.num_states));
  const double hy = std::log2(static_cast<double>(model.num_obs));
  double r = 0.0;
  for (std::size_t x = 0; x < model.num_states; ++x) {
    for (std::size_t u = 0; u < model.num_actions; ++u) r = std::max(r, std::abs(expected_cost_weight(model, x, u)));
  }
  return (1.0 - g) * model.beta * hx + g * model.beta * hx + g * model.lambda * hy + r;
}

DiscountCheck geometric_discount_check(const PomdpModel& model, const AlphaPolicy& policy, std::size_t truncation,
                                       std::size_t episodes, std::uint64_t seed) {
  if (episodes < 1) throw ValidationError("geometric_discount_check needs at least one episode");
  const double g = model.discount;
  Accumulator geometric, discounted;

  // Each episode walks the belief chain under the policy; the true state is
  // not needed since y_{k+1} ~ p(y | pi_k, u_k).
  auto walk = [&](Rng& rng, std::size_t steps, auto&& per_step, auto&& at_end) {
    const auto [x0, y0] = sample_initial(model, rng);
    (void)x0;
    Belief b = initial_belief(model, y0);
    for (std::size_t k = 0; k < steps; ++k) {
      const ActionIndex u = policy_action(policy, b);
      per_step(k, b, u);
      const std::vector<double> py = obs_predictive(model, b, u);
      b = filter_update(model, b, u, sample_categorical(py, rng));
    }
    at_end(b);
  };

  for (std::size_t i = 0; i < episodes; ++i) {
    Rng rng_geo = derived_rng(seed, 2 * i);
    const std::size_t T = sample_horizon(g, rng_geo);
    double total = 0.0;
    walk(
        rng_geo, T,
        [&](std::size_t, const Belief& b, ActionIndex u) {
          double c = 0.0;
          for (std::size_t x = 0; x < model.num_states; ++x) c += b[x] * model.cost(x, u);
          total += c + model.beta * smoother_increment(model, b, u) + model.lambda * obs_entropy_term(model, b, u);
        },
        [&](const Belief& b) {
          double c = 0.0;
          for (std::size_t x = 0; x < model.num_states; ++x) c += b[x] * model.terminal_cost[x];
          total += c + model.beta * belief_entropy(b);
        });
    geometric.add(total);

    Rng rng_disc = derived_rng(seed, 2 * i + 1);
    double disc = 0.0;
    double weight = 1.0;
    walk(
        rng_disc, truncation,
        [&](std::size_t, const Belief& b, ActionIndex u) {
          disc += weight * stage_cost_G(model, b, u);
          weight *= g;
        },
        [](const Belief&) {});
    discounted.add(disc);
  }

  DiscountCheck out;
  out.geometric = geometric.estimate();
  out.discounted = discounted.estimate();
  out.truncation_bound = std::pow(g, static_cast<double>(truncation)) * stage_cost_bound(model) / (1.0 - g);
  const double sigma = std::sqrt(out.geometric.std_error * out.geometric.std_error +
                                 out.discounted.std_error * out.discounted.std_error);
  out.tolerance = 3.0 * sigma + out.truncation_bound;
  return out;
}

}  // namespace erpomdp
