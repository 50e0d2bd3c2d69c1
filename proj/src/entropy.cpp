#include "erpomdp/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "erpomdp/errors.hpp"

namespace erpomdp {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

void require_interior(const Belief& b) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b[i] >= kInteriorFloor)) {
      throw BoundaryBelief("belief coordinate " + std::to_string(i) + " = " + std::to_string(b[i]) +
                           " is below the interior floor");
    }
  }
}

}  // namespace

double entropy_bits(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf) h -= plogp(p);
  return h;
}

double AlphaVector::dot(const Belief& b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += b[i] * weights[i];
  return s;
}

double PwlcApproximation::evaluate(const Belief& b, ActionIndex u) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& plane : planes.at(u)) best = std::min(best, plane.dot(b));
  return best;
}

double belief_entropy(const Belief& belief) { return entropy_bits(belief.probs()); }

double smoother_increment(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  const std::vector<double> joint = predict_joint(model, belief, u);
  const std::vector<double> pred = predict_state(model, belief, u);
  // Clamp tiny negative round-off; the difference is a conditional entropy.
  return std::max(0.0, entropy_bits(joint) - entropy_bits(pred));
}

double obs_entropy_term(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  return entropy_bits(obs_predictive(model, belief, u));
}

double joint_stage_cost(const PomdpModel& model, StateIndex x, ActionIndex u) {
  double h = 0.0;
  const auto row = model.trans_row(u, x);
  for (std::size_t next = 0; next < model.num_states; ++next) {
    if (row[next] == 0.0) continue;
    const auto obs = model.obs_row(u, next);
    for (std::size_t y = 0; y < model.num_obs; ++y) h -= plogp(row[next] * obs[y]);
  }
  return h;
}

double expected_cost_weight(const PomdpModel& model, StateIndex x, ActionIndex u) {
  return (1.0 - model.discount) * model.terminal_cost[x] + model.discount * model.cost(x, u);
}

double stage_cost_G(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  const double g = model.discount;
  double value = 0.0;
  for (std::size_t x = 0; x < model.num_states; ++x) value += belief[x] * expected_cost_weight(model, x, u);
  if (model.beta != 0.0) {
    value += (1.0 - g) * model.beta * belief_entropy(belief) + g * model.beta * smoother_increment(model, belief, u);
  }
  if (model.lambda != 0.0) value += g * model.lambda * obs_entropy_term(model, belief, u);
  return value;
}

std::vector<double> grad_G(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  validate_belief(model, belief);
  require_interior(belief);
  const std::size_t nx = model.num_states, ny = model.num_obs;
  const double g = model.discount;

  std::vector<double> grad(nx);
  for (std::size_t x = 0; x < nx; ++x) grad[x] = expected_cost_weight(model, x, u);

  if (model.beta != 0.0) {
    const std::vector<double> pred = predict_state(model, belief, u);
    for (std::size_t from = 0; from < nx; ++from) {
      const double d_h1 = -std::log2(belief[from]) - kInvLn2;
      // d/dpi(from) [H(joint) - H(pred)] = -sum_to A log(pi(from) A / pred(to))
      double d_h2 = 0.0;
      const auto row = model.trans_row(u, from);
      for (std::size_t to = 0; to < nx; ++to) {
        if (row[to] == 0.0) continue;
        d_h2 -= row[to] * std::log2(belief[from] * row[to] / pred[to]);
      }
      grad[from] += (1.0 - g) * model.beta * d_h1 + g * model.beta * d_h2;
    }
  }

  if (model.lambda != 0.0) {
    const std::vector<double> q = obs_predictive(model, belief, u);
    for (std::size_t from = 0; from < nx; ++from) {
      const auto row = model.trans_row(u, from);
      double d_h3 = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        double m = 0.0;  // p(y | x_k = from, u)
        for (std::size_t to = 0; to < nx; ++to) m += row[to] * model.obs(u, to, y);
        if (m == 0.0) continue;
        d_h3 -= m * (std::log2(q[y]) + kInvLn2);
      }
      grad[from] += g * model.lambda * d_h3;
    }
  }
  return grad;
}

Belief clamp_to_interior(const Belief& belief, double floor) {
  std::vector<double> p = belief.vec();
  double sum = 0.0;
  for (double& v : p) {
    v = std::max(v, floor);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return Belief(std::move(p));
}

PwlcApproximation build_pwlc(const PomdpModel& model, const std::vector<Belief>& base_points) {
  PwlcApproximation approx;
  approx.base_points = base_points;
  approx.planes.resize(model.num_actions);
  for (std::size_t u = 0; u < model.num_actions; ++u) approx.planes[u].reserve(base_points.size());
  for (std::size_t k = 0; k < base_points.size(); ++k) {
    const Belief& xi = base_points[k];
    for (std::size_t u = 0; u < model.num_actions; ++u) {
      const std::vector<double> grad = grad_G(model, xi, u);
      double inner = 0.0;
      for (std::size_t x = 0; x < model.num_states; ++x) inner += xi[x] * grad[x];
      const double offset = stage_cost_G(model, xi, u) - inner;
      AlphaVector plane;
      plane.weights.resize(model.num_states);
      for (std::size_t x = 0; x < model.num_states; ++x) plane.weights[x] = grad[x] + offset;
      plane.action = u;
      plane.tag = "xi:" + std::to_string(k);
      approx.planes[u].push_back(std::move(plane));
    }
  }
  return approx;
}

std::vector<Belief> default_base_points(std::size_t num_states) {
  std::vector<Belief> points;
  points.push_back(Belief::uniform(num_states));
  if (num_states < 2) return points;
  const double small = 0.001;
  const double large = 1.0 - small * static_cast<double>(num_states - 1);
  for (std::size_t i = 0; i < num_states; ++i) {
    std::vector<double> p(num_states, small);
    p[i] = large;
    points.emplace_back(std::move(p));
  }
  return points;
}

std::vector<Belief> even_base_points_2state(std::size_t count) {
  std::vector<Belief> points;
  points.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count + 1);
    points.emplace_back(std::vector<double>{t, 1.0 - t});
  }
  return points;
}

std::vector<AlphaVector> linear_cost_vectors(const PomdpModel& model) {
  if (model.beta != model.lambda) {
    throw WeightMismatch("linear cost requires beta == lambda (beta = " + std::to_string(model.beta) +
                         ", lambda = " + std::to_string(model.lambda) + ")");
  }
  std::vector<AlphaVector> out;
  out.reserve(model.num_actions);
  for (std::size_t u = 0; u < model.num_actions; ++u) {
    AlphaVector v;
    v.action = u;
    v.tag = "linear";
    v.weights.resize(model.num_states);
    for (std::size_t x = 0; x < model.num_states; ++x) {
      v.weights[x] = expected_cost_weight(model, x, u) + model.discount * model.beta * joint_stage_cost(model, x, u);
    }
    out.push_back(std::move(v));
  }
  return out;
}

CostPlanes linear_cost_planes(const PomdpModel& model) {
  CostPlanes planes(model.num_actions);
  for (auto& v : linear_cost_vectors(model)) {
    const ActionIndex u = v.action;
    planes[u].push_back(std::move(v));
  }
  return planes;
}

Belief sample_simplex(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& v : p) {
    v = expo(rng);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return Belief(std::move(p));
}

double sparsity(const std::vector<Belief>& base_points, std::size_t samples, std::uint64_t seed) {
  if (base_points.empty()) throw ValidationError("sparsity needs at least one base point");
  const std::size_t n = base_points.front().size();
  Rng rng(seed);
  double radius = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Belief pi = sample_simplex(n, rng);
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& xi : base_points) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += std::abs(pi[i] - xi[i]);
      nearest = std::min(nearest, d);
    }
    radius = std::max(radius, nearest);
  }
  return radius;
}

}  // namespace erpomdp
