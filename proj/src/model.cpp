#include "erpomdp/model.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "erpomdp/errors.hpp"

namespace erpomdp {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void check_row(std::span<const double> row, const std::string& where) {
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double p = row[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ValidationError(where + ": entry " + std::to_string(i) + " = " + fmt_double(p) +
                            " outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw ValidationError(where + ": row sum " + fmt_double(sum) + " (expected 1)");
  }
}

void check_size(std::size_t got, std::size_t want, const char* field) {
  if (got != want) {
    throw DimensionMismatch(std::string(field) + ": expected " + std::to_string(want) + " entries, got " +
                            std::to_string(got));
  }
}

void normalize_span(double* row, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += row[i];
  if (sum > 0.0 && std::abs(sum - 1.0) <= kRowSumTolerance) {
    for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
  }
}

}  // namespace

PomdpModel PomdpModel::zeros(std::size_t num_states, std::size_t num_actions, std::size_t num_obs) {
  PomdpModel m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.num_obs = num_obs;
  m.transition.assign(num_actions * num_states * num_states, 0.0);
  m.observation.assign(num_actions * num_states * num_obs, 0.0);
  m.initial_observation.assign(num_states * num_obs, 0.0);
  m.prior.assign(num_states, 0.0);
  m.stage_cost.assign(num_states * num_actions, 0.0);
  m.terminal_cost.assign(num_states, 0.0);
  return m;
}

void validate_model(const PomdpModel& m) {
  if (m.num_states == 0) throw ValidationError("num_states must be positive");
  if (m.num_actions == 0) throw ValidationError("num_actions must be positive");
  if (m.num_obs == 0) throw ValidationError("num_obs must be positive");
  const std::size_t nx = m.num_states, nu = m.num_actions, ny = m.num_obs;
  check_size(m.transition.size(), nu * nx * nx, "transition");
  check_size(m.observation.size(), nu * nx * ny, "observation");
  check_size(m.initial_observation.size(), nx * ny, "initial_observation");
  check_size(m.prior.size(), nx, "prior");
  check_size(m.stage_cost.size(), nx * nu, "stage_cost");
  check_size(m.terminal_cost.size(), nx, "terminal_cost");

  if (!(m.discount > 0.0 && m.discount < 1.0)) {
    throw ValidationError("discount out of (0,1): " + fmt_double(m.discount));
  }
  if (!(m.beta >= 0.0) || !std::isfinite(m.beta)) throw ValidationError("beta must be >= 0: " + fmt_double(m.beta));
  if (!(m.lambda >= 0.0) || !std::isfinite(m.lambda)) {
    throw ValidationError("lambda must be >= 0: " + fmt_double(m.lambda));
  }

  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t x = 0; x < nx; ++x) {
      check_row(m.trans_row(u, x),
                "transition[" + std::to_string(u) + "][" + std::to_string(x) + "]");
      check_row(m.obs_row(u, x),
                "observation[" + std::to_string(u) + "][" + std::to_string(x) + "]");
    }
  }
  for (std::size_t x = 0; x < nx; ++x) {
    check_row({m.initial_observation.data() + x * ny, ny}, "initial_observation[" + std::to_string(x) + "]");
  }
  check_row(m.prior, "prior");
  for (double c : m.stage_cost) {
    if (!std::isfinite(c)) throw ValidationError("stage_cost: non-finite entry");
  }
  for (double c : m.terminal_cost) {
    if (!std::isfinite(c)) throw ValidationError("terminal_cost: non-finite entry");
  }
}

void renormalize_rows(PomdpModel& m) {
  const std::size_t nx = m.num_states, nu = m.num_actions, ny = m.num_obs;
  for (std::size_t r = 0; r < nu * nx; ++r) {
    normalize_span(m.transition.data() + r * nx, nx);
    normalize_span(m.observation.data() + r * ny, ny);
  }
  for (std::size_t x = 0; x < nx; ++x) normalize_span(m.initial_observation.data() + x * ny, ny);
  normalize_span(m.prior.data(), nx);
}

void validate_belief(const PomdpModel& model, const Belief& belief) {
  if (belief.size() != model.num_states) {
    throw DimensionMismatch("belief has " + std::to_string(belief.size()) + " entries, model has " +
                            std::to_string(model.num_states) + " states");
  }
  double sum = 0.0;
  for (double p : belief.probs()) {
    if (!(p >= 0.0)) throw ValidationError("belief has a negative or NaN entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("belief does not sum to 1: " + fmt_double(sum));
}

Belief initial_belief(const PomdpModel& model, ObsIndex y0) {
  if (y0 >= model.num_obs) throw ValidationError("observation index out of range");
  std::vector<double> pi(model.num_states);
  double norm = 0.0;
  for (std::size_t x = 0; x < model.num_states; ++x) {
    pi[x] = model.obs0(x, y0) * model.prior[x];
    norm += pi[x];
  }
  if (norm <= 0.0) throw ImpossibleObservation("initial observation " + std::to_string(y0) + " has zero probability");
  for (double& p : pi) p /= norm;
  return Belief(std::move(pi));
}

std::vector<double> predict_state(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  const std::size_t nx = model.num_states;
  std::vector<double> pred(nx, 0.0);
  for (std::size_t from = 0; from < nx; ++from) {
    const double w = belief[from];
    if (w == 0.0) continue;
    const auto row = model.trans_row(u, from);
    for (std::size_t to = 0; to < nx; ++to) pred[to] += w * row[to];
  }
  return pred;
}

Belief filter_update(const PomdpModel& model, const Belief& belief, ActionIndex u, ObsIndex y) {
  if (u >= model.num_actions) throw ValidationError("action index out of range");
  if (y >= model.num_obs) throw ValidationError("observation index out of range");
  std::vector<double> next = predict_state(model, belief, u);
  double norm = 0.0;
  for (std::size_t x = 0; x < model.num_states; ++x) {
    next[x] *= model.obs(u, x, y);
    norm += next[x];
  }
  if (norm <= 0.0) {
    throw ImpossibleObservation("observation " + std::to_string(y) + " after action " + std::to_string(u) +
                                " has zero probability under the belief");
  }
  for (double& p : next) p /= norm;
  return Belief(std::move(next));
}

std::vector<double> predict_joint(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  const std::size_t nx = model.num_states;
  std::vector<double> joint(nx * nx, 0.0);
  for (std::size_t from = 0; from < nx; ++from) {
    const auto row = model.trans_row(u, from);
    for (std::size_t to = 0; to < nx; ++to) joint[from * nx + to] = row[to] * belief[from];
  }
  return joint;
}

std::vector<double> obs_predictive(const PomdpModel& model, const Belief& belief, ActionIndex u) {
  const std::vector<double> pred = predict_state(model, belief, u);
  std::vector<double> py(model.num_obs, 0.0);
  for (std::size_t x = 0; x < model.num_states; ++x) {
    if (pred[x] == 0.0) continue;
    const auto row = model.obs_row(u, x);
    for (std::size_t y = 0; y < model.num_obs; ++y) py[y] += pred[x] * row[y];
  }
  return py;
}

std::vector<double> initial_obs_distribution(const PomdpModel& model) {
  std::vector<double> py(model.num_obs, 0.0);
  for (std::size_t x = 0; x < model.num_states; ++x) {
    for (std::size_t y = 0; y < model.num_obs; ++y) py[y] += model.prior[x] * model.obs0(x, y);
  }
  return py;
}

std::pair<StateIndex, ObsIndex> sample_step(const PomdpModel& model, StateIndex x, ActionIndex u, Rng& rng) {
  const StateIndex next = sample_categorical(model.trans_row(u, x), rng);
  const ObsIndex y = sample_categorical(model.obs_row(u, next), rng);
  return {next, y};
}

std::pair<StateIndex, ObsIndex> sample_initial(const PomdpModel& model, Rng& rng) {
  const StateIndex x0 = sample_categorical(model.prior, rng);
  const ObsIndex y0 =
      sample_categorical({model.initial_observation.data() + x0 * model.num_obs, model.num_obs}, rng);
  return {x0, y0};
}

void validate_record(const PomdpModel& model, const TrajectoryRecord& r, double tol) {
  const std::size_t T = r.actions.size();
  if (r.observations.size() != T + 1 || r.beliefs.size() != T + 1 || r.states.size() != T + 1) {
    throw DimensionMismatch("trajectory record lengths inconsistent with horizon " + std::to_string(T));
  }
  auto close = [tol](const Belief& a, const Belief& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > tol) return false;
    }
    return true;
  };
  if (!close(r.beliefs[0], initial_belief(model, r.observations[0]))) {
    throw ValidationError("record belief 0 does not match the initial filter");
  }
  for (std::size_t k = 0; k < T; ++k) {
    if (!close(r.beliefs[k + 1], filter_update(model, r.beliefs[k], r.actions[k], r.observations[k + 1]))) {
      throw ValidationError("record belief " + std::to_string(k + 1) + " does not match the filter recursion");
    }
  }
}

}  // namespace erpomdp
