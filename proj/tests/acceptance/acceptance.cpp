// Acceptance suite. Usage: acceptance <criterion 1-7>
// Prints one PASS/FAIL line per checked item and exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "erpomdp/entropy.hpp"
#include "erpomdp/estimation.hpp"
#include "erpomdp/harness.hpp"
#include "erpomdp/io.hpp"
#include "erpomdp/solver.hpp"
#include "oracles.hpp"

using namespace erpomdp;

namespace {

// Tolerances.
constexpr double kIdentityTol = 1e-9;
constexpr double kConcavitySlack = 1e-9;
constexpr double kUpperBoundSlack = 1e-9;
constexpr double kGradientRelTol = 1e-6;
constexpr double kValueTol = 1e-6;
constexpr double kViterbiRelTol = 1e-12;
constexpr double kSpeedupRatio = 100.0;
constexpr std::size_t kGridBeliefs = 1000;

// Budgets in seconds.
constexpr double kBudget1 = 60, kBudget2 = 60, kBudget3 = 120, kBudget4 = 300, kBudget5 = 120, kBudget6 = 7200,
                 kBudget7 = 60;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(bool pass, const std::string& id, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void check_budget(const std::string& id, Clock::time_point start, double budget) {
  const double t = seconds_since(start);
  report(t <= budget, id + " runtime", fmt("%.1f s (budget %.0f s)", t, budget));
}

void identities() {
  const auto start = Clock::now();
  Rng rng(1001);
  double split = 0, joint = 0, smoother = 0, io = 0;
  for (int i = 0; i < 200; ++i) {
    const PomdpModel m = oracle::random_model(rng, 2, 2, 2, 0.9, 1.0, 1.0);
    const bool deterministic = i >= 100;
    const PolicyTable table = random_policy_table(m, 2, deterministic, rng);
    const ExactEntropies e = brute_force_entropies(m, table, 2);
    split = std::max(split, std::abs(e.causal_split_residual()));
    joint = std::max(joint, std::abs(e.joint_decomposition_residual()));
    io = std::max(io, std::abs(e.causal_obs_belief_residual()));
    if (deterministic) smoother = std::max(smoother, std::abs(e.smoother_belief_residual()));
  }
  report(split <= kIdentityTol, "1 causal split of io entropy", fmt("max residual %.3e", split));
  report(joint <= kIdentityTol, "1 joint entropy decomposition", fmt("max residual %.3e", joint));
  report(smoother <= kIdentityTol, "1 smoother entropy belief form", fmt("max residual %.3e", smoother));
  report(io <= kIdentityTol, "1 causal observation entropy belief form", fmt("max residual %.3e", io));
  check_budget("1", start, kBudget1);
}

void concavity() {
  const auto start = Clock::now();
  Rng rng(2002);
  const double weights[] = {0.0, 0.5, 1.0, 2.0, 5.0};
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const std::size_t nx = 2 + static_cast<std::size_t>(i % 3);
    const PomdpModel m = oracle::random_model(rng, nx, 2, 3, 0.9, weights[i % 5], weights[(i / 5) % 5]);
    const Belief a = sample_simplex(nx, rng), b = sample_simplex(nx, rng);
    std::vector<double> mid(nx);
    for (std::size_t x = 0; x < nx; ++x) mid[x] = 0.5 * (a[x] + b[x]);
    const std::size_t u = i % 2;
    const double slack =
        stage_cost_G(m, Belief(mid), u) - 0.5 * (stage_cost_G(m, a, u) + stage_cost_G(m, b, u));
    worst = std::min(worst, slack);
  }
  report(worst >= -kConcavitySlack, "2 midpoint concavity", fmt("min G(mid) - mean(G) = %.3e over 1e4 tests", worst));
  check_budget("2", start, kBudget2);
}

void pwlc() {
  const auto start = Clock::now();
  Rng rng(3003);
  const PomdpModel m = oracle::random_model(rng, 3, 2, 3, 0.9, 1.0, 0.5);
  const PwlcApproximation approx = build_pwlc(m, default_base_points(3));
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const Belief b = sample_simplex(3, rng);
    for (std::size_t u = 0; u < 2; ++u) worst = std::min(worst, approx.evaluate(b, u) - stage_cost_G(m, b, u));
  }
  report(worst >= -kUpperBoundSlack, "3 PWLC upper bound", fmt("min Ghat - G = %.3e over 1e4 beliefs", worst));

  double grad = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double w[] = {0.0, 0.5, 1.0, 5.0};
    const PomdpModel g = oracle::random_model(rng, 3, 2, 3, 0.9, w[i % 4], w[(i / 4) % 4]);
    const Belief b = oracle::random_interior_belief(3, rng, 0.02);
    const std::size_t u = i % 2;
    const auto analytic = oracle::project_tangent(grad_G(g, b, u));
    const auto fd =
        oracle::tangent_fd([&](const std::vector<double>& p) { return oracle::stage_cost(g, p, u); }, b.vec());
    for (std::size_t x = 0; x < 3; ++x) {
      grad = std::max(grad, std::abs(analytic[x] - fd[x]) / std::max(1.0, std::abs(analytic[x])));
    }
  }
  report(grad <= kGradientRelTol, "3 gradient vs finite differences", fmt("max relative error %.3e", grad));

  const PomdpModel two = oracle::random_model(rng, 2, 2, 2, 0.9, 1.0, 1.0);
  std::vector<double> gaps;
  for (std::size_t count : {3, 11, 101}) {
    const PwlcApproximation a = build_pwlc(two, even_base_points_2state(count));
    gaps.push_back(std::max(oracle::max_gap_2state(two, a.planes, 0, 10000),
                            oracle::max_gap_2state(two, a.planes, 1, 10000)));
  }
  report(gaps[0] > gaps[1] && gaps[1] > gaps[2], "3 gap refinement 3 -> 11 -> 101",
         fmt("max gaps %.3e, %.3e, %.3e", gaps[0], gaps[1], gaps[2]));
  check_budget("3", start, kBudget3);
}

PomdpModel fully_observable(Rng& rng, std::size_t nx, std::size_t nu, double beta) {
  PomdpModel m = oracle::random_model(rng, nx, nu, nx, 0.9, beta, beta);
  std::fill(m.observation.begin(), m.observation.end(), 0.0);
  std::fill(m.initial_observation.begin(), m.initial_observation.end(), 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t u = 0; u < nu; ++u) m.obs(u, x, x) = 1.0;
    m.obs0(x, x) = 1.0;
  }
  return m;
}

/// Interior triangular lattice on the 3-simplex with the given resolution.
std::vector<Belief> lattice3(std::size_t n, double floor) {
  std::vector<Belief> out;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; i + j <= n; ++j) {
      const double k = static_cast<double>(n - i - j);
      const double s = 1.0 - 3.0 * floor;
      out.push_back(Belief({floor + s * static_cast<double>(i) / static_cast<double>(n),
                            floor + s * static_cast<double>(j) / static_cast<double>(n),
                            floor + s * k / static_cast<double>(n)}));
    }
  }
  return out;
}

void solver() {
  const auto start = Clock::now();
  SolverConfig tight;
  tight.seed = 4;
  tight.bellman_residual_tol = 1e-10;
  tight.max_iterations = 100000;
  tight.belief_set_size = 50;

  {
    const double g = 0.9;
    PomdpModel m = PomdpModel::zeros(1, 1, 1);
    m.trans(0, 0, 0) = m.obs(0, 0, 0) = m.obs0(0, 0) = m.prior[0] = 1.0;
    m.stage_cost = {1.0};
    m.discount = g;
    const double v = solve(m, linear_cost_planes(m), tight).value(Belief::uniform(1));
    report(std::abs(v - g / (1 - g)) <= kValueTol, "4(a) one-state value", fmt("V = %.12f, expected %.12f", v, g / (1 - g)));
  }

  {
    Rng rng(4004);
    double worst = 0.0;
    for (std::size_t nx : {2, 5}) {
      for (double beta : {0.0, 1.0}) {
        const PomdpModel m = fully_observable(rng, nx, 3, beta);
        const AlphaPolicy p = solve(m, linear_cost_planes(m), tight);
        const auto v = oracle::tabular_value_iteration(m, [&](std::size_t x, std::size_t u) {
          std::vector<double> row(m.transition.begin() + static_cast<std::ptrdiff_t>((u * nx + x) * nx),
                                  m.transition.begin() + static_cast<std::ptrdiff_t>((u * nx + x + 1) * nx));
          return (1 - m.discount) * m.terminal_cost[x] + m.discount * m.cost(x, u) +
                 m.discount * beta * oracle::entropy(row);
        });
        for (std::size_t x = 0; x < nx; ++x) worst = std::max(worst, std::abs(p.value(Belief::vertex(nx, x)) - v[x]));
      }
    }
    report(worst <= kValueTol, "4(b) fully observable vs tabular value iteration", fmt("max |V - V_mdp| = %.3e", worst));
  }

  {
    Rng rng(4005);
    const PomdpModel m = oracle::random_model(rng, 3, 2, 2, 0.8, 1.0, 1.0);
    const PwlcApproximation dense = build_pwlc(m, lattice3(30, 1e-3));
    double gap = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Belief b = sample_simplex(3, rng);
      for (std::size_t u = 0; u < 2; ++u) gap = std::max(gap, dense.evaluate(b, u) - stage_cost_G(m, b, u));
    }
    std::vector<Belief> probes;
    for (int i = 0; i < 100; ++i) probes.push_back(sample_simplex(3, rng));
    SolverConfig c = tight;
    c.belief_set_size = 1500;
    std::vector<Belief> seeds = initial_beliefs(m);
    seeds.insert(seeds.end(), probes.begin(), probes.end());
    std::vector<Belief> set = expand_beliefs(m, seeds, c);
    for (const auto& b : lattice3(40, 0.0)) set.push_back(b);
    const AlphaPolicy lin = solve_on_beliefs(m, linear_cost_planes(m), set, c);
    const AlphaPolicy pw = solve_on_beliefs(m, dense.planes, set, c);
    double worst = 0.0;
    for (const auto& b : probes) {
      // The linear cost differs from G by the potential beta H(pi), so V_G = V_L + beta H(pi).
      const double shaped = lin.value(b) + m.beta * belief_entropy(b);
      worst = std::max(worst, std::abs(pw.value(b) - shaped));
    }
    const double allowed = gap / (1.0 - m.discount) + kValueTol;
    report(worst <= allowed, "4(c) linear vs dense PWLC values",
           fmt("max |V_pwlc - (V_lin + beta H)| = %.3e, allowed %.3e (gap %.3e)", worst, allowed, gap));
  }
  check_budget("4", start, kBudget4);
}

void discount_equivalence() {
  const auto start = Clock::now();
  Rng rng(5005);
  const PomdpModel m = oracle::random_model(rng, 2, 2, 2, 0.5, 1.0, 0.5);
  AlphaPolicy p;
  p.vectors = {{{0.0, 1.0}, 0, ""}, {{1.0, 0.0}, 1, ""}};
  const DiscountCheck d = geometric_discount_check(m, p, 40, 100000, 5);
  report(d.agree(), "5 geometric vs discounted cost",
         fmt("geometric %.6f, discounted %.6f, tolerance %.3e", d.geometric.mean, d.discounted.mean, d.tolerance));
  report(d.truncation_bound <= std::pow(2.0, -40) * stage_cost_bound(m) / (1 - m.discount) * (1 + 1e-12),
         "5 truncation bound scale", fmt("bound %.3e", d.truncation_bound));
  check_budget("5", start, kBudget5);
}

struct GridRun {
  const char* label;
  double beta, lambda;
  bool linear;
  CriteriaReport report;
  double solve_seconds = 0.0;
};

void gridworld() {
  const auto start = Clock::now();
  const GridSpec spec = load_grid_spec(std::string(ERPOMDP_DATA_DIR) + "/maze12.json");
  std::vector<GridRun> runs{{"(0,0)", 0, 0, false, {}}, {"(1,0)", 1, 0, false, {}}, {"(0,1)", 0, 1, false, {}},
                            {"(1,1)", 1, 1, true, {}}};
  const PomdpModel eval = build_gridworld(spec);
  SolverConfig config;
  config.seed = 1;
  config.belief_set_size = kGridBeliefs;
  for (auto& r : runs) {
    const PomdpModel m = build_gridworld(spec, GridParams{0.99, r.beta, r.lambda});
    const auto t = Clock::now();
    const CostPlanes planes = r.linear ? linear_cost_planes(m) : build_pwlc(m, default_base_points(144)).planes;
    const AlphaPolicy policy = solve(m, planes, config);
    r.solve_seconds = seconds_since(t);
    r.report = monte_carlo(eval, policy, 1000, HorizonSpec{false, 100}, 7);
    std::printf("  %s %s solve %.1f s, %zu sweeps, residual %.2e, converged %d; goal %.3f io %.3f smoother %.3f "
                "joint %.3f\n",
                r.label, r.linear ? "linear" : "pwlc", r.solve_seconds, policy.iterations, policy.residual,
                policy.converged ? 1 : 0, r.report.goal_cost.mean,
                r.report.io_entropy.mean, r.report.smoother_entropy.mean, r.report.joint_entropy.mean);
  }
  const auto& b00 = runs[0].report;
  const auto& b10 = runs[1].report;
  const auto& b01 = runs[2].report;
  const auto& b11 = runs[3].report;

  const bool a = b00.goal_cost.mean < b10.goal_cost.mean && b00.goal_cost.mean < b01.goal_cost.mean &&
                 b00.goal_cost.mean < b11.goal_cost.mean;
  report(a, "6(a) (0,0) has the lowest goal cost",
         fmt("(0,0) %.3f vs min other %.3f", b00.goal_cost.mean,
             std::min({b10.goal_cost.mean, b01.goal_cost.mean, b11.goal_cost.mean})));

  const double io_reg = std::max(b01.io_entropy.mean, b11.io_entropy.mean);
  const double io_unreg = std::min(b00.io_entropy.mean, b10.io_entropy.mean);
  report(io_reg < io_unreg, "6(b) io entropy lower with lambda = 1",
         fmt("max over lambda=1 %.3f vs min over lambda=0 %.3f", io_reg, io_unreg));

  report(b10.smoother_entropy.mean <= b00.smoother_entropy.mean, "6(c) smoother entropy (1,0) <= (0,0)",
         fmt("%.4f vs %.4f", b10.smoother_entropy.mean, b00.smoother_entropy.mean));

  const bool d = b11.joint_entropy.mean < b00.joint_entropy.mean && b11.joint_entropy.mean < b10.joint_entropy.mean &&
                 b11.joint_entropy.mean < b01.joint_entropy.mean;
  report(d, "6(d) (1,1) has the lowest joint entropy",
         fmt("(1,1) %.3f vs min other %.3f", b11.joint_entropy.mean,
             std::min({b00.joint_entropy.mean, b10.joint_entropy.mean, b01.joint_entropy.mean})));

  std::size_t mismatched = 0;
  for (const auto& r : runs) {
    for (const auto& row : r.report.rows) {
      if (row.ledger.joint_sum != row.ledger.smoother_sum + row.ledger.io_sum) ++mismatched;
    }
  }
  report(mismatched == 0, "6(e) per-episode joint = smoother + io", fmt("%.0f mismatching episodes", double(mismatched)));

  const double ratio = runs[1].solve_seconds / runs[3].solve_seconds;
  report(ratio >= kSpeedupRatio, "6(f) linear (1,1) at least 100x faster than PWLC (1,0)",
         fmt("PWLC %.1f s, linear %.1f s, ratio %.2f", runs[1].solve_seconds, runs[3].solve_seconds, ratio));
  check_budget("6", start, kBudget6);
}

void viterbi() {
  const auto start = Clock::now();
  Rng rng(7007);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PomdpModel m = oracle::random_model(rng, 3, 2, 3);
    std::uniform_int_distribution<std::size_t> pu(0, 1), py(0, 2);
    std::vector<std::size_t> ys{py(rng)}, us;
    for (int k = 0; k < 4; ++k) {
      us.push_back(pu(rng));
      ys.push_back(py(rng));
    }
    const double best = oracle::best_path_probability(m, ys, us);
    const double got = oracle::path_probability(m, viterbi_map(m, ys, us), ys, us);
    worst = std::max(worst, std::abs(got - best) / best);
  }
  report(worst <= kViterbiRelTol, "7 Viterbi vs exhaustive search", fmt("max relative probability gap %.3e", worst));
  check_budget("7", start, kBudget7);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void()>> criteria{identities, concavity, pwlc, solver, discount_equivalence,
                                                    gridworld, viterbi};
  std::vector<int> which;
  if (argc < 2) {
    for (int i = 1; i <= 7; ++i) which.push_back(i);
  } else {
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  }
  for (int c : which) {
    if (c < 1 || c > 7) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    try {
      criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      report(false, std::to_string(c), std::string("exception: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
