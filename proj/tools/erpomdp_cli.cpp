// erpomdp: validate models, build cost planes, solve, simulate and run the
// exact entropy oracle.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "erpomdp/entropy.hpp"
#include "erpomdp/errors.hpp"
#include "erpomdp/estimation.hpp"
#include "erpomdp/harness.hpp"
#include "erpomdp/io.hpp"
#include "erpomdp/model.hpp"
#include "erpomdp/solver.hpp"

#ifndef ERPOMDP_VERSION
#define ERPOMDP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace erpomdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitTooLarge = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Sidecar `<output>.manifest.json`.
class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) {
    doc_["command"] = std::move(command);
    doc_["argv"] = std::vector<std::string>(argv, argv + argc);
    doc_["version"] = ERPOMDP_VERSION;
    doc_["inputs"] = Json::object();
    doc_["outputs"] = Json::array();
    doc_["timings_seconds"] = Json::object();
  }

  void input(const std::string& role, const fs::path& path) {
    doc_["inputs"][role] = Json{{"path", path.string()}, {"sha256", file_sha256(path)}};
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
  void set(const std::string& key, Json value) { doc_[key] = std::move(value); }
  void timing(const std::string& key, double s) { doc_["timings_seconds"][key] = s; }

  static fs::path path_for(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

  void write(const fs::path& output) const {
    std::ofstream out(path_for(output));
    if (!out) throw Error("cannot write manifest for '" + output.string() + "'");
    out << doc_.dump(2) << "\n";
  }

 private:
  Json doc_;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

// validate ------------------------------------------------------------------

struct ValidateArgs {
  std::string model;
  bool json = false;
};

int cmd_validate(const ValidateArgs& a) {
  try {
    const PomdpModel m = load_model(a.model);
    if (a.json) {
      std::cout << Json{{"valid", true}, {"num_states", m.num_states}, {"num_actions", m.num_actions},
                        {"num_obs", m.num_obs}, {"sha256", file_sha256(a.model)}}
                       .dump()
                << "\n";
    } else {
      std::cout << "ok: " << a.model << " (N_x=" << m.num_states << ", N_u=" << m.num_actions
                << ", N_y=" << m.num_obs << ", discount=" << m.discount << ", beta=" << m.beta
                << ", lambda=" << m.lambda << ")\n";
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    if (a.json) {
      std::cout << Json{{"valid", false}, {"error", e.what()}}.dump() << "\n";
    }
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitValidation;
  }
}

// grid ----------------------------------------------------------------------

struct GridArgs {
  std::string spec;
  double discount = 0.99;
  double beta = 0.0;
  double lambda = 0.0;
  std::string output;
};

int cmd_grid(const GridArgs& a, int argc, char** argv) {
  const GridSpec spec = load_grid_spec(a.spec);
  const PomdpModel m = build_gridworld(spec, GridParams{a.discount, a.beta, a.lambda});
  save_model(a.output, m);
  Manifest man("grid", argc, argv);
  man.input("grid_spec", a.spec);
  man.output(a.output);
  man.write(a.output);
  std::cout << "wrote " << a.output << " (N_x=" << m.num_states << ")\n";
  return kExitOk;
}

// planes --------------------------------------------------------------------

struct PlanesArgs {
  std::string model;
  std::string mode = "pwlc";
  std::string base_points;
  std::string output;
};

CostPlanes make_planes(const PomdpModel& m, const std::string& mode, const std::string& base_points_path,
                       std::size_t* base_point_count) {
  if (mode == "linear") return linear_cost_planes(m);
  std::vector<Belief> xi =
      base_points_path.empty() ? default_base_points(m.num_states) : load_base_points(base_points_path);
  for (const auto& b : xi) {
    if (b.size() != m.num_states) throw DimensionMismatch("base point length differs from num_states");
  }
  if (base_point_count != nullptr) *base_point_count = xi.size();
  return build_pwlc(m, xi).planes;
}

int cmd_planes(const PlanesArgs& a, int argc, char** argv) {
  const PomdpModel m = load_model(a.model);
  std::size_t xi_count = 0;
  const CostPlanes planes = make_planes(m, a.mode, a.base_points, &xi_count);
  auto out = open_output(a.output);
  write_alpha_vectors(out, flatten_planes(planes));
  Manifest man("planes", argc, argv);
  man.input("model", a.model);
  if (!a.base_points.empty()) man.input("base_points", a.base_points);
  man.set("mode", a.mode);
  if (a.mode == "pwlc") man.set("base_point_count", xi_count);
  man.output(a.output);
  man.write(a.output);
  return kExitOk;
}

// solve ---------------------------------------------------------------------

struct SolveArgs {
  std::string model;
  std::string mode = "pwlc";
  std::string base_points;
  std::string planes;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> belief_set_size;
  std::optional<std::size_t> rounds;
  std::optional<double> tol;
  std::optional<std::size_t> max_iterations;
  std::string init;
  std::size_t threads = 1;
  bool verbose = false;
  std::string output;
};

int cmd_solve(const SolveArgs& a, int argc, char** argv) {
  const PomdpModel m = load_model(a.model);
  SolverConfig cfg = a.config.empty() ? SolverConfig{} : config_from_json(Json::parse(read_file(a.config)));
  cfg.seed = *a.seed;
  if (a.belief_set_size) cfg.belief_set_size = *a.belief_set_size;
  if (a.rounds) cfg.expansion_rounds = *a.rounds;
  if (a.tol) cfg.bellman_residual_tol = *a.tol;
  if (a.max_iterations) cfg.max_iterations = *a.max_iterations;
  if (a.init == "zero") cfg.init = ValueInit::Zero;
  if (a.init == "upper_bound") cfg.init = ValueInit::UpperBound;
  cfg.threads = a.threads;
  cfg.validate();

  Manifest man("solve", argc, argv);
  man.input("model", a.model);

  const auto t_planes = Clock::now();
  CostPlanes planes;
  std::size_t xi_count = 0;
  if (!a.planes.empty()) {
    std::ifstream in(a.planes);
    if (!in) throw Error("cannot open '" + a.planes + "'");
    planes = group_planes(read_alpha_vectors(in), m.num_actions);
    man.input("planes", a.planes);
    man.set("mode", "planes-file");
  } else {
    planes = make_planes(m, a.mode, a.base_points, &xi_count);
    if (!a.base_points.empty()) man.input("base_points", a.base_points);
    man.set("mode", a.mode);
    if (a.mode == "pwlc") man.set("base_point_count", xi_count);
  }
  for (const auto& set : planes) {
    for (const auto& v : set) {
      if (v.weights.size() != m.num_states) throw DimensionMismatch("cost plane length differs from num_states");
    }
  }
  const double planes_time = seconds_since(t_planes);

  SweepObserver observer;
  if (a.verbose) {
    observer = [](const SweepInfo& s, const std::vector<Belief>&, const AlphaPolicy&) {
      std::fprintf(stderr, "round %zu iter %zu residual %.3e vectors %zu beliefs %zu\n", s.round, s.iteration,
                   s.residual, s.vector_count, s.belief_count);
    };
  }
  const auto t_solve = Clock::now();
  const AlphaPolicy policy = solve(m, planes, cfg, observer);
  const double solve_time = seconds_since(t_solve);

  Metadata meta{{"model_sha256", file_sha256(a.model)},
                {"manifest", Manifest::path_for(a.output).filename().string()}};
  save_policy(a.output, policy, meta);

  man.set("config", config_to_json(cfg));
  man.set("seed", cfg.seed);
  man.set("threads", cfg.threads);
  man.set("iterations", policy.iterations);
  man.set("residual", policy.residual);
  man.set("converged", policy.converged);
  man.timing("cost_planes", planes_time);
  man.timing("solve", solve_time);
  man.output(a.output);
  man.write(a.output);

  std::printf("iterations %zu\nresidual %.6e\nvectors %zu\nbeliefs %zu\nsolve_time_seconds %.3f\n",
              policy.iterations, policy.residual, policy.vectors.size(), policy.belief_count, solve_time);
  if (!policy.converged) {
    std::fprintf(stderr, "warning: residual %.3e above tolerance %.3e after %zu iterations\n", policy.residual,
                 cfg.bellman_residual_tol, policy.iterations);
    return kExitNotConverged;
  }
  return kExitOk;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string model;
  std::vector<std::string> policies;  // path or label=path
  std::size_t episodes = 1000;
  std::string horizon = "fixed:100";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string report;
  std::string episodes_csv;
};

HorizonSpec parse_horizon(const std::string& s) {
  HorizonSpec h;
  if (s == "geometric") {
    h.geometric = true;
    return h;
  }
  if (s.rfind("fixed:", 0) == 0) {
    const std::string n = s.substr(6);
    if (!n.empty() && n.find_first_not_of("0123456789") == std::string::npos) {
      h.fixed = std::stoull(n);
      return h;
    }
  }
  throw ValidationError("--horizon must be 'fixed:T' or 'geometric', got '" + s + "'");
}

std::optional<double> recorded_solve_time(const fs::path& policy_path) {
  const fs::path mpath = Manifest::path_for(policy_path);
  if (!fs::exists(mpath)) return std::nullopt;
  const Json doc = Json::parse(read_file(mpath), nullptr, false);
  if (doc.is_discarded() || !doc.contains("timings_seconds") || !doc["timings_seconds"].contains("solve")) {
    return std::nullopt;
  }
  return doc["timings_seconds"]["solve"].get<double>();
}

void write_report_row(std::ostream& out, const std::string& label, const char* criterion, const Estimate& e,
                      const char* unit) {
  out << label << "," << criterion << "," << format_exact(e.mean) << "," << format_exact(e.std_error) << "," << unit
      << "\n";
}

int cmd_simulate(const SimulateArgs& a, int argc, char** argv) {
  const PomdpModel m = load_model(a.model);
  const HorizonSpec horizon = parse_horizon(a.horizon);
  if (a.episodes == 0) throw ValidationError("--episodes must be >= 1");

  Manifest man("simulate", argc, argv);
  man.input("model", a.model);
  man.set("seed", *a.seed);
  man.set("episodes", a.episodes);
  man.set("horizon", a.horizon);
  man.set("threads", a.threads);

  auto report = open_output(a.report);
  report << "policy,criterion,mean,stderr,unit\n";
  std::ofstream episodes;
  if (!a.episodes_csv.empty()) {
    episodes = open_output(a.episodes_csv);
    episodes << "policy,episode,horizon,goal_cost,io_entropy,smoother_entropy,joint_entropy,belief_entropy_sum,"
                "map_error,path\n";
  }

  for (std::size_t i = 0; i < a.policies.size(); ++i) {
    std::string label = "policy" + std::to_string(i);
    std::string path = a.policies[i];
    if (const auto eq = path.find('='); eq != std::string::npos) {
      label = path.substr(0, eq);
      path = path.substr(eq + 1);
    }
    const AlphaPolicy policy = load_policy(path);
    if (policy.num_states() != m.num_states) {
      throw DimensionMismatch("policy '" + path + "' has N_x=" + std::to_string(policy.num_states()) +
                              " but the model has N_x=" + std::to_string(m.num_states));
    }
    for (const auto& v : policy.vectors) {
      if (v.action >= m.num_actions) throw DimensionMismatch("policy action index outside the model's actions");
    }
    man.input("policy:" + label, path);

    const auto t0 = Clock::now();
    const CriteriaReport r = monte_carlo(m, policy, a.episodes, horizon, *a.seed, a.threads);
    man.timing("simulate:" + label, seconds_since(t0));

    write_report_row(report, label, "goal_cost", r.goal_cost, "cost");
    write_report_row(report, label, "io_entropy", r.io_entropy, "bits");
    write_report_row(report, label, "smoother_entropy", r.smoother_entropy, "bits");
    write_report_row(report, label, "joint_entropy", r.joint_entropy, "bits");
    write_report_row(report, label, "belief_entropy_sum", r.belief_entropy_sum, "bits");
    write_report_row(report, label, "map_error_prob", r.map_error_prob, "probability");
    if (const auto t = recorded_solve_time(path)) {
      write_report_row(report, label, "solve_time_seconds", Estimate{*t, 0.0}, "seconds");
    }

    if (episodes.is_open()) {
      for (const EpisodeRow& row : r.rows) {
        episodes << label << "," << row.episode << "," << row.horizon << "," << format_exact(row.goal_cost) << ","
                 << format_exact(row.ledger.io_sum) << "," << format_exact(row.ledger.smoother_sum) << ","
                 << format_exact(row.ledger.joint_sum) << "," << format_exact(row.ledger.belief_entropy_sum) << ","
                 << (row.map_error ? 1 : 0) << ",";
        for (std::size_t k = 0; k < row.path.size(); ++k) episodes << (k ? " " : "") << row.path[k];
        episodes << "\n";
      }
    }
  }

  man.output(a.report);
  if (!a.episodes_csv.empty()) man.output(a.episodes_csv);
  man.write(a.report);
  return kExitOk;
}

// oracle --------------------------------------------------------------------

struct OracleArgs {
  std::string model;
  std::string policy_table;
  std::size_t horizon = 2;
  bool json = false;
};

/// Either {"constant": pmf} or {"entries": [{"observations", "actions", "pmf"}]}.
PolicyTable load_policy_table(const PomdpModel& m, const fs::path& path, std::size_t horizon) {
  const Json doc = Json::parse(read_file(path));
  if (doc.contains("constant")) {
    const auto pmf = doc["constant"].get<std::vector<double>>();
    if (pmf.size() != m.num_actions) throw DimensionMismatch("constant policy pmf length differs from num_actions");
    return PolicyTable::from_rule(m, horizon, [&](const InfoState&) { return pmf; });
  }
  if (!doc.contains("entries")) throw ValidationError("missing field 'entries'");
  PolicyTable table;
  for (const Json& e : doc["entries"]) {
    InfoState s{e.at("observations").get<std::vector<ObsIndex>>(), e.at("actions").get<std::vector<ActionIndex>>()};
    auto pmf = e.at("pmf").get<std::vector<double>>();
    if (pmf.size() != m.num_actions) throw DimensionMismatch("policy pmf length differs from num_actions");
    table.set(std::move(s), std::move(pmf));
  }
  return table;
}

int cmd_oracle(const OracleArgs& a) {
  const PomdpModel m = load_model(a.model);
  check_enumeration_size(m, a.horizon);
  const PolicyTable table = load_policy_table(m, a.policy_table, a.horizon);
  const ExactEntropies e = brute_force_entropies(m, table, a.horizon);
  const Json doc{{"unit", "bits"},
                 {"horizon", a.horizon},
                 {"smoother", e.smoother},
                 {"io", e.io},
                 {"joint", e.joint},
                 {"causal_obs", e.causal_obs},
                 {"causal_control", e.causal_control},
                 {"initial_joint", e.initial_joint},
                 {"initial_obs", e.initial_obs},
                 {"residuals",
                  {{"io_causal_split", e.causal_split_residual()},
                   {"joint_decomposition", e.joint_decomposition_residual()},
                   {"smoother_belief_form", e.smoother_belief_residual()},
                   {"causal_obs_belief_form", e.causal_obs_belief_residual()}}}};
  if (a.json) {
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
  }
  std::printf("smoother        %.12f bits\n", e.smoother);
  std::printf("io              %.12f bits\n", e.io);
  std::printf("joint           %.12f bits\n", e.joint);
  std::printf("causal_obs      %.12f bits\n", e.causal_obs);
  std::printf("causal_control  %.12f bits\n", e.causal_control);
  std::printf("residual io = causal_obs + causal_control          %.3e\n", e.causal_split_residual());
  std::printf("residual joint = H(X0,Y0) + causal_control + E c~  %.3e\n", e.joint_decomposition_residual());
  std::printf("residual smoother = E[G1(pi_T) + sum G2]           %.3e\n", e.smoother_belief_residual());
  std::printf("residual causal_obs = H(Y0) + E[sum G3]            %.3e\n", e.causal_obs_belief_residual());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-regularized POMDP toolkit"};
  app.set_version_flag("--version", ERPOMDP_VERSION);
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a model file");
  validate->add_option("model", va.model, "Model JSON")->required()->check(CLI::ExistingFile);
  validate->add_flag("--json", va.json, "Machine-readable output");

  GridArgs ga;
  auto* grid = app.add_subcommand("grid", "Build a grid-world model from a maze file");
  grid->add_option("spec", ga.spec, "Grid spec JSON")->required()->check(CLI::ExistingFile);
  grid->add_option("--discount", ga.discount, "Geometric-horizon parameter")->capture_default_str();
  grid->add_option("--beta", ga.beta, "Smoother entropy weight")->capture_default_str();
  grid->add_option("--lambda", ga.lambda, "Input-output entropy weight")->capture_default_str();
  grid->add_option("-o,--output", ga.output, "Model JSON to write")->required();

  PlanesArgs pa;
  auto* planes = app.add_subcommand("planes", "Write the cost hyperplanes of a model");
  planes->add_option("model", pa.model, "Model JSON")->required()->check(CLI::ExistingFile);
  planes->add_option("--mode", pa.mode, "pwlc or linear")->check(CLI::IsMember({"pwlc", "linear"}))->capture_default_str();
  planes->add_option("--base-points", pa.base_points, "Base-point file (pwlc)")->check(CLI::ExistingFile);
  planes->add_option("-o,--output", pa.output, "Alpha-vector file to write")->required();

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Point-based value iteration");
  solve_cmd->add_option("model", sa.model, "Model JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--mode", sa.mode, "pwlc or linear")->check(CLI::IsMember({"pwlc", "linear"}))->capture_default_str();
  solve_cmd->add_option("--base-points", sa.base_points, "Base-point file (pwlc)")->check(CLI::ExistingFile);
  auto* planes_opt = solve_cmd->add_option("--planes", sa.planes, "Precomputed cost-plane file")->check(CLI::ExistingFile);
  planes_opt->excludes(solve_cmd->get_option("--base-points"));
  solve_cmd->add_option("--config", sa.config, "Solver config JSON")->check(CLI::ExistingFile);
  solve_cmd->add_option("--seed", sa.seed, "Random seed")->required();
  solve_cmd->add_option("--belief-set-size", sa.belief_set_size, "Belief set cap");
  solve_cmd->add_option("--rounds", sa.rounds, "Belief expansion rounds");
  solve_cmd->add_option("--tol", sa.tol, "Bellman residual tolerance");
  solve_cmd->add_option("--max-iterations", sa.max_iterations, "Sweeps per round");
  solve_cmd->add_option("--init", sa.init, "Initial value function")->check(CLI::IsMember({"upper_bound", "zero"}));
  solve_cmd->add_option("--threads", sa.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  solve_cmd->add_flag("-v,--verbose", sa.verbose, "Print per-sweep diagnostics");
  solve_cmd->add_option("-o,--output", sa.output, "Policy file to write")->required();

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of policies");
  simulate->add_option("model", ma.model, "Model JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("-p,--policy", ma.policies, "Policy file, optionally label=path")->required();
  simulate->add_option("--episodes", ma.episodes, "Episodes per policy")->capture_default_str();
  simulate->add_option("--horizon", ma.horizon, "fixed:T or geometric")->capture_default_str();
  simulate->add_option("--seed", ma.seed, "Random seed")->required();
  simulate->add_option("--threads", ma.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--report", ma.report, "Criteria CSV to write")->required();
  simulate->add_option("--episodes-csv", ma.episodes_csv, "Per-episode CSV to write");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Exact trajectory entropies by enumeration");
  oracle->add_option("model", oa.model, "Model JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("--policy-table", oa.policy_table, "Policy table JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("--horizon", oa.horizon, "Horizon T")->capture_default_str();
  oracle->add_flag("--json", oa.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate) return cmd_validate(va);
    if (*grid) return cmd_grid(ga, argc, argv);
    if (*planes) return cmd_planes(pa, argc, argv);
    if (*solve_cmd) return cmd_solve(sa, argc, argv);
    if (*simulate) return cmd_simulate(ma, argc, argv);
    if (*oracle) return cmd_oracle(oa);
  } catch (const TooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTooLarge;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const WeightMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
