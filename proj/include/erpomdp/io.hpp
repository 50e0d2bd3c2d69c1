#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "erpomdp/entropy.hpp"
#include "erpomdp/harness.hpp"
#include "erpomdp/model.hpp"
#include "erpomdp/solver.hpp"

#include "json.hpp"

namespace erpomdp {

using Json = nlohmann::json;

// Model documents ---------------------------------------------------------

Json model_to_json(const PomdpModel& model);
/// Parses and validates; rows within kRowSumTolerance are renormalized.
PomdpModel model_from_json(const Json& doc);
PomdpModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const PomdpModel& model);

GridSpec grid_spec_from_json(const Json& doc);
Json grid_spec_to_json(const GridSpec& spec);
GridSpec load_grid_spec(const std::filesystem::path& path);

// Base points: one belief per line, whitespace separated ----------------------

std::vector<Belief> read_base_points(std::istream& in);
std::vector<Belief> load_base_points(const std::filesystem::path& path);
void write_base_points(std::ostream& out, const std::vector<Belief>& points);

// Alpha vectors: "N_x count" header, then "action w_1 ... w_N" per line -------

void write_alpha_vectors(std::ostream& out, const std::vector<AlphaVector>& vectors);
/// Lines starting with '#' are skipped.
std::vector<AlphaVector> read_alpha_vectors(std::istream& in);

/// Flattens per-action planes in action order.
std::vector<AlphaVector> flatten_planes(const CostPlanes& planes);
CostPlanes group_planes(const std::vector<AlphaVector>& vectors, std::size_t num_actions);

// Policies: '# key: value' metadata lines followed by an alpha-vector block ---

using Metadata = std::map<std::string, std::string>;

void write_policy(std::ostream& out, const AlphaPolicy& policy, const Metadata& extra = {});
void save_policy(const std::filesystem::path& path, const AlphaPolicy& policy, const Metadata& extra = {});
AlphaPolicy read_policy(std::istream& in, Metadata* metadata = nullptr);
AlphaPolicy load_policy(const std::filesystem::path& path, Metadata* metadata = nullptr);

Json config_to_json(const SolverConfig& config);
SolverConfig config_from_json(const Json& doc);

/// Decimal text with 17 significant digits (round-trips doubles exactly).
std::string format_exact(double v);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

}  // namespace erpomdp
