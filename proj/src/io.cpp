#include "erpomdp/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "erpomdp/errors.hpp"

namespace erpomdp {

namespace {

const Json& field(const Json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) throw ValidationError(std::string("missing field '") + name + "'");
  return doc.at(name);
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

std::size_t count(const Json& doc, const char* name) {
  const Json& v = field(doc, name);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ValidationError(std::string("field '") + name + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

/// Reads a nested array of the given shape into `out` (row-major).
void read_tensor(const Json& v, const std::vector<std::size_t>& shape, std::size_t depth, const std::string& where,
                 std::vector<double>& out) {
  if (depth == shape.size()) {
    out.push_back(number(v, where));
    return;
  }
  if (!v.is_array() || v.size() != shape[depth]) {
    throw DimensionMismatch(where + ": expected an array of length " + std::to_string(shape[depth]));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    read_tensor(v[i], shape, depth + 1, where + "[" + std::to_string(i) + "]", out);
  }
}

std::vector<double> tensor(const Json& doc, const char* name, const std::vector<std::size_t>& shape) {
  std::vector<double> out;
  read_tensor(field(doc, name), shape, 0, name, out);
  return out;
}

Json nest(const std::vector<double>& flat, const std::vector<std::size_t>& shape, std::size_t depth,
          std::size_t& pos) {
  if (depth == shape.size()) return flat[pos++];
  Json arr = Json::array();
  for (std::size_t i = 0; i < shape[depth]; ++i) arr.push_back(nest(flat, shape, depth + 1, pos));
  return arr;
}

Json nested(const std::vector<double>& flat, const std::vector<std::size_t>& shape) {
  std::size_t pos = 0;
  return nest(flat, shape, 0, pos);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ValidationError(where + ": cannot parse number '" + token + "'");
  }
  if (used != token.size()) throw ValidationError(where + ": cannot parse number '" + token + "'");
  return v;
}

}  // namespace

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json model_to_json(const PomdpModel& m) {
  const std::size_t nx = m.num_states, nu = m.num_actions, ny = m.num_obs;
  Json doc;
  doc["num_states"] = nx;
  doc["num_actions"] = nu;
  doc["num_obs"] = ny;
  doc["transition"] = nested(m.transition, {nu, nx, nx});
  doc["observation"] = nested(m.observation, {nu, nx, ny});
  doc["initial_observation"] = nested(m.initial_observation, {nx, ny});
  doc["prior"] = m.prior;
  doc["stage_cost"] = nested(m.stage_cost, {nx, nu});
  doc["terminal_cost"] = m.terminal_cost;
  doc["discount"] = m.discount;
  doc["beta"] = m.beta;
  doc["lambda"] = m.lambda;
  return doc;
}

PomdpModel model_from_json(const Json& doc) {
  PomdpModel m;
  m.num_states = count(doc, "num_states");
  m.num_actions = count(doc, "num_actions");
  m.num_obs = count(doc, "num_obs");
  const std::size_t nx = m.num_states, nu = m.num_actions, ny = m.num_obs;
  m.transition = tensor(doc, "transition", {nu, nx, nx});
  m.observation = tensor(doc, "observation", {nu, nx, ny});
  m.initial_observation = tensor(doc, "initial_observation", {nx, ny});
  m.prior = tensor(doc, "prior", {nx});
  m.stage_cost = tensor(doc, "stage_cost", {nx, nu});
  m.terminal_cost = tensor(doc, "terminal_cost", {nx});
  m.discount = number(field(doc, "discount"), "discount");
  m.beta = number(field(doc, "beta"), "beta");
  m.lambda = number(field(doc, "lambda"), "lambda");
  validate_model(m);
  renormalize_rows(m);
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

Json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

PomdpModel load_model(const std::filesystem::path& path) { return model_from_json(parse_json_file(path)); }

void save_model(const std::filesystem::path& path, const PomdpModel& model) {
  write_text(path, model_to_json(model).dump(1) + "\n");
}

GridSpec grid_spec_from_json(const Json& doc) {
  GridSpec spec;
  spec.width = count(doc, "width");
  spec.height = count(doc, "height");
  const Json& goal = field(doc, "goal");
  if (!goal.is_number_integer() || goal.get<long long>() < 0) throw ValidationError("field 'goal' must be a cell index");
  spec.goal = goal.get<std::size_t>();
  spec.false_wall_prob = number(field(doc, "false_wall_prob"), "false_wall_prob");
  spec.miss_prob = number(field(doc, "miss_prob"), "miss_prob");
  const Json& walls = field(doc, "walls");
  if (!walls.is_array()) throw ValidationError("field 'walls' must be an array of [cell, direction] pairs");
  for (const Json& w : walls) {
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !w[1].is_string() || w[0].get<long long>() < 0) {
      throw ValidationError("invalid wall reference: " + w.dump());
    }
    spec.walls.emplace_back(w[0].get<std::size_t>(), parse_direction(w[1].get<std::string>()));
  }
  // Surface bad references at load time rather than at build time.
  (void)blocked_edges(spec);
  if (spec.goal >= spec.width * spec.height) throw ValidationError("goal cell outside the grid");
  return spec;
}

Json grid_spec_to_json(const GridSpec& spec) {
  Json doc;
  doc["width"] = spec.width;
  doc["height"] = spec.height;
  doc["goal"] = spec.goal;
  doc["false_wall_prob"] = spec.false_wall_prob;
  doc["miss_prob"] = spec.miss_prob;
  Json walls = Json::array();
  for (const auto& [cell, dir] : spec.walls) walls.push_back(Json::array({cell, direction_name(dir)}));
  doc["walls"] = walls;
  return doc;
}

GridSpec load_grid_spec(const std::filesystem::path& path) { return grid_spec_from_json(parse_json_file(path)); }

std::vector<Belief> read_base_points(std::istream& in) {
  std::vector<Belief> points;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> p;
    std::string tok;
    while (ss >> tok) p.push_back(parse_double(tok, "base point line " + std::to_string(lineno)));
    if (!points.empty() && p.size() != points.front().size()) {
      throw DimensionMismatch("base point line " + std::to_string(lineno) + " has " + std::to_string(p.size()) +
                              " entries, expected " + std::to_string(points.front().size()));
    }
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw ValidationError("base point line " + std::to_string(lineno) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("base point line " + std::to_string(lineno) + " does not sum to 1");
    }
    points.emplace_back(std::move(p));
  }
  return points;
}

std::vector<Belief> load_base_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_base_points(in);
}

void write_base_points(std::ostream& out, const std::vector<Belief>& points) {
  for (const auto& b : points) {
    for (std::size_t i = 0; i < b.size(); ++i) out << (i ? " " : "") << format_exact(b[i]);
    out << "\n";
  }
}

void write_alpha_vectors(std::ostream& out, const std::vector<AlphaVector>& vectors) {
  const std::size_t nx = vectors.empty() ? 0 : vectors.front().weights.size();
  out << nx << " " << vectors.size() << "\n";
  for (const auto& v : vectors) {
    out << v.action;
    for (double w : v.weights) out << " " << format_exact(w);
    out << "\n";
  }
}

std::vector<AlphaVector> read_alpha_vectors(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw ValidationError("alpha-vector file is empty");
  std::size_t nx = 0, n = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nx >> n)) throw ValidationError("alpha-vector header must be 'N_x count'");
  }
  std::vector<AlphaVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_line()) throw ValidationError("alpha-vector file ends after " + std::to_string(i) + " vectors");
    std::istringstream ss(line);
    std::string tok;
    AlphaVector v;
    if (!(ss >> tok)) throw ValidationError("alpha vector " + std::to_string(i) + " is empty");
    v.action = static_cast<ActionIndex>(parse_double(tok, "alpha vector action"));
    while (ss >> tok) v.weights.push_back(parse_double(tok, "alpha vector " + std::to_string(i)));
    if (v.weights.size() != nx) {
      throw DimensionMismatch("alpha vector " + std::to_string(i) + " has " + std::to_string(v.weights.size()) +
                              " weights, header says " + std::to_string(nx));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<AlphaVector> flatten_planes(const CostPlanes& planes) {
  std::vector<AlphaVector> out;
  for (const auto& set : planes) out.insert(out.end(), set.begin(), set.end());
  return out;
}

CostPlanes group_planes(const std::vector<AlphaVector>& vectors, std::size_t num_actions) {
  CostPlanes planes(num_actions);
  for (const auto& v : vectors) {
    if (v.action >= num_actions) throw ValidationError("cost plane action " + std::to_string(v.action) + " out of range");
    planes[v.action].push_back(v);
  }
  return planes;
}

Json config_to_json(const SolverConfig& c) {
  return Json{{"belief_set_size", c.belief_set_size},
              {"expansion_rounds", c.expansion_rounds},
              {"bellman_residual_tol", c.bellman_residual_tol},
              {"max_iterations", c.max_iterations},
              {"seed", c.seed},
              {"explore_epsilon", c.explore_epsilon},
              {"max_depth", c.max_depth},
              {"stall_limit", c.stall_limit},
              {"vertex_beliefs", c.vertex_beliefs},
              {"init", c.init == ValueInit::Zero ? "zero" : "upper_bound"}};
}

SolverConfig config_from_json(const Json& doc) {
  SolverConfig c;
  if (!doc.is_object()) throw ValidationError("solver config must be a JSON object");
  c.belief_set_size = doc.value("belief_set_size", c.belief_set_size);
  c.expansion_rounds = doc.value("expansion_rounds", c.expansion_rounds);
  c.bellman_residual_tol = doc.value("bellman_residual_tol", c.bellman_residual_tol);
  c.max_iterations = doc.value("max_iterations", c.max_iterations);
  c.seed = doc.value("seed", c.seed);
  c.explore_epsilon = doc.value("explore_epsilon", c.explore_epsilon);
  c.max_depth = doc.value("max_depth", c.max_depth);
  c.stall_limit = doc.value("stall_limit", c.stall_limit);
  c.vertex_beliefs = doc.value("vertex_beliefs", c.vertex_beliefs);
  const std::string init = doc.value("init", std::string("upper_bound"));
  if (init == "zero") {
    c.init = ValueInit::Zero;
  } else if (init != "upper_bound") {
    throw ValidationError("solver init must be 'upper_bound' or 'zero', got '" + init + "'");
  }
  c.validate();
  return c;
}

void write_policy(std::ostream& out, const AlphaPolicy& p, const Metadata& extra) {
  out << "# format: erpomdp-policy 1\n";
  out << "# iterations: " << p.iterations << "\n";
  out << "# residual: " << format_exact(p.residual) << "\n";
  out << "# converged: " << (p.converged ? "true" : "false") << "\n";
  out << "# cost_shift: " << format_exact(p.cost_shift) << "\n";
  out << "# belief_count: " << p.belief_count << "\n";
  out << "# config: " << config_to_json(p.config).dump() << "\n";
  for (const auto& [k, v] : extra) out << "# " << k << ": " << v << "\n";
  write_alpha_vectors(out, p.vectors);
}

void save_policy(const std::filesystem::path& path, const AlphaPolicy& policy, const Metadata& extra) {
  std::ostringstream ss;
  write_policy(ss, policy, extra);
  write_text(path, ss.str());
}

AlphaPolicy read_policy(std::istream& in, Metadata* metadata) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Metadata meta;
  {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (line.rfind("# ", 0) != 0) continue;
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      meta[line.substr(2, colon - 2)] = trim(line.substr(colon + 2));
    }
  }
  std::istringstream body(text);
  AlphaPolicy p;
  p.vectors = read_alpha_vectors(body);
  if (p.vectors.empty()) throw ValidationError("policy has no vectors");
  auto get = [&](const char* key) -> const std::string* {
    const auto it = meta.find(key);
    return it == meta.end() ? nullptr : &it->second;
  };
  if (auto v = get("iterations")) p.iterations = std::stoull(*v);
  if (auto v = get("residual")) p.residual = parse_double(*v, "residual");
  if (auto v = get("converged")) p.converged = *v == "true";
  if (auto v = get("cost_shift")) p.cost_shift = parse_double(*v, "cost_shift");
  if (auto v = get("belief_count")) p.belief_count = std::stoull(*v);
  if (auto v = get("config")) p.config = config_from_json(Json::parse(*v));
  if (metadata != nullptr) *metadata = std::move(meta);
  return p;
}

AlphaPolicy load_policy(const std::filesystem::path& path, Metadata* metadata) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_policy(in, metadata);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace erpomdp
