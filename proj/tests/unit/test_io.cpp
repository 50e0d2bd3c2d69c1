#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>

#include "erpomdp/errors.hpp"
#include "erpomdp/io.hpp"
#include "oracles.hpp"

using namespace erpomdp;

namespace {

std::string error_of(const Json& doc) {
  try {
    model_from_json(doc);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("model JSON round-trips up to row renormalization") {
  Rng rng(71);
  for (int i = 0; i < 20; ++i) {
    const PomdpModel m = oracle::random_model(rng, 3, 2, 4, 0.95, 0.7, 1.3);
    const PomdpModel back = model_from_json(Json::parse(model_to_json(m).dump()));
    CHECK(back.num_states == m.num_states);
    CHECK(back.num_actions == m.num_actions);
    CHECK(back.num_obs == m.num_obs);
    CHECK(back.discount == m.discount);
    CHECK(back.beta == m.beta);
    CHECK(back.lambda == m.lambda);
    for (std::size_t x = 0; x < 3; ++x) CHECK(std::abs(back.prior[x] - m.prior[x]) <= 1e-15);
    CHECK(back.stage_cost == m.stage_cost);
    CHECK(back.terminal_cost == m.terminal_cost);
    for (std::size_t u = 0; u < 2; ++u) {
      for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t z = 0; z < 3; ++z) CHECK(std::abs(back.trans(u, x, z) - m.trans(u, x, z)) <= 1e-15);
        for (std::size_t y = 0; y < 4; ++y) CHECK(std::abs(back.obs(u, x, y) - m.obs(u, x, y)) <= 1e-15);
      }
    }
  }
}

TEST_CASE("model JSON errors name the problem") {
  Rng rng(72);
  const Json good = model_to_json(oracle::random_model(rng, 2, 2, 2));
  Json missing = good;
  missing.erase("discount");
  CHECK(error_of(missing).find("missing field 'discount'") != std::string::npos);

  Json bad_row = good;
  bad_row["transition"][0][0] = {0.9, 0.2};
  CHECK(error_of(bad_row).find("row sum") != std::string::npos);

  Json short_prior = good;
  short_prior["prior"] = {1.0};
  CHECK_THROWS_AS(model_from_json(short_prior), DimensionMismatch);
}

TEST_CASE("grid spec JSON round-trips") {
  GridSpec spec;
  spec.walls = {{3, Direction::South}, {10, Direction::East}};
  spec.false_wall_prob = 0.1;
  const GridSpec back = grid_spec_from_json(grid_spec_to_json(spec));
  CHECK(back.width == 12);
  CHECK(back.goal == 143);
  CHECK(back.false_wall_prob == 0.1);
  REQUIRE(back.walls.size() == 2);
  CHECK(back.walls[1].first == 10);
  CHECK(back.walls[1].second == Direction::East);
}

TEST_CASE("base points round-trip and reject bad rows") {
  std::stringstream ss;
  const std::vector<Belief> pts{Belief({0.25, 0.75}), Belief({1.0 / 3.0, 2.0 / 3.0})};
  write_base_points(ss, pts);
  const auto back = read_base_points(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1][0] == 1.0 / 3.0);

  std::istringstream ragged("0.5 0.5\n1.0\n");
  CHECK_THROWS(read_base_points(ragged));
  std::istringstream unnormalized("0.5 0.6\n");
  CHECK_THROWS_AS(read_base_points(unnormalized), ValidationError);
}

TEST_CASE("alpha vectors round-trip bit-exactly") {
  Rng rng(73);
  std::uniform_real_distribution<double> w(-1e3, 1e3);
  std::vector<AlphaVector> vs;
  for (std::size_t i = 0; i < 10; ++i) vs.push_back({{w(rng), w(rng), w(rng) * 1e-9}, i % 3, ""});
  std::stringstream ss;
  write_alpha_vectors(ss, vs);
  const auto back = read_alpha_vectors(ss);
  REQUIRE(back.size() == vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    CHECK(back[i].action == vs[i].action);
    CHECK(back[i].weights == vs[i].weights);
  }
  const CostPlanes grouped = group_planes(back, 3);
  CHECK(grouped.size() == 3);
  CHECK(grouped[0].size() == 4);
  CHECK(flatten_planes(grouped).size() == 10);

  std::istringstream bad("2 1\n0 1.0\n");
  CHECK_THROWS(read_alpha_vectors(bad));
}

TEST_CASE("policies keep their metadata") {
  AlphaPolicy p;
  p.vectors = {{{1.5, -2.0}, 1, ""}, {{0.0, 0.1}, 0, ""}};
  p.iterations = 42;
  p.residual = 3e-7;
  p.converged = true;
  p.cost_shift = -0.5;
  p.belief_count = 17;
  p.config.seed = 99;
  p.config.init = ValueInit::Zero;
  std::stringstream ss;
  write_policy(ss, p, {{"model_sha256", "abc"}});
  Metadata meta;
  const AlphaPolicy back = read_policy(ss, &meta);
  CHECK(back.iterations == 42);
  CHECK(back.residual == 3e-7);
  CHECK(back.converged);
  CHECK(back.cost_shift == -0.5);
  CHECK(back.belief_count == 17);
  CHECK(back.config.seed == 99);
  CHECK(back.config.init == ValueInit::Zero);
  CHECK(meta.at("model_sha256") == "abc");
  REQUIRE(back.vectors.size() == 2);
  CHECK(back.vectors[0].weights == p.vectors[0].weights);
}

TEST_CASE("solver config JSON") {
  SolverConfig c;
  c.belief_set_size = 12;
  c.bellman_residual_tol = 1e-4;
  const SolverConfig back = config_from_json(config_to_json(c));
  CHECK(back.belief_set_size == 12);
  CHECK(back.bellman_residual_tol == 1e-4);
  CHECK(back.init == ValueInit::UpperBound);
  CHECK(config_from_json(Json::parse(R"({"init": "zero"})")).init == ValueInit::Zero);
  CHECK_THROWS(config_from_json(Json::parse(R"({"init": "random"})")));
}

TEST_CASE("format_exact and sha256") {
  CHECK(std::stod(format_exact(0.1)) == 0.1);
  CHECK(std::stod(format_exact(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
