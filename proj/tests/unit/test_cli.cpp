#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "erpomdp/io.hpp"
#include "oracles.hpp"

using namespace erpomdp;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("erpomdp_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(ERPOMDP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string without_manifest_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# manifest:", 0) != 0) out += line + "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("cli exit codes and artifacts") {
  Workspace ws;
  Rng rng(81);
  const std::string model = ws.path("m.json");
  save_model(model, oracle::random_model(rng, 3, 2, 2, 0.8, 1.0, 1.0));

  CHECK(run("validate " + model) == 0);
  CHECK(run("--version") == 0);
  CHECK(run("frobnicate") == 2);

  Json bad = model_to_json(load_model(model));
  bad["transition"][0][0] = {0.9, 0.2, 0.0};
  write_text(ws.path("bad.json"), bad.dump());
  CHECK(run("validate " + ws.path("bad.json")) == 2);
  write_text(ws.path("garbage.json"), "{not json");
  CHECK(run("validate " + ws.path("garbage.json")) == 2);

  SUBCASE("solve requires a seed and writes a manifest") {
    CHECK(run("solve " + model + " --mode linear -o " + ws.path("p.txt")) == 2);
    CHECK(run("solve " + model + " --mode linear --seed 3 -o " + ws.path("p.txt")) == 0);
    CHECK(fs::exists(ws.path("p.txt.manifest.json")));
    const Json manifest = Json::parse(read_file(ws.path("p.txt.manifest.json")));
    CHECK(manifest.at("seed") == 3);
    CHECK(manifest.at("inputs").size() >= 1);

    CHECK(run("solve " + model + " --mode linear --seed 3 -o " + ws.path("q.txt")) == 0);
    CHECK(without_manifest_line(read_file(ws.path("p.txt"))) == without_manifest_line(read_file(ws.path("q.txt"))));

    CHECK(run("solve " + model + " --mode pwlc --seed 3 --tol 1e-12 --max-iterations 2 -o " + ws.path("r.txt")) == 3);
    CHECK(fs::exists(ws.path("r.txt")));

    CHECK(run("simulate " + model + " -p a=" + ws.path("p.txt") + " --episodes 20 --seed 1 --report " +
              ws.path("rep.csv")) == 0);
    CHECK(read_file(ws.path("rep.csv")).rfind("policy,criterion,mean,stderr,unit", 0) == 0);
    CHECK(run("simulate " + model + " -p a=" + ws.path("p.txt") + " --episodes 20 --report " + ws.path("x.csv")) == 2);
  }

  SUBCASE("linear mode requires equal weights") {
    save_model(ws.path("w.json"), oracle::random_model(rng, 3, 2, 2, 0.8, 1.0, 0.5));
    CHECK(run("solve " + ws.path("w.json") + " --mode linear --seed 1 -o " + ws.path("w.txt")) == 2);
  }

  SUBCASE("oracle guards against large enumerations") {
    write_text(ws.path("table.json"), R"({"constant": [0.5, 0.5]})");
    CHECK(run("oracle " + model + " --policy-table " + ws.path("table.json") + " --horizon 2") == 0);
    CHECK(run("oracle " + model + " --policy-table " + ws.path("table.json") + " --horizon 30") == 4);
  }
}
