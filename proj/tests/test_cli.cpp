#include "thermohom/cli.hpp"
#include "thermohom/parallel.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace thermohom;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig smoke() {
  return parse_config_text(
      "[model]\ncell_n = 8\nmacro_n = 8\n[time]\nT = 0.1\ndt = 0.05\n"
      "[reference]\neps = 0.5\ncheck_eps = 0.5\nprobes = 20\n");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("thermohom_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("compare with a single eps writes a single row") {
  const fs::path dir = scratch("compare");
  std::ostringstream log;
  const auto res = dispatch("compare", smoke(), dir.string(), log);
  CHECK(res.status == 0);
  const std::string csv = slurp(dir / "compare.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.rfind("eps,", 0) == 0);
  const std::string man = slurp(dir / "compare_manifest.txt");
  CHECK(man.find("config_hash = ") != std::string::npos);
  CHECK(man.find("cg_tol = 1e-10") != std::string::npos);
  CHECK(man.find("artifact = compare.csv") != std::string::npos);
}

TEST_CASE("checks pass on the default model") {
  RunConfig c = parse_config_text("[reference]\nprobes = 20\n");
  const fs::path dir = scratch("checks");
  std::ostringstream log;
  const auto res = dispatch("checks", c, dir.string(), log);
  CHECK(res.status == 0);
  const std::string rep = slurp(dir / "checks.txt");
  CHECK(rep.find("FAIL") == std::string::npos);
  CHECK(rep.find("ALL PASS") != std::string::npos);
}

TEST_CASE("reruns with other worker counts reproduce every csv") {
  for (const std::string sub : {"cell", "effective", "macro", "micro"}) {
    const fs::path a = scratch(sub + "_a"), b = scratch(sub + "_b");
    std::ostringstream log;
    set_worker_count(1);
    const auto ra = dispatch(sub, smoke(), a.string(), log);
    set_worker_count(3);
    const auto rb = dispatch(sub, smoke(), b.string(), log);
    set_worker_count(1);
    CHECK(ra.artifacts == rb.artifacts);
    for (const auto& f : ra.artifacts) {
      if (fs::path(f).extension() != ".csv") continue;
      INFO(sub << " " << f);
      CHECK(slurp(a / f) == slurp(b / f));
    }
    // Same configuration, same hash; only the worker line differs.
    const std::string ma = slurp(a / (sub + "_manifest.txt")), mb = slurp(b / (sub + "_manifest.txt"));
    CHECK(ma.substr(0, ma.find("cell_solver_tol")) == mb.substr(0, mb.find("cell_solver_tol")));
  }
}

TEST_CASE("unknown subcommand and invalid configuration") {
  std::ostringstream log;
  CHECK_THROWS_AS(dispatch("plot", smoke(), scratch("bad").string(), log), Error);
  RunConfig c = smoke();
  c.model.dt = -1.0;
  CHECK_THROWS_AS(dispatch("cell", c, scratch("bad2").string(), log), Error);
  CHECK(subcommands().size() == 6);
}

}
