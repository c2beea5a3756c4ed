#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(WONHAM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wonham_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  std::ofstream(dir / "bad.json") << R"({"A": [[-1, 1], [2, -1]], "h": [0, 1]})";
  std::ofstream(dir / "good.json") << R"({"model": {"preset": {"epsilon": 0, "h": "h2"}}})";
  std::ofstream(dir / "zero.json") << R"({"n_paths": 0, "model": {"preset": {"epsilon": 0, "h": "h2"}}})";
  std::ofstream(dir / "syntax.json") << "{\"T\": }";
  const std::string out = " --out " + (dir / "out").string();
  CHECK(run("analyze " + (dir / "good.json").string() + out) == 0);
  CHECK(run("analyze " + (dir / "bad.json").string() + out) == 2);
  CHECK(run("analyze " + (dir / "missing.json").string() + out) == 2);
  CHECK(run("divergence " + (dir / "zero.json").string() + out) == 2);
  CHECK(run("divergence " + (dir / "syntax.json").string() + out) == 2);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("environment variable sets the default output directory") {
  const fs::path dir = scratch("env");
  std::ofstream(dir / "good.json") << R"({"model": {"preset": {"epsilon": 0, "h": "h3"}}})";
  const std::string cmd = "WONHAM_OUT_DIR=" + (dir / "env_out").string() + " " + WONHAM_CLI_PATH + " analyze " +
                          (dir / "good.json").string() + " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "env_out" / "structure.json"));
  CHECK(fs::exists(dir / "env_out" / "manifest.json"));
}

TEST_CASE("reproduce-table1 writes its artifacts and uses the tolerance exit code") {
  const fs::path dir = scratch("table1");
  const int code = run("reproduce-table1 --quick --n-paths 8 --seed 3 --out " + dir.string());
  CHECK((code == 0 || code == 4));
  CHECK(fs::exists(dir / "table1.json"));
  CHECK(fs::exists(dir / "figure1.svg"));
  CHECK(fs::exists(dir / "manifest.json"));
  int csv = 0;
  for (const auto& e : fs::directory_iterator(dir / "curves")) csv += e.path().extension() == ".csv";
  CHECK(csv == 5);
}
