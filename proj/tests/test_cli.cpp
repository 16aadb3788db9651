#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

#include "oracles.hpp"
#include "rotent/io.hpp"

using namespace rotent;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(ROTENT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(ROTENT_DATA) + "/" + name; }

}  // namespace

TEST_CASE("pf encloses the golden ratio") {
  auto r = run("pf " + data("fibonacci.mat"));
  REQUIRE(r.status == 0);
  auto j = Json::parse(r.out);
  CHECK(j["command"] == "pf");
  double lo = j["result"]["lambda_lo"], hi = j["result"]["lambda_hi"];
  double phi = oracle::golden_ratio();
  CHECK(lo <= phi);
  CHECK(hi >= phi);
  CHECK(hi - lo <= 1e-10);
}

TEST_CASE("rot on the golden mean shift") {
  auto r = run("rot --sft " + data("golden_mean.sft") + " --potential " + data("bernoulli.pot"));
  REQUIRE(r.status == 0);
  auto j = Json::parse(r.out);
  CHECK(j["result"]["vertices"] == Json::parse("[[0.0],[0.5]]"));
  CHECK(j["config"]["sft"].is_string());
}

TEST_CASE("entropy at w = 0.3") {
  auto r = run("entropy --sft " + data("full2.sft") + " --potential " + data("bernoulli.pot") + " --w 0.3 --tol 1e-3");
  REQUIRE(r.status == 0);
  auto j = Json::parse(r.out);
  double l = j["result"]["l"], u = j["result"]["u"];
  CHECK(l <= oracle::binary_entropy(0.3));
  CHECK(u >= oracle::binary_entropy(0.3));
  CHECK(j["result"]["levels"].is_array());
}

TEST_CASE("boundary example reports the gap") {
  auto r = run("boundary-example --n-min 1 --n-max 3 --no-sweep");
  REQUIRE(r.status == 0);
  auto j = Json::parse(r.out);
  auto levels = j["result"]["levels"];
  REQUIRE(levels.size() == 3);
  for (const auto& lv : levels) {
    CHECK(lv["h_l_certified"] == 0.0);
    CHECK(std::abs(lv["gap"].get<double>() - std::log(2.0)) <= 1e-12);
  }
}

TEST_CASE("outputs are deterministic") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "rotent_cli_test";
  fs::create_directories(dir);
  std::string args = "spectrum --sft " + data("full2.sft") + " --potential " + data("bernoulli.pot") +
                     " --grid 5 --tol 1e-2";
  auto a = run("--csv " + (dir / "a.csv").string() + " --svg " + (dir / "a.svg").string() + " " + args);
  auto b = run("--csv " + (dir / "b.csv").string() + " --svg " + (dir / "b.svg").string() + " " + args);
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  CHECK(a.out == b.out);
  CHECK(read_text((dir / "a.csv").string()) == read_text((dir / "b.csv").string()));
  CHECK(read_text((dir / "a.svg").string()) == read_text((dir / "b.svg").string()));
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  CHECK(run("entropy --sft " + data("full2.sft") + " --potential " + data("bernoulli.pot") + " --w 1.0").status == 2);
  CHECK(run("boundary-example --n-min 1 --n-max 1 --max-K 5").status == 3);
  CHECK(run("pf /nonexistent/matrix").status == 1);
  auto bad = run("rot --sft " + data("fibonacci.mat"));
  CHECK(bad.status == 1);
  CHECK(Json::parse(bad.out)["result"]["error"].is_object());
}
