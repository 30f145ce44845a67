#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path& dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "nlmimo_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

fs::path write(const std::string& name, const std::string& text) {
  const auto p = dir() / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(NLMIMO_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

const char* kGood = R"(seed: 3
scenario:
  antennas: 16
  users: 2
chain:
  bits: 2
bussgang:
  samples: 20000
simulate:
  n_symbols: 2000
  n_drops: 2
  bussgang_samples: 20000
  tol_db: 1
)";

}  // namespace

TEST_CASE("exit codes") {
  const auto good = write("good.yaml", kGood);
  CHECK(run("bussgang --config " + good.string()) == 0);
  CHECK(run("bussgang --config " + write("typo.yaml", "seed: 1\nchian: {}\n").string()) == 1);
  CHECK(run("bussgang --config " + (dir() / "missing.yaml").string()) == 1);
  CHECK(run("bussgang") == 1);
  CHECK(run("frobnicate --config " + good.string()) == 1);
  CHECK(run("bussgang --config " + good.string() + " --format xml") == 1);
  CHECK(run("simulate --config " + write("noseed.yaml", "scenario:\n  users: 2\n").string()) == 1);
  CHECK(run("bussgang --config " + good.string() + " --out /nonexistent/dir/x.csv") == 2);
  // Sixteen users cannot be packed with this separation: the second cell fails.
  const auto sweep = write("sweep.yaml", R"(seed: 3
scenario:
  antennas: 16
  users: 2
  delta_omega_min: 0.5
simulate:
  n_symbols: 2000
  n_drops: 2
  tol_db: 1
sweep:
  betas: [0.125, 1]
  pc: [none]
  chains:
    - name: ideal
      chain: {}
)");
  CHECK(run("sweep --config " + sweep.string()) == 2);
}

TEST_CASE("seed flag and output formats") {
  const auto good = write("good.yaml", kGood);
  const auto a = dir() / "a.csv", b = dir() / "b.csv", c = dir() / "c.csv", j = dir() / "d.json";
  REQUIRE(run("bussgang --config " + good.string() + " --out " + a.string()) == 0);
  REQUIRE(run("bussgang --config " + good.string() + " --seed 3 --out " + b.string()) == 0);
  REQUIRE(run("bussgang --config " + good.string() + " --seed 4 --out " + c.string()) == 0);
  REQUIRE(run("bussgang --config " + good.string() + " --format json --out " + j.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(slurp(j).front() == '[');
  CHECK(slurp(a).rfind("stage,method,", 0) == 0);
}

TEST_CASE("simulate output is identical across worker counts") {
  const auto good = write("good.yaml", kGood);
  std::string first;
  for (int w : {1, 4, 16}) {
    const auto out = dir() / ("sim_" + std::to_string(w) + ".csv");
    REQUIRE(run("simulate --config " + good.string() + " --workers " + std::to_string(w) + " --out " +
                out.string()) == 0);
    if (first.empty()) first = slurp(out);
    CHECK(slurp(out) == first);
  }
}
