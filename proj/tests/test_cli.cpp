#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const char* cli_path() { return ZSG_CLI_PATH; }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("zsg_cli_test_" + std::to_string(static_cast<long>(::getpid())) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::string& args) {
  const int status = std::system((std::string(cli_path()) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

const char* kPenniesConfig = R"({
  "problem": {"builtin": "pennies-chain"},
  "solve": {"modes": ["pure_upper", "pure_lower", "relaxed_upper"], "tol": 1e-10}
})";

}  // namespace

TEST_CASE("cli solve writes values, policies and a summary") {
  TempDir tmp;
  write(tmp.path / "config.json", kPenniesConfig);
  const int code = run("solve --config " + (tmp.path / "config.json").string() + " --out " +
                       (tmp.path / "out").string());
  CHECK(code == 0);
  CHECK(fs::exists(tmp.path / "out" / "values.csv"));
  CHECK(fs::exists(tmp.path / "out" / "policy_pure_upper.csv"));
  const std::string summary = slurp(tmp.path / "out" / "run_summary.txt");
  CHECK(summary.find("rho=2") != std::string::npos);
  const std::string values = slurp(tmp.path / "out" / "values.csv");
  CHECK(values.find("state,value_pure_upper,value_pure_lower,value_relaxed_upper") !=
        std::string::npos);
  const size_t a_row = values.find("A,1,-1,");
  REQUIRE(a_row != std::string::npos);
  CHECK(std::abs(std::stod(values.substr(a_row + 7))) <= 1e-12);
}

TEST_CASE("cli exit codes") {
  TempDir tmp;
  SUBCASE("malformed config exits 1") {
    write(tmp.path / "bad.json", "{\"problem\": nope}");
    CHECK(run("solve --config " + (tmp.path / "bad.json").string()) == 1);
  }
  SUBCASE("out-of-range parameter exits 1") {
    write(tmp.path / "bad.json",
          R"({"problem": {"builtin": "pennies-chain"}, "solve": {"tol": -1}})");
    CHECK(run("solve --config " + (tmp.path / "bad.json").string()) == 1);
  }
  SUBCASE("invalid game exits 3") {
    write(tmp.path / "invalid.json", R"({
      "problem": {"game": {
        "states": ["A"],
        "controls": {"u1": {"lo": 0, "hi": 1, "n": 2}, "u2": {"lo": 0, "hi": 1, "n": 2}},
        "transitions": [{"from": "A", "to": {"A": 0.9}}]
      }}})");
    CHECK(run("solve --config " + (tmp.path / "invalid.json").string() + " --out " +
              (tmp.path / "out").string()) == 3);
  }
  SUBCASE("oversized mesh exits 4 on build") {
    write(tmp.path / "big_h.json",
          R"({"problem": {"builtin": "separable-1d"}, "h": 0.6})");
    CHECK(run("build --config " + (tmp.path / "big_h.json").string() + " --out " +
              (tmp.path / "out").string()) == 4);
  }
  SUBCASE("sweep failures exit 5") {
    write(tmp.path / "sweep.json", R"({
      "problem": {"builtin": "separable-1d"},
      "sweep": {"h_list": [0.6], "modes": ["pure_upper"]}
    })");
    CHECK(run("sweep --config " + (tmp.path / "sweep.json").string() + " --out " +
              (tmp.path / "out").string()) == 5);
  }
}

TEST_CASE("cli solve on a diffusion problem writes lattice-aware values") {
  TempDir tmp;
  write(tmp.path / "config.json", R"({
    "problem": {"builtin": "separable-1d"},
    "h": 0.2,
    "solve": {"modes": ["pure_upper"], "tol": 1e-9}
  })");
  const int code = run("solve --config " + (tmp.path / "config.json").string() + " --out " +
                       (tmp.path / "out").string());
  CHECK(code == 0);
  const std::string values = slurp(tmp.path / "out" / "values.csv");
  CHECK(values.find("state,x1,regime,value_pure_upper") != std::string::npos);
  CHECK(values.find("(0.4)#1,") != std::string::npos);
}

TEST_CASE("cli build emits a kernel whose rows sum to one") {
  TempDir tmp;
  write(tmp.path / "config.json", R"({"problem": {"builtin": "separable-1d"}, "h": 0.2})");
  const int code = run("build --config " + (tmp.path / "config.json").string() + " --out " +
                       (tmp.path / "out").string());
  CHECK(code == 0);
  std::ifstream edges(tmp.path / "out" / "chain_edges.csv");
  std::string header;
  std::getline(edges, header);
  CHECK(header == "x1,iota,r1,r2,y1,ell,p");
  // group rows by (x, iota, r1, r2) and accumulate probabilities
  std::map<std::string, double> sums;
  std::string line;
  while (std::getline(edges, line)) {
    std::string key;
    double p = 0.0;
    size_t pos = 0;
    for (int f = 0; f < 7; ++f) {
      const size_t next = line.find(',', pos);
      const std::string cell = line.substr(pos, next - pos);
      if (f < 4) key += cell + "|";
      if (f == 6) p = std::stod(cell);
      pos = next + 1;
    }
    sums[key] += p;
  }
  CHECK(!sums.empty());
  for (const auto& [key, sum] : sums) CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cli check passes on builtins and reports failures") {
  TempDir tmp;
  write(tmp.path / "ok.json", R"({"problem": {"builtin": "separable-1d"}, "h": 0.1})");
  CHECK(run("check --config " + (tmp.path / "ok.json").string() + " --out " +
            (tmp.path / "out").string()) == 0);
  write(tmp.path / "big.json", R"({"problem": {"builtin": "separable-1d"}, "h": 0.6})");
  CHECK(run("check --config " + (tmp.path / "big.json").string() + " --out " +
            (tmp.path / "out2").string()) == 4);
}

TEST_CASE("cli sweep and simulate are byte-identical across reruns") {
  TempDir tmp;
  write(tmp.path / "config.json", R"({
    "problem": {"builtin": "separable-1d"},
    "h": 0.2,
    "sweep": {"h_list": [0.2, 0.1], "modes": ["pure_upper", "pure_lower"],
              "probe_points": [[0.4]], "tol": 1e-10},
    "simulate": {"paths": 2000, "seed": 12345, "policy_mode": "relaxed_upper",
                 "start_point": [0.4], "start_regime": 0}
  })");
  const std::string cfg = (tmp.path / "config.json").string();

  REQUIRE(run("sweep --config " + cfg + " --out " + (tmp.path / "s1").string()) == 0);
  REQUIRE(run("sweep --config " + cfg + " --out " + (tmp.path / "s2").string()) == 0);
  CHECK(slurp(tmp.path / "s1" / "sweep.csv") == slurp(tmp.path / "s2" / "sweep.csv"));
  CHECK(slurp(tmp.path / "s1" / "sweep_plot.csv") == slurp(tmp.path / "s2" / "sweep_plot.csv"));
  CHECK(slurp(tmp.path / "s1" / "sweep_plot.csv").find("h,mode,probe,regime,value,diff_to_next") !=
        std::string::npos);

  REQUIRE(run("simulate --config " + cfg + " --out " + (tmp.path / "m1").string()) == 0);
  REQUIRE(run("simulate --config " + cfg + " --out " + (tmp.path / "m2").string()) == 0);
  const std::string sim1 = slurp(tmp.path / "m1" / "simulation.csv");
  CHECK(sim1 == slurp(tmp.path / "m2" / "simulation.csv"));
  CHECK(!sim1.empty());

  // a --seed override changes the estimate
  REQUIRE(run("simulate --config " + cfg + " --seed 999 --out " + (tmp.path / "m3").string()) == 0);
  CHECK(sim1 != slurp(tmp.path / "m3" / "simulation.csv"));
}

TEST_CASE("cli config-dump can print the per-state cost matrices") {
  TempDir tmp;
  write(tmp.path / "config.json", kPenniesConfig);
  const std::string out = (tmp.path / "matrices.txt").string();
  REQUIRE(std::system((std::string(cli_path()) + " config-dump --matrices --config " +
                       (tmp.path / "config.json").string() + " > " + out + " 2>/dev/null")
                          .c_str()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("A:") != std::string::npos);
  CHECK(text.find("[[1 -1") != std::string::npos);
  CHECK(text.find("Done:") == std::string::npos);  // absorbing states have no matrix
}

TEST_CASE("cli config-dump is a fixpoint") {
  TempDir tmp;
  write(tmp.path / "config.json", kPenniesConfig);
  const std::string cfg = (tmp.path / "config.json").string();
  const std::string dump1 = (tmp.path / "dump1.json").string();
  const std::string dump2 = (tmp.path / "dump2.json").string();
  REQUIRE(std::system((std::string(cli_path()) + " config-dump --config " + cfg + " > " + dump1 +
                       " 2>/dev/null")
                          .c_str()) == 0);
  REQUIRE(std::system((std::string(cli_path()) + " config-dump --config " + dump1 + " > " + dump2 +
                       " 2>/dev/null")
                          .c_str()) == 0);
  const std::string a = slurp(dump1), b = slurp(dump2);
  CHECK(!a.empty());
  CHECK(a == b);
}
