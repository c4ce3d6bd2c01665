#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(SSC_TEST_WORKDIR) / "cli";

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int ssc(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" SSC_CLI "' " + args + " > '" +
                          (kRoot / "last_stdout.txt").string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
  const auto d = kRoot / name;
  fs::remove_all(d);
  return d;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("setup") { fs::create_directories(kRoot); }

TEST_CASE("exact-masses writes the size-3 classes") {
  const auto d = fresh("em");
  REQUIRE(ssc("--output-dir '" + d.string() + "' exact-masses --n 3") == 0);
  const auto csv = slurp(d / "exact_masses.csv");
  CHECK(csv.find(",1/48,") != std::string::npos);
  CHECK(csv.find(",1/24,") != std::string::npos);
  CHECK(lines(csv) == 3);
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m["command"] == "exact-masses");
  CHECK(m["outputs"][0]["rows"] == 2);
  CHECK(m["partial"] == false);
}

TEST_CASE("zero replicas give a header-only file") {
  const auto d = fresh("empty");
  REQUIRE(ssc("--output-dir '" + d.string() + "' sample --law rde --replicas 0 --seed 1") == 0);
  CHECK(slurp(d / "samples.csv") == "replica,seed,capped,size,height,root_degree,root_age,code_hex\n");
}

TEST_CASE("invalid configurations exit nonzero") {
  const auto d = fresh("bad");
  CHECK(ssc("--output-dir '" + d.string() + "' sample --law rde --replicas 3") != 0);  // no seed
  CHECK(ssc("--output-dir '" + d.string() + "' sample --law nope --seed 1") == 2);
  CHECK(ssc("--output-dir '" + d.string() + "' exact-masses --n 13") != 0);
  CHECK(ssc("--output-dir '" + d.string() + "' ffh --height 1 --horizon -1 --seed 1") == 2);
  CHECK(ssc("--output-dir '" + d.string() + "' verify --suite nope --seed 1") == 2);
  CHECK(ssc("--workers 0 --output-dir '" + d.string() + "' sample --seed 1") != 0);
  CHECK(ssc("--output-dir '" + d.string() + "' sample --seed 1", "SSC_WORKERS=x") != 0);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
  const auto a = fresh("det_a"), b = fresh("det_b");
  const std::string args = " sample --law genealogy --replicas 300 --cap 1000 --seed 42";
  REQUIRE(ssc("--workers 1 --output-dir '" + a.string() + "'" + args) == 0);
  REQUIRE(ssc("--workers 3 --output-dir '" + b.string() + "'" + args) == 0);
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["seed"] == 42);
  CHECK(m["cap_aborts"].get<int>() > 0);  // C has infinite mean size, so a cap of 1000 is hit
  CHECK(m["partial"] == true);
  const auto c = fresh("det_c");
  REQUIRE(ssc("--output-dir '" + c.string() + "' sample --law genealogy --replicas 300 --cap 1000 --seed 43") == 0);
  CHECK(slurp(a / "samples.csv") != slurp(c / "samples.csv"));
}

TEST_CASE("config file, environment and flag precedence") {
  const auto d = fresh("cfg");
  fs::create_directories(d);
  const auto ini = d / "run.ini";
  std::ofstream(ini) << "output-dir=" << (d / "from_config").string() << "\n[sample]\nlaw=t-inf\nreplicas=4\nseed=9\n";
  const std::string env = "SSC_OUTPUT_DIR='" + (d / "from_env").string() + "'";
  REQUIRE(ssc("--config '" + ini.string() + "' sample", env) == 0);
  CHECK(lines(slurp(d / "from_config" / "samples.csv")) == 5);
  CHECK(!fs::exists(d / "from_env"));
  REQUIRE(ssc("--config '" + ini.string() + "' --output-dir '" + (d / "from_flag").string() +
              "' sample --replicas 2") == 0);
  CHECK(lines(slurp(d / "from_flag" / "samples.csv")) == 3);
  const auto m = nlohmann::json::parse(slurp(d / "from_flag" / "manifest.json"));
  CHECK(m["config"]["law"] == "t-inf");
  CHECK(m["seed"] == 9);
  REQUIRE(ssc("sample --law t-inf --replicas 1 --seed 1", env) == 0);
  CHECK(fs::exists(d / "from_env" / "samples.csv"));
}

TEST_CASE("verify the small-tree suite") {
  const auto d = fresh("verify");
  REQUIRE(ssc("--output-dir '" + d.string() + "' verify --suite figure1 --seed 7") == 0);
  const auto out = slurp(kRoot / "last_stdout.txt");
  CHECK(out.rfind("PASS c01 figure1", 0) == 0);
  std::size_t matched = 0;
  for (std::size_t p = out.find(" matched"); p != std::string::npos; p = out.find(" matched", p + 1)) ++matched;
  CHECK(matched == 17);
  CHECK(slurp(d / "verify_report.md").find("PASS") != std::string::npos);
  CHECK(lines(slurp(d / "verify_reports.jsonl")) == 3);
}

TEST_CASE("simulation commands write their artifacts") {
  const auto d = fresh("sims");
  const std::string o = "--output-dir '" + d.string() + "' ";
  REQUIRE(ssc(o + "growth --replicas 3 --seed 1 --cap 1000") == 0);
  CHECK(slurp(d / "growth_events.csv").rfind("replica,time,kind,jump_size,size_after\n", 0) == 0);
  CHECK(lines(slurp(d / "growth_summary.csv")) == 4);
  REQUIRE(ssc(o + "growth --tau 1 2 --leap 0.1 --replicas 3 --seed 1") == 0);
  CHECK(lines(slurp(d / "growth_scaling.csv")) == 7);
  REQUIRE(ssc(o + "conditioned --s 0.5 --t 1 --replicas 50 --seed 1") == 0);
  CHECK(lines(slurp(d / "conditioned.csv")) == 51);
  REQUIRE(ssc(o + "meanfield --n 200 --horizon 3 --snapshots 1 3 --replicas 2 --seed 1") == 0);
  CHECK(lines(slurp(d / "meanfield_snapshots.csv")) == 5);
  REQUIRE(ssc(o + "ffh --height 2 --horizon 2 --replicas 3 --seed 1") == 0);
  CHECK(slurp(d / "ffh_fires.csv").rfind("replica,t,igniting_leaf,component_size,root_burned\n", 0) == 0);
  const auto snap = nlohmann::json::parse(slurp(d / "ffh_snapshot.json"));
  CHECK(snap["replicas"].size() == 3);
  CHECK(snap["replicas"][0]["root_cluster"][0]["label"] == "root");
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m["command"] == "ffh");
  CHECK(m["outputs"].size() == 2);
}
