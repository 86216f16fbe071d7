#include <gtest/gtest.h>

#include <whlab/experiments.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace whlab;
namespace ex = whlab::experiments;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kSource = WHLAB_SOURCE_DIR;
const fs::path kCli = WHLAB_CLI_PATH;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("whlab_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Pointer of the ConfigError raised while parsing and preparing j.
std::string error_pointer(const json& j, const fs::path& base = kSource / "configs") {
  try {
    ex::prepare(ex::parse_config(j, base));
  } catch (const ConfigError& e) {
    return e.pointer;
  }
  return "<no error>";
}

json small_symbol() {
  return json::parse(R"({
    "experiment": "symbol",
    "space": {"weight": {"family": "dyadic_zigzag", "beta": 1.0}, "p": 2},
    "grid": {"span": 20, "step": 0.02},
    "operator": {"kind": "kernel", "kernel": {"family": "gaussian", "center": 0.4, "width": 0.7}},
    "params": {"levels": 7, "probes": 2},
    "seed": 3
  })");
}

struct Proc {
  int status = -1;
  std::string out, err;
};

Proc run_cli(const std::string& args, const fs::path& dir) {
  fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  std::string cmd = "\"" + kCli.string() + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
  int rc = std::system(cmd.c_str());
  Proc p;
  p.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  p.out = slurp(o);
  p.err = slurp(e);
  return p;
}

}  // namespace

TEST(Hash, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a64(""), "cbf29ce484222325");
  EXPECT_EQ(io::fnv1a64("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(io::fnv1a64("foobar"), "85944171f73967e8");
}

TEST(NumberFormat, RoundTripsRandomDoubles) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    double v = std::ldexp(mant(rng), ex(rng));
    EXPECT_EQ(std::strtod(io::num(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(io::num(0.5), "0.5");
  EXPECT_EQ(io::num(INFINITY), "inf");
}

TEST(Table, CsvLayout) {
  io::Table t{"t", {"a", "b"}, {}};
  t.add({"1", "x"});
  t.add({"2.5", "y"});
  EXPECT_EQ(t.csv(), "a,b\n1,x\n2.5,y\n");
}

TEST(KernelFile, ReadsUniformCsv) {
  fs::path d = scratch("kernel_file");
  {
    std::ofstream f(d / "k.csv");
    f << "x,re,im\n-0.1,1,0\n0,2,0.5\n0.1,3,-1\n";
  }
  SampledFunction k = io::read_kernel_csv(d / "k.csv", 0.1, "/k");
  ASSERT_EQ(k.size(), 3u);
  EXPECT_NEAR(k.grid.origin, -0.1, 1e-15);
  EXPECT_EQ(k.values[1], cplx(2.0, 0.5));
  EXPECT_EQ(k.values[2], cplx(3.0, -1.0));

  {
    std::ofstream f(d / "gap.csv");
    f << "x,re,im\n0,1,0\n0.2,1,0\n";
  }
  EXPECT_THROW(io::read_kernel_csv(d / "gap.csv", 0.1, "/k"), ConfigError);
  {
    std::ofstream f(d / "bad.csv");
    f << "x,re,im\n0,1\n";
  }
  EXPECT_THROW(io::read_kernel_csv(d / "bad.csv", 0.1, "/k"), ConfigError);
  {
    std::ofstream f(d / "nohdr.csv");
    f << "0,1,0\n0.1,1,0\n";
  }
  EXPECT_THROW(io::read_kernel_csv(d / "nohdr.csv", 0.1, "/k"), ConfigError);
}

TEST(Config, SampleConfigsValidate) {
  int n = 0;
  for (auto& e : fs::directory_iterator(kSource / "configs")) {
    if (e.path().extension() != ".json") continue;
    ++n;
    EXPECT_NO_THROW(ex::prepare(ex::parse_config(load(e.path()), kSource / "configs"))) << e.path();
  }
  EXPECT_GE(n, 10);
}

TEST(Config, ErrorsCarryJsonPointers) {
  json j = small_symbol();
  j["space"]["weight"]["family"] = "zigzag";
  EXPECT_EQ(error_pointer(j), "/space/weight/family");

  j = small_symbol();
  j["colour"] = 1;
  EXPECT_EQ(error_pointer(j), "/colour");

  j = small_symbol();
  j["tolerances"] = {{"representation", -1.0}};
  EXPECT_EQ(error_pointer(j), "/tolerances/representation");

  j = small_symbol();
  j["tolerances"] = {{"separation", 10.0}};
  EXPECT_EQ(error_pointer(j), "/tolerances/separation");

  j = small_symbol();
  j.erase("operator");
  EXPECT_EQ(error_pointer(j), "/operator");

  j = small_symbol();
  j["params"]["levls"] = 3;
  EXPECT_EQ(error_pointer(j), "/params/levls");

  j = small_symbol();
  j["operator"] = {{"kind", "shift"}, {"a", 0.013}};
  EXPECT_EQ(error_pointer(j), "/operator/a");

  j = small_symbol();
  j["operator"]["kernel"] = {{"family", "file"}, {"path", "does/not/exist.csv"}};
  EXPECT_EQ(error_pointer(j), "/operator/kernel/path");

  j = small_symbol();
  j["space"]["orlicz"] = {{"family", "orlicz:exp"}};
  EXPECT_EQ(error_pointer(j), "/space/p");

  j = small_symbol();
  j["space"]["weight"] = {{"family", "exponential"}};
  EXPECT_EQ(error_pointer(j), "/space/weight/beta");

  j = small_symbol();
  j["grid"]["step"] = 0.03;
  EXPECT_EQ(error_pointer(j), "/grid/span");

  j = small_symbol();
  j["experiment"] = "annulus";
  j.erase("params");
  j.erase("operator");
  j["space"]["p"] = 3;
  EXPECT_EQ(error_pointer(j), "/space/p");

  json v = load(kSource / "configs" / "vector_diagonal_weight.json");
  v["params"]["matrix_kernel"]["entries"][1] = json::array({nullptr});
  EXPECT_EQ(error_pointer(v), "/params/matrix_kernel/entries/1");

  v = load(kSource / "configs" / "vector_diagonal_weight.json");
  v["params"]["operator_weight"] = {{"kind", "mixed_growth_5x5"}};
  EXPECT_EQ(error_pointer(v), "/params/operator_weight/kind");

  v = load(kSource / "configs" / "vector_diagonal_weight.json");
  v["params"]["operator_weight"]["entries"][0][0][0][1] = 1.5;
  EXPECT_EQ(error_pointer(v), "/params/operator_weight/entries/0/0/0/1");

  json c = load(kSource / "configs" / "cutoff.json");
  c["params"]["requests"][1].erase("delta");
  EXPECT_EQ(error_pointer(c), "/params/requests/1/delta");
}

TEST(Config, PointerEscapesSpecialCharacters) {
  json j = small_symbol();
  j["params"]["a/b~c"] = 1;
  EXPECT_EQ(error_pointer(j), "/params/a~1b~0c");
}

TEST(Report, DeterministicAndSeedSensitive) {
  ex::Config c = ex::parse_config(small_symbol());
  ex::Outcome o1 = ex::execute(ex::prepare(c));
  ex::Outcome o2 = ex::execute(ex::prepare(c));
  EXPECT_EQ(ex::build_report(c, o1).dump(2), ex::build_report(c, o2).dump(2));
  EXPECT_TRUE(o1.pass());

  json j = small_symbol();
  j["seed"] = 4;
  ex::Config c4 = ex::parse_config(j);
  EXPECT_NE(c4.hash(), c.hash());
  json r4 = ex::build_report(c4, ex::execute(ex::prepare(c4)));
  EXPECT_NE(r4.dump(), ex::build_report(c, o1).dump());
}

TEST(Report, VerdictsNameInvariantAndMeasuredValue) {
  ex::Config c = ex::parse_config(small_symbol());
  json r = ex::build_report(c, ex::execute(ex::prepare(c)));
  ASSERT_FALSE(r["verdicts"].empty());
  for (auto& v : r["verdicts"]) {
    EXPECT_FALSE(v["name"].get<std::string>().empty());
    EXPECT_FALSE(v["invariant"].get<std::string>().empty());
    EXPECT_TRUE(v.contains("measured"));
    EXPECT_TRUE(v.contains("threshold"));
  }
  EXPECT_EQ(r["metadata"]["config_hash"], "fnv1a64:" + c.hash());
  EXPECT_FALSE(r.dump().find("timestamp") != std::string::npos);
  for (auto& t : r["tables"]) EXPECT_FALSE(t["csv"].get<std::string>().empty());
}

TEST(Report, NumericFailureBecomesFailedVerdict) {
  ex::Outcome o = ex::execute([]() -> ex::Outcome { throw OverflowError("synthetic overflow"); });
  ASSERT_EQ(o.verdicts.size(), 1u);
  EXPECT_EQ(o.verdicts[0].name, "execution");
  EXPECT_FALSE(o.verdicts[0].pass);
  EXPECT_FALSE(o.pass());
  EXPECT_FALSE(ex::Outcome{}.pass());
}

TEST(Controls, DocumentedVerdictsFail) {
  json j = small_symbol();
  j["params"]["control"] = "corrupt_symbol";
  ex::Outcome o = ex::execute(ex::prepare(ex::parse_config(j)));
  for (auto& v : o.verdicts) EXPECT_EQ(v.pass, v.name != "representation") << v.name;

  j["params"]["control"] = "non_analytic";
  o = ex::execute(ex::prepare(ex::parse_config(j)));
  for (auto& v : o.verdicts) EXPECT_EQ(v.pass, v.name == "representation") << v.name;
}

TEST(Cli, ListBuiltins) {
  fs::path d = scratch("list");
  Proc p = run_cli("list-builtins", d);
  EXPECT_EQ(p.status, 0);
  for (const char* s : {"dyadic_zigzag", "orlicz:power", "annulus", "gaussian", "mixed_growth_5x5", "weights-report"})
    EXPECT_NE(p.out.find(s), std::string::npos) << s;
}

TEST(Cli, UsageAndConfigErrorsExitWithTwo) {
  fs::path d = scratch("usage");
  EXPECT_EQ(run_cli("", d).status, 2);
  EXPECT_EQ(run_cli("frobnicate", d).status, 2);
  EXPECT_EQ(run_cli("run", d).status, 2);

  json j = small_symbol();
  j["space"]["weight"]["family"] = "zigzag";
  std::ofstream(d / "bad.json") << j.dump();
  Proc p = run_cli("validate \"" + (d / "bad.json").string() + "\"", d);
  EXPECT_EQ(p.status, 2);
  EXPECT_NE(p.err.find("/space/weight/family"), std::string::npos) << p.err;
  p = run_cli("run \"" + (d / "bad.json").string() + "\" --out \"" + (d / "o").string() + "\"", d);
  EXPECT_EQ(p.status, 2);
  EXPECT_FALSE(fs::exists(d / "o" / "report.json"));

  std::ofstream(d / "broken.json") << "{\"experiment\": ";
  p = run_cli("validate \"" + (d / "broken.json").string() + "\"", d);
  EXPECT_EQ(p.status, 2);
  EXPECT_NE(p.err.find("not valid JSON"), std::string::npos);
}

TEST(Cli, RunWritesOutputsAndExitStatusFollowsVerdicts) {
  fs::path d = scratch("run");
  std::ofstream(d / "ok.json") << small_symbol().dump();
  json bad = small_symbol();
  bad["params"]["control"] = "corrupt_symbol";
  std::ofstream(d / "control.json") << bad.dump();

  Proc a = run_cli("run \"" + (d / "ok.json").string() + "\" --out \"" + (d / "a").string() + "\"", d);
  Proc b = run_cli("run \"" + (d / "ok.json").string() + "\" --out \"" + (d / "b").string() + "\"", d);
  EXPECT_EQ(a.status, 0) << a.out << a.err;
  EXPECT_EQ(b.status, 0);
  EXPECT_EQ(slurp(d / "a" / "report.json"), slurp(d / "b" / "report.json"));
  EXPECT_TRUE(fs::exists(d / "a" / "tables" / "symbol_levels.csv"));
  EXPECT_TRUE(fs::exists(d / "a" / "plotdata" / "symbol.csv"));
  json meta = load(d / "a" / "run_metadata.json");
  EXPECT_TRUE(meta.contains("timestamp"));
  EXPECT_EQ(meta["config_hash"], load(d / "a" / "report.json")["metadata"]["config_hash"]);

  Proc s = run_cli("run \"" + (d / "ok.json").string() + "\" --seed 99 --out \"" + (d / "s").string() + "\"", d);
  EXPECT_EQ(s.status, 0);
  EXPECT_EQ(load(d / "s" / "report.json")["metadata"]["seed"], 99);

  Proc c = run_cli("run \"" + (d / "control.json").string() + "\" --out \"" + (d / "c").string() + "\"", d);
  EXPECT_EQ(c.status, 1);
  EXPECT_NE(c.out.find("FAIL representation"), std::string::npos);
  EXPECT_FALSE(load(d / "c" / "report.json")["pass"].get<bool>());
}
