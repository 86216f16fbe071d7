#include <CLI11.hpp>
#include <json.hpp>

#include <whlab/experiments.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
namespace ex = whlab::experiments;
using json = nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw whlab::ConfigError("/", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw whlab::ConfigError("/", std::string("not valid JSON: ") + e.what());
  }
}

ex::Config load_config(const fs::path& path, std::optional<std::uint64_t> seed) {
  json j = load_json(path);
  if (seed) {
    if (!j.is_object()) throw whlab::ConfigError("/", "expected an object");
    j["seed"] = *seed;
  }
  return ex::parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_section(const char* title, const std::vector<std::pair<std::string, std::string>>& items) {
  std::cout << title << ":\n";
  for (auto& [name, doc] : items) std::cout << "  " << name << "\n      " << doc << "\n";
}

int list_builtins() {
  print_section("weight families (space.weight.family)", whlab::io::weight_families());
  print_section("kernel families (operator.kernel.family)", whlab::io::kernel_families());
  print_section("orlicz families (space.orlicz.family)", whlab::io::orlicz_families());
  print_section("operator kinds (operator.kind)",
                {{"kernel", "convolution by a sampled kernel, then restriction to R+"},
                 {"shift", "a >= 0: translation by a on the grid lattice"},
                 {"identity", "the identity operator"}});
  print_section("operator weights (params.operator_weight.kind)", whlab::io::operator_weight_families());
  print_section("experiments (experiment)", ex::experiment_names());
  return kExitPass;
}

int validate(const fs::path& path) {
  ex::Config c = load_config(path, std::nullopt);
  ex::prepare(c);
  std::cout << path.string() << ": valid " << c.experiment << " config (hash fnv1a64:" << c.hash() << ")\n";
  return kExitPass;
}

int run(const fs::path& path, const std::optional<std::string>& out, std::optional<std::uint64_t> seed, int argc, char** argv) {
  ex::Config c = load_config(path, seed);
  ex::Runner runner = ex::prepare(c);
  const fs::path dir = out ? fs::path(*out) : fs::path(c.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  ex::Outcome o = ex::execute(runner);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json report = ex::write_outputs(dir, c, o);

  json cmd = json::array();
  for (int i = 0; i < argc; ++i) cmd.push_back(argv[i]);
  json meta{{"timestamp", utc_now()},
            {"command", cmd},
            {"config_path", path.string()},
            {"output_dir", dir.string()},
            {"config_hash", report["metadata"]["config_hash"]},
            {"wall_seconds", seconds}};
  whlab::io::write_text(dir / "run_metadata.json", meta.dump(2) + "\n");

  for (auto& v : o.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << whlab::io::num(v.measured) << " " << v.relation << " "
              << whlab::io::num(v.threshold);
    if (!v.detail.empty()) std::cout << " (" << v.detail << ")";
    std::cout << "\n";
  }
  for (auto& n : o.notes) std::cout << "note: " << n << "\n";
  std::cout << (o.pass() ? "all verdicts pass" : "some verdicts failed") << "; report in " << (dir / "report.json").string() << "\n";
  return o.pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"whlab: numerical checks for Wiener-Hopf operators on weighted spaces"};
  app.require_subcommand(1);

  std::string run_path, validate_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  CLI::App* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
  run_cmd->add_option("config", run_path, "config.json")->required();
  run_cmd->add_option("--out", out, "output directory (default: output.dir of the config)");
  run_cmd->add_option("--seed", seed, "override the config seed");
  CLI::App* list_cmd = app.add_subcommand("list-builtins", "list weight, kernel, Orlicz families and experiments");
  CLI::App* val_cmd = app.add_subcommand("validate", "check a config file without running it");
  val_cmd->add_option("config", validate_path, "config.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*list_cmd) return list_builtins();
    if (*val_cmd) return validate(validate_path);
    return run(run_path, out, seed, argc, argv);
  } catch (const whlab::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
