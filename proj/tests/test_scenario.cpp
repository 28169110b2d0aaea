#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "mmchain/io.hpp"
#include "mmchain/scenario.hpp"

using namespace mmchain;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mmchain_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json load(const fs::path& p) { return json::parse(read_file(p)); }

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MMCHAIN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const fs::path kFixtures = MMCHAIN_FIXTURE_DIR;
const fs::path kScenarios = MMCHAIN_SCENARIO_DIR;

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("dotted overrides") {
  json c = {{"run", {{"paths", 10}}}, {"phi", json::array({{{"family", "power"}, {"p", 2}}})}};
  apply_override(c, "run.paths=20");
  apply_override(c, "run.seed=5");
  apply_override(c, "phi.0.p=4");
  apply_override(c, "name=hello");
  apply_override(c, "run.u_grid=[2,3]");
  CHECK(c["run"]["paths"] == 20);
  CHECK(c["run"]["seed"] == 5);
  CHECK(c["phi"][0]["p"] == 4);
  CHECK(c["name"] == "hello");
  CHECK(c["run"]["u_grid"].size() == 2);
  CHECK_THROWS_AS(apply_override(c, "novalue"), ArgumentError);
  CHECK_THROWS_AS(apply_override(c, "phi.7.p=1"), ArgumentError);
}

TEST_CASE("schema problems are all reported at once") {
  try {
    validate_config(load(kFixtures / "many_problems.json"));
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const auto& p = e.problems();
    CHECK(p.size() >= 6);
    auto mentions = [&](const std::string& s) {
      return std::any_of(p.begin(), p.end(), [&](const std::string& x) { return x.find(s) != std::string::npos; });
    };
    CHECK(mentions("colour"));
    CHECK(mentions("teleport"));
    CHECK(mentions("run.paths"));
    CHECK(mentions("space"));
    CHECK(mentions("phi[0]"));
    CHECK(mentions("field"));
  }
}

TEST_CASE("every shipped scenario validates") {
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    const auto j = load(e.path());
    if (j.contains("suite")) continue;
    CHECK_NOTHROW(validate_config(j));
  }
}

TEST_CASE("smoke scenario matches its golden manifest and summary") {
  const auto out = scratch("smoke");
  RunOptions o;
  o.out_dir = out;
  const auto r = run_config_file(kScenarios / "smoke_two_point.json", o);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.manifest_json.at("artifacts").size() == 1);
  CHECK(read_file(r.manifest) == read_file(kFixtures / "smoke_two_point.manifest.json"));
  CHECK(report(r.manifest) == read_file(kFixtures / "smoke_two_point.report.txt"));
  CHECK(fs::exists(out / "smoke_two_point" / "manifest_report.csv"));

  // Same config and seed again: identical bytes.
  const auto again = scratch("smoke_again");
  o.out_dir = again;
  o.exec.threads = 4;
  const auto r2 = run_config_file(kScenarios / "smoke_two_point.json", o);
  CHECK(read_file(r2.manifest) == read_file(r.manifest));
}

TEST_CASE("report never trusts a modified artifact") {
  const auto out = scratch("tamper");
  RunOptions o;
  o.out_dir = out;
  const auto r = run_config_file(kScenarios / "smoke_two_point.json", o);
  write_file(out / "smoke_two_point" / "norms_power2.csv", "point,norm\n0,1\n");
  CHECK_THROWS_AS(report(r.manifest), ValidationError);
  write_file(out / "empty.json", "{}");
  CHECK_THROWS_AS(report(out / "empty.json"), ArgumentError);
}

TEST_CASE("command-line exit codes") {
  const auto out = scratch("cli");
  CHECK(cli("run -c " + (kScenarios / "smoke_two_point.json").string() + " -o " + out.string() + " --paths 500",
            out / "ok.log") == 0);
  CHECK(load(out / "smoke_two_point" / "manifest.json").at("paths") == 500);

  CHECK(cli("run -c " + (kFixtures / "bad_holder.json").string() + " -o " + out.string(), out / "holder.log") == 1);
  CHECK(read_file(out / "holder.log").find("p > theta") != std::string::npos);

  CHECK(cli("run -c " + (kFixtures / "many_problems.json").string() + " -o " + out.string(), out / "schema.log") == 1);
  CHECK(read_file(out / "schema.log").find("teleport") != std::string::npos);

  CHECK(cli("run -c " + (kFixtures / "clt_violation.json").string() + " -o " + out.string(), out / "viol.log") == 2);
  CHECK(load(out / "clt_violation" / "manifest.json").at("exit_code") == 2);

  CHECK(cli("run", out / "usage.log") == 1);
  CHECK(cli("report " + (out / "clt_violation" / "manifest.json").string(), out / "report.log") == 0);
  CHECK(cli("list-scenarios --dir " + kScenarios.string(), out / "list.log") == 0);
  CHECK(read_file(out / "list.log").find("grid8x8_tails") != std::string::npos);
}

TEST_CASE("output directory defaults to the environment") {
  const auto out = scratch("env");
  setenv("MMCHAIN_OUT", out.c_str(), 1);
  CHECK(default_out_dir() == out);
  unsetenv("MMCHAIN_OUT");
  CHECK(default_out_dir() == fs::path("mmchain_out"));
}

}
