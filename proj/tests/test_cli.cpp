#include "doctest.h"
#include "json.hpp"
#include "scorelab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace scorelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("scorelab_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string body(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out += line + "\n";
  }
  return out;
}

int run(const std::string& cmd, const nlohmann::json& cfg, const fs::path& dir,
        std::vector<std::pair<std::string, std::string>> extra = {}) {
  extra.push_back({"output", dir.string()});
  std::ostringstream log;
  return cli::run(cmd, cfg.dump(), extra, log);
}

}  // namespace

TEST_CASE("cli: unknown target is a config error and leaves nothing behind") {
  const auto dir = scratch("bad_target");
  CHECK(run("verify-bounds", {{"target", "no_such_target"}, {"theorem", "thm31"}}, dir) == cli::kExitConfig);
  CHECK_FALSE(fs::exists(dir));
  CHECK(run("sample", {{"target", "mixture2"}, {"T", -1.0}}, dir) == cli::kExitConfig);
  CHECK_FALSE(fs::exists(dir));
  CHECK(run("sample", {{"target", "mixture2"}, {"bogus_key", 1}}, dir) == cli::kExitConfig);
  CHECK(run("frobnicate", nlohmann::json::object(), dir) == cli::kExitConfig);
}

TEST_CASE("cli: verify-bounds on the standard normal passes") {
  const auto dir = scratch("verify");
  REQUIRE(run("verify-bounds", {{"target", "std_normal"}, {"theorem", "thm31"}}, dir) == cli::kExitOk);
  const auto csv = slurp(dir / "verify-bounds_thm31_std_normal.csv");
  CHECK(csv.rfind("theorem,check,t_bar,t,x0,bound,observed,margin,violated,skipped\n", 0) == 0);
  CHECK(csv.find(",true,") == std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(dir / "verify-bounds_thm31_std_normal.csv.meta.json"));
  CHECK(meta.contains("provenance"));
  CHECK(meta.contains("config"));
  fs::remove_all(dir);
}

TEST_CASE("cli: counterexample block row for M = 4") {
  const auto dir = scratch("counter");
  REQUIRE(run("counterexample", {{"M", {4}}}, dir) == cli::kExitOk);
  std::istringstream in(body(dir / "counterexample_blocks.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "M,A,B,C,D,E,ratio,ratio_quadrature,rel_diff,bound,pass");
  CHECK(row.rfind("4.0000000000000000e+00,", 0) == 0);
  CHECK(row.substr(row.size() - 5) == ",true");
  fs::remove_all(dir);
}

TEST_CASE("cli: overrides address nested keys and reruns are byte-identical") {
  const auto a = scratch("idem_a");
  const auto b = scratch("idem_b");
  const nlohmann::json cfg = {{"target", "mixture2"}, {"ensemble", 4000}, {"source", "exact"}, {"seed", 3}};
  REQUIRE(run("sample", cfg, a, {{"N", "10"}}) == cli::kExitOk);
  REQUIRE(run("sample", cfg, b, {{"N", "10"}}) == cli::kExitOk);
  CHECK(body(a / "samples.csv") == body(b / "samples.csv"));
  CHECK(body(a / "sample_metrics.csv") == body(b / "sample_metrics.csv"));
  CHECK(slurp(a / "samples.csv").find("# N: 10\n") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);

  const auto c = scratch("nested");
  CHECK(run("verify-bounds", {{"target", "std_normal"}, {"theorem", "thm31"}}, c,
            {{"grid.t_bars", "[0.1,0.2]"}, {"grid.per_axis", "5"}}) == cli::kExitOk);
  std::istringstream in(body(c / "verify-bounds_thm31_std_normal.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * 5 * 2);
  fs::remove_all(c);
}
