#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "jumpcal/harness.hpp"

using namespace jumpcal;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("config validation") {
  nlohmann::json j = {{"replicas", 0}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
  j = {{"measure", {{"kind", "alpha_stable"}, {"alpha", 0.5}}}, {"eps", 0.0}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
  j = {{"measure", {{"kind", "no_such_kind"}}}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
  j = {{"measure",
        {{"kind", "compound_poisson"},
         {"rate", 0.5},
         {"sizes", {{"type", "dirac"}, {"x", 1.0}}}}},
       {"replicas", 100},
       {"seed", 7}};
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  CHECK(c.replicas == 100);
  CHECK(c.seed == 7);
  CHECK(c.measure.kind() == MeasureKind::compound_poisson);
  CHECK_THROWS_AS(ExperimentConfig::from_file("/no/such/file.json"),
                  ConfigError);
}

TEST_CASE("unknown identity names are rejected") {
  ExperimentConfig c;
  c.replicas = 10;
  CHECK_THROWS_AS(verify_identity("no-such-identity", c), ConfigError);
}

TEST_CASE("expectation identity on a small run") {
  ExperimentConfig c;
  c.replicas = 4000;
  c.seed = 123;
  const IdentityReport rep = verify_identity("prop-elau", c);
  CHECK(rep.pass);
  CHECK(rep.lhs == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rep.rhs == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pathwise identities hold on the finite-activity catalog") {
  ExperimentConfig c;
  c.measure = JumpMeasure::compound_poisson(1.5, SizeDist::uniform(0.2, 1.0));
  c.replicas = 200;
  c.seed = 5;
  c.functional = "path-terminal";
  c.field = "count-before";
  for (const char* name :
       {"pathwise-product-rule", "pathwise-s-transfer",
        "pathwise-transfer-of-s", "pathwise-phi-product",
        "pathwise-psi-of-phi"}) {
    const IdentityReport rep = verify_identity(name, c);
    INFO(name);
    CHECK(rep.pass);
    CHECK(rep.max_discrepancy < 1e-10);
  }
}

TEST_CASE("runs are byte-identical across reruns and worker counts") {
  const auto base = std::filesystem::temp_directory_path() / "jumpcal-test";
  std::filesystem::remove_all(base);
  ExperimentConfig c;
  c.experiment = "thm-duality";
  c.measure = JumpMeasure::compound_poisson(0.5, SizeDist::dirac(1.0));
  c.functional = "count";
  c.replicas = 500;
  c.seed = 99;
  c.workers = 1;
  c.out_dir = (base / "a").string();
  const RunSummary s1 = run_experiment(c);
  c.workers = 4;
  c.out_dir = (base / "b").string();
  const RunSummary s2 = run_experiment(c);
  CHECK(s1.all_pass);
  CHECK(s2.all_pass);
  CHECK(slurp(base / "a" / "thm-duality.csv") ==
        slurp(base / "b" / "thm-duality.csv"));
  CHECK(slurp(base / "a" / "summary.csv") == slurp(base / "b" / "summary.csv"));
  CHECK(!slurp(base / "a" / "thm-duality.csv").empty());
  std::filesystem::remove_all(base);
}

TEST_CASE("csv writer emits the versioned header") {
  const auto path =
      std::filesystem::temp_directory_path() / "jumpcal-test-csv" / "t.csv";
  write_csv(path, {"a", "b"}, {{1.0, 2.5}, {1.0 / 3.0, 4.0}});
  const std::string text = slurp(path);
  CHECK(text.rfind("# jumpcal-csv v1\na,b\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  std::filesystem::remove_all(path.parent_path());
}
