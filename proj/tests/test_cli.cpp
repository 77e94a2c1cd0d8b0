#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support/test_support.hpp"

using namespace homeig;
using namespace homeig::test;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "homeig");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return data_dir() + "/" + name; }

}  // namespace

TEST_CASE("cli solve exit codes", "[cli]") {
  SECTION("canonical pair converges: exit 0") {
    const auto r = run_cli({"solve", "--k", data("canonical_K.mtx"), "--l",
                            data("canonical_L_array_general.mtx"), "--order", "20"});
    REQUIRE(r.code == cli::kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["schema"] == 1);
    CHECK(doc["meta"]["command"] == "solve");
    CHECK(doc["meta"]["order"] == 20);
    REQUIRE(doc["results"].size() == 2);
    CHECK(doc["results"][0]["index"] == 1);
    CHECK(std::abs(doc["results"][0]["lambda_at_theta"].get<double>() - 0.995012438) <= 1e-9);
    CHECK(std::abs(doc["results"][1]["lambda_at_theta"].get<double>() - 3.004987562) <= 1e-9);
    CHECK(doc["results"][0]["converged"] == true);
  }
  SECTION("degenerate K: exit 1 naming the indices") {
    const auto r = run_cli({"solve", "--k", data("degenerate_K.mtx"), "--l", data("identity3.mtx")});
    CHECK(r.code == cli::kExitError);
    CHECK(r.err.find("eigenvalues 1 and 2") != std::string::npos);
  }
  SECTION("strong perturbation: exit 2") {
    const auto r = run_cli({"solve", "--k", data("divergent_K.mtx"), "--l", data("divergent_L.mtx")});
    CHECK(r.code == cli::kExitNotConverged);
    const auto doc = nlohmann::json::parse(r.out);
    for (const auto& res : doc["results"]) CHECK(res["converged"] == false);
  }
  SECTION("oracle comparison attached") {
    const auto r = run_cli({"solve", "--k", data("canonical_K.mtx"), "--l",
                            data("canonical_L_coordinate_symmetric.mtx"), "--oracle"});
    REQUIRE(r.code == cli::kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["results"][1]["oracle"]["lambda_error"].get<double>() <= 1e-9);
  }
}

TEST_CASE("cli errors", "[cli]") {
  CHECK(run_cli({}).code == cli::kExitError);
  CHECK(run_cli({"solve"}).code == cli::kExitError);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitError);
  CHECK(run_cli({"solve", "--k", data("missing.mtx"), "--l", data("canonical_K.mtx")}).code ==
        cli::kExitError);
  CHECK(run_cli({"solve", "--k", data("canonical_K.mtx"), "--l", data("identity3.mtx")}).code ==
        cli::kExitError);
  CHECK(run_cli({"solve", "--k", data("canonical_K.mtx"), "--l", data("canonical_K.mtx"), "--order",
                 "3"})
            .code == cli::kExitError);
  CHECK(run_cli({"stage", "--k", data("canonical_K.mtx"), "--l", data("canonical_K.mtx"),
                 "--stages", "zero"})
            .code == cli::kExitError);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("cli coeffs", "[cli]") {
  const auto r = run_cli({"coeffs", "--k", data("canonical_K.mtx"), "--l",
                          data("canonical_L_array_general.mtx"), "--order", "2"});
  REQUIRE(r.code == cli::kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  const auto& a = doc["coefficients"]["a"];
  CHECK(a[0][0] == 1.0);
  CHECK(a[0][1] == 0.0);
  CHECK(std::abs(a[0][2].get<double>() + 0.005) <= 1e-15);
}

TEST_CASE("cli sweep", "[cli]") {
  SECTION("csv on grid {0}") {
    const auto r = run_cli({"sweep", "--k", data("canonical_K.mtx"), "--l",
                            data("canonical_L_array_general.mtx"), "--grid", "0"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out ==
          "theta,index,lambda_series,lambda_oracle,residual\n"
          "0,1,1,,0\n"
          "0,2,3,,0\n");
  }
  SECTION("csv with oracle round-trips") {
    const auto r = run_cli({"sweep", "--k", data("canonical_K.mtx"), "--l",
                            data("canonical_L_array_general.mtx"), "--points", "5", "--oracle"});
    REQUIRE(r.code == cli::kExitOk);
    const auto table = read_trajectory_csv(r.out);
    REQUIRE(table.rows.size() == 10);
    for (const auto& row : table.rows) {
      REQUIRE(row.lambda_oracle.has_value());
      CHECK(std::abs(row.lambda_series - *row.lambda_oracle) <= 1e-9);
    }
  }
  SECTION("json") {
    const auto r = run_cli({"sweep", "--k", data("canonical_K.mtx"), "--l",
                            data("canonical_L_array_general.mtx"), "--grid", "0,1", "--format", "json"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(nlohmann::json::parse(r.out)["trajectory"].size() == 4);
  }
}

TEST_CASE("cli validate and stage", "[cli]") {
  CHECK(run_cli({"validate", "--k", data("canonical_K.mtx"), "--l",
                 data("canonical_L_array_general.mtx")})
            .code == cli::kExitOk);
  CHECK(run_cli({"validate", "--k", data("divergent_K.mtx"), "--l", data("divergent_L.mtx")}).code ==
        cli::kExitNotConverged);
  const auto staged = run_cli({"stage", "--k", data("divergent_K.mtx"), "--l", data("divergent_L.mtx"),
                               "--stages", "auto", "--order", "20"});
  CHECK(staged.code == cli::kExitOk);
  const auto doc = nlohmann::json::parse(staged.out);
  CHECK(doc["meta"]["breakpoints"].size() >= 3);
}

TEST_CASE("cli output file", "[cli]") {
  TempFile file("cli_out.json");
  const auto r = run_cli({"solve", "--k", data("canonical_K.mtx"), "--l",
                          data("canonical_L_array_general.mtx"), "--output", file.path()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.empty());
  const auto parsed = read_report(read_text_file(file.path()));
  CHECK(parsed.results.size() == 2);
}

TEST_CASE("cli user-supplied basis", "[cli]") {
  const std::vector<std::string> base{"solve", "--k", data("canonical_K.mtx"), "--l",
                                      data("canonical_L_array_general.mtx")};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
  };
  const auto plain = run_cli(base);
  const auto vectors_only = with({"--basis", data("basis/canonical_vectors.mtx")});
  const auto both = with({"--basis", data("basis/canonical_vectors.mtx"), "--basis-values",
                          data("basis/canonical_values.mtx")});
  REQUIRE(vectors_only.code == cli::kExitOk);
  REQUIRE(both.code == cli::kExitOk);
  const auto x = nlohmann::json::parse(plain.out)["results"];
  CHECK(nlohmann::json::parse(vectors_only.out)["results"] == x);
  CHECK(nlohmann::json::parse(both.out)["results"] == x);

  const auto wrong = with({"--basis", data("basis/rotated_vectors.mtx")});
  CHECK(wrong.code == cli::kExitError);
  CHECK(with({"--basis-values", data("basis/canonical_values.mtx")}).code == cli::kExitError);
}
