#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "fbmlab/cli.hpp"

using namespace fbmlab;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("fbmlab_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("asymptotic command prints one document per threshold") {
  const Run r = run({"asymptotic", "--functional", "drawdown", "--H", "0.5", "--mu", "0", "--T",
                     "1", "--u", "2", "--u", "3"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<nlohmann::json> docs;
  while (std::getline(lines, line)) docs.push_back(nlohmann::json::parse(line));
  REQUIRE(docs.size() == 2);
  CHECK(docs[0]["probability"].get<double>() ==
        doctest::Approx(4.0 * 0.066807201268858066).epsilon(1e-14));
  CHECK(docs[0]["schema_version"] == "1.0.0");
  CHECK(docs[0]["constants_used"]["piterbarg"]["provenance"] == "closed_form");
  CHECK(docs[1]["u"] == 3.0);
}

TEST_CASE("asymptotic drawup at H = 1/2") {
  const Run r = run({"asymptotic", "--functional", "drawup", "--H", "0.5", "--u", "2"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["probability"].get<double>() ==
        doctest::Approx(4.0 * 0.0062096653257761352).epsilon(1e-13));
}

TEST_CASE("asymptotic usage and precondition failures exit 2") {
  Run r = run({"asymptotic", "--H", "0.5"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--u") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = run({"asymptotic", "--H", "0.5", "--u", "0.3"});
  CHECK(r.code == 2);
  CHECK(r.err.find("threshold too small for asymptotic regime") != std::string::npos);
  CHECK(run({"asymptotic", "--H", "1.5", "--u", "2"}).code == 2);
  CHECK(run({"asymptotic", "--functional", "peak", "--u", "2"}).code == 2);
  CHECK(run({"asymptotic", "--u", "two"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("asymptotic drawup with a supplied constant names the variant") {
  const Run r = run({"asymptotic", "--functional", "drawup", "--H", "0.35", "--u", "2",
                     "--pickands", "0.9", "--variant", "statement"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["variant"] == "statement");
  CHECK(j["constants_used"]["pickands"]["provenance"] == "supplied");
  CHECK(j["variant_note"].is_string());
}

TEST_CASE("simulate is deterministic and reports nested-grid estimates") {
  const std::vector<std::string> args{"simulate", "--functional", "drawdown", "--H", "0.5",
                                      "--u", "1.0", "--paths", "1000", "--steps", "256",
                                      "--seed", "4"};
  const Run a = run(args);
  REQUIRE(a.code == 0);
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Run b = run(threaded);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["fine"]["n_steps"] == 512);
  CHECK(j["coarse"]["n_steps"] == 256);
  CHECK(j["sampler"] == "brownian");
  const double p = j["fine"]["p_hat"].get<double>();
  CHECK(j["fine"]["ci_low"].get<double>() <= p);
  CHECK(p <= j["fine"]["ci_high"].get<double>());
}

TEST_CASE("simulate with a vanishing threshold") {
  const Run r = run({"simulate", "--H", "0.3", "--u", "1e-12", "--paths", "1000", "--steps",
                     "64"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["fine"]["p_hat"].get<double>() == 1.0);
}

TEST_CASE("simulate dumps per-path values") {
  const auto file = scratch("dump.csv");
  const Run r = run({"simulate", "--H", "0.7", "--u", "1", "--paths", "1000", "--steps", "32",
                     "--functional", "drawup", "--dump-paths", file.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == "path,drawup_n,drawup_2n");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 1000);
  std::filesystem::remove(file);
}

TEST_CASE("simulate error codes") {
  CHECK(run({"simulate", "--H", "0.3", "--u", "1", "--paths", "10"}).code == 2);
  // the fine grid (8192 steps) exceeds the Cholesky size cap
  const Run big = run({"simulate", "--H", "0.3", "--u", "1", "--paths", "1000", "--steps",
                       "4096", "--sampler", "cholesky"});
  CHECK(big.code == 3);
  CHECK(big.err.find("sampler failure") != std::string::npos);
  CHECK(run({"simulate", "--H", "0.3", "--u", "1", "--paths", "1000", "--sampler", "brownian"})
            .code == 3);
}

TEST_CASE("constants command caches its estimate") {
  const auto cache = scratch("cache.json");
  const std::vector<std::string> args{"constants", "--kind", "piterbarg", "--H", "0.5",
                                      "--nu", "1", "--b", "4", "--eta", "0.0625",
                                      "--sims", "2000", "--seed", "3", "--cache",
                                      cache.string()};
  const Run first = run(args);
  REQUIRE(first.code == 0);
  const auto a = nlohmann::json::parse(first.out);
  CHECK(a["provenance"] == "simulated");
  CHECK(a["value"].get<double>() > 1.0);
  CHECK(std::filesystem::exists(cache));
  const Run second = run(args);
  REQUIRE(second.code == 0);
  const auto b = nlohmann::json::parse(second.out);
  CHECK(b["provenance"] == "cached");
  CHECK(b["value"] == a["value"]);
  std::filesystem::remove(cache);
}

TEST_CASE("constants command honours the cache environment variable") {
  const auto cache = scratch("env_cache.json");
  ::setenv("FBMLAB_CACHE", cache.c_str(), 1);
  const Run r = run({"constants", "--kind", "piterbarg", "--H", "0.5", "--b", "4", "--eta",
                     "0.0625", "--sims", "1000"});
  ::unsetenv("FBMLAB_CACHE");
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(cache));
  std::filesystem::remove(cache);
}

TEST_CASE("constants command exits 4 when the cache cannot be written") {
  const Run r = run({"constants", "--kind", "piterbarg", "--H", "0.5", "--b", "4", "--eta",
                     "0.0625", "--sims", "1000", "--cache", "/nonexistent-dir/cache.json"});
  CHECK(r.code == 4);
  CHECK(r.out.empty());
}

TEST_CASE("constants command rejects bad settings") {
  CHECK(run({"constants", "--kind", "pickands", "--H", "0.5", "--b", "2", "--b", "4", "--sims",
             "1000", "--cache", scratch("x.json").string()})
            .code == 2);
  CHECK(run({"constants", "--kind", "other"}).code == 2);
}

TEST_CASE("validate suites") {
  CHECK(run({"validate", "--suite", "everything"}).code == 2);
  const auto dir = scratch("validate");
  const Run r = run({"validate", "--suite", "lemmas", "--out", dir.string(), "--lemma-H", "0.5",
                     "--lemma-H", "0.75"});
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "lemma3_H0.5.dat"));
  CHECK(std::filesystem::exists(dir / "lemma1_H0.75.csv"));
  std::ifstream in(dir / "report.json");
  const auto report = nlohmann::json::parse(in);
  CHECK(report["pass"] == true);
  CHECK(report["lemma_checks"].size() == 6);

  const Run rough = run({"validate", "--suite", "lemmas", "--out", dir.string(), "--lemma-H",
                         "0.25"});
  CHECK(rough.code == 5);
  CHECK(rough.err.find("lemma2ii_H0.25") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("validate convergence writes ratio tables") {
  const auto dir = scratch("convergence");
  const Run r = run({"validate", "--suite", "convergence", "--out", dir.string(), "--paths",
                     "5000", "--steps", "256", "--convergence-u", "1.5", "--convergence-u",
                     "2.0", "--convergence-functional", "drawdown"});
  CHECK((r.code == 0 || r.code == 5));
  CHECK(std::filesystem::exists(dir / "convergence_drawdown_H0.5.csv"));
  std::ifstream in(dir / "convergence_drawdown_H0.5.dat");
  std::string header;
  std::getline(in, header);
  CHECK(header == "# u ratio");
  std::filesystem::remove_all(dir);
}

TEST_CASE("config documents fill options and flags override them") {
  const auto cfg = scratch("config.json");
  {
    std::ofstream out(cfg);
    out << R"({"functional": "drawup", "H": 0.5, "u": [2.0], "T": 1.0})";
  }
  Run r = run({"asymptotic", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["functional"] == "drawup");
  r = run({"asymptotic", "--config", cfg.string(), "--functional", "drawdown"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["functional"] == "drawdown");
  {
    std::ofstream out(cfg);
    out << "{not json";
  }
  CHECK(run({"asymptotic", "--config", cfg.string()}).code == 2);
  CHECK(run({"asymptotic", "--config", "/nonexistent.json", "--u", "2"}).code == 2);
  std::filesystem::remove(cfg);
}

TEST_CASE("sample command writes a path") {
  const Run r = run({"sample", "--H", "0.3", "--steps", "8", "--seed", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,value\n0,0\n", 0) == 0);
  CHECK(run({"sample", "--H", "0.3", "--steps", "8", "--seed", "2"}).out == r.out);
}
