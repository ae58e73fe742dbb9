#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const std::string& work_dir() {
  static const std::string dir = [] {
    char tmpl[] = "/tmp/sympf_cli_XXXXXX";
    const char* d = mkdtemp(tmpl);
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  static int counter = 0;
  const std::string base = work_dir() + "/run" + std::to_string(counter++);
  const std::string cmd = std::string(SYMPF_CLI_PATH) + " " + args + " > " +
                          base + ".out 2> " + base + ".err";
  const int rc = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  return r;
}

std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = work_dir() + "/" + name;
  std::ofstream(path) << text;
  return path;
}

// Data rows of a CSV payload: everything that is neither a comment nor the
// header line immediately following the comments.
std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comment_payload(const std::string& text, const std::string& tag) {
  const std::string needle = "# " + tag + " ";
  const std::size_t pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  const std::size_t end = text.find('\n', pos);
  return text.substr(pos + needle.size(), end - pos - needle.size());
}

}  // namespace

TEST_CASE("cli: version and argument errors") {
  CHECK(cli("--version").code == 0);
  CHECK(cli("").code == 2);             // a subcommand is required
  CHECK(cli("frobnicate").code == 2);   // unknown subcommand
  CHECK(cli("verify bogus").code == 2); // unknown suite
}

TEST_CASE("cli: skewpoly emits the basis with closed-form norms") {
  const Run r = cli("skewpoly --family gse --n 1 --tau 0.5 --count 2");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.contains("version"));
  CHECK(doc["config"]["family"] == "gse");
  const double r0 = doc["basis"]["norms"][0][0].get<double>();
  CHECK(r0 == doctest::Approx(2.1708037636748028).epsilon(1e-13));

  const Run bad = cli("skewpoly --family gse --tau 1.5");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("tau") != std::string::npos);
}

TEST_CASE("cli: skewpoly general construction verifies itself") {
  const Run r = cli(
      "skewpoly --family gse --n 1 --tau 0.5 --count 2 --general "
      "--points 100 --verify --tol 1e-6");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["condition_estimate"].get<double>() > 0.0);
  CHECK(doc["residual"].get<double>() < 1e-6);
  CHECK(r.err.find("residual") != std::string::npos);
}

TEST_CASE("cli: config file keys override flags") {
  const std::string cfg = write_file("override.json", "{\"tau\": 0.9}");
  const Run r = cli("skewpoly --family gse --n 1 --tau 0.2 --count 1 "
                    "--config " + cfg);
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["config"]["tau"].get<double>() == doctest::Approx(0.9));
  const double r0 = doc["basis"]["norms"][0][0].get<double>();
  CHECK(r0 == doctest::Approx(std::sqrt(1.9 * M_PI)).epsilon(1e-13));

  const std::string bad = write_file("unknown.json", "{\"frob\": 1}");
  const Run rb = cli("skewpoly --config " + bad);
  CHECK(rb.code == 2);
  CHECK(rb.err.find("frob") != std::string::npos);
}

TEST_CASE("cli: coincident masses are rejected unless perturbed") {
  const Run bad = cli("charpoly --family gse --n 1 --masses 0.3,0.3");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("perturb-masses") != std::string::npos);

  const Run ok = cli(
      "charpoly --family gse --n 1 --masses 0.3,0.3 --perturb-masses 1e-3");
  CHECK(ok.code == 0);
}

TEST_CASE("cli: charpoly evaluates the expectation") {
  const Run r = cli("charpoly --family gse --n 1 --masses 0.37+0.21i");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["value"][0].get<double>() == doctest::Approx(1.5928).epsilon(1e-12));
  CHECK(doc["value"][1].get<double>() == doctest::Approx(0.1554).epsilon(1e-12));
}

TEST_CASE("cli: partition agrees with its brute-force cross-check") {
  const Run r = cli(
      "partition --family gse --n 1 --masses 0.4+0.3i --brute "
      "--points-per-axis 120");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["rel_difference"].get<double>() < 1e-5);
}

TEST_CASE("cli: projected correlator at explicit points") {
  const Run r = cli(
      "correlator --family gse --n 1 --projected --points 0.4,1.0");
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == doctest::Approx(0.4));
  CHECK(rows[0][1] == doctest::Approx(0.3682701403033233).epsilon(1e-12));
}

TEST_CASE("cli: grid scan integrates the density to N") {
  const std::string out = work_dir() + "/dens.csv";
  const Run r = cli("correlator --family gse --n 1 --out " + out);
  REQUIRE(r.code == 0);
  const json side = json::parse(slurp(out + ".json"));
  const double integral =
      side["diagnostics"]["integral_estimate"].get<double>();
  CHECK(std::abs(integral - 1.0) < 1e-4);
  CHECK(side["diagnostics"]["evaluations"].get<long long>() == 3600);

  // k > 1 scans need explicit points.
  CHECK(cli("correlator --family gse --n 2 --k 2").code == 2);
}

TEST_CASE("cli: reruns are byte identical") {
  const std::string args =
      "correlator --family chgse --n 1 --nu 1 --mu 0.5 "
      "--grid 0:2:24,-1:1:24";
  const Run a = cli(args);
  const Run b = cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  const std::string sample =
      "sample --family gse --n 2 --steps 40 --burn-in 200 --seed 9";
  const Run s1 = cli(sample);
  const Run s2 = cli(sample);
  REQUIRE(s1.code == 0);
  CHECK(s1.out == s2.out);
}

TEST_CASE("cli: sample emits chain rows and stats") {
  const Run r = cli(
      "sample --family chgse --n 2 --mu 0.5 --steps 30 --burn-in 200 "
      "--seed 4");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("step,site,x,y") != std::string::npos);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 60);  // N = 2 sites per retained sweep
  for (const auto& row : rows) {
    CHECK(row[2] > 0.0);  // quadrant representatives
    CHECK(row[3] > 0.0);
  }
  const json stats = json::parse(comment_payload(r.out, "stats"));
  CHECK(stats["acceptance_rate"].get<double>() > 0.0);
  CHECK(stats["acceptance_rate"].get<double>() < 1.0);
  CHECK(stats["seed"].get<long long>() == 4);
}

TEST_CASE("cli: sweep reports the approach to the Hermitean limit") {
  const Run r = cli("sweep --family gse --n 1 --params 0.9,0.99");
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == doctest::Approx(0.9));
  CHECK(rows[0][1] == doctest::Approx(0.010363863).epsilon(1e-6));
  CHECK(rows[0][2] == doctest::Approx(0.0259783521).epsilon(1e-6));
  const json res = json::parse(comment_payload(r.out, "result"));
  CHECK(res["monotone"].get<bool>());
  CHECK(res["final_rel_deviation"].get<double>() ==
        doctest::Approx(0.00250941423).epsilon(1e-6));
}

TEST_CASE("cli: verify runs a full suite end to end") {
  const Run r = cli("verify identities --seed 12345");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("suite identities") != std::string::npos);
  CHECK(r.out.find("[PASS]") != std::string::npos);
  CHECK(r.out.find("[FAIL]") == std::string::npos);
}
