#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pinning/cli.hpp"
#include "pinning/errors.hpp"
#include "pinning/homogeneous.hpp"
#include "pinning/io.hpp"

using namespace pinning;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pinning_lab");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / "pinning_lab_tests";
  fs::create_directories(d);
  return d;
}

std::vector<std::string> csv_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> cells;
  std::istringstream in(s);
  for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
  return cells;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(NAN) == "nan");
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -1e-300, 0.0782331}) CHECK(std::stod(format_number(v)) == v);
  CHECK(json_number(kInf) == "inf");
  CHECK(json_number(0.5) == 0.5);
}

TEST_CASE("csv table") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  CHECK(t.str() == "a,b\n1,2\n");
  CHECK_THROWS(t.add_row({"1"}));
}

TEST_CASE("grids") {
  CHECK(parse_grid("0.1,0.2") == std::vector<double>{0.1, 0.2});
  CHECK(parse_grid("0.5") == std::vector<double>{0.5});
  auto g = parse_grid("0:1:5");
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == 0.5);
  CHECK(parse_int_grid("10,20") == std::vector<long>{10, 20});
  CHECK_THROWS_AS(parse_grid("a,b"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0:1:0"), std::invalid_argument);
}

TEST_CASE("disorder spec parsing and JSON round trip") {
  CHECK(parse_disorder_spec("scaled_rademacher") == DisorderSpec::scaled_rademacher());
  CHECK(parse_disorder_spec("gaussian") == DisorderSpec::gaussian_unit());
  auto t = parse_disorder_spec("table:-1:0.5,1:0.5");
  CHECK(t.kind() == DisorderKind::table);
  CHECK(t.variance() == doctest::Approx(1.0));
  for (auto spec : {DisorderSpec::scaled_rademacher(), DisorderSpec::gaussian_unit(), t}) {
    std::uint64_t seed = 0;
    auto back = disorder_spec_from_json(nlohmann::json::parse(disorder_spec_to_json(spec, 77).dump()), &seed);
    CHECK(back == spec);
    CHECK(seed == 77);
  }
  CHECK_THROWS_AS(parse_disorder_spec("table:1:0.5,2:0.5"), InvalidSpec);
  CHECK_THROWS(parse_disorder_spec("cauchy"));
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("curves command") {
  auto r = run_cli({"curves", "--beta", "0.1,0.3,0.7", "--s", "0,1"});
  REQUIRE(r.code == 0);
  auto lines = csv_lines(r.out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "beta,s,hc0,h_ann,m_s,q_s,beta_ann,h0,m_s_status");
  auto zero = split(lines[1]);
  CHECK(zero[2] == zero[4]);  // s = 0 row: m_s = hc0
  auto far = split(lines[5]);
  CHECK(far[2] == "inf");
  CHECK(std::stod(split(lines[4])[2]) == critical_h_hom(0.3));
  CHECK(run_cli({"curves", "--beta", "0.1,0.3,0.7", "--s", "0,1"}).out == r.out);
  auto js = run_cli({"curves", "--beta", "0.3", "--s", "1", "--format", "json"});
  REQUIRE(js.code == 0);
  auto j = nlohmann::json::parse(js.out);
  CHECK(j.dump().find("hc0") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run_cli({"curves", "--beta", "x"}).code == cli::kExitUsage);
  CHECK(run_cli({"nonsense"}).code == cli::kExitUsage);
  CHECK(run_cli({"curves", "--bogus", "1"}).code == cli::kExitUsage);
  CHECK(run_cli({"phase-bracket", "--threshold", "0", "--n", "1000"}).code == cli::kExitDomain);
  CHECK(run_cli({"path", "--n", "6000"}).code == cli::kExitDomain);
  CHECK(run_cli({"tilt-audit", "--h", "0", "--n", "100", "--trunc", "100", "--replicas", "2"}).code ==
        cli::kExitDomain);
  CHECK(run_cli({"tilt-audit", "--n", "1000", "--trunc", "2000", "--replicas", "4"}).code ==
        cli::kExitTruncation);
  CHECK(run_cli({"tilt-audit", "--n", "1000", "--trunc", "2000", "--replicas", "4", "--n0-tail", "0.05"}).code ==
        cli::kExitOk);
}

TEST_CASE("free-energy command") {
  auto r = run_cli({"free-energy", "--beta", "0.4", "--h", "0.1", "--s", "0,0.5", "--n", "2000", "--replicas", "6"});
  REQUIRE(r.code == 0);
  auto lines = csv_lines(r.out);
  REQUIRE(lines.size() == 3);
  auto s0 = split(lines[1]);
  CHECK(std::stod(s0[7]) == 0.0);
  auto s5 = split(lines[2]);
  CHECK(std::stod(s5[6]) <= std::stod(s5[8]) + 3.0 * std::stod(s5[7]));
}

TEST_CASE("path and dominance commands") {
  auto r = run_cli({"path", "--n", "200", "--what", "endpoint"});
  REQUIRE(r.code == 0);
  double total = 0.0;
  auto lines = csv_lines(r.out);
  for (std::size_t i = 1; i < lines.size(); ++i) total += std::stod(split(lines[i])[1]);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  auto d = run_cli({"dominance", "--n", "1000", "--replicas", "200", "--trunc", "2000"});
  REQUIRE(d.code == 0);
  auto j = nlohmann::json::parse(d.out);
  CHECK(j["ordering"]["violations"] == 0);
  for (const auto& pr : j["pairs"]) CHECK(pr["dominates"] == true);
}

TEST_CASE("manifest replay and thread independence") {
  const auto dir = scratch_dir();
  const auto out1 = dir / "fe1.csv", out2 = dir / "fe2.csv", out3 = dir / "fe3.csv", man = dir / "fe1.json";
  auto a = run_cli({"free-energy", "--beta", "0.3,0.5", "--h", "0.05", "--s", "0.5", "--n", "2000", "--replicas",
                    "8", "--seed", "9", "--threads", "1", "--out", out1.string(), "--manifest", man.string()});
  REQUIRE(a.code == 0);
  auto m = nlohmann::json::parse(slurp(man));
  CHECK(m["command"] == "free-energy");
  CHECK(m["seed"] == 9);
  CHECK(m["output"]["bytes"] == slurp(out1).size());
  CHECK(m["output"]["fnv1a64"] == hex64(fnv1a64(slurp(out1))));

  auto b = run_cli({"free-energy", "--config", man.string(), "--out", out2.string()});
  REQUIRE(b.code == 0);
  CHECK(slurp(out1) == slurp(out2));

  auto c = run_cli({"free-energy", "--config", man.string(), "--threads", "4", "--out", out3.string()});
  REQUIRE(c.code == 0);
  CHECK(slurp(out1) == slurp(out3));

  CHECK(run_cli({"curves", "--config", man.string()}).code == cli::kExitUsage);
  CHECK(run_cli({"curves", "--config", (dir / "missing.json").string()}).code == cli::kExitUsage);
}
