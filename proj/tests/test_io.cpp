#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curveortho/experiment.hpp"

using namespace curveortho;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("curveortho_io_" + name);
  fs::remove_all(p);
  return p;
}

json golden() {
  return json::parse(R"({
    "curve": {"c1": 1.0, "c0": [0, 0], "cneg": []},
    "weight": {"kind": "generic", "V": [1.0]},
    "degrees": {"from": 1, "to": 4},
    "targets": ["L_1", [0.3, -0.2]],
    "tasks": ["expand", "oracle", "compare"],
    "compare_tol": 1e-10
  })");
}

}  // namespace

TEST_CASE("JSON round trips") {
  CurveSpec s;
  s.c1 = 1.5;
  s.c0 = cplx(0.25, -1.0);
  s.cneg = {cplx(0.3, 0.1), cplx(0.0, -0.02)};
  const CurveSpec back = io::curve_from_json(json::parse(io::to_json(s).dump()));
  CHECK(back.c1 == s.c1);
  CHECK(back.c0 == s.c0);
  REQUIRE(back.cneg.size() == 2);
  CHECK(back.cneg[1] == s.cneg[1]);

  const WeightSpec w = io::weight_from_json(json::parse(R"({"kind":"singular","omega":[1.0],"sing":[{"a":[0.5,0],"lambda":0.5}],"sigma":0.3})"));
  CHECK(w.kind == WeightSpec::Kind::AlgebraicSingular);
  CHECK(w.singularities[0].a == cplx(0.5));
  CHECK(*w.sigma == 0.3);
  const WeightSpec w2 = io::weight_from_json(io::to_json(w));
  CHECK(w2.singularities[0].lambda == 0.5);
  CHECK(*w2.sigma == 0.3);

  const WeightSpec g = io::weight_from_json(json::parse(R"({"kind":"generic","V":{"pos":[[-0.5,0],1],"neg":[0.1]},"rho":0.5})"));
  REQUIRE(g.V.pos.size() == 2);
  CHECK(g.V.pos[0] == cplx(-0.5));
  CHECK(g.V.neg[0] == cplx(0.1));

  PolyCoeffs p;
  p.n = 2;
  p.coeffs = {cplx(0.1, 0.2), cplx(-1.0), cplx(1.0)};
  p.gamma = 0.75;
  const PolyCoeffs q = io::poly_from_json(json::parse(io::to_json(p).dump()));
  CHECK(q.n == 2);
  CHECK(q.coeffs[0] == p.coeffs[0]);
  CHECK(q.gamma == 0.75);

  CHECK_THROWS_AS(io::curve_from_json(json::parse(R"({"c1": -1})")), Error);
  CHECK_THROWS_AS(io::curve_from_json(json::parse(R"({"c2": 1})")), Error);
  CHECK_THROWS_AS(io::weight_from_json(json::parse(R"({"kind":"odd"})")), Error);
  CHECK_THROWS_AS(io::weight_from_json(json::parse(R"({"kind":"singular","sing":[]})")), Error);
}

TEST_CASE("config parsing and validation") {
  const ExperimentConfig c = parse_config(golden());
  CHECK(c.degrees == std::vector<int>{1, 2, 3, 4});
  CHECK(c.targets.grids == std::vector<std::string>{"L_1"});
  CHECK(c.targets.points.size() == 1);
  CHECK(c.tasks.count("compare") == 1);

  auto bad = [](const char* key, json v) {
    json j = golden();
    j[key] = std::move(v);
    return j;
  };
  CHECK_THROWS_AS(parse_config(bad("degrees", json::array())), Error);
  CHECK_THROWS_AS(parse_config(bad("tasks", json::array({"fly"}))), Error);
  CHECK_THROWS_AS(parse_config(bad("targets", json::array({"moon"}))), Error);
  CHECK_THROWS_AS(parse_config(bad("expansion", json{{"N", 100}})), Error);
  CHECK_THROWS_AS(parse_config(bad("expansion", json{{"r", 1.2}})), Error);
  CHECK_THROWS_AS(parse_config(bad("mystery", 1)), Error);
  CHECK_THROWS_AS(parse_config(bad("tasks", json::array({"thm3"}))), Error);  // needs a singular weight
  try {
    parse_config(bad("degrees", json::array()));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
    CHECK(exit_code_for(e) == 1);
  }
  CHECK(exit_code_for(Error(ErrorKind::ContractionViolated, "x")) == 2);
}

TEST_CASE("CSV uses round-trip precision") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  {
    io::CsvWriter w((dir / "a.csv").string(), {"x", "y"});
    w.row({0.1, 1.0 / 3.0});
  }
  const std::string text = slurp(dir / "a.csv");
  CHECK(text == "x,y\n0.10000000000000001,0.33333333333333331\n");
  CHECK(std::stod("0.33333333333333331") == 1.0 / 3.0);
}

TEST_CASE("SVG scatter") {
  const Curve c = make_curve(CurveSpec{1.0, 0.0, {0.2}});
  ZeroSet zs;
  zs.n = 3;
  zs.zeros = {cplx(0.1, 0.0), cplx(-0.2, 0.3), cplx(0.0, -0.4)};
  const std::string svg = io::zero_svg(zs, c, 0.5);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t circles = 0;
  for (std::size_t at = 0; (at = svg.find("<circle", at)) != std::string::npos; ++at) ++circles;
  CHECK(circles == 3);
  std::size_t polys = 0;
  for (std::size_t at = 0; (at = svg.find("<polygon", at)) != std::string::npos; ++at) ++polys;
  CHECK(polys == 2);
  // every opened element is self-closed or closed
  std::size_t opens = 0, closes = 0;
  for (char ch : svg) opens += ch == '<', closes += ch == '>';
  CHECK(opens == closes);
}

TEST_CASE("parallel map is order preserving and rethrows") {
  const auto sq = detail::parallel_map<int>(20, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (int i = 0; i < 20; ++i) CHECK(sq[i] == i * i);
  CHECK_THROWS_AS(detail::parallel_map<int>(5, 3,
                                            [](std::size_t i) -> int {
                                              if (i == 3) throw Error(ErrorKind::Resolution, "boom");
                                              return 0;
                                            }),
                  Error);
}

TEST_CASE("golden run: artifacts, checks and determinism across jobs") {
  const ExperimentConfig c = parse_config(golden());
  std::ostringstream log;
  RunOptions one;
  one.out = scratch("run1").string();
  one.verbose = true;
  const RunReport a = run_experiment(c, one, log);
  CHECK(a.all_ok());
  CHECK(log.str().find("violations=0") != std::string::npos);
  for (const char* f : {"expand.csv", "expand.json", "oracle.csv", "oracle.json", "compare.csv", "summary.json"})
    CHECK(fs::exists(fs::path(*one.out) / f));

  RunOptions four = one;
  four.jobs = 4;
  four.verbose = false;
  four.out = scratch("run4").string();
  const RunReport b = run_experiment(c, four, log);
  for (const char* f : {"expand.csv", "oracle.csv", "compare.csv"})
    CHECK(slurp(fs::path(*one.out) / f) == slurp(fs::path(*four.out) / f));

  // the embedded config reproduces the run
  json rc = a.summary["config"];
  rc["output_dir"] = scratch("rerun").string();
  RunOptions plain;
  run_experiment(parse_config(rc), plain, log);
  CHECK(slurp(fs::path(*one.out) / "compare.csv") == slurp(fs::path(rc["output_dir"].get<std::string>()) / "compare.csv"));

  const json rec = json::parse(slurp(fs::path(*one.out) / "expand.json"));
  REQUIRE(rec.size() == 4);
  CHECK(rec[2]["n"] == 3);
  CHECK(rec[2].contains("gamma_n"));
  CHECK(rec[2]["targets"][0].contains("branch"));
}

TEST_CASE("r outside (rho, 1) is a configuration error") {
  json j = golden();
  j["weight"] = json::parse(R"({"kind":"generic","V":[-0.5,1.0],"rho":0.5})");
  j["expansion"] = {{"r", 0.4}};
  const ExperimentConfig c = parse_config(j);
  RunOptions o;
  o.out = scratch("bad").string();
  try {
    run_experiment(c, o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(exit_code_for(e) == 1);
    CHECK(std::string(e.what()).find("rho < r < 1") != std::string::npos);
  }
}

TEST_CASE("zero task writes one SVG per degree") {
  const json j = json::parse(R"({
    "weight": {"kind": "singular", "omega": [1.0], "sing": [{"a": [0.5, 0], "lambda": 0.5}]},
    "degrees": [6, 8],
    "tasks": ["zeros"]
  })");
  RunOptions o;
  o.svg = true;
  o.out = scratch("zeros").string();
  const RunReport r = run_experiment(parse_config(j), o);
  CHECK(fs::exists(fs::path(*o.out) / "zeros_n6.svg"));
  CHECK(fs::exists(fs::path(*o.out) / "zeros_n8.svg"));
  CHECK(fs::exists(fs::path(*o.out) / "zeros_limit.json"));
  const std::string csv = slurp(fs::path(*o.out) / "zeros.csv");
  CHECK(csv.rfind("n,k,re,im,abs_phi,angle_phi\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6 + 8);
}
