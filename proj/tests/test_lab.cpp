#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "towerlab/formats.hpp"
#include "towerlab/lab.hpp"

using namespace towerlab;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(TOWERLAB_FIXTURE_DIR) + "/" + name; }

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("towerlab_lab_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig base_config(const fs::path& out) {
  RunConfig cfg;
  cfg.complex_src.builtin = "wedge(2)";
  cfg.tower_src.family = "abelianized";
  cfg.tower_src.p = 2;
  cfg.tower_src.depth = 3;
  cfg.degrees = {1};
  cfg.analyses = {"betti"};
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("builtin complex names parse with parameters") {
  CHECK(parse_builtin_complex("circle").ranks == std::vector<long>{1, 1});
  CHECK(parse_builtin_complex("wedge(3)").ranks == std::vector<long>{1, 3});
  CHECK(parse_builtin_complex("torus(2)").ranks == std::vector<long>{1, 2, 1});
  CHECK(parse_builtin_complex("lls(2,3)").ranks == std::vector<long>{1, 1, 1, 1});
  CHECK(parse_builtin_complex("lls(3,2)").ranks == std::vector<long>{1, 1, 0, 1, 1});

  CHECK_THROWS_AS(parse_builtin_complex("wedge(2"), InputError);
  CHECK_THROWS_AS(parse_builtin_complex("wedge(two)"), InputError);
  CHECK_THROWS_AS(parse_builtin_complex("moebius"), InputError);
}

TEST_CASE("run configs parse fully and with defaults") {
  SUBCASE("every key") {
    std::string text = R"json({
      "format": 1,
      "complex": {"builtin": "torus(2)"},
      "tower": {"family": "congruence", "p": 3, "depth": 4},
      "degrees": [0, 1],
      "primes": [2, 3],
      "rationals": false,
      "analyses": ["betti", "modp"],
      "out": "results",
      "seed": 99,
      "k_max": 5,
      "bins": 8,
      "tolerance": 0.001
    })json";
    RunConfig cfg = parse_run_config_text(text, "cfg");
    CHECK(cfg.complex_src.builtin == "torus(2)");
    CHECK(cfg.tower_src.family == "congruence");
    CHECK(cfg.tower_src.p == 3);
    CHECK(cfg.tower_src.depth == 4);
    CHECK(cfg.degrees == std::vector<int>{0, 1});
    CHECK(cfg.primes == std::vector<long>{2, 3});
    CHECK(!cfg.rationals);
    CHECK(cfg.analyses == std::vector<std::string>{"betti", "modp"});
    CHECK(cfg.out_dir == "results");
    CHECK(cfg.seed == 99);
    CHECK(cfg.k_max == 5);
    CHECK(cfg.bins == 8);
    CHECK(cfg.tolerance == doctest::Approx(0.001));
  }

  SUBCASE("defaults fill the rest") {
    std::string text = R"({
      "complex": {"file": "c.json"},
      "tower": {"file": "t.json"},
      "degrees": [1],
      "analyses": ["spectrum"]
    })";
    RunConfig cfg = parse_run_config_text(text, "cfg");
    CHECK(cfg.complex_src.file == "c.json");
    CHECK(cfg.tower_src.file == "t.json");
    CHECK(cfg.primes.empty());
    CHECK(cfg.rationals);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.seed == 1);
    CHECK(cfg.k_max == 4);
    CHECK(cfg.bins == 16);
  }

  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_run_config_text(R"({"complex":{},"tower":{},"degrees":[1],"analyses":[],"typo":1})", "cfg"),
                    InputError);
  }
}

TEST_CASE("source resolution demands exactly one origin") {
  ComplexSource both{"circle", "file.json"};
  CHECK_THROWS_AS(resolve_complex(both, true), InputError);
  CHECK_THROWS_AS(resolve_complex(ComplexSource{}, true), InputError);

  TowerSource neither;
  neither.family.clear();
  CHECK_THROWS_AS(resolve_tower(neither, GroupModelSpec::free_group(2), true), InputError);

  TowerSource bad_file;
  bad_file.file = fixture("bad_tower.json");
  CHECK_THROWS_AS(resolve_tower(bad_file, GroupModelSpec::free_abelian(1), true), InputError);
}

TEST_CASE("covering rank growth across wedge towers") {
  std::mt19937_64 rng(7);

  SUBCASE("two circles: the gradient is exactly 1 at every level") {
    ChainComplexSpec c = wedge_complex(2);
    Tower tower = make_builtin_tower(GroupModelSpec::free_group(2), TowerFamily::abelianized, 2, 3);
    RankGradientReport rep = rank_gradient(c, tower, {2, 3}, rng);
    REQUIRE(rep.rows.size() == 3);
    std::vector<long> indices = {4, 16, 64};
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      CHECK(rep.rows[i].index == indices[i]);
      CHECK(rep.rows[i].d_estimate == indices[i] + 1);
      CHECK(rep.rows[i].gradient == 1);
      CHECK(rep.rows[i].b1_Fp == std::vector<long>{indices[i] + 1, indices[i] + 1});
    }
    CHECK(rep.limit_estimate == 1);
    CHECK(rep.reference_l2 == 1);
    CHECK(rep.identity_ok);
    CHECK(rep.monotone_ok);
    CHECK(rep.chain_ok);
  }

  SUBCASE("one circle: every cover is a circle") {
    ChainComplexSpec c = wedge_complex(1);
    Tower tower = make_builtin_tower(GroupModelSpec::free_group(1), TowerFamily::abelianized, 2, 2);
    RankGradientReport rep = rank_gradient(c, tower, {}, rng);
    for (const auto& row : rep.rows) {
      CHECK(row.d_estimate == 1);
      CHECK(row.gradient == 0);
    }
    CHECK(rep.limit_estimate == 0);
    CHECK(rep.identity_ok);
  }

  SUBCASE("a handmade order-9 quotient of three circles") {
    ChainComplexSpec c = wedge_complex(3);
    Tower tower;
    FiniteQuotient q;
    q.order = 9;
    Perm cycle(9);
    for (int i = 0; i < 9; ++i) cycle[i] = (i + 1) % 9;
    q.generator_images = {cycle, perm_identity(9), perm_identity(9)};
    q.label = "Z/9";
    tower.levels.push_back(q);
    RankGradientReport rep = rank_gradient(c, tower, {3}, rng);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].d_estimate == 19);
    CHECK(rep.rows[0].gradient == 2);
    CHECK(rep.identity_ok);
    CHECK(rep.chain_ok);
  }

  SUBCASE("non-free models are rejected") {
    ChainComplexSpec c = torus_complex(2);
    Tower tower = make_builtin_tower(GroupModelSpec::free_abelian(2), TowerFamily::congruence, 2, 1);
    CHECK_THROWS_AS(rank_gradient(c, tower, {}, rng), InputError);
  }
}

TEST_CASE("end-to-end run: betti on a wedge tower") {
  fs::path out = fresh_dir("betti");
  RunConfig cfg = base_config(out);
  RunResult res = run(cfg);
  CHECK(res.exit_code == 0);
  CHECK(res.violations.empty());

  std::string csv = read_file((out / "betti.csv").string());
  CHECK(csv.find("5/4") != std::string::npos);
  CHECK(csv.find("17/16") != std::string::npos);
  CHECK(csv.find("65/64") != std::string::npos);

  auto summary = nlohmann::json::parse(read_file((out / "summary.json").string()));
  CHECK(summary["exit_code"] == 0);
  CHECK(summary["analyses"]["betti"]["status"] == "ok");
  CHECK(summary["analyses"]["betti"]["final_normalized_Q"][0] == "65/64");
  fs::remove_all(out);
}

TEST_CASE("runs with the same seed are byte-identical") {
  fs::path out1 = fresh_dir("det1");
  fs::path out2 = fresh_dir("det2");
  RunConfig cfg1 = base_config(out1);
  RunConfig cfg2 = base_config(out2);
  cfg1.seed = cfg2.seed = 12345;
  cfg1.analyses = cfg2.analyses = {"betti", "rankgrad"};
  CHECK(run(cfg1).exit_code == 0);
  CHECK(run(cfg2).exit_code == 0);
  for (const char* name : {"betti.csv", "betti.json", "rankgrad.csv", "summary.json"}) {
    CHECK(read_file((out1 / name).string()) == read_file((out2 / name).string()));
  }
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("a complex that fails validation exits with code 2") {
  fs::path out = fresh_dir("corrupt");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin.clear();
  cfg.complex_src.file = fixture("corrupted_complex.json");
  cfg.tower_src.family = "congruence";
  RunResult res = run(cfg);
  CHECK(res.exit_code == 2);
  REQUIRE(!res.violations.empty());
  CHECK(res.violations[0].find("complex validation") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("an unreadable complex file exits with code 1") {
  fs::path out = fresh_dir("malformed");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin.clear();
  cfg.complex_src.file = fixture("malformed_complex.json");
  RunResult res = run(cfg);
  CHECK(res.exit_code == 1);
  CHECK(res.violations.empty());
  fs::remove_all(out);
}

TEST_CASE("a non-regular tower file exits with code 1") {
  fs::path out = fresh_dir("badtower");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin = "circle";
  cfg.tower_src.family.clear();
  cfg.tower_src.file = fixture("bad_tower.json");
  RunResult res = run(cfg);
  CHECK(res.exit_code == 1);
  fs::remove_all(out);
}

TEST_CASE("end-to-end run: determinant logs on the circle are nonnegative") {
  fs::path out = fresh_dir("fkdet");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin = "circle";
  cfg.tower_src.family = "congruence";
  cfg.tower_src.depth = 6;
  cfg.analyses = {"fkdet"};
  RunResult res = run(cfg);
  CHECK(res.exit_code == 0);

  std::string csv = read_file((out / "fkdet_q1.csv").string());
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "level,index,low_coeff_digits,log_normalized_det");
  int rows = 0;
  while (std::getline(lines, line)) {
    auto pos = line.rfind(',');
    double logdet = std::stod(line.substr(pos + 1));
    CHECK(logdet >= 0.0);
    ++rows;
  }
  CHECK(rows == 6);
  fs::remove_all(out);
}

TEST_CASE("end-to-end run: spectrum and moment tables on the circle") {
  fs::path out = fresh_dir("spectrum");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin = "circle";
  cfg.tower_src.family = "congruence";
  cfg.tower_src.depth = 3;
  cfg.analyses = {"spectrum", "converge"};
  cfg.bins = 4;
  cfg.k_max = 3;
  RunResult res = run(cfg);
  CHECK(res.exit_code == 0);

  // Kernel rows are exact by construction; one zero atom of mass 1/order.
  std::string atoms = read_file((out / "spectrum_q1.csv").string());
  CHECK(atoms.find("level,index,eigenvalue,multiplicity,normalized_multiplicity") == 0);
  CHECK(atoms.find("1,2,0,1,1/2") != std::string::npos);
  CHECK(atoms.find("2,4,0,1,1/4") != std::string::npos);
  CHECK(atoms.find("3,8,0,1,1/8") != std::string::npos);

  // Four bins over [0, 4]. Order 8 puts 2 - sqrt(2) and the kernel in the
  // first bin, the eigenvalue 2 on the edge into the third, and 2 + sqrt(2)
  // with 4 into the last.
  std::string hist = read_file((out / "spectrum_q1_hist.csv").string());
  CHECK(hist.find("level,index,bin_left,bin_right,mass") == 0);
  CHECK(hist.find("1,2,0,1,1/2") != std::string::npos);
  CHECK(hist.find("1,2,3,4,1/2") != std::string::npos);
  CHECK(hist.find("2,4,2,3,1/2") != std::string::npos);
  CHECK(hist.find("3,8,0,1,3/8") != std::string::npos);
  CHECK(hist.find("3,8,2,3,1/4") != std::string::npos);
  CHECK(hist.find("3,8,3,4,3/8") != std::string::npos);

  // At order 2 the walk folds back: trace 8 against the limit 6 at k = 2.
  std::string conv = read_file((out / "converge_q1.csv").string());
  CHECK(conv.find("level,index,k,exact,l2,diff,equal") == 0);
  CHECK(conv.find("1,2,1,2/1,2/1,0/1,1") != std::string::npos);
  CHECK(conv.find("1,2,2,8/1,6/1,2/1,0") != std::string::npos);
  CHECK(conv.find("1,2,3,32/1,20/1,12/1,0") != std::string::npos);
  CHECK(conv.find("2,4,2,6/1,6/1,0/1,1") != std::string::npos);
  CHECK(conv.find("3,8,3,20/1,20/1,0/1,1") != std::string::npos);

  auto summary = nlohmann::json::parse(read_file((out / "summary.json").string()));
  CHECK(summary["analyses"]["converge"]["agree_from_level"]["q1"] == 3);
  fs::remove_all(out);
}

TEST_CASE("end-to-end run: mod-p table on the torsion example") {
  fs::path out = fresh_dir("modp");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin = "lls(2,2)";
  cfg.tower_src.family = "congruence";
  cfg.degrees = {2};
  cfg.primes = {2};
  cfg.analyses = {"modp"};
  RunResult res = run(cfg);
  CHECK(res.exit_code == 0);
  std::string csv = read_file((out / "modp_q2_p2.csv").string());
  CHECK(csv.find("level,index,b_q_Fp,normalized,delta_sign") == 0);
  CHECK(csv.find("1,2,2,1/1,0") != std::string::npos);
  CHECK(csv.find("2,4,4,1/1,0") != std::string::npos);
  CHECK(csv.find("3,8,8,1/1,0") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("end-to-end run: growth fit sees exactly-zero residuals on the torsion example") {
  fs::path out = fresh_dir("padic");
  RunConfig cfg = base_config(out);
  cfg.complex_src.builtin = "lls(2,2)";
  cfg.tower_src.family = "congruence";
  cfg.degrees = {2};
  cfg.primes = {2};
  cfg.analyses = {"padic"};
  RunResult res = run(cfg);
  CHECK(res.exit_code == 0);
  auto jr = nlohmann::json::parse(read_file((out / "padic_q2_p2.json").string()));
  CHECK(jr["all_zero_residuals"] == true);
  CHECK(jr["fitted_exponent"] == "-inf");
  CHECK(jr["beta_estimate"] == "1/1");
  CHECK(jr["bound_ok"] == true);
  for (const auto& r : jr["residuals"]) CHECK(r == "0/1");
  fs::remove_all(out);
}

TEST_CASE("analysis names and degrees are validated before work starts") {
  fs::path out = fresh_dir("validate");
  RunConfig cfg = base_config(out);
  cfg.analyses = {"betti", "nonsense"};
  CHECK(run(cfg).exit_code == 1);
  cfg = base_config(out);
  cfg.degrees = {9};
  CHECK(run(cfg).exit_code == 1);
  cfg = base_config(out);
  cfg.primes = {4};
  CHECK(run(cfg).exit_code == 1);
  fs::remove_all(out);
}
