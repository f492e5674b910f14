#pragma once

// Run orchestration: config parsing, builtin/file resolution, per-level
// analysis drivers, and report emission.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "towerlab/chain_complex.hpp"
#include "towerlab/group.hpp"

namespace towerlab {

struct ComplexSource {
  std::string builtin;  // "circle", "wedge(2)", "torus(2)", "lls(2,2)"; empty when file is set
  std::string file;
};

struct TowerSource {
  std::string family;  // "congruence" or "abelianized"; empty when file is set
  long p = 2;
  int depth = 3;
  std::string file;
};

struct RunConfig {
  ComplexSource complex_src;
  TowerSource tower_src;
  std::vector<int> degrees;
  std::vector<long> primes;
  bool rationals = true;
  std::vector<std::string> analyses;  // subset of {betti, spectrum, converge, fkdet, modp, padic, rankgrad}
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int k_max = 4;
  int bins = 16;
  double tolerance = 1e-6;
  bool strict = true;
};

RunConfig parse_run_config_text(const std::string& text, const std::string& where);
RunConfig load_run_config(const std::string& path);

// "wedge(2)" style builtin grammar.
ChainComplexSpec parse_builtin_complex(const std::string& text);

ChainComplexSpec resolve_complex(const ComplexSource& src, bool strict);
Tower resolve_tower(const TowerSource& src, const GroupModelSpec& model, bool strict);

// Covering-graph generator counts along a tower over a wedge of d circles.
// d_estimate = b_1(level; Q) is the rank of the cover's free group.
struct RankGradientReport {
  struct Row {
    int level = 0;
    std::string label;
    long index = 0;
    long d_estimate = 0;
    Rat gradient;               // (d_estimate - 1) / index
    std::vector<long> b1_Fp;    // parallel to primes
  };
  std::vector<long> primes;
  std::vector<Row> rows;
  long limit_estimate = 0;  // d - 1
  long reference_l2 = 0;    // first L2 Betti number, also d - 1
  bool identity_ok = true;  // d_estimate - 1 == (d - 1) * index at every level
  bool monotone_ok = true;  // both (d-1)/index and d/index non-increasing
  bool chain_ok = true;     // b1(Q) <= b1(F_p) <= d_estimate
};

RankGradientReport rank_gradient(const ChainComplexSpec& c, const Tower& tower,
                                 const std::vector<long>& primes, std::mt19937_64& rng);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 input error, 2 invariant violation
  std::vector<std::string> notes;
  std::vector<std::string> violations;
};

RunResult run(const RunConfig& config);

}  // namespace towerlab
