// towerlab: Betti numbers, spectra, and determinants of covering towers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "towerlab/lab.hpp"

namespace {

using towerlab::RunConfig;

struct CommonOpts {
  std::string complex_src;
  std::string tower_src;
  std::vector<int> degrees{1};
  std::vector<long> primes;
  long tower_p = 2;
  int depth = 3;
  int k_max = 4;
  int bins = 16;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
  bool lax = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--complex", o.complex_src, "builtin (circle, wedge(d), torus(n), lls(d,p)) or file path")
      ->required();
  cmd->add_option("--tower", o.tower_src, "builtin family (congruence, abelianized) or file path")
      ->required();
  cmd->add_option("--degree", o.degrees, "homological degrees");
  cmd->add_option("--p", o.primes, "primes; the first also selects the builtin tower");
  cmd->add_option("--depth", o.depth, "builtin tower depth");
  cmd->add_option("--kmax", o.k_max, "largest moment order");
  cmd->add_option("--bins", o.bins, "histogram bin count");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--tolerance", o.tolerance, "regression slack");
  cmd->add_flag("--lax", o.lax, "warn instead of failing on unknown file keys");
}

RunConfig to_config(const CommonOpts& o, const std::string& analysis) {
  RunConfig cfg;
  if (std::filesystem::exists(o.complex_src))
    cfg.complex_src.file = o.complex_src;
  else
    cfg.complex_src.builtin = o.complex_src;
  if (std::filesystem::exists(o.tower_src)) {
    cfg.tower_src.file = o.tower_src;
  } else {
    cfg.tower_src.family = o.tower_src;
    cfg.tower_src.p = o.primes.empty() ? o.tower_p : o.primes.front();
    cfg.tower_src.depth = o.depth;
  }
  cfg.degrees = o.degrees;
  cfg.primes = o.primes;
  cfg.analyses = {analysis};
  cfg.out_dir = o.out_dir;
  cfg.seed = o.seed;
  cfg.k_max = o.k_max;
  cfg.bins = o.bins;
  cfg.tolerance = o.tolerance;
  cfg.strict = !o.lax;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Betti numbers, spectra, and determinants of covering towers"};
  app.require_subcommand(1);

  std::string config_path, run_out;
  bool run_lax = false;
  std::uint64_t run_seed = 0;
  bool seed_given = false;
  CLI::App* run_cmd = app.add_subcommand("run", "execute analyses from a config file");
  run_cmd->add_option("--config", config_path, "run config file")->required();
  run_cmd->add_option("--out", run_out, "override output directory");
  CLI::Option* seed_opt = run_cmd->add_option("--seed", run_seed, "override RNG seed");
  run_cmd->add_flag("--lax", run_lax, "warn instead of failing on unknown file keys");

  const std::vector<std::string> analyses = {"betti",  "spectrum", "converge", "fkdet",
                                             "modp",   "padic",    "rankgrad"};
  std::vector<CommonOpts> opts(analyses.size());
  for (std::size_t i = 0; i < analyses.size(); ++i)
    add_common(app.add_subcommand(analyses[i], analyses[i] + " analysis"), opts[i]);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (run_cmd->parsed()) {
      cfg = towerlab::load_run_config(config_path);
      if (!run_out.empty()) cfg.out_dir = run_out;
      seed_given = seed_opt->count() > 0;
      if (seed_given) cfg.seed = run_seed;
      if (run_lax) cfg.strict = false;
    } else {
      for (std::size_t i = 0; i < analyses.size(); ++i)
        if (app.get_subcommand(analyses[i])->parsed()) cfg = to_config(opts[i], analyses[i]);
    }
    return towerlab::run(cfg).exit_code;
  } catch (const towerlab::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const towerlab::InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 2;
  }
}
