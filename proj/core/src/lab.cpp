#include "towerlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "towerlab/formats.hpp"
#include "towerlab/local_ring.hpp"
#include "towerlab/padic.hpp"
#include "towerlab/reduction.hpp"
#include "towerlab/spectral.hpp"

namespace towerlab {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kAnalyses = {"betti",  "spectrum", "converge", "fkdet",
                                            "modp",   "padic",    "rankgrad"};

std::string csv_field(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), ',', ';');
  return out;
}

// True when every index ratio along the tower is a positive power of p.
bool ratios_are_p_powers(const Tower& tower, long p) {
  for (std::size_t i = 1; i < tower.levels.size(); ++i) {
    long a = tower.levels[i - 1].order, b = tower.levels[i].order;
    if (b % a != 0) return false;
    long r = b / a;
    if (r < 2) return false;
    while (r % p == 0) r /= p;
    if (r != 1) return false;
  }
  return true;
}

// d with p^d equal to the last index ratio, or 0 if there is none.
int infer_tower_dim(const Tower& tower, long p) {
  if (tower.levels.size() < 2) return 0;
  long r = tower.levels.back().order / tower.levels[tower.levels.size() - 2].order;
  int d = 0;
  while (r > 1 && r % p == 0) {
    r /= p;
    ++d;
  }
  return r == 1 ? d : 0;
}

struct Emitter {
  std::string out_dir;
  void write(const std::string& name, const std::string& contents) const {
    atomic_write_file(out_dir + "/" + name, contents);
  }
};

}  // namespace

ChainComplexSpec parse_builtin_complex(const std::string& text) {
  std::string name = text;
  std::vector<long> params;
  auto open = text.find('(');
  if (open != std::string::npos) {
    if (text.back() != ')') throw InputError("malformed builtin complex: '" + text + "'");
    name = text.substr(0, open);
    std::string inner = text.substr(open + 1, text.size() - open - 2);
    std::istringstream in(inner);
    std::string tok;
    while (std::getline(in, tok, ','))
      params.push_back(parse_int(tok).get_si());
  }
  return builtin_complex(name, params);
}

ChainComplexSpec resolve_complex(const ComplexSource& src, bool strict) {
  if (!src.builtin.empty() && !src.file.empty())
    throw InputError("complex source: give either a builtin name or a file, not both");
  if (src.builtin.empty() && src.file.empty()) throw InputError("complex source missing");
  return src.builtin.empty() ? load_complex(src.file, strict) : parse_builtin_complex(src.builtin);
}

Tower resolve_tower(const TowerSource& src, const GroupModelSpec& model, bool strict) {
  if (!src.family.empty() && !src.file.empty())
    throw InputError("tower source: give either a family or a file, not both");
  if (src.family.empty() && src.file.empty()) throw InputError("tower source missing");
  if (!src.family.empty())
    return make_builtin_tower(model, parse_tower_family(src.family), src.p, src.depth);
  Tower t = load_tower(src.file, strict);
  TowerValidation v = validate_tower(t, model);
  if (!v.ok) throw InputError("tower file " + src.file + ": " + v.message);
  return t;
}

RunConfig parse_run_config_text(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(where + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(where + ": expected a top-level object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    static const std::set<std::string> known = {"format",   "complex", "tower", "degrees",
                                               "primes",   "rationals", "analyses", "out",
                                               "seed",     "k_max",   "bins",  "tolerance"};
    if (!known.count(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
  RunConfig cfg;
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw InputError(where + ": missing key '" + std::string(key) + "'");
    return j[key];
  };

  const json& jc = need("complex");
  if (jc.contains("builtin")) cfg.complex_src.builtin = jc["builtin"].get<std::string>();
  if (jc.contains("file")) cfg.complex_src.file = jc["file"].get<std::string>();

  const json& jt = need("tower");
  if (jt.contains("family")) cfg.tower_src.family = jt["family"].get<std::string>();
  if (jt.contains("file")) cfg.tower_src.file = jt["file"].get<std::string>();
  if (jt.contains("p")) cfg.tower_src.p = jt["p"].get<long>();
  if (jt.contains("depth")) cfg.tower_src.depth = jt["depth"].get<int>();

  for (const json& d : need("degrees")) cfg.degrees.push_back(d.get<int>());
  for (const json& a : need("analyses")) cfg.analyses.push_back(a.get<std::string>());
  if (j.contains("primes"))
    for (const json& p : j["primes"]) cfg.primes.push_back(p.get<long>());
  if (j.contains("rationals")) cfg.rationals = j["rationals"].get<bool>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("k_max")) cfg.k_max = j["k_max"].get<int>();
  if (j.contains("bins")) cfg.bins = j["bins"].get<int>();
  if (j.contains("tolerance")) cfg.tolerance = j["tolerance"].get<double>();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config_text(read_file(path), path);
}

RankGradientReport rank_gradient(const ChainComplexSpec& c, const Tower& tower,
                                 const std::vector<long>& primes, std::mt19937_64& rng) {
  if (c.model.kind != GroupKind::free || c.top_degree() != 1 || c.ranks[0] != 1 ||
      c.ranks[1] != c.model.rank)
    throw InputError("rank gradient needs a wedge-of-circles complex");
  const long d = c.model.rank;

  RankGradientReport rep;
  rep.primes = primes;
  rep.limit_estimate = d - 1;
  rep.reference_l2 = d - 1;
  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    const FiniteQuotient& quo = tower.levels[i];
    FlatComplex fq = reduce_complex(c, quo, CoefficientRing::Q());
    long b1 = fq.ranks[1] - rank_over_Q(fq.boundaries[0], rng);
    RankGradientReport::Row row;
    row.level = static_cast<int>(i) + 1;
    row.label = quo.label;
    row.index = quo.order;
    row.d_estimate = b1;
    row.gradient = make_rat(Int(b1 - 1), Int(quo.order));
    if (b1 - 1 != (d - 1) * quo.order) rep.identity_ok = false;
    for (long p : primes) {
      FlatComplex fp = reduce_complex(c, quo, CoefficientRing::Fp(p));
      long b1p = fp.ranks[1] - rank_mod_prime(fp.boundaries[0], static_cast<std::uint64_t>(p));
      row.b1_Fp.push_back(b1p);
      if (!(b1 <= b1p && b1p <= row.d_estimate)) rep.chain_ok = false;
    }
    if (i > 0) {
      const RankGradientReport::Row& prev = rep.rows.back();
      if (row.gradient > prev.gradient) rep.monotone_ok = false;
      if (make_rat(Int(row.d_estimate), Int(row.index)) >
          make_rat(Int(prev.d_estimate), Int(prev.index)))
        rep.monotone_ok = false;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

namespace {

struct RunState {
  const RunConfig& cfg;
  ChainComplexSpec complex_spec;
  Tower tower;
  Emitter emit;
  std::mt19937_64 rng;
  RunResult* res;
  json* summary;

  RunState(const RunConfig& c, RunResult* r, json* s) : cfg(c), rng(c.seed), res(r), summary(s) {}

  void note(const std::string& analysis, const std::string& msg) {
    res->notes.push_back(analysis + ": " + msg);
    (*summary)["analyses"][analysis]["notes"].push_back(msg);
  }
  void violation(const std::string& analysis, const std::string& msg) {
    res->violations.push_back(analysis + ": " + msg);
    (*summary)["analyses"][analysis]["violations"].push_back(msg);
  }
};

void run_betti(RunState& st) {
  if (!st.cfg.rationals && st.cfg.primes.empty())
    throw InputError("betti analysis needs rational coefficients or at least one prime");
  BettiTable t = build_betti_table(st.complex_spec, st.tower, st.cfg.degrees, st.cfg.rationals,
                                   st.cfg.primes, st.rng);
  st.emit.write("betti.csv", betti_table_csv(t));

  json jt;
  jt["degrees"] = t.degrees;
  jt["primes"] = t.primes;
  json rows = json::array();
  for (const BettiTable::Row& row : t.rows) {
    json jr;
    jr["level"] = row.level;
    jr["label"] = row.label;
    jr["index"] = row.index;
    if (t.with_Q) {
      jr["b_Q"] = row.b_Q;
      json norm = json::array();
      for (const Rat& v : row.norm_Q) norm.push_back(rat_str(v));
      jr["norm_Q"] = norm;
    }
    for (std::size_t pi = 0; pi < t.primes.size(); ++pi) {
      std::string key = "F" + std::to_string(t.primes[pi]);
      jr["b_" + key] = row.b_Fp[pi];
      json norm = json::array();
      for (const Rat& v : row.norm_Fp[pi]) norm.push_back(rat_str(v));
      jr["norm_" + key] = norm;
    }
    rows.push_back(std::move(jr));
  }
  jt["rows"] = std::move(rows);
  st.emit.write("betti.json", jt.dump(2) + "\n");

  if (st.cfg.rationals && !t.rows.empty()) {
    json final_norm = json::array();
    for (const Rat& v : t.rows.back().norm_Q) final_norm.push_back(rat_str(v));
    (*st.summary)["analyses"]["betti"]["final_normalized_Q"] = final_norm;
  }
}

void run_spectrum(RunState& st) {
  for (int q : st.cfg.degrees) {
    GroupRingMatrix delta = complex_laplacian(st.complex_spec, q);
    Rat bound = kappa_bound(delta);
    std::ostringstream atoms, hist;
    atoms << "level,index,eigenvalue,multiplicity,normalized_multiplicity\n";
    hist << "level,index,bin_left,bin_right,mass\n";
    for (std::size_t i = 0; i < st.tower.levels.size(); ++i) {
      const FiniteQuotient& quo = st.tower.levels[i];
      FlatMatrix flat = reduce_matrix(delta, quo, CoefficientRing::Q());
      long kernel = flat.rows - rank_over_Q(flat, st.rng);
      SpectralMeasure mu =
          spectral_measure(flat, kernel, make_rat(1, Int(quo.order)), bound);
      if (mu.zero_multiplicity != 0)
        atoms << (i + 1) << ',' << quo.order << ",0," << mu.zero_multiplicity.get_num() << ','
              << rat_str(mu.zero_multiplicity * mu.normalization) << '\n';
      for (const auto& [value, count] : mu.atoms)
        atoms << (i + 1) << ',' << quo.order << ',' << float_str(value) << ',' << count << ','
              << rat_str(Rat(count) * mu.normalization) << '\n';
      for (const HistogramBin& b : measure_histogram(mu, st.cfg.bins))
        hist << (i + 1) << ',' << quo.order << ',' << float_str(b.left) << ','
             << float_str(b.right) << ',' << rat_str(b.mass) << '\n';
    }
    st.emit.write("spectrum_q" + std::to_string(q) + ".csv", atoms.str());
    st.emit.write("spectrum_q" + std::to_string(q) + "_hist.csv", hist.str());
  }
}

void run_converge(RunState& st) {
  for (int q : st.cfg.degrees) {
    GroupRingMatrix delta = complex_laplacian(st.complex_spec, q);
    MomentReport rep = moment_convergence_report(delta, st.tower, st.cfg.k_max);
    std::ostringstream csv;
    csv << "level,index,k,exact,l2,diff,equal\n";
    for (const MomentReport::Row& row : rep.rows)
      csv << row.level << ',' << row.index << ',' << row.k << ',' << rat_str(row.exact) << ','
          << rat_str(row.l2) << ',' << rat_str(row.exact - row.l2) << ','
          << (row.equal ? 1 : 0) << '\n';
    st.emit.write("converge_q" + std::to_string(q) + ".csv", csv.str());
    std::string key = "q" + std::to_string(q);
    if (rep.flag_level)
      (*st.summary)["analyses"]["converge"]["agree_from_level"][key] = *rep.flag_level;
    else
      st.note("converge", "no fully injective level for q=" + std::to_string(q) +
                              "; moments may disagree everywhere");
  }
}

void run_fkdet(RunState& st) {
  for (int q : st.cfg.degrees) {
    GroupRingMatrix delta = complex_laplacian(st.complex_spec, q);
    std::ostringstream csv;
    csv << "level,index,low_coeff_digits,log_normalized_det\n";
    for (std::size_t i = 0; i < st.tower.levels.size(); ++i) {
      const FiniteQuotient& quo = st.tower.levels[i];
      FKCertificate cert = fk_certificate(delta, quo);
      csv << (i + 1) << ',' << quo.order << ','
          << mpz_sizeinbase(cert.low_coeff.get_mpz_t(), 10) << ','
          << float_str(cert.log_normalized_det) << '\n';
    }
    st.emit.write("fkdet_q" + std::to_string(q) + ".csv", csv.str());
  }
}

void run_modp(RunState& st) {
  if (st.cfg.primes.empty()) {
    st.note("modp", "no primes configured, skipped");
    return;
  }
  for (long p : st.cfg.primes) {
    if (!ratios_are_p_powers(st.tower, p)) {
      st.note("modp", "skipped for p=" + std::to_string(p) + ": index ratios are not powers of p");
      continue;
    }
    for (int q : st.cfg.degrees) {
      MonotoneReport rep = monotone_harness(st.complex_spec, st.tower, q, p, st.rng);
      std::ostringstream csv;
      csv << "level,index,b_q_Fp,normalized,delta_sign\n";
      for (const MonotoneReport::Row& row : rep.rows)
        csv << row.level << ',' << row.index << ',' << row.betti << ','
            << rat_str(row.normalized) << ',' << row.delta_sign << '\n';
      std::string name = "modp_q" + std::to_string(q) + "_p" + std::to_string(p) + ".csv";
      st.emit.write(name, csv.str());
      std::string where = "q=" + std::to_string(q) + ", p=" + std::to_string(p);
      if (!rep.monotone_ok) st.violation("modp", "normalized Betti sequence increased at " + where);
      if (!rep.regroup_ok) st.violation("modp", "local-form cross-check failed at " + where);
    }
  }
}

void run_padic(RunState& st) {
  if (st.cfg.primes.empty()) {
    st.note("padic", "no primes configured, skipped");
    return;
  }
  if (st.tower.levels.size() < 3) {
    st.note("padic", "needs at least 3 tower levels, skipped");
    return;
  }
  for (long p : st.cfg.primes) {
    int d = infer_tower_dim(st.tower, p);
    if (d == 0 || !ratios_are_p_powers(st.tower, p)) {
      st.note("padic", "skipped for p=" + std::to_string(p) + ": index pattern does not match");
      continue;
    }
    PadicTowerMeta meta;
    meta.p = p;
    meta.d = d;
    for (const FiniteQuotient& quo : st.tower.levels) meta.indices.push_back(quo.order);
    for (int q : st.cfg.degrees) {
      std::vector<long> betti;
      std::vector<LevelRanks> rank_data;
      for (const FiniteQuotient& quo : st.tower.levels) {
        FlatComplex fc = reduce_complex(st.complex_spec, quo, CoefficientRing::Fp(p));
        std::vector<long> rk(fc.top_degree() + 2, 0);
        for (int deg = 1; deg <= fc.top_degree(); ++deg)
          rk[deg] = rank_mod_prime(fc.boundaries[deg - 1], static_cast<std::uint64_t>(p));
        betti.push_back(fc.ranks[q] - rk[q] - rk[q + 1]);
        LevelRanks lr;
        lr.domain_dim = q >= 1 ? fc.ranks[q] : 0;
        lr.im = q >= 1 ? rk[q] : 0;
        lr.ker = lr.domain_dim - lr.im;
        rank_data.push_back(lr);
      }
      PadicReport rep = padic_fit(betti, meta, st.cfg.tolerance, rank_data);

      std::string stem = "padic_q" + std::to_string(q) + "_p" + std::to_string(p);
      std::ostringstream csv;
      csv << "level,index,betti,residual\n";
      for (std::size_t i = 0; i < betti.size(); ++i)
        csv << (i + 1) << ',' << meta.indices[i] << ',' << betti[i] << ','
            << rat_str(rep.residuals[i]) << '\n';
      st.emit.write(stem + ".csv", csv.str());

      json jr;
      jr["p"] = p;
      jr["d"] = d;
      jr["degree"] = q;
      jr["beta_estimate"] = rat_str(rep.beta_estimate);
      json resid = json::array();
      for (const Rat& r : rep.residuals) resid.push_back(rat_str(r));
      jr["residuals"] = resid;
      jr["all_zero_residuals"] = rep.all_zero_residuals;
      if (std::isinf(rep.fitted_exponent))
        jr["fitted_exponent"] = "-inf";
      else
        jr["fitted_exponent"] = rep.fitted_exponent;
      jr["bound"] = rep.bound;
      jr["bound_ok"] = rep.bound_ok;
      st.emit.write(stem + ".json", jr.dump(2) + "\n");

      std::string where = "q=" + std::to_string(q) + ", p=" + std::to_string(p);
      if (!rep.bound_ok) st.violation("padic", "residual exponent above bound at " + where);
      (*st.summary)["analyses"]["padic"]["beta_estimate"]["q" + std::to_string(q) + "_p" +
                                                          std::to_string(p)] =
          rat_str(rep.beta_estimate);
    }
  }
}

void run_rankgrad(RunState& st) {
  RankGradientReport rep = rank_gradient(st.complex_spec, st.tower, st.cfg.primes, st.rng);
  std::ostringstream csv;
  csv << "level,label,index,d_estimate,gradient";
  for (long p : rep.primes) csv << ",b1_F" << p;
  csv << '\n';
  for (const RankGradientReport::Row& row : rep.rows) {
    csv << row.level << ',' << csv_field(row.label) << ',' << row.index << ',' << row.d_estimate
        << ',' << rat_str(row.gradient);
    for (long b : row.b1_Fp) csv << ',' << b;
    csv << '\n';
  }
  st.emit.write("rankgrad.csv", csv.str());
  (*st.summary)["analyses"]["rankgrad"]["limit_estimate"] = rep.limit_estimate;
  (*st.summary)["analyses"]["rankgrad"]["reference_l2"] = rep.reference_l2;
  if (!rep.identity_ok) st.violation("rankgrad", "cover rank identity failed");
  if (!rep.monotone_ok) st.violation("rankgrad", "gradient sequence increased");
  if (!rep.chain_ok) st.violation("rankgrad", "coefficient inequality chain failed");
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult res;
  json summary;
  summary["format"] = 1;
  std::vector<std::pair<std::string, std::string>> statuses;

  try {
    if (cfg.analyses.empty()) throw InputError("no analyses requested");
    std::set<std::string> requested;
    for (const std::string& a : cfg.analyses) {
      if (std::find(kAnalyses.begin(), kAnalyses.end(), a) == kAnalyses.end())
        throw InputError("unknown analysis '" + a + "'");
      requested.insert(a);
    }
    for (long p : cfg.primes)
      if (!is_small_prime(p)) throw InputError("configured p=" + std::to_string(p) + " is not prime");
    if (cfg.degrees.empty()) throw InputError("no degrees requested");
    if (cfg.k_max < 1) throw InputError("k_max must be at least 1");
    if (cfg.bins < 1) throw InputError("bins must be at least 1");

    RunState st(cfg, &res, &summary);
    st.complex_spec = resolve_complex(cfg.complex_src, cfg.strict);
    ComplexValidation cv = validate_complex(st.complex_spec);
    if (!cv.ok) throw InvariantError("complex validation: " + cv.message);
    st.tower = resolve_tower(cfg.tower_src, st.complex_spec.model, cfg.strict);
    for (int q : cfg.degrees)
      if (q < 0 || q > st.complex_spec.top_degree())
        throw InputError("degree " + std::to_string(q) + " outside complex range");

    std::filesystem::create_directories(cfg.out_dir);
    st.emit.out_dir = cfg.out_dir;

    summary["complex"] = cfg.complex_src.builtin.empty()
                             ? cfg.complex_src.file + " over " + st.complex_spec.model.str()
                             : cfg.complex_src.builtin;
    json levels = json::array();
    for (const FiniteQuotient& quo : st.tower.levels) levels.push_back(quo.label);
    summary["tower"] = levels;
    summary["seed"] = cfg.seed;

    for (const std::string& name : kAnalyses) {
      if (!requested.count(name)) continue;
      std::size_t before = res.violations.size();
      if (name == "betti") run_betti(st);
      if (name == "spectrum") run_spectrum(st);
      if (name == "converge") run_converge(st);
      if (name == "fkdet") run_fkdet(st);
      if (name == "modp") run_modp(st);
      if (name == "padic") run_padic(st);
      if (name == "rankgrad") run_rankgrad(st);
      statuses.emplace_back(name, res.violations.size() == before ? "ok" : "violation");
      summary["analyses"][name]["status"] = statuses.back().second;
    }
  } catch (const InputError& e) {
    res.exit_code = 1;
    res.notes.push_back(std::string("input error: ") + e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
  } catch (const InvariantError& e) {
    res.exit_code = 2;
    res.violations.push_back(e.what());
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
  }

  if (res.exit_code == 0 && !res.violations.empty()) res.exit_code = 2;
  summary["violations"] = res.violations;
  summary["exit_code"] = res.exit_code;
  if (res.exit_code != 1) {
    try {
      atomic_write_file(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
    } catch (const InputError&) {
      // unreachable out_dir; stdout still carries the table
    }
  }

  for (const auto& [name, status] : statuses) std::printf("%-10s %s\n", name.c_str(), status.c_str());
  for (const std::string& n : res.notes) std::printf("note: %s\n", n.c_str());
  for (const std::string& v : res.violations) std::printf("violation: %s\n", v.c_str());
  return res;
}

}  // namespace towerlab
