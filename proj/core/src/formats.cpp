#include "towerlab/formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace towerlab {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, bool strict,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (known) continue;
    if (strict) fail(where, "unknown key '" + key + "'");
    std::fprintf(stderr, "warning: %s: ignoring unknown key '%s'\n", where.c_str(), key.c_str());
  }
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

long as_long(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

void check_format(const json& j, bool strict, const std::string& where) {
  if (!j.contains("format")) {
    if (strict) fail(where, "missing key 'format'");
    std::fprintf(stderr, "warning: %s: missing 'format', assuming version 1\n", where.c_str());
    return;
  }
  long v = as_long(j["format"], where + ".format");
  if (v != 1) fail(where + ".format", "unsupported version " + std::to_string(v));
}

json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, e.what());
  }
}

std::string coeff_str(const Rat& c) {
  return c.get_den() == 1 ? c.get_num().get_str() : rat_str(c);
}

std::string kind_name(GroupKind k) {
  switch (k) {
    case GroupKind::free:
      return "free";
    case GroupKind::free_abelian:
      return "free_abelian";
    case GroupKind::heisenberg:
      return "heisenberg";
  }
  return "";
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file: " + tmp);
    out << contents;
    if (!out.flush()) throw InputError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw InputError("cannot rename into place: " + path);
}

ChainComplexSpec parse_complex_text(const std::string& text, bool strict, const std::string& where) {
  json j = parse_text(text, where);
  if (!j.is_object()) fail(where, "expected a top-level object");
  check_keys(j, {"format", "group", "coefficients", "ranks", "boundaries"}, strict, where);
  check_format(j, strict, where);

  const json& jg = field(j, "group", where);
  check_keys(jg, {"kind", "rank"}, strict, where + ".group");
  GroupModelSpec model = make_model(as_string(field(jg, "kind", where + ".group"), where + ".group.kind"),
                                    as_long(field(jg, "rank", where + ".group"), where + ".group.rank"));
  CoefficientRing ring = parse_ring(as_string(field(j, "coefficients", where), where + ".coefficients"));

  const json& jr = field(j, "ranks", where);
  if (!jr.is_array() || jr.empty()) fail(where + ".ranks", "expected a nonempty array");
  std::vector<long> ranks;
  for (std::size_t q = 0; q < jr.size(); ++q) {
    long n = as_long(jr[q], where + ".ranks[" + std::to_string(q) + "]");
    if (n < 0) fail(where + ".ranks[" + std::to_string(q) + "]", "negative rank");
    ranks.push_back(n);
  }

  ChainComplexSpec spec;
  spec.model = model;
  spec.ring = ring;
  spec.ranks = ranks;
  const json& jb = field(j, "boundaries", where);
  if (!jb.is_object()) fail(where + ".boundaries", "expected an object");
  for (const auto& [key, value] : jb.items()) {
    (void)value;
    long q = 0;
    try {
      q = std::stol(key);
    } catch (...) {
      fail(where + ".boundaries", "non-numeric degree key '" + key + "'");
    }
    if (q < 1 || q > spec.top_degree()) fail(where + ".boundaries", "degree key '" + key + "' out of range");
  }
  for (int q = 1; q <= spec.top_degree(); ++q) {
    std::string key = std::to_string(q);
    std::string bw = where + ".boundaries." + key;
    if (!jb.contains(key)) fail(where + ".boundaries", "missing degree key '" + key + "'");
    const json& rows = jb[key];
    if (!rows.is_array() || static_cast<long>(rows.size()) != ranks[q])
      fail(bw, "expected " + std::to_string(ranks[q]) + " rows");
    GroupRingMatrix a(model, ring, ranks[q], ranks[q - 1]);
    for (long r = 0; r < ranks[q]; ++r) {
      const json& row = rows[r];
      std::string rw = bw + "[" + std::to_string(r) + "]";
      if (!row.is_array() || static_cast<long>(row.size()) != ranks[q - 1])
        fail(rw, "expected " + std::to_string(ranks[q - 1]) + " entries");
      for (long c = 0; c < ranks[q - 1]; ++c) {
        const json& entry = row[c];
        std::string ew = rw + "[" + std::to_string(c) + "]";
        if (!entry.is_array()) fail(ew, "expected an array of terms");
        for (std::size_t t = 0; t < entry.size(); ++t) {
          const json& term = entry[t];
          std::string tw = ew + "[" + std::to_string(t) + "]";
          if (!term.is_object()) fail(tw, "expected a term object");
          check_keys(term, {"word", "coeff"}, strict, tw);
          std::string word = as_string(field(term, "word", tw), tw + ".word");
          std::string coeff = as_string(field(term, "coeff", tw), tw + ".coeff");
          try {
            a.at(r, c).add_term(parse_word(model, word), parse_rat(coeff));
          } catch (const InputError& e) {
            fail(tw, e.what());
          }
        }
      }
    }
    spec.boundaries.push_back(std::move(a));
  }
  return spec;
}

Tower parse_tower_text(const std::string& text, bool strict, const std::string& where) {
  json j = parse_text(text, where);
  if (!j.is_object()) fail(where, "expected a top-level object");
  check_keys(j, {"format", "levels", "maps"}, strict, where);
  check_format(j, strict, where);

  Tower tower;
  const json& jl = field(j, "levels", where);
  if (!jl.is_array() || jl.empty()) fail(where + ".levels", "expected a nonempty array");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const json& lv = jl[i];
    std::string lw = where + ".levels[" + std::to_string(i) + "]";
    check_keys(lv, {"order", "generators", "label"}, strict, lw);
    FiniteQuotient quo;
    quo.order = as_long(field(lv, "order", lw), lw + ".order");
    if (quo.order < 1) fail(lw + ".order", "order must be positive");
    const json& gens = field(lv, "generators", lw);
    if (!gens.is_array()) fail(lw + ".generators", "expected an array");
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const json& pj = gens[g];
      std::string pw = lw + ".generators[" + std::to_string(g) + "]";
      if (!pj.is_array()) fail(pw, "expected a permutation array");
      Perm perm;
      for (std::size_t k = 0; k < pj.size(); ++k) {
        long v = as_long(pj[k], pw + "[" + std::to_string(k) + "]");
        if (v < 0 || v >= static_cast<long>(pj.size()))
          fail(pw + "[" + std::to_string(k) + "]", "image out of range");
        perm.push_back(static_cast<int>(v));
      }
      quo.generator_images.push_back(std::move(perm));
    }
    quo.label = lv.contains("label") ? as_string(lv["label"], lw + ".label")
                                     : "level " + std::to_string(i + 1);
    tower.levels.push_back(std::move(quo));
  }
  if (j.contains("maps")) {
    const json& jm = j["maps"];
    if (!jm.is_array()) fail(where + ".maps", "expected an array");
    for (std::size_t i = 0; i < jm.size(); ++i) {
      const json& mj = jm[i];
      std::string mw = where + ".maps[" + std::to_string(i) + "]";
      if (!mj.is_array()) fail(mw, "expected an array");
      std::vector<int> f;
      for (std::size_t k = 0; k < mj.size(); ++k) {
        long v = as_long(mj[k], mw + "[" + std::to_string(k) + "]");
        f.push_back(static_cast<int>(v));
      }
      tower.maps.push_back(std::move(f));
    }
  }
  return tower;
}

ChainComplexSpec load_complex(const std::string& path, bool strict) {
  return parse_complex_text(read_file(path), strict, path);
}

Tower load_tower(const std::string& path, bool strict) {
  return parse_tower_text(read_file(path), strict, path);
}

std::string complex_to_json(const ChainComplexSpec& c) {
  json j;
  j["format"] = 1;
  j["group"] = {{"kind", kind_name(c.model.kind)}, {"rank", c.model.generators()}};
  j["coefficients"] = c.ring.str();
  j["ranks"] = c.ranks;
  json jb = json::object();
  for (int q = 1; q <= c.top_degree(); ++q) {
    const GroupRingMatrix& a = c.boundary(q);
    json rows = json::array();
    for (long r = 0; r < a.rows(); ++r) {
      json row = json::array();
      for (long col = 0; col < a.cols(); ++col) {
        json entry = json::array();
        for (const auto& [g, coeff] : a.at(r, col).terms())
          entry.push_back({{"word", g.word()}, {"coeff", coeff_str(coeff)}});
        row.push_back(std::move(entry));
      }
      rows.push_back(std::move(row));
    }
    jb[std::to_string(q)] = std::move(rows);
  }
  j["boundaries"] = std::move(jb);
  return j.dump(2) + "\n";
}

std::string tower_to_json(const Tower& t) {
  json j;
  j["format"] = 1;
  json jl = json::array();
  for (const FiniteQuotient& quo : t.levels) {
    json lv;
    lv["order"] = quo.order;
    lv["generators"] = quo.generator_images;
    if (!quo.label.empty()) lv["label"] = quo.label;
    jl.push_back(std::move(lv));
  }
  j["levels"] = std::move(jl);
  if (t.has_maps()) j["maps"] = t.maps;
  return j.dump(2) + "\n";
}

void save_complex(const ChainComplexSpec& c, const std::string& path) {
  atomic_write_file(path, complex_to_json(c));
}

void save_tower(const Tower& t, const std::string& path) {
  atomic_write_file(path, tower_to_json(t));
}

}  // namespace towerlab
