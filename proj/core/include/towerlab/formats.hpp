#pragma once

// JSON file formats for chain complexes and towers, plus atomic file writing.
// Schema version 1; strict loads reject unknown keys, lax loads warn.

#include <string>

#include "towerlab/chain_complex.hpp"
#include "towerlab/group.hpp"

namespace towerlab {

std::string read_file(const std::string& path);

// Writes to a sibling temp file, then renames over the target.
void atomic_write_file(const std::string& path, const std::string& contents);

ChainComplexSpec parse_complex_text(const std::string& text, bool strict, const std::string& where);
Tower parse_tower_text(const std::string& text, bool strict, const std::string& where);

ChainComplexSpec load_complex(const std::string& path, bool strict = true);
Tower load_tower(const std::string& path, bool strict = true);

std::string complex_to_json(const ChainComplexSpec& c);
std::string tower_to_json(const Tower& t);

void save_complex(const ChainComplexSpec& c, const std::string& path);
void save_tower(const Tower& t, const std::string& path);

}  // namespace towerlab
