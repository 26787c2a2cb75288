#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace difuzz::pre {

struct TargetPoint {
  std::string id;
  std::string file;
  int line = 1;
  double timeout_s = 60.0;

  friend bool operator==(const TargetPoint& a, const TargetPoint& b) {
    return a.id == b.id && a.file == b.file && a.line == b.line && a.timeout_s == b.timeout_s;
  }
};

struct EtsBlock {
  int block_id = 0;
  std::string file;
  std::string function;
  int occurrence = 0;
  int cfg_block = 0;
  int start_line = 0;
  int end_line = 0;
  double weight = 0.0;  // in (0, 1]; exactly 1 for target-containing blocks

  friend bool operator==(const EtsBlock& a, const EtsBlock& b) {
    return a.block_id == b.block_id && a.file == b.file && a.function == b.function &&
           a.occurrence == b.occurrence && a.cfg_block == b.cfg_block &&
           a.start_line == b.start_line && a.end_line == b.end_line && a.weight == b.weight;
  }
};

struct EnhancedTargetSequence {
  std::vector<TargetPoint> targets;
  std::vector<EtsBlock> blocks;
  int max_block_distance = 0;

  const EtsBlock* find_block(int block_id) const {
    for (const auto& b : blocks)
      if (b.block_id == block_id) return &b;
    return nullptr;
  }

  friend bool operator==(const EnhancedTargetSequence& a, const EnhancedTargetSequence& b) {
    return a.targets == b.targets && a.blocks == b.blocks &&
           a.max_block_distance == b.max_block_distance;
  }
};

struct TargetListError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Target list format: one `id<TAB>path:line<TAB>timeout_s` per line.
inline std::vector<TargetPoint> parse_target_list(const std::string& text) {
  std::vector<TargetPoint> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw TargetListError("target list line " + std::to_string(lineno) +
                            ": expected id<TAB>path:line<TAB>timeout_s");
    TargetPoint tp;
    tp.id = line.substr(0, t1);
    std::string loc = line.substr(t1 + 1, t2 - t1 - 1);
    std::size_t colon = loc.rfind(':');
    if (colon == std::string::npos)
      throw TargetListError("target list line " + std::to_string(lineno) +
                            ": location must be path:line");
    tp.file = loc.substr(0, colon);
    try {
      tp.line = std::stoi(loc.substr(colon + 1));
      tp.timeout_s = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw TargetListError("target list line " + std::to_string(lineno) + ": bad number");
    }
    if (tp.line < 1 || tp.timeout_s <= 0)
      throw TargetListError("target list line " + std::to_string(lineno) +
                            ": line must be >= 1 and timeout positive");
    out.push_back(std::move(tp));
  }
  return out;
}

inline std::vector<TargetPoint> load_target_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TargetListError("cannot open target list: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_target_list(ss.str());
}

}  // namespace difuzz::pre
