#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/graph/build.hpp"
#include "difuzz/graph/dot.hpp"
#include "difuzz/preprocess/analysis.hpp"

namespace difuzz::pre {

// Graphs directory layout: callgraph.dot, cfg.<function>.<occurrence>.dot,
// and callsites.tsv (function, occurrence, block, callee) — the DOT schema
// carries no call-site info, the sidecar does.
inline void write_graphs_dir(const ProgramModel& m, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "callgraph.dot", std::ios::binary);
    out << graphs::emit_dot(m.cg);
  }
  std::string callsites;
  for (const auto& cfg : m.cfgs) {
    graphs::ProgramGraph g;
    g.kind = graphs::ProgramGraph::Kind::ControlFlowGraph;
    g.function = cfg.function;
    for (const auto& b : cfg.blocks) {
      graphs::GraphNode n;
      n.id = graphs::detail::node_id(b.index);
      n.filename = cfg.file;
      n.startline = b.start_line;
      n.headline = b.start_line;
      n.bbendline = b.end_line;
      n.startcolumn = 1;
      n.label = cfg.function + "#bb" + std::to_string(b.index);
      g.nodes.push_back(std::move(n));
      for (const auto& callee : b.callees)
        callsites += cfg.function + "\t" + std::to_string(cfg.occurrence) + "\t" +
                     std::to_string(b.index) + "\t" + callee + "\n";
    }
    for (const auto& b : cfg.blocks)
      for (int s : b.succs)
        g.edges.push_back({graphs::detail::node_id(b.index), graphs::detail::node_id(s), false});
    g.entry = graphs::detail::node_id(0);
    std::ofstream out(fs::path(dir) / ("cfg." + cfg.function + "." +
                                       std::to_string(cfg.occurrence) + ".dot"),
                      std::ios::binary);
    out << graphs::emit_dot(g);
  }
  std::ofstream out(fs::path(dir) / "callsites.tsv", std::ios::binary);
  out << callsites;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline ProgramModel load_graphs_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  ProgramModel m;
  fs::path cg_path = fs::path(dir) / "callgraph.dot";
  m.cg = graphs::parse_dot(detail::read_file(cg_path));
  m.cg.kind = graphs::ProgramGraph::Kind::CallGraph;
  std::map<std::string, int> occ_count;
  int decl = 0;
  for (const auto& n : m.cg.nodes) {
    m.cg_decl_index[n.id] = decl++;
    m.cg_fn[n.id] = {n.label, occ_count[n.label]++};
  }

  std::vector<fs::path> cfg_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("cfg.", 0) == 0 && name.size() > 8 &&
        name.substr(name.size() - 4) == ".dot")
      cfg_files.push_back(entry.path());
  }
  std::sort(cfg_files.begin(), cfg_files.end());
  for (const auto& p : cfg_files) {
    std::string name = p.filename().string();
    std::string core = name.substr(4, name.size() - 8);  // <function>.<occurrence>
    std::size_t dot = core.rfind('.');
    if (dot == std::string::npos)
      throw std::runtime_error("bad CFG file name: " + name);
    ProgramModel::Cfg cfg;
    cfg.function = core.substr(0, dot);
    cfg.occurrence = std::stoi(core.substr(dot + 1));
    graphs::ProgramGraph g = graphs::parse_dot(detail::read_file(p));
    std::map<std::string, int> block_of_node;
    for (const auto& n : g.nodes) {
      if (!n.declared) continue;
      std::size_t bb = n.label.rfind("#bb");
      if (bb == std::string::npos)
        throw std::runtime_error("CFG node without #bb label in " + name);
      int index = std::stoi(n.label.substr(bb + 3));
      block_of_node[n.id] = index;
      if (static_cast<int>(cfg.blocks.size()) <= index)
        cfg.blocks.resize(static_cast<std::size_t>(index) + 1);
      ProgramModel::Block& b = cfg.blocks[static_cast<std::size_t>(index)];
      b.index = index;
      b.start_line = n.startline;
      b.end_line = n.bbendline;
      cfg.file = n.filename;
    }
    for (const auto& e : g.edges)
      cfg.blocks[static_cast<std::size_t>(block_of_node.at(e.from))].succs.push_back(
          block_of_node.at(e.to));
    m.cfgs.push_back(std::move(cfg));
  }

  fs::path cs_path = fs::path(dir) / "callsites.tsv";
  if (fs::exists(cs_path)) {
    std::istringstream in(detail::read_file(cs_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string fn, occ, blk, callee;
      if (!std::getline(ls, fn, '\t') || !std::getline(ls, occ, '\t') ||
          !std::getline(ls, blk, '\t') || !std::getline(ls, callee))
        throw std::runtime_error("bad callsites.tsv line: " + line);
      for (auto& cfg : m.cfgs) {
        if (cfg.function == fn && cfg.occurrence == std::stoi(occ))
          cfg.blocks.at(static_cast<std::size_t>(std::stoi(blk))).callees.push_back(callee);
      }
    }
  }
  return m;
}

}  // namespace difuzz::pre
