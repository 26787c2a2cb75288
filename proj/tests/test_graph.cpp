#include "catch_amalgamated.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "difuzz/graph/build.hpp"
#include "difuzz/graph/dot.hpp"
#include "difuzz/graph/graph.hpp"
#include "difuzz/lang/parse.hpp"
#include "support/graph_gen.hpp"

using namespace difuzz;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("record snippet with an indirect edge") {
  graphs::ProgramGraph g = graphs::parse_dot(read_fixture("fig_cpp.dot"));
  REQUIRE(g.nodes.size() == 3);  // one declared record, two edge-only endpoints
  const graphs::GraphNode* n = g.find("Node0x7f2ac4ce0410");
  REQUIRE(n != nullptr);
  CHECK(n->declared);
  CHECK(n->filename == "/xInt/source/styles/format.cpp");
  CHECK(n->startline == 177);
  CHECK(n->headline == 179);
  CHECK(n->bbendline == 177);
  CHECK(n->startcolumn == 5);
  CHECK(n->label == "_ZNK4xInt6format12fill_appliedEv");
  REQUIRE(g.edges.size() == 2);
  CHECK_FALSE(g.edges[0].indirect);
  CHECK(g.edges[1].indirect);
  CHECK(g.edges[1].to == "Node0x7f2ad40567c0");
  CHECK_FALSE(g.find("Node0x7f2ad40567c0")->declared);
}

TEST_CASE("mangled symbol labels parse intact") {
  graphs::ProgramGraph g = graphs::parse_dot(read_fixture("fig_rust.dot"));
  const graphs::GraphNode* n = g.find("Node0x7ff148049ed0");
  REQUIRE(n != nullptr);
  CHECK(n->label == "_ZN6goblin7archive6Member13extended_name17hcb95c3126c53047E");
  CHECK(n->startcolumn == 0);
}

TEST_CASE("newline inside a quoted filename becomes a path separator") {
  graphs::ProgramGraph g = graphs::parse_dot(read_fixture("fig_go.dot"));
  const graphs::GraphNode* n = g.find("Node0x503d486ed8f2");
  REQUIRE(n != nullptr);
  CHECK(n->filename == "/fyne/widget/entry.go");
  CHECK(n->startline == 1950);
  CHECK(n->label == "fyne.io/fyne/v2/widget.isWordSeparator");
}

TEST_CASE("fixture snippets survive an emit/parse round trip") {
  for (const char* name : {"fig_cpp.dot", "fig_rust.dot", "fig_go.dot"}) {
    graphs::ProgramGraph g = graphs::parse_dot(read_fixture(name));
    std::string text = graphs::emit_dot(g);
    graphs::ProgramGraph g2 = graphs::parse_dot(text);
    INFO(name);
    CHECK(graphs::graph_eq(g, g2));
    CHECK(graphs::emit_dot(g2) == text);  // deterministic emitter
  }
}

TEST_CASE("schema violations are rejected with line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      graphs::parse_dot(text);
    } catch (const graphs::DotSyntaxError& e) {
      return e.line;
    }
    return -1;
  };
  // shape must be record
  CHECK(line_of("N[shape=circle,filename=\"f\",startline=1,headline=1,bbendline=1,"
                "startcolumn=0,label=\"{x}\"];\n") == 1);
  // unknown attribute
  CHECK(line_of("N[shape=record,filename=\"f\",startline=1,headline=1,bbendline=1,"
                "startcolumn=0,label=\"{x}\",color=red];\n") == 1);
  // missing attribute (no label)
  CHECK(line_of("N[shape=record,filename=\"f\",startline=1,headline=1,bbendline=1,"
                "startcolumn=0];\n") == 1);
  // duplicate attribute
  CHECK(line_of("N[shape=record,shape=record,filename=\"f\",startline=1,headline=1,"
                "bbendline=1,startcolumn=0,label=\"{x}\"];\n") == 1);
  // bad integer, on line 2
  CHECK(line_of("A -> B;\nN[shape=record,filename=\"f\",startline=zz,headline=1,"
                "bbendline=1,startcolumn=0,label=\"{x}\"];\n") == 2);
  // label must be braced
  CHECK(line_of("N[shape=record,filename=\"f\",startline=1,headline=1,bbendline=1,"
                "startcolumn=0,label=\"x\"];\n") == 1);
  // unterminated statement
  CHECK(line_of("A -> B") == 1);
  // unknown edge attribute
  CHECK(line_of("A -> B[dashed];\n") == 1);
  // duplicate node declaration
  std::string rec =
      "N[shape=record,filename=\"f\",startline=1,headline=1,bbendline=1,"
      "startcolumn=0,label=\"{x}\"];\n";
  CHECK(line_of(rec + rec) == 2);
}

TEST_CASE("random graphs round trip field-for-field") {
  testgen::Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    graphs::ProgramGraph g = testgen::random_graph(rng, i % 2 == 0);
    std::string text = graphs::emit_dot(g);
    graphs::ProgramGraph g2 = graphs::parse_dot(text);
    REQUIRE(graphs::graph_eq(g, g2));
    REQUIRE(graphs::emit_dot(g2) == text);
  }
}

TEST_CASE("call graph counts distinct callees once") {
  lang::Ast ast = lang::parse(
      "func f() { return; }\n"
      "func g() { return; }\n"
      "func main() {\n"
      "    f();\n"
      "    f();\n"
      "    g();\n"
      "}\n",
      "t.mp");
  graphs::ProgramGraph cg = graphs::build_call_graph(ast);
  REQUIRE(cg.nodes.size() == 3);
  REQUIRE(cg.edges.size() == 2);
  std::set<std::string> callee_labels;
  for (const auto& e : cg.edges) callee_labels.insert(cg.find(e.to)->label);
  CHECK(callee_labels == std::set<std::string>{"f", "g"});
}

TEST_CASE("call graph of a lone main") {
  lang::Ast ast = lang::parse("func main() { x = 1; }", "t.mp");
  graphs::ProgramGraph cg = graphs::build_call_graph(ast);
  CHECK(cg.nodes.size() == 1);
  CHECK(cg.edges.empty());
  CHECK(cg.nodes[0].label == "main");
}

TEST_CASE("duplicate-position functions get one node each with shared debug info") {
  lang::Ast ast = lang::parse(
      "func[2] h() {\n"
      "    x = 1;\n"
      "}\n"
      "func main() {\n"
      "    h();\n"
      "}\n",
      "t.mp");
  graphs::ProgramGraph cg = graphs::build_call_graph(ast);
  REQUIRE(cg.nodes.size() == 3);
  const graphs::GraphNode& h0 = cg.nodes[0];
  const graphs::GraphNode& h1 = cg.nodes[1];
  CHECK(h0.label == "h");
  CHECK(h1.label == "h");
  CHECK(h0.id != h1.id);
  CHECK(h0.filename == h1.filename);
  CHECK(h0.startline == h1.startline);
  CHECK(h0.headline == h1.headline);
  CHECK(h0.bbendline == h1.bbendline);
  REQUIRE(cg.edges.size() == 2);  // a call to a duplicated name targets both
}

TEST_CASE("single conditional decomposes into four blocks") {
  lang::Ast ast = lang::parse(
      "func f() { if input(0) == 1 { panic(\"a\"); } }\n"
      "func main() { f(); }\n",
      "t.mp");
  graphs::FunctionCfg cfg = graphs::build_function_cfg(ast, "f", 0);
  REQUIRE(cfg.blocks.size() == 4);  // entry(cond), then, join, exit
  CHECK(cfg.blocks[0].terminator != nullptr);
  CHECK(cfg.blocks[0].succs == std::vector<int>{1, 2});
  CHECK(cfg.blocks[1].stmts.size() == 1);
  CHECK(cfg.blocks[1].succs == std::vector<int>{2});
  CHECK(cfg.blocks[2].succs == std::vector<int>{3});
  CHECK(cfg.blocks[3].succs.empty());
}

TEST_CASE("straight-line function is a single block") {
  lang::Ast ast = lang::parse(
      "func main() {\n"
      "    a = 1;\n"
      "    b = 2;\n"
      "    c = 3;\n"
      "    d = 4;\n"
      "    e = 5;\n"
      "}\n",
      "t.mp");
  graphs::FunctionCfg cfg = graphs::build_function_cfg(ast, "main", 0);
  REQUIRE(cfg.blocks.size() == 1);
  CHECK(cfg.blocks[0].stmts.size() == 5);
  CHECK(cfg.blocks[0].succs.empty());
}

TEST_CASE("loop produces a header with a back edge") {
  lang::Ast ast = lang::parse(
      "func main() {\n"
      "    i = 0;\n"
      "    while i < 3 {\n"
      "        i = i + 1;\n"
      "    }\n"
      "    print(i);\n"
      "}\n",
      "t.mp");
  graphs::FunctionCfg cfg = graphs::build_function_cfg(ast, "main", 0);
  REQUIRE(cfg.blocks.size() == 5);  // entry, header, body, after, exit
  CHECK(cfg.blocks[1].terminator != nullptr);
  CHECK(cfg.blocks[1].succs == std::vector<int>{2, 3});
  CHECK(cfg.blocks[2].succs == std::vector<int>{1});  // back edge
}

TEST_CASE("call graph and entry blocks agree on debug info") {
  testgen::Rng rng(99);
  for (int i = 0; i < 25; ++i) {
    testgen::ProgramGen gen(rng);
    lang::Ast ast = lang::parse(gen.generate(), "gen.mp");
    graphs::ProgramGraph cg = graphs::build_call_graph(ast);
    REQUIRE(cg.nodes.size() == ast.functions.size());
    for (std::size_t f = 0; f < ast.functions.size(); ++f) {
      graphs::FunctionCfg cfg =
          graphs::build_function_cfg(ast, ast.functions[f].name, ast.functions[f].occurrence);
      const graphs::GraphNode& n = cg.nodes[f];
      CHECK(n.filename == cfg.file);
      CHECK(n.startline == ast.functions[f].pos.line);
      CHECK(n.startline == cfg.blocks[0].start_line);
      CHECK(n.headline == cfg.func_headline);
      CHECK(n.bbendline == cfg.blocks[0].end_line);
      CHECK(n.startline <= n.headline);
      CHECK(n.startline <= n.bbendline);
    }
  }
}

TEST_CASE("every block of every generated CFG is reachable from entry") {
  testgen::Rng rng(4242);
  for (int i = 0; i < 25; ++i) {
    testgen::ProgramGen gen(rng);
    lang::Ast ast = lang::parse(gen.generate(), "gen.mp");
    for (const auto& f : ast.functions) {
      graphs::ProgramGraph g = graphs::build_cfg(ast, f.name, f.occurrence);
      auto seen = graphs::reachable_from(g, g.entry);
      for (const auto& n : g.nodes) {
        INFO(f.name << " node " << n.id);
        REQUIRE(seen.count(n.id) == 1);
      }
    }
  }
}

TEST_CASE("unknown function requests fail loudly") {
  lang::Ast ast = lang::parse("func main() {}", "t.mp");
  CHECK_THROWS_AS(graphs::build_cfg(ast, "nope", 0), graphs::UnknownFunction);
  CHECK_THROWS_AS(graphs::build_cfg(ast, "main", 1), graphs::UnknownFunction);
}
