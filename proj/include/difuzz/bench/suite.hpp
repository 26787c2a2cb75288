#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace difuzz::bench {

struct SuiteProgram {
  std::string name;        // directory name
  std::string file;        // program file name inside the directory
  std::string source;      // program text
  std::string target_id;
  int target_line = 0;     // line of the planted panic
  int timeout_s = 300;
};

namespace detail {

// Line (1-based) of the first occurrence of `needle` in `text`.
inline int line_of(const std::string& text, const std::string& needle) {
  std::size_t pos = text.find(needle);
  if (pos == std::string::npos) throw std::logic_error("suite marker not found: " + needle);
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline SuiteProgram shallow_program() {
  SuiteProgram p;
  p.name = "a_shallow";
  p.file = "a_shallow.mp";
  p.target_id = "a1";
  p.source =
      "func main() {\n"
      "    if (input(0) == 7) {\n"
      "        panic(\"planted: shallow\");\n"
      "    }\n"
      "    print(\"ok\");\n"
      "}\n";
  p.target_line = line_of(p.source, "panic(\"planted: shallow\")");
  return p;
}

inline SuiteProgram magic_program(int k) {
  SuiteProgram p;
  p.name = "b_magic_" + std::to_string(k);
  p.file = p.name + ".mp";
  p.target_id = "b" + std::to_string(k);
  static const int magic[8] = {222, 173, 190, 239, 202, 254, 17, 88};
  std::ostringstream src;
  src << "func main() {\n";
  std::string indent = "    ";
  for (int i = 0; i < k; ++i) {
    src << indent << "if (input(" << i << ") == " << magic[i] << ") {\n";
    indent += "    ";
  }
  src << indent << "panic(\"planted: magic\");\n";
  for (int i = k; i > 0; --i) {
    indent.resize(indent.size() - 4);
    src << indent << "}\n";
  }
  src << "    print(\"ok\");\n"
      << "}\n";
  p.source = src.str();
  p.target_line = line_of(p.source, "panic(\"planted: magic\")");
  return p;
}

inline SuiteProgram loop_program() {
  SuiteProgram p;
  p.name = "c_loop";
  p.file = "c_loop.mp";
  p.target_id = "c1";
  p.source =
      "func main() {\n"
      "    i = 0;\n"
      "    count = 0;\n"
      "    while (i < input_len()) {\n"
      "        if (input(i) == 42) {\n"
      "            count = count + 1;\n"
      "        }\n"
      "        i = i + 1;\n"
      "    }\n"
      "    if (count >= 20) {\n"
      "        if (input(0) == 9) {\n"
      "            panic(\"planted: loop\");\n"
      "        }\n"
      "    }\n"
      "    print(\"done\");\n"
      "}\n";
  p.target_line = line_of(p.source, "panic(\"planted: loop\")");
  return p;
}

inline SuiteProgram deep_call_program() {
  SuiteProgram p;
  p.name = "d_deep";
  p.file = "d_deep.mp";
  p.target_id = "d1";
  // One 3-deep call chain guards the planted panic; 16 decoy functions with
  // their own byte chains flood a coverage-only corpus with distractor seeds.
  constexpr int kDecoys = 16;
  std::ostringstream src;
  src << "func main() {\n"
      << "    b = input(0);\n";
  for (int d = 0; d < kDecoys; ++d)
    src << "    if (b == " << (d + 1) << ") {\n"
        << "        decoy" << d << "();\n"
        << "    }\n";
  src << "    if (b == 77) {\n"
      << "        level1();\n"
      << "    }\n"
      << "    print(\"done\");\n"
      << "}\n"
      << "func level1() {\n"
      << "    if (input(1) == 101) {\n"
      << "        level2();\n"
      << "    }\n"
      << "}\n"
      << "func level2() {\n"
      << "    if (input(2) == 102) {\n"
      << "        level3();\n"
      << "    }\n"
      << "}\n"
      << "func level3() {\n"
      << "    if (input(3) == 103) {\n"
      << "        panic(\"planted: deep\");\n"
      << "    }\n"
      << "}\n";
  for (int d = 0; d < kDecoys; ++d) {
    int base = 4 + 3 * d;
    src << "func decoy" << d << "() {\n"
        << "    if (input(" << base << ") == " << (10 + d) << ") {\n"
        << "        if (input(" << (base + 1) << ") == " << (60 + d) << ") {\n"
        << "            if (input(" << (base + 2) << ") == " << (110 + d) << ") {\n"
        << "                print(\"decoy " << d << "\");\n"
        << "            }\n"
        << "        }\n"
        << "    }\n"
        << "}\n";
  }
  p.source = src.str();
  p.target_line = line_of(p.source, "panic(\"planted: deep\")");
  return p;
}

inline SuiteProgram dead_code_program() {
  SuiteProgram p;
  p.name = "e_dead";
  p.file = "e_dead.mp";
  p.target_id = "e1";
  // input_len() is never negative, so the panic is statically present but
  // dynamically unreachable: the negative control.
  p.source =
      "func main() {\n"
      "    n = input_len();\n"
      "    if (n < 0) {\n"
      "        panic(\"planted: dead\");\n"
      "    }\n"
      "    print(\"alive\");\n"
      "}\n";
  p.target_line = line_of(p.source, "panic(\"planted: dead\")");
  return p;
}

}  // namespace detail

inline std::vector<SuiteProgram> benchmark_suite() {
  return {detail::shallow_program(),  detail::magic_program(2), detail::magic_program(4),
          detail::magic_program(8),   detail::loop_program(),   detail::deep_call_program(),
          detail::dead_code_program()};
}

// Writes every suite program as <out_dir>/<name>/{<file>, targets.tsv} and a
// ready-to-run <out_dir>/bench.toml.
inline std::vector<SuiteProgram> gen_benchmark_suite(const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<SuiteProgram> suite = benchmark_suite();
  for (const auto& p : suite) {
    fs::path dir = fs::path(out_dir) / p.name;
    fs::create_directories(dir);
    std::ofstream src(dir / p.file, std::ios::binary);
    src << p.source;
    std::ofstream tsv(dir / "targets.tsv", std::ios::binary);
    tsv << p.target_id << '\t' << p.file << ':' << p.target_line << '\t' << p.timeout_s
        << '\n';
  }
  std::ofstream toml(fs::path(out_dir) / "bench.toml", std::ios::binary);
  toml << "trials = 10\n"
       << "jobs = 4\n"
       << "rng_seed_base = 1000\n"
       << "clock = \"wall\"\n"
       << "modes = [\"directed\", \"coverage\"]\n";
  for (const auto& p : suite)
    toml << "\n[[program]]\n"
         << "name = \"" << p.name << "\"\n"
         << "source_dir = \"" << p.name << "\"\n"
         << "targets = \"" << p.name << "/targets.tsv\"\n";
  return suite;
}

}  // namespace difuzz::bench
