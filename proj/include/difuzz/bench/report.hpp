#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "difuzz/bench/bench.hpp"
#include "json.hpp"

namespace difuzz::bench {

namespace detail {

inline std::string fmt1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string fmt_pct(double v) {
  char buf[64];
  if (v == static_cast<long long>(v))
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  else
    std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string best_text(const TteCell& c) {
  return c.best_s ? fmt1(*c.best_s) : std::string("TO");
}

inline std::string avg_text(const TteCell& c) {
  if (!c.avg_s) return "TO (" + fmt_pct(c.timeout_pct) + "% TO)";
  if (c.timeout_pct > 0.0) return fmt1(*c.avg_s) + " (" + fmt_pct(c.timeout_pct) + "% TO)";
  return fmt1(*c.avg_s);
}

inline void pad(std::string& s, std::size_t width) {
  while (s.size() < width) s.push_back(' ');
}

}  // namespace detail

// Text table: one row per target, a "best, s | avg, s" column pair per mode.
inline std::string render_text(const BenchReport& report) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Target"};
  for (auto m : report.modes) {
    header.push_back(std::string(engine::to_string(m)) + " best, s");
    header.push_back(std::string(engine::to_string(m)) + " avg, s");
  }
  grid.push_back(header);
  for (const auto& row : report.rows) {
    std::vector<std::string> line{row.target_id};
    for (const auto& c : row.cells) {
      line.push_back(detail::best_text(c));
      line.push_back(detail::avg_text(c));
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(grid.front().size(), 0);
  for (const auto& line : grid)
    for (std::size_t i = 0; i < line.size(); ++i)
      widths[i] = std::max(widths[i], line[i].size());
  std::ostringstream out;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t i = 0; i < grid[r].size(); ++i) {
      std::string cell = grid[r][i];
      detail::pad(cell, widths[i]);
      out << cell;
      if (i + 1 < grid[r].size()) out << " | ";
    }
    out << "\n";
    if (r == 0) {
      for (std::size_t i = 0; i < widths.size(); ++i) {
        out << std::string(widths[i], '-');
        if (i + 1 < widths.size()) out << "-+-";
      }
      out << "\n";
    }
  }
  return out.str();
}

inline std::string render_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "target,mode,trials,best_s,avg_s,timeout_pct\n";
  for (const auto& row : report.rows)
    for (std::size_t m = 0; m < row.cells.size(); ++m) {
      const TteCell& c = row.cells[m];
      out << row.target_id << ',' << engine::to_string(report.modes[m]) << ',' << c.trials
          << ',';
      if (c.best_s) out << *c.best_s;
      out << ',';
      if (c.avg_s) out << *c.avg_s;
      out << ',' << c.timeout_pct << "\n";
    }
  return out.str();
}

inline std::string render_json(const BenchReport& report) {
  nlohmann::json j;
  j["modes"] = nlohmann::json::array();
  for (auto m : report.modes) j["modes"].push_back(engine::to_string(m));
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["program"] = row.program;
    r["target"] = row.target_id;
    r["cells"] = nlohmann::json::array();
    for (std::size_t m = 0; m < row.cells.size(); ++m) {
      const TteCell& c = row.cells[m];
      nlohmann::json cell;
      cell["mode"] = engine::to_string(report.modes[m]);
      cell["trials"] = c.trials;
      cell["best_s"] = c.best_s ? nlohmann::json(*c.best_s) : nlohmann::json(nullptr);
      cell["avg_s"] = c.avg_s ? nlohmann::json(*c.avg_s) : nlohmann::json(nullptr);
      cell["timeout_pct"] = c.timeout_pct;
      cell["ttes_s"] = c.ttes;
      r["cells"].push_back(std::move(cell));
    }
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

inline std::string render_report(const BenchReport& report, const std::string& format) {
  if (format == "text") return render_text(report);
  if (format == "csv") return render_csv(report);
  if (format == "json") return render_json(report);
  throw std::runtime_error("unknown report format: " + format);
}

inline void write_report(const BenchReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / "report.txt", std::ios::binary) << render_text(report);
  std::ofstream(fs::path(dir) / "report.csv", std::ios::binary) << render_csv(report);
  std::ofstream(fs::path(dir) / "report.json", std::ios::binary) << render_json(report);
}

}  // namespace difuzz::bench
