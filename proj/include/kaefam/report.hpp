#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kaefam {

/// 17-significant-digit decimal form; stable across runs.
std::string format_float(double v);

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string str() const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// In-memory output bundle; all files are collected first and written in one
/// deterministic pass.
struct ReportBundle {
  std::vector<std::pair<std::string, std::string>> files; // relative path -> bytes

  void add(std::string name, std::string content);
  const std::string* find(const std::string& name) const;
  void write_to(const std::string& directory) const;
};

} // namespace kaefam
