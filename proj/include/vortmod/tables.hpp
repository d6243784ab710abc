#pragma once

// Text formats: comma-separated tables with `# key = value` metadata lines
// and a mandatory header row, flat `key = value` config files, and the JSON
// run manifest.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vortmod {

// Scientific notation, 17 significant digits.
std::string format_number(double v);
double parse_number(const std::string& s);

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws ConfigError if absent
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
  std::string meta_value(const std::string& key) const;  // throws if absent
};

void write_table(const std::filesystem::path& path, const Table& t);
Table read_table(const std::filesystem::path& path);

class TableBuilder {
 public:
  explicit TableBuilder(std::vector<std::string> columns) { t_.columns = std::move(columns); }
  TableBuilder& meta(const std::string& key, const std::string& value);
  TableBuilder& meta(const std::string& key, double value) { return meta(key, format_number(value)); }
  // Cells are either numbers or text; text must not contain commas or newlines.
  struct Cell {
    Cell(double v) : s(format_number(v)) {}
    Cell(int v) : s(std::to_string(v)) {}
    Cell(long v) : s(std::to_string(v)) {}
    Cell(unsigned long v) : s(std::to_string(v)) {}
    Cell(unsigned long long v) : s(std::to_string(v)) {}
    Cell(bool v) : s(v ? "true" : "false") {}
    Cell(const char* v) : s(v) {}
    Cell(std::string v) : s(std::move(v)) {}
    std::string s;
  };
  TableBuilder& row(std::initializer_list<Cell> cells);
  const Table& table() const { return t_; }
  void write(const std::filesystem::path& path) const { write_table(path, t_); }

 private:
  Table t_;
};

using ConfigMap = std::map<std::string, std::string>;

// One `key = value` per line, `#` starts a comment. Malformed lines and
// duplicate keys raise ConfigError naming the line.
ConfigMap read_config(const std::filesystem::path& path);
ConfigMap parse_config(const std::string& text);
void write_config(const std::filesystem::path& path, const ConfigMap& cfg);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;  // canonical arguments, replayable
  std::map<std::string, std::string> parameters;
  std::string tool_version;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string isa;
  std::map<std::string, double> timings;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> outputs;  // relative to the output directory
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace vortmod
