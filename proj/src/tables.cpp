#include "vortmod/tables.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vortmod/errors.hpp"

namespace vortmod {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

double parse_number(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    // from_chars rejects "inf"/"nan" spellings produced by printf
    if (t == "inf") return INFINITY;
    if (t == "-inf") return -INFINITY;
    if (t == "nan" || t == "-nan") return NAN;
    throw ConfigError("not a number: '" + t + "'");
  }
  return v;
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ConfigError("table has no column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& name) const {
  return parse_number(text(row, name));
}

const std::string& Table::text(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

std::string Table::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw ConfigError("table has no metadata '" + key + "'");
}

void write_table(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [k, v] : t.meta) out << "# " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path.string());
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header) continue;
      const auto eq = line.find('=');
      if (eq != std::string::npos) t.meta.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
      continue;
    }
    auto cells = split_commas(line);
    if (!header) {
      t.columns = std::move(cells);
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " fields, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!header) throw ConfigError(path.string() + ": missing header row");
  return t;
}

TableBuilder& TableBuilder::meta(const std::string& key, const std::string& value) {
  t_.meta.emplace_back(key, value);
  return *this;
}

TableBuilder& TableBuilder::row(std::initializer_list<Cell> cells) {
  if (cells.size() != t_.columns.size()) throw std::logic_error("row width does not match header");
  std::vector<std::string> r;
  r.reserve(cells.size());
  for (const auto& c : cells) r.push_back(c.s);
  t_.rows.push_back(std::move(r));
  return *this;
}

ConfigMap parse_config(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    if (!cfg.emplace(key, value).second) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return cfg;
}

ConfigMap read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void write_config(const std::filesystem::path& path, const ConfigMap& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [k, v] : cfg) out << k << " = " << v << '\n';
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["parameters"] = m.parameters;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["isa"] = m.isa;
  j["timings"] = m.timings;
  j["diagnostics"] = m.diagnostics;
  j["outputs"] = m.outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.parameters = j.value("parameters", std::map<std::string, std::string>{});
    m.tool_version = j.value("tool_version", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.threads = j.value("threads", 0u);
    m.isa = j.value("isa", "");
    m.timings = j.value("timings", std::map<std::string, double>{});
    m.diagnostics = j.value("diagnostics", std::map<std::string, double>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace vortmod
