#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "optosense/errors.hpp"
#include "optosense/io.hpp"

namespace optosense {

namespace {

constexpr std::array<std::string_view, 7> kKeys = {"kappa_hz", "g_m",     "delta", "omega_m",
                                                   "gamma_m",  "drive_E", "n_th"};
constexpr std::array<std::string_view, 5> kRequired = {"g_m", "delta", "omega_m", "gamma_m",
                                                       "drive_E"};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double* field(SystemParams& p, std::string_view key) {
  if (key == "kappa_hz") return &p.kappa_hz;
  if (key == "g_m") return &p.g_m;
  if (key == "delta") return &p.delta;
  if (key == "omega_m") return &p.omega_m;
  if (key == "gamma_m") return &p.gamma_m;
  if (key == "drive_E") return &p.drive_E;
  if (key == "n_th") return &p.n_th;
  return nullptr;
}

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("value for '" + std::string(key) + "' is not a number: '" +
                      std::string(text) + "'");
  return v;
}

void set_key(SystemParams& p, std::string_view key, std::string_view value) {
  double* f = field(p, key);
  if (!f) throw ConfigError("unknown parameter key '" + std::string(key) + "'");
  *f = parse_number(key, value);
}

}  // namespace

SystemParams parse_params(std::string_view text) {
  SystemParams p;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) +
                        "'");
    set_key(p, key, value);
  }
  for (auto key : kRequired)
    if (!seen.count(key)) throw ConfigError("missing required key '" + std::string(key) + "'");
  return p;
}

SystemParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() != ".json") return parse_params(buf.str());

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.contains("params") || !doc["params"].is_object())
    throw ConfigError("'" + path.string() + "' has no 'params' object");
  SystemParams p;
  std::set<std::string, std::less<>> seen;
  for (const auto& [key, value] : doc["params"].items()) {
    double* f = field(p, key);
    if (!f) throw ConfigError("unknown parameter key '" + key + "'");
    if (!value.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
    *f = value.get<double>();
    seen.insert(key);
  }
  for (auto key : kRequired)
    if (!seen.count(key)) throw ConfigError("missing required key '" + std::string(key) + "'");
  return p;
}

void apply_override(SystemParams& params, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  set_key(params, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string format_params(const SystemParams& params) {
  std::string out;
  char buf[64];
  SystemParams copy = params;
  for (auto key : kKeys) {
    std::snprintf(buf, sizeof buf, "%.17g", *field(copy, key));
    out += std::string(key) + " = " + buf + "\n";
  }
  return out;
}

}  // namespace optosense
