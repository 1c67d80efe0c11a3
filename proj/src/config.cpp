#include "footwork/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "footwork/errors.hpp"

namespace footwork {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("value for '" + key + "' is not a number: '" + v + "'");
  }
}

}  // namespace

bool Config::Section::has(const std::string& key) const {
  return raw(key) != nullptr;
}

const std::string* Config::Section::raw(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::string Config::Section::get_string(const std::string& key,
                                        const std::string& def) const {
  const std::string* v = raw(key);
  return v ? *v : def;
}

double Config::Section::get_double(const std::string& key, double def) const {
  const std::string* v = raw(key);
  return v ? to_double(*v, key) : def;
}

int Config::Section::get_int(const std::string& key, int def) const {
  return static_cast<int>(get_long(key, def));
}

long Config::Section::get_long(const std::string& key, long def) const {
  const std::string* v = raw(key);
  if (!v) return def;
  double d = to_double(*v, key);
  long l = static_cast<long>(d);
  if (static_cast<double>(l) != d)
    throw ValidationError("value for '" + key + "' is not an integer: '" + *v + "'");
  return l;
}

bool Config::Section::get_bool(const std::string& key, bool def) const {
  const std::string* v = raw(key);
  if (!v) return def;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ValidationError("value for '" + key + "' is not a boolean: '" + *v + "'");
}

std::vector<double> Config::Section::get_doubles(
    const std::string& key, const std::vector<double>& def) const {
  const std::string* v = raw(key);
  if (!v) return def;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key));
  return out;
}

std::vector<int> Config::Section::get_ints(const std::string& key,
                                           const std::vector<int>& def) const {
  const std::string* v = raw(key);
  if (!v) return def;
  std::vector<int> out;
  for (double d : get_doubles(key, {})) {
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
      throw ValidationError("value for '" + key + "' is not an integer list");
    out.push_back(i);
  }
  return out;
}

std::string Config::Section::require_string(const std::string& key) const {
  const std::string* v = raw(key);
  if (!v)
    throw ValidationError("missing required key '" + key + "' in section [" +
                          kind + (name.empty() ? "" : " " + name) + "]");
  return *v;
}

double Config::Section::require_double(const std::string& key) const {
  return to_double(require_string(key), key);
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Section* cur = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner.empty()) throw ParseError("empty section header", line_no);
      Section s;
      auto sp = inner.find_first_of(" \t");
      if (sp == std::string::npos) {
        s.kind = inner;
      } else {
        s.kind = inner.substr(0, sp);
        s.name = trim(inner.substr(sp + 1));
      }
      s.line = line_no;
      cfg.sections_.push_back(std::move(s));
      cur = &cfg.sections_.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    if (!cur) throw ParseError("entry before any [section]", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (cur->has(key))
      throw ParseError("duplicate key '" + key + "' in section [" + cur->kind + "]",
                       line_no);
    cur->entries.emplace_back(key, val);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

const Config::Section* Config::find(const std::string& kind,
                                    const std::string& name) const {
  for (const auto& s : sections_)
    if (s.kind == kind && (name.empty() || s.name == name)) return &s;
  return nullptr;
}

std::vector<const Config::Section*> Config::all(const std::string& kind) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_)
    if (s.kind == kind) out.push_back(&s);
  return out;
}

std::uint64_t Config::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text_) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace footwork
