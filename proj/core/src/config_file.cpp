#include "ocsim/config_file.hpp"

#include <fstream>
#include <sstream>

#include "ocsim/errors.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

const std::string* ConfigDoc::Section::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

ConfigDoc::Section* ConfigDoc::find(const std::string& name) {
  for (Section& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const ConfigDoc::Section* ConfigDoc::find(const std::string& name) const {
  for (const Section& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const std::string* ConfigDoc::get(const std::string& section, const std::string& key) const {
  const Section* s = find(section);
  return s ? s->get(key) : nullptr;
}

void ConfigDoc::set(const std::string& section, const std::string& key, const std::string& value) {
  Section* s = find(section);
  if (!s) {
    sections.push_back({section, {}});
    s = &sections.back();
  }
  for (auto& [k, v] : s->entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  s->entries.emplace_back(key, value);
}

std::string ConfigDoc::serialize() const {
  std::ostringstream os;
  bool first = true;
  for (const Section& s : sections) {
    if (!first) os << "\n";
    first = false;
    os << "[" << s.name << "]\n";
    for (const auto& [k, v] : s.entries) os << k << " = " << v << "\n";
  }
  return os.str();
}

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  Section* cur = nullptr;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line(trim(raw));
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      std::string name(trim(std::string_view(line).substr(1, line.size() - 2)));
      if (name.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      if (doc.find(name))
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" + name + "]");
      doc.sections.push_back({name, {}});
      cur = &doc.sections.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`, got `" +
                        line + "`");
    if (!cur)
      throw ConfigError("line " + std::to_string(lineno) + ": entry before any [section] header");
    std::string key(trim(std::string_view(line).substr(0, eq)));
    std::string value(trim(std::string_view(line).substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (cur->get(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key `" + key + "` in [" +
                        cur->name + "]");
    cur->entries.emplace_back(key, value);
  }
  return doc;
}

ConfigDoc ConfigDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace ocsim
