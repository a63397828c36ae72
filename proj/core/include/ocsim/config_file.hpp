#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ocsim {

// Minimal INI document: ordered sections of ordered key/value pairs.
// '#' and ';' start comments, keys are `name = value`, values are trimmed
// plain text.  Parsing is strict (duplicate sections or keys, entries before
// the first section header, and malformed lines all throw ConfigError with a
// line number) so that parse -> serialize -> parse is an identity.
struct ConfigDoc {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* get(const std::string& key) const;
  };

  std::vector<Section> sections;

  Section* find(const std::string& name);
  const Section* find(const std::string& name) const;
  // Returns nullptr when the section or key is absent.
  const std::string* get(const std::string& section, const std::string& key) const;
  // Creates the section and/or key on demand; overwrites an existing value.
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string serialize() const;

  static ConfigDoc parse(const std::string& text);
  static ConfigDoc parse_file(const std::string& path);
};

}  // namespace ocsim
