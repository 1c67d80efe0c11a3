#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace footwork {

/// Sectioned key-value config file:
///
///   # comment
///   [section]            or    [kind name]
///   key = value
///
/// Values are free text up to end of line (inline # starts a comment).
/// Sections keep file order; duplicate keys within a section are an error.
class Config {
 public:
  struct Section {
    std::string kind;   // token before the space in the header
    std::string name;   // token after the space, may be empty
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string* raw(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    long get_long(const std::string& key, long def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& def) const;
    std::vector<int> get_ints(const std::string& key,
                              const std::vector<int>& def) const;

    // throwing variants for required keys
    std::string require_string(const std::string& key) const;
    double require_double(const std::string& key) const;
  };

  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  /// First section with this kind (and name, when given); nullptr if absent.
  const Section* find(const std::string& kind, const std::string& name = "") const;
  /// All sections of a kind, in file order.
  std::vector<const Section*> all(const std::string& kind) const;
  const std::vector<Section>& sections() const { return sections_; }

  /// FNV-1a over the raw text; stored in checkpoints to flag config drift.
  std::uint64_t content_hash() const;
  const std::string& text() const { return text_; }

 private:
  std::vector<Section> sections_;
  std::string text_;
};

}  // namespace footwork
