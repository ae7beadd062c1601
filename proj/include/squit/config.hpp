#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace squit {

// Values of the small TOML subset used by recipe files: strings, integers,
// floats, booleans and flat arrays of those.
using ConfigScalar = std::variant<std::string, std::int64_t, double, bool>;
using ConfigValue = std::variant<ConfigScalar, std::vector<ConfigScalar>>;

// Flat key-value document; keys under a [section] are "section.key".
class ConfigDoc {
 public:
  static ConfigDoc parse(std::string_view text, const std::string& source = "config");
  static ConfigDoc load(const std::string& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, ConfigValue>& values() const { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;  // ints convert
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

  // Keys under "section." with the prefix stripped.
  std::vector<std::string> keys_in(const std::string& section) const;

 private:
  std::string source_;
  std::map<std::string, ConfigValue> values_;
};

}  // namespace squit
