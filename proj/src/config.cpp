#include "squit/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "squit/error.hpp"

namespace squit {

namespace {

class Scanner {
 public:
  Scanner(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  // Whitespace, newlines and comments.
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  void skip_inline() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  void expect_eol() {
    skip_inline();
    if (peek() == '#')
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    if (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r')
      fail("unexpected text after value");
  }
  bool done() {
    skip();
    return pos_ >= text_.size();
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void advance() { ++pos_; }

  std::string bare_key() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '-'))
      ++pos_;
    if (start == pos_) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string quoted() {
    if (peek() != '"') fail("expected '\"'");
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\' && pos_ < text_.size()) {
        char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
        continue;
      }
      out += c;
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  ConfigValue value() {
    skip_inline();
    if (peek() != '[') return scalar();
    ++pos_;
    std::vector<ConfigScalar> items;
    for (;;) {
      skip();
      if (peek() == ']') {
        ++pos_;
        return items;
      }
      items.push_back(scalar());
      skip();
      if (peek() == ',') ++pos_;
      else if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  std::size_t line() const { return line_; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

 private:
  ConfigScalar scalar() {
    if (peek() == '"') return quoted();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '#')
      ++pos_;
    std::string word(text_.substr(start, pos_ - start));
    if (word.empty()) fail("expected a value");
    if (word == "true") return true;
    if (word == "false") return false;
    std::string digits;
    for (char c : word)
      if (c != '_') digits += c;
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (ec == std::errc() && p == digits.data() + digits.size()) return i;
    try {
      std::size_t used = 0;
      double d = std::stod(digits, &used);
      if (used == digits.size()) return d;
    } catch (const std::exception&) {
    }
    fail("cannot read value '" + word + "'");
  }

  std::string_view text_;
  const std::string& source_;
  std::size_t line_ = 1;
  std::size_t pos_ = 0;
};

}  // namespace

ConfigDoc ConfigDoc::parse(std::string_view text, const std::string& source) {
  ConfigDoc doc;
  doc.source_ = source;
  Scanner scan(text, source);
  std::string section;
  while (!scan.done()) {
    if (scan.peek() == '[') {
      scan.advance();
      scan.skip_inline();
      section = scan.bare_key();
      scan.skip_inline();
      if (scan.peek() != ']') scan.fail("unterminated section header");
      scan.advance();
      scan.expect_eol();
      continue;
    }
    const std::string key = scan.peek() == '"' ? scan.quoted() : scan.bare_key();
    scan.skip_inline();
    if (scan.peek() != '=') scan.fail("expected '=' after key '" + key + "'");
    scan.advance();
    ConfigValue value = scan.value();
    scan.expect_eol();
    const std::string full = section.empty() ? key : section + "." + key;
    if (!doc.values_.emplace(full, std::move(value)).second)
      scan.fail("duplicate key '" + full + "'");
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

namespace {

template <typename T>
std::optional<T> scalar_as(const std::map<std::string, ConfigValue>& values, const std::string& key,
                           const std::string& source, const char* type_name) {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  const auto* scalar = std::get_if<ConfigScalar>(&it->second);
  if (scalar) {
    if (const auto* v = std::get_if<T>(scalar)) return *v;
    if constexpr (std::is_same_v<T, double>) {
      if (const auto* i = std::get_if<std::int64_t>(scalar)) return static_cast<double>(*i);
    }
  }
  throw ConfigError(source + ": key '" + key + "' must be " + type_name);
}

}  // namespace

std::optional<std::string> ConfigDoc::get_string(const std::string& key) const {
  return scalar_as<std::string>(values_, key, source_, "a string");
}
std::optional<std::int64_t> ConfigDoc::get_int(const std::string& key) const {
  return scalar_as<std::int64_t>(values_, key, source_, "an integer");
}
std::optional<double> ConfigDoc::get_double(const std::string& key) const {
  return scalar_as<double>(values_, key, source_, "a number");
}
std::optional<bool> ConfigDoc::get_bool(const std::string& key) const {
  return scalar_as<bool>(values_, key, source_, "a boolean");
}

std::optional<std::vector<std::string>> ConfigDoc::get_strings(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* list = std::get_if<std::vector<ConfigScalar>>(&it->second);
  if (!list) throw ConfigError(source_ + ": key '" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : *list) {
    const auto* s = std::get_if<std::string>(&item);
    if (!s) throw ConfigError(source_ + ": key '" + key + "' must be a list of strings");
    out.push_back(*s);
  }
  return out;
}

std::vector<std::string> ConfigDoc::keys_in(const std::string& section) const {
  std::vector<std::string> out;
  const std::string prefix = section + ".";
  for (const auto& [key, value] : values_)
    if (key.rfind(prefix, 0) == 0) out.push_back(key.substr(prefix.size()));
  return out;
}

}  // namespace squit
