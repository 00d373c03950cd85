#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ftsweep/errors.hpp"

namespace ftsweep::toml {

/// Scalar or one-level array value from a config file.
class Value {
 public:
  enum class Kind { kString, kInteger, kFloat, kBool, kArray };

  Kind kind = Kind::kString;
  std::string str;
  std::int64_t integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::vector<Value> array;
  int line = 0;

  const std::string& as_string() const {
    require(Kind::kString, "a string");
    return str;
  }
  std::int64_t as_int() const {
    require(Kind::kInteger, "an integer");
    return integer;
  }
  double as_double() const {
    if (kind == Kind::kInteger) return static_cast<double>(integer);
    require(Kind::kFloat, "a number");
    return real;
  }
  bool as_bool() const {
    require(Kind::kBool, "true or false");
    return boolean;
  }
  const std::vector<Value>& as_array() const {
    require(Kind::kArray, "an array");
    return array;
  }

 private:
  void require(Kind expected, const char* what) const {
    if (kind != expected) {
      throw ConfigError("config line " + std::to_string(line) + ": expected " + what);
    }
  }
};

using Table = std::map<std::string, Value>;

struct Document {
  std::map<std::string, Table> sections;  // "" holds keys before any header

  bool has(const std::string& section) const { return sections.count(section) > 0; }
  const Table& section(const std::string& name) const {
    static const Table empty;
    auto it = sections.find(name);
    return it == sections.end() ? empty : it->second;
  }
};

namespace detail {

/// Character cursor with line tracking; config files are small enough to
/// hold in one string.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char take() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + message);
  }

  /// Spaces and tabs only; newlines are significant.
  void skip_blanks() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) take();
  }

  /// Blank space, newlines, and comments.
  void skip_void() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') take();
      } else {
        break;
      }
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

inline bool is_bare_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || c == '.';
}

inline std::string parse_bare(Cursor& in, const char* what) {
  std::string out;
  while (!in.eof() && is_bare_char(in.peek())) out += in.take();
  if (out.empty()) in.fail(std::string("expected ") + what);
  return out;
}

inline std::string parse_quoted(Cursor& in) {
  in.take();  // opening quote
  std::string out;
  while (true) {
    if (in.eof()) in.fail("unterminated string");
    const char c = in.take();
    if (c == '"') return out;
    if (c == '\n') in.fail("unterminated string");
    if (c == '\\') {
      if (in.eof()) in.fail("unterminated escape");
      const char e = in.take();
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: in.fail(std::string("unsupported escape \\") + e);
      }
    } else {
      out += c;
    }
  }
}

inline Value parse_value(Cursor& in);

inline Value parse_array(Cursor& in) {
  Value v;
  v.kind = Value::Kind::kArray;
  v.line = in.line();
  in.take();  // '['
  in.skip_void();
  if (!in.eof() && in.peek() == ']') {
    in.take();
    return v;
  }
  while (true) {
    if (in.eof()) in.fail("unterminated array");
    v.array.push_back(parse_value(in));
    in.skip_void();
    if (in.eof()) in.fail("unterminated array");
    const char c = in.take();
    if (c == ']') return v;
    if (c != ',') in.fail("expected ',' or ']' in array");
    in.skip_void();
    if (!in.eof() && in.peek() == ']') {  // trailing comma
      in.take();
      return v;
    }
  }
}

inline Value parse_scalar_token(Cursor& in) {
  Value v;
  v.line = in.line();
  std::string token;
  while (!in.eof()) {
    const char c = in.peek();
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ',' || c == ']' || c == '#') break;
    token += in.take();
  }
  if (token.empty()) in.fail("expected a value");
  if (token == "true" || token == "false") {
    v.kind = Value::Kind::kBool;
    v.boolean = token == "true";
    return v;
  }
  const char* begin = token.data();
  const char* end = begin + token.size();
  const bool looks_float = token.find_first_of(".eE") != std::string::npos &&
                           token.find_first_not_of("+-0123456789.eE") == std::string::npos;
  if (!looks_float) {
    std::int64_t n = 0;
    const auto [p, ec] = std::from_chars(begin, end, n);
    if (ec == std::errc() && p == end) {
      v.kind = Value::Kind::kInteger;
      v.integer = n;
      return v;
    }
  }
  double d = 0.0;
  const auto [p, ec] = std::from_chars(begin, end, d);
  if (ec == std::errc() && p == end) {
    v.kind = Value::Kind::kFloat;
    v.real = d;
    return v;
  }
  in.fail("cannot parse value '" + token + "' (strings need quotes)");
}

inline Value parse_value(Cursor& in) {
  in.skip_blanks();
  if (in.eof()) in.fail("expected a value");
  const char c = in.peek();
  if (c == '"') {
    Value v;
    v.kind = Value::Kind::kString;
    v.line = in.line();
    v.str = parse_quoted(in);
    return v;
  }
  if (c == '[') return parse_array(in);
  return parse_scalar_token(in);
}

}  // namespace detail

/// Parses the config subset: `[section]` headers, `key = value` pairs,
/// quoted strings, integers, floats, booleans, one-level arrays (which may
/// span lines), and `#` comments.
inline Document parse(std::string_view text) {
  Document doc;
  detail::Cursor in(text);
  std::string current;

  while (true) {
    in.skip_void();
    if (in.eof()) return doc;

    if (in.peek() == '[') {
      in.take();
      in.skip_blanks();
      current = detail::parse_bare(in, "a section name");
      in.skip_blanks();
      if (in.eof() || in.peek() != ']') in.fail("expected ']' after section name");
      in.take();
      in.skip_blanks();
      if (!in.eof() && in.peek() != '\n' && in.peek() != '#') {
        in.fail("unexpected text after section header");
      }
      doc.sections[current];
      continue;
    }

    const int key_line = in.line();
    const std::string key = detail::parse_bare(in, "a key");
    in.skip_blanks();
    if (in.eof() || in.peek() != '=') in.fail("expected '=' after key '" + key + "'");
    in.take();
    Value value = detail::parse_value(in);
    in.skip_blanks();
    if (!in.eof() && in.peek() != '\n' && in.peek() != '#') {
      in.fail("unexpected text after value for key '" + key + "'");
    }
    auto& table = doc.sections[current];
    if (table.count(key) > 0) {
      throw ConfigError("config line " + std::to_string(key_line) + ": duplicate key '" + key +
                        "'");
    }
    table[key] = std::move(value);
  }
}

inline Document parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace ftsweep::toml
