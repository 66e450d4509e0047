#pragma once

// A small TOML subset: comments, [tables], [[arrays of tables]], bare keys,
// and basic or literal string / integer / float / boolean / array-of-scalar values. Inline
// tables and dotted keys are not supported.

#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bierstar/error.hpp"

namespace bierstar::toml {

struct Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, std::int64_t, double, bool, Array, Table> v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_number() const { return is_int() || is_float(); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }
  bool is_table() const { return std::holds_alternative<Table>(v); }

  const std::string& as_string() const { return std::get<std::string>(v); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  double as_number() const { return is_int() ? static_cast<double>(as_int()) : std::get<double>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const Array& as_array() const { return std::get<Array>(v); }
  Array& as_array() { return std::get<Array>(v); }
  const Table& as_table() const { return std::get<Table>(v); }
  Table& as_table() { return std::get<Table>(v); }
};

namespace detail {

class Parser {
 public:
  Parser(std::string text, std::string source) : s_(std::move(text)), source_(std::move(source)) {}

  Table parse_document() {
    Table root;
    Table* current = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        current = parse_header(root);
      } else {
        const std::string key = parse_key();
        skip_inline_ws();
        expect('=');
        skip_inline_ws();
        Value val = parse_value();
        if (current->count(key)) error("duplicate key '" + key + "'");
        current->emplace(key, std::move(val));
        end_of_line();
      }
    }
    return root;
  }

  Value parse_single_value() {
    skip_inline_ws();
    Value v = parse_value();
    skip_inline_ws();
    if (!eof()) error("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::Parse, source_ + ":" + std::to_string(line_) + ": " + what);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void expect(char c) {
    if (peek() != c) error(std::string("expected '") + c + "'");
    get();
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') get();
  }
  void skip_ws_comments_newlines() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') get();
    if (!eof() && peek() != '\n') error("expected end of line");
  }

  static bool bare_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::string parse_key() {
    if (peek() == '"' || peek() == '\'') return parse_string();
    std::string k;
    while (!eof() && bare_char(peek())) k.push_back(get());
    if (k.empty()) error("expected a key");
    return k;
  }

  Table* parse_header(Table& root) {
    expect('[');
    const bool array = peek() == '[';
    if (array) get();
    std::vector<std::string> path;
    while (true) {
      skip_inline_ws();
      path.push_back(parse_key());
      skip_inline_ws();
      if (peek() == '.') {
        get();
        continue;
      }
      break;
    }
    expect(']');
    if (array) expect(']');
    end_of_line();

    Table* t = &root;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) t = &descend(*t, path[k]);
    const std::string& last = path.back();
    if (array) {
      auto it = t->find(last);
      if (it == t->end()) it = t->emplace(last, Value{Array{}}).first;
      if (!it->second.is_array()) error("'" + last + "' is not an array of tables");
      it->second.as_array().push_back(Value{Table{}});
      return &it->second.as_array().back().as_table();
    }
    auto it = t->find(last);
    if (it == t->end()) it = t->emplace(last, Value{Table{}}).first;
    if (!it->second.is_table()) error("'" + last + "' is not a table");
    return &it->second.as_table();
  }

  Table& descend(Table& t, const std::string& key) {
    auto it = t.find(key);
    if (it == t.end()) it = t.emplace(key, Value{Table{}}).first;
    if (it->second.is_table()) return it->second.as_table();
    if (it->second.is_array() && !it->second.as_array().empty() && it->second.as_array().back().is_table())
      return it->second.as_array().back().as_table();
    error("'" + key + "' is not a table");
  }

  std::string parse_string() {
    if (peek() == '\'') {
      // literal string, no escapes
      get();
      std::string out;
      while (true) {
        if (eof() || peek() == '\n') error("unterminated string");
        const char c = get();
        if (c == '\'') return out;
        out.push_back(c);
      }
    }
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') error("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) error("unterminated string");
        const char e = get();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: error(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  Value parse_value() {
    const char c = peek();
    if (c == '"' || c == '\'') return Value{parse_string()};
    if (c == '[') return parse_array();
    if (s_.compare(pos_, 4, "true") == 0 && !bare_char(s_.size() > pos_ + 4 ? s_[pos_ + 4] : ' ')) {
      pos_ += 4;
      return Value{true};
    }
    if (s_.compare(pos_, 5, "false") == 0 && !bare_char(s_.size() > pos_ + 5 ? s_[pos_ + 5] : ' ')) {
      pos_ += 5;
      return Value{false};
    }
    return parse_number();
  }

  Value parse_array() {
    expect('[');
    Array arr;
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        get();
        break;
      }
      arr.push_back(parse_value());
      if (arr.back().is_table() || arr.back().is_array()) error("nested arrays are not supported");
      skip_ws_comments_newlines();
      if (peek() == ',') {
        get();
      } else if (peek() != ']') {
        error("expected ',' or ']' in array");
      }
    }
    return Value{std::move(arr)};
  }

  Value parse_number() {
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' || peek() == '.' || peek() == '_'))
      tok.push_back(get());
    if (tok.empty()) error("expected a value");
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean.push_back(ch);
    const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "nan";
    try {
      std::size_t used = 0;
      if (is_float) {
        const double d = std::stod(clean, &used);
        if (used == clean.size()) return Value{d};
      } else {
        const long long i = std::stoll(clean, &used, 10);
        if (used == clean.size()) return Value{static_cast<std::int64_t>(i)};
      }
    } catch (const std::exception&) {
    }
    error("invalid value '" + tok + "'");
  }

  std::string s_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace detail

inline Table parse(const std::string& text, const std::string& source = "<string>") {
  return detail::Parser(text, source).parse_document();
}

inline Table parse(std::istream& in, const std::string& source) {
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), source);
}

// A scalar or array in TOML syntax; anything else is taken as a bare string.
inline Value parse_override_value(const std::string& text) {
  try {
    return detail::Parser(text, "--set").parse_single_value();
  } catch (const Error&) {
    return Value{text};
  }
}

// Sets a dotted path such as "terminals.count" or "shells.0.planes".
inline void set_path(Table& root, const std::string& path, Value value) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts)
    if (p.empty()) fail(ErrorKind::InvalidArgument, "bad override key '" + path + "'");

  Table* t = &root;
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    auto it = t->find(parts[k]);
    if (it == t->end()) it = t->emplace(parts[k], Value{Table{}}).first;
    if (it->second.is_table()) {
      t = &it->second.as_table();
      continue;
    }
    if (it->second.is_array() && k + 2 < parts.size() + 1) {
      auto& arr = it->second.as_array();
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[k + 1]);
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidArgument, "override '" + path + "': expected an index after '" + parts[k] + "'");
      }
      if (idx >= arr.size() || !arr[idx].is_table()) fail(ErrorKind::InvalidArgument, "override '" + path + "': index out of range");
      t = &arr[idx].as_table();
      ++k;
      if (k + 1 >= parts.size()) fail(ErrorKind::InvalidArgument, "override '" + path + "': missing field name");
      continue;
    }
    fail(ErrorKind::InvalidArgument, "override '" + path + "': '" + parts[k] + "' is not a table");
  }
  (*t)[parts.back()] = std::move(value);
}

}  // namespace bierstar::toml
