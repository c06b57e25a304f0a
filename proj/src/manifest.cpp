#include "scakit/manifest.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "scakit/errors.hpp"
#include "scakit/rng.hpp"

namespace scakit {

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  const std::uint64_t h = fnv1a64(bytes);
  char out[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) out[i] = hex[(h >> (60 - 4 * i)) & 0xF];
  out[16] = '\0';
  return std::string(out);
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["command"] = m.command;
  j["params"] = m.params;
  j["seed"] = m.seed;
  j["inputs"] = m.input_digests;
  j["outputs"] = m.output_paths;
  j["wall_time_s"] = m.wall_time_s;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

struct TomlCursor {
  const std::string& text;
  const std::string& origin;
  std::size_t pos = 0;
  long line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
  }
};

void skip_ws(TomlCursor& c, bool cross_lines) {
  while (c.pos < c.text.size()) {
    const char ch = c.text[c.pos];
    if (ch == '#') {
      while (c.pos < c.text.size() && c.text[c.pos] != '\n') ++c.pos;
    } else if (ch == '\n') {
      if (!cross_lines) return;
      ++c.line;
      ++c.pos;
    } else if (ch == ' ' || ch == '\t' || ch == '\r') {
      ++c.pos;
    } else {
      return;
    }
  }
}

bool bare_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
}

std::string parse_key(TomlCursor& c) {
  std::string key;
  while (c.pos < c.text.size() && bare_char(c.text[c.pos])) key += c.text[c.pos++];
  if (key.empty()) c.fail("expected a key");
  return key;
}

std::string parse_string(TomlCursor& c) {
  ++c.pos;  // opening quote
  std::string out;
  while (c.pos < c.text.size()) {
    char ch = c.text[c.pos++];
    if (ch == '"') return out;
    if (ch == '\n') c.fail("unterminated string");
    if (ch == '\\') {
      if (c.pos >= c.text.size()) c.fail("dangling escape");
      const char esc = c.text[c.pos++];
      switch (esc) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: c.fail(std::string("unsupported escape \\") + esc);
      }
    } else {
      out += ch;
    }
  }
  c.fail("unterminated string");
}

nlohmann::json parse_value(TomlCursor& c);

nlohmann::json parse_array(TomlCursor& c) {
  ++c.pos;  // '['
  nlohmann::json arr = nlohmann::json::array();
  skip_ws(c, true);
  if (c.pos < c.text.size() && c.text[c.pos] == ']') {
    ++c.pos;
    return arr;
  }
  while (true) {
    skip_ws(c, true);
    arr.push_back(parse_value(c));
    skip_ws(c, true);
    if (c.pos >= c.text.size()) c.fail("unterminated array");
    const char ch = c.text[c.pos];
    if (ch == ',') {
      ++c.pos;
      skip_ws(c, true);
      if (c.pos < c.text.size() && c.text[c.pos] == ']') {
        ++c.pos;
        return arr;
      }
      continue;
    }
    if (ch == ']') {
      ++c.pos;
      return arr;
    }
    c.fail("expected ',' or ']' in array");
  }
}

nlohmann::json parse_value(TomlCursor& c) {
  if (c.pos >= c.text.size()) c.fail("expected a value");
  const char ch = c.text[c.pos];
  if (ch == '"') return parse_string(c);
  if (ch == '[') return parse_array(c);
  if (c.text.compare(c.pos, 4, "true") == 0 && (c.pos + 4 >= c.text.size() || !bare_char(c.text[c.pos + 4]))) {
    c.pos += 4;
    return true;
  }
  if (c.text.compare(c.pos, 5, "false") == 0 && (c.pos + 5 >= c.text.size() || !bare_char(c.text[c.pos + 5]))) {
    c.pos += 5;
    return false;
  }

  // number: longest run of number-ish chars, then integer-first parse
  std::size_t end = c.pos;
  while (end < c.text.size() && (std::isdigit(static_cast<unsigned char>(c.text[end])) ||
                                 c.text[end] == '+' || c.text[end] == '-' || c.text[end] == '.' ||
                                 c.text[end] == 'e' || c.text[end] == 'E')) {
    ++end;
  }
  if (end == c.pos) c.fail(std::string("unexpected character '") + ch + "'");
  const char* first = c.text.data() + c.pos;
  const char* last = c.text.data() + end;

  long long ival = 0;
  auto ir = std::from_chars(first, last, ival);
  if (ir.ec == std::errc() && ir.ptr == last) {
    c.pos = end;
    return ival;
  }
  double dval = 0.0;
  auto dr = std::from_chars(first, last, dval);
  if (dr.ec == std::errc() && dr.ptr == last) {
    c.pos = end;
    return dval;
  }
  c.fail("malformed number '" + std::string(first, last) + "'");
}

}  // namespace

nlohmann::json parse_toml(const std::string& text, const std::string& origin) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  TomlCursor c{text, origin};

  while (true) {
    skip_ws(c, true);
    if (c.pos >= c.text.size()) break;

    if (c.text[c.pos] == '[') {
      ++c.pos;
      section = &root;
      while (true) {
        const std::string part = parse_key(c);
        section = &(*section)[part];
        if (c.pos < c.text.size() && c.text[c.pos] == '.') {
          ++c.pos;
          continue;
        }
        break;
      }
      if (c.pos >= c.text.size() || c.text[c.pos] != ']') c.fail("expected ']' after section name");
      ++c.pos;
      if (!section->is_object()) {
        if (section->is_null())
          *section = nlohmann::json::object();
        else
          c.fail("section name collides with an existing key");
      }
      continue;
    }

    const std::string key = parse_key(c);
    skip_ws(c, false);
    if (c.pos >= c.text.size() || c.text[c.pos] != '=') c.fail("expected '=' after key '" + key + "'");
    ++c.pos;
    skip_ws(c, false);
    (*section)[key] = parse_value(c);
    skip_ws(c, false);
    if (c.pos < c.text.size() && c.text[c.pos] != '\n')
      c.fail("trailing characters after value for key '" + key + "'");
  }
  return root;
}

nlohmann::json parse_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str(), path.string());
}

}  // namespace scakit
