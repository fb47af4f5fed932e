#include "tabgraph/text.hpp"

#include <cctype>
#include <cstdlib>

namespace tabgraph {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::string casefold(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string normalize_cell(const std::string& s) { return casefold(trim(s)); }

std::vector<std::string> tokenize(const std::string& text) {
  const std::string s = casefold(text);
  std::vector<std::string> tokens;
  std::string cur;
  bool cur_numeric = false;
  auto flush = [&]() {
    if (!cur.empty()) tokens.push_back(cur);
    cur.clear();
    cur_numeric = false;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (is_alnum(c)) {
      if (cur.empty()) cur_numeric = is_digit(c);
      else if (!is_digit(c)) cur_numeric = false;
      cur.push_back(static_cast<char>(c));
    } else if ((c == '.' || c == ',') && cur_numeric && i + 1 < s.size() &&
               is_digit(static_cast<unsigned char>(s[i + 1]))) {
      cur.push_back(static_cast<char>(c));  // keep "3.5" / "1,000" whole
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_numeric_cell(const std::string& s) {
  std::string stripped;
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == '$' || c == '#' || c == '%' || c == ',' || is_space(c)) continue;
    // common multi-byte currency marks
    if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x82) {
      i += 2;  // euro sign
      continue;
    }
    if (c == 0xC2 && i + 1 < s.size()) {
      unsigned char n = static_cast<unsigned char>(s[i + 1]);
      if (n == 0xA3 || n == 0xA5) {  // pound / yen
        ++i;
        continue;
      }
    }
    stripped.push_back(static_cast<char>(c));
  }
  if (stripped.empty()) return false;
  const char* begin = stripped.c_str();
  char* end = nullptr;
  std::strtod(begin, &end);
  return end == begin + stripped.size();
}

}  // namespace tabgraph
