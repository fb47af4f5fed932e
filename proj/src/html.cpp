#include "tabgraph/html.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "tabgraph/errors.hpp"
#include "tabgraph/text.hpp"

namespace tabgraph {

namespace {

// ---------------------------------------------------------------------------
// minimal event tokenizer: start tags, end tags, text

struct Event {
  enum Type { start, end, text } type;
  std::string name;                          // tag name, lowercased
  std::map<std::string, std::string> attrs;  // start tags only
  std::string content;                       // text events only
};

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

std::string decode_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    const std::string ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos" || ent == "#39") out.push_back('\'');
    else if (ent == "nbsp") out.push_back(' ');
    else if (ent.size() > 1 && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (ent[1] == 'x' || ent[1] == 'X') ? std::stoul(ent.substr(2), nullptr, 16)
                                              : std::stoul(ent.substr(1));
      } catch (...) {
        out.push_back('&');
        continue;
      }
      append_utf8(out, cp);
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

std::vector<Event> tokenize_html(const std::string& html) {
  std::vector<Event> events;
  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    if (html[i] != '<') {
      const std::size_t next = html.find('<', i);
      const std::size_t end = next == std::string::npos ? n : next;
      std::string text = decode_entities(html.substr(i, end - i));
      if (!trim(text).empty()) events.push_back({Event::text, {}, {}, std::move(text)});
      i = end;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const std::size_t close = html.find("-->", i + 4);
      i = close == std::string::npos ? n : close + 3;
      continue;
    }
    if (i + 1 < n && html[i + 1] == '!') {  // doctype etc.
      const std::size_t close = html.find('>', i);
      i = close == std::string::npos ? n : close + 1;
      continue;
    }
    std::size_t close = html.find('>', i);
    if (close == std::string::npos) break;
    std::string raw = html.substr(i + 1, close - i - 1);
    i = close + 1;
    bool closing = false;
    if (!raw.empty() && raw[0] == '/') {
      closing = true;
      raw.erase(0, 1);
    }
    bool self_closing = false;
    if (!raw.empty() && raw.back() == '/') {
      self_closing = true;
      raw.pop_back();
    }
    // name
    std::size_t p = 0;
    while (p < raw.size() && !std::isspace(static_cast<unsigned char>(raw[p]))) ++p;
    std::string name = casefold(raw.substr(0, p));
    if (name.empty()) continue;
    Event ev{closing ? Event::end : Event::start, name, {}, {}};
    // attributes
    while (!closing && p < raw.size()) {
      while (p < raw.size() && std::isspace(static_cast<unsigned char>(raw[p]))) ++p;
      std::size_t key_start = p;
      while (p < raw.size() && raw[p] != '=' &&
             !std::isspace(static_cast<unsigned char>(raw[p])))
        ++p;
      if (p == key_start) break;
      std::string key = casefold(raw.substr(key_start, p - key_start));
      std::string value;
      while (p < raw.size() && std::isspace(static_cast<unsigned char>(raw[p]))) ++p;
      if (p < raw.size() && raw[p] == '=') {
        ++p;
        while (p < raw.size() && std::isspace(static_cast<unsigned char>(raw[p]))) ++p;
        if (p < raw.size() && (raw[p] == '"' || raw[p] == '\'')) {
          const char quote = raw[p++];
          const std::size_t vend = raw.find(quote, p);
          value = raw.substr(p, vend == std::string::npos ? std::string::npos : vend - p);
          p = vend == std::string::npos ? raw.size() : vend + 1;
        } else {
          const std::size_t vstart = p;
          while (p < raw.size() && !std::isspace(static_cast<unsigned char>(raw[p]))) ++p;
          value = raw.substr(vstart, p - vstart);
        }
      }
      ev.attrs[key] = value;
    }
    // drop scripts and styles wholesale
    if (!closing && (name == "script" || name == "style")) {
      const std::string terminator = "</" + name;
      std::size_t stop = html.find(terminator, i);
      if (stop == std::string::npos) break;
      stop = html.find('>', stop);
      i = stop == std::string::npos ? n : stop + 1;
      continue;
    }
    events.push_back(std::move(ev));
    if (self_closing) events.push_back({Event::end, name, {}, {}});
  }
  return events;
}

bool is_heading(const std::string& name) {
  return name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
}

// text of the element starting at events[start], tags stripped
std::string element_text(const std::vector<Event>& events, std::size_t start) {
  std::string out;
  int depth = 0;
  for (std::size_t i = start; i < events.size(); ++i) {
    const Event& ev = events[i];
    if (ev.type == Event::start && ev.name == events[start].name) ++depth;
    else if (ev.type == Event::end && ev.name == events[start].name) {
      if (--depth == 0) break;
    } else if (ev.type == Event::text) {
      out += ev.content;
      out.push_back(' ');
    }
  }
  return collapse_whitespace(out);
}

// nearest heading that opens before position `at`
std::string preceding_heading(const std::vector<Event>& events, std::size_t at) {
  for (std::size_t i = at; i-- > 0;) {
    if (events[i].type == Event::start && is_heading(events[i].name))
      return element_text(events, i);
  }
  return {};
}

int span_attr(const std::map<std::string, std::string>& attrs, const char* key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) return 1;
  try {
    const int v = std::stoi(it->second);
    return std::clamp(v, 1, 100);
  } catch (...) {
    return 1;
  }
}

struct GridCell {
  std::string text;
  bool set = false;
  bool header = false;
};

struct RawCell {
  std::string text;
  bool header = false;
  int colspan = 1;
  int rowspan = 1;
};

}  // namespace

SemiTable parse_html_table(const std::string& html) {
  const std::vector<Event> events = tokenize_html(html);
  std::size_t table_at = events.size();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].type == Event::start && events[i].name == "table") {
      table_at = i;
      break;
    }
  }
  if (table_at == events.size()) throw NoTableFound();

  std::string caption;
  std::vector<std::vector<RawCell>> raw_rows;
  std::vector<RawCell>* open_row = nullptr;
  RawCell* open_cell = nullptr;
  std::string cell_buf;
  int nested = 0;  // inside a nested table: keep text, ignore structure

  auto close_cell = [&]() {
    if (open_cell) {
      open_cell->text = collapse_whitespace(cell_buf);
      cell_buf.clear();
      open_cell = nullptr;
    }
  };

  for (std::size_t i = table_at + 1; i < events.size(); ++i) {
    const Event& ev = events[i];
    if (ev.type == Event::start && ev.name == "table") {
      ++nested;
      continue;
    }
    if (ev.type == Event::end && ev.name == "table") {
      if (nested == 0) break;
      --nested;
      continue;
    }
    if (ev.type == Event::text) {
      if (open_cell) {
        cell_buf += ev.content;
        cell_buf.push_back(' ');
      }
      continue;
    }
    if (nested > 0) continue;
    if (ev.type == Event::start) {
      if (ev.name == "caption") {
        caption = element_text(events, i);
      } else if (ev.name == "tr") {
        close_cell();
        raw_rows.emplace_back();
        open_row = &raw_rows.back();
      } else if (ev.name == "th" || ev.name == "td") {
        close_cell();
        if (!open_row) {
          raw_rows.emplace_back();
          open_row = &raw_rows.back();
        }
        open_row->push_back({{},
                             ev.name == "th",
                             span_attr(ev.attrs, "colspan"),
                             span_attr(ev.attrs, "rowspan")});
        open_cell = &open_row->back();
      }
    } else if (ev.type == Event::end && (ev.name == "th" || ev.name == "td")) {
      close_cell();
    } else if (ev.type == Event::end && ev.name == "tr") {
      close_cell();
      open_row = nullptr;
    }
  }
  close_cell();

  // expand spans onto a rectangular grid
  std::vector<std::vector<GridCell>> grid;
  auto ensure = [&grid](std::size_t r, std::size_t c) -> GridCell& {
    if (grid.size() <= r) grid.resize(r + 1);
    if (grid[r].size() <= c) grid[r].resize(c + 1);
    return grid[r][c];
  };
  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    std::size_t c = 0;
    for (const RawCell& cell : raw_rows[r]) {
      while (ensure(r, c).set) ++c;  // skip slots claimed by rowspans above
      for (int dr = 0; dr < cell.rowspan; ++dr)
        for (int dc = 0; dc < cell.colspan; ++dc) {
          GridCell& g = ensure(r + dr, c + dc);
          g.text = cell.text;
          g.set = true;
          g.header = cell.header;
        }
      c += cell.colspan;
    }
  }
  // grid rows created purely by rowspan overhang past the last tr are kept;
  // rows with no set cells are dropped below with the blank rows.

  std::size_t width = 0;
  for (const auto& row : grid) width = std::max(width, row.size());
  if (width == 0) throw EmptyTable();

  std::optional<std::vector<std::string>> header;
  std::vector<std::vector<std::string>> body;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::vector<std::string> texts(width);
    bool all_header = !grid[r].empty();
    bool all_blank = true;
    for (std::size_t c = 0; c < width; ++c) {
      if (c < grid[r].size() && grid[r][c].set) {
        texts[c] = grid[r][c].text;
        if (!grid[r][c].header) all_header = false;
      } else {
        all_header = false;
      }
      if (!trim(texts[c]).empty()) all_blank = false;
    }
    if (all_blank) continue;
    if (r == 0 && all_header && !header.has_value()) {
      header = std::move(texts);
    } else {
      body.push_back(std::move(texts));
    }
  }
  if (body.empty()) throw EmptyTable();

  SemiTable t;
  t.kind = TableKind::table;
  t.caption = !caption.empty() ? caption : preceding_heading(events, table_at);
  t.header = std::move(header);
  t.body = std::move(body);
  t.validate();
  t = transpose_if_vertical(t);
  t.column_roles = classify_columns(t).roles;
  return t;
}

SemiTable parse_html_list(const std::string& html) {
  const std::vector<Event> events = tokenize_html(html);
  std::size_t list_at = events.size();
  std::string list_tag;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].type == Event::start &&
        (events[i].name == "ul" || events[i].name == "ol" || events[i].name == "dl")) {
      list_at = i;
      list_tag = events[i].name;
      break;
    }
  }
  if (list_at == events.size()) throw NoListFound();

  std::vector<std::string> items;
  std::string buf;
  bool in_item = false;

  auto flush = [&]() {
    if (in_item) {
      items.push_back(collapse_whitespace(buf));
      buf.clear();
      in_item = false;
    }
  };

  if (list_tag == "dl") {
    // pair each term with its descriptions
    std::string term;
    std::vector<std::string> descs;
    bool in_term = false, in_desc = false, have_term = false;
    auto flush_entry = [&]() {
      if (!have_term && descs.empty()) return;
      std::string item = term;
      if (!descs.empty()) {
        std::string joined = descs.front();
        for (std::size_t k = 1; k < descs.size(); ++k) joined += "; " + descs[k];
        item = item.empty() ? joined : item + ": " + joined;
      }
      items.push_back(item);
      term.clear();
      descs.clear();
      have_term = false;
    };
    int depth = 0;
    for (std::size_t i = list_at + 1; i < events.size(); ++i) {
      const Event& ev = events[i];
      if (ev.type == Event::start && ev.name == "dl") ++depth;
      else if (ev.type == Event::end && ev.name == "dl") {
        if (depth == 0) break;
        --depth;
      } else if (ev.type == Event::start && ev.name == "dt") {
        if (have_term || !descs.empty()) flush_entry();
        in_term = true;
        in_desc = false;
        have_term = true;
        term.clear();
      } else if (ev.type == Event::start && ev.name == "dd") {
        in_desc = true;
        in_term = false;
        descs.emplace_back();
      } else if (ev.type == Event::end && (ev.name == "dt" || ev.name == "dd")) {
        in_term = in_desc = false;
      } else if (ev.type == Event::text) {
        if (in_term) term += (term.empty() ? "" : " ") + collapse_whitespace(ev.content);
        else if (in_desc && !descs.empty()) {
          std::string& d = descs.back();
          d += (d.empty() ? "" : " ") + collapse_whitespace(ev.content);
        }
      }
    }
    flush_entry();
  } else {
    int depth = 0;
    for (std::size_t i = list_at + 1; i < events.size(); ++i) {
      const Event& ev = events[i];
      if (ev.type == Event::start && (ev.name == "ul" || ev.name == "ol")) {
        flush();  // nested list: children follow their parent, depth-first
        ++depth;
      } else if (ev.type == Event::end && (ev.name == "ul" || ev.name == "ol")) {
        flush();
        if (depth == 0) break;
        --depth;
      } else if (ev.type == Event::start && ev.name == "li") {
        flush();
        in_item = true;
      } else if (ev.type == Event::end && ev.name == "li") {
        flush();
      } else if (ev.type == Event::text && in_item) {
        buf += ev.content;
        buf.push_back(' ');
      }
    }
    flush();
  }

  SemiTable t;
  t.kind = TableKind::list;
  t.caption = preceding_heading(events, list_at);
  for (auto& item : items) {
    if (trim(item).empty()) continue;
    t.body.push_back({std::move(item)});
  }
  if (t.body.empty()) throw EmptyList();
  t.validate();
  return t;
}

}  // namespace tabgraph
