#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "otqq/io.hpp"

namespace otqq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct Record {
  std::vector<std::string> fields;
  std::size_t line;
  bool blank;
};

std::vector<Record> split_records(std::string_view text, char delim) {
  std::vector<Record> out;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    Record rec{{}, line, false};
    std::string field;
    bool any = false;
    for (;;) {
      if (i < n && text[i] == '"') {
        const std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= n) throw ParseError(open_line, rec.fields.size() + 1, "unterminated quoted field");
          const char c = text[i++];
          if (c == '"') {
            if (i < n && text[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        any = true;
        // Text after the closing quote up to the delimiter is kept verbatim.
        while (i < n && text[i] != delim && text[i] != '\n' && text[i] != '\r') field.push_back(text[i++]);
      } else {
        while (i < n && text[i] != delim && text[i] != '\n' && text[i] != '\r') {
          field.push_back(text[i++]);
          any = true;
        }
      }
      rec.fields.push_back(std::move(field));
      field.clear();
      if (i < n && text[i] == delim) {
        ++i;
        any = true;
        continue;
      }
      break;
    }
    if (i < n && text[i] == '\r') ++i;
    if (i < n && text[i] == '\n') {
      ++i;
      ++line;
    }
    rec.blank = !any;
    if (!rec.blank) out.push_back(std::move(rec));
  }
  return out;
}

bool looks_like_header(const std::vector<Record>& recs) {
  if (recs.empty()) return false;
  const auto& first = recs[0].fields;
  if (recs.size() == 1)
    return std::none_of(first.begin(), first.end(), [](const std::string& c) { return parse_number(c).has_value(); });
  const auto& second = recs[1].fields;
  for (std::size_t k = 0; k < first.size() && k < second.size(); ++k) {
    if (!parse_number(first[k]) && parse_number(second[k])) return true;
  }
  return false;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path);
  return ss.str();
}

bool has_suffix_ci(const std::string& s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t k = 0; k < suffix.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + k])) != suffix[k]) return false;
  }
  return true;
}

// Splits an ARFF file into attribute names and the text of its @data section.
std::pair<std::vector<std::string>, std::string> split_arff(const std::string& text, std::size_t& data_line) {
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    std::string lower(t.substr(0, std::min<std::size_t>(t.size(), 10)));
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.rfind("@attribute", 0) == 0) {
      std::string_view rest = trim(t.substr(10));
      std::string name;
      if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
        const char q = rest.front();
        const auto close = rest.find(q, 1);
        if (close == std::string_view::npos) throw ParseError(lineno, 1, "unterminated attribute name");
        name = std::string(rest.substr(1, close - 1));
      } else {
        const auto sp = rest.find_first_of(" \t");
        name = std::string(rest.substr(0, sp));
      }
      names.push_back(std::move(name));
    } else if (lower.rfind("@data", 0) == 0) {
      data_line = lineno + 1;
      std::ostringstream rest;
      rest << in.rdbuf();
      return {names, rest.str()};
    }
  }
  throw ParseError(lineno, 1, "ARFF file has no @data section");
}

std::size_t resolve(const ColumnRef& ref, const std::vector<std::string>& header, std::size_t width) {
  if (const auto* idx = std::get_if<std::size_t>(&ref)) {
    if (*idx >= width) throw InvalidArgument("column index " + std::to_string(*idx) + " out of range");
    return *idx;
  }
  const auto& name = std::get<std::string>(ref);
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

CsvTable parse_csv(std::string_view text, char delimiter, HeaderMode header) {
  std::vector<Record> recs = split_records(text, delimiter);
  CsvTable t;
  if (recs.empty()) return t;
  const std::size_t width = recs[0].fields.size();
  for (const auto& r : recs)
    if (r.fields.size() != width) throw RaggedRows(r.line);
  bool has_header = header == HeaderMode::Present || (header == HeaderMode::Auto && looks_like_header(recs));
  std::size_t start = 0;
  if (has_header) {
    for (const auto& f : recs[0].fields) t.header.emplace_back(trim(f));
    start = 1;
  }
  for (std::size_t r = start; r < recs.size(); ++r) {
    t.rows.push_back(std::move(recs[r].fields));
    t.line_of_row.push_back(recs[r].line);
  }
  return t;
}

PointCloud load_csv(const std::string& path, const CsvOptions& options) {
  const std::string text = read_file(path);
  CsvTable table;
  std::size_t line_offset = 0;
  if (has_suffix_ci(path, ".arff")) {
    std::size_t data_line = 1;
    auto [names, body] = split_arff(text, data_line);
    table = parse_csv(body, options.delimiter, HeaderMode::Absent);
    if (!table.rows.empty() && names.size() != table.rows[0].size())
      throw RaggedRows(data_line);
    table.header = std::move(names);
    line_offset = data_line - 1;
  } else {
    table = parse_csv(text, options.delimiter, options.header);
  }
  if (table.rows.empty()) throw InsufficientData(path + " contains no data rows");
  const std::size_t width = table.rows[0].size();

  std::vector<std::size_t> cols;
  for (const auto& c : options.columns) cols.push_back(resolve(c, table.header, width));
  if (cols.empty())
    for (std::size_t k = 0; k < width; ++k) cols.push_back(k);
  std::optional<std::size_t> filter;
  if (options.filter_column) filter = resolve(*options.filter_column, table.header, width);

  std::vector<double> coords;
  std::size_t n = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (filter && trim(row[*filter]) != options.filter_value) continue;
    for (std::size_t c : cols) {
      const auto v = parse_number(row[c]);
      if (!v) throw ParseError(table.line_of_row[r] + line_offset, c + 1, "non-numeric value '" + row[c] + "'");
      coords.push_back(*v);
    }
    ++n;
  }
  if (n == 0) throw InsufficientData(path + ": no rows match the filter");
  std::vector<std::string> names;
  if (!table.header.empty())
    for (std::size_t c : cols) names.push_back(table.header[c]);
  return PointCloud(n, cols.size(), std::move(coords), std::move(names));
}

PointCloud load_csv(const std::string& path, bool has_header, char delimiter) {
  CsvOptions o;
  o.header = has_header ? HeaderMode::Present : HeaderMode::Absent;
  o.delimiter = delimiter;
  return load_csv(path, o);
}

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string plot_set_csv(const PlotSet& set) {
  std::string out = "x,y\n";
  for (const auto& p : set.pairs) {
    out += format_double(p.x);
    out += ',';
    out += format_double(p.y);
    out += '\n';
  }
  return out;
}

}  // namespace otqq
