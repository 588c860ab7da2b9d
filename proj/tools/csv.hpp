#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

// Numeric CSV tables: RFC-4180 framing (header row, comma separators, CRLF
// line ends), doubles serialized with 17 significant digits so that
// read(write(x)) == x for every payload.
struct Table {
  std::vector<std::string> header;
  std::vector<double> values;  // row-major
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Table make_table(std::vector<std::string> header, const double* values,
                        std::size_t rows, std::size_t cols) {
  Table t;
  t.header = std::move(header);
  t.rows = rows;
  t.cols = cols;
  t.values.assign(values, values + rows * cols);
  return t;
}

inline std::vector<std::string> real_headers(const std::string& stem,
                                             int first, std::size_t count) {
  std::vector<std::string> h;
  h.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    h.push_back(stem + std::to_string(first + static_cast<int>(i)));
  return h;
}

inline std::vector<std::string> complex_headers(const std::string& stem,
                                                int first, std::size_t count) {
  std::vector<std::string> h;
  h.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = stem + std::to_string(first + static_cast<int>(i));
    h.push_back(name + "_re");
    h.push_back(name + "_im");
  }
  return h;
}

// Validates the <name>_re,<name>_im column pairing of a complex table and
// returns the complex column count. The row-major values of such a table are
// already the interleaved re/im buffer the library expects.
inline std::size_t complex_cols(const Table& t, const std::string& path) {
  if (t.cols == 0 || t.cols % 2 != 0)
    throw IoError(path + ": complex tables need an even column count");
  for (std::size_t c = 0; c + 1 < t.cols; c += 2) {
    const std::string& a = t.header[c];
    const std::string& b = t.header[c + 1];
    const bool paired = a.size() > 3 && b.size() > 3 &&
                        a.compare(a.size() - 3, 3, "_re") == 0 &&
                        b.compare(b.size() - 3, 3, "_im") == 0 &&
                        a.compare(0, a.size() - 3,
                                  b.substr(0, b.size() - 3)) == 0;
    if (!paired)
      throw IoError(path + ": columns " + a + "," + b +
                    " are not a <name>_re,<name>_im pair");
  }
  return t.cols / 2;
}

inline void write_table(const std::string& path, const Table& t) {
  if (t.header.size() != t.cols || t.values.size() != t.rows * t.cols)
    throw IoError("inconsistent table shape for " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string line;
  for (std::size_t c = 0; c < t.cols; ++c) {
    if (c > 0) line += ',';
    line += t.header[c];
  }
  line += "\r\n";
  out << line;
  for (std::size_t r = 0; r < t.rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < t.cols; ++c) {
      if (c > 0) line += ',';
      line += format_double(t.at(r, c));
    }
    line += "\r\n";
    out << line;
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw IoError(path + " is empty");
  return lines;
}

inline double parse_double(const std::string& field, const std::string& path) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError(path + ": not a number: '" + field + "'");
  return v;
}

inline Table read_table(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  Table t;
  t.header = split_fields(lines[0]);
  t.cols = t.header.size();
  t.rows = lines.size() - 1;
  t.values.reserve(t.rows * t.cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_fields(lines[r]);
    if (fields.size() != t.cols)
      throw IoError(path + ": row " + std::to_string(r) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(t.cols));
    for (const std::string& f : fields) t.values.push_back(parse_double(f, path));
  }
  return t;
}

inline void write_labels(const std::string& path,
                         const std::vector<std::int32_t>& labels,
                         const std::string& header = "label") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << header << "\r\n";
  for (std::int32_t v : labels) out << v << "\r\n";
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<std::int32_t> read_labels(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<std::int32_t> labels;
  labels.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const char* begin = lines[r].c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
      throw IoError(path + ": not an integer label: '" + lines[r] + "'");
    labels.push_back(static_cast<std::int32_t>(v));
  }
  return labels;
}

}  // namespace cli
