#include "slmsim/table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slmsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns_.size())
    throw std::invalid_argument("row width does not match column count");
  rows_.push_back(std::move(row));
}

int ResultTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return static_cast<int>(i);
  return -1;
}

ResultTable ResultTable::select(const std::vector<std::string>& names) const {
  std::vector<int> idx;
  for (const auto& n : names) {
    int i = column_index(n);
    if (i < 0) throw std::invalid_argument("no such column: " + n);
    idx.push_back(i);
  }
  ResultTable out(names);
  out.set_provenance(provenance_);
  for (const auto& row : rows_) {
    std::vector<double> r;
    r.reserve(idx.size());
    for (int i : idx) r.push_back(row[i]);
    out.add_row(std::move(r));
  }
  return out;
}

namespace {

// RFC 4180-style quoting: wrap fields containing comma/quote/newline,
// doubling embedded quotes.
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_table(const ResultTable& t, std::ostream& os, TableFormat format) {
  if (format == TableFormat::Dat) {
    os << "#";
    for (const auto& c : t.columns()) os << " " << c;
    if (!t.provenance().empty()) os << " | " << t.provenance();
    os << "\n";
    for (const auto& row : t.rows()) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) os << ' ';
        os << format_double(row[i]);
      }
      os << '\n';
    }
  } else {
    for (size_t i = 0; i < t.columns().size(); ++i) {
      if (i) os << ',';
      os << csv_quote(t.columns()[i]);
    }
    if (!t.provenance().empty()) os << ',' << csv_quote(t.provenance());
    os << "\n";
    for (const auto& row : t.rows()) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        os << format_double(row[i]);
      }
      os << '\n';
    }
  }
}

void write_table(const ResultTable& t, const std::string& path, TableFormat format) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_table(t, os, format);
}

ResultTable read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  size_t width = 0;
  bool first = true;
  while (std::getline(is, line)) {
    if (first) {
      first = false;
      continue;  // header
    }
    if (line.empty()) continue;
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (width == 0) width = row.size();
    if (row.size() != width) throw std::runtime_error("ragged table: " + path);
    rows.push_back(std::move(row));
  }
  std::vector<std::string> cols(width);
  for (size_t i = 0; i < width; ++i) cols[i] = "c" + std::to_string(i);
  ResultTable t(cols);
  for (auto& r : rows) t.add_row(std::move(r));
  return t;
}

}  // namespace slmsim
