#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slmsim {

enum class TableFormat { Dat, Csv };

/// Rectangular numeric table with named columns and a provenance note
/// (scenario hash + seed). Formatting is deterministic: identical content
/// writes byte-identical files.
class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string note) { provenance_ = std::move(note); }

  void add_row(std::vector<double> row);
  size_t row_count() const { return rows_.size(); }
  double at(size_t row, size_t col) const { return rows_[row][col]; }
  int column_index(const std::string& name) const;  // -1 if absent

  /// Copy of selected columns (by name), preserving row order and provenance.
  ResultTable select(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  std::string provenance_;
};

/// `dat`: one header line `# col1 col2 ... | provenance`, then
/// whitespace-separated columns, 10 significant digits. `csv`: RFC-style
/// comma separation with quoting, same digits, provenance in the header cell
/// comment column.
void write_table(const ResultTable& t, const std::string& path, TableFormat format);
void write_table(const ResultTable& t, std::ostream& os, TableFormat format);

/// Reads numeric rows back from either format (header skipped).
ResultTable read_table(const std::string& path);

/// 10-significant-digit decimal formatting used across all table output.
std::string format_double(double v);

}  // namespace slmsim
