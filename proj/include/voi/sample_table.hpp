#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voi {

/// Column-oriented table of Monte Carlo samples.
///
/// Naming conventions: factor columns carry the factor name, per-decision
/// utility columns are "u_a<k>" (k = 1..n_a), outcome columns are "y" or
/// "y_a<k>".
class SampleTable {
 public:
  SampleTable() = default;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool has(std::string_view name) const noexcept;
  std::size_t index_of(std::string_view name) const;  // SchemaError if absent
  std::span<const double> column(std::string_view name) const;
  std::span<const double> column(std::size_t index) const { return columns_.at(index); }

  /// Appends a column; the first column fixes the row count.
  void add_column(std::string name, std::vector<double> values);
  /// Replaces an existing column or appends a new one.
  void set_column(std::string name, std::vector<double> values);

  /// Number of consecutive "u_a1", "u_a2", ... columns present.
  std::size_t decision_count() const noexcept;
  std::span<const double> utility(std::size_t decision) const;  // 0-based decision

  /// True when utilities are conditional expectations over the aleatory
  /// factors (the epistemic-only model).
  bool aleatory_reduced() const noexcept { return aleatory_reduced_; }
  void set_aleatory_reduced(bool v) noexcept { aleatory_reduced_ = v; }

  void write_csv(std::ostream& out) const;
  /// Parses a header row and numeric rows. Throws SchemaError on an empty
  /// file, ragged rows or non-numeric cells, naming the row and column.
  static SampleTable read_csv(std::istream& in);
  static SampleTable read_csv_file(const std::string& path);

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::size_t rows_ = 0;
  bool aleatory_reduced_ = true;
};

std::string utility_column(std::size_t decision);  // 0-based -> "u_a<k+1>"

}  // namespace voi
