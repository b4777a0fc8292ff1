#include "voi/sample_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "voi/errors.hpp"

namespace voi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string utility_column(std::size_t decision) { return "u_a" + std::to_string(decision + 1); }

bool SampleTable::has(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t SampleTable::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw SchemaError("sample table has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> SampleTable::column(std::string_view name) const {
  return columns_[index_of(name)];
}

void SampleTable::add_column(std::string name, std::vector<double> values) {
  if (has(name)) throw SchemaError("duplicate column '" + name + "'");
  if (names_.empty()) {
    rows_ = values.size();
  } else if (values.size() != rows_) {
    throw SchemaError("column '" + name + "' has " + std::to_string(values.size()) +
                      " rows, expected " + std::to_string(rows_));
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

void SampleTable::set_column(std::string name, std::vector<double> values) {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    add_column(std::move(name), std::move(values));
    return;
  }
  if (values.size() != rows_) throw SchemaError("column '" + name + "' has the wrong row count");
  columns_[static_cast<std::size_t>(it - names_.begin())] = std::move(values);
}

std::size_t SampleTable::decision_count() const noexcept {
  std::size_t k = 0;
  while (has(utility_column(k))) ++k;
  return k;
}

std::span<const double> SampleTable::utility(std::size_t decision) const {
  return column(utility_column(decision));
}

void SampleTable::write_csv(std::ostream& out) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (j) out << ',';
    out << names_[j];
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (j) out << ',';
      // Shortest representation that round-trips exactly.
      const auto res = std::to_chars(buf, buf + sizeof buf, columns_[j][i]);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

SampleTable SampleTable::read_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      for (auto f : split_commas(line)) header.emplace_back(f);
      break;
    }
  }
  if (header.empty()) throw SchemaError("CSV input is empty");
  // Strip a UTF-8 byte order mark.
  if (header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0) header[0].erase(0, 3);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) throw SchemaError("CSV header: column " + std::to_string(j + 1) + " has no name");
  }

  std::vector<std::vector<double>> cols(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw SchemaError("CSV row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      const auto f = fields[j];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw SchemaError("CSV row " + std::to_string(row) + ", column " + std::to_string(j + 1) + " ('" +
                          header[j] + "'): not a finite number: '" + std::string(f) + "'");
      }
      cols[j].push_back(v);
    }
  }
  if (row == 0) throw SchemaError("CSV input has a header but no data rows");

  SampleTable t;
  for (std::size_t j = 0; j < header.size(); ++j) t.add_column(header[j], std::move(cols[j]));
  return t;
}

SampleTable SampleTable::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open sample file '" + path + "'");
  try {
    return read_csv(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace voi
