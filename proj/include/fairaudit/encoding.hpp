/*
 * Copyright 2026 The fairaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FAIRAUDIT_ENCODING_HPP_
#define FAIRAUDIT_ENCODING_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/schema.hpp"

namespace fairaudit {

// Provenance of one one-hot indicator column.
struct IndicatorColumn {
  std::uint32_t variable = 0;
  int code = 0;
  bool operator==(const IndicatorColumn&) const = default;
};

// Dictionary mapping (variable, category) pairs to indicator columns. Columns
// of one variable are contiguous and ordered by category code.
class Encoding {
 public:
  Encoding(std::vector<std::string> variables, std::vector<IndicatorColumn> columns);
  static std::shared_ptr<const Encoding> FromSchema(const Codebook& schema);

  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<IndicatorColumn>& columns() const { return columns_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_columns() const { return columns_.size(); }
  std::size_t begin_of(std::size_t variable) const { return offsets_[variable]; }
  std::size_t end_of(std::size_t variable) const { return offsets_[variable + 1]; }
  std::optional<std::uint32_t> ColumnOf(std::size_t variable, int code) const;

  bool operator==(const Encoding& other) const {
    return variables_ == other.variables_ && columns_ == other.columns_;
  }

 private:
  std::vector<std::string> variables_;
  std::vector<IndicatorColumn> columns_;
  std::vector<std::size_t> offsets_;
};

using EncodingPtr = std::shared_ptr<const Encoding>;

// One-hot view of a CodedTable. Since every row has exactly one active
// indicator per source variable, only the active column index is stored.
class EncodedMatrix {
 public:
  EncodedMatrix() = default;
  // Encodes `table` with `encoding`; variables are matched by name, so the
  // table may carry extra columns. Throws DataError on unknown codes or
  // missing variables.
  EncodedMatrix(EncodingPtr encoding, const CodedTable& table);
  // Encoding derived from the table's own schema.
  explicit EncodedMatrix(const CodedTable& table);

  const EncodingPtr& encoding_ptr() const { return encoding_; }
  const Encoding& encoding() const { return *encoding_; }
  std::size_t rows() const { return rows_; }
  std::size_t num_variables() const { return encoding_ ? encoding_->num_variables() : 0; }
  std::uint32_t active(std::size_t row, std::size_t variable) const {
    return active_[row * num_variables() + variable];
  }
  bool Indicator(std::size_t row, std::uint32_t column) const {
    return active(row, encoding_->columns()[column].variable) == column;
  }
  EncodedMatrix SelectRows(std::span<const std::size_t> rows) const;

 private:
  EncodingPtr encoding_;
  std::size_t rows_ = 0;
  std::vector<std::uint32_t> active_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_ENCODING_HPP_
