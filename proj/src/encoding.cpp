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

#include "fairaudit/encoding.hpp"

#include <algorithm>
#include <set>

namespace fairaudit {

Encoding::Encoding(std::vector<std::string> variables, std::vector<IndicatorColumn> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
  offsets_.assign(variables_.size() + 1, 0);
  std::size_t col = 0;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    offsets_[v] = col;
    while (col < columns_.size() && columns_[col].variable == v) {
      if (col > offsets_[v] && columns_[col - 1].code >= columns_[col].code)
        throw InvalidArgument("encoding codes must be strictly ascending within a variable");
      ++col;
    }
  }
  offsets_[variables_.size()] = col;
  if (col != columns_.size())
    throw InvalidArgument("encoding columns must be grouped by variable in order");
}

std::shared_ptr<const Encoding> Encoding::FromSchema(const Codebook& schema) {
  std::vector<std::string> names;
  std::vector<IndicatorColumn> cols;
  for (std::size_t v = 0; v < schema.size(); ++v) {
    const VariableSpec& spec = schema.at(v);
    names.push_back(spec.name);
    // Unfolded missing codes still need a column so that every row has one
    // active indicator.
    std::set<int> codes(spec.missing_codes);
    for (const auto& [code, label] : spec.categories) codes.insert(code);
    for (int code : codes) cols.push_back({static_cast<std::uint32_t>(v), code});
  }
  return std::make_shared<const Encoding>(std::move(names), std::move(cols));
}

std::optional<std::uint32_t> Encoding::ColumnOf(std::size_t variable, int code) const {
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[variable]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[variable + 1]);
  auto it = std::lower_bound(first, last, code,
                             [](const IndicatorColumn& c, int x) { return c.code < x; });
  if (it == last || it->code != code) return std::nullopt;
  return static_cast<std::uint32_t>(it - columns_.begin());
}

EncodedMatrix::EncodedMatrix(EncodingPtr encoding, const CodedTable& table)
    : encoding_(std::move(encoding)), rows_(table.rows()) {
  const std::size_t nv = encoding_->num_variables();
  active_.assign(rows_ * nv, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    const std::string& name = encoding_->variables()[v];
    auto idx = table.schema().IndexOf(name);
    if (!idx) throw DataError("column mismatch: table has no variable '" + name + "'");
    const auto col = table.column(*idx);
    for (std::size_t r = 0; r < rows_; ++r) {
      auto found = encoding_->ColumnOf(v, col[r]);
      if (!found)
        throw DataError("column mismatch: variable '" + name + "' row " + std::to_string(r + 1) +
                        " has code " + std::to_string(col[r]) + " unknown to the encoding");
      active_[r * nv + v] = *found;
    }
  }
}

EncodedMatrix::EncodedMatrix(const CodedTable& table)
    : EncodedMatrix(Encoding::FromSchema(table.schema()), table) {}

EncodedMatrix EncodedMatrix::SelectRows(std::span<const std::size_t> rows) const {
  EncodedMatrix out;
  out.encoding_ = encoding_;
  out.rows_ = rows.size();
  const std::size_t nv = num_variables();
  out.active_.resize(rows.size() * nv);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(active_.begin() + static_cast<std::ptrdiff_t>(rows[i] * nv), nv,
                out.active_.begin() + static_cast<std::ptrdiff_t>(i * nv));
  }
  return out;
}

}  // namespace fairaudit
