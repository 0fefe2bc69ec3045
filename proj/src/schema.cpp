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

#include "fairaudit/schema.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fairaudit {
namespace {

using nlohmann::json;

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::kFeature, "feature"},
    {Role::kProtected, "protected"},
    {Role::kTargetSource, "target-source"},
    {Role::kCohortSelector, "cohort-selector"},
    {Role::kIdDrop, "id-drop"},
};

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t LineOfOffset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

std::optional<int> ParseInt(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

int CodeKey(const std::string& key, const std::string& context) {
  auto v = ParseInt(key);
  if (!v) throw DataError(context + ": category code '" + key + "' is not an integer");
  return *v;
}

VariableSpec ParseVariable(const json& node, std::size_t index,
                           const std::string& source) {
  const std::string ctx = source + ": variables[" + std::to_string(index) + "]";
  if (!node.is_object()) throw DataError(ctx + ": expected an object");
  VariableSpec spec;
  if (!node.contains("name") || !node["name"].is_string())
    throw DataError(ctx + ": missing string field 'name'");
  spec.name = node["name"].get<std::string>();
  const std::string vctx = ctx + " (" + spec.name + ")";
  spec.display_name = node.value("display", spec.name);
  if (!node.contains("role") || !node["role"].is_string())
    throw DataError(vctx + ": missing string field 'role'");
  auto role = ParseRole(node["role"].get<std::string>());
  if (!role) throw DataError(vctx + ": unknown role '" + node["role"].get<std::string>() + "'");
  spec.role = *role;

  if (node.contains("categories")) {
    const json& cats = node["categories"];
    if (!cats.is_object()) throw DataError(vctx + ".categories: expected an object");
    for (auto it = cats.begin(); it != cats.end(); ++it) {
      if (!it.value().is_string())
        throw DataError(vctx + ".categories['" + it.key() + "']: label must be a string");
      spec.categories[CodeKey(it.key(), vctx + ".categories")] = it.value().get<std::string>();
    }
  }
  if (node.contains("category_range")) {
    const json& range = node["category_range"];
    if (!range.is_array() || range.size() != 2 || !range[0].is_number_integer() ||
        !range[1].is_number_integer())
      throw DataError(vctx + ".category_range: expected [min, max]");
    const int lo = range[0].get<int>();
    const int hi = range[1].get<int>();
    if (hi < lo) throw DataError(vctx + ".category_range: max < min");
    for (int code = lo; code <= hi; ++code) {
      spec.categories.emplace(code, std::to_string(code));
    }
  }
  if (node.contains("missing_label")) {
    if (!node["missing_label"].is_string())
      throw DataError(vctx + ".missing_label: expected a string");
    spec.missing_label = node["missing_label"].get<std::string>();
  }
  if (node.contains("missing")) {
    const json& miss = node["missing"];
    if (!miss.is_array()) throw DataError(vctx + ".missing: expected an array");
    for (const json& m : miss) {
      if (!m.is_number_integer()) throw DataError(vctx + ".missing: codes must be integers");
      spec.missing_codes.insert(m.get<int>());
    }
  }
  if (node.contains("los_days")) {
    const json& los = node["los_days"];
    if (!los.is_object()) throw DataError(vctx + ".los_days: expected an object");
    for (auto it = los.begin(); it != los.end(); ++it) {
      const json& r = it.value();
      if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() ||
          !r[1].is_number_integer())
        throw DataError(vctx + ".los_days['" + it.key() + "']: expected [min_days, max_days]");
      spec.los_days[CodeKey(it.key(), vctx + ".los_days")] =
          DayRange{r[0].get<int>(), r[1].get<int>()};
    }
  }
  return spec;
}

json VariableToJson(const VariableSpec& spec) {
  json node = json::object();
  node["name"] = spec.name;
  node["display"] = spec.display_name;
  node["role"] = std::string(RoleName(spec.role));
  // Runs of numeric-labelled codes (identifiers, area codes) collapse to a range.
  const bool numeric_run =
      spec.categories.size() > 16 &&
      spec.categories.rbegin()->first - spec.categories.begin()->first + 1 ==
          static_cast<int>(spec.categories.size()) &&
      std::all_of(spec.categories.begin(), spec.categories.end(),
                  [](const auto& kv) { return kv.second == std::to_string(kv.first); });
  if (numeric_run) {
    node["category_range"] =
        json::array({spec.categories.begin()->first, spec.categories.rbegin()->first});
  } else {
    json cats = json::object();
    for (const auto& [code, label] : spec.categories) cats[std::to_string(code)] = label;
    node["categories"] = cats;
  }
  node["missing"] = json(std::vector<int>(spec.missing_codes.begin(), spec.missing_codes.end()));
  if (!spec.missing_label.empty()) node["missing_label"] = spec.missing_label;
  if (!spec.los_days.empty()) {
    json los = json::object();
    for (const auto& [code, r] : spec.los_days)
      los[std::to_string(code)] = json::array({r.min_days, r.max_days});
    node["los_days"] = los;
  }
  return node;
}

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

// Builds a derived schema holding the given variables (in order).
CodebookPtr DeriveSchema(const Codebook& base, std::vector<VariableSpec> vars) {
  return std::make_shared<const Codebook>(base.version(), std::move(vars));
}

}  // namespace

std::string_view RoleName(Role role) {
  for (const auto& [r, name] : kRoleNames)
    if (r == role) return name;
  return "feature";
}

std::optional<Role> ParseRole(std::string_view name) {
  for (const auto& [r, n] : kRoleNames)
    if (n == name) return r;
  return std::nullopt;
}

std::string VariableSpec::LabelOf(int code) const {
  auto it = categories.find(code);
  if (it != categories.end()) return it->second;
  return "missing(" + std::to_string(code) + ")";
}

Codebook::Codebook(std::string version, std::vector<VariableSpec> variables)
    : version_(std::move(version)), variables_(std::move(variables)) {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (!index_.emplace(variables_[i].name, i).second)
      throw DataError("duplicate variable name '" + variables_[i].name + "'");
  }
}

std::optional<std::size_t> Codebook::IndexOf(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const VariableSpec& Codebook::Get(std::string_view name) const {
  auto idx = IndexOf(name);
  if (!idx) throw DataError("unknown variable '" + std::string(name) + "'");
  return variables_[*idx];
}

std::optional<std::size_t> Codebook::FindRole(Role role) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].role == role) return i;
  return std::nullopt;
}

void Codebook::Validate() const {
  std::size_t cohort = 0;
  std::size_t target = 0;
  for (const VariableSpec& v : variables_) {
    if (v.name.empty()) throw DataError("variable with empty name");
    if (v.categories.empty() && v.role != Role::kIdDrop)
      throw DataError("variable '" + v.name + "' declares no category codes");
    for (const auto& [code, label] : v.categories) {
      if (code < 0)
        throw DataError("variable '" + v.name + "': category code " + std::to_string(code) +
                        " is negative");
      if (label.empty())
        throw DataError("variable '" + v.name + "': category " + std::to_string(code) +
                        " has an empty label");
    }
    for (int m : v.missing_codes) {
      if (v.categories.count(m))
        throw DataError("variable '" + v.name + "': missing code " + std::to_string(m) +
                        " is also a category code");
    }
    if (v.role == Role::kCohortSelector) ++cohort;
    if (v.role == Role::kTargetSource) {
      ++target;
      for (const auto& [code, label] : v.categories) {
        if (!v.los_days.count(code))
          throw DataError("target variable '" + v.name + "': code " + std::to_string(code) +
                          " has no los_days entry");
      }
    }
  }
  if (cohort != 1)
    throw DataError("codebook must have exactly one cohort-selector variable, found " +
                    std::to_string(cohort));
  if (target != 1)
    throw DataError("codebook must have exactly one target-source variable, found " +
                    std::to_string(target));
}

Codebook ParseCodebook(std::string_view text, const std::string& source, bool validate) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw DataError(source + ":" + std::to_string(LineOfOffset(text, e.byte)) +
                    ": parse error: " + e.what());
  }
  if (!doc.is_object()) throw DataError(source + ": top level must be an object");
  if (!doc.contains("variables") || !doc["variables"].is_array())
    throw DataError(source + ": missing array field 'variables'");
  std::vector<VariableSpec> vars;
  std::size_t i = 0;
  for (const json& node : doc["variables"]) vars.push_back(ParseVariable(node, i++, source));
  Codebook cb(doc.value("version", std::string()), std::move(vars));
  if (validate) cb.Validate();
  return cb;
}

Codebook LoadCodebook(const std::filesystem::path& path) {
  return ParseCodebook(ReadFile(path), path.string());
}

std::string SerializeCodebook(const Codebook& codebook) {
  json doc = json::object();
  doc["version"] = codebook.version();
  json vars = json::array();
  for (const VariableSpec& v : codebook.variables()) vars.push_back(VariableToJson(v));
  doc["variables"] = vars;
  return doc.dump(2) + "\n";
}

CodedTable::CodedTable(CodebookPtr schema, std::vector<std::vector<int>> columns,
                       std::size_t rows)
    : schema_(std::move(schema)), columns_(std::move(columns)), rows_(rows) {
  if (!schema_) throw InvalidArgument("CodedTable requires a schema");
  if (columns_.size() != schema_->size())
    throw InvalidArgument("CodedTable: column count does not match schema");
  for (const auto& c : columns_)
    if (c.size() != rows_) throw InvalidArgument("CodedTable: ragged columns");
}

std::span<const int> CodedTable::column(std::string_view name) const {
  auto idx = schema_->IndexOf(name);
  if (!idx) throw DataError("table has no column '" + std::string(name) + "'");
  return columns_[*idx];
}

CodedTable CodedTable::SelectRows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<int>> cols(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    cols[c].reserve(rows.size());
    for (std::size_t r : rows) cols[c].push_back(columns_[c][r]);
  }
  return CodedTable(schema_, std::move(cols), rows.size());
}

CodedTable CodedTable::SelectColumns(std::span<const std::string> names) const {
  std::vector<VariableSpec> vars;
  std::vector<std::vector<int>> cols;
  for (const std::string& n : names) {
    auto idx = schema_->IndexOf(n);
    if (!idx) throw DataError("table has no column '" + n + "'");
    vars.push_back(schema_->at(*idx));
    cols.push_back(columns_[*idx]);
  }
  return CodedTable(DeriveSchema(*schema_, std::move(vars)), std::move(cols), rows_);
}

CodedTable CodedTable::DropColumns(std::span<const std::string> names) const {
  std::vector<std::string> keep;
  for (const VariableSpec& v : schema_->variables()) {
    if (std::find(names.begin(), names.end(), v.name) == names.end()) keep.push_back(v.name);
  }
  return SelectColumns(keep);
}

std::string_view CohortName(Cohort cohort) {
  return cohort == Cohort::kInpatient ? "inpatient" : "outpatient";
}

std::optional<Cohort> ParseCohort(std::string_view name) {
  if (name == "inpatient") return Cohort::kInpatient;
  if (name == "outpatient") return Cohort::kOutpatient;
  return std::nullopt;
}

LabeledTable LabeledTable::SelectRows(std::span<const std::size_t> rows) const {
  LabeledTable out{table.SelectRows(rows), {}, cohort};
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  return out;
}

CodedTable ParseTable(std::string_view csv, const CodebookPtr& codebook,
                      const std::string& source) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < csv.size()) {
      std::size_t end = csv.find('\n', pos);
      if (end == std::string_view::npos) end = csv.size();
      line = csv.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!Trim(line).empty()) return true;
    }
    return false;
  };

  std::string_view header;
  if (!next_line(header)) throw DataError(source + ": empty file (no header row)");
  const auto header_cells = SplitCsvLine(header);
  // file column -> codebook index
  std::vector<std::size_t> mapping;
  std::vector<bool> seen(codebook->size(), false);
  for (std::size_t c = 0; c < header_cells.size(); ++c) {
    const std::string name(Trim(header_cells[c]));
    auto idx = codebook->IndexOf(name);
    if (!idx)
      throw DataError(source + ":" + std::to_string(line_no) + ": unknown variable '" + name +
                      "' in header (column " + std::to_string(c + 1) + ")");
    if (seen[*idx]) throw DataError(source + ": duplicate header column '" + name + "'");
    seen[*idx] = true;
    mapping.push_back(*idx);
  }
  for (std::size_t i = 0; i < codebook->size(); ++i) {
    if (!seen[i])
      throw DataError(source + ": header is missing codebook variable '" +
                      codebook->at(i).name + "'");
  }

  std::vector<std::vector<int>> cols(codebook->size());
  std::size_t rows = 0;
  std::string_view line;
  while (next_line(line)) {
    const auto cells = SplitCsvLine(line);
    if (cells.size() != mapping.size())
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(mapping.size()) + " cells, found " +
                      std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const VariableSpec& spec = codebook->at(mapping[c]);
      auto v = ParseInt(Trim(cells[c]));
      if (!v)
        throw DataError(source + ":" + std::to_string(line_no) + ": row " +
                        std::to_string(rows + 1) + ", column " + spec.name +
                        ": non-integer cell '" + std::string(Trim(cells[c])) + "'");
      if (spec.role != Role::kIdDrop && !spec.IsKnownCode(*v))
        throw DataError(source + ":" + std::to_string(line_no) + ": row " +
                        std::to_string(rows + 1) + ", column " + spec.name + ": code " +
                        std::to_string(*v) + " is not declared in the codebook");
      cols[mapping[c]].push_back(*v);
    }
    ++rows;
  }

  std::vector<VariableSpec> vars;
  std::vector<std::vector<int>> kept;
  for (std::size_t i = 0; i < codebook->size(); ++i) {
    if (codebook->at(i).role == Role::kIdDrop) continue;
    vars.push_back(codebook->at(i));
    kept.push_back(std::move(cols[i]));
  }
  return CodedTable(DeriveSchema(*codebook, std::move(vars)), std::move(kept), rows);
}

CodedTable IngestTable(const std::filesystem::path& csv, const CodebookPtr& codebook) {
  return ParseTable(ReadFile(csv), codebook, csv.string());
}

SparseDropResult DropSparseColumns(const CodedTable& table, double max_missing_ratio) {
  if (!(max_missing_ratio >= 0.0 && max_missing_ratio <= 1.0))
    throw InvalidArgument("max_missing_ratio must lie in [0, 1]");
  SparseDropResult result;
  if (table.rows() == 0) {
    result.table = table;
    return result;
  }
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const VariableSpec& spec = table.schema().at(c);
    if (spec.role == Role::kCohortSelector || spec.role == Role::kTargetSource) continue;
    std::size_t missing = 0;
    for (int code : table.column(c)) missing += spec.IsMissingCode(code) ? 1 : 0;
    const double ratio = static_cast<double>(missing) / static_cast<double>(table.rows());
    if (ratio > max_missing_ratio) result.dropped.push_back(spec.name);
  }
  result.table = table.DropColumns(result.dropped);
  return result;
}

CodedTable FoldMissingAsCategory(const CodedTable& table, Diagnostics* diag) {
  std::vector<VariableSpec> vars;
  std::vector<std::vector<int>> cols;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    VariableSpec spec = table.schema().at(c);
    std::vector<int> col(table.column(c).begin(), table.column(c).end());
    const bool structural =
        spec.role == Role::kCohortSelector || spec.role == Role::kTargetSource;
    if (!structural && !spec.missing_codes.empty()) {
      std::size_t missing = 0;
      for (int code : col) missing += spec.IsMissingCode(code) ? 1 : 0;
      if (missing > 0) {
        const int fresh = spec.categories.empty() ? 0 : spec.categories.rbegin()->first + 1;
        for (int& code : col)
          if (spec.IsMissingCode(code)) code = fresh;
        spec.categories[fresh] =
            spec.missing_label.empty() ? std::string(kMissingCategoryLabel) : spec.missing_label;
        if (missing == col.size())
          Warn(diag, "column " + spec.name +
                         " is entirely missing; folded into a single uninformative category");
      }
      spec.missing_codes.clear();
    }
    vars.push_back(std::move(spec));
    cols.push_back(std::move(col));
  }
  return CodedTable(DeriveSchema(table.schema(), std::move(vars)), std::move(cols),
                    table.rows());
}

CohortSplit SplitCohorts(const CodedTable& table) {
  auto sel = table.schema().FindRole(Role::kCohortSelector);
  if (!sel) throw DataError("table has no cohort-selector column");
  const std::string sel_name = table.schema().at(*sel).name;
  std::vector<std::size_t> in_rows;
  std::vector<std::size_t> out_rows;
  CohortSplit split;
  const auto col = table.column(*sel);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const int code = col[r];
    if (code >= 3 && code <= 5) {
      in_rows.push_back(r);
    } else if (code >= 6 && code <= 8) {
      out_rows.push_back(r);
    } else if (code == 1 || code == 2) {
      ++split.excluded;
    } else {
      throw DataError("row " + std::to_string(r + 1) + ", column " + sel_name +
                      ": cohort code " + std::to_string(code) + " outside 1-8");
    }
  }
  const std::vector<std::string> drop{sel_name};
  split.inpatient = table.SelectRows(in_rows).DropColumns(drop);
  split.outpatient = table.SelectRows(out_rows).DropColumns(drop);
  return split;
}

LabeledTable BuildTarget(const CodedTable& table, Cohort cohort,
                         const LosThresholds& thresholds) {
  auto idx = table.schema().FindRole(Role::kTargetSource);
  if (!idx) throw DataError("table has no target-source (LOS) column");
  const VariableSpec& los = table.schema().at(*idx);
  const int threshold = thresholds.For(cohort);
  LabeledTable out;
  out.cohort = cohort;
  out.labels.reserve(table.rows());
  const auto col = table.column(*idx);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto it = los.los_days.find(col[r]);
    if (it == los.los_days.end())
      throw DataError("row " + std::to_string(r + 1) + ", column " + los.name + ": LOS code " +
                      std::to_string(col[r]) + " has no day-range mapping");
    out.labels.push_back(it->second.min_days > threshold ? 1 : 0);
  }
  const std::vector<std::string> drop{los.name};
  out.table = table.DropColumns(drop);
  return out;
}

std::string WriteTableCsv(const CodedTable& table, const std::vector<Label>* labels,
                          std::string_view label_column) {
  std::string out;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (c) out += ',';
    out += table.schema().at(c).name;
  }
  if (labels) {
    if (table.cols()) out += ',';
    out += label_column;
  }
  out += '\n';
  char buf[16];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (c) out += ',';
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), table.at(r, c));
      out.append(buf, p);
    }
    if (labels) {
      if (table.cols()) out += ',';
      out += static_cast<char>('0' + (*labels)[r]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace fairaudit
