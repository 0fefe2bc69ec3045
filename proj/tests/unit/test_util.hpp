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

#ifndef FAIRAUDIT_TESTS_TEST_UTIL_HPP_
#define FAIRAUDIT_TESTS_TEST_UTIL_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/schema.hpp"

namespace fairaudit::testing {

inline VariableSpec Var(std::string name, Role role, std::vector<int> codes,
                        std::vector<int> missing = {}) {
  VariableSpec v;
  v.name = name;
  v.display_name = std::move(name);
  v.role = role;
  for (int c : codes) v.categories[c] = "c" + std::to_string(c);
  v.missing_codes.insert(missing.begin(), missing.end());
  return v;
}

inline CodebookPtr Schema(std::vector<VariableSpec> vars) {
  return std::make_shared<const Codebook>("test", std::move(vars));
}

inline CodedTable Table(std::vector<VariableSpec> vars, std::vector<std::vector<int>> columns) {
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  return CodedTable(Schema(std::move(vars)), std::move(columns), rows);
}

// Fresh empty directory under the system temp path.
inline std::filesystem::path ScratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fairaudit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fairaudit::testing

#endif  // FAIRAUDIT_TESTS_TEST_UTIL_HPP_
