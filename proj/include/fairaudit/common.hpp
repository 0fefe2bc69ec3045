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

#ifndef FAIRAUDIT_COMMON_HPP_
#define FAIRAUDIT_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairaudit {

// Error categories map onto distinct CLI exit codes.
enum class ErrorKind { kConfig, kData, kTraining, kIo, kInvalidArgument };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ConfigError(const std::string& msg) {
  return Error(ErrorKind::kConfig, msg);
}
inline Error DataError(const std::string& msg) {
  return Error(ErrorKind::kData, msg);
}
inline Error TrainingError(const std::string& msg) {
  return Error(ErrorKind::kTraining, msg);
}
inline Error IoError(const std::string& msg) {
  return Error(ErrorKind::kIo, msg);
}
inline Error InvalidArgument(const std::string& msg) {
  return Error(ErrorKind::kInvalidArgument, msg);
}

// Collects non-fatal warnings raised while running a stage. Every warning a
// run produces ends up in the report's ledger.
class Diagnostics {
 public:
  void Warn(std::string message) { warnings_.push_back(std::move(message)); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool empty() const { return warnings_.empty(); }
  void Append(const Diagnostics& other) {
    warnings_.insert(warnings_.end(), other.warnings_.begin(),
                     other.warnings_.end());
  }

 private:
  std::vector<std::string> warnings_;
};

inline void Warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->Warn(std::move(message));
}

// Binary label: 1 = long-term stay, 0 = short-term stay.
using Label = std::uint8_t;

}  // namespace fairaudit

#endif  // FAIRAUDIT_COMMON_HPP_
