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

#ifndef FAIRAUDIT_MODEL_IO_HPP_
#define FAIRAUDIT_MODEL_IO_HPP_

#include "fairaudit/learners.hpp"
#include "fairaudit/tune.hpp"
#include "json.hpp"

namespace fairaudit {

// Model summaries as JSON: trees as node arrays, linear models as weight
// lists. The encoding dictionary travels with the model.
nlohmann::json ModelToJson(const Model& model);
Model ModelFromJson(const nlohmann::json& doc);

nlohmann::json EncodingToJson(const Encoding& encoding);
EncodingPtr EncodingFromJson(const nlohmann::json& doc);

// {"learner": "<kind>", ...fields}. Parsing starts from the defaults, so
// omitted fields keep them; unknown fields raise ConfigError.
nlohmann::json LearnerParamsToJson(const LearnerParams& params);
LearnerParams LearnerParamsFromJson(const nlohmann::json& doc);

}  // namespace fairaudit

#endif  // FAIRAUDIT_MODEL_IO_HPP_
