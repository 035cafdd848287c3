// Copyright 2026 The tfdiff Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// nlohmann::json adapters shared by the .cpp files. Not installed.

#include <json.hpp>

#include "tfdiff/schedule.hpp"

namespace tfd {

using json = nlohmann::json;

void to_json(json& j, const ScheduleConfig& c);
void from_json(const json& j, ScheduleConfig& c);

/// Parses text, rethrowing parse and type errors as InvalidArgument.
json parse_json(const std::string& text, const char* what);

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->template get<T>();
}

}  // namespace tfd
