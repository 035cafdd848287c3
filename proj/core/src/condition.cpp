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

#include "tfdiff/condition.hpp"

#include <algorithm>
#include <set>

#include "tfdiff/error.hpp"

namespace tfd {

ConditionLabel parse_condition(const std::string& text) {
  ConditionLabel out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const auto item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw InvalidArgument("condition: expected key=value, got '" + item + "'");
    }
    if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
      throw InvalidArgument("condition: repeated key '" + item.substr(0, eq) + "'");
    }
    pos = end + 1;
  }
  return out;
}

std::string format_condition(const ConditionLabel& label) {
  std::string out;
  for (const auto& [k, v] : label) {
    if (!out.empty()) out += ',';
    out += k + '=' + v;
  }
  return out;
}

std::vector<int> encode_condition(const std::vector<ConditionField>& fields, const ConditionLabel& label) {
  std::vector<int> idx;
  idx.reserve(fields.size());
  for (const auto& f : fields) {
    const auto it = label.find(f.name);
    if (it == label.end()) throw InvalidArgument("condition: missing field '" + f.name + "'");
    const auto pos = std::find(f.values.begin(), f.values.end(), it->second);
    if (pos == f.values.end()) {
      throw InvalidArgument("condition: unknown value '" + it->second + "' for field '" + f.name + "'");
    }
    idx.push_back(static_cast<int>(pos - f.values.begin()));
  }
  for (const auto& [k, v] : label) {
    const bool known = std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.name == k; });
    if (!known) throw InvalidArgument("condition: unknown field '" + k + "'");
  }
  return idx;
}

std::vector<ConditionField> build_vocabulary(const std::vector<ConditionLabel>& labels) {
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& l : labels) {
    for (const auto& [k, v] : l) seen[k].insert(v);
  }
  std::vector<ConditionField> out;
  for (auto& [k, vs] : seen) out.push_back({k, {vs.begin(), vs.end()}});
  return out;
}

}  // namespace tfd
