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

#include <map>
#include <string>
#include <vector>

namespace tfd {

/// Categorical condition vector, field name -> value (e.g. "class" -> "2").
using ConditionLabel = std::map<std::string, std::string>;

/// One categorical field and its vocabulary in index order.
struct ConditionField {
  std::string name;
  std::vector<std::string> values;
};

/// Parses "k=v,k2=v2". Throws InvalidArgument on malformed pairs or
/// repeated keys. An empty string gives an empty label.
ConditionLabel parse_condition(const std::string& text);
std::string format_condition(const ConditionLabel& label);

/// Field-wise vocabulary indices; throws InvalidArgument for unknown or
/// missing fields and values.
std::vector<int> encode_condition(const std::vector<ConditionField>& fields, const ConditionLabel& label);

/// Collects sorted vocabularies from a set of labels.
std::vector<ConditionField> build_vocabulary(const std::vector<ConditionLabel>& labels);

}  // namespace tfd
