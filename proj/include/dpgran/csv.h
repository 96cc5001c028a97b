// Copyright 2026 The dpgran Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPGRAN_CSV_H_
#define DPGRAN_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace dpgran {

// Shortest round-trippable decimal form ("%.17g" trimmed); "inf" for
// positive infinity.
std::string FormatDouble(double value);

// Quotes a field when it contains a comma, quote, or newline.
std::string CsvEscape(std::string_view field);

std::string CsvLine(const std::vector<std::string>& fields);

// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> ParseCsvLine(std::string_view line);

absl::StatusOr<std::string> ReadFileToString(const std::string& path);
absl::Status WriteStringToFile(const std::string& path,
                               std::string_view contents);

}  // namespace dpgran

#endif  // DPGRAN_CSV_H_
