// Copyright (c) 2026 The plfuse Authors
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

#ifndef PLFUSE_IO_H_
#define PLFUSE_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace plfuse {

// All readers throw InputError on missing or unparsable files.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& content);

nlohmann::json ReadJson(const std::filesystem::path& path);
// Pretty-printed with a two-space indent and a trailing newline.
void WriteJson(const std::filesystem::path& path,
               const nlohmann::ordered_json& value);
std::string DumpJson(const nlohmann::ordered_json& value);

// One compact JSON value per line. Blank lines are skipped on read.
std::vector<nlohmann::json> ReadJsonLines(const std::filesystem::path& path);
void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<nlohmann::ordered_json>& values);

// One entry per non-empty line, trailing '\r' stripped.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

}  // namespace plfuse

#endif  // PLFUSE_IO_H_
