// Copyright 2026 The qi-sim Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "qisim/detector.hpp"

namespace qisim {

/// Shortest round-trip decimal form; "inf"/"nan" for non-finite values.
std::string format_number(double value);

/// `# qi-sim v<version> axis=<axis> seed=<seed> snr_def=<definition>`.
std::string schema_comment(std::string_view axis, std::uint64_t seed,
                           std::string_view snr_definition);

/// Schema comment, column header `x,S,S_err,Sbar,Sbar_err,verdict[,extras]`
/// and one LF-terminated row per point.
std::string sweep_to_csv(const SweepResult& sweep, std::uint64_t seed);

/// Writes to a sibling temporary file and renames it over `path`.
/// Throws IoError when the file cannot be written.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace qisim
