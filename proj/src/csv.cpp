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

#include "qisim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "qisim/config.hpp"
#include "qisim/error.hpp"

namespace qisim {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

std::string schema_comment(std::string_view axis, std::uint64_t seed,
                           std::string_view snr_definition) {
  std::string out = "# qi-sim v";
  out += kVersion;
  out += " axis=";
  out += axis;
  out += " seed=" + std::to_string(seed) + " snr_def=";
  out += snr_definition;
  return out;
}

std::string sweep_to_csv(const SweepResult& sweep, std::uint64_t seed) {
  std::string out = schema_comment(to_string(sweep.axis), seed, sweep.snr_definition);
  out += "\nx,S,S_err,Sbar,Sbar_err,verdict";
  for (const std::string& c : sweep.extra_columns) out += "," + c;
  out += "\n";
  for (const SweepPoint& p : sweep.points) {
    out += format_number(p.x) + "," + format_number(p.s) + "," + format_number(p.s_err) +
           "," + format_number(p.sbar) + "," + format_number(p.sbar_err) + ",";
    out += to_string(p.verdict);
    for (double e : p.extras) out += "," + format_number(e);
    out += "\n";
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace qisim
