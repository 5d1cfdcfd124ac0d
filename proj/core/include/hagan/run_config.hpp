// Copyright 2026 The hagan3d Authors. All rights reserved.
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

#include <cstdint>
#include <string>
#include <vector>

#include "hagan/networks.hpp"
#include "hagan/trainer.hpp"

namespace hagan {

// Everything a command needs, echoed verbatim into every artifact it writes.
//
// File grammar: one `key = value` per line; `#` starts a comment; blank lines
// are ignored; keys are those listed by RunConfig::keys() and unlisted keys
// keep their desk() values. Booleans are true/false, ratios are `a/b` or a
// decimal with an exact small denominator.
struct RunConfig {
  TrainConfig train;
  SRConfig sr;
  std::int64_t sr_steps = 2000;
  int sr_batch = 2;
  int phantoms = 200;
  std::uint64_t phantom_seed = 1000;
  int sr_phantoms = 100;
  std::uint64_t sr_phantom_seed = 5000;
  int log_every = 50;
  std::string out_dir = ".";

  static RunConfig desk();
  static std::vector<std::string> keys();

  // Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  void validate() const;
  // Sorted `key = value` lines; parse(echo()) reproduces the config exactly.
  std::string echo() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
};

// Parses "a/b" or a decimal into a reduced rational with denominator <= 4096.
Ratio parse_ratio(const std::string& text);

// Output directory: HAGAN_OUT_DIR when set, otherwise `fallback`.
std::string output_dir(const std::string& fallback);

}  // namespace hagan
